"""Energetics and topology post-processing."""

from .ledger import (
    LEDGER_COLUMNS,
    EnergyLedger,
    average_power,
    build_continuum_ledger,
    build_ledger,
    dis_energy,
    drive_power,
    dynamo_energy,
    efficiencies,
    efficiency_marks,
    fluct_energy,
    heat_work_split,
    spin_energy,
    work_drive,
)
from .topology import (
    ChernNumbers,
    RelationMode,
    berry_chern,
    chern_numbers,
    ground_state_chern,
    topology_energy_relation,
)

__all__ = [
    "LEDGER_COLUMNS",
    "ChernNumbers",
    "EnergyLedger",
    "RelationMode",
    "average_power",
    "berry_chern",
    "build_continuum_ledger",
    "build_ledger",
    "chern_numbers",
    "dis_energy",
    "drive_power",
    "dynamo_energy",
    "efficiencies",
    "efficiency_marks",
    "fluct_energy",
    "ground_state_chern",
    "heat_work_split",
    "spin_energy",
    "topology_energy_relation",
    "work_drive",
]
