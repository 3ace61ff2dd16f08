"""Named experiments for the standard one-mode, multi-mode and continuum studies."""

from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from quantum_dynamo.exceptions import UnknownPresetError
from quantum_dynamo.harness.config import ExperimentConfig

V_SLOW = 0.04


def _one_mode_omega_sweep() -> Dict[str, Any]:
    omegas = [0.02, 0.04, 0.08]
    ratio = 0.01
    return {
        "solver": "ed",
        "model": {"H": 1.0, "v": V_SLOW, "preparation": "P1"},
        "bath": {"kind": "modes", "omegas": [0.04], "gs": [0.02]},
        "grid": {"n_half": 6, "steps_per_half": 400},
        "sweep": {
            "axes": {"bath.omegas.0": omegas, "bath.gs.0": [float(np.sqrt(ratio * w)) for w in omegas]},
            "mode": "zip",
        },
    }


def _resonant_weak() -> Dict[str, Any]:
    return {
        "solver": "ed",
        "model": {"H": 1.0, "v": V_SLOW, "preparation": "P1"},
        "bath": {"kind": "modes", "resonant": True, "gs": [0.01]},
        "grid": {"n_half": 6, "steps_per_half": 400},
        "sweep": {"axes": {"bath.gs.0": [0.01, 0.02, 0.04]}},
    }


def _resonant_to_frozen() -> Dict[str, Any]:
    return {
        "solver": "ed",
        "model": {"H": 1.0, "v": V_SLOW, "preparation": "P1"},
        "bath": {"kind": "modes", "resonant": True, "gs": [0.04]},
        "grid": {"n_half": 2, "steps_per_half": 400},
        "sweep": {"axes": {"bath.gs.0": [float(np.sqrt(x * V_SLOW)) for x in (0.1, 1.0, 20.0)]}},
    }


def _twelve_modes() -> Dict[str, Any]:
    return {
        "solver": "ed",
        "model": {"H": 1.0, "v": V_SLOW, "alpha": 0.02, "omega_c": 100.0, "cutoff": "hard", "preparation": "P1"},
        "bath": {"kind": "discretized", "n_modes": 12, "omega_max": 100.0},
        "grid": {"n_half": 3, "steps_per_half": 200},
        "options": {"truncation": [2] * 12, "strict": False},
    }


def _kondo_sx() -> Dict[str, Any]:
    return {
        "solver": "sse",
        "model": {"H": 1.0, "v": 0.01, "omega_c": 100.0},
        "grid": {"n_half": 0.5, "steps_per_half": 400},
        "options": {"n_traj": 2000, "fourier_modes": 512},
        "sweep": {"axes": {"model.alpha": [0.1, 0.2, 0.3]}},
    }


def _chern_sweep() -> Dict[str, Any]:
    return {
        "solver": "ed",
        "model": {"H": 1.0, "v": V_SLOW, "preparation": "P1"},
        "bath": {"kind": "modes", "resonant": True, "gs": [0.04]},
        "grid": {"n_half": 1, "steps_per_half": 400},
        "sweep": {"axes": {"bath.gs.0": [r * V_SLOW for r in (0.5, 1.0, 2.0, 4.0, 8.0)]}},
    }


def _sse_alpha_v_grid() -> Dict[str, Any]:
    return {
        "solver": "sse",
        "model": {"H": 1.0, "v": V_SLOW, "omega_c": 100.0},
        "grid": {"n_half": 1, "steps_per_half": 400},
        "options": {"n_traj": 1000},
        "sweep": {"axes": {"model.alpha": [0.01, 0.2], "model.v": [V_SLOW, 1.0]}},
    }


def _niba_alpha_v_grid() -> Dict[str, Any]:
    data = _sse_alpha_v_grid()
    data["solver"] = "niba"
    data["options"] = {}
    data["grid"] = {"n_half": 1, "steps_per_half": 2000}
    return data


def _gkls_weak() -> Dict[str, Any]:
    data = _sse_alpha_v_grid()
    data["solver"] = "gkls"
    data["options"] = {}
    data["sweep"] = {"axes": {"model.v": [V_SLOW, 1.0]}}
    data["model"]["alpha"] = 0.01
    return data


def _sse_power_vs_alpha() -> Dict[str, Any]:
    return {
        "solver": "sse",
        "model": {"H": 1.0, "v": V_SLOW, "omega_c": 100.0},
        "grid": {"n_half": 1, "steps_per_half": 400},
        "options": {"n_traj": 1000},
        "sweep": {"axes": {"model.alpha": [0.02, 0.05, 0.1, 0.2, 0.3, 0.45]}},
    }


def _bias_power() -> Dict[str, Any]:
    return {
        "solver": "ed",
        "model": {"H": 1.0, "v": V_SLOW, "preparation": "P1"},
        "bath": {"kind": "modes", "resonant": True, "gs": [0.08]},
        "grid": {"n_half": 1, "steps_per_half": 400},
        "sweep": {"axes": {"model.M": [-0.5, 0.0, 0.5], "bath.gs.0": [r * V_SLOW for r in range(1, 9)]}},
    }


def _sse_vs_ed() -> Dict[str, Any]:
    return {
        "solver": "sse",
        "model": {"H": 1.0, "v": V_SLOW, "alpha": 0.01, "omega_c": 100.0, "cutoff": "hard"},
        "grid": {"n_half": 1, "steps_per_half": 400},
        "options": {"n_traj": 10000},
        "sweep": {"axes": {"model.v": [V_SLOW, 0.3]}},
    }


def _ed_ten_modes() -> Dict[str, Any]:
    return {
        "solver": "ed",
        "model": {"H": 1.0, "v": V_SLOW, "alpha": 0.01, "omega_c": 100.0, "cutoff": "hard", "preparation": "P1"},
        "bath": {"kind": "discretized", "n_modes": 10, "omega_max": 100.0},
        "grid": {"n_half": 1, "steps_per_half": 400},
        "options": {"truncation": [2] * 10, "strict": False},
        "sweep": {"axes": {"model.v": [V_SLOW, 0.3]}},
    }


def _fluctuation_study() -> Dict[str, Any]:
    return {
        "solver": "ed",
        "model": {"H": 1.0, "v": V_SLOW, "preparation": "P1"},
        "bath": {"kind": "modes", "resonant": True, "gs": [0.04]},
        "grid": {"n_half": 2, "steps_per_half": 400},
        "sweep": {"axes": {"bath.gs.0": [0.02, 0.08, 0.2], "model.v": [V_SLOW, 0.3]}},
    }


PRESETS: Dict[str, Tuple[str, Callable[[], Dict[str, Any]]]] = {
    "one_mode_omega_sweep": ("one mode, omega sweep at fixed g^2/omega", _one_mode_omega_sweep),
    "resonant_weak": ("resonant mode, weak-coupling g sweep", _resonant_weak),
    "resonant_to_frozen": ("resonant mode from weak to frozen coupling", _resonant_to_frozen),
    "twelve_modes": ("twelve-mode linear spectrum, alpha = 0.02", _twelve_modes),
    "kondo_sx": ("SSE <sigma^x>(pi/2v) against the Bethe-ansatz value", _kondo_sx),
    "chern_sweep": ("resonant mode g/v sweep for C_dyn and dE_dyn", _chern_sweep),
    "sse_alpha_v_grid": ("SSE spin dynamics on an alpha x v grid", _sse_alpha_v_grid),
    "niba_alpha_v_grid": ("NIBA on the SSE alpha x v grid", _niba_alpha_v_grid),
    "gkls_weak": ("GKLS at weak coupling on the SSE v values", _gkls_weak),
    "sse_power_vs_alpha": ("SSE dynamo energy and output power against alpha", _sse_power_vs_alpha),
    "bias_power": ("resonant mode with bias M in {-0.5, 0, 0.5}", _bias_power),
    "sse_vs_ed": ("SSE weak coupling for comparison with ED", _sse_vs_ed),
    "ed_ten_modes": ("ED with ten hard-cutoff modes for comparison with sse_vs_ed", _ed_ten_modes),
    "fluctuation_study": ("resonant-mode energy and fluctuation decomposition", _fluctuation_study),
}


def preset_names() -> List[str]:
    return list(PRESETS)


def get_preset(name: str) -> ExperimentConfig:
    """Validated configuration of a named preset.

    Raises:
        UnknownPresetError: if no preset has this name
    """
    if name not in PRESETS:
        raise UnknownPresetError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    data = PRESETS[name][1]()
    data["preset"] = name
    return ExperimentConfig.from_dict(data)
