"""INI experiment files.

Example::

    [run]
    solver = ed

    [model]
    H = 1.0
    v = 0.04
    preparation = P1

    [bath]
    kind = modes
    resonant = true
    gs = 0.02

    [grid]
    n_half = 2
    steps_per_half = 400

    [sweep]
    bath.gs.0 = 0.01, 0.02, 0.04
"""

import configparser
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from quantum_dynamo.exceptions import ConfigValidationError
from quantum_dynamo.harness.config import ExperimentConfig

logger = logging.getLogger(__name__)

SECTIONS = ("run", "model", "bath", "grid", "solver", "sweep")
LIST_KEYS = {("bath", "omegas"), ("bath", "gs"), ("solver", "truncation")}


def _scalar(text: str) -> Any:
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _list(text: str) -> list:
    return [_scalar(part) for part in text.split(",") if part.strip()]


def parse_ini(text: str, source: str = "<string>") -> Dict[str, Any]:
    """Turn INI text into the nested dictionary ExperimentConfig validates.

    Raises:
        ConfigValidationError: for unknown sections or unreadable syntax
    """
    parser = configparser.ConfigParser(interpolation=None)
    # keep parameter names such as H and M case-sensitive
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigValidationError(f"cannot parse {source}: {exc}") from exc

    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown:
        raise ConfigValidationError(f"unknown sections {unknown}", keys=unknown)

    data: Dict[str, Any] = {}
    if parser.has_section("run"):
        for key, value in parser.items("run"):
            data[key] = _scalar(value)
    for section, target in (("model", "model"), ("bath", "bath"), ("grid", "grid"), ("solver", "options")):
        if not parser.has_section(section):
            continue
        block = {}
        for key, value in parser.items(section):
            block[key] = _list(value) if (section, key) in LIST_KEYS else _scalar(value)
        data[target] = block
    if parser.has_section("sweep"):
        axes = {}
        mode = "product"
        for key, value in parser.items("sweep"):
            if key == "mode":
                mode = value.strip()
            else:
                axes[key.replace("solver.", "options.", 1)] = _list(value)
        data["sweep"] = {"axes": axes, "mode": mode}
    return data


def load_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Read and validate an experiment file; ``overrides`` replace top-level entries."""
    path = Path(path)
    if not path.exists():
        raise ConfigValidationError(f"config file not found: {path}", keys=["--config"])
    data = parse_ini(path.read_text(), source=str(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    logger.debug("loaded %s with sections %s", path, sorted(data))
    return ExperimentConfig.from_dict(data)
