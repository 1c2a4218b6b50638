import logging
import os
from pathlib import Path
from typing import Dict, Iterable, Optional, Type, Union

import colorlog
from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError

from experiments.harness import ExperimentConfig
from formulations.arch import HyperParams
from mip.branch_bound import MIPParams
from mip.simplex import LPParams
from training.sgd import SgdConfig


class ConfigError(ValueError):
    """Unreadable config file, unknown key or invalid value."""


def setup_logging():
    """Configure application logging."""
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(
        "%(log_color)s%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        log_colors={
            'DEBUG': 'cyan',
            'INFO': 'green',
            'WARNING': 'yellow',
            'ERROR': 'red',
            'CRITICAL': 'red,bg_white',
        }
    ))

    log_level = os.getenv("LOG_LEVEL", "INFO").upper()
    valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    if log_level not in valid_levels:
        log_level = "INFO"

    numeric_level = getattr(logging, log_level, logging.INFO)
    logging.basicConfig(level=numeric_level, handlers=[handler], force=True)

    logger = logging.getLogger(__name__)
    logger.info(f"Logging level set to {log_level}")

    return logger


class Settings(BaseModel):
    """Every parameter model, grouped by config-file section."""
    hyper: HyperParams = Field(default_factory=HyperParams, description="Section HYPER")
    mip: MIPParams = Field(default_factory=MIPParams, description="Section MIP")
    lp: LPParams = Field(default_factory=LPParams, description="Section LP; also used as mip.lp")
    sgd: SgdConfig = Field(default_factory=SgdConfig, description="Section SGD")
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig, description="Section EXPERIMENT")


SECTIONS: Dict[str, Type[BaseModel]] = {
    "HYPER": HyperParams,
    "MIP": MIPParams,
    "LP": LPParams,
    "SGD": SgdConfig,
    "EXPERIMENT": ExperimentConfig,
}
_LIST_FIELDS = {("EXPERIMENT", "arms"), ("EXPERIMENT", "seeds")}


def parse_overrides(pairs: Iterable[str]) -> Dict[str, str]:
    """Turn `SECTION__FIELD=value` strings into a mapping."""
    parsed = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override {pair!r} is not SECTION__FIELD=value")
        parsed[key.strip()] = value.strip()
    return parsed


def _section_values(raw: Dict[str, Optional[str]]) -> Dict[str, Dict[str, object]]:
    sections: Dict[str, Dict[str, object]] = {name: {} for name in SECTIONS}
    for key, value in raw.items():
        section, sep, field = key.upper().partition("__")
        if not sep or section not in SECTIONS:
            raise ConfigError(f"unknown config key {key!r}; expected SECTION__FIELD with SECTION in {list(SECTIONS)}")
        model = SECTIONS[section]
        fields = {name.lower(): name for name in model.model_fields if name != "lp"}
        if field.lower() not in fields:
            raise ConfigError(f"unknown field {field!r} in section {section}; choose from {sorted(fields.values())}")
        name = fields[field.lower()]
        value = (value or "").strip()
        if (section, name) in _LIST_FIELDS:
            sections[section][name] = [item.strip() for item in value.split(",") if item.strip()]
        elif value == "":
            sections[section][name] = None
        else:
            sections[section][name] = value
    return sections


def load_settings(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, str]] = None) -> Settings:
    """
    Build Settings from an optional key=value file plus overrides.

    Args:
        path: Config file with SECTION__FIELD=value lines (dotenv syntax)
        overrides: Values taking precedence over the file

    Returns:
        Settings

    Raises:
        ConfigError: On a missing file, an unknown key or an invalid value
    """
    logger = logging.getLogger(__name__)
    raw: Dict[str, Optional[str]] = {}
    if path is not None:
        if not Path(path).is_file():
            logger.error(f"config file {path} does not exist")
            raise ConfigError(f"config file not found: {path}")
        raw.update(dotenv_values(path))
    raw.update(overrides or {})
    sections = _section_values(raw)

    try:
        lp = LPParams(**sections["LP"])
        settings = Settings(
            hyper=HyperParams(**sections["HYPER"]),
            mip=MIPParams(**sections["MIP"], lp=lp),
            lp=lp,
            sgd=SgdConfig(**sections["SGD"]),
            experiment=ExperimentConfig(**sections["EXPERIMENT"]),
        )
    except ValidationError as e:
        logger.error(f"invalid configuration: {e.error_count()} error(s)")
        raise ConfigError(str(e)) from e
    logger.debug(f"loaded settings from {path or 'defaults'} with {len(overrides or {})} override(s)")
    return settings
