"""
Settings from defaults, an optional YAML file and command-line overrides.

    resources:  grammar, lexicon, postulates, spec, isa (paths or s3:// URIs)
    scoring:    rew, pen, default_lex_value, n_best, filter, cluster_threshold,
                first_n, within_pct, max_unary_depth
    retrieval:  m, n, o, escalate_in_band
    prover:     max_depth, max_inferences, rule_weight_cap
    output:     format (human | records), traces

Flags win over the file, the file over the defaults.
"""
import logging
import os
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Mapping, Optional

import yaml
from botocore.exceptions import BotoCoreError, ClientError

from logdoc import storage
from logdoc.chart_parser import ScoreConfig
from logdoc.errors import ConfigError
from logdoc.resources import ResourceSet, load_resources
from logdoc.retrieval import VDConfig

logger = logging.getLogger(__name__)

CONFIG_ENV = "LOGDOC_CONFIG"
OUTPUT_FORMATS = ("human", "records")

RETRIEVAL_KEYS = ("m", "n", "o", "escalate_in_band")
PROVER_KEYS = ("max_depth", "max_inferences", "rule_weight_cap")


@dataclass
class ResourcePaths:
    grammar: Optional[str] = None
    lexicon: Optional[str] = None
    postulates: Optional[str] = None
    spec: Optional[str] = None
    isa: Optional[str] = None

    def load(self, client=None) -> ResourceSet:
        return load_resources(self.grammar, self.lexicon, self.postulates, self.spec,
                              self.isa, client)


@dataclass
class OutputConfig:
    format: str = "human"
    traces: bool = True


@dataclass
class Settings:
    resources: ResourcePaths = field(default_factory=ResourcePaths)
    scoring: ScoreConfig = field(default_factory=ScoreConfig)
    retrieval: VDConfig = field(default_factory=VDConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> "Settings":
        self.scoring.validate()
        self.retrieval.validate()
        if self.output.format not in OUTPUT_FORMATS:
            raise ConfigError(f"output.format must be one of {', '.join(OUTPUT_FORMATS)}")
        return self

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        retrieval = {f.name: getattr(self.retrieval, f.name) for f in fields(self.retrieval)}
        return {
            'resources': {f.name: getattr(self.resources, f.name) for f in fields(self.resources)},
            'scoring': {f.name: getattr(self.scoring, f.name) for f in fields(self.scoring)},
            'retrieval': {k: retrieval[k] for k in RETRIEVAL_KEYS},
            'prover': {k: retrieval[k] for k in PROVER_KEYS},
            'output': {f.name: getattr(self.output, f.name) for f in fields(self.output)},
        }


def _section_target(settings: Settings, section: str):
    """Dataclass instance and allowed keys for one YAML section."""
    if section == "resources":
        return settings.resources, [f.name for f in fields(ResourcePaths)]
    if section == "scoring":
        return settings.scoring, [f.name for f in fields(ScoreConfig)]
    if section == "retrieval":
        return settings.retrieval, list(RETRIEVAL_KEYS)
    if section == "prover":
        return settings.retrieval, list(PROVER_KEYS)
    if section == "output":
        return settings.output, [f.name for f in fields(OutputConfig)]
    raise ConfigError(f"unknown configuration section {section!r}")


def _coerce(where: str, value: Any, current: Any, text: bool = False) -> Any:
    """Check ``value`` against the type of the setting it replaces; unset settings
    are paths when ``text`` is true and numbers otherwise."""
    if value is None:
        return None
    if current is None:
        if text:
            if not isinstance(value, str):
                raise ConfigError(f"{where} must be a string, got {value!r}")
            return value
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return value
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false, got {value!r}")
        return value
    if isinstance(current, (int, float)):
        if isinstance(value, bool):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        if isinstance(current, int) and not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        if isinstance(current, float) and not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value) if isinstance(current, float) else value
    if isinstance(current, str) and not isinstance(value, str):
        raise ConfigError(f"{where} must be a string, got {value!r}")
    return value


def apply_section(settings: Settings, section: str, values: Mapping[str, Any]) -> Settings:
    """Copy ``values`` into one section; unknown keys raise ConfigError."""
    target, allowed = _section_target(settings, section)
    if not isinstance(values, Mapping):
        raise ConfigError(f"section {section!r} must be a mapping")
    changes = {}
    for key, value in values.items():
        if key not in allowed:
            raise ConfigError(f"unknown configuration key {section}.{key}")
        changes[key] = _coerce(f"{section}.{key}", value, getattr(target, key),
                               text=section == "resources")
    updated = replace(target, **changes)
    if section == "resources":
        settings.resources = updated
    elif section == "scoring":
        settings.scoring = updated
    elif section in ("retrieval", "prover"):
        settings.retrieval = updated
    else:
        settings.output = updated
    return settings


def read_config_file(path: str, client=None) -> Dict[str, Any]:
    try:
        text = storage.read_text(path, client)
    except (OSError, ValueError, BotoCoreError, ClientError) as e:
        raise ConfigError(f"cannot read configuration {path}: {e}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"configuration {path} must be a mapping of sections")
    return data


def load_settings(path: Optional[str] = None,
                  overrides: Optional[Mapping[str, Mapping[str, Any]]] = None,
                  client=None) -> Settings:
    """
    Build validated settings.

    Args:
        path (str): YAML file; ``$LOGDOC_CONFIG`` when omitted, defaults when neither is set
        overrides: ``{section: {key: value}}`` from the command line; None values are ignored
        client: boto3 S3 client for s3:// paths

    Returns:
        Settings: validated

    Raises:
        ConfigError: unreadable file, unknown key, wrong type or failed validation
    """
    settings = Settings()
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        for section, values in read_config_file(path, client).items():
            apply_section(settings, section, values or {})
        logger.info("Loaded configuration from %s", path)
    for section, values in (overrides or {}).items():
        present = {k: v for k, v in values.items() if v is not None}
        if present:
            apply_section(settings, section, present)
    return settings.validate()
