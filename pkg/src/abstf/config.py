"""Project configuration: flat ``key = value`` file at the project root."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .interp import DEFAULT_STEP_LIMIT
from .testgen import DEFAULT_BUDGET, DEFAULT_DOMAIN

CONFIG_NAME = "abstf.toml"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectConfig:
    root: Path
    source_dir: str = "."
    tests: str = "tests.json"
    requirements: str = "requirements.json"
    state_dir: str = ".abstf"
    step_limit: int = DEFAULT_STEP_LIMIT
    domain_lo: int = DEFAULT_DOMAIN[0]
    domain_hi: int = DEFAULT_DOMAIN[1]
    budget: int = DEFAULT_BUDGET
    interval: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root).resolve())
        for key in ("source_dir", "tests", "requirements", "state_dir"):
            p = (self.root / getattr(self, key)).resolve()
            if p != self.root and not p.is_relative_to(self.root):
                raise ConfigError(f"{key} must stay under the project root: {p}")
        if self.step_limit <= 0 or self.budget <= 0 or self.interval <= 0:
            raise ConfigError("step_limit, budget and interval must be positive")
        if self.domain_lo > self.domain_hi:
            raise ConfigError("domain_lo must not exceed domain_hi")

    @property
    def source_path(self) -> Path:
        return self.root / self.source_dir

    @property
    def tests_path(self) -> Path:
        return self.root / self.tests

    @property
    def requirements_path(self) -> Path:
        return self.root / self.requirements

    @property
    def state_path(self) -> Path:
        return self.root / self.state_dir

    @property
    def domain(self) -> tuple:
        return (self.domain_lo, self.domain_hi)

    def with_overrides(self, **overrides) -> "ProjectConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def dumps(self) -> str:
        lines = []
        for f in fields(self):
            if f.name == "root":
                continue
            v = getattr(self, f.name)
            lines.append(f'{f.name} = "{v}"' if isinstance(v, str) else f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_TYPES = {f.name: f.type for f in fields(ProjectConfig)}


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _TYPES or key == "root":
            raise ConfigError(f"{CONFIG_NAME}:{lineno}: unknown or malformed setting {raw.strip()!r}")
        kind = _TYPES[key]
        try:
            if kind == "str":
                values[key] = value.strip('"').strip("'")
            elif kind == "int":
                values[key] = int(value)
            else:
                values[key] = float(value)
        except ValueError:
            raise ConfigError(f"{CONFIG_NAME}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def load_config(root) -> ProjectConfig:
    root = Path(root)
    path = root / CONFIG_NAME
    values = parse_config_text(path.read_text(encoding="utf-8")) if path.exists() else {}
    return ProjectConfig(root, **values)
