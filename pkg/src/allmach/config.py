"""Run configuration: defaults, validation, flat key-value config files."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigurationError


@dataclass
class RunConfig:
    """Everything a run needs beyond the case's own defaults.

    ``None`` means "take the case default" (eps, gamma, counts, t_end,
    snapshot times) or "choose automatically" (eta, dt_max, newton_tol).
    """

    case: str = ""
    eps: float | None = None
    gamma: float | None = None
    nx: int | None = None
    ny: int | None = None
    beta: float = 0.5
    eta: float | None = None          # None = recompute from the density bound
    eta_floor: float = 0.0
    dt_max: float | None = None       # None = one grid spacing
    t_end: float | None = None
    snapshot_times: tuple | None = None
    newton_tol: float | None = None
    newton_max_iter: int = 50
    out_dir: str | None = None
    seed: int = 0
    dry_run: bool = False

    def validate(self) -> "RunConfig":
        if not 0.0 < self.beta <= 0.5:
            raise ConfigurationError(f"beta = {self.beta} outside (0, 1/2]")
        if self.eps is not None and not 0.0 < self.eps <= 1.0:
            raise ConfigurationError(f"eps = {self.eps} outside (0, 1]")
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if v is not None and v < 2:
                raise ConfigurationError(f"{name} = {v} too small")
        if self.eta is not None and self.eta <= 0.0:
            raise ConfigurationError("fixed eta must be positive")
        if self.newton_max_iter < 1:
            raise ConfigurationError("newton_max_iter must be >= 1")
        return self


_BOOL_WORDS = {"true": True, "false": False, "yes": True, "no": False}


def _parse_value(raw: str):
    raw = raw.strip().strip('"').strip("'")
    if "," in raw:
        return tuple(_parse_value(part) for part in raw.split(",") if part.strip())
    low = raw.lower()
    if low in _BOOL_WORDS:
        return _BOOL_WORDS[low]
    if low in ("none", "auto"):
        return None
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read a flat ``key = value`` config file; explicit overrides win."""
    values: dict = {}
    known = {f.name for f in fields(RunConfig)}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = line.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ConfigurationError(f"{path}:{lineno}: unknown key '{key}'")
            values[key] = _parse_value(raw)
    cfg = RunConfig(**values)
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()
