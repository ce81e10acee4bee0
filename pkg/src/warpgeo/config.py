"""Run configuration: tolerance ladder, seeds, finite-difference steps, search budgets."""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

from .errors import ParseError

ENV_PREFIX = "WARPGEO_"

# Fields that are integers; everything else numeric is a float.
_INT_FIELDS = {"grid_res", "sphere_grid", "starts", "seed", "jobs", "draws"}


@dataclass(frozen=True)
class RunConfig:
    """Immutable bundle of tolerances and budgets used across modules.

    A fixed seed makes every report byte-identical (timestamps excluded).
    """

    rank_tol: float = 1e-9        # singular value < rank_tol * sigma_max counts as zero
    sym_tol: float = 1e-8         # allowed asymmetry when building forms
    adapt_tol: float = 1e-8       # off-block entries below this count as adapted
    curvature_tol: float = 1e-8   # vanishing-pattern residual gate
    span_tol: float = 1e-6        # mixed-span operator norm gate
    fd_step: float = 1e-4         # first derivatives (central differences)
    fd_step_second: float = 1e-3  # second derivatives
    fd_step_eta: float = 1e-5     # warping log-gradient fallback
    grid_res: int = 720           # angular resolution per parameter on Gr(1,2)
    sphere_grid: int = 4096       # direction count on Gr(1,3)
    starts: int = 8               # multistart budget for nullity search
    seed: int = 0
    jobs: int = 1
    draws: int = 3                # random combinations tried by splitting detection

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name in ("seed",):
                continue
            if v <= 0:
                raise ValueError(f"config field {f.name} must be positive, got {v!r}")

    def replace(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(name: str, raw):
    try:
        return int(raw) if name in _INT_FIELDS else float(raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"config field {name}: cannot parse {raw!r}") from exc


def load_config(path: str | None = None, env: dict | None = None, **overrides) -> RunConfig:
    """Build a RunConfig; precedence: defaults < file < environment < overrides."""
    values: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ParseError(f"cannot read config file {path}: {exc}", source=path) from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"config file {path}: {exc.msg}", source=path,
                             line=exc.lineno, column=exc.colno) from exc
        if not isinstance(doc, dict):
            raise ParseError(f"config file {path}: expected a JSON object", source=path)
        for k, v in doc.items():
            if k not in {f.name for f in dataclasses.fields(RunConfig)}:
                raise ParseError(f"config file {path}: unknown field {k!r}", source=path)
            values[k] = _coerce(k, v)
    env = os.environ if env is None else env
    for f in dataclasses.fields(RunConfig):
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is not None:
            values[f.name] = _coerce(f.name, raw)
    for k, v in overrides.items():
        if v is not None:
            values[k] = v
    return RunConfig(**values)
