"""Experiment configuration: an INI-style file of ``key = value`` lines under
section headers.

Example::

    [experiment]
    law = stable(alpha=0.5)
    n_grid = 100, 200, 400
    lambda_grid = 0.5, 1, 2
    min_hits = 20000
    max_trials = 1000000000
    seed = 1
    method = split
    w = 1

    [regime.a]
    id = 1
    a_m = 0.5

    [regime.b]
    id = 2
    theta = 0.5

    [reduced]
    y_grid = 0.5, 1, 2
    j_max = 10

Lists are comma separated.  ``split`` (generation k of the split estimator)
is optional; unset means min(phi, m).
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields

from .offspring import OffspringLaw, parse_law
from .regimes import RegimeSpec


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _fmt(values) -> str:
    return ", ".join(repr(v) for v in values)


@dataclass(frozen=True)
class ExperimentConfig:
    law: str = "stable(alpha=0.5)"
    n_grid: tuple[int, ...] = (100, 200, 400)
    lambda_grid: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0)
    min_hits: int = 20_000
    max_trials: int = 10**9
    seed: int = 0
    method: str = "split"
    split: int | None = None
    w: float = 1.0
    out: str = "."
    formats: tuple[str, ...] = ("csv", "json")
    regimes: tuple[RegimeSpec, ...] = field(default_factory=lambda: (RegimeSpec(1),))
    y_grid: tuple[float, ...] = ()
    j_max: int = 10

    def __post_init__(self):
        object.__setattr__(self, "law", parse_law(self.law).spec_string())
        if self.method not in ("rejection", "split"):
            raise ValueError("method must be 'rejection' or 'split'")
        if self.min_hits < 1:
            raise ValueError("min_hits must be positive")
        if any(n < 2 for n in self.n_grid):
            raise ValueError("horizons must be at least 2")
        if not set(self.formats) <= {"csv", "json"}:
            raise ValueError("formats must be csv and/or json")

    @property
    def offspring(self) -> OffspringLaw:
        return parse_law(self.law)

    @property
    def alpha(self) -> float:
        return self.offspring.alpha

    def with_overrides(self, **kw) -> "ExperimentConfig":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update({k: v for k, v in kw.items() if v is not None})
        return ExperimentConfig(**vals)

    # --- serialisation ---
    def to_text(self, include_out: bool = True) -> str:
        """Config file text; artifacts omit ``out`` so that where a run is written
        never changes what is written."""
        cp = configparser.ConfigParser(interpolation=None)
        cp["experiment"] = {
            "law": self.offspring.spec_string(),
            "n_grid": _fmt(self.n_grid),
            "lambda_grid": _fmt(self.lambda_grid),
            "min_hits": str(self.min_hits),
            "max_trials": str(self.max_trials),
            "seed": str(self.seed),
            "method": self.method,
            "w": repr(float(self.w)),
            "format": ", ".join(self.formats),
        }
        if include_out:
            cp["experiment"]["out"] = self.out
        if self.split is not None:
            cp["experiment"]["split"] = str(self.split)
        for i, r in enumerate(self.regimes):
            sec = {"id": str(r.regime), "theta": repr(r.theta), "y": repr(r.y), "a_phi": repr(r.a_phi),
                   "a_psi": repr(r.a_psi), "a_m": repr(r.a_m)}
            if r.a_chi is not None:
                sec["a_chi"] = repr(r.a_chi)
            cp[f"regime.{i}"] = sec
        if self.y_grid:
            cp["reduced"] = {"y_grid": _fmt(self.y_grid), "j_max": str(self.j_max)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def to_dict(self, include_out: bool = True) -> dict:
        d = {
            "law": self.offspring.spec_string(), "n_grid": list(self.n_grid),
            "lambda_grid": list(self.lambda_grid), "min_hits": self.min_hits,
            "max_trials": self.max_trials, "seed": self.seed, "method": self.method,
            "split": self.split, "w": self.w, "out": self.out, "formats": list(self.formats),
            "regimes": [r.to_dict() for r in self.regimes],
            "y_grid": list(self.y_grid), "j_max": self.j_max,
        }
        if not include_out:
            del d["out"]
        return d


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.read_string(text)
    if "experiment" not in cp:
        raise ValueError("config needs an [experiment] section")
    e = cp["experiment"]
    known = {"law", "n_grid", "lambda_grid", "min_hits", "max_trials", "seed", "method", "split", "w",
             "out", "format"}
    unknown = set(e) - known
    if unknown:
        raise ValueError(f"unknown [experiment] keys: {sorted(unknown)}")
    kw = {}
    if "law" in e:
        kw["law"] = parse_law(e["law"]).spec_string()
    if "n_grid" in e:
        kw["n_grid"] = _ints(e["n_grid"])
    if "lambda_grid" in e:
        kw["lambda_grid"] = _floats(e["lambda_grid"])
    for key in ("min_hits", "max_trials", "seed", "split"):
        if key in e:
            kw[key] = int(e[key])
    if "method" in e:
        kw["method"] = e["method"].strip()
    if "w" in e:
        kw["w"] = float(e["w"])
    if "out" in e:
        kw["out"] = e["out"].strip()
    if "format" in e:
        kw["formats"] = tuple(x.strip() for x in e["format"].split(",") if x.strip())
    regimes = []
    for name in cp.sections():
        if not name.startswith("regime"):
            continue
        s = cp[name]
        rk = {"regime": int(s["id"])}
        for key in ("theta", "y", "a_phi", "a_psi", "a_m"):
            if key in s:
                rk[key] = float(s[key])
        if "a_chi" in s:
            rk["a_chi"] = float(s["a_chi"])
        regimes.append(RegimeSpec(**rk))
    if regimes:
        kw["regimes"] = tuple(regimes)
    if "reduced" in cp:
        r = cp["reduced"]
        kw["y_grid"] = _floats(r.get("y_grid", ""))
        if "j_max" in r:
            kw["j_max"] = int(r["j_max"])
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
