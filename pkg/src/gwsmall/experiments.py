"""Theory tabulation, simulation runs and theory-vs-estimate comparison.

All artifacts are self-describing: CSV files start with ``#``-prefixed lines
holding the resolved configuration, JSON files carry a ``config`` member.
Floats are written with ``repr`` (17 significant digits) so comparisons are exact.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import limits
from .config import ExperimentConfig
from .estimate import EventSpec, estimate_regimes, estimate_reduced_pmf
from .gf import build_table
from .offspring import GeometricCriticalLaw, StableOffspringLaw
from .regimes import RegimeSpec

THEORY_COLUMNS = ["kind", "alpha", "regime", "params", "lambda", "j", "n", "limit_value"]


class ArtifactMismatch(RuntimeError):
    """An existing output differs from what the same configuration produces now."""


def write_artifact(path: str, text: str, force: bool = False) -> None:
    if os.path.exists(path) and not force:
        with open(path) as fh:
            old = fh.read()
        if old != text:
            raise ArtifactMismatch(f"{path} exists with different content; refusing to overwrite")
        return
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _num(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _csv_text(cfg: ExperimentConfig, rows: list[dict], columns=THEORY_COLUMNS) -> str:
    buf = io.StringIO()
    for line in cfg.to_text(include_out=False).splitlines():
        buf.write(f"# {line}\n")
    wr = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: (_num(v) if not isinstance(v, str) else v) for k, v in r.items()})
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"


def regime_params(spec: RegimeSpec) -> str:
    return {2: f"theta={spec.theta!r}", 4: f"y={spec.y!r}"}.get(spec.regime, "")


def _event_params(w):
    return f"w={float(w)!r}"


# --- theory -------------------------------------------------------------------

def theory_rows(cfg: ExperimentConfig) -> dict[str, list[dict]]:
    """Limit values keyed by output file stem."""
    law = cfg.offspring
    a = law.alpha
    out: dict[str, list[dict]] = {}
    for spec in cfg.regimes:
        rows = out.setdefault(f"theory_{spec.label()}", [])
        for lam in cfg.lambda_grid:
            rows.append({"kind": "lst", "alpha": a, "regime": spec.regime, "params": regime_params(spec),
                         "lambda": lam, "j": "", "n": "",
                         "limit_value": limits.regime_transform(spec, a, lam)})
    if cfg.y_grid:
        rows = out.setdefault("theory_reduced", [])
        for y in cfg.y_grid:
            pm = limits.reduced_limit_pmfs(a, y, cfg.j_max)
            for j in range(1, cfg.j_max + 1):
                rows.append({"kind": "pmf", "alpha": a, "regime": "", "params": f"y={y!r}", "lambda": "",
                             "j": j, "n": "", "limit_value": pm[j - 1]})
            rows.append({"kind": "pmf_tail_bound", "alpha": a, "regime": "", "params": f"y={y!r}",
                         "lambda": "", "j": cfg.j_max, "n": "",
                         "limit_value": limits.reduced_limit_tail_bound(a, y, cfg.j_max)})
            rows.append({"kind": "mrca", "alpha": a, "regime": "", "params": f"y={y!r}", "lambda": "",
                         "j": "", "n": "", "limit_value": limits.mrca_limit_cdf(a, y)})
    rows = out.setdefault("theory_small_deviation", [])
    nmax = max(cfg.n_grid)
    table = build_table(law, nmax)
    phi_of = cfg.regimes[0].phi if cfg.regimes else RegimeSpec(1).phi
    for n in cfg.n_grid:
        phi = phi_of(n)
        rows.append({"kind": "event", "alpha": a, "regime": "", "params": _event_params(cfg.w),
                     "lambda": "", "j": "", "n": n, "limit_value": event_theory(law, table, n, phi, cfg.w)})
    return out


def event_theory(law, table, n: int, phi: int, w: float = 1.0) -> float:
    """Asymptotic P(0 < u_phi Z(n) <= w)."""
    if isinstance(law, GeometricCriticalLaw) or (isinstance(law, StableOffspringLaw) and law.alpha == 1.0):
        sigma2 = 2.0 if isinstance(law, GeometricCriticalLaw) else 2.0 * law.c
        return limits.finite_variance_small_deviation(n, w * table.threshold(phi), sigma2)
    # {u_phi Z <= w} behaves like H(n, w^alpha phi)
    return limits.small_deviation_prob(table, n, phi) * w**law.alpha


def identity_report(alphas=(0.3, 0.5, 0.8), xs=(0.5, 1.0, 2.0)) -> list[dict]:
    """Numerical identities with residuals and tolerances."""
    rep = []
    for a in alphas:
        for x in xs:
            r = limits.lemma_proper_sum(a, x, tol=1e-6)
            res = abs(r.value - x**a)
            rep.append({"check": f"U(x)=x^alpha alpha={a} x={x}", "residual": res + r.bound,
                        "tolerance": 1e-4, "pass": bool(res + r.bound < 1e-4)})
    for a in (0.1, 0.3, 0.5, 0.7, 0.9):
        for t in (0.1, 0.5, 0.9):
            res = limits.term2_identity_check(a, t)
            rep.append({"check": f"weight series closed form alpha={a} t={t}", "residual": res,
                        "tolerance": 1e-10, "pass": bool(res < 1e-10)})
    bad = [(J, k) for J in range(1, 31) for k in range(1, J + 1)
           if limits.stirling2(J, k) != limits.bell_at_ones(J, k)]
    rep.append({"check": "Stirling2 == Bell(1,...,1) for J <= 30", "residual": float(len(bad)),
                "tolerance": 0.0, "pass": not bad})
    lam = np.linspace(0.0, 10.0, 101)
    gap = max(abs(limits.regime_transform(RegimeSpec(2, theta=1e-300), a, l)
                  - limits.regime_transform(RegimeSpec(1), a, l)) for a in alphas for l in lam)
    rep.append({"check": "regime2(theta->0) == regime1", "residual": gap, "tolerance": 1e-12,
                "pass": bool(gap < 1e-12)})
    x = np.logspace(-2, 1, 61)
    gap = float(np.max(np.abs(limits.m_cdf(1.0, x) - (-np.expm1(-x)))))
    rep.append({"check": "alpha=1 inversion vs 1-exp(-x) on [0.01,10]", "residual": gap, "tolerance": 1e-8,
                "pass": bool(gap < 1e-8)})
    return rep


def run_theory(cfg: ExperimentConfig, out_dir: str | None = None, force: bool = False) -> list[str]:
    out_dir = out_dir or cfg.out
    paths = []
    for stem, rows in theory_rows(cfg).items():
        if "csv" in cfg.formats:
            p = os.path.join(out_dir, stem + ".csv")
            write_artifact(p, _csv_text(cfg, rows), force)
            paths.append(p)
        if "json" in cfg.formats:
            p = os.path.join(out_dir, stem + ".json")
            write_artifact(p, _json_text({"config": cfg.to_dict(include_out=False), "rows": rows}), force)
            paths.append(p)
    p = os.path.join(out_dir, "identities.json")
    write_artifact(p, _json_text({"config": cfg.to_dict(include_out=False), "checks": identity_report()}), force)
    paths.append(p)
    return paths


# --- simulation -------------------------------------------------------------------

def simulate_records(cfg: ExperimentConfig, n: int, threads: int = 1) -> dict:
    law = cfg.offspring
    table = build_table(law, max(n, 2))
    specs = list(cfg.regimes)
    phi = specs[0].phi(n)
    event = EventSpec(n, phi, cfg.w)
    records = []
    converged = True
    est, pe = estimate_regimes(law, n, specs, cfg.lambda_grid, phi=phi, w=cfg.w, min_hits=cfg.min_hits,
                               max_trials=cfg.max_trials, seed=cfg.seed, method=cfg.method, k=cfg.split,
                               threads=threads, table=table)
    converged &= pe.converged
    records.append({"kind": "event", "regime": "", "params": _event_params(cfg.w), "lambda": None,
                    "j": None, "n": n, "estimate": pe.to_dict()})
    for spec in specs:
        for lam in cfg.lambda_grid:
            e = est[(spec.label(), float(lam))]
            converged &= e.converged
            records.append({"kind": "lst", "regime": spec.regime, "params": regime_params(spec),
                            "lambda": float(lam), "j": None, "n": n, "m": spec.m(n),
                            "regime_spec": spec.to_dict(), "estimate": e.to_dict()})
    for y in cfg.y_grid:
        red = estimate_reduced_pmf(law, event, y, cfg.j_max, cfg.min_hits, cfg.seed, y_grid=[y],
                                   max_trials=cfg.max_trials, method=cfg.method, k=cfg.split,
                                   threads=threads, table=table)
        for j, p in enumerate(red.pmf, start=1):
            converged &= p.converged
            records.append({"kind": "pmf", "regime": "", "params": f"y={y!r}", "lambda": None, "j": j,
                            "n": n, "m": red.m, "estimate": p.to_dict()})
        records.append({"kind": "pmf_tail", "regime": "", "params": f"y={y!r}", "lambda": None,
                        "j": cfg.j_max, "n": n, "m": red.m, "estimate": red.tail.to_dict()})
        for dist, c in red.mrca_cdf.items():
            records.append({"kind": "mrca", "regime": "", "params": f"y={y!r}", "lambda": None, "j": None,
                            "n": n, "distance": dist, "estimate": c.to_dict()})
    return {"config": cfg.to_dict(include_out=False), "seed": cfg.seed, "n": n,
            "event": {"n": n, "phi": phi, "w": cfg.w, "T_int": event.t_int(table)},
            "converged": bool(converged), "records": records}


def run_simulate(cfg: ExperimentConfig, out_dir: str | None = None, threads: int = 1,
                 force: bool = False) -> tuple[list[str], bool]:
    out_dir = out_dir or cfg.out
    paths, ok = [], True
    for n in cfg.n_grid:
        doc = simulate_records(cfg, n, threads)
        ok &= doc["converged"]
        p = os.path.join(out_dir, f"estimates_n{n}.json")
        write_artifact(p, _json_text(doc), force)
        paths.append(p)
        if "csv" in cfg.formats:
            rows = [{"kind": r["kind"], "regime": r["regime"], "params": r["params"],
                     "lambda": r["lambda"] if r["lambda"] is not None else "",
                     "j": r["j"] if r["j"] is not None else "", "n": n,
                     "estimate": r["estimate"]["value"], "stderr": r["estimate"]["stderr"],
                     "hits": r["estimate"]["hits"], "trials": r["estimate"]["trials"], "seed": cfg.seed}
                    for r in doc["records"]]
            cols = ["kind", "regime", "params", "lambda", "j", "n", "estimate", "stderr", "hits", "trials", "seed"]
            p = os.path.join(out_dir, f"estimates_n{n}.csv")
            write_artifact(p, _csv_text(cfg, rows, cols), force)
            paths.append(p)
    return paths, ok


# --- comparison ---------------------------------------------------------------

def _key(kind, regime, params, lam, j, n=None):
    """Join key; the horizon only enters for n-dependent theory (the event probability)."""
    n = "" if kind != "event" or n in (None, "") else str(int(n))
    lam = "" if lam in (None, "") else repr(float(lam))
    j = "" if j in (None, "") else str(int(j))
    regime = "" if regime in (None, "") else str(int(regime))
    return (kind, regime, params, lam, j, n)


def read_theory(paths) -> dict:
    theory = {}
    for p in paths:
        if p.endswith(".json"):
            with open(p) as fh:
                doc = json.load(fh)
            rows = doc.get("rows", [])
        else:
            with open(p) as fh:
                rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
        for r in rows:
            if "limit_value" not in r:
                continue
            theory[_key(r["kind"], r["regime"], r["params"], r["lambda"], r["j"], r.get("n"))] = float(r["limit_value"])
    return theory


def trend_ok(dev, noise) -> bool:
    """Weak decrease along n, forgiving rises within one combined standard error."""
    return all(dev[i + 1] <= dev[i] + math.hypot(noise[i], noise[i + 1]) for i in range(len(dev) - 1))


@dataclass
class CompareThresholds:
    sigmas: float = 4.0
    allowance: float = 0.03
    allowance_regime4: float = 0.04
    ratio_band: tuple = (0.8, 1.2)


def compare(theory_paths, estimate_paths, thresholds: CompareThresholds | None = None) -> dict:
    """Join estimates to limits; per-row z-score, gap and per-key trend over n."""
    th = thresholds or CompareThresholds()
    theory = read_theory(theory_paths)
    rows, missing = [], []
    for p in sorted(estimate_paths):
        with open(p) as fh:
            doc = json.load(fh)
        n = doc["n"]
        for r in doc["records"]:
            if r["kind"] == "pmf_tail":
                key = _key("pmf_tail_bound", "", r["params"], None, r["j"])
            else:
                key = _key(r["kind"], r["regime"], r["params"], r["lambda"], r["j"], n)
            e = r["estimate"]
            if key not in theory:
                missing.append({"file": os.path.basename(p), "key": list(key)})
                continue
            t = theory[key]
            v, se = e["value"], e["stderr"]
            gap = v - t
            z = 0.0 if gap == 0 else (gap / se if se > 0 else math.copysign(math.inf, gap))
            if r["kind"] == "event":
                ratio = v / t
                ok = th.ratio_band[0] <= ratio <= th.ratio_band[1]
                tol = None
            elif r["kind"] == "pmf_tail":
                ratio = None
                tol = th.sigmas * se
                ok = v <= t + tol
            else:
                ratio = None
                allow = th.allowance_regime4 if key[1] == "4" else th.allowance
                tol = th.sigmas * se + allow
                ok = abs(gap) <= tol
            rows.append({"key": list(key), "n": n, "theory": t, "estimate": v, "stderr": se, "z": z,
                         "abs_gap": abs(gap), "ratio": ratio, "tolerance": tol, "pass": bool(ok)})
    # trend: per key, |gap| (or |ratio - 1|) should not grow along n beyond one sigma
    trends = {}
    bykey: dict = {}
    for r in rows:
        bykey.setdefault(tuple(r["key"][:5]), []).append(r)
    for key, rs in sorted(bykey.items()):
        rs.sort(key=lambda r: r["n"])
        if key[0] == "event":
            dev = [abs(r["ratio"] - 1.0) for r in rs]
            noise = [r["stderr"] / r["theory"] for r in rs]
        else:
            dev = [r["abs_gap"] for r in rs]
            noise = [r["stderr"] for r in rs]
        ns = [r["n"] for r in rs]
        slope = float(np.polyfit(np.log(ns), dev, 1)[0]) if len(rs) > 1 else 0.0
        if key[0] == "pmf_tail":
            # a one-sided bound, not a limit: only the final comparison matters
            dev = [max(r["estimate"] - r["theory"], 0.0) for r in rs]
        mono = trend_ok(dev, noise)
        final_ok = rs[-1]["pass"]
        trends["|".join(key)] = {"n": ns, "deviation": dev, "slope": slope, "decreasing": bool(mono),
                                 "final_pass": bool(final_ok), "pass": bool(mono and final_ok)}
    overall = bool(trends) and all(t["pass"] for t in trends.values()) and not missing
    return {"rows": rows, "trends": trends, "missing": missing, "pass": overall,
            "thresholds": {"sigmas": th.sigmas, "allowance": th.allowance,
                           "allowance_regime4": th.allowance_regime4, "ratio_band": list(th.ratio_band)}}


def report_text(rep: dict) -> str:
    lines = [f"overall: {'PASS' if rep['pass'] else 'FAIL'}"]
    for key, t in rep["trends"].items():
        devs = " ".join(f"{d:.4f}" for d in t["deviation"])
        lines.append(f"{'PASS' if t['pass'] else 'FAIL'}  {key:40s} n={t['n']} dev=[{devs}] "
                     f"slope={t['slope']:+.4f} decreasing={t['decreasing']} final={t['final_pass']}")
    for m in rep["missing"]:
        lines.append(f"MISSING {m['file']}: {m['key']}")
    return "\n".join(lines) + "\n"


def run_compare(theory_paths, estimate_paths, out_dir: str, thresholds=None, force: bool = False):
    rep = compare(theory_paths, estimate_paths, thresholds)
    write_artifact(os.path.join(out_dir, "report.json"), _json_text(rep), force)
    write_artifact(os.path.join(out_dir, "report.txt"), report_text(rep), force)
    return rep
