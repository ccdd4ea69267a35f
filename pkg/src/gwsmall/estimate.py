"""Monte Carlo estimators conditional on the small-deviation event
H(n, phi) = {0 < Z(n) <= floor(w / u_phi)}.

Two estimation methods share one interface:

``rejection``
    simulate whole trajectories (or family trees) and keep those in H;
    each kept trial is one hit.
``split``
    simulate generations 0..k only and replace everything after k by its exact
    conditional expectation given Z(k), computed with :mod:`gwsmall.exact`.
    Every surviving trial then carries a weight P(H | Z(k)); the estimate is a
    ratio of weighted means and ``hits`` reports the effective sample size.
    This is the only feasible route when P(H) is ~1e-6 and few cores are
    available.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .exact import FiniteHorizon
from .gf import ExtinctionTable, build_table
from .offspring import OffspringLaw
from .regimes import RegimeSpec
from .rng import root_key
from .simulate import BLOCK, run_blocks, sampler_args

WAVE = 8  # blocks per stopping-rule check; fixed so results never depend on threads
PRUNE_EXPONENT = 800.0


@dataclass(frozen=True)
class EventSpec:
    n: int
    phi: int
    w: float = 1.0

    def __post_init__(self):
        if not 0 <= self.phi < self.n:
            raise ValueError(f"need 0 <= phi < n, got phi={self.phi}, n={self.n}")
        if not self.w > 0:
            raise ValueError("w must be positive")

    def t_int(self, table: ExtinctionTable) -> int:
        return table.threshold_int(self.phi, self.w)


@dataclass
class McEstimate:
    value: float
    stderr: float
    hits: float
    trials: int
    seed: int
    lam: float | None = None
    label: str = ""
    method: str = "rejection"
    converged: bool = True
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["value"] = float(self.value)
        d["stderr"] = float(self.stderr)
        d["hits"] = float(self.hits) if self.method == "split" else int(self.hits)
        return d


@dataclass
class ConditionalSample:
    """Trials representing the conditional law given H.

    For ``rejection`` ``rows`` holds the kept trials; for ``split`` ``zs`` and
    ``counts`` form the histogram of Z(k) over all simulated trials.
    """

    law: OffspringLaw
    table: ExtinctionTable
    event: EventSpec
    method: str
    seed: int
    trials: int
    stats: dict
    converged: bool
    rows: np.ndarray | None = None
    columns: dict | None = None
    k: int | None = None
    zs: np.ndarray | None = None
    counts: np.ndarray | None = None
    horizon: FiniteHorizon | None = None
    _den: np.ndarray | None = None

    @property
    def T(self) -> int:
        return self.event.t_int(self.table)

    # --- split helpers ---
    def denominators(self) -> np.ndarray:
        if self._den is None:
            self._den = self.horizon.event_weights(self.zs, self.k)
        return self._den

    def ess(self) -> float:
        if self.method == "rejection":
            return float(len(self.rows))
        d = self.denominators()
        s1 = float(np.dot(self.counts, d))
        s2 = float(np.dot(self.counts, d * d))
        return s1 * s1 / s2 if s2 > 0 else 0.0

    def ratio(self, numer: np.ndarray) -> tuple[float, float]:
        """Ratio estimate sum(c N) / sum(c D) and its delta-method standard error."""
        d = self.denominators()
        sd = float(np.dot(self.counts, d))
        if sd <= 0:
            return float("nan"), float("nan")
        r = float(np.dot(self.counts, numer)) / sd
        resid = numer - r * d
        se = math.sqrt(float(np.dot(self.counts, resid * resid))) / sd
        return r, se


def _prune_caps(table: ExtinctionTable, n: int, T: int) -> np.ndarray:
    """Z(g) above which P(0 < Z(n) <= T | Z(g)) < exp(-PRUNE_EXPONENT)."""
    caps = np.empty(n + 1, dtype=np.int64)
    big = float(kernels.OVERFLOW - 1)
    for g in range(n + 1):
        c = (PRUNE_EXPONENT + 4.0 * T) / table.u[n - g]
        caps[g] = int(min(max(c, T), big))
    return caps


def _table_for(law, n, table):
    if table is not None and table.n_max >= n:
        return table
    return build_table(law, max(n, 2))


def collect_rejection(law: OffspringLaw, event: EventSpec, checkpoints=(), *, genealogy: bool = False,
                      min_hits: int = 20_000, max_trials: int = 10**9, seed: int = 0,
                      threads: int = 1, table: ExtinctionTable | None = None,
                      prune: bool = True) -> ConditionalSample:
    """Run trial blocks until ``min_hits`` trials fall in H or ``max_trials`` is reached."""
    table = _table_for(law, event.n, table)
    n, T = event.n, event.t_int(table)
    cps = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if cps.size and (cps.min() < 0 or cps.max() > n):
        raise ValueError("checkpoints must lie in [0, n]")
    key = root_key(seed)
    args = sampler_args(law)
    if genealogy:
        fn = lambda t0, c: kernels.genealogy_block(key, t0, c, n, *args, cps, T)
    else:
        zcap = _prune_caps(table, n, T) if prune else np.full(n + 1, kernels.OVERFLOW, dtype=np.int64)
        fn = lambda t0, c: kernels.forward_block(key, t0, c, n, *args, cps, zcap, T)
    rows, stats = [], np.zeros(4, dtype=np.int64)
    hits, blocks_done = 0, 0
    max_blocks = max(1, -(-int(max_trials) // BLOCK))
    while hits < min_hits and blocks_done < max_blocks:
        nb_ = min(WAVE, max_blocks - blocks_done)
        for r, s in run_blocks(fn, blocks_done, nb_, threads):
            rows.append(r)
            stats += s
            hits += len(r)
        blocks_done += nb_
    allrows = np.concatenate(rows) if rows else np.zeros((0, 2), dtype=np.int64)
    if genealogy:
        cols = {"trial": 0, "zn": 1, "d": 2}
        cols.update({("z", int(c)): 3 + i for i, c in enumerate(cps)})
        cols.update({("zr", int(c)): 3 + len(cps) + i for i, c in enumerate(cps)})
    else:
        cols = {"trial": 0, "zn": len(cps) + 1}
        cols.update({("z", int(c)): 1 + i for i, c in enumerate(cps)})
        cols[("z", n)] = len(cps) + 1
    st = dict(zip(("trials", "overflow", "pruned", "draws"), (int(x) for x in stats)))
    return ConditionalSample(law, table, event, "rejection", seed, st["trials"], st,
                             converged=hits >= min_hits, rows=allrows, columns=cols)


def collect_split(law: OffspringLaw, event: EventSpec, k: int, *, min_hits: int = 20_000,
                  max_trials: int = 10**9, seed: int = 0, threads: int = 1,
                  table: ExtinctionTable | None = None) -> ConditionalSample:
    """Histogram of Z(k) over trial blocks until the effective sample size reaches ``min_hits``."""
    table = _table_for(law, event.n, table)
    if not 0 <= k <= event.n:
        raise ValueError("split generation must lie in [0, n]")
    key = root_key(seed)
    args = sampler_args(law)
    fn = lambda t0, c: kernels.generation_block(key, t0, c, k, *args)
    fh = FiniteHorizon(law, event.n, event.t_int(table))
    hist: dict[int, int] = {}
    overflow = 0
    blocks_done = 0
    max_blocks = max(1, -(-int(max_trials) // BLOCK))
    sample = None
    while blocks_done < max_blocks:
        nb_ = min(WAVE, max_blocks - blocks_done)
        for part in run_blocks(fn, blocks_done, nb_, threads):
            overflow += int(np.count_nonzero(part < 0))
            vals, cnt = np.unique(part[part >= 0], return_counts=True)
            for v, c in zip(vals.tolist(), cnt.tolist()):
                hist[v] = hist.get(v, 0) + c
        blocks_done += nb_
        zs = np.array(sorted(hist), dtype=np.int64)
        counts = np.array([hist[z] for z in zs.tolist()], dtype=np.float64)
        sample = ConditionalSample(law, table, event, "split", seed, blocks_done * BLOCK,
                                   {"trials": blocks_done * BLOCK, "overflow": overflow},
                                   converged=False, k=k, zs=zs, counts=counts, horizon=fh)
        if sample.ess() >= min_hits:
            sample.converged = True
            break
    # overflowed trials count as zero-weight trials (they cannot reach the event)
    return sample


def default_split(n: int, phi: int, ms) -> int:
    return int(min([phi] + [int(m) for m in ms]))


# --- estimates ---------------------------------------------------------------

def _bernoulli(p, trials):
    return math.sqrt(max(p * (1 - p), 0.0) / trials) if trials else float("nan")


def event_probability(sample: ConditionalSample) -> McEstimate:
    if sample.method == "rejection":
        hits = len(sample.rows)
        T = sample.T
        zn = sample.rows[:, sample.columns["zn"]] if hits else np.zeros(0)
        h = int(np.count_nonzero((zn > 0) & (zn <= T)))
        p = h / sample.trials
        return McEstimate(p, _bernoulli(p, sample.trials), h, sample.trials, sample.seed,
                          label="P(H)", method="rejection", converged=sample.converged,
                          extra={k: v for k, v in sample.stats.items() if k != "trials"})
    d = sample.denominators()
    N = sample.trials
    mean = float(np.dot(sample.counts, d)) / N
    var = (float(np.dot(sample.counts, d * d)) - N * mean * mean) / max(N - 1, 1)
    return McEstimate(mean, math.sqrt(max(var, 0.0) / N), sample.ess(), N, sample.seed,
                      label="P(H)", method="split", converged=sample.converged,
                      extra={"k": sample.k, "overflow": sample.stats.get("overflow", 0)})


def conditional_lst(sample: ConditionalSample, m: int, scale: float, lambdas, label: str = "") -> list[McEstimate]:
    """E[exp(-lam * scale * Z(m)) | H] for each lam."""
    out = []
    if sample.method == "rejection":
        col = sample.columns.get(("z", int(m)))
        if col is None:
            raise ValueError(f"generation {m} was not recorded")
        z = sample.rows[:, col].astype(float)
        h = len(z)
        for lam in lambdas:
            if lam == 0:
                out.append(McEstimate(1.0, 0.0, h, sample.trials, sample.seed, 0.0, label,
                                      converged=sample.converged))
                continue
            e = np.exp(-lam * scale * z)
            v = float(e.mean()) if h else float("nan")
            se = float(e.std(ddof=1) / math.sqrt(h)) if h > 1 else float("nan")
            out.append(McEstimate(v, se, h, sample.trials, sample.seed, float(lam), label,
                                  converged=sample.converged))
        return out
    fh = sample.horizon
    ess = sample.ess()
    for lam in lambdas:
        if lam == 0:
            out.append(McEstimate(1.0, 0.0, ess, sample.trials, sample.seed, 0.0, label, "split",
                                  sample.converged, {"k": sample.k}))
            continue
        num = fh.lst_weights(sample.zs, int(m), scale, float(lam), sample.k)
        v, se = sample.ratio(num)
        out.append(McEstimate(v, se, ess, sample.trials, sample.seed, float(lam), label, "split",
                              sample.converged, {"k": sample.k}))
    return out


@dataclass
class ReducedEstimate:
    m: int
    pmf: list[McEstimate]
    tail: McEstimate
    mrca_cdf: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"m": self.m, "pmf": [p.to_dict() for p in self.pmf], "tail": self.tail.to_dict(),
                "mrca_cdf": {repr(k): v.to_dict() for k, v in self.mrca_cdf.items()}}


def reduced_pmf(sample: ConditionalSample, m: int, j_max: int, mrca_generations=()) -> ReducedEstimate:
    """Conditional pmf of Z(m, n) for j = 1..j_max plus the bucket j > j_max.

    ``mrca_generations`` lists distances k for which P(d(n) <= k | H) is also estimated.
    """
    n = sample.event.n
    pmf = []
    if sample.method == "rejection":
        col = sample.columns.get(("zr", int(m)))
        if col is None:
            raise ValueError(f"reduced count at generation {m} was not recorded (use genealogy=True)")
        zr = sample.rows[:, col]
        d = sample.rows[:, sample.columns["d"]]
        h = len(zr)

        def frac(mask, label):
            p = float(mask.mean()) if h else float("nan")
            return McEstimate(p, _bernoulli(p, h), h, sample.trials, sample.seed, None, label,
                              converged=sample.converged)

        for j in range(1, j_max + 1):
            pmf.append(frac(zr == j, f"P(Z({m},{n})={j})"))
        tail = frac(zr > j_max, f"P(Z({m},{n})>{j_max})")
        cdf = {int(k): frac(d <= k, f"P(d({n})<={k})") for k in mrca_generations}
        return ReducedEstimate(int(m), pmf, tail, cdf)
    fh = sample.horizon
    ess = sample.ess()
    W = fh.reduced_weights(sample.zs, int(m), sample.k)

    def est(numer, label):
        v, se = sample.ratio(numer)
        return McEstimate(v, se, ess, sample.trials, sample.seed, None, label, "split",
                          sample.converged, {"k": sample.k})

    for j in range(1, j_max + 1):
        pmf.append(est(W[:, j] if j < W.shape[1] else np.zeros(len(sample.zs)), f"P(Z({m},{n})={j})"))
    tail = est(W[:, j_max + 1:].sum(axis=1), f"P(Z({m},{n})>{j_max})")
    cdf = {}
    for kk in mrca_generations:
        # {d(n) <= k} = {Z(n - k, n) = 1} on survival
        mm = n - int(kk)
        if mm < sample.k:
            raise ValueError("MRCA distance reaches before the split generation")
        Wk = fh.reduced_weights(sample.zs, mm, sample.k)
        cdf[int(kk)] = est(Wk[:, 1], f"P(d({n})<={kk})")
    return ReducedEstimate(int(m), pmf, tail, cdf)


# --- convenience front ends matching the single-call interface ----------------

def estimate_event_prob(law, event: EventSpec, trials: int, seed: int = 0, *, method: str = "rejection",
                        k: int | None = None, threads: int = 1, table=None) -> McEstimate:
    if method == "rejection":
        s = collect_rejection(law, event, (), min_hits=10**18, max_trials=trials, seed=seed,
                              threads=threads, table=table)
    else:
        kk = event.phi if k is None else k
        s = collect_split(law, event, kk, min_hits=float("inf"), max_trials=trials, seed=seed,
                          threads=threads, table=table)
    return event_probability(s)


def estimate_conditional_lst(law, event: EventSpec, m: int, scale_gen: int, lambda_grid=(0.25, 0.5, 1, 2, 4),
                             min_hits: int = 20_000, seed: int = 0, *, max_trials: int = 10**9,
                             method: str = "rejection", k: int | None = None, threads: int = 1,
                             table=None, scale_factor: float = 1.0):
    """Conditional LST of u_{scale_gen} * Z(m) given H, plus the event probability estimate."""
    if not 0 <= m <= event.n:
        raise ValueError("need 0 <= m <= n")
    table = _table_for(law, event.n, table)
    scale = table.survival(scale_gen) * scale_factor
    if method == "rejection":
        s = collect_rejection(law, event, (m,), min_hits=min_hits, max_trials=max_trials, seed=seed,
                              threads=threads, table=table)
    else:
        kk = default_split(event.n, event.phi, [m]) if k is None else k
        s = collect_split(law, event, kk, min_hits=min_hits, max_trials=max_trials, seed=seed,
                          threads=threads, table=table)
    return conditional_lst(s, m, scale, lambda_grid), event_probability(s)


def regime_scale(spec: RegimeSpec, n: int, table: ExtinctionTable, phi: int, w: float = 1.0) -> float:
    """Multiplier of Z(m) for the regime; regime 5 uses the event threshold w / u_phi."""
    if spec.regime == 5:
        return table.survival(phi) / w
    return table.survival(spec.scale_index(n))


def estimate_regimes(law, n: int, specs, lambda_grid, *, phi: int | None = None, w: float = 1.0,
                     min_hits: int = 20_000, max_trials: int = 10**9, seed: int = 0,
                     method: str = "split", k: int | None = None, threads: int = 1, table=None):
    """All regime transforms for one horizon from a single shared set of trials.

    Returns ``(estimates, event_estimate)`` where ``estimates[(label, lam)]`` is a McEstimate.
    """
    specs = list(specs)
    table = _table_for(law, n, table)
    phi = specs[0].phi(n) if phi is None else phi
    event = EventSpec(n, phi, w)
    ms = [sp.m(n) for sp in specs]
    if method == "rejection":
        s = collect_rejection(law, event, ms, min_hits=min_hits, max_trials=max_trials, seed=seed,
                              threads=threads, table=table)
    else:
        kk = default_split(n, phi, ms) if k is None else k
        s = collect_split(law, event, kk, min_hits=min_hits, max_trials=max_trials, seed=seed,
                          threads=threads, table=table)
    out = {}
    for sp, m in zip(specs, ms):
        scale = regime_scale(sp, n, table, phi, w)
        for e in conditional_lst(s, m, scale, lambda_grid, label=sp.label()):
            out[(sp.label(), e.lam)] = e
    return out, event_probability(s)


def estimate_reduced_pmf(law, event: EventSpec, y: float, j_max: int = 10, min_hits: int = 20_000,
                         seed: int = 0, *, y_grid=(), max_trials: int = 10**9, method: str = "rejection",
                         k: int | None = None, threads: int = 1, table=None) -> ReducedEstimate:
    """Conditional pmf of Z(n - ceil(y phi), n) and the MRCA-distance CDF at d <= ceil(y' phi)."""
    n, phi = event.n, event.phi
    m = n - math.ceil(y * phi - 1e-12)
    if m < 0:
        raise ValueError("n - ceil(y phi) must be nonnegative")
    dists = [math.ceil(yy * phi - 1e-12) for yy in y_grid]
    if method == "rejection":
        cps = [m] + [n - d for d in dists]
        s = collect_rejection(law, event, cps, genealogy=True, min_hits=min_hits, max_trials=max_trials,
                              seed=seed, threads=threads, table=table)
    else:
        kk = default_split(n, phi, [m] + [n - d for d in dists]) if k is None else k
        s = collect_split(law, event, kk, min_hits=min_hits, max_trials=max_trials, seed=seed,
                          threads=threads, table=table)
    return reduced_pmf(s, m, j_max, dists)
