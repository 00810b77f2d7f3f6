"""Seeded Monte-Carlo harness for the projection and kernel-ridge experiments.

Every replicate draws its noise from its own substream
``SeedSequence([master_seed, index])``, so results do not depend on how
replicates are spread over worker processes; aggregation always runs in
replicate-index order.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .collection import penalized_argmin
from .jump import c_max_jump, c_threshold, c_window, window_argmax_set
from .path import compute_path
from .regress import generate_problem, laplace_kernel, projection_stats, ridge_grid, ridge_stats
from .slope import c_median, c_slope, capushe, consensus
from .varbounds import sigma2_residual

FIVE = ("max_jump", "threshold", "window", "slope", "capushe")
# methods that come with a constant C (reported as C / sigma2)
CALIBRATED = FIVE + ("median", "resid")
# rows of the report, in display order
ROWS = CALIBRATED[:6] + ("consensus", "consensus_no_reject", "resid", "cp", "cp_overpen")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.  ``None`` parameters take their defaults from ``n``.

    Defaults: ``T_n = n/2``, ``eta = n^-1/2``, ``D0 = n/2``, ``pct = 0.15``,
    ``D_m0 = n/2``; ``sigma2`` is ``1/4`` for ``easy``/``hard`` and ``1``
    for ``kernel``.
    """

    setting: str = "easy"
    n: int = 100
    sigma2: Optional[float] = None
    N: int = 2000
    master_seed: int = 0
    T_n: Optional[float] = None
    eta: Optional[float] = None
    D0: Optional[float] = None
    pct: float = 0.15
    D_m0: Optional[int] = None
    overpen: float = 1.12
    overpen_grid: tuple = (0.0, 4.0, 0.01)
    kernel_alpha: float = 8.0

    def __post_init__(self):
        if self.setting not in ("easy", "hard", "kernel"):
            raise ValueError(f"unknown setting {self.setting!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        n = self.n
        fill = {
            "sigma2": 1.0 if self.setting == "kernel" else 0.25,
            "T_n": n / 2, "eta": n ** -0.5, "D0": n / 2, "D_m0": n // 2,
        }
        for k, v in fill.items():
            if getattr(self, k) is None:
                object.__setattr__(self, k, v)

    @property
    def grid(self) -> np.ndarray:
        start, stop, step = self.overpen_grid
        k = int(round((stop - start) / step))
        return start + step * np.arange(k + 1)


@dataclass
class Replicate:
    index: int
    c_hat: dict  # method -> C
    models: dict  # method -> selected id
    ratios: dict  # method -> risk ratio
    agreed: Optional[bool] = None
    p1p2_rel: float = 0.0
    extra: dict = field(default_factory=dict)


def _ratio(true_risk, pos):
    num = true_risk[pos]
    den = true_risk.min()
    if num == den:
        return 1.0
    return float(num / den) if den > 0 else math.inf


@lru_cache(maxsize=4)
def _kernel_grid(n, alpha):
    x = np.arange(n, dtype=float) / (n - 1)
    return ridge_grid(laplace_kernel(x, alpha), n)


def _draw(config, index):
    return generate_problem(config.setting, config.n, config.sigma2,
                            [int(config.master_seed), int(index)])


def run_replicate(config: SimConfig, index: int) -> Replicate:
    """All calibrators on a single draw (common random numbers)."""
    if config.setting == "kernel":
        return _kernel_replicate(config, index)
    prob = _draw(config, index)
    stats, coll = projection_stats(prob)
    n = config.n
    true = np.array([s.true_risk for s in stats])  # indexed by id - 1
    p1 = np.array([s.p1 for s in stats])
    p2 = np.array([s.p2 for s in stats])
    scale = np.maximum(np.abs(p1), np.abs(p2))
    rel = np.where(scale > 0, np.abs(p1 - p2) / np.where(scale > 0, scale, 1), 0.0)

    path = compute_path(coll)
    comp = path.complexities(coll)
    c = {
        "max_jump": c_max_jump(path, comp).c_hat,
        "threshold": c_threshold(path, comp, config.T_n).c_hat,
        "window": c_window(path, comp, config.eta).c_hat,
        "slope": c_slope(coll, config.D0, n).c_hat,
    }
    cap = capushe(coll, n, config.pct)
    c["capushe"] = cap.c_hat
    c["median"] = c_median([c[k] for k in FIVE])
    # residual estimator on the model of dimension D_m0 (ids are dimensions)
    m0 = config.D_m0
    rss = n * stats[m0 - 1].empirical_risk
    c["resid"] = sigma2_residual(None, rss, m0, n).value

    def pick(C):
        return coll.ids[penalized_argmin(coll, C, "pen1")]

    models = {k: pick(v) for k, v in c.items() if k != "capushe"}
    models["capushe"] = cap.selected_id
    models["consensus"], agreed = consensus([models[k] for k in FIVE], models["window"])
    models["cp"] = pick(config.sigma2)
    models["cp_overpen"] = pick(config.overpen * config.sigma2)
    ratios = {k: _ratio(true, m - 1) for k, m in models.items()}
    return Replicate(index, c, models, ratios, agreed, float(rel.max()))


def _kernel_replicate(config, index):
    prob = _draw(config, index)
    grid = _kernel_grid(config.n, config.kernel_alpha)
    stats, c4 = ridge_stats(prob, grid, "alg4")
    _, c3 = ridge_stats(prob, grid, "alg3")
    true = np.array([s.true_risk for s in stats])
    c = {}
    models = {}
    extra = {}
    for tag, coll in (("alg4", c4), ("alg3", c3)):
        path = compute_path(coll)
        comp = path.complexities(coll)
        span = float(comp.max() - comp.min()) if comp.size > 1 else 0.0
        win = window_argmax_set(path, comp, 1 + config.eta, 1 / (1 + config.eta))
        extra[f"{tag}_window_drop"] = win.value
        extra[f"{tag}_drop_fraction"] = win.value / span if span > 0 else 0.0
        try:
            c[f"{tag}_window"] = c_window(path, comp, config.eta).c_hat
        except Exception as exc:  # no jump on this draw
            c[f"{tag}_window"] = math.nan
            extra[f"{tag}_error"] = type(exc).__name__
        if math.isfinite(c[f"{tag}_window"]):
            models[f"{tag}_window"] = coll.ids[penalized_argmin(coll, c[f"{tag}_window"], "pen1")]
    models["cl"] = c4.ids[penalized_argmin(c4, config.sigma2, "pen1")]
    ratios = {k: _ratio(true, m) for k, m in models.items()}  # ids are grid indices
    return Replicate(index, c, models, ratios, None, 0.0, extra)


def _run_chunk(args):
    config, indices = args
    return [run_replicate(config, i) for i in indices]


def run_replicates(config: SimConfig, jobs: int = 1) -> list:
    """All ``N`` replicates in index order; ``jobs > 1`` uses worker processes."""
    idx = list(range(config.N))
    if jobs <= 1 or config.N < 2:
        return [run_replicate(config, i) for i in idx]
    k = max(1, math.ceil(len(idx) / (4 * jobs)))
    chunks = [(config, idx[i:i + k]) for i in range(0, len(idx), k)]
    out = []
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        for part in ex.map(_run_chunk, chunks):
            out.extend(part)
    return out


@dataclass(frozen=True)
class MethodSummary:
    mean: Optional[float]  # of C / sigma2
    sd: Optional[float]
    mse: Optional[float]
    risk_ratio: float
    risk_ratio_se: Optional[float]
    count: int


def _mean_sd(v):
    v = np.asarray(v, dtype=float)
    m = float(v.mean())
    sd = float(v.std(ddof=1)) if v.size > 1 else None
    return m, sd


def _summary(cn, rr):
    rr_mean, rr_sd = _mean_sd(rr)
    se = rr_sd / math.sqrt(len(rr)) if rr_sd is not None else None
    if cn is None:
        return MethodSummary(None, None, None, rr_mean, se, len(rr))
    mean, sd = _mean_sd(cn)
    mse = float(np.mean((np.asarray(cn) - 1.0) ** 2))
    return MethodSummary(mean, sd, mse, rr_mean, se, len(rr))


AGREEMENT_KEYS = ("all_equal", "exactly_4", "at_least_3", "all_different",
                  "maxj_eq_thr", "maxj_thr_win_all_different")


def _agreement_row(rep):
    models = rep.models
    five = [models[k] for k in FIVE]
    top = Counter(five).most_common(1)[0][1]
    trio = {models["max_jump"], models["threshold"], models["window"]}
    return (top == 5, top == 4, top >= 3, len(set(five)) == 5,
            # this column compares the constants, the others the models
            rep.c_hat["max_jump"] == rep.c_hat["threshold"], len(trio) == 3)


def agreement_from(reps) -> dict:
    rows = np.array([_agreement_row(r) for r in reps], dtype=float)
    return dict(zip(AGREEMENT_KEYS, rows.mean(axis=0).tolist()))


@dataclass(frozen=True)
class MonteCarloReport:
    setting: str
    N: int
    seed: int
    sigma2: float
    methods: dict  # row name -> MethodSummary
    agreement: dict
    p1p2_max_rel: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["methods"] = {k: asdict(v) for k, v in self.methods.items()}
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_text(self) -> str:
        """Aligned table: method, mean, sd, MSE of C/sigma2 and the risk ratio."""
        def f(v, fmt):
            return "--" if v is None or (isinstance(v, float) and math.isnan(v)) else format(v, fmt)

        lines = [f"setting={self.setting}  N={self.N}  seed={self.seed}",
                 f"{'method':<22}{'mean':>8}{'sd':>8}{'mse':>9}   risk ratio"]
        for name, s in self.methods.items():
            rr = f(s.risk_ratio, ".3f")
            if s.risk_ratio_se is not None:
                rr += f" +- {s.risk_ratio_se:.3f}"
            lines.append(f"{name:<22}{f(s.mean, '.2f'):>8}{f(s.sd, '.3f'):>8}"
                         f"{f(s.mse, '.4f'):>9}   {rr}")
        if self.agreement:
            lines.append("")
            lines.extend(f"{k:<30}{v:.3f}" for k, v in self.agreement.items())
        return "\n".join(lines)


def summarize(config: SimConfig, reps) -> MonteCarloReport:
    s2 = config.sigma2

    def cnorm(key):
        vals = [r.c_hat[key] for r in reps]
        return [v / s2 if s2 > 0 else math.nan for v in vals]

    methods = {}
    if config.setting == "kernel":
        for key in ("alg4_window", "alg3_window", "cl"):
            rr = [r.ratios[key] for r in reps if key in r.ratios]
            cn = None
            if key != "cl":
                cn = [v for v in cnorm(key) if not math.isnan(v)]
            if rr:
                methods[key] = _summary(cn or None, rr)
        frac = {t: float(np.mean([r.extra[f"{t}_drop_fraction"] for r in reps]))
                for t in ("alg4", "alg3")}
        return MonteCarloReport(config.setting, config.N, config.master_seed, s2, methods, {},
                                0.0, {"mean_drop_fraction": frac})
    for key in ROWS:
        if key == "consensus_no_reject":
            rr = [r.ratios["consensus"] for r in reps if r.agreed]
            if rr:
                methods[key] = _summary(None, rr)
            continue
        cn = cnorm(key) if key in CALIBRATED else None
        methods[key] = _summary(cn, [r.ratios[key] for r in reps])
    return MonteCarloReport(config.setting, config.N, config.master_seed, s2, methods,
                            agreement_from(reps), max(r.p1p2_rel for r in reps))


def run_monte_carlo(config: SimConfig, jobs: int = 1) -> MonteCarloReport:
    return summarize(config, run_replicates(config, jobs))


def agreement_table(config: SimConfig, jobs: int = 1) -> dict:
    """Frequencies of agreement patterns among the five selected models."""
    if config.setting == "kernel":
        raise ValueError("agreement statistics need the easy or hard setting")
    return agreement_from(run_replicates(config, jobs))


def _sweep_chunk(args):
    config, indices = args
    Cs = config.grid
    out = np.empty((len(indices), Cs.size))
    for row, i in enumerate(indices):
        stats, coll = projection_stats(_draw(config, i))
        true = np.array([s.true_risk for s in stats])
        crit = coll.risk[None, :] + (Cs * config.sigma2)[:, None] * coll.pen1[None, :]
        pos = np.argmin(crit, axis=1)
        ids = np.asarray(coll.ids)[pos]
        num = true[ids - 1]
        den = true.min()
        with np.errstate(divide="ignore", invalid="ignore"):
            out[row] = np.where(num == den, 1.0, num / den)
    return out


@dataclass(frozen=True)
class SweepResult:
    C: np.ndarray
    risk_ratio: np.ndarray
    se: np.ndarray

    @property
    def best_C(self) -> float:
        return float(self.C[int(np.argmin(self.risk_ratio))])

    @property
    def improvement_factor(self) -> float:
        """Mean risk ratio at ``C = 1`` over its minimum on the grid."""
        one = int(np.argmin(np.abs(self.C - 1.0)))
        return float(self.risk_ratio[one] / self.risk_ratio.min())

    def to_csv(self) -> str:
        rows = ["C,risk_ratio,se"]
        rows += [f"{c:.2f},{r!r},{s!r}" for c, r, s in
                 zip(self.C, self.risk_ratio.tolist(), self.se.tolist())]
        return "\n".join(rows) + "\n"


def overpenalization_sweep(config: SimConfig, jobs: int = 1) -> SweepResult:
    """Mean risk ratio of ``argmin risk + 2 C sigma2 D / n`` over a grid of ``C``.

    All grid values share the same replicates.
    """
    if config.setting == "kernel":
        raise ValueError("the sweep needs the easy or hard setting")
    idx = list(range(config.N))
    if jobs <= 1:
        R = _sweep_chunk((config, idx))
    else:
        k = max(1, math.ceil(len(idx) / (4 * jobs)))
        chunks = [(config, idx[i:i + k]) for i in range(0, len(idx), k)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            R = np.vstack(list(ex.map(_sweep_chunk, chunks)))
    mean = R.mean(axis=0)
    se = R.std(axis=0, ddof=1) / math.sqrt(R.shape[0]) if R.shape[0] > 1 else np.full_like(mean, np.nan)
    return SweepResult(config.grid, mean, se)
