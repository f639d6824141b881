"""Experiment campaigns and their result tables.

A campaign is fully described by a :class:`CampaignConfig`.  Every sample
is addressed by ``(master_seed, sample_index)``, work is split into fixed
index chunks and merged in index order, so the output does not depend on
the number of worker processes.

Result tables (``format_version`` 1) have the frozen column order
``COLUMNS``; ``params`` is a JSON object with sorted keys and floats are
written with ``repr``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from . import __version__
from .almost_independence import (almost_independence_demo, pair_covariance_bound,
                                  coefficient_covariance, decorrelate, random_covariance,
                                  rounding_floor)
from .analytic import (BoundId, check_elementary_inequalities, edelman_kostlan_mean,
                       grid_specs, validate_bound)
from .combinatorics import SeparationInstance, select_separated, verify_selection
from .gaussian_core import STREAM_AUX, SeedLineage, VarianceProfile, uniforms
from .lattice import R_MAX_LIMIT, lattice_counts
from .rare_events import is_estimate_deficit
from .series import default_translation_rows, truncation_order
from .zeros import sample_counts

__all__ = [
    "FORMAT_VERSION",
    "COLUMNS",
    "Experiment",
    "CampaignConfig",
    "ResultTable",
    "PreconditionError",
    "check_preconditions",
    "jackknife_variance",
    "mean_check",
    "variance_scan",
    "clt_check",
    "tail_scan",
    "jlm_fit",
    "bounds_suite",
    "lemma_suite",
    "demo_suite",
    "lattice_scan",
    "count_table",
    "run_experiment",
    "run_campaign",
]

FORMAT_VERSION = 1
COLUMNS = ("experiment", "params", "statistic", "value", "stderr", "n",
           "seed", "index_lo", "index_hi")
CHUNK = 250
K_BUDGET = 600
FIT_LABEL = "finite-R effective exponent; not an asymptotic verification"


class PreconditionError(ValueError):
    pass


class Experiment(str, Enum):
    MEAN_CHECK = "mean_check"
    VARIANCE_SCAN = "variance_scan"
    CLT_CHECK = "clt_check"
    TAIL_SCAN = "tail_scan"
    JLM_FIT = "jlm_fit"
    BOUNDS_SUITE = "bounds_suite"
    LEMMA_SUITE = "lemma_suite"
    DEMO_SUITE = "demo_suite"
    LATTICE = "lattice"
    COUNT = "count"


@dataclass
class CampaignConfig:
    """What to run.  ``options`` holds experiment specific settings, e.g.
    ``method`` for tail scans, ``nu`` for the lattice, ``table`` for fits."""

    experiment: Experiment
    R_list: list = field(default_factory=lambda: [3.0])
    alpha_list: list = field(default_factory=lambda: [0.75])
    n_samples: int = 1000
    master_seed: int = 0
    output_path: str | None = None
    threads: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        self.experiment = Experiment(self.experiment)
        self.R_list = [float(r) for r in np.atleast_1d(self.R_list)]
        self.alpha_list = [float(a) for a in np.atleast_1d(self.alpha_list)]
        self.n_samples = int(self.n_samples)
        self.master_seed = int(self.master_seed)
        self.threads = max(1, int(self.threads))
        self.options = dict(self.options or {})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["experiment"] = self.experiment.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)

    def config_hash(self) -> str:
        # output location and worker count do not change results
        d = self.to_dict()
        d.pop("threads")
        d.pop("output_path")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    @property
    def lineage(self) -> SeedLineage:
        return SeedLineage(self.master_seed)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return repr(float(x))


def _params_json(params: dict) -> str:
    def clean(v):
        if isinstance(v, (np.floating, float)):
            return float(v)
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (list, tuple, np.ndarray)):
            return [clean(u) for u in v]
        if isinstance(v, dict):
            return {k: clean(u) for k, u in v.items()}
        if isinstance(v, Enum):
            return v.value
        return v
    return json.dumps(clean(params), sort_keys=True, separators=(",", ":"))


class ResultTable:
    """Append-only rows ``{experiment, params, statistic, value, stderr, n}``
    plus the seed and sample index range they came from."""

    def __init__(self, rows=None):
        self._rows = list(rows or [])

    def append(self, experiment, params: dict, statistic: str, value, stderr=None, n=None,
               seed=None, index_lo=None, index_hi=None) -> None:
        self._rows.append({
            "experiment": str(getattr(experiment, "value", experiment)),
            "params": _params_json(params), "statistic": statistic,
            "value": value, "stderr": stderr, "n": n, "seed": seed,
            "index_lo": index_lo, "index_hi": index_hi,
        })

    def extend(self, other: "ResultTable") -> None:
        self._rows.extend(other._rows)

    @property
    def rows(self) -> list:
        return [dict(r) for r in self._rows]

    def __len__(self):
        return len(self._rows)

    def select(self, statistic=None, **params) -> list:
        out = []
        for r in self._rows:
            if statistic is not None and r["statistic"] != statistic:
                continue
            p = json.loads(r["params"])
            if all(p.get(k) == v for k, v in params.items()):
                out.append(dict(r, params=p))
        return out

    def value(self, statistic, **params):
        hits = self.select(statistic, **params)
        if len(hits) != 1:
            raise KeyError(f"{statistic} {params}: {len(hits)} matching rows")
        return hits[0]["value"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self._rows:
            w.writerow([r["experiment"], r["params"], r["statistic"]]
                       + [_fmt(r[c]) for c in COLUMNS[3:]])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for r in self._rows:
            d = dict(r)
            d["params"] = json.loads(r["params"])
            for c in ("value", "stderr"):
                v = d[c]
                if isinstance(v, (bool, np.bool_)):
                    d[c] = int(v)
                elif v is not None:
                    v = float(v)
                    d[c] = v if math.isfinite(v) else repr(v)
            for c in ("n", "seed", "index_lo", "index_hi"):
                d[c] = None if d[c] is None else int(d[c])
            rows.append({c: d[c] for c in COLUMNS})
        doc = {"format_version": FORMAT_VERSION, "columns": list(COLUMNS), "rows": rows}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        rd = csv.DictReader(io.StringIO(text))
        if tuple(rd.fieldnames or ()) != COLUMNS:
            raise ValueError("unexpected CSV columns")
        rows = []
        for r in rd:
            d = {"experiment": r["experiment"], "params": r["params"],
                 "statistic": r["statistic"]}
            for c in ("value", "stderr"):
                d[c] = float(r[c]) if r[c] != "" else None
            for c in ("n", "seed", "index_lo", "index_hi"):
                d[c] = int(r[c]) if r[c] != "" else None
            rows.append(d)
        return cls(rows)

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        doc = json.loads(text)
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError("unsupported format_version")
        rows = []
        for r in doc["rows"]:
            d = dict(r)
            d["params"] = _params_json(r["params"])
            for c in ("value", "stderr"):
                if isinstance(d[c], str):
                    d[c] = float(d[c])
            rows.append(d)
        return cls(rows)

    @classmethod
    def load(cls, path) -> "ResultTable":
        with open(path) as fh:
            text = fh.read()
        return cls.from_json(text) if str(path).endswith(".json") else cls.from_csv(text)


# ---------------------------------------------------------------- parallel plumbing

def _map(func, tasks, threads: int) -> list:
    """``[func(t) for t in tasks]``, optionally in worker processes; order kept."""
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, tasks))


def _count_chunk(task):
    profile_dict, R, seed, lo, hi = task
    profile = VarianceProfile.from_dict(profile_dict)
    return sample_counts(profile, R, SeedLineage(seed), range(lo, hi))


def _chunks(n: int):
    return [(lo, min(n, lo + CHUNK)) for lo in range(0, n, CHUNK)]


def parallel_counts(profile: VarianceProfile, R: float, n: int, seed: int,
                    threads: int = 1) -> np.ndarray:
    """``n(R)`` for sample indices ``0..n-1`` of ``SeedLineage(seed)``."""
    tasks = [(profile.to_dict(), R, seed, lo, hi) for lo, hi in _chunks(n)]
    parts = _map(_count_chunk, tasks, threads)
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


# ---------------------------------------------------------------- statistics

def jackknife_variance(x) -> tuple[float, float]:
    """Sample variance and its delete-one jackknife standard error."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        return float(np.var(x, ddof=1)) if n == 2 else math.nan, math.nan
    c = x - x.mean()
    s1, s2 = c.sum(), np.dot(c, c)
    m = n - 1
    loo_mean = (s1 - c) / m
    loo = (s2 - c * c - m * loo_mean ** 2) / (m - 1)
    var = s2 / (n - 1)
    se = math.sqrt(m / n * np.sum((loo - loo.mean()) ** 2))
    return float(var), se


def _jackknife_ratio(x, y) -> tuple[float, float]:
    """``var(x)/var(y)`` for paired samples with jackknife stderr."""
    x = np.asarray(x, dtype=float) - np.mean(x)
    y = np.asarray(y, dtype=float) - np.mean(y)
    n = x.size
    m = n - 1

    def loo(c):
        mu = (c.sum() - c) / m
        return (np.dot(c, c) - c * c - m * mu ** 2) / (m - 1)

    theta = loo(x) / loo(y)
    ratio = float(np.dot(x, x) / np.dot(y, y))
    se = math.sqrt(m / n * np.sum((theta - theta.mean()) ** 2))
    return ratio, se


# ---------------------------------------------------------------- preconditions

def _check_R(R_list, limit_K=K_BUDGET):
    if not R_list:
        raise PreconditionError("R_list is empty")
    for R in R_list:
        if not R > 0:
            raise PreconditionError(f"R={R:g} must be positive")
        K = truncation_order(max(R, 1.0))
        if K > limit_K:
            raise PreconditionError(
                f"R={R:g} needs K={K} > budget {limit_K}; outside the certified radius")


def check_preconditions(config: CampaignConfig) -> None:
    """Raise :class:`PreconditionError` before any sampling starts."""
    e = config.experiment
    if config.n_samples < 1:
        raise PreconditionError("n_samples must be positive")
    if e in (Experiment.MEAN_CHECK, Experiment.VARIANCE_SCAN, Experiment.CLT_CHECK,
             Experiment.COUNT):
        _check_R(config.R_list)
    if e in (Experiment.VARIANCE_SCAN, Experiment.CLT_CHECK) and config.n_samples < 3:
        raise PreconditionError("need at least 3 samples")
    if e is Experiment.TAIL_SCAN:
        _check_R(config.R_list)
        method = config.options.get("method", "mc")
        if method not in ("mc", "is"):
            raise PreconditionError(f"unknown tail method {method!r}")
        for a in config.alpha_list:
            if not a > 0:
                raise PreconditionError("alpha must be positive")
            if method == "is" and not 0.5 < a < 1:
                raise PreconditionError("importance sampling needs alpha in (1/2, 1)")
        if method == "is" and min(config.R_list) < 2:
            raise PreconditionError("importance sampling needs R >= 2")
        if method == "is" and not 0 <= float(config.options.get("defensive", 0.2)) < 1:
            raise PreconditionError("defensive must lie in [0, 1)")
    if e is Experiment.JLM_FIT:
        path = config.options.get("table")
        if not path or not os.path.exists(path):
            raise PreconditionError("jlm_fit needs options.table pointing at a tail table")
    if e is Experiment.LATTICE:
        nu = float(config.options.get("nu", 2.0))
        if not nu > 0:
            raise PreconditionError("nu must be positive")
        for R in config.R_list:
            if not 0 < R <= R_MAX_LIMIT:
                raise PreconditionError(f"R={R:g} outside (0, {R_MAX_LIMIT:g}]")
    if e is Experiment.DEMO_SUITE:
        o = config.options
        r, rho = float(o.get("r", 2.0)), float(o.get("rho", 2.0))
        if r < 1 or rho < max(1.0, math.sqrt(math.log(r))):
            raise PreconditionError("demo needs r >= 1 and rho >= max(1, sqrt(log r))")
        centers = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                   for c in o.get("centers", [[-15, 0], [15, 0]])]
        rad = r + float(o.get("A", 6.0)) * rho
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                if abs(centers[i] - centers[j]) <= 2 * rad:
                    raise PreconditionError("demo disks are not disjoint")


# ---------------------------------------------------------------- campaigns

def mean_check(config: CampaignConfig) -> ResultTable:
    """Mean and variance of ``n(R)`` against ``R^2`` for the G.E.F."""
    t = ResultTable()
    n, seed = config.n_samples, config.master_seed
    prof = VarianceProfile.constant()
    for R in config.R_list:
        c = parallel_counts(prof, R, n, seed, config.threads)
        mean = float(c.mean())
        se = float(c.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        var, var_se = jackknife_variance(c)
        meta = dict(n=n, seed=seed, index_lo=0, index_hi=n - 1)
        p = {"R": R}
        t.append(Experiment.MEAN_CHECK, p, "mean", mean, se, **meta)
        t.append(Experiment.MEAN_CHECK, p, "variance", var, var_se, **meta)
        t.append(Experiment.MEAN_CHECK, p, "ek_mean", edelman_kostlan_mean(prof, R), 0.0, **meta)
        t.append(Experiment.MEAN_CHECK, p, "z_score", (mean - R * R) / se if se else math.nan,
                 None, **meta)
    return t


def variance_scan(config: CampaignConfig) -> ResultTable:
    """Per-R mean and variance, variance ratios to the first radius, and the
    least squares slope of ``Var n(R) = c R`` (weighted by jackknife errors)."""
    t = ResultTable()
    n, seed = config.n_samples, config.master_seed
    meta = dict(n=n, seed=seed, index_lo=0, index_hi=n - 1)
    counts = {}
    vs, ses = [], []
    for R in config.R_list:
        c = parallel_counts(VarianceProfile.constant(), R, n, seed, config.threads)
        counts[R] = c
        var, se = jackknife_variance(c)
        vs.append(var)
        ses.append(se)
        t.append(Experiment.VARIANCE_SCAN, {"R": R}, "mean", float(c.mean()),
                 float(c.std(ddof=1) / math.sqrt(n)), **meta)
        t.append(Experiment.VARIANCE_SCAN, {"R": R}, "variance", var, se, **meta)
    Rs = config.R_list
    if len(Rs) >= 2:
        base = Rs[0]
        for R in Rs[1:]:
            ratio, se = _jackknife_ratio(counts[R], counts[base])
            t.append(Experiment.VARIANCE_SCAN, {"R_num": R, "R_den": base}, "variance_ratio",
                     ratio, se, **meta)
        x = np.array(Rs)
        w = 1.0 / np.square(ses)
        slope = float(np.sum(w * x * np.array(vs)) / np.sum(w * x * x))
        slope_se = float(1.0 / math.sqrt(np.sum(w * x * x)))
        t.append(Experiment.VARIANCE_SCAN, {"R_list": Rs, "model": "var = c R"}, "slope",
                 slope, slope_se, **meta)
        t.append(Experiment.VARIANCE_SCAN, {"R_list": Rs}, "slope_ci_lo",
                 slope - 1.96 * slope_se, None, **meta)
        t.append(Experiment.VARIANCE_SCAN, {"R_list": Rs}, "slope_ci_hi",
                 slope + 1.96 * slope_se, None, **meta)
    return t


def _jitter(n: int, seed: int) -> np.ndarray:
    lin = SeedLineage(seed)
    return np.array([uniforms(lin.child(i, STREAM_AUX), 1)[0] for i in range(n)]) - 0.5


def clt_check(config: CampaignConfig) -> ResultTable:
    """KS test of standardized ``n(R)`` against the standard normal.

    Counts are integers, so each gets an independent ``U(-1/2, 1/2)`` jitter
    (from the sample's auxiliary stream) before standardizing; without it
    the KS statistic measures the lattice steps rather than the shape.  The
    negative control compares the same values against Exp(1).
    """
    t = ResultTable()
    n, seed = config.n_samples, config.master_seed
    meta = dict(n=n, seed=seed, index_lo=0, index_hi=n - 1)
    jit = _jitter(n, seed)
    for R in config.R_list:
        c = parallel_counts(VarianceProfile.constant(), R, n, seed, config.threads)
        x = c + jit
        z = (x - x.mean()) / x.std(ddof=1)
        ks = stats.kstest(z, "norm")
        ctrl = stats.kstest(z, "expon")
        p = {"R": R, "jitter": "uniform"}
        t.append(Experiment.CLT_CHECK, p, "ks_stat", float(ks.statistic), None, **meta)
        t.append(Experiment.CLT_CHECK, p, "ks_pvalue", float(ks.pvalue), None, **meta)
        t.append(Experiment.CLT_CHECK, p, "control_pvalue", float(ctrl.pvalue), None, **meta)
        t.append(Experiment.CLT_CHECK, p, "skewness", float(stats.skew(c)), None, **meta)
    return t


def _is_cell(task):
    R, alpha, c, n, seed, defensive = task
    return is_estimate_deficit(R, alpha, c, n, SeedLineage(seed), defensive=defensive)


def tail_scan(config: CampaignConfig) -> ResultTable:
    """Tail frequencies of ``n(R) - R^2`` beyond ``R^alpha``.

    ``options.method == "mc"`` (default) records excess, deficit and two-sided
    frequencies with exact binomial intervals.  ``"is"`` estimates the deficit
    ``{n <= R^2 - c R^alpha}`` by importance sampling (``options.c``,
    ``options.defensive``).
    """
    t = ResultTable()
    n, seed = config.n_samples, config.master_seed
    meta = dict(n=n, seed=seed, index_lo=0, index_hi=n - 1)
    method = config.options.get("method", "mc")
    if method == "is":
        c = config.options.get("c")
        lam = float(config.options.get("defensive", 0.2))
        cells = [(R, a) for R in config.R_list for a in config.alpha_list]
        res = _map(_is_cell, [(R, a, c, n, seed, lam) for R, a in cells], config.threads)
        for (R, a), est in zip(cells, res):
            p = {"R": R, "alpha": a, "method": "is", "c": est.event_spec["c"],
                 "threshold": est.event_spec["threshold"], "defensive": lam}
            t.append(Experiment.TAIL_SCAN, p, "p_deficit", est.p_hat, est.stderr, **meta)
            t.append(Experiment.TAIL_SCAN, p, "ess", est.ess, None, **meta)
            t.append(Experiment.TAIL_SCAN, p, "hit_rate", est.hit_rate, None, **meta)
        return t
    for R in config.R_list:
        counts = parallel_counts(VarianceProfile.constant(), R, n, seed, config.threads)
        dev = counts - R * R
        for a in config.alpha_list:
            lim = R ** a
            p = {"R": R, "alpha": a, "method": "mc"}
            for sign, hits in (("excess", dev > lim), ("deficit", -dev > lim),
                               ("both", np.abs(dev) > lim)):
                k = int(hits.sum())
                ph = k / n
                t.append(Experiment.TAIL_SCAN, p, f"p_{sign}", ph,
                         math.sqrt(ph * (1 - ph) / n), **meta)
                lo, hi = stats.binomtest(k, n).proportion_ci(0.95, method="exact")
                t.append(Experiment.TAIL_SCAN, p, f"ci_lo_{sign}", float(lo), None, **meta)
                t.append(Experiment.TAIL_SCAN, p, f"ci_hi_{sign}", float(hi), None, **meta)
    return t


def jlm_fit(table: ResultTable, *, sign: str = "both", alphas=None) -> dict:
    """Fit ``log(-log p) = a + phi log R`` per ``alpha`` from tail rows.

    Needs at least three distinct ``R`` with ``0 < p < 1`` for every
    ``alpha``; otherwise the error lists the missing cells.  ``nonpower``
    flags curvature in the log-log plane, and ``super_polynomial`` flags
    curvature with local slopes that decrease towards the last one, as for
    ``p = exp(-R^b log R)``.
    """
    rows = table.select(f"p_{sign}")
    by_alpha = {}
    for r in rows:
        by_alpha.setdefault(float(r["params"]["alpha"]), []).append(r)
    wanted = sorted(by_alpha) if alphas is None else [float(a) for a in alphas]
    missing = []
    for a in wanted:
        usable = {float(r["params"]["R"]) for r in by_alpha.get(a, [])
                  if r["value"] is not None and 0 < r["value"] < 1}
        if len(usable) < 3:
            missing.append(f"alpha={a:g}: {len(usable)} usable R (need 3)")
    if not wanted:
        missing.append("no tail rows")
    if missing:
        raise PreconditionError("insufficient data: " + "; ".join(missing))
    out = {"label": FIT_LABEL, "sign": sign, "fits": {}}
    for a in wanted:
        pts = sorted((float(r["params"]["R"]), float(r["value"]), r["stderr"])
                     for r in by_alpha[a] if 0 < r["value"] < 1)
        R = np.array([p[0] for p in pts])
        pv = np.array([p[1] for p in pts])
        x, y = np.log(R), np.log(-np.log(pv))
        fit = stats.linregress(x, y)
        dof = len(x) - 2
        tq = stats.t.ppf(0.975, dof) if dof > 0 else math.inf
        se = float(fit.stderr) if dof > 0 else math.nan
        local = np.diff(y) / np.diff(x)
        resid = y - (fit.intercept + fit.slope * x)
        se_y = np.array([(p[2] or 0.0) / (p[1] * abs(math.log(p[1]))) for p in pts])
        tol = np.maximum(2.0 * se_y, 1e-6)
        nonpower = bool(np.any(np.abs(resid) > tol))
        superpoly = bool(nonpower and len(local) >= 2
                         and np.all(local[:-1] >= local[-1] - 1e-9) and local[0] > local[-1])
        out["fits"][a] = {
            "alpha": a, "slope": float(fit.slope), "stderr": se,
            "ci": (float(fit.slope - tq * se), float(fit.slope + tq * se)) if dof > 0 else None,
            "n_points": len(x), "local_slopes": local.tolist(),
            "nonpower": nonpower, "super_polynomial": superpoly, "label": FIT_LABEL,
        }
    return out


def _fit_table(fit: dict) -> ResultTable:
    t = ResultTable()
    for a, f in fit["fits"].items():
        p = {"alpha": a, "sign": fit["sign"], "label": FIT_LABEL}
        t.append(Experiment.JLM_FIT, p, "phi_hat", f["slope"], f["stderr"], n=f["n_points"])
        t.append(Experiment.JLM_FIT, p, "super_polynomial", f["super_polynomial"], None,
                 n=f["n_points"])
    return t


def _bound_cell(task):
    spec, n, seed = task
    return validate_bound(spec, n, SeedLineage(seed))


def bounds_suite(config: CampaignConfig) -> ResultTable:
    """Empirical frequency against each bound formula on its default grid."""
    t = ResultTable()
    n, seed = config.n_samples, config.master_seed
    meta = dict(n=n, seed=seed, index_lo=0, index_hi=n - 1)
    specs = [s for b in BoundId for s in grid_specs(b)]
    reps = _map(_bound_cell, [(s, n, seed) for s in specs], config.threads)
    for rep in reps:
        p = {"bound_id": rep.bound_id, **rep.params}
        t.append(Experiment.BOUNDS_SUITE, p, "empirical", rep.empirical_freq, rep.stderr, **meta)
        t.append(Experiment.BOUNDS_SUITE, p, "bound", rep.bound, None, **meta)
        t.append(Experiment.BOUNDS_SUITE, p, "pass", rep.passed, None, **meta)
    return t


def combinatorics_check(n_instances: int, seed: int) -> dict:
    """Random instances with ``N <= 64``, ``m <= 32``, ``Q in {1, 2, 3}``."""
    rng = np.random.Generator(SeedLineage(seed, 0, STREAM_AUX).bit_generator())
    sep_fail = mass_fail = disagree = 0
    worst = 0.0
    for _ in range(n_instances):
        N = int(rng.integers(1, 65))
        m = rng.integers(0, 33, size=N) * (rng.random(N) < rng.uniform(0.05, 1.0))
        inst = SeparationInstance(tuple(int(v) for v in m), float(rng.integers(1, 4)))
        res = select_separated(inst)
        sep_fail += not res.separation_ok
        mass_fail += not res.mass_ratio <= 1.0 + 1e-12
        ok = res.separation_ok and res.mass_ratio <= 1.0 + 1e-12
        disagree += ok != verify_selection(inst, res.J_prime)
        worst = max(worst, res.mass_ratio)
    return {"separation_failures": sep_fail, "mass_failures": mass_fail,
            "oracle_disagreements": disagree, "max_mass_ratio": worst}


def decorrelation_check(n_matrices: int, seed: int, max_size: int = 16) -> dict:
    """Random admissible ``Gamma`` of size ``<= max_size``, plus 2x2 cases
    against ``eigh``."""
    rng = np.random.Generator(SeedLineage(seed, 1, STREAM_AUX).bit_generator())
    worst_id = 0.0
    s_viol = bound_viol = 0
    worst_eig = 0.0
    for i in range(n_matrices):
        size = 2 if i % 10 == 0 else int(rng.integers(1, max_size + 1))
        cov = random_covariance(size, rng)
        dec = decorrelate(cov)
        M = dec.mixing
        err = np.abs(M @ cov.Gamma @ M.conj().T - np.eye(size)).max()
        worst_id = max(worst_id, float(err))
        s_viol += int(np.sum(dec.s > cov.delta * (1 + 1e-12) + 1e-15))
        bound_viol += int(np.sum(dec.s > dec.certified_bound * (1 + 1e-12) + 1e-15))
        if size == 2:
            lam, V = np.linalg.eigh(cov.Gamma)
            ref = (V * lam ** -0.5) @ V.conj().T
            worst_eig = max(worst_eig, float(np.abs(ref - M).max()))
    return {"max_identity_error": worst_id, "s_exceeds_delta": s_viol,
            "s_exceeds_certified": bound_viol, "max_eigh_diff_2x2": worst_eig}


def covariance_bound_check(n_configs: int, seed: int) -> dict:
    """Random centers ``|w| <= 12`` and degrees ``k <= 40`` with
    ``|w1 - w2| > sqrt k1 + sqrt k2``: ``|cov| <= 2 exp(-d^2/8)`` up to rounding."""
    rng = np.random.Generator(SeedLineage(seed, 2, STREAM_AUX).bit_generator())
    done = viol = 0
    worst = -math.inf
    while done < n_configs:
        w1, w2 = (rng.uniform(0, 12) * np.exp(2j * np.pi * rng.random()) for _ in range(2))
        k1, k2 = (int(v) for v in rng.integers(0, 41, size=2))
        bound = pair_covariance_bound(w1, k1, w2, k2)
        if bound is None:
            continue
        done += 1
        cov = abs(coefficient_covariance(w1, k1, w2, k2))
        rows = max(default_translation_rows(w1, k1), default_translation_rows(w2, k2))
        excess = cov - bound
        worst = max(worst, excess)
        viol += excess > rounding_floor(rows)
    return {"violations": viol, "max_excess": worst}


def lemma_suite(config: CampaignConfig) -> ResultTable:
    """Combinatorial selection, decorrelation, elementary inequalities and
    the cross covariance bound.  Sizes come from ``options`` with defaults
    ``n_instances=10**5``, ``n_matrices=10**3``, ``n_configs=10**3``."""
    o = config.options
    seed = config.master_seed
    t = ResultTable()
    ni = int(o.get("n_instances", 100_000))
    for k, v in combinatorics_check(ni, seed).items():
        t.append(Experiment.LEMMA_SUITE, {"part": "separation"}, k, v, None, n=ni, seed=seed)
    nm = int(o.get("n_matrices", 1000))
    for k, v in decorrelation_check(nm, seed).items():
        t.append(Experiment.LEMMA_SUITE, {"part": "decorrelation"}, k, v, None, n=nm, seed=seed)
    rep = check_elementary_inequalities()
    t.append(Experiment.LEMMA_SUITE, {"part": "inequalities"}, "violations",
             len(rep.violations), None, n=rep.n_checked)
    t.append(Experiment.LEMMA_SUITE, {"part": "inequalities"}, "quad_max_rel_diff",
             rep.quad_max_rel_diff, None, n=rep.n_checked)
    nc = int(o.get("n_configs", 1000))
    for k, v in covariance_bound_check(nc, seed).items():
        t.append(Experiment.LEMMA_SUITE, {"part": "covariance"}, k, v, None, n=nc, seed=seed)
    return t


def demo_suite(config: CampaignConfig) -> ResultTable:
    """Run the almost independence split for ``options.centers`` (pairs)."""
    o = config.options
    centers = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
               for c in o.get("centers", [[-15, 0], [15, 0]])]
    r, rho, A = float(o.get("r", 2.0)), float(o.get("rho", 2.0)), float(o.get("A", 6.0))
    n, seed = config.n_samples, config.master_seed
    rep = almost_independence_demo(centers, r, rho, config.lineage, A=A, n_trials=n)
    p = {"centers": [[c.real, c.imag] for c in centers], "r": r, "rho": rho, "A": A, "K": rep.K}
    meta = dict(n=n, seed=seed, index_lo=0, index_hi=n - 1)
    t = ResultTable()
    for k in ("delta_max", "certified_max", "exceed_freq", "tail_bound", "cov_excess",
              "cov_floor"):
        t.append(Experiment.DEMO_SUITE, p, k, getattr(rep, k), None, **meta)
    t.append(Experiment.DEMO_SUITE, p, "sup_h_max", max(rep.sup_h), None, **meta)
    t.append(Experiment.DEMO_SUITE, p, "cov_bound_holds", rep.cov_bound_holds, None, **meta)
    t.append(Experiment.DEMO_SUITE, p, "row_sum_hypotheses", rep.row_sum["hypotheses"],
             None, **meta)
    t.append(Experiment.DEMO_SUITE, p, "row_sum_holds", rep.row_sum["holds"], None, **meta)
    return t


def _lattice_chunk(task):
    nu, R_list, seed, lo, hi = task
    return lattice_counts(nu, R_list, hi - lo, SeedLineage(seed), indices=range(lo, hi))


def lattice_scan(config: CampaignConfig) -> ResultTable:
    """Mean and variance of perturbed lattice counts, ``options.nu`` (default 2)."""
    nu = float(config.options.get("nu", 2.0))
    n, seed = config.n_samples, config.master_seed
    tasks = [(nu, config.R_list, seed, lo, hi) for lo, hi in _chunks(n)]
    counts = np.concatenate(_map(_lattice_chunk, tasks, config.threads))
    meta = dict(n=n, seed=seed, index_lo=0, index_hi=n - 1)
    t = ResultTable()
    for j, R in enumerate(config.R_list):
        c = counts[:, j]
        p = {"R": R, "nu": nu}
        t.append(Experiment.LATTICE, p, "mean", float(c.mean()),
                 float(c.std(ddof=1) / math.sqrt(n)) if n > 1 else None, **meta)
        t.append(Experiment.LATTICE, p, "area", math.pi * R * R, None, **meta)
        var, se = jackknife_variance(c)
        t.append(Experiment.LATTICE, p, "variance", var, se, **meta)
    for j, R in enumerate(config.R_list[1:], start=1):
        if n >= 3:
            ratio, se = _jackknife_ratio(counts[:, j], counts[:, 0])
            t.append(Experiment.LATTICE, {"R_num": R, "R_den": config.R_list[0], "nu": nu},
                     "variance_ratio", ratio, se, **meta)
    return t


def count_table(config: CampaignConfig) -> ResultTable:
    """``n(R)`` per sample index (``options.profile`` may give a profile dict)."""
    prof = VarianceProfile.from_dict(config.options.get("profile", {"kind": "constant_one"}))
    t = ResultTable()
    for R in config.R_list:
        c = parallel_counts(prof, R, config.n_samples, config.master_seed, config.threads)
        for i, v in enumerate(c):
            t.append(Experiment.COUNT, {"R": R, "profile": prof.to_dict()}, "count", int(v),
                     None, n=1, seed=config.master_seed, index_lo=i, index_hi=i)
    return t


_RUNNERS = {
    Experiment.MEAN_CHECK: mean_check,
    Experiment.VARIANCE_SCAN: variance_scan,
    Experiment.CLT_CHECK: clt_check,
    Experiment.TAIL_SCAN: tail_scan,
    Experiment.BOUNDS_SUITE: bounds_suite,
    Experiment.LEMMA_SUITE: lemma_suite,
    Experiment.DEMO_SUITE: demo_suite,
    Experiment.LATTICE: lattice_scan,
    Experiment.COUNT: count_table,
}


def run_experiment(config: CampaignConfig) -> ResultTable:
    """Check preconditions, then produce the result table in memory."""
    check_preconditions(config)
    if config.experiment is Experiment.JLM_FIT:
        o = config.options
        fit = jlm_fit(ResultTable.load(o["table"]), sign=o.get("sign", "both"),
                      alphas=o.get("alphas"))
        return _fit_table(fit)
    return _RUNNERS[config.experiment](config)


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run_campaign(config: CampaignConfig) -> tuple[int, dict]:
    """Run and write ``<out>.csv``, ``<out>.json`` and ``<out>.manifest.json``.

    Returns ``(status, manifest)`` with status 0 on success, 2 on a failed
    precondition and 3 on a numeric failure.  On failure the manifest is
    still written, with the error text.
    """
    base = config.output_path or config.experiment.value
    manifest = {"config": config.to_dict(), "config_hash": config.config_hash(),
                "code_version": __version__, "format_version": FORMAT_VERSION}
    t0 = time.perf_counter()
    status, table = 0, None
    try:
        table = run_experiment(config)
    except PreconditionError as exc:
        status, manifest["error"] = 2, str(exc)
    except (ArithmeticError, FloatingPointError, np.linalg.LinAlgError, AssertionError) as exc:
        status, manifest["error"] = 3, f"{type(exc).__name__}: {exc}"
    except ValueError as exc:
        status, manifest["error"] = 2, str(exc)
    manifest["wall_time_s"] = round(time.perf_counter() - t0, 3)
    manifest["status"] = status
    d = os.path.dirname(os.path.abspath(base))
    os.makedirs(d, exist_ok=True)
    if table is not None:
        _write(base + ".csv", table.to_csv())
        _write(base + ".json", table.to_json())
        manifest["rows"] = len(table)
        manifest["files"] = [base + ".csv", base + ".json"]
    _write(base + ".manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return status, manifest
