"""Capacity analysis: detection statistics, the p_corr integral, and the two experiments.

The probability of picking the right item out of ``N`` by clean-up is modelled
as a race between one "hit" similarity ``h ~ N(mu_h, sigma_h)`` and ``N - 1``
independent "reject" similarities ``r ~ N(mu_r, sigma_r)``::

    p_corr = integral  N(x; mu_h - mu_r, sigma_h) * Phi(x; 0, sigma_r) ** (N - 1)  dx
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import ModelError
from .models import make_model
from .models.base import ModelAlgebra
from .spaces import BIPOLAR, RngStream, SpaceSpec, as_generator, draw

SIGMA_FLOOR = 1e-12
PANEL_TOL = 1e-8
GLOBAL_TOL = 1e-6
MAX_DEPTH = 60


# ---------------------------------------------------------------- statistics


@dataclass(frozen=True)
class DetectionStats:
    """Hit and reject similarity distributions for one scenario."""

    mu_h: float
    sigma_h: float
    mu_r: float
    sigma_r: float
    metric: str = ""
    scenario: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("mu_h", "sigma_h", "mu_r", "sigma_r"):
            if not math.isfinite(getattr(self, name)):
                raise ModelError(f"detection statistic {name} is not finite")
        # noiseless scenarios have zero spread; keep the invariant sigma > 0
        object.__setattr__(self, "sigma_h", max(float(self.sigma_h), SIGMA_FLOOR))
        object.__setattr__(self, "sigma_r", max(float(self.sigma_r), SIGMA_FLOOR))


def score_arrays(model: ModelAlgebra, Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Clean-up scores oriented so larger is better, on a per-model scale.

    BSC uses ``1 - 2 dist_Ham`` (the bipolar dot product over D), MAP uses
    ``dot / D`` (for one query the ranking equals cosine ranking), HRR the
    plain dot product (its atoms have unit expected norm), FHRR the mean
    cosine of angle differences. Other models fall back to their metric.
    """
    D = model.dim
    Q = np.asarray(Q)
    if model.name == "bsc":
        q = 2.0 * Q.astype(np.float32) - 1.0
        x = 2.0 * np.asarray(X, dtype=np.float32) - 1.0
        return (q @ x.T).astype(np.float64) / D
    if model.name in ("map", "mbat"):
        return (Q.astype(np.float64) @ np.asarray(X, dtype=np.float64).T) / D
    if model.name == "hrr":
        return Q.astype(np.float64) @ np.asarray(X, dtype=np.float64).T
    if model.name == "fhrr":
        return (Q @ np.conj(np.asarray(X)).T).real / D
    s = model.scores(Q, X)
    return -s if model.metric in ("euclidean", "hamming", "mcr") else s


def sequence_arrays(model: ModelAlgebra, atoms: np.ndarray, idx: np.ndarray, norm: str | None = None) -> np.ndarray:
    """Superposed permutation-position encodings, one per row of ``idx``.

    ``idx`` has shape ``(T, m)``; row ``t`` encodes
    ``sum_i rho**i(atoms[idx[t, i]])`` under the model's normalization.
    """
    T, m = idx.shape
    terms = np.stack([model.rho.apply(atoms[idx[:, i]], i) for i in range(m)])
    return model.superpose_arrays(terms, norm)


def sequence_scores(model: ModelAlgebra, atoms: np.ndarray, idx: np.ndarray, norm: str | None = None):
    """Scores of every position probe against every atom, shape ``(T, m, N)``."""
    s = sequence_arrays(model, atoms, idx, norm)
    T, m = idx.shape
    probes = np.stack([model.rho.apply(s, -i) for i in range(m)], axis=1)
    return score_arrays(model, probes.reshape(T * m, -1), atoms).reshape(T, m, -1)


def correct_mask(scores: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """True where the right item strictly beats every other item (ties are errors)."""
    hit = np.take_along_axis(scores, idx[..., None], axis=-1)[..., 0]
    others = scores.copy()
    np.put_along_axis(others, idx[..., None], -np.inf, axis=-1)
    return hit > others.max(axis=-1)


def estimate_detection_stats(
    model: ModelAlgebra,
    m: int,
    n_items: int,
    trials: int,
    rng,
    norm: str | None = None,
) -> DetectionStats:
    """Monte Carlo hit and reject statistics for recovering one element of an
    ``m``-term superposed sequence over ``n_items`` random atoms.

    At least ``trials`` probes are scored; each contributes one hit sample
    and ``n_items - 1`` reject samples. A fresh item memory is drawn for every
    batch of sequences so the statistics average over memories.
    """
    if m < 1:
        raise ModelError("a scenario needs at least one superimposed term (m >= 1)")
    if trials < 1000:
        raise ModelError(f"detection statistics need >= 1000 trials, got {trials}")
    if n_items < 2:
        raise ModelError("reject statistics need at least two items")
    gen = as_generator(rng)
    n_seq = -(-trials // m)
    batch = max(1, min(n_seq, 200))
    hits, rejects = [], []
    done = 0
    while done < n_seq:
        b = min(batch, n_seq - done)
        atoms = model.random_arrays(n_items, gen)
        idx = gen.integers(0, n_items, size=(b, m))
        sc = sequence_scores(model, atoms, idx, norm)
        mask = np.zeros(sc.shape, dtype=bool)
        np.put_along_axis(mask, idx[..., None], True, axis=-1)
        hits.append(sc[mask])
        rejects.append(sc[~mask])
        done += b
    h = np.concatenate(hits)
    r = np.concatenate(rejects)
    return DetectionStats(
        float(h.mean()),
        float(h.std(ddof=1)),
        float(r.mean()),
        float(r.std(ddof=1)),
        metric="score",
        scenario={"model": model.name, "D": model.dim, "m": m, "N": n_items, "probes": int(h.size)},
    )


# ---------------------------------------------------------------- p_corr


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def adaptive_simpson(f, a: float, b: float, tol: float = PANEL_TOL, max_depth: int = MAX_DEPTH) -> float:
    """Adaptive Simpson quadrature with Richardson correction (iterative)."""
    if b <= a:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, s, eps, depth = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        left = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        right = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
        delta = left + right - s
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((a0, m0, fa0, flm, fm0, left, eps / 2.0, depth + 1))
            stack.append((m0, b0, fm0, frm, fb0, right, eps / 2.0, depth + 1))
    return total


def pcorr_analytic(stats: DetectionStats, N: int) -> float:
    """Expected clean-up accuracy among ``N`` candidates.

    The integral is truncated to ``(mu_h - mu_r) +- 10 max(sigma_h, sigma_r)``
    and evaluated by adaptive Simpson. Panel edges are placed at the hit
    mean and ``+-10 sigma_h`` so a narrow hit density is never stepped over.
    """
    if N < 1:
        raise ModelError(f"N must be >= 1, got {N}")
    if N == 1:
        return 1.0
    c = stats.mu_h - stats.mu_r
    sh, sr = stats.sigma_h, stats.sigma_r
    span = 10.0 * max(sh, sr)
    a, b = c - span, c + span
    k = N - 1
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * sh)

    def f(x: float) -> float:
        z = (x - c) / sh
        return norm * math.exp(-0.5 * z * z) * _norm_cdf(x / sr) ** k

    edges = sorted({a, b, min(max(c - 10.0 * sh, a), b), c, min(max(c + 10.0 * sh, a), b)})
    panels = list(zip(edges[:-1], edges[1:]))
    tol = min(PANEL_TOL, GLOBAL_TOL / max(1, len(panels)))
    p = sum(adaptive_simpson(f, lo, hi, tol) for lo, hi in panels)
    return float(min(1.0, max(0.0, p)))


def pcorr_monte_carlo(stats: DetectionStats, N: int, samples: int, rng) -> float:
    """Direct simulation of the hit-versus-rejects race.

    The largest of ``N - 1`` reject draws is sampled exactly as
    ``sigma_r * Phi^-1(U ** (1 / (N - 1)))``.
    """
    if N == 1:
        return 1.0
    gen = as_generator(rng)
    hit = gen.normal(stats.mu_h - stats.mu_r, stats.sigma_h, size=samples)
    u = gen.random(samples)
    best = stats.sigma_r * ndtri(u ** (1.0 / (N - 1)))
    return float(np.mean(hit > best))


# ---------------------------------------------------------------- experiments


def thread_count(requested: int | None = None) -> int:
    """Worker threads: ``requested`` or 4, capped by ``HYPERALG_THREADS``."""
    n = requested or 4
    cap = os.environ.get("HYPERALG_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ModelError(f"HYPERALG_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def run_indexed(tasks, threads: int):
    """Run zero-argument callables, returning results in task order."""
    if threads <= 1 or len(tasks) <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: t(), tasks))


@dataclass(frozen=True)
class CapacityConfig:
    models: tuple[str, ...] = ("bsc", "map", "fhrr")
    dim: int = 256
    items: int = 64
    lengths: tuple[int, ...] = tuple(range(2, 51))
    runs: int = 5
    trials: int = 100
    stats_trials: int = 2000
    seed: int = 0
    threads: int | None = None
    norm: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "lengths", tuple(int(m) for m in self.lengths))
        if not self.models:
            raise ModelError("capacity experiment needs at least one model")
        if self.dim < 1 or self.items < 2 or self.runs < 1 or self.trials < 1:
            raise ModelError("dim >= 1, items >= 2, runs >= 1 and trials >= 1 are required")
        if not self.lengths or min(self.lengths) < 1:
            raise ModelError("sequence lengths must be positive")
        if self.stats_trials < 1000:
            raise ModelError("stats_trials must be >= 1000")


@dataclass(frozen=True)
class CapacityPoint:
    model: str
    dim: int
    items: int
    m: int
    trials: int
    empirical_acc: float
    analytic_pcorr: float
    seed: int
    stats: DetectionStats


@dataclass
class CapacityCurve:
    config: CapacityConfig
    points: list[CapacityPoint]

    def for_model(self, name: str) -> list[CapacityPoint]:
        return [p for p in self.points if p.model == name]

    def mean_abs_deviation(self, name: str) -> float:
        pts = self.for_model(name)
        return float(np.mean([abs(p.empirical_acc - p.analytic_pcorr) for p in pts]))

    def rows(self) -> list[dict]:
        return [
            {
                "model": p.model,
                "D": p.dim,
                "N": p.items,
                "m": p.m,
                "trials": p.trials,
                "empirical_acc": p.empirical_acc,
                "analytic_pcorr": p.analytic_pcorr,
                "seed": p.seed,
            }
            for p in self.points
        ]


def _capacity_point(cfg: CapacityConfig, name: str, m: int) -> CapacityPoint:
    model = make_model(name, cfg.dim, seed=cfg.seed)
    correct = 0
    total = 0
    for run in range(cfg.runs):
        base = RngStream(cfg.seed, f"capacity/{name}/run{run}")
        atoms = model.random_arrays(cfg.items, base.derive("items"))
        gen = base.derive(f"m{m}").generator()
        idx = gen.integers(0, cfg.items, size=(cfg.trials, m))
        ok = correct_mask(sequence_scores(model, atoms, idx, cfg.norm), idx)
        correct += int(ok.sum())
        total += ok.size
    stats = estimate_detection_stats(
        model, m, cfg.items, cfg.stats_trials, RngStream(cfg.seed, f"capacity/{name}/stats/m{m}"), cfg.norm
    )
    return CapacityPoint(name, cfg.dim, cfg.items, m, total, correct / total, pcorr_analytic(stats, cfg.items), cfg.seed, stats)


def run_sequence_recovery_experiment(cfg: CapacityConfig) -> CapacityCurve:
    """Recovery accuracy of superposed permutation-position sequences versus length.

    Every (model, length) point is an independent task seeded from
    ``(seed, model, run, length)``, so results do not depend on the number
    of worker threads.
    """
    tasks = [lambda n=n, m=m: _capacity_point(cfg, n, m) for n in cfg.models for m in cfg.lengths]
    return CapacityCurve(cfg, run_indexed(tasks, thread_count(cfg.threads)))


@dataclass(frozen=True)
class ConcentrationConfig:
    dims: tuple[int, ...] = (128, 1024, 8192)
    count: int = 2000
    seed: int = 0
    max_pairs: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.dims or min(self.dims) < 1:
            raise ModelError("dimensions must be a nonempty list of positive integers")
        if self.count < 2:
            raise ModelError("need at least two vectors")
        if self.max_pairs is not None and self.max_pairs < 1:
            raise ModelError("max_pairs must be positive")


@dataclass
class ConcentrationResult:
    config: ConcentrationConfig
    samples: dict[int, np.ndarray]
    fits: dict[int, tuple[float, float]]

    def rows(self) -> list[dict]:
        return [
            {
                "D": D,
                "count": self.config.count,
                "pairs": int(self.samples[D].size),
                "mean": self.fits[D][0],
                "std": self.fits[D][1],
                "expected_std": 1.0 / math.sqrt(D),
            }
            for D in self.config.dims
        ]


def concentration_samples(D: int, count: int, seed: int, max_pairs: int | None = None) -> np.ndarray:
    """Pairwise cosine similarities among ``count`` random bipolar vectors."""
    X = draw(SpaceSpec(BIPOLAR, D), count, RngStream(seed, f"concentration/D{D}/vectors")).astype(np.float32)
    # +-1 entries make every Gram entry an integer well inside float32 range
    G = X @ X.T
    iu = np.triu_indices(count, k=1)
    sims = G[iu].astype(np.float64) / D
    if max_pairs is not None and sims.size > max_pairs:
        gen = RngStream(seed, f"concentration/D{D}/subsample").generator()
        keep = np.sort(gen.choice(sims.size, size=max_pairs, replace=False))
        sims = sims[keep]
    return sims


def run_concentration_experiment(cfg: ConcentrationConfig) -> ConcentrationResult:
    samples, fits = {}, {}
    for D in cfg.dims:
        s = concentration_samples(D, cfg.count, cfg.seed, cfg.max_pairs)
        samples[D] = s
        # maximum-likelihood normal fit
        fits[D] = (float(s.mean()), float(s.std()))
    return ConcentrationResult(cfg, samples, fits)


def stats_to_dict(stats: DetectionStats) -> dict:
    return asdict(stats)
