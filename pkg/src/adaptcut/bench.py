"""Experiment harness: noisy replay, convergence curves, crossover search,
parameter histograms, variant comparison, and zero-noise extrapolation.

Grown circuits are replayed from their RunRecords: every prefix is rebuilt
with the parameters that were optimal when it was the full circuit, then
evaluated on a density matrix with depolarizing noise after each CNOT.
"""

from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .adapt import AdaptConfig, RunRecord, run_adapt
from .exceptions import InvalidParameterError, ResourceLimitError
from .gw import DEFAULT_ROUNDS, hyperplane_round, solve_relaxation
from .instances import MaxCutInstance
from .operators import build_hamiltonian
from .seeding import derive_seed
from .simulator import DensityBackend, evolve_ansatz_vec

# log-spaced sweep over the regime where the crossover lives, plus the two
# error rates used for the headline noisy curves
NOISE_ANCHORS = (0.00122, 0.00263)
DEFAULT_NOISE_GRID = tuple(
    sorted(set(np.geomspace(1e-4, 3e-2, 9).tolist()) | set(NOISE_ANCHORS))
)

NOISY_GROWTH_MAX_QUBITS = 10


def _map_jobs(fn, items, jobs: int = 1) -> list:
    """Fan work out over a thread pool; results keep the input order."""
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _mean_stderr(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


# ── noisy replay ──────────────────────────────────────────────────────────


def replay_with_noise(
    record: RunRecord, inst: MaxCutInstance | None = None, p_gate: float = 0.0
) -> list[float]:
    """Approximation ratio of every recorded prefix under gate noise.

    Prefix p is rebuilt with the parameters optimized at iteration p and
    simulated with a depolarizing channel after each CNOT.  p_gate = 0
    reproduces the recorded noiseless ratios.
    """
    if not 0.0 <= p_gate <= 1.0:
        raise InvalidParameterError(f"p_gate must be in [0, 1], got {p_gate}")
    if inst is None:
        inst = record.instance
    if inst.n != record.n:
        raise InvalidParameterError("instance does not match the record")
    ham = build_hamiltonian(inst)
    total = inst.total_weight
    backend = DensityBackend(ham, p_gate) if p_gate > 0.0 else None
    alphas = []
    for p in range(1, len(record.iterations) + 1):
        ansatz = record.build_prefix(p)
        if backend is None:
            psi = evolve_ansatz_vec(ansatz, ham)
            energy = float(np.real(np.vdot(psi, ham.diagonal * psi)))
        else:
            energy = backend.energy(ansatz)
        alphas.append((total / 4.0 - energy) / record.v_max)
    return alphas


def noisy_growth(inst: MaxCutInstance, config: AdaptConfig, p_gate: float) -> RunRecord:
    """Grow with selection, skip test, and optimization on noisy states.

    Much costlier than replaying a noiseless record; intended as the
    cross-check for the replay shortcut on small n.
    """
    if inst.n > NOISY_GROWTH_MAX_QUBITS:
        raise ResourceLimitError(
            f"noisy growth capped at {NOISY_GROWTH_MAX_QUBITS} qubits, got {inst.n}"
        )
    return run_adapt(inst, config, p_gate=p_gate)


# ── convergence curves ────────────────────────────────────────────────────


@dataclass
class NoiseCurve:
    """Mean approximation ratio versus circuit size at one error rate."""

    p_gate: float
    points: list[tuple[float, float, float]]  # (cnots, mean alpha, stderr)
    alpha_star: float
    cnot_at_star: float
    n_records: int

    def __post_init__(self):
        xs = [p[0] for p in self.points]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise InvalidParameterError("curve points must be ordered by CNOT count")


def build_noise_curve(records, p_gate: float, jobs: int = 1) -> NoiseCurve:
    """Average the per-record replay ratios at each growth step."""
    records = list(records)
    if not records:
        raise InvalidParameterError("need at least one record")
    alpha_rows = _map_jobs(lambda r: replay_with_noise(r, None, p_gate), records, jobs)
    depth = min(len(row) for row in alpha_rows)
    points = []
    for k in range(depth):
        mean, err = _mean_stderr([row[k] for row in alpha_rows])
        cnots = float(np.mean([rec.iterations[k].cnots for rec in records]))
        points.append((cnots, mean, err))
    best = max(range(depth), key=lambda k: points[k][1])
    return NoiseCurve(
        p_gate=p_gate,
        points=points,
        alpha_star=points[best][1],
        cnot_at_star=points[best][0],
        n_records=len(records),
    )


# ── crossover against the rounding baseline ───────────────────────────────


@dataclass
class CriticalErrorResult:
    """Error rate where the mean quantum ratio crosses the rounding baseline."""

    n: int
    algorithm: str
    p_star: float
    stderr: float
    alpha_gw_mean: float
    at_boundary: bool = False
    grid: list[float] = field(default_factory=list)
    star_alphas: list[float] = field(default_factory=list)


def _interp_crossing(log_ps, diffs) -> tuple[float, bool]:
    """Root of the piecewise-linear interpolant of diff over log p.

    diff starts positive (quantum above baseline) and the first sign
    change is bisected; no change returns the matching boundary, flagged.
    """
    sign0 = diffs[0] > 0.0
    bracket = None
    for k in range(len(diffs) - 1):
        if (diffs[k] > 0.0) != (diffs[k + 1] > 0.0):
            bracket = k
            break
    if bracket is None:
        edge = len(log_ps) - 1 if sign0 else 0
        return float(math.exp(log_ps[edge])), True
    lo, hi = log_ps[bracket], log_ps[bracket + 1]
    flo, fhi = diffs[bracket], diffs[bracket + 1]

    def lin(x):
        t = (x - lo) / (hi - lo)
        return flo + t * (fhi - flo)

    while (hi - lo) > math.log(1.05):  # 5% relative tolerance on p
        mid = 0.5 * (lo + hi)
        if (lin(mid) > 0.0) == (flo > 0.0):
            lo, flo = mid, lin(mid)
        else:
            hi, fhi = mid, lin(mid)
    return float(math.exp(0.5 * (lo + hi))), False


def critical_error_probability(
    instances,
    config: AdaptConfig,
    p_grid=None,
    records=None,
    gw_rounds: int = DEFAULT_ROUNDS,
    gw_seed: int = 0,
    jobs: int = 1,
) -> CriticalErrorResult:
    """Find the error rate where mean alpha* drops to the rounding mean.

    Uses noiseless records (grown here unless supplied), replays them on
    the grid, takes each record's best ratio along its own growth curve,
    and compares the instance mean of those bests against the mean
    rounded-cut ratio of the same instances.  Standard error by
    leave-one-instance-out jackknife over the interpolated crossing.
    """
    instances = list(instances)
    if len(instances) < 2:
        raise InvalidParameterError("need at least two instances")
    grid = sorted(p_grid) if p_grid is not None else list(DEFAULT_NOISE_GRID)
    if any(p <= 0.0 for p in grid):
        raise InvalidParameterError("crossover grid must be strictly positive")
    if records is None:
        records = _map_jobs(lambda inst: run_adapt(inst, config), instances, jobs)
    records = list(records)

    def gw_alpha(pair):
        idx, inst = pair
        # key GW randomness on the instance itself, not its list position,
        # so results are invariant under batch reordering
        key = inst.seed if inst.seed is not None else idx
        emb = solve_relaxation(inst, seed=derive_seed(gw_seed, key))
        rounded = hyperplane_round(
            inst, emb, rounds=gw_rounds, seed=derive_seed(gw_seed, key, 1)
        )
        v_max = records[idx].v_max
        return rounded.mean_value / v_max

    gw_alphas = np.array(_map_jobs(gw_alpha, list(enumerate(instances)), jobs))

    # per (record, grid point): that record's best ratio over its prefixes
    stars = {}
    for p in grid:
        rows = _map_jobs(lambda r: replay_with_noise(r, None, p), records, jobs)
        stars[p] = np.array([max(row) for row in rows])
    m = len(records)

    def star_curve(keep) -> list[float]:
        return [float(stars[p][keep].mean()) for p in grid]

    log_ps = [math.log(p) for p in grid]
    full_stars = star_curve(np.arange(m))
    gw_mean = float(gw_alphas.mean())
    p_star, flagged = _interp_crossing(log_ps, [a - gw_mean for a in full_stars])

    loo = []
    for leave in range(m):
        keep = np.array([i for i in range(m) if i != leave])
        curve = star_curve(keep)
        ref = float(gw_alphas[keep].mean())
        p_i, _ = _interp_crossing(log_ps, [a - ref for a in curve])
        loo.append(p_i)
    loo = np.array(loo)
    stderr = float(math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2)))

    return CriticalErrorResult(
        n=records[0].n,
        algorithm=config.variant,
        p_star=p_star,
        stderr=stderr,
        alpha_gw_mean=gw_mean,
        at_boundary=flagged,
        grid=[float(p) for p in grid],
        star_alphas=full_stars,
    )


# ── parameter histogram ───────────────────────────────────────────────────


@dataclass
class GammaHistogram:
    """Distribution of final optimized cost angles, wrapped to [-pi, pi)."""

    bin_edges: np.ndarray
    counts: np.ndarray
    near_zero_fraction: float
    n_values: int


def gamma_histogram(records, bin_width: float = 0.05, near_zero: float = 0.05) -> GammaHistogram:
    """Pool every cost-layer angle from each record's final parameters."""
    values = []
    for rec in records:
        if rec.iterations:
            values.extend(rec.iterations[-1].gammas)
    edges = np.arange(-math.pi, math.pi + bin_width, bin_width)
    if not values:
        return GammaHistogram(edges, np.zeros(len(edges) - 1, dtype=int), 0.0, 0)
    wrapped = np.mod(np.asarray(values) + math.pi, 2.0 * math.pi) - math.pi
    counts, _ = np.histogram(wrapped, bins=edges)
    frac = float(np.mean(np.abs(wrapped) < near_zero))
    return GammaHistogram(edges, counts, frac, len(values))


# ── zero-noise extrapolation ──────────────────────────────────────────────


def richardson_mitigate(alpha_p: float, alpha_cp: float, c: float) -> float:
    """Two-point linear extrapolation to zero noise from rates p and c*p."""
    if c <= 1.0:
        raise InvalidParameterError(f"scale factor must exceed 1, got {c}")
    return alpha_p + (alpha_p - alpha_cp) / (c - 1.0)


def mitigated_curve(curve_p: NoiseCurve, curve_cp: NoiseCurve, c: float) -> NoiseCurve:
    """Pointwise Richardson extrapolation of two curves at rates p and c*p."""
    depth = min(len(curve_p.points), len(curve_cp.points))
    points = []
    for k in range(depth):
        x, a1, s1 = curve_p.points[k]
        _, a2, s2 = curve_cp.points[k]
        a = richardson_mitigate(a1, a2, c)
        # linear error propagation through the extrapolation weights
        s = math.sqrt((c / (c - 1.0)) ** 2 * s1**2 + (1.0 / (c - 1.0)) ** 2 * s2**2)
        points.append((x, a, s))
    best = max(range(depth), key=lambda k: points[k][1])
    return NoiseCurve(
        p_gate=0.0,
        points=points,
        alpha_star=points[best][1],
        cnot_at_star=points[best][0],
        n_records=curve_p.n_records,
    )


# ── variant comparison ────────────────────────────────────────────────────

DYNAMIC_VARIANTS = ("dynamic", "dynamic-nocost", "dynamic-noreselect")


def variant_comparison(
    instances, config: AdaptConfig, jobs: int = 1
) -> dict[str, list[float]]:
    """Mean residual 1 - alpha after each iteration, per dynamic variant."""
    instances = list(instances)
    table = {}
    for variant in DYNAMIC_VARIANTS:
        cfg = dataclasses.replace(config, variant=variant)
        records = _map_jobs(lambda inst: run_adapt(inst, cfg), instances, jobs)
        depth = min(len(r.iterations) for r in records)
        table[variant] = [
            float(np.mean([1.0 - r.alpha(p) for r in records]))
            for p in range(1, depth + 1)
        ]
    return table


# ── CSV output ────────────────────────────────────────────────────────────


def _csv_header(config) -> str:
    doc = "" if config is None else json.dumps(config, sort_keys=True)
    return f"# version: {__version__}\n# config: {doc}\n"


def write_convergence_csv(path, curves, config=None) -> None:
    lines = [_csv_header(config), "p_gate,cnot_count,mean_alpha,stderr\n"]
    for curve in curves:
        for cnots, alpha, err in curve.points:
            lines.append(
                f"{curve.p_gate:.12g},{cnots:.12g},{alpha:.12g},{err:.12g}\n"
            )
    with open(path, "w") as fh:
        fh.writelines(lines)


def write_critical_csv(path, results, config=None) -> None:
    lines = [_csv_header(config), "n,algorithm,p_star,stderr\n"]
    for res in results:
        lines.append(f"{res.n},{res.algorithm},{res.p_star:.12g},{res.stderr:.12g}\n")
    with open(path, "w") as fh:
        fh.writelines(lines)


def write_histogram_csv(path, hist: GammaHistogram, config=None) -> None:
    lines = [_csv_header(config), "bin_left,count\n"]
    for left, count in zip(hist.bin_edges[:-1], hist.counts):
        lines.append(f"{left:.12g},{int(count)}\n")
    with open(path, "w") as fh:
        fh.writelines(lines)


def write_variant_csv(path, table: dict, config=None) -> None:
    lines = [_csv_header(config), "P,variant,mean_one_minus_alpha\n"]
    for variant in sorted(table):
        for p, value in enumerate(table[variant], start=1):
            lines.append(f"{p},{variant},{value:.12g}\n")
    with open(path, "w") as fh:
        fh.writelines(lines)
