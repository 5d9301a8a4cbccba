"""Maximal-leakage engine.

The leakage of an ensemble {p(x), rho^x} is the best multiplicative guessing
advantage over all measurements,

    log2( sup_POVM  sum_y  max_x  tr(rho^x F_y) ),

optimized here by projected subgradient ascent with random restarts. The
value never depends on the prior, is zero exactly for indistinguishable
ensembles, and is capped by min(log2 |X|, 2 log2 d). Allowing an adversary
several verified guesses instead of one does not change the quantity, so no
separate multi-guess computation exists.

Closed-form companions: the exact two-state value log2(1 + T), a brute-force
qubit search, the global depolarizing transfer formula and the per-qubit
noise upper bound, plus a batch verifier that turns all of the structural
properties into executable checks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .exceptions import (
    DimensionMismatchError,
    InvalidProbabilityError,
    NumericalFailureError,
    UnsupportedDimensionError,
)
from .states import (
    DensityOperator,
    Ensemble,
    Povm,
    KrausChannel,
    born_distribution,
    depolarizing_global,
    depolarizing_local,
    random_kraus_channel,
    random_povm,
)

# Step-size floor for backtracking and the per-step slack within which a
# step still counts as non-decreasing.
MU_MIN = 1e-6
BACKTRACK_SLACK = 1e-13


@dataclass(frozen=True)
class AscentConfig:
    """Knobs of the subgradient ascent.

    povm_size defaults to dim^2 (the size that always suffices for the
    optimum) when left as None; it must be at least the dimension for the
    random initialization to produce a full-rank normalizer.
    """

    mu: float = 0.1
    eps: float = 1e-9
    max_iters: int = 10000
    restarts: int = 10
    seed: int = 0
    povm_size: int | None = None
    backtracking: bool = True
    regularization: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.mu <= 10.0:
            raise ValueError(f"step size {self.mu!r} outside (0, 10]")
        if self.eps <= 0.0:
            raise ValueError("termination threshold must be positive")
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be >= 1")
        if self.regularization <= 0.0:
            raise ValueError("regularization must be positive")
        if self.povm_size is not None and self.povm_size < 1:
            raise ValueError("povm_size must be positive")

    def resolved_povm_size(self, dim: int) -> int:
        size = self.povm_size if self.povm_size is not None else dim * dim
        if size < dim:
            raise ValueError(f"povm_size {size} < dimension {dim}")
        return size


@dataclass
class ConvergenceTrace:
    """Per-iteration history of one restart."""

    iterations: list[int] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    leakage_bits: list[float] = field(default_factory=list)
    step_sizes: list[float] = field(default_factory=list)
    converged: bool = False

    def append(self, iteration: int, objective: float, bits: float, step: float):
        self.iterations.append(iteration)
        self.objectives.append(objective)
        self.leakage_bits.append(bits)
        self.step_sizes.append(step)

    @property
    def final_leakage(self) -> float:
        return self.leakage_bits[-1]

    def rows(self):
        """(iteration, objective, leakage_bits, step_size) tuples."""
        return list(zip(self.iterations, self.objectives,
                        self.leakage_bits, self.step_sizes))


@dataclass
class LeakageReport:
    """Outcome of a multi-restart leakage computation."""

    leakage_bits: float
    optimal_povm: Povm
    best_restart: int
    traces: list[ConvergenceTrace]
    restart_leakages: list[float]
    ceiling_bits: float

    @property
    def converged_flags(self) -> list[bool]:
        return [t.converged for t in self.traces]

    @property
    def all_converged(self) -> bool:
        return all(self.converged_flags)


def _flatten_states(states: np.ndarray) -> np.ndarray:
    """Row-vectorized transposes of the states, so that conditional traces
    become one matrix product: tr(rho F) = vec(rho^T) . vec(F)."""
    n, dim, _ = states.shape
    return states.transpose(0, 2, 1).reshape(n, dim * dim)


def _traces_from_flat(states_flat: np.ndarray, elements: np.ndarray) -> np.ndarray:
    m = elements.shape[0]
    return (states_flat @ elements.reshape(m, -1).T).real


def _conditional_traces(states: np.ndarray, elements: np.ndarray) -> np.ndarray:
    """Re tr(rho^x F_y) for all pairs, shape (|X|, m)."""
    return _traces_from_flat(_flatten_states(states), elements)


def _stack_objective(traces: np.ndarray) -> float:
    return float(traces.max(axis=0).sum())


def _bits(objective: float) -> float:
    # The objective is >= 1 for any valid POVM; values a hair below 1 are
    # roundoff and would otherwise produce spuriously negative leakage.
    return math.log2(max(objective, 1.0))


def leakage_objective(ensemble: Ensemble, povm: Povm):
    """Evaluate the leakage objective for one fixed measurement.

    Returns
    -------
    (objective, leakage_bits, argmax_map)
        objective is sum_y max_x Re tr(rho^x F_y); leakage_bits its log2;
        argmax_map lists, per outcome, the symbol attaining the inner max
        (ties resolved to the earliest symbol).
    """
    if ensemble.dim != povm.dim:
        raise DimensionMismatchError(
            f"ensemble dim {ensemble.dim} != POVM dim {povm.dim}"
        )
    traces = _conditional_traces(ensemble.state_stack(), povm.element_stack())
    objective = _stack_objective(traces)
    if objective < 1.0 - 1e-8 or objective > ensemble.size + 1e-8:
        raise NumericalFailureError(
            f"objective {objective!r} outside [1, |X|] beyond tolerance"
        )
    winners = [ensemble.symbols[i] for i in traces.argmax(axis=0)]
    return objective, _bits(objective), winners


def _ascent_step_stack(states: np.ndarray, elements: np.ndarray,
                       mu: float, tau: float,
                       traces: np.ndarray | None = None) -> np.ndarray:
    """One subgradient ascent step on a raw (m, d, d) element stack."""
    dim = states.shape[1]
    if traces is None:
        traces = _conditional_traces(states, elements)
    picked = states[traces.argmax(axis=0)]                    # rho^{x*(y)}
    drift = (picked @ elements).sum(axis=0)                   # sum_z rho^{x*(z)} F_z
    growth = np.eye(dim) + mu * (picked - drift)
    tilted = growth.conj().transpose(0, 2, 1) @ elements @ growth
    normalizer = tilted.sum(axis=0)
    whitener = linalg.inv_sqrt_psd(
        normalizer, tau * float(normalizer.trace().real) / dim
    )
    renewed = whitener @ tilted @ whitener
    renewed = (renewed + renewed.conj().transpose(0, 2, 1)) / 2
    # Regularized whitening leaves a tiny completeness residual; spread it
    # evenly, then clear any resulting negative eigenvalue noise.
    residual = np.eye(dim) - renewed.sum(axis=0)
    renewed += residual / len(renewed)
    vals, vecs = np.linalg.eigh(renewed)
    if vals.min() < 0.0:
        vals = np.clip(vals, 0.0, None)
        renewed = (vecs * vals[:, None, :]) @ vecs.conj().transpose(0, 2, 1)
    return renewed


def ascent_step(ensemble: Ensemble, povm: Povm, mu: float,
                tau: float = 1e-12) -> Povm:
    """One step of the measurement update.

    Tilts each element toward the state currently winning its outcome,
    then renormalizes the set back onto the POVM manifold:

        F_y  <-  S^(-1/2) G_y^dag F_y G_y S^(-1/2),
        G_y = I + mu (rho^{x*(y)} - sum_z rho^{x*(z)} F_z),  S = sum_y (...).
    """
    if ensemble.dim != povm.dim:
        raise DimensionMismatchError(
            f"ensemble dim {ensemble.dim} != POVM dim {povm.dim}"
        )
    if mu <= 0.0:
        raise ValueError("step size must be positive")
    stack = _ascent_step_stack(
        ensemble.state_stack(), povm.element_stack(), mu, tau
    )
    return Povm(list(stack))


def _run_restart(states: np.ndarray, dim: int, cfg: AscentConfig,
                 povm_size: int, restart_seed: int):
    """Ascend from one random initialization; returns (trace, final stack)."""
    elements = random_povm(dim, povm_size, restart_seed).element_stack()
    states_flat = _flatten_states(states)
    traces_xy = _traces_from_flat(states_flat, elements)
    objective = _stack_objective(traces_xy)
    trace = ConvergenceTrace()
    trace.append(0, objective, _bits(objective), 0.0)
    for iteration in range(1, cfg.max_iters + 1):
        mu_trial = cfg.mu
        while True:
            candidate = _ascent_step_stack(states, elements, mu_trial,
                                           cfg.regularization, traces=traces_xy)
            cand_traces = _traces_from_flat(states_flat, candidate)
            cand_objective = _stack_objective(cand_traces)
            if not cfg.backtracking or cand_objective >= objective - BACKTRACK_SLACK:
                break
            if mu_trial <= MU_MIN:
                # No step size improves: hold position, which both keeps the
                # trace monotone and triggers termination below.
                candidate, cand_traces, cand_objective = elements, traces_xy, objective
                break
            mu_trial = max(mu_trial / 2.0, MU_MIN)
        change = abs(cand_objective - objective)
        elements, traces_xy, objective = candidate, cand_traces, cand_objective
        trace.append(iteration, objective, _bits(objective), mu_trial)
        if change < cfg.eps:
            trace.converged = True
            break
    return trace, elements


def compute_leakage(ensemble: Ensemble, cfg: AscentConfig | None = None,
                    threads: int = 1) -> LeakageReport:
    """Maximal leakage of an ensemble by subgradient ascent with restarts.

    Each restart draws its own random POVM from a seed derived as
    cfg.seed + restart index, ascends until the objective improves by less
    than cfg.eps (with step-halving backtracking keeping the trace
    non-decreasing), and the best final value wins. Hitting max_iters is
    not an error; the restart is just flagged unconverged.

    The prior never enters the objective, so reports are bit-identical
    under reweighted priors for the same seed.
    """
    cfg = cfg or AscentConfig()
    dim = ensemble.dim
    povm_size = cfg.resolved_povm_size(dim)
    states = ensemble.state_stack()

    def run(index: int):
        return _run_restart(states, dim, cfg, povm_size, cfg.seed + index)

    if threads > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(cfg.restarts)))
    else:
        results = [run(i) for i in range(cfg.restarts)]

    traces = [trace for trace, _ in results]
    finals = [trace.final_leakage for trace in traces]
    best = int(np.argmax(finals))
    ceiling = min(math.log2(ensemble.size), 2.0 * math.log2(dim))
    leakage = finals[best]
    if leakage > ceiling + 1e-6:
        raise NumericalFailureError(
            f"leakage {leakage!r} exceeds ceiling {ceiling!r}"
        )
    return LeakageReport(
        leakage_bits=leakage,
        optimal_povm=Povm(list(results[best][1])),
        best_restart=best,
        traces=traces,
        restart_leakages=finals,
        ceiling_bits=ceiling,
    )


def two_state_leakage(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """Exact leakage of a two-symbol ensemble: log2(1 + T(rho0, rho1)).

    The optimal measurement projects onto the positive eigenspace of
    rho0 - rho1, which turns the objective into 1 + trace distance.
    """
    if rho0.dim != rho1.dim:
        raise DimensionMismatchError(f"dims {rho0.dim} vs {rho1.dim}")
    return math.log2(1.0 + linalg.trace_distance(rho0.matrix, rho1.matrix))


def _sample_rank_one_objectives(states: np.ndarray, n_outcomes: int,
                                n_samples: int, rng: np.random.Generator) -> float:
    """Best objective over random rank-one POVMs of a given size (qubits)."""
    g = (rng.standard_normal((n_samples, n_outcomes, 2))
         + 1j * rng.standard_normal((n_samples, n_outcomes, 2))) / np.sqrt(2.0)
    s = np.einsum("nyi,nyj->nij", g, g.conj())
    tr = s[:, 0, 0].real + s[:, 1, 1].real
    det = (s[:, 0, 0] * s[:, 1, 1] - s[:, 0, 1] * s[:, 1, 0]).real
    root = np.sqrt(np.maximum(det, 0.0))
    denom = root * np.sqrt(tr + 2.0 * root)
    ok = denom > 1e-12
    # closed-form 2x2 inverse square root: (adj(S) + sqrt(det) I) / denom
    w = np.empty_like(s)
    w[:, 0, 0] = s[:, 1, 1] + root
    w[:, 1, 1] = s[:, 0, 0] + root
    w[:, 0, 1] = -s[:, 0, 1]
    w[:, 1, 0] = -s[:, 1, 0]
    w[ok] /= denom[ok, None, None]
    h = np.einsum("nij,nyj->nyi", w, g)
    vals = np.einsum("nyi,xij,nyj->nxy", h.conj(), states, h).real
    objectives = vals.max(axis=1).sum(axis=1)
    objectives[~ok] = -np.inf
    return float(objectives.max())


def brute_force_leakage(ensemble: Ensemble, grid_resolution: int,
                        samples: int = 100_000, seed: int = 0) -> float:
    """Exhaustive qubit search over rank-one POVMs; a certified lower bound.

    Binary projective measurements are swept over a full Bloch-sphere
    (theta, phi) grid of grid_resolution x 2*grid_resolution directions
    (poles included); three- and four-outcome rank-one POVMs are sampled
    at random, ``samples`` draws each, from the given seed.
    """
    if ensemble.dim != 2:
        raise UnsupportedDimensionError("brute force search is qubit-only")
    if grid_resolution < 16:
        raise ValueError("grid_resolution must be at least 16")
    states = ensemble.state_stack()

    theta = np.linspace(0.0, np.pi, grid_resolution)
    phi = np.linspace(0.0, 2.0 * np.pi, 2 * grid_resolution, endpoint=False)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    u = np.stack(
        [np.cos(tt / 2).ravel() + 0j,
         np.sin(tt / 2).ravel() * np.exp(1j * pp.ravel())],
        axis=1,
    )
    up = np.einsum("si,xij,sj->xs", u.conj(), states, u).real  # tr(rho^x uu^dag)
    best = float((up.max(axis=0) + 1.0 - up.min(axis=0)).max())

    rng = np.random.default_rng(seed)
    for n_outcomes in (3, 4):
        best = max(best, _sample_rank_one_objectives(states, n_outcomes, samples, rng))
    return _bits(best)


def mutual_information(ensemble: Ensemble, povm: Povm) -> float:
    """Classical I(X;Y) in bits between the secret and the outcome of one
    fixed measurement, under the ensemble's prior."""
    probs = born_distribution(ensemble, povm)
    joint = ensemble.priors[:, None] * probs
    p_y = joint.sum(axis=0)
    mask = joint > 0.0
    ratio = np.ones_like(joint)
    denom = ensemble.priors[:, None] * p_y[None, :]
    ratio[mask] = joint[mask] / denom[mask]
    value = float(np.sum(joint[mask] * np.log2(ratio[mask])))
    cap = math.log2(ensemble.size)
    if value > cap + 1e-9:
        raise NumericalFailureError(f"mutual information {value!r} above log2|X|")
    return max(value, 0.0)


def noisy_leakage_global(q_bits: float, p: float) -> float:
    """Leakage after global depolarizing noise: log2(p + (1-p) 2^q).

    Exact, and strictly decreasing in p whenever q > 0.
    """
    if q_bits < 0.0:
        raise ValueError("leakage must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise InvalidProbabilityError(f"probability {p!r} outside [0, 1]")
    if p == 0.0:
        return float(q_bits)
    if p == 1.0:
        return 0.0
    return math.log2(p + (1.0 - p) * 2.0 ** q_bits)


def noisy_leakage_local_bound(q_bits: float, p: float, qubits: int) -> float:
    """Upper bound on leakage after per-qubit depolarizing noise on k
    qubits: log2(p^k + (1-p^k) 2^q). Coincides with the exact global
    formula at k = 1."""
    if qubits < 1:
        raise ValueError("qubit count must be >= 1")
    if q_bits < 0.0:
        raise ValueError("leakage must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise InvalidProbabilityError(f"probability {p!r} outside [0, 1]")
    if p == 0.0:
        return float(q_bits)
    pk = p ** qubits
    return math.log2(pk + (1.0 - pk) * 2.0 ** q_bits)


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    detail: str
    skipped: bool = False


@dataclass
class PropertyReport:
    checks: list[PropertyCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "skipped": c.skipped,
                 "detail": c.detail}
                for c in self.checks
            ],
        }


ALL_PROPERTY_CHECKS = (
    "nonnegativity",
    "ceiling",
    "independence_iff_zero",
    "povm_dominance",
    "data_processing",
    "global_noise_exactness",
    "local_noise_bound",
)


def verify_properties(ensemble: Ensemble, cfg: AscentConfig | None = None,
                      channel: KrausChannel | None = None,
                      checks: tuple[str, ...] = ALL_PROPERTY_CHECKS,
                      noise_grid: tuple[float, ...] = (0.0, 0.3, 0.7, 1.0),
                      dominance_probes: int = 100,
                      threads: int = 1,
                      probe_povm: Povm | None = None) -> PropertyReport:
    """Run the structural-property suite against one ensemble.

    Checks, by name: "nonnegativity" and "ceiling" of the optimized
    leakage; "independence_iff_zero" (zero leakage exactly for
    indistinguishable ensembles); "povm_dominance" (I(X;Y) never exceeds
    the per-measurement objective in bits, probed on the optimizer's POVM
    plus random ones); "data_processing" (a channel cannot increase
    leakage; a seeded random channel is drawn when none is supplied);
    "global_noise_exactness" (optimized leakage of the globally
    depolarized ensemble matches the closed-form transfer on noise_grid);
    "local_noise_bound" (per-qubit noise respects its upper bound;
    skipped when the dimension is not a power of two).

    probe_povm, when given, replaces the optimizer's POVM in the
    dominance check (test hook for failure-path coverage).
    """
    cfg = cfg or AscentConfig()
    unknown = set(checks) - set(ALL_PROPERTY_CHECKS)
    if unknown:
        raise ValueError(f"unknown property checks: {sorted(unknown)}")
    results: list[PropertyCheck] = []
    baseline = compute_leakage(ensemble, cfg, threads=threads)
    q0 = baseline.leakage_bits

    if "nonnegativity" in checks:
        results.append(PropertyCheck(
            "nonnegativity", q0 >= -1e-9, f"leakage_bits={q0:.9f}"))

    if "ceiling" in checks:
        results.append(PropertyCheck(
            "ceiling", q0 <= baseline.ceiling_bits + 1e-6,
            f"leakage_bits={q0:.9f} <= ceiling {baseline.ceiling_bits:.9f}"))

    if "independence_iff_zero" in checks:
        flat = ensemble.is_indistinguishable(1e-9)
        zero = q0 < 1e-6
        results.append(PropertyCheck(
            "independence_iff_zero", flat == zero,
            f"indistinguishable={flat}, leakage_bits={q0:.3e}"))

    if "povm_dominance" in checks:
        probes = [probe_povm or baseline.optimal_povm]
        size = cfg.resolved_povm_size(ensemble.dim)
        probes += [random_povm(ensemble.dim, size, cfg.seed + 1000 + i)
                   for i in range(dominance_probes)]
        worst = -np.inf
        for povm in probes:
            gap = mutual_information(ensemble, povm) - \
                leakage_objective(ensemble, povm)[1]
            worst = max(worst, gap)
        results.append(PropertyCheck(
            "povm_dominance", worst <= 1e-9,
            f"max I(X;Y) - log2(objective) = {worst:.3e} over {len(probes)} POVMs"))

    if "data_processing" in checks:
        chan = channel or random_kraus_channel(ensemble.dim, ensemble.dim,
                                               cfg.seed + 104729)
        q_after = compute_leakage(ensemble.transform(chan), cfg,
                                  threads=threads).leakage_bits
        results.append(PropertyCheck(
            "data_processing", q_after <= q0 + 1e-3,
            f"after={q_after:.6f} <= before={q0:.6f} + 1e-3"))

    if "global_noise_exactness" in checks:
        worst = 0.0
        for p in noise_grid:
            mapped = ensemble.transform(depolarizing_global(p, ensemble.dim))
            direct = compute_leakage(mapped, cfg, threads=threads).leakage_bits
            worst = max(worst, abs(direct - noisy_leakage_global(q0, p)))
        results.append(PropertyCheck(
            "global_noise_exactness", worst <= 2e-3,
            f"max |direct - formula| = {worst:.3e} over p grid {noise_grid}"))

    if "local_noise_bound" in checks:
        k = int(round(math.log2(ensemble.dim)))
        if 2 ** k != ensemble.dim:
            results.append(PropertyCheck(
                "local_noise_bound", True,
                f"skipped: dim {ensemble.dim} is not a power of two", skipped=True))
        else:
            worst = -np.inf
            for p in noise_grid:
                mapped = ensemble.transform(depolarizing_local(p, k))
                direct = compute_leakage(mapped, cfg, threads=threads).leakage_bits
                worst = max(worst, direct - noisy_leakage_local_bound(q0, p, k))
            results.append(PropertyCheck(
                "local_noise_bound", worst <= 1e-3,
                f"max direct - bound = {worst:.3e} over p grid {noise_grid}"))

    return PropertyReport(results)
