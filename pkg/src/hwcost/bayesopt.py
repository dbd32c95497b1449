"""Gaussian-process sequential search with budget-gated acquisition.

The loop is the classic three-step one: maximize an acquisition function
over sampled candidates, evaluate the black-box objective there, update the
GP posterior. With constraint models attached, the acquisition is expected
improvement hard-gated to zero wherever the predicted power or memory
budget is violated, so the search never spends evaluations on predicted-
infeasible configurations (minimization orientation throughout).
"""

from __future__ import annotations

import csv
import io
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .linmod import LinearModel, predict as lin_predict
from .seeding import generator

SQRT5 = math.sqrt(5.0)

# log-spaced hyper-parameter grids, searched coordinate-wise by marginal
# likelihood after every update (inputs are unit-box normalized, targets
# standardized, so fixed grids cover the useful regimes)
LENGTHSCALE_GRID = tuple(0.05 * 2.0 ** i for i in range(7))        # 0.05 .. 3.2
SIGNAL_VAR_GRID = tuple(0.125 * 2.0 ** i for i in range(7))        # 0.125 .. 8
NOISE_VAR_GRID = tuple(1e-8 * 10.0 ** i for i in range(7))         # 1e-8 .. 1e-2
DEFAULT_CANDIDATES = 512

_TAG_SAMPLER = 0xCA9D


class NumericalError(RuntimeError):
    """Covariance factorization failed even with the reported jitter."""


@dataclass(frozen=True)
class Dimension:
    name: str
    kind: str  # "integer" | "continuous"
    lo: float
    hi: float

    def __post_init__(self):
        if self.kind not in ("integer", "continuous"):
            raise ValueError(f"dimension kind must be integer|continuous, got {self.kind!r}")
        if not self.lo < self.hi:
            raise ValueError(f"dimension {self.name}: lo must be < hi")


@dataclass(frozen=True)
class SearchSpace:
    dimensions: tuple[Dimension, ...]
    structural_subset: tuple[str, ...] = ()

    def __post_init__(self):
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate dimension names")
        missing = [n for n in self.structural_subset if n not in names]
        if missing:
            raise ValueError(f"structural subset names not in space: {missing}")

    @property
    def dim(self) -> int:
        return len(self.dimensions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    def structural_indices(self) -> tuple[int, ...]:
        index = {d.name: i for i, d in enumerate(self.dimensions)}
        return tuple(index[n] for n in self.structural_subset)

    def normalize(self, X: np.ndarray) -> np.ndarray:
        lo = np.array([d.lo for d in self.dimensions])
        hi = np.array([d.hi for d in self.dimensions])
        return (np.atleast_2d(X) - lo) / (hi - lo)

    def contains(self, x) -> bool:
        return all(d.lo <= v <= d.hi for d, v in zip(self.dimensions, x))


@dataclass(frozen=True)
class Observation:
    x: tuple[float, ...]
    y: float


@dataclass(frozen=True)
class ConstraintSpec:
    """Budgets plus the linear models that predict consumption from z."""

    power_budget: float
    memory_budget: float
    power_model: LinearModel
    memory_model: LinearModel

    def __post_init__(self):
        if self.power_budget <= 0 or self.memory_budget <= 0:
            raise ValueError("budgets must be > 0")

    def predict(self, z) -> tuple[float, float]:
        return lin_predict(self.power_model, z), lin_predict(self.memory_model, z)

    def satisfied(self, z) -> bool:
        power, memory = self.predict(z)
        return power <= self.power_budget and memory <= self.memory_budget


def _matern52(Xa: np.ndarray, Xb: np.ndarray, lengthscales: np.ndarray,
              signal_var: float) -> np.ndarray:
    diff = (Xa[:, None, :] - Xb[None, :, :]) / lengthscales
    r = np.sqrt(np.maximum(np.sum(diff * diff, axis=2), 0.0))
    sr = SQRT5 * r
    return signal_var * (1.0 + sr + sr * sr / 3.0) * np.exp(-sr)


class GPState:
    """Immutable GP regression state over a SearchSpace.

    Inputs live in the unit box; with auto_hypers the targets are
    standardized internally and kernel hyper-parameters are re-selected by
    grid-restricted marginal-likelihood ascent on every update. Fixed-hyper
    states (auto_hypers=False) take lengthscales/variances in raw units and
    keep them across updates.
    """

    def __init__(self, space: SearchSpace, observations=(),
                 lengthscales=None, signal_var: float = 1.0, noise_var: float = 0.0,
                 prior_mean: float = 0.0, auto_hypers: bool = False):
        self.space = space
        self.observations = tuple(observations)
        for obs in self.observations:
            if len(obs.x) != space.dim:
                raise ValueError("observation arity does not match space")
            if not space.contains(obs.x):
                raise ValueError(f"observation {obs.x} outside the search space")
        self.auto_hypers = auto_hypers

        n = len(self.observations)
        self._xn = (space.normalize(np.array([obs.x for obs in self.observations], dtype=float))
                    if n else np.zeros((0, space.dim)))
        y = np.array([obs.y for obs in self.observations], dtype=float)

        if auto_hypers and n:
            self.prior_mean = float(y.mean())
            scale = float(y.std())
            self.y_scale = scale if scale > 0 else 1.0
        else:
            self.prior_mean = prior_mean
            self.y_scale = 1.0
        self._ys = (y - self.prior_mean) / self.y_scale

        if auto_hypers and n:
            self.lengthscales, self.signal_var, self.noise_var = _select_hypers(self._xn, self._ys)
        else:
            if lengthscales is None:
                lengthscales = (0.4,) * space.dim
            self.lengthscales = tuple(float(v) for v in lengthscales)
            if len(self.lengthscales) != space.dim or any(v <= 0 for v in self.lengthscales):
                raise ValueError("need one positive lengthscale per dimension")
            if signal_var <= 0 or noise_var < 0:
                raise ValueError("signal_var must be > 0 and noise_var >= 0")
            self.signal_var = signal_var
            self.noise_var = noise_var

        self._chol, self.jitter = _factorize(self._xn, np.asarray(self.lengthscales),
                                             self.signal_var, self.noise_var)
        self._alpha = _chol_solve(self._chol, self._ys) if n else np.zeros(0)

    @classmethod
    def fit(cls, space: SearchSpace, observations) -> "GPState":
        """State with hyper-parameters selected from the data."""
        return cls(space, observations, auto_hypers=True)


def _factorize(Xn: np.ndarray, lengthscales: np.ndarray, signal_var: float,
               noise_var: float) -> tuple[np.ndarray | None, float]:
    n = Xn.shape[0]
    if n == 0:
        return None, 0.0
    K = _matern52(Xn, Xn, lengthscales, signal_var)
    jitter = 0.0
    if noise_var == 0.0 and _has_duplicates(Xn):
        jitter = 1e-8 * signal_var
        warnings.warn(f"duplicate observation locations with zero noise; "
                      f"adding jitter {jitter:g}", stacklevel=3)
    for _ in range(6):
        try:
            L = np.linalg.cholesky(K + (noise_var + jitter) * np.eye(n))
            return L, jitter
        except np.linalg.LinAlgError:
            jitter = 1e-10 * signal_var if jitter == 0.0 else jitter * 100.0
    raise NumericalError(f"covariance not positive definite at jitter {jitter:g}")


def _has_duplicates(Xn: np.ndarray) -> bool:
    n = Xn.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if np.array_equal(Xn[i], Xn[j]):
                return True
    return False


def _chol_solve(L: np.ndarray | None, b: np.ndarray) -> np.ndarray:
    if L is None:
        return np.zeros(0)
    return np.linalg.solve(L.T, np.linalg.solve(L, b))


def _log_marginal_likelihood(Xn: np.ndarray, ys: np.ndarray, lengthscales: np.ndarray,
                             signal_var: float, noise_var: float) -> float:
    n = Xn.shape[0]
    K = _matern52(Xn, Xn, lengthscales, signal_var) + noise_var * np.eye(n)
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        return -math.inf
    alpha = _chol_solve(L, ys)
    return float(-0.5 * ys @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * math.log(2 * math.pi))


def _select_hypers(Xn: np.ndarray, ys: np.ndarray) -> tuple[tuple[float, ...], float, float]:
    """Coordinate-wise grid ascent of the log marginal likelihood.

    Two deterministic passes over (each lengthscale, signal var, noise var),
    each parameter restricted to its 7-point log grid; ties keep the
    earliest grid point. A full factorial sweep over per-dimension
    lengthscales would be exponential in the dimension for no accuracy gain
    at this scale.
    """
    dim = Xn.shape[1]
    ls = np.full(dim, LENGTHSCALE_GRID[3])
    s2f = SIGNAL_VAR_GRID[3]
    s2n = NOISE_VAR_GRID[3]
    for _ in range(2):
        for d in range(dim):
            scores = []
            for candidate in LENGTHSCALE_GRID:
                trial = ls.copy()
                trial[d] = candidate
                scores.append(_log_marginal_likelihood(Xn, ys, trial, s2f, s2n))
            ls[d] = LENGTHSCALE_GRID[int(np.argmax(scores))]
        scores = [_log_marginal_likelihood(Xn, ys, ls, candidate, s2n)
                  for candidate in SIGNAL_VAR_GRID]
        s2f = SIGNAL_VAR_GRID[int(np.argmax(scores))]
        scores = [_log_marginal_likelihood(Xn, ys, ls, s2f, candidate)
                  for candidate in NOISE_VAR_GRID]
        s2n = NOISE_VAR_GRID[int(np.argmax(scores))]
    return tuple(float(v) for v in ls), float(s2f), float(s2n)


def gp_posterior_batch(state: GPState, X) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and (latent) variance at each query row, raw units."""
    Xq = state.space.normalize(np.asarray(X, dtype=float))
    if len(state.observations) == 0:
        mean = np.full(Xq.shape[0], state.prior_mean)
        var = np.full(Xq.shape[0], state.signal_var * state.y_scale ** 2)
        return mean, var
    k_star = _matern52(Xq, state._xn, np.asarray(state.lengthscales), state.signal_var)
    mean_std = k_star @ state._alpha
    v = np.linalg.solve(state._chol, k_star.T)
    var_std = np.maximum(state.signal_var - np.sum(v * v, axis=0), 0.0)
    return state.prior_mean + state.y_scale * mean_std, state.y_scale ** 2 * var_std


def gp_posterior(state: GPState, x) -> tuple[float, float]:
    mean, var = gp_posterior_batch(state, np.asarray(x, dtype=float)[None, :])
    return float(mean[0]), float(var[0])


def update(state: GPState, observation: Observation) -> GPState:
    """New state with the observation appended and the factorization rebuilt.

    Auto states re-select hyper-parameters; fixed states keep theirs.
    """
    if not state.space.contains(observation.x):
        raise ValueError(f"observation {observation.x} outside the search space")
    observations = state.observations + (observation,)
    if state.auto_hypers:
        return GPState(state.space, observations, auto_hypers=True)
    return GPState(state.space, observations, lengthscales=state.lengthscales,
                   signal_var=state.signal_var, noise_var=state.noise_var,
                   prior_mean=state.prior_mean)


def _phi(u: float) -> float:
    return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


def _Phi(u: float) -> float:
    return 0.5 * math.erfc(-u / math.sqrt(2.0))


def ei_value(mean: float, sd: float, y_best: float) -> float:
    """Closed-form expected improvement below y_best for N(mean, sd^2)."""
    if sd <= 0.0:
        return max(y_best - mean, 0.0)
    u = (y_best - mean) / sd
    return max((y_best - mean) * _Phi(u) + sd * _phi(u), 0.0)


def expected_improvement(state: GPState, x, y_best: float) -> float:
    mean, var = gp_posterior(state, x)
    return ei_value(mean, math.sqrt(var), y_best)


def _structural(space: SearchSpace, constraints: ConstraintSpec) -> tuple[int, ...]:
    if space.structural_subset != constraints.power_model.schema or \
            space.structural_subset != constraints.memory_model.schema:
        raise ValueError(
            f"structural subset {space.structural_subset} does not match constraint "
            f"model schemas {constraints.power_model.schema} / "
            f"{constraints.memory_model.schema}")
    return space.structural_indices()


def hw_ieci(state: GPState, x, y_best: float, constraints: ConstraintSpec) -> float:
    """Expected improvement gated by the predicted budgets (inclusive)."""
    idx = _structural(state.space, constraints)
    z = tuple(x[i] for i in idx)
    if not constraints.satisfied(z):
        return 0.0
    return expected_improvement(state, x, y_best)


def ei_batch(y_best: float):
    def acq(state: GPState, X: np.ndarray) -> np.ndarray:
        mean, var = gp_posterior_batch(state, X)
        sd = np.sqrt(var)
        return np.array([ei_value(float(m), float(s), y_best) for m, s in zip(mean, sd)])
    return acq


def hw_ieci_batch(y_best: float, constraints: ConstraintSpec, space: SearchSpace):
    idx = _structural(space, constraints)

    def acq(state: GPState, X: np.ndarray) -> np.ndarray:
        values = ei_batch(y_best)(state, X)
        for i, row in enumerate(X):
            z = tuple(row[j] for j in idx)
            if not constraints.satisfied(z):
                values[i] = 0.0
        return values
    return acq


def draw_candidates(space: SearchSpace, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform candidates over the box; integer dimensions rounded in place."""
    lo = np.array([d.lo for d in space.dimensions])
    hi = np.array([d.hi for d in space.dimensions])
    X = rng.uniform(lo, hi, size=(count, space.dim))
    for i, d in enumerate(space.dimensions):
        if d.kind == "integer":
            X[:, i] = np.clip(np.floor(X[:, i] + 0.5), d.lo, d.hi)
    return X


@dataclass(frozen=True)
class Proposal:
    x: tuple[float, ...]
    acquisition: float
    fallback: bool


def propose_next(state: GPState, space: SearchSpace, acquisition, candidate_count: int,
                 seed: int, constraints: ConstraintSpec | None = None) -> Proposal:
    """Maximize the acquisition over sampled candidates.

    Ties break to the lowest candidate index. When every value is zero and
    constraints are present (no predicted-feasible candidate scored), falls
    back to the candidate with the smallest normalized budget violation,
    flagged as exploration fallback.
    """
    if candidate_count < 1:
        raise ValueError("candidate_count must be >= 1")
    rng = generator(seed, _TAG_SAMPLER)
    X = draw_candidates(space, candidate_count, rng)
    values = np.asarray(acquisition(state, X), dtype=float)
    best = int(np.argmax(values))
    if values[best] > 0.0 or constraints is None:
        return Proposal(tuple(float(v) for v in X[best]), float(values[best]), False)
    idx = _structural(space, constraints)
    violations = np.empty(candidate_count)
    for i, row in enumerate(X):
        z = tuple(row[j] for j in idx)
        power, memory = constraints.predict(z)
        violations[i] = (max(power - constraints.power_budget, 0.0) / constraints.power_budget
                         + max(memory - constraints.memory_budget, 0.0) / constraints.memory_budget)
    pick = int(np.argmin(violations))
    return Proposal(tuple(float(v) for v in X[pick]), 0.0, True)


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    x: tuple[float, ...]
    acquisition: float
    y: float
    pred_power: float | None
    pred_memory: float | None
    feasible: bool
    best_y: float | None
    phase: str          # "seed" | "bo"
    fallback: bool
    failed: bool
    elapsed_s: float


@dataclass
class Trace:
    seed: int
    dim_names: tuple[str, ...]
    records: list[TraceRecord]

    def csv_text(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["iter", *self.dim_names, "acq", "y", "pred_power", "pred_mem",
                         "feasible", "best_y"])
        for r in self.records:
            writer.writerow([
                r.iteration,
                *[repr(v) for v in r.x],
                repr(r.acquisition),
                repr(r.y),
                repr(r.pred_power) if r.pred_power is not None else "",
                repr(r.pred_memory) if r.pred_memory is not None else "",
                "true" if r.feasible else "false",
                repr(r.best_y) if r.best_y is not None else "",
            ])
        return out.getvalue()


def _call_objective(objective, x: tuple[float, ...]) -> tuple[float, bool]:
    try:
        y = float(objective(x))
    except Exception:
        return math.nan, True
    if not math.isfinite(y):
        return math.nan, True
    return y, False


def bo_run(objective, space: SearchSpace, constraints: ConstraintSpec | None,
           budget: int, seed: int,
           candidate_count: int = DEFAULT_CANDIDATES) -> tuple[Observation | None, Trace]:
    """Run the search: 2*dim seeding evaluations, then propose/evaluate/update.

    Failed objective calls (exception or non-finite value) are imputed as
    the worst y seen so far, so the surrogate steers away from them. Returns
    the best feasible non-failed observation, or None when the budget ends
    without one, plus the full per-iteration trace. Deterministic given
    (seed, space, objective).
    """
    n_seed = 2 * space.dim
    if budget < n_seed:
        raise ValueError(f"budget {budget} below seeding need {n_seed}")
    if constraints is not None:
        _structural(space, constraints)  # validate schemas up front

    structural_idx = space.structural_indices() if constraints is not None else ()
    trace = Trace(seed, space.names, [])
    history: list[tuple[Observation, bool, bool]] = []  # (obs, failed, feasible)

    def step(iteration: int, x: tuple[float, ...], acq: float, phase: str,
             fallback: bool, started: float) -> Observation:
        y, failed = _call_objective(objective, x)
        if failed:
            ys = [obs.y for obs, ok_failed, _ in history if not ok_failed]
            y = max(ys) if ys else 1.0  # nothing succeeded yet: canonical error scale
        if constraints is None:
            power = memory = None
            feasible = True
        else:
            z = tuple(x[i] for i in structural_idx)
            power, memory = constraints.predict(z)
            feasible = power <= constraints.power_budget and memory <= constraints.memory_budget
        obs = Observation(x, y)
        history.append((obs, failed, feasible))
        feasible_ys = [o.y for o, f, ok in history if ok and not f]
        best_y = min(feasible_ys) if feasible_ys else None
        trace.records.append(TraceRecord(iteration, x, acq, y, power, memory, feasible,
                                         best_y, phase, fallback, failed,
                                         time.perf_counter() - started))
        return obs

    seeds = draw_candidates(space, n_seed, generator(seed, 0))
    for i in range(n_seed):
        step(i + 1, tuple(float(v) for v in seeds[i]), 0.0, "seed", False,
             time.perf_counter())
    state = GPState.fit(space, [obs for obs, _, _ in history])

    for iteration in range(n_seed + 1, budget + 1):
        started = time.perf_counter()
        feasible_ys = [obs.y for obs, failed, ok in history if ok and not failed]
        y_best = min(feasible_ys) if feasible_ys else min(obs.y for obs, _, _ in history)
        if constraints is not None:
            acq = hw_ieci_batch(y_best, constraints, space)
        else:
            acq = ei_batch(y_best)
        proposal = propose_next(state, space, acq, candidate_count, seed + iteration,
                                constraints)
        obs = step(iteration, proposal.x, proposal.acquisition, "bo", proposal.fallback,
                   started)
        state = update(state, obs)

    best = None
    for obs, failed, feasible in history:
        if feasible and not failed and (best is None or obs.y < best.y):
            best = obs
    return best, trace
