"""Learned per-layer-kind cost models: sparse polynomial regression.

Each model is a degree-bounded polynomial over a layer-kind-specific feature
vector plus two special terms (total FLOPs and total memory accesses),
fitted with L1-regularized least squares by cyclic coordinate descent.
Network-level runtime/energy/average-power come from summing per-layer
predictions.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .netgraph import (LayerConfig, LayerKind, NetworkConfig, TensorShape,
                       count_ops, infer_output_shape)
from .seeding import kfold_indices

COEF_DROP_THRESHOLD = 1e-12
CV_LAMBDA_GRID_SIZE = 50
CV_LAMBDA_FLOOR = 1e-4  # relative to the smallest lambda that zeroes everything
DEFAULT_DEGREE = {LayerKind.CONV2D: 3, LayerKind.FULLY_CONNECTED: 2, LayerKind.POOL2D: 2}


class Target(Enum):
    RUNTIME_MS = "runtime_ms"
    POWER_W = "power_w"


class SpecialTerm(Enum):
    TOTAL_FLOPS = "total_flops"
    TOTAL_MEM_ACCESSES = "total_mem_accesses"


SPECIAL_TERMS = (SpecialTerm.TOTAL_FLOPS, SpecialTerm.TOTAL_MEM_ACCESSES)


class FitError(ValueError):
    """Fitting preconditions violated (sample count, kind mismatch, ...)."""


class MissingModelError(ValueError):
    """A network contains a layer kind with no model supplied for it."""


class ZeroRuntimeError(ValueError):
    """Average power is undefined because total predicted runtime is zero."""


_SCHEMAS = {
    LayerKind.CONV2D: ("batch", "in_c", "in_hw", "kernel_hw", "stride", "padding",
                       "out_c", "out_hw"),
    LayerKind.FULLY_CONNECTED: ("batch", "in_units", "out_units"),
    LayerKind.POOL2D: ("batch", "in_c", "in_hw", "kernel_hw", "stride", "out_hw"),
}


def feature_schema(kind: LayerKind) -> tuple[str, ...]:
    return _SCHEMAS[kind]


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    schema: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.schema):
            raise ValueError("feature values and schema lengths differ")


def _hw(h: int, w: int) -> float:
    # square spatial dims collapse to one feature; non-square uses the geometric mean
    return float(h) if h == w else math.sqrt(h * w)


def build_features(layer: LayerConfig) -> FeatureVector:
    """Layer hyper-parameters as the model's input vector."""
    s = layer.input
    if layer.kind is LayerKind.FULLY_CONNECTED:
        values = (float(s.batch), float(layer.in_units), float(layer.output_units))
    else:
        out = infer_output_shape(layer)
        if layer.kind is LayerKind.CONV2D:
            values = (float(s.batch), float(s.channels), _hw(s.height, s.width),
                      _hw(layer.kernel_h, layer.kernel_w), float(layer.stride),
                      float(layer.padding), float(layer.output_channels),
                      _hw(out.height, out.width))
        else:
            values = (float(s.batch), float(s.channels), _hw(s.height, s.width),
                      _hw(layer.kernel_h, layer.kernel_w), float(layer.stride),
                      _hw(out.height, out.width))
    return FeatureVector(values, _SCHEMAS[layer.kind])


def special_terms(layer: LayerConfig) -> tuple[float, float]:
    """(total FLOPs, total memory accesses) for the layer."""
    ops = count_ops(layer)
    return (float(ops.flops),
            float(ops.input_reads + ops.weight_reads + ops.output_writes))


@dataclass(frozen=True)
class TermSpec:
    """One monomial: exponent per feature, total degree bounded by the model."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        if any(e < 0 for e in self.exponents):
            raise ValueError("exponents must be non-negative")

    @property
    def degree(self) -> int:
        return sum(self.exponents)


def enumerate_terms(dim: int, degree: int) -> list[TermSpec]:
    """All exponent vectors with total degree <= `degree`, graded-lex order.

    Within each total degree, vectors are lexicographically descending
    (leftmost feature most significant). Count is C(dim + degree, degree).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if degree < 0:
        raise ValueError("degree must be >= 0")

    def compositions(total: int, slots: int):
        if slots == 1:
            yield (total,)
            return
        for head in range(total, -1, -1):
            for rest in compositions(total - head, slots - 1):
                yield (head,) + rest

    terms = []
    for total in range(degree + 1):
        for exps in compositions(total, dim):
            terms.append(TermSpec(exps))
    return terms


@dataclass(frozen=True)
class PolynomialModel:
    """Fitted sparse polynomial for one (layer kind, target) pair.

    Only nonzero-coefficient terms are stored; `size` is the published
    model-size notion (regular + special term count).
    """

    layer_kind: LayerKind
    target: Target
    degree: int
    schema: tuple[str, ...]
    terms: tuple[tuple[TermSpec, float], ...]
    special: tuple[tuple[SpecialTerm, float], ...]

    def __post_init__(self):
        seen = set()
        for term, _ in self.terms:
            if len(term.exponents) != len(self.schema):
                raise ValueError("term arity does not match schema")
            if term.degree > self.degree:
                raise ValueError("term degree exceeds model degree")
            if term.exponents in seen:
                raise ValueError(f"duplicate term {term.exponents}")
            seen.add(term.exponents)

    @property
    def size(self) -> int:
        return len(self.terms) + len(self.special)


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the sparse fit.

    degree=None picks the per-kind default (3 for conv, 2 for fc/pool);
    l1_strength=None selects lambda by cross-validated RMSPE over a
    50-point logarithmic grid. An explicit l1_strength applies to the
    internally standardized problem (features and target scaled to unit
    variance), so values are comparable across datasets.
    """

    degree: int | None = None
    l1_strength: float | None = None
    cv_folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.degree is not None and self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.l1_strength is not None and self.l1_strength < 0:
            raise ValueError("l1_strength must be >= 0")
        if self.l1_strength is None and self.cv_folds < 2:
            raise ValueError("cv selection needs at least 2 folds")

    def resolved_degree(self, kind: LayerKind) -> int:
        return self.degree if self.degree is not None else DEFAULT_DEGREE[kind]


@dataclass(frozen=True)
class Metrics:
    rmspe: float  # percent
    rmse: float   # target units (ms or W)


def _rmspe(pred: np.ndarray, actual: np.ndarray, warn_context: str | None = None) -> float:
    nonzero = actual != 0
    if not nonzero.all() and warn_context is not None:
        warnings.warn(f"{warn_context}: excluded {int((~nonzero).sum())} zero-actual "
                      f"sample(s) from RMSPE", stacklevel=3)
    if not nonzero.any():
        raise ValueError("RMSPE undefined: every actual value is zero")
    rel = (pred[nonzero] - actual[nonzero]) / actual[nonzero]
    return 100.0 * math.sqrt(float(np.mean(rel * rel)))


def evaluate(model: PolynomialModel, samples: list[tuple[LayerConfig, float]]) -> Metrics:
    """RMSPE (%) and RMSE of the model over a held-out sample set."""
    if not samples:
        raise ValueError("empty test set")
    pred = np.array([predict(model, layer) for layer, _ in samples])
    actual = np.array([value for _, value in samples], dtype=float)
    rmse = math.sqrt(float(np.mean((pred - actual) ** 2)))
    return Metrics(_rmspe(pred, actual, warn_context="evaluate"), rmse)


def _design_matrix(layers: list[LayerConfig], kind: LayerKind,
                   terms: list[TermSpec]) -> np.ndarray:
    feats = np.array([build_features(layer).values for layer in layers], dtype=float)
    cols = [np.prod(feats ** np.asarray(t.exponents, dtype=float), axis=1) for t in terms]
    specials = np.array([special_terms(layer) for layer in layers], dtype=float)
    return np.column_stack(cols + [specials[:, 0], specials[:, 1]])


def _soft_threshold(value: float, lam: float) -> float:
    if value > lam:
        return value - lam
    if value < -lam:
        return value + lam
    return 0.0


def _kkt_violation(gram: np.ndarray, corr: np.ndarray, lam: float,
                   beta: np.ndarray, diag: np.ndarray) -> np.ndarray:
    grad = gram @ beta - corr
    viol = np.where(beta != 0.0, np.abs(grad + lam * np.sign(beta)),
                    np.maximum(np.abs(grad) - lam, 0.0))
    viol[diag <= 0] = 0.0
    return viol


def _lasso_cd(gram: np.ndarray, corr: np.ndarray, lam: float, beta: np.ndarray,
              max_outer: int = 200, max_sweeps: int = 10_000,
              tol: float = 1e-10) -> np.ndarray:
    """Active-set cyclic coordinate descent for (1/2n)||y-Xb||^2 + lam*||b||_1.

    gram = X^T X / n, corr = X^T y / n; columns with zero gram diagonal stay
    at zero. Sweeps cycle over the active set until its KKT conditions hold
    (or progress stalls at float precision), then columns violating the full
    KKT check are activated and the cycle repeats. Flat directions (exactly
    collinear columns) carry no gradient, are never activated, and so keep
    the warm-start's minimal-L1 choice.
    """
    diag = np.diag(gram).copy()
    active = sorted(int(j) for j in np.flatnonzero(beta != 0.0))
    prev_viol = math.inf
    sweeps_left = max_sweeps  # total budget across activations
    for _ in range(max_outer):
        if active:
            idx = np.asarray(active)
            sub_gram = gram[np.ix_(idx, idx)]
            sub_corr = corr[idx]
            sub_diag = diag[idx]
            sub_beta = beta[idx]
            while sweeps_left > 0:
                sweeps_left -= 1
                delta = 0.0
                for k in range(len(idx)):
                    rho = sub_corr[k] - float(sub_gram[k] @ sub_beta) + sub_diag[k] * sub_beta[k]
                    new = (_soft_threshold(rho, lam) / sub_diag[k] if lam > 0
                           else rho / sub_diag[k])
                    delta = max(delta, abs(new - sub_beta[k]))
                    sub_beta[k] = new
                if float(_kkt_violation(sub_gram, sub_corr, lam, sub_beta,
                                        sub_diag).max(initial=0.0)) <= tol:
                    break
                if delta <= 1e-15 * max(1.0, float(np.abs(sub_beta).max(initial=0.0))):
                    break  # float-precision stall
            beta[idx] = sub_beta
        viol = _kkt_violation(gram, corr, lam, beta, diag)
        worst = float(viol.max(initial=0.0))
        violators = np.flatnonzero(viol > tol)
        if violators.size == 0 or sweeps_left <= 0:
            return beta
        merged = sorted(set(active) | set(int(v) for v in violators))
        if merged == active and worst >= prev_viol:
            return beta  # no further progress possible at this precision
        active = merged
        prev_viol = worst
    return beta


@dataclass
class _Standardized:
    x_centered: np.ndarray  # standardized live columns only
    y_centered: np.ndarray  # unit-variance target
    means: np.ndarray       # all columns
    stds: np.ndarray        # all columns; 0 marks a dead (constant) column
    live: np.ndarray        # indices of live columns
    y_mean: float
    y_std: float


def _standardize(design: np.ndarray, y: np.ndarray) -> _Standardized:
    means = design.mean(axis=0)
    stds = design.std(axis=0)
    live = np.flatnonzero(stds > 0)
    x = (design[:, live] - means[live]) / stds[live]
    y_mean = float(y.mean())
    y_std = float(y.std())
    if y_std == 0.0:
        y_std = 1.0
    return _Standardized(x, (y - y_mean) / y_std, means, stds, live, y_mean, y_std)


def _unstandardize(std: _Standardized, beta_std: np.ndarray, n_cols: int) -> tuple[np.ndarray, float]:
    """Map standardized coefficients back to raw columns plus an intercept."""
    beta = np.zeros(n_cols)
    beta[std.live] = beta_std * std.y_std / std.stds[std.live]
    intercept = std.y_mean - float(beta[std.live] @ std.means[std.live])
    return beta, intercept


def _lasso_path(std: _Standardized, lambdas: np.ndarray, polish: bool = True,
                path_tol: float = 1e-7) -> list[np.ndarray]:
    n = std.x_centered.shape[0]
    gram = std.x_centered.T @ std.x_centered / n
    corr = std.x_centered.T @ std.y_centered / n
    beta = np.zeros(len(std.live))
    out = []
    for i, lam in enumerate(lambdas):
        # trim small warm-start residue so flat directions start clean and the
        # active set stays well conditioned; anything real re-activates via
        # the KKT check
        scale = float(np.abs(beta).max(initial=0.0))
        if scale > 0.0:
            beta[np.abs(beta) < 1e-8 * scale] = 0.0
        final = polish and i == len(lambdas) - 1
        beta = _lasso_cd(gram, corr, float(lam), beta.copy(),
                         tol=1e-15 if final else path_tol,
                         max_sweeps=20_000 if final else 200)
        out.append(beta.copy())
    return out


def _lambda_grid(std: _Standardized) -> np.ndarray:
    n = std.x_centered.shape[0]
    corr = std.x_centered.T @ std.y_centered / n
    lam_max = float(np.max(np.abs(corr), initial=0.0))
    if lam_max <= 0:
        lam_max = 1.0
    return np.geomspace(lam_max, lam_max * CV_LAMBDA_FLOOR, CV_LAMBDA_GRID_SIZE)


def _check_samples(samples, config: FitConfig, kind: LayerKind) -> None:
    if len(samples) < 2 * config.cv_folds:
        raise FitError(f"need at least {2 * config.cv_folds} samples, got {len(samples)}")
    for layer, _ in samples:
        if layer.kind is not kind:
            raise FitError(f"sample layer {layer.name} is {layer.kind.value}, expected {kind.value}")


def _assemble_model(kind: LayerKind, target: Target, degree: int,
                    terms: list[TermSpec], beta: np.ndarray, intercept: float) -> PolynomialModel:
    schema = _SCHEMAS[kind]
    const_index = next(i for i, t in enumerate(terms) if t.degree == 0)
    coef = beta.copy()
    coef[const_index] += intercept
    kept_regular = tuple((terms[i], float(coef[i])) for i in range(len(terms))
                         if abs(coef[i]) >= COEF_DROP_THRESHOLD)
    kept_special = tuple((SPECIAL_TERMS[s], float(coef[len(terms) + s]))
                         for s in range(len(SPECIAL_TERMS))
                         if abs(coef[len(terms) + s]) >= COEF_DROP_THRESHOLD)
    return PolynomialModel(kind, target, degree, schema, kept_regular, kept_special)


def _cv_curves(design: np.ndarray, y: np.ndarray, lambdas: np.ndarray,
               folds: int, seed: int) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray]]]:
    """Mean held-out RMSPE per lambda, plus per-fold (pred-matrix, actual)."""
    n = design.shape[0]
    fold_of = kfold_indices(n, folds, seed)
    rmspe = np.zeros((folds, len(lambdas)))
    fold_preds = []
    for k in range(folds):
        val = fold_of == k
        std = _standardize(design[~val], y[~val])
        # fold fits feed RMSPE selection only; path-grade accuracy suffices
        path = _lasso_path(std, lambdas, polish=False)
        preds = np.empty((int(val.sum()), len(lambdas)))
        for i, beta_std in enumerate(path):
            beta, intercept = _unstandardize(std, beta_std, design.shape[1])
            preds[:, i] = design[val] @ beta + intercept
            rmspe[k, i] = _rmspe(preds[:, i], y[val])
        fold_preds.append((preds, y[val]))
    return rmspe.mean(axis=0), fold_preds


def fit(samples: list[tuple[LayerConfig, float]], config: FitConfig,
        kind: LayerKind, target: Target) -> PolynomialModel:
    model, _ = fit_with_metrics(samples, config, kind, target)
    return model


def fit_with_metrics(samples: list[tuple[LayerConfig, float]], config: FitConfig,
                     kind: LayerKind, target: Target) -> tuple[PolynomialModel, Metrics]:
    """Fit a model and report held-out CV metrics at the chosen lambda.

    Deterministic given (samples, config, config.seed): the fold split and
    the lambda grid are both seed-derived, and coordinate descent is exact
    cyclic order.
    """
    _check_samples(samples, config, kind)
    degree = config.resolved_degree(kind)
    layers = [layer for layer, _ in samples]
    y = np.array([value for _, value in samples], dtype=float)
    terms = enumerate_terms(len(_SCHEMAS[kind]), degree)
    design = _design_matrix(layers, kind, terms)

    if float(y.std()) == 0.0:
        warnings.warn(f"all {kind.value} {target.value} targets identical; "
                      f"fitting a constant-only model", stacklevel=2)
        const = TermSpec((0,) * len(_SCHEMAS[kind]))
        model = PolynomialModel(kind, target, degree, _SCHEMAS[kind],
                                ((const, float(y[0])),) if abs(y[0]) >= COEF_DROP_THRESHOLD else (),
                                ())
        return model, Metrics(0.0, 0.0)

    std_full = _standardize(design, y)
    if config.l1_strength is None:
        lambdas = _lambda_grid(std_full)
        mean_rmspe, fold_preds = _cv_curves(design, y, lambdas, config.cv_folds, config.seed)
        chosen = int(np.argmin(mean_rmspe))
    else:
        # warm-start down the grid to the requested lambda, for CD stability
        grid = _lambda_grid(std_full)
        lambdas = np.append(grid[grid > config.l1_strength], config.l1_strength)
        _, fold_preds = _cv_curves(design, y, lambdas, config.cv_folds, config.seed)
        chosen = len(lambdas) - 1
    pooled_pred = np.concatenate([preds[:, chosen] for preds, _ in fold_preds])
    pooled_act = np.concatenate([act for _, act in fold_preds])
    path_lams = lambdas[: chosen + 1]

    beta_std = _lasso_path(std_full, path_lams)[-1]
    beta, intercept = _unstandardize(std_full, beta_std, design.shape[1])
    model = _assemble_model(kind, target, degree, terms, beta, intercept)
    metrics = Metrics(_rmspe(pooled_pred, pooled_act),
                      math.sqrt(float(np.mean((pooled_pred - pooled_act) ** 2))))
    return model, metrics


def predict_with_flag(model: PolynomialModel, layer: LayerConfig) -> tuple[float, bool]:
    """Model value for the layer, clamped at zero; flag marks a clamp."""
    if layer.kind is not model.layer_kind:
        raise ValueError(f"layer {layer.name} is {layer.kind.value}, "
                         f"model is for {model.layer_kind.value}")
    x = build_features(layer).values
    total = 0.0
    for term, coef in model.terms:
        value = coef
        for xi, qi in zip(x, term.exponents):
            if qi:
                value *= xi ** qi
        total += value
    if model.special:
        flops, mem = special_terms(layer)
        lookup = {SpecialTerm.TOTAL_FLOPS: flops, SpecialTerm.TOTAL_MEM_ACCESSES: mem}
        for special, coef in model.special:
            total += coef * lookup[special]
    if total < 0.0:
        return 0.0, True
    return total, False


def predict(model: PolynomialModel, layer: LayerConfig) -> float:
    value, _ = predict_with_flag(model, layer)
    return value


@dataclass(frozen=True)
class LayerPrediction:
    name: str
    kind: LayerKind
    runtime_ms: float
    power_w: float
    energy_mj: float
    clamped: bool


@dataclass(frozen=True)
class NetworkPrediction:
    layers: tuple[LayerPrediction, ...]
    total_runtime_ms: float
    total_energy_mj: float
    average_power_w: float


def predict_network(runtime_models: dict[LayerKind, PolynomialModel],
                    power_models: dict[LayerKind, PolynomialModel],
                    net: NetworkConfig) -> NetworkPrediction:
    """Network totals: runtimes sum, energies sum (T*P per layer, in mJ),
    average power is total energy over total runtime."""
    per_layer = []
    total_t = 0.0
    total_e = 0.0
    for layer in net.layers:
        if layer.kind not in runtime_models:
            raise MissingModelError(f"no runtime model for kind {layer.kind.value}")
        if layer.kind not in power_models:
            raise MissingModelError(f"no power model for kind {layer.kind.value}")
        t, t_clamped = predict_with_flag(runtime_models[layer.kind], layer)
        p, p_clamped = predict_with_flag(power_models[layer.kind], layer)
        e = t * p  # ms * W = mJ
        per_layer.append(LayerPrediction(layer.name, layer.kind, t, p, e,
                                         t_clamped or p_clamped))
        total_t += t
        total_e += e
    if total_t == 0.0:
        raise ZeroRuntimeError("total predicted runtime is zero; average power undefined")
    return NetworkPrediction(tuple(per_layer), total_t, total_e, total_e / total_t)


# --- serialization ---------------------------------------------------------

def model_to_json(model: PolynomialModel) -> str:
    doc = {
        "layer_kind": model.layer_kind.value,
        "target": model.target.value,
        "degree": model.degree,
        "schema": list(model.schema),
        "terms": [[list(term.exponents), coef] for term, coef in model.terms],
        "special_terms": [[special.value, coef] for special, coef in model.special],
    }
    return json.dumps(doc, indent=2) + "\n"


def model_from_json(text: str) -> PolynomialModel:
    doc = json.loads(text)
    return PolynomialModel(
        layer_kind=LayerKind(doc["layer_kind"]),
        target=Target(doc["target"]),
        degree=int(doc["degree"]),
        schema=tuple(doc["schema"]),
        terms=tuple((TermSpec(tuple(exps)), float(coef)) for exps, coef in doc["terms"]),
        special=tuple((SpecialTerm(name), float(coef)) for name, coef in doc["special_terms"]),
    )


# --- profiling-sample CSV ---------------------------------------------------

PROFILE_HEADER = ("kind", "batch", "in_c", "in_h", "in_w", "k_h", "k_w", "stride",
                  "pad", "out_c", "out_units", "runtime_ms", "power_w")


@dataclass(frozen=True)
class ProfileSample:
    layer: LayerConfig
    runtime_ms: float | None
    power_w: float | None


def _opt_int(value: str) -> int | None:
    return int(value) if value.strip() else None


def _opt_float(value: str) -> float | None:
    return float(value) if value.strip() else None


def read_profile_csv(text: str) -> list[ProfileSample]:
    """Parse the profiling CSV; `#` lines before the header are comments."""
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(lines)))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise ValueError("empty profile CSV") from None
    if header != PROFILE_HEADER:
        raise ValueError(f"bad profile header {header!r}")
    samples = []
    for row_no, row in enumerate(reader, start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != len(PROFILE_HEADER):
            raise ValueError(f"row {row_no}: expected {len(PROFILE_HEADER)} cells, got {len(row)}")
        try:
            kind = LayerKind(row[0].strip())
            batch = int(row[1])
            in_c = int(row[2])
            in_h = _opt_int(row[3]) or 1
            in_w = _opt_int(row[4]) or 1
            shape = TensorShape(batch, in_c, in_h, in_w)
            if kind is LayerKind.CONV2D:
                layer = LayerConfig(f"row{row_no}", kind, shape,
                                    kernel_h=int(row[5]), kernel_w=int(row[6]),
                                    stride=int(row[7]), padding=int(row[8]),
                                    output_channels=int(row[9]))
            elif kind is LayerKind.POOL2D:
                layer = LayerConfig(f"row{row_no}", kind, shape,
                                    kernel_h=int(row[5]), kernel_w=int(row[6]),
                                    stride=int(row[7]), padding=int(row[8]))
            else:
                layer = LayerConfig(f"row{row_no}", kind, shape,
                                    output_units=int(row[10]))
            samples.append(ProfileSample(layer, _opt_float(row[11]), _opt_float(row[12])))
        except (ValueError, KeyError) as exc:
            raise ValueError(f"row {row_no}: {exc}") from None
    return samples


def write_profile_csv(samples: list[ProfileSample], comments: list[str] | None = None) -> str:
    out = io.StringIO()
    for comment in comments or []:
        out.write(f"# {comment}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(PROFILE_HEADER)
    for sample in samples:
        layer = sample.layer
        s = layer.input
        row = [layer.kind.value, s.batch, s.channels]
        if layer.kind is LayerKind.FULLY_CONNECTED:
            row += ["", "", "", "", "", "", "", layer.output_units]
        else:
            row += [s.height, s.width, layer.kernel_h, layer.kernel_w, layer.stride,
                    layer.padding,
                    layer.output_channels if layer.kind is LayerKind.CONV2D else "", ""]
        row.append(repr(sample.runtime_ms) if sample.runtime_ms is not None else "")
        row.append(repr(sample.power_w) if sample.power_w is not None else "")
        writer.writerow(row)
    return out.getvalue()
