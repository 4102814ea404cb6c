"""Model constants, concentration-bound formulas, assumption checks and sparse-regime analysis."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigsh

from .errors import ModelValidationError, PreconditionError
from .graph_models import BlockModelSpec, LatentPositionMatrix, block_spec_from_config, sbm_to_latent
from .schemas import (
    AssumptionReport,
    BoundEntry,
    BoundReport,
    ModelConfig,
    SparseRegimeReport,
    SparseRegimeRow,
)
from .spectral import MatrixLike, SpectralEmbedding, align, as_matrix, project_sphere, two_to_infty_norm

logger = logging.getLogger(__name__)

EIGENVALUE_GROUPING_TOL = 1e-9
NOISE_NORM_DENSE_MAX_N = 512

BOUND_NAMES: Tuple[str, ...] = (
    "spectral_norm_noise",
    "eigenvector_deviation_sq",
    "eigenvalue_deviation",
    "eigenvector_overlap",
    "projection_residual",
    "embedded_spectral_norm",
    "inverse_eigenvalue_norm",
    "noise_projection_2inf",
    "two_to_infinity",
    "sphere_two_to_infinity",
    "sphere_two_to_infinity_measured",
)


@dataclass(frozen=True, slots=True)
class ModelConstants:
    """Δ, γ and the spectrum of P = XX^T.

    ``eigenvalues_P`` lists the distinct eigenvalues of P in descending order
    (0 included when d < n); ``nonzero_eigenvalues`` keeps multiplicities.
    """

    n: int
    d: int
    Delta: float
    gamma: float
    eigenvalues_P: Tuple[float, ...]
    nonzero_eigenvalues: Tuple[float, ...]
    min_relative_gap: float
    K: Optional[int] = None
    n_min: Optional[int] = None
    c_min: Optional[float] = None

    @property
    def gamma_n(self) -> float:
        return self.gamma * self.n


@dataclass(frozen=True, slots=True)
class BetaEstimate:
    value: float
    hypothesis_violated: bool

    def __float__(self) -> float:
        return self.value


def _rows_of(X: Union[LatentPositionMatrix, np.ndarray]) -> np.ndarray:
    return X.rows if isinstance(X, LatentPositionMatrix) else np.asarray(X, dtype=float)


def max_offdiagonal_row_sum(rows: np.ndarray) -> float:
    """max_i Σ_{j≠i} X_i·X_j without forming P."""

    totals = rows @ rows.sum(axis=0) - np.einsum("ij,ij->i", rows, rows)
    return float(totals.max())


def latent_eigenpairs(rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Nonzero eigenvalues of P (descending) and the matching orthonormal eigenvectors V = XQΛ^{-1/2}."""

    values, Q = linalg.eigh(rows.T @ rows)
    order = np.argsort(values)[::-1]
    values, Q = values[order], Q[:, order]
    keep = values > 1e-10 * max(float(values[0]), np.finfo(float).tiny)
    values, Q = values[keep], Q[:, keep]
    V = rows @ Q / np.sqrt(values)
    return values, V


def _distinct(values: Sequence[float], tol: float) -> List[float]:
    scale = max((abs(v) for v in values), default=1.0) or 1.0
    groups: List[List[float]] = []
    for value in sorted(values, reverse=True):
        if groups and groups[-1][-1] - value <= tol * scale:
            groups[-1].append(value)
        else:
            groups.append([value])
    return [float(np.mean(group)) for group in groups]


def model_constants(
    X: Union[LatentPositionMatrix, np.ndarray],
    tau: Optional[Sequence[int]] = None,
    *,
    degree_corrected: bool = False,
) -> ModelConstants:
    """Exact Δ, γ, d, and (given memberships) K and n_min for P = XX^T."""

    rows = _rows_of(X)
    n = int(rows.shape[0])
    nonzero, _ = latent_eigenpairs(rows)
    d = int(nonzero.size)
    if d == 0:
        raise PreconditionError("P = XX^T has no positive eigenvalue")
    distinct_nonzero = _distinct(nonzero.tolist(), EIGENVALUE_GROUPING_TOL)
    # γn: smallest gap among distinct eigenvalues, counting the step down to 0
    ladder = distinct_nonzero + [0.0]
    gamma_n = min(upper - lower for upper, lower in zip(ladder, ladder[1:]))
    eigenvalues_P = tuple(distinct_nonzero + ([0.0] if d < n else []))

    top = float(nonzero[0])
    with_zero = list(nonzero) + [0.0]
    min_relative_gap = min((a - b) / top for a, b in zip(with_zero, with_zero[1:]))

    K = n_min = None
    if tau is not None:
        counts = np.bincount(np.asarray(tau, dtype=np.int64))
        counts = counts[counts > 0]
        K, n_min = int(counts.size), int(counts.min())
    c_min = float(np.linalg.norm(rows, axis=1).min()) if degree_corrected else None

    return ModelConstants(
        n=n,
        d=d,
        Delta=max_offdiagonal_row_sum(rows),
        gamma=gamma_n / n,
        eigenvalues_P=eigenvalues_P,
        nonzero_eigenvalues=tuple(float(v) for v in nonzero),
        min_relative_gap=float(min_relative_gap),
        K=K,
        n_min=n_min,
        c_min=c_min,
    )


def _check_eta(eta: float) -> None:
    if not 0.0 < eta < 0.5:
        raise PreconditionError(f"eta must lie in (0, 1/2) (got eta={eta})")


def gap_hypothesis_holds(n: int, eta: float, Delta: float, gamma: float) -> bool:
    return gamma * n >= 4.0 * math.sqrt(Delta * math.log(n / eta))


def beta(d: int, n: int, eta: float, Delta: float, gamma: float) -> BetaEstimate:
    """85 d Δ³ log(n/η) / (γn)^{7/2}, flagged when γn < 4√(Δ log(n/η))."""

    _check_eta(eta)
    if Delta <= 0.0:
        raise PreconditionError(f"Delta must be positive (got Delta={Delta})")
    if gamma <= 0.0:
        raise PreconditionError(f"gamma must be positive (got gamma={gamma})")
    if d < 1 or n < 1:
        raise PreconditionError(f"d and n must be positive (got d={d}, n={n})")
    value = 85.0 * d * Delta**3 * math.log(n / eta) / (gamma * n) ** 3.5
    violated = not gap_hypothesis_holds(n, eta, Delta, gamma)
    if violated:
        logger.debug("beta: gap hypothesis violated at n=%d (gamma*n=%.4g, Delta=%.4g)", n, gamma * n, Delta)
    return BetaEstimate(value=value, hypothesis_violated=violated)


def beta_terms(d: int, n: int, eta: float, Delta: float, gamma: float) -> Dict[str, float]:
    """Term-wise bounds whose sum controls the 2→∞ embedding error."""

    _check_eta(eta)
    gn = gamma * n
    log_term = math.log(n / eta)
    return {
        "projection": 24.0 * math.sqrt(2.0) * d * Delta**2 * log_term / gn**2.5,
        "eigenvalue": 48.0 * d * Delta**3 * log_term / gn**3.5,
        "noise": math.sqrt(d * math.log(2.0 * n * d / eta) / (2.0 * gn)),
    }


def noise_spectral_norm(A: MatrixLike, rows: np.ndarray, *, seed: int = 0) -> float:
    """||A - XX^T||_2 without forming P for large n."""

    n = int(rows.shape[0])
    M = as_matrix(A)
    if n <= NOISE_NORM_DENSE_MAX_N:
        dense = M.toarray() if sparse.issparse(M) else np.asarray(M, dtype=float)
        return float(np.abs(linalg.eigvalsh(dense - rows @ rows.T)).max())

    def _matvec(v: np.ndarray) -> np.ndarray:
        v = np.ravel(v)
        return M @ v - rows @ (rows.T @ v)

    operator = LinearOperator((n, n), matvec=_matvec, dtype=float)
    v0 = np.random.default_rng(np.random.SeedSequence(seed)).standard_normal(n)
    try:
        values = eigsh(operator, k=1, which="LM", v0=v0, tol=1e-10, return_eigenvectors=False)
    except (ArpackNoConvergence, ArpackError):
        logger.warning("Lanczos failed for ||A-P||_2 at n=%d; using a dense eigensolve", n)
        dense = M.toarray() if sparse.issparse(M) else np.asarray(M, dtype=float)
        return float(np.abs(linalg.eigvalsh(dense - rows @ rows.T)).max())
    return float(np.abs(values).max())


def bound_report(
    A: MatrixLike,
    X: LatentPositionMatrix,
    embedding: SpectralEmbedding,
    eta: float,
    *,
    tau: Optional[Sequence[int]] = None,
    degree_corrected: bool = False,
    constants: Optional[ModelConstants] = None,
) -> BoundReport:
    """Measured quantities next to their high-probability bounds.

    Deviation entries vanish when A = P; magnitude entries bound quantities
    that stay positive (||Ŝ||_2, ||Ŝ^{-1}||_2).
    """

    _check_eta(eta)
    rows = X.rows
    n, d = X.n, embedding.d
    if embedding.n != n:
        raise PreconditionError(f"embedding has {embedding.n} rows but X has n={n}")
    if constants is None:
        constants = model_constants(X, tau, degree_corrected=degree_corrected)
    if constants.d != d:
        raise PreconditionError(f"embedding dimension d={d} differs from rank(P)={constants.d}")
    Delta, gamma, gn = constants.Delta, constants.gamma, constants.gamma_n
    log_term = math.log(n / eta)

    S, V = latent_eigenpairs(rows)
    S_hat = embedding.eigenvalues
    # (A0) makes eigenvalues simple, so per-column signs are the only ambiguity
    signs = np.sign(np.einsum("ij,ij->j", V, embedding.Vhat))
    signs[signs == 0] = 1.0
    V_hat = embedding.Vhat * signs
    X_hat = V_hat * np.sqrt(S_hat)

    M = as_matrix(A)
    AV = np.asarray(M @ V)
    noise_projection = AV - rows @ (rows.T @ V)

    beta_estimate = beta(d, n, eta, Delta, gamma)
    terms = beta_terms(d, n, eta, Delta, gamma)
    alignment = align(embedding.Xhat, rows)

    entries: List[BoundEntry] = [
        BoundEntry(
            name="spectral_norm_noise",
            lhs=noise_spectral_norm(A, rows),
            rhs=2.0 * math.sqrt(Delta * log_term),
            reference="2*sqrt(Delta*log(n/eta))",
        ),
        BoundEntry(
            name="eigenvector_deviation_sq",
            lhs=float(np.linalg.norm(V_hat - V) ** 2),
            rhs=4.0 * d * Delta * log_term / gn**2,
            reference="4*d*Delta*log(n/eta)/(gamma*n)^2",
        ),
        BoundEntry(
            name="eigenvalue_deviation",
            lhs=float(np.abs(S_hat - S).max()),
            rhs=18.0 * d * Delta**2 * log_term / gn**2,
            reference="18*d*Delta^2*log(n/eta)/(gamma*n)^2",
        ),
        BoundEntry(
            name="eigenvector_overlap",
            lhs=float(np.linalg.norm(V.T @ V_hat - np.eye(d))),
            rhs=10.0 * d * Delta * log_term / gn**2,
            reference="10*d*Delta*log(n/eta)/(gamma*n)^2",
        ),
        BoundEntry(
            name="projection_residual",
            lhs=float(np.linalg.norm(AV / np.sqrt(S_hat) - X_hat)),
            rhs=terms["projection"],
            reference="24*sqrt(2)*d*Delta^2*log(n/eta)/(gamma*n)^(5/2)",
        ),
        BoundEntry(
            name="embedded_spectral_norm",
            lhs=float(S_hat.max()),
            rhs=min(2.0 * Delta, float(n)),
            kind="magnitude",
            reference="min(2*Delta, n)",
        ),
        BoundEntry(
            name="inverse_eigenvalue_norm",
            lhs=float(1.0 / S_hat.min()),
            rhs=2.0 / gn,
            kind="magnitude",
            reference="2/(gamma*n)",
        ),
        BoundEntry(
            name="noise_projection_2inf",
            lhs=two_to_infty_norm(noise_projection),
            rhs=math.sqrt(0.5 * d * math.log(2.0 * n * d / eta)),
            reference="sqrt((d/2)*log(2*n*d/eta))",
        ),
        BoundEntry(
            name="two_to_infinity",
            lhs=alignment.residual_2inf,
            rhs=beta_estimate.value,
            reference="85*d*Delta^3*log(n/eta)/(gamma*n)^(7/2)",
        ),
    ]

    if degree_corrected:
        c_min = float(np.linalg.norm(rows, axis=1).min())
        Y_hat = project_sphere(embedding.Xhat)
        Y_tilde = project_sphere(rows @ alignment.W)
        sphere_error = two_to_infty_norm(Y_hat - Y_tilde)
        entries.append(
            BoundEntry(
                name="sphere_two_to_infinity",
                lhs=sphere_error,
                rhs=2.0 * beta_estimate.value / c_min,
                reference="2*beta/c_min",
            )
        )
        entries.append(
            BoundEntry(
                name="sphere_two_to_infinity_measured",
                lhs=sphere_error,
                # exact inequality given the measured 2→∞ error; slack absorbs rounding
                rhs=2.0 * alignment.residual_2inf / c_min + 1e-12,
                reference="2*||Xhat - XW||_2inf/c_min",
            )
        )

    return BoundReport(
        eta=eta,
        preconditions_hold=gn > 4.0 * math.sqrt(Delta * log_term),
        entries=entries,
    )


def _representatives(tau: np.ndarray) -> np.ndarray:
    _, first = np.unique(tau, return_index=True)
    return first


def _min_pairwise_distance(points: np.ndarray) -> Optional[float]:
    if points.shape[0] < 2:
        return None
    diffs = points[:, None, :] - points[None, :, :]
    distances = np.linalg.norm(diffs, axis=2)
    return float(distances[np.triu_indices(points.shape[0], k=1)].min())


def check_assumptions(
    model: Union[ModelConfig, BlockModelSpec],
    n: Optional[int],
    eta: float,
) -> AssumptionReport:
    """Evaluate the perfect-clustering assumptions with exact constants at size n."""

    _check_eta(eta)
    spec = block_spec_from_config(model, n) if isinstance(model, ModelConfig) else model
    X = sbm_to_latent(spec)
    constants = model_constants(X, spec.tau, degree_corrected=spec.is_degree_corrected)
    size = X.n
    estimate = beta(constants.d, size, eta, constants.Delta, constants.gamma)
    n_min = int(constants.n_min or size)
    representatives = X.rows[_representatives(spec.tau)]

    a1_min_separation = None
    c_min = radius = dcsbm_threshold = None
    if spec.is_degree_corrected:
        c_min = constants.c_min
        directions = representatives / np.linalg.norm(representatives, axis=1)[:, None]
        separation = _min_pairwise_distance(directions)
        radius = None if separation is None else separation / 6.0
        dcsbm_threshold = 2.0 * estimate.value * math.sqrt(size / n_min) / c_min
    else:
        a1_min_separation = _min_pairwise_distance(representatives)

    report = AssumptionReport(
        n=size,
        eta=eta,
        d=constants.d,
        K=spec.K,
        n_min=n_min,
        Delta=constants.Delta,
        gamma=constants.gamma,
        beta=estimate.value,
        beta_hypothesis_violated=estimate.hypothesis_violated,
        beta_terms=beta_terms(constants.d, size, eta, constants.Delta, constants.gamma),
        a0_min_relative_gap=constants.min_relative_gap,
        a1_min_separation=a1_min_separation,
        a1_threshold=6.0 * estimate.value * math.sqrt(size / n_min),
        a2_gamma_n=constants.gamma_n,
        a2_threshold=4.0 * math.sqrt(constants.Delta * math.log(size / eta)),
        c_min=c_min,
        dcsbm_radius=radius,
        dcsbm_threshold=dcsbm_threshold,
    )
    logger.debug(
        "check_assumptions n=%d a0=%s a1=%s a2=%s", size, report.a0_distinct_eigenvalues, report.a1_separation, report.a2_gap
    )
    return report


# ---------------------------------------------------------------------------
# Sparse regime: a, b given as sums of α n^p log(n)^q, c = 1/n
# ---------------------------------------------------------------------------

Order = Tuple[float, float]
_ORDER_TOL = 1e-12
_SPLIT_RE = re.compile(r"(?<=[^eE^*(])(?=[+-])")


@dataclass(frozen=True)
class GrowthExpr:
    """Σ α n^p log(n)^q stored as {(p, q): α}."""

    terms: Dict[Order, float] = field(default_factory=dict)
    text: str = ""

    @classmethod
    def parse(cls, text: str) -> "GrowthExpr":
        """Parse sums of terms such as ``2*n^0.6``, ``n^0.5*log(n)^2`` or ``sqrt(n)``."""

        compact = text.replace(" ", "")
        if not compact:
            raise PreconditionError("growth expression must not be empty")
        terms: Dict[Order, float] = {}
        for piece in _SPLIT_RE.split(compact):
            sign = -1.0 if piece.startswith("-") else 1.0
            body = piece.lstrip("+-")
            coef, p, q = 1.0, 0.0, 0.0
            for factor in body.split("*"):
                base, _, exponent = factor.partition("^")
                try:
                    power = float(exponent) if exponent else 1.0
                    if base == "n":
                        p += power
                    elif base == "log(n)":
                        q += power
                    elif base == "sqrt(n)":
                        p += 0.5 * power
                    else:
                        coef *= float(base) ** power
                except ValueError:
                    raise PreconditionError(f"cannot parse growth term '{piece}' in '{text}'") from None
            terms[(p, q)] = terms.get((p, q), 0.0) + sign * coef
        return cls(terms={key: value for key, value in terms.items() if value != 0.0}, text=text)

    def __call__(self, n: float) -> float:
        log_n = math.log(n)
        return sum(alpha * n**p * log_n**q for (p, q), alpha in self.terms.items())

    def log_value(self, n: float) -> float:
        """log of the expression, stable for very large n."""

        log_n = math.log(n)
        logs = []
        signs = []
        for (p, q), alpha in self.terms.items():
            logs.append(math.log(abs(alpha)) + p * log_n + q * math.log(log_n))
            signs.append(math.copysign(1.0, alpha))
        if not logs:
            raise ModelValidationError(f"growth expression '{self.text}' is identically zero")
        top = max(logs)
        total = sum(s * math.exp(value - top) for s, value in zip(signs, logs))
        if total <= 0.0:
            raise ModelValidationError(f"growth expression '{self.text}' is not positive at n={n:g}")
        return top + math.log(total)

    def __sub__(self, other: "GrowthExpr") -> "GrowthExpr":
        terms = dict(self.terms)
        for key, alpha in other.terms.items():
            terms[key] = terms.get(key, 0.0) - alpha
        return GrowthExpr(
            terms={key: value for key, value in terms.items() if abs(value) > 1e-15},
            text=f"({self.text})-({other.text})",
        )

    @property
    def leading(self) -> Tuple[Order, float]:
        if not self.terms:
            return (-math.inf, -math.inf), 0.0
        order = max(self.terms)
        return order, self.terms[order]


def _compare(left: Order, right: Order) -> int:
    for a, b in zip(left, right):
        if abs(a - b) > _ORDER_TOL:
            return 1 if a > b else -1
    return 0


def _scale(order: Order, factor: float) -> Order:
    return order[0] * factor, order[1] * factor


def _plus(*orders: Order) -> Order:
    return sum(o[0] for o in orders), sum(o[1] for o in orders)


def _asymptotic(comparison: int) -> Optional[bool]:
    return None if comparison == 0 else comparison > 0


def _classify(a: GrowthExpr, b: GrowthExpr) -> Tuple[Optional[int], str, Optional[bool], Optional[bool]]:
    order_a, _ = a.leading
    order_b, _ = b.leading
    order_gap, coef_gap = (a - b).leading
    if coef_gap <= 0.0:
        raise ModelValidationError(f"sparse regime needs a > b asymptotically (got a={a.text}, b={b.text})")
    constant = (0.0, 0.0)
    if _compare(order_a, constant) <= 0 and _compare(order_b, constant) <= 0:
        return 1, "a = O(1), b = O(1): the assumptions cannot hold", False, False
    if _compare(order_gap, order_b) < 0:
        # a - b = o(b): needs a-b >> sqrt(log(n) b) and a-b >> n^(1/8) log(n)^(1/4) b^(3/4)
        a2 = _compare(order_gap, _plus((0.0, 0.5), _scale(order_b, 0.5)))
        a1 = _compare(order_gap, _plus((0.125, 0.25), _scale(order_b, 0.75)))
        return 4, "a - b = o(b)", _asymptotic(a1), _asymptotic(a2)
    if _compare(order_b, order_a) < 0:
        # b = o(a): needs b/sqrt(a) >> sqrt(log n) and b^(7/2)/a^(5/2) >> sqrt(n) log(n)
        a2 = _compare(_plus(order_b, _scale(order_a, -0.5)), (0.0, 0.5))
        a1 = _compare(_plus(_scale(order_b, 3.5), _scale(order_a, -2.5)), (0.5, 1.0))
        return 3, "b = o(a)", _asymptotic(a1), _asymptotic(a2)
    # b = Θ(a) = Θ(a - b): (A1) turns on b versus sqrt(n) log(n), (A2) on b versus log(n)
    a1 = _asymptotic(_compare(order_b, (0.5, 1.0)))
    a2 = _asymptotic(_compare(order_b, (0.0, 1.0)))
    return 2, "b = Theta(a) = Theta(a - b)", a1, a2


def sparse_row(a: float, b: float, n: float, eta: float) -> SparseRegimeRow:
    """Reduced inequalities for concrete a > b > 0 at size n."""

    if not 0.0 < b < a:
        raise ModelValidationError(f"sparse regime needs 0 < b < a (got a={a}, b={b})")
    return _sparse_row_logs(math.log(a), math.log(b), math.log(a - b), n, eta)


def _sparse_row_logs(log_a: float, log_b: float, log_gap: float, n: float, eta: float) -> SparseRegimeRow:
    log_sum = log_a + math.log1p(math.exp(log_b - log_a))
    log_m = min(log_b, log_gap - math.log(2.0))
    log_log = math.log(math.log(n / eta))
    a2 = 2.0 * log_m - log_sum - math.log(8.0) - log_log
    a1 = 0.5 * log_gap + 3.5 * log_m - 3.0 * log_sum - math.log(127.5) - 0.5 * math.log(n) - log_log
    return SparseRegimeRow(n=n, a=_safe_exp(log_a), b=_safe_exp(log_b), a1_log_ratio=a1, a2_log_ratio=a2)


def _safe_exp(value: float) -> float:
    return math.exp(value) if value < 709.0 else math.inf


def sparse_regime(
    a_expr: Union[str, GrowthExpr],
    b_expr: Union[str, GrowthExpr],
    n_grid: Iterable[float],
    eta: float = 0.05,
) -> SparseRegimeReport:
    """Evaluate the reduced assumption inequalities for B = (1/n)[[a, b], [b, a]] with equal blocks.

    (A2) reads min{b², (a-b)²/4}/(a+b) > 8 log(n/η) and (A1) reads
    √(a-b) min{b, (a-b)/2}^{7/2}/(a+b)³ > 127.5 √n log(n/η).
    """

    _check_eta(eta)
    a = a_expr if isinstance(a_expr, GrowthExpr) else GrowthExpr.parse(a_expr)
    b = b_expr if isinstance(b_expr, GrowthExpr) else GrowthExpr.parse(b_expr)
    case, description, predicted_a1, predicted_a2 = _classify(a, b)
    gap = a - b
    rows: List[SparseRegimeRow] = []
    for n in n_grid:
        if n < 2:
            raise PreconditionError(f"grid values must be at least 2 (got n={n})")
        try:
            log_a, log_b, log_gap = a.log_value(n), b.log_value(n), gap.log_value(n)
        except ModelValidationError as exc:
            raise ModelValidationError(f"sparse regime needs 0 < b < a at n={n:g}: {exc}") from exc
        rows.append(_sparse_row_logs(log_a, log_b, log_gap, float(n), eta))
    return SparseRegimeReport(
        a_expr=a.text,
        b_expr=b.text,
        eta=eta,
        case=case,
        case_description=description,
        predicted_a1=predicted_a1,
        predicted_a2=predicted_a2,
        rows=rows,
    )


__all__ = [
    "BOUND_NAMES",
    "BetaEstimate",
    "GrowthExpr",
    "ModelConstants",
    "beta",
    "bound_report",
    "check_assumptions",
    "gap_hypothesis_holds",
    "latent_eigenpairs",
    "beta_terms",
    "max_offdiagonal_row_sum",
    "model_constants",
    "noise_spectral_norm",
    "sparse_regime",
    "sparse_row",
]
