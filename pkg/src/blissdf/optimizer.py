"""Joint minimization of the block-encoding scaling constant.

The objective is the penalized scalar

    Total(kappa, xi, A) = c_approx * Err(kappa, xi, A) + lambda(kappa, xi, A)

where Err is the squared Frobenius deviation between the shifted two-body
tensor and its factorized reconstruction, and lambda is the block-encoding
scaling constant of the shifted Hamiltonian. Minimizing Total over the shift
(kappa, xi) and the factors A_r trades a tiny factorization residual for a
much smaller lambda.

Gradients are analytic. The nuclear norm is nondifferentiable at zero
eigenvalues; there the subgradient sum_t sign(lambda_t) u_t u_t^T with
sign(0) = 0 is used, which is valid for any orthonormal eigenbasis, so no
smoothing or perturbation is needed. Descent is plain Adam, fully
deterministic for a fixed configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from blissdf.factorization import (
    FactorSet,
    LambdaBreakdown,
    initial_double_factorization,
    lambda_df,
)
from blissdf.hamiltonian import (
    Hamiltonian,
    effective_one_body,
    symmetrize_one_body,
)

PARAM_BLOCKS = ("kappa", "xi", "factors")


class ConfigError(ValueError):
    """Invalid optimization configuration (bad value or unknown key)."""


class NonFiniteCostError(ArithmeticError):
    """The cost became NaN or infinite during optimization."""

    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(
            f"cost is non-finite at iteration {iteration}; "
            "reduce the learning rate or c_approx"
        )


@dataclass(frozen=True)
class OptimizationConfig:
    """Hyperparameters for the penalized descent.

    ``c_approx`` set to None selects an automatic weight,
    1e3 * (initial lambda) / max(initial Err, 1e-12), clamped to
    [1e2, 1e9], so the penalty dominates without flattening the lambda
    signal. ``err_budget`` is not enforced during descent; it defines which
    iterates count as feasible when the best one is selected afterwards.
    """

    c_approx: float | None = None
    max_iters: int = 10000
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    rel_tol: float = 1e-7
    patience: int = 200
    seed: int = 0
    err_budget: float = 1e-6

    def __post_init__(self):
        if self.c_approx is not None and not self.c_approx > 0:
            raise ConfigError(f"c_approx must be positive, got {self.c_approx}")
        if (
            isinstance(self.max_iters, bool)
            or not isinstance(self.max_iters, int)
            or self.max_iters < 1
        ):
            raise ConfigError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("adam_beta1", "adam_beta2"):
            beta = getattr(self, name)
            if not 0.0 < beta < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {beta}")
        if not self.adam_epsilon > 0:
            raise ConfigError(f"adam_epsilon must be positive, got {self.adam_epsilon}")
        if self.rel_tol < 0:
            raise ConfigError(f"rel_tol must be nonnegative, got {self.rel_tol}")
        if (
            isinstance(self.patience, bool)
            or not isinstance(self.patience, int)
            or self.patience < 1
        ):
            raise ConfigError(f"patience must be a positive integer, got {self.patience}")
        if (
            isinstance(self.seed, bool)
            or not isinstance(self.seed, int)
            or not -(2**63) <= self.seed < 2**63
        ):
            raise ConfigError(f"seed must be a 64-bit integer, got {self.seed}")
        if self.err_budget < 0:
            raise ConfigError(f"err_budget must be nonnegative, got {self.err_budget}")

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizationConfig":
        """Build a config from a JSON-style dict; unknown keys are an error."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(
                f"unknown config keys {unknown}; valid keys are {sorted(known)}"
            )
        coerced = dict(data)
        for name in ("max_iters", "patience", "seed"):
            if name in coerced:
                value = coerced[name]
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"{name} must be an integer, got {value!r}")
        return cls(**coerced)

    @classmethod
    def from_json(cls, path: str | Path) -> "OptimizationConfig":
        """Load a config from a JSON file."""
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OptimizationReport:
    """Outcome of one optimization run.

    ``best_params`` is the feasible iterate (Err within err_budget of the
    initial Err) with the smallest lambda; the initial point itself is always
    feasible, so lambda never regresses past the initialization.
    ``total_trace`` has one row (total, err, lambda) per evaluated iterate,
    row 0 being the initialization.
    """

    best_params: tuple[float, np.ndarray, FactorSet]
    lambda_breakdown: LambdaBreakdown
    err_final: float
    total_trace: np.ndarray = field(repr=False)
    iterations_run: int
    stop_reason: str
    best_iteration: int
    initial_lambda: float
    initial_err: float
    c_approx_used: float


def _unpack_params(params) -> tuple[float, np.ndarray, np.ndarray]:
    kappa, xi, factors = params
    xi = symmetrize_one_body(np.asarray(xi, dtype=np.float64))
    factors = np.asarray(getattr(factors, "factors", factors), dtype=np.float64)
    factors = 0.5 * (factors + factors.transpose(0, 2, 1))
    return float(kappa), xi, factors


def _sign_subgradient(mat: np.ndarray) -> tuple[float, np.ndarray]:
    """Nuclear norm of a symmetric matrix and its subgradient U sign(D) U^T."""
    eigvals, eigvecs = np.linalg.eigh(mat)
    norm = float(np.abs(eigvals).sum())
    sub = (eigvecs * np.sign(eigvals)) @ eigvecs.T
    return norm, sub


def _evaluate(
    ham: Hamiltonian,
    kappa: float,
    xi: np.ndarray,
    factors: np.ndarray,
    c_approx: float,
    want_grad: bool,
):
    """Cost (total, err, lambda) and, optionally, its analytic gradient."""
    n = ham.n_orbitals
    n_e = ham.n_electrons
    rank = factors.shape[0]
    eye = np.eye(n)

    g_shifted = ham.g + 0.5 * (
        np.einsum("ij,kl->ijkl", xi, eye) + np.einsum("ij,kl->ijkl", eye, xi)
    )
    flat = factors.reshape(rank, n * n)
    recon = (flat.T @ flat).reshape(n, n, n, n)
    diff = g_shifted - recon
    err = float(np.vdot(diff, diff))

    h_eff = (
        effective_one_body(ham)
        + (n - n_e) * xi
        + (kappa + float(np.trace(xi))) * eye
    )
    one_body_norm, one_body_sub = _sign_subgradient(h_eff)

    factor_norms = np.empty(rank)
    factor_subs = np.empty_like(factors) if want_grad else None
    for r in range(rank):
        norm, sub = _sign_subgradient(factors[r])
        factor_norms[r] = norm
        if want_grad:
            factor_subs[r] = sub

    lam = float(0.5 * np.sum(factor_norms**2) + one_body_norm)
    total = c_approx * err + lam
    if not want_grad:
        return total, err, lam, None

    diff_mat = diff.reshape(n * n, n * n)
    grad_factors = -4.0 * c_approx * (diff_mat @ flat.T).T.reshape(rank, n, n)
    grad_factors += factor_norms[:, None, None] * factor_subs
    grad_factors = 0.5 * (grad_factors + grad_factors.transpose(0, 2, 1))

    grad_xi = 2.0 * c_approx * np.einsum("abkk->ab", diff)
    grad_xi += (n - n_e) * one_body_sub + float(np.trace(one_body_sub)) * eye
    grad_xi = symmetrize_one_body(grad_xi)

    grad_kappa = float(np.trace(one_body_sub))
    return total, err, lam, (grad_kappa, grad_xi, grad_factors)


def total_cost(
    ham: Hamiltonian, params, c_approx: float
) -> tuple[float, float, float]:
    """Evaluate the penalized objective at (kappa, xi, factors).

    Args:
        ham: Unshifted Hamiltonian.
        params: Triple (kappa, xi, factors); xi and the factor matrices are
            symmetrized on entry, and the factors may be a FactorSet or a
            raw (R, N, N) array.
        c_approx: Penalty weight on the factorization residual.

    Returns:
        (total, err, lambda) with total = c_approx * err + lambda.
    """
    kappa, xi, factors = _unpack_params(params)
    _check_shapes(ham, xi, factors)
    total, err, lam, _ = _evaluate(ham, kappa, xi, factors, c_approx, want_grad=False)
    return total, err, lam


def gradient(ham: Hamiltonian, params, c_approx: float):
    """Analytic gradient of total_cost in all three parameter blocks.

    Returns:
        (d_kappa, d_xi, d_factors) with d_xi symmetric and d_factors of
        shape (R, N, N). At eigenvalue crossings of the nuclear norms the
        sign(0) = 0 subgradient is returned.
    """
    kappa, xi, factors = _unpack_params(params)
    _check_shapes(ham, xi, factors)
    _, _, _, grads = _evaluate(ham, kappa, xi, factors, c_approx, want_grad=True)
    return grads


def _check_shapes(ham: Hamiltonian, xi: np.ndarray, factors: np.ndarray):
    n = ham.n_orbitals
    if xi.shape != (n, n):
        raise ValueError(f"xi shape {xi.shape} does not match N={n}")
    if factors.ndim != 3 or factors.shape[1:] != (n, n):
        raise ValueError(
            f"factors shape {factors.shape} does not match (R, {n}, {n})"
        )


def _resolve_c_approx(config, init_err: float, init_lambda: float) -> float:
    if config.c_approx is not None:
        return float(config.c_approx)
    auto = 1e3 * init_lambda / max(init_err, 1e-12)
    return float(min(max(auto, 1e2), 1e9))


def optimize(
    ham: Hamiltonian,
    rank: int,
    config: OptimizationConfig,
    free: tuple[str, ...] = PARAM_BLOCKS,
) -> OptimizationReport:
    """Minimize Total over the symmetry shift and the factor matrices.

    Starts from kappa = 0, xi = 0 and the eigendecomposition-based double
    factorization of the unshifted two-body tensor, then runs Adam with the
    configured hyperparameters. Descent stops when the best Total seen fails
    to improve by a relative rel_tol over a window of ``patience``
    iterations, or at max_iters.

    The returned parameters are the iterate with the smallest lambda among
    those whose Err stays within ``config.err_budget`` of the initial Err.
    The initial point is included, so the reported lambda never exceeds the
    initialization's.

    Args:
        ham: Hamiltonian to shift and factorize.
        rank: Number of factors R.
        config: Hyperparameters; config.seed is recorded for provenance (the
            descent itself is deterministic and uses no randomness).
        free: Parameter blocks to update, a subset of ("kappa", "xi",
            "factors"). Frozen blocks keep their initial values exactly;
            the default frees everything.

    Returns:
        OptimizationReport; its lambda_breakdown and err_final are
        recomputed from best_params and match the trace row at
        best_iteration.

    Raises:
        NonFiniteCostError: If the cost evaluates to NaN or infinity.
        IndefiniteTensorError: Propagated from the initialization when the
            two-body tensor is not factorizable.
        ValueError: On an unknown ``free`` block name or an invalid rank.
    """
    unknown = set(free) - set(PARAM_BLOCKS)
    if unknown:
        raise ValueError(f"unknown free blocks {sorted(unknown)}; valid: {PARAM_BLOCKS}")

    n = ham.n_orbitals
    init_factors = initial_double_factorization(ham.g, rank)

    kappa = 0.0
    xi = np.zeros((n, n))
    factors = np.array(init_factors.factors)

    _, init_err, init_lambda = total_cost(ham, (kappa, xi, factors), 1.0)
    c_approx = _resolve_c_approx(config, init_err, init_lambda)

    mask_kappa = 1.0 if "kappa" in free else 0.0
    mask_xi = 1.0 if "xi" in free else 0.0
    mask_factors = 1.0 if "factors" in free else 0.0

    m_kappa = v_kappa = 0.0
    m_xi = np.zeros_like(xi)
    v_xi = np.zeros_like(xi)
    m_factors = np.zeros_like(factors)
    v_factors = np.zeros_like(factors)
    beta1, beta2 = config.adam_beta1, config.adam_beta2
    lr, eps = config.learning_rate, config.adam_epsilon

    trace = []
    best_total = math.inf
    anchor_total = math.inf
    anchor_iter = 0
    best_lambda = math.inf
    best_state = None
    best_iteration = 0
    stop_reason = "max_iters"

    for iteration in range(config.max_iters + 1):
        total, err, lam, grads = _evaluate(
            ham, kappa, xi, factors, c_approx, want_grad=True
        )
        if not (math.isfinite(total) and math.isfinite(err) and math.isfinite(lam)):
            raise NonFiniteCostError(iteration)
        trace.append((total, err, lam))

        if err <= init_err + config.err_budget and lam < best_lambda:
            best_lambda = lam
            best_state = (kappa, xi.copy(), factors.copy())
            best_iteration = iteration

        if total < best_total:
            best_total = total
        if not math.isfinite(anchor_total) or (
            anchor_total - best_total
            >= config.rel_tol * max(abs(anchor_total), 1.0)
        ):
            anchor_total = best_total
            anchor_iter = iteration
        elif iteration - anchor_iter >= config.patience:
            stop_reason = "converged"
            break

        if iteration == config.max_iters:
            break

        grad_kappa, grad_xi, grad_factors = grads
        grad_kappa *= mask_kappa
        grad_xi = grad_xi * mask_xi
        grad_factors = grad_factors * mask_factors

        step = iteration + 1
        bias1 = 1.0 - beta1**step
        bias2 = 1.0 - beta2**step

        m_kappa = beta1 * m_kappa + (1.0 - beta1) * grad_kappa
        v_kappa = beta2 * v_kappa + (1.0 - beta2) * grad_kappa**2
        kappa -= lr * (m_kappa / bias1) / (math.sqrt(v_kappa / bias2) + eps)

        m_xi = beta1 * m_xi + (1.0 - beta1) * grad_xi
        v_xi = beta2 * v_xi + (1.0 - beta2) * grad_xi**2
        xi = xi - lr * (m_xi / bias1) / (np.sqrt(v_xi / bias2) + eps)

        m_factors = beta1 * m_factors + (1.0 - beta1) * grad_factors
        v_factors = beta2 * v_factors + (1.0 - beta2) * grad_factors**2
        factors = factors - lr * (m_factors / bias1) / (
            np.sqrt(v_factors / bias2) + eps
        )

    best_kappa, best_xi, best_factor_arr = best_state
    best_factor_set = FactorSet(factors=best_factor_arr)
    _, err_final, _ = total_cost(
        ham, (best_kappa, best_xi, best_factor_set), c_approx
    )
    h_eff_best = (
        effective_one_body(ham)
        + (n - ham.n_electrons) * best_xi
        + (best_kappa + float(np.trace(best_xi))) * np.eye(n)
    )
    breakdown = lambda_df(best_factor_set, h_eff_best)

    return OptimizationReport(
        best_params=(best_kappa, best_xi, best_factor_set),
        lambda_breakdown=breakdown,
        err_final=err_final,
        total_trace=np.array(trace),
        iterations_run=len(trace) - 1,
        stop_reason=stop_reason,
        best_iteration=best_iteration,
        initial_lambda=init_lambda,
        initial_err=init_err,
        c_approx_used=c_approx,
    )
