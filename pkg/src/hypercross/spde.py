"""Parametric diffusion demo on [-1, 1] with an affine coefficient.

    -(sigma(x, y) u')' = f,   u(-1) = u(1) = 0,
    sigma(x, y) = sigma_bar(x) + sum_j psi_j(x) y_j,   y in [-1, 1]^d.

Samples are solved with a conservative second-order finite difference
scheme; Legendre chaos coefficients come from tensor Gauss-Legendre
quadrature under the uniform probability measure dy/2 per coordinate.
Spatial norms use plain Lebesgue measure on [-1, 1].
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_banded
from scipy.special import eval_legendre

from .bounds import analytic_constant
from .errors import BoundViolated, EllipticityViolated, PreconditionViolated, SpecError
from .weights import TOL, CrossSpec, SmoothnessSequence, log_s_weight

MAX_D = 4


@dataclass(frozen=True)
class ModelConfig:
    """Closed-form families: sigma_bar constant, psi_j = c * exp(-decay * j) * cos(j pi x)."""

    d: int = 3
    N: int = 513
    c: float = 0.5
    decay: float = 1.5
    sigma_bar: float = 1.0
    f: float = 1.0
    rates: SmoothnessSequence = field(default_factory=lambda: SmoothnessSequence.affine(0.0, 1.0))

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["rates"] = self.rates.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelConfig":
        allowed = {"d", "N", "c", "decay", "sigma_bar", "f", "rates"}
        unknown = set(data) - allowed
        if unknown:
            raise SpecError(f"unknown keys in model config: {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k != "rates"}
        if "rates" in data:
            kwargs["rates"] = SmoothnessSequence.from_dict(data["rates"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str) -> "ModelConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class DiffusionModel:
    config: ModelConfig
    x: np.ndarray
    sigma_bar: np.ndarray
    psi: np.ndarray
    rhs: np.ndarray
    sigma_min_cert: float

    @property
    def d(self) -> int:
        return self.config.d

    @property
    def N(self) -> int:
        return self.config.N

    @property
    def h(self) -> float:
        return 2.0 / (self.N - 1)

    @property
    def rates(self) -> list[float]:
        return self.config.rates.rates(self.d)

    @property
    def psi_sup(self) -> np.ndarray:
        return np.max(np.abs(self.psi), axis=1)


def build_model(config: ModelConfig | None = None, **overrides) -> DiffusionModel:
    config = replace(config or ModelConfig(), **overrides)
    if not 1 <= config.d <= MAX_D:
        raise PreconditionViolated(f"need 1 <= d <= {MAX_D}")
    if config.N < 5 or config.N % 2 == 0:
        raise PreconditionViolated("grid size N must be odd and >= 5")
    config.rates.check()
    x = np.linspace(-1.0, 1.0, config.N)
    j = np.arange(1, config.d + 1)[:, None]
    psi = config.c * np.exp(-config.decay * j) * np.cos(j * np.pi * x[None, :])
    sigma_bar = np.full_like(x, config.sigma_bar)
    rhs = np.full_like(x, config.f)
    sigma_min = float(sigma_bar.min() - np.max(np.abs(psi), axis=1).sum())
    if not sigma_min > 0:
        raise EllipticityViolated(f"certified sigma_min = {sigma_min:.6g} is not positive")
    return DiffusionModel(config, x, sigma_bar, psi, rhs, sigma_min)


def check_conditions(model: DiffusionModel) -> dict[str, Any]:
    """Summability condition for the truncated expansion and the constant M."""
    sup = model.psi_sup
    rates = np.array(model.rates)
    value = float(np.sum(sup * np.exp(rates)) / (math.sqrt(3.0) * model.sigma_min_cert))
    spec = matching_spec(model)
    return {"condition_value": value, "passes": value < 1, "M_value": analytic_constant(spec)}


def matching_spec(model: DiffusionModel) -> CrossSpec:
    """Analytic (p = 0) spec with the model's rates; the spatial block is m = 1."""
    return CrossSpec.analytic(0.0, 0.0, 1, 2.0, 1.0, model.config.rates)


# -- finite differences --------------------------------------------------------

def _solve_dirichlet(sigma_nodes: np.ndarray, rhs: np.ndarray, h: float) -> np.ndarray:
    mid = 0.5 * (sigma_nodes[1:] + sigma_nodes[:-1])
    if not np.all(mid > 0):
        raise EllipticityViolated("diffusion coefficient is not positive on the grid")
    n = len(rhs) - 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -mid[1:-1]
    ab[1, :] = mid[:-1] + mid[1:]
    ab[2, :-1] = -mid[1:-1]
    u = np.zeros_like(rhs, dtype=float)
    u[1:-1] = solve_banded((1, 1), ab / h**2, rhs[1:-1])
    return u


def sigma_at(model: DiffusionModel, y: Sequence[float]) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (model.d,):
        raise PreconditionViolated(f"y must have {model.d} entries")
    if np.any(np.abs(y) > 1):
        raise PreconditionViolated("parameters must lie in [-1, 1]")
    return model.sigma_bar + y @ model.psi


def solve_sample(model: DiffusionModel, y: Sequence[float], rhs: np.ndarray | None = None) -> np.ndarray:
    """Nodal FD solution u(., y) including the boundary zeros."""
    f = model.rhs if rhs is None else np.asarray(rhs, dtype=float)
    return _solve_dirichlet(sigma_at(model, y), f, model.h)


def richardson_ratio(model: DiffusionModel, y: Sequence[float]) -> float:
    """max|u_N - u_2N| / max|u_2N - u_4N| on the coarse nodes (about 4 for order 2)."""
    N = model.N
    u1 = solve_sample(model, y)
    u2 = solve_sample(build_model(model.config, N=2 * N - 1), y)[::2]
    u4 = solve_sample(build_model(model.config, N=4 * N - 3), y)[::4]
    return float(np.max(np.abs(u1 - u2)) / np.max(np.abs(u2 - u4)))


def h1_norm(u: np.ndarray, h: float) -> float:
    du = np.diff(u) / h
    return float(math.sqrt(h * np.dot(du, du)))


def l2_norm(x: np.ndarray, u: np.ndarray) -> float:
    return float(math.sqrt(np.trapezoid(u * u, x)))


def hminus1_norm(model: DiffusionModel) -> float:
    """Dual norm of f through its Riesz representative w, -w'' = f."""
    w = _solve_dirichlet(np.ones_like(model.x), model.rhs, model.h)
    return h1_norm(w, model.h)


# -- chaos coefficients --------------------------------------------------------

def total_degree_set(d: int, D: int) -> list[tuple[int, ...]]:
    """All s in Z^d_+ with |s|_1 <= D, graded then lexicographic."""
    out = [s for s in itertools.product(range(D + 1), repeat=d) if sum(s) <= D]
    return sorted(out, key=lambda s: (sum(s), tuple(-v for v in s)))


def legendre_phi(n: int, y: np.ndarray) -> np.ndarray:
    """Orthonormal Legendre polynomial for the measure dy/2."""
    return math.sqrt(2 * n + 1) * eval_legendre(n, y)


@dataclass(frozen=True, eq=False)
class ChaosCoefficients:
    indices: tuple[tuple[int, ...], ...]
    values: np.ndarray
    n_q: int
    mean_sq_l2: float

    def __getitem__(self, s: tuple[int, ...]) -> np.ndarray:
        return self.values[self.indices.index(tuple(s))]

    def as_dict(self) -> dict[tuple[int, ...], np.ndarray]:
        return {s: self.values[i] for i, s in enumerate(self.indices)}


def legendre_coefficients(model: DiffusionModel, max_total_degree: int, n_q: int | None = None) -> ChaosCoefficients:
    """Tensor Gauss-Legendre projection of u(x, .) onto the total-degree Legendre basis."""
    D = max_total_degree
    n_q = D + 4 if n_q is None else n_q
    if n_q < D + 4:
        raise PreconditionViolated("need n_q >= max_total_degree + 4")
    nodes, weights = leggauss(n_q)
    weights = weights / 2.0
    indices = total_degree_set(model.d, D)
    phi = np.array([legendre_phi(n, nodes) for n in range(D + 1)])  # (D+1, n_q)
    acc = np.zeros((len(indices), model.N))
    mean_sq = []
    # nodes are visited in ascending multi-index order for a fixed reduction order
    for node in itertools.product(range(n_q), repeat=model.d):
        y = nodes[list(node)]
        w = float(np.prod(weights[list(node)]))
        u = solve_sample(model, y)
        basis = np.array([np.prod([phi[sj, nj] for sj, nj in zip(s, node)]) for s in indices])
        acc += w * np.outer(basis, u)
        mean_sq.append(w * l2_norm(model.x, u) ** 2)
    return ChaosCoefficients(tuple(indices), acc, n_q, math.fsum(mean_sq))


# -- coefficient bound ---------------------------------------------------------

@dataclass(frozen=True)
class CoefficientRow:
    s: tuple[int, ...]
    h1_norm: float
    bound: float
    margin: float


@dataclass(frozen=True)
class CoefficientReport:
    B_coef: float
    b: tuple[float, ...]
    norm_f_hminus1: float
    sigma_min: float
    rows: tuple[CoefficientRow, ...]

    @property
    def min_margin(self) -> float:
        return min(row.margin for row in self.rows)


def coefficient_bound(B: float, b: Sequence[float], s: Sequence[int]) -> float:
    """B * (|s|! / s!) * prod b_j^s_j."""
    multinomial = math.factorial(sum(s)) / math.prod(math.factorial(v) for v in s)
    return B * multinomial * math.prod(bj**v for bj, v in zip(b, s))


def verify_coefficient_bound(model: DiffusionModel, coeffs: ChaosCoefficients,
                             tol: float = 1e-6) -> CoefficientReport:
    norm_f = hminus1_norm(model)
    B = norm_f / model.sigma_min_cert
    b = tuple(float(v) for v in model.psi_sup / (math.sqrt(3.0) * model.sigma_min_cert))
    rows = []
    for s, u in zip(coeffs.indices, coeffs.values):
        norm = h1_norm(u, model.h)
        bound = coefficient_bound(B, b, s)
        margin = bound / norm if norm > 0 else math.inf
        rows.append(CoefficientRow(s, norm, bound, margin))
    report = CoefficientReport(B, b, norm_f, model.sigma_min_cert, tuple(rows))
    bad = [row for row in rows if row.margin < 1 - tol]
    if bad:
        raise BoundViolated(f"coefficient bound violated at s={bad[0].s} (margin {bad[0].margin:.6g})")
    return report


@dataclass(frozen=True)
class TruncationRow:
    T: float
    n_indices: int
    tail_norm: float
    bound_sum: float


def truncation_error_study(model: DiffusionModel, coeffs: ChaosCoefficients, spec: CrossSpec,
                           T_grid: Sequence[float], report: CoefficientReport | None = None) -> list[TruncationRow]:
    """H^1_0 norm of the discarded coefficients when keeping weight(s) <= T."""
    report = report or verify_coefficient_bound(model, coeffs)
    weights = [log_s_weight(spec, enumerate(s, start=1)) for s in coeffs.indices]
    out = []
    for T in T_grid:
        limit = math.log(T) + TOL
        dropped = [row for row, w in zip(report.rows, weights) if w > limit]
        out.append(TruncationRow(
            float(T),
            len(weights) - len(dropped),
            math.sqrt(math.fsum(row.h1_norm**2 for row in dropped)),
            math.fsum(row.bound for row in dropped),
        ))
    return out


def demo_report(config: ModelConfig, max_degree: int = 3, n_q: int | None = None,
                T_grid: Sequence[float] | None = None) -> dict[str, Any]:
    """Everything the spde-demo command prints, as plain JSON-ready data."""
    model = build_model(config)
    coeffs = legendre_coefficients(model, max_degree, n_q)
    report = verify_coefficient_bound(model, coeffs)
    spec = matching_spec(model)
    if T_grid is None:
        T_grid = [math.e**k for k in range(0, 2 * max_degree + 2)]
    return {
        "config": config.to_dict(),
        "sigma_min_cert": model.sigma_min_cert,
        "conditions": check_conditions(model),
        "norm_f_hminus1": report.norm_f_hminus1,
        "B_coef": report.B_coef,
        "b": list(report.b),
        "coefficients": [asdict(row) | {"s": list(row.s)} for row in report.rows],
        "truncation": [asdict(row) for row in truncation_error_study(model, coeffs, spec, T_grid, report)],
    }
