"""Transfer operators of the Gauss map restricted to digits ``<= A``.

The operator ``(L f)(x) = sum_{a<=A} (x+a)**(-2 sigma) * exp(u) * f(1/(x+a))`` is
discretized by polynomial collocation at Chebyshev-Lobatto points of [0, 1]:
``f`` is replaced by its interpolant, and the matrix row ``i`` evaluates ``L``
of each cardinal function at node ``x_i``. Every branch is an analytic
contraction, so eigenvalues converge geometrically in the node count.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .realcf import DomainError

DEFAULT_NODES = 32


class ConvergenceError(RuntimeError):
    pass


@lru_cache(maxsize=64)
def lobatto_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev-Lobatto nodes on [0, 1] (increasing) and barycentric weights."""
    j = np.arange(m)
    x = (1.0 - np.cos(np.pi * j / (m - 1))) / 2.0
    w = (-1.0) ** j
    w[0] *= 0.5
    w[-1] *= 0.5
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def cardinal_matrix(y: np.ndarray, m: int) -> np.ndarray:
    """``C[i, j] = c_j(y_i)`` for the degree ``m-1`` interpolant on the Lobatto grid."""
    x, w = lobatto_nodes(m)
    y = np.asarray(y, dtype=np.float64)
    diff = y[:, None] - x[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = w[None, :] / diff
        C = t / t.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    C[hit] = exact[hit].astype(np.float64)
    return C


def interpolate(values: np.ndarray, y) -> np.ndarray:
    """Evaluate the interpolant through ``values`` (at the Lobatto nodes) at ``y``."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    return cardinal_matrix(y, len(values)) @ values


@dataclass
class OperatorGrid:
    A: int
    sigma: float
    u: float
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    digits: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.nodes)

    def apply(self, f) -> np.ndarray:
        """Exact action of the operator on a callable ``f``, sampled at the nodes."""
        x = self.nodes
        return sum(np.exp(self.u) * (x + a) ** (-2 * self.sigma) * f(1.0 / (x + a)) for a in self.digits)


def build_operator(A: int, sigma: float, u: float = 0.0, m: int = DEFAULT_NODES, min_digit: int = 1) -> OperatorGrid:
    """Collocation matrix of the operator with branches ``min_digit <= a <= A``."""
    if A < 1:
        raise DomainError(f"A must be >= 1, got {A}")
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    if m < 8:
        raise DomainError(f"need at least 8 nodes, got {m}")
    x, bw = lobatto_nodes(m)
    digits = tuple(range(min_digit, A + 1))
    M = np.zeros((m, m))
    for a in digits:
        weight = math.exp(u) * (x + a) ** (-2.0 * sigma)
        M += weight[:, None] * cardinal_matrix(1.0 / (x + a), m)
    return OperatorGrid(A, sigma, u, x, bw, M, digits)


@dataclass
class SpectralData:
    lam: float
    eigenvector: np.ndarray
    residual: float
    m: int
    iterations: int


def dominant_eig(grid: OperatorGrid, tol: float = 1e-13, max_iter: int = 5000) -> SpectralData:
    """Dominant eigenpair by power iteration from the constant vector.

    The eigenvector is scaled to max 1. ``residual`` is
    ``max|M v - lam v| / (lam * max|v|)``.
    """
    M = grid.matrix
    v = np.ones(grid.m)
    lam = 0.0
    for it in range(1, max_iter + 1):
        Mv = M @ v
        lam = float(v @ Mv / (v @ v))
        scale = np.max(np.abs(Mv))
        if scale == 0.0:
            raise ConvergenceError("operator annihilated the iterate")
        res = float(np.max(np.abs(Mv - lam * v)) / abs(lam))
        v = Mv / scale
        if res < tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps (residual {res:.2e})")
    # Rayleigh refinement with the final iterate
    Mv = M @ v
    lam = float(v @ Mv / (v @ v))
    res = float(np.max(np.abs(Mv - lam * v)) / (abs(lam) * np.max(np.abs(v))))
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return SpectralData(lam, v / np.max(np.abs(v)), res, grid.m, it)


def eigenvalue(A: int, sigma: float, u: float = 0.0, m: int = DEFAULT_NODES) -> float:
    return dominant_eig(build_operator(A, sigma, u, m)).lam


@dataclass
class DimensionResult:
    A: int
    delta: float
    lo: float
    hi: float
    lam_lo: float
    lam_hi: float
    m: int
    delta_check: float
    m_check: int
    residual: float

    def as_record(self) -> dict:
        return asdict(self)


def _bisect_unit_eigenvalue(A, u, lo, hi, tol, m, max_iter=200):
    lam_lo = eigenvalue(A, lo, u, m)
    lam_hi = eigenvalue(A, hi, u, m)
    if not (lam_lo > 1.0 > lam_hi):
        raise DomainError(
            f"no root of lambda(sigma) = 1 in [{lo}, {hi}] for A={A}, u={u}: "
            f"lambda = {lam_lo:.6g}, {lam_hi:.6g}"
        )
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        lam = eigenvalue(A, mid, u, m)
        if lam > 1.0:
            lo, lam_lo = mid, lam
        else:
            hi, lam_hi = mid, lam
    return lo, hi, lam_lo, lam_hi


def solve_dimension(A: int, tol: float = 1e-12, m: int = DEFAULT_NODES) -> DimensionResult:
    """Hausdorff dimension of ``E_A``: the root of ``lambda(sigma, 0) = 1``.

    The root is bracketed in (0, 1) and bisected; it is recomputed with ``2m``
    nodes as a discretization check.
    """
    if A < 2:
        # E_1 is a single point; lambda(sigma) = phi**(-2 sigma) < 1 on (0, 1]
        raise DomainError(f"dimension is 0 (degenerate alphabet A={A})")
    lo, hi, lam_lo, lam_hi = _bisect_unit_eigenvalue(A, 0.0, 0.0, 1.0, tol, m)
    clo, chi, _, _ = _bisect_unit_eigenvalue(A, 0.0, 0.0, 1.0, tol, 2 * m)
    delta = 0.5 * (lo + hi)
    residual = dominant_eig(build_operator(A, delta, 0.0, m)).residual
    return DimensionResult(A, delta, lo, hi, lam_lo, lam_hi, m, 0.5 * (clo + chi), 2 * m, residual)


def solve_pole(A: int, w: float, tol: float = 1e-12, m: int = DEFAULT_NODES, window: float = 0.3) -> float:
    """``s0(w)``: the real ``sigma`` with ``lambda(sigma, w) = 1``."""
    if A < 2:
        raise DomainError(f"need A >= 2, got {A}")
    if abs(w) > window:
        raise DomainError(f"|w| = {abs(w)} is outside the window {window}")
    hi = 1.0
    while eigenvalue(A, hi, w, m) >= 1.0:
        hi *= 2
        if hi > 16:
            raise DomainError(f"could not bracket s0({w}) for A={A}")
    lo, hi, _, _ = _bisect_unit_eigenvalue(A, w, 0.0, hi, tol, m)
    return 0.5 * (lo + hi)


def operator_series_at_zero(A: int, sigma: float, w: float, depth: int, m: int = DEFAULT_NODES) -> float:
    """``(L#  sum_{n<depth} L^n 1)(0)``, where ``L#`` keeps only branches ``a >= 2``."""
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    M = build_operator(A, sigma, w, m).matrix
    v = np.ones(m)
    total = np.zeros(m)
    for _ in range(depth):
        total += v
        v = M @ v
    sharp = range(2, A + 1)
    g = interpolate(total, [1.0 / a for a in sharp])
    return float(sum(math.exp(w) * a ** (-2.0 * sigma) * ga for a, ga in zip(sharp, g)))


def exact_orbit_sum(A: int, sigma: float, w: float, depth: int) -> float:
    """``sum over strings of length <= depth, last digit >= 2, of q**(-2 sigma) * exp(w * length)``.

    Denominators are exact integers; only the final powers are floating point.
    """
    terms = []
    # strings are built by prepending digits; the continuant is symmetric in the
    # digit order, so the state (q_prev, q_cur) of the reversed string suffices
    qp = [1] * (A - 1)
    qc = list(range(2, A + 1))
    for length in range(1, depth + 1):
        scale = math.exp(w * length)
        terms.extend(scale * q ** (-2.0 * sigma) for q in qc)
        if length == depth:
            break
        nqp, nqc = [], []
        for a in range(1, A + 1):
            nqp.extend(qc)
            nqc.extend(a * c + p for p, c in zip(qp, qc))
        qp, qc = nqp, nqc
    return math.fsum(terms)


def cycle_expansion_dimension(A: int, max_period: int = 12) -> float:
    """Dimension of ``E_A`` from periodic orbits, independent of the collocation.

    Traces of ``L_sigma^n`` are sums over period-``n`` digit cycles; the
    Fredholm determinant ``det(1 - L_sigma)`` is truncated at ``max_period``
    and its zero in ``sigma`` is returned.
    """
    from scipy.optimize import brentq

    cycles = []  # per period: arrays of |h'(x*)| and sign of h'(x*)
    # continuants of all strings of length n: (p_prev, p_cur, q_prev, q_cur)
    pp, pc, qp, qc = np.array([1.0]), np.array([0.0]), np.array([0.0]), np.array([1.0])
    for n in range(1, max_period + 1):
        a = np.repeat(np.arange(1, A + 1, dtype=np.float64), pc.size)
        pp, pc, qp, qc = np.tile(pc, A), a * np.tile(pc, A) + np.tile(pp, A), np.tile(qc, A), a * np.tile(qc, A) + np.tile(qp, A)
        # fixed point of x -> (p_n + x p_{n-1}) / (q_n + x q_{n-1})
        # i.e. q_{n-1} x^2 + (q_n - p_{n-1}) x - p_n = 0, positive root
        b = qc - pp
        x = 2 * pc / (b + np.sqrt(b * b + 4 * qp * pc))
        deriv = 1.0 / (qc + x * qp) ** 2
        cycles.append((deriv, (-1.0) ** n))

    def det(sigma: float) -> float:
        traces = [np.sum(dv**sigma / (1.0 - sign * dv)) for dv, sign in cycles]
        c = [1.0]
        for k in range(1, max_period + 1):
            c.append(-sum(traces[j - 1] * c[k - j] for j in range(1, k + 1)) / k)
        return math.fsum(c)

    return brentq(det, 0.05, 0.999, xtol=1e-15, rtol=1e-15)
