"""Power-law fits of counting data against spectral predictions."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from . import spectral
from .enumeration import CountTable, ThickenedWindow, enumerate_complex, enumerate_real, sigma_count, thickened_count
from .realcf import DomainError


@dataclass
class PowerLawFit:
    slope: float
    intercept: float
    stderr: float
    slope_stderr: float
    n_min: int
    n_max: int
    points: int

    def predict(self, N) -> np.ndarray:
        return np.exp(self.intercept) * np.asarray(N, dtype=np.float64) ** self.slope

    def as_record(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "slope_stderr": self.slope_stderr,
            "range": [self.n_min, self.n_max],
            "points": self.points,
        }


def fit_exponent(samples: Iterable[tuple[int, float]]) -> PowerLawFit:
    """Least-squares line through ``(log N, log count)``; zero counts are skipped."""
    pts = [(int(n), float(c)) for n, c in samples if c > 0]
    if len(pts) < 3:
        raise DomainError(f"need at least 3 samples with positive counts, got {len(pts)}")
    x = np.log([n for n, _ in pts])
    y = np.log([c for _, c in pts])
    X = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - (slope * x + intercept)
    dof = len(pts) - 2
    s = math.sqrt(float(resid @ resid) / dof) if dof > 0 else 0.0
    sxx = float(((x - x.mean()) ** 2).sum())
    return PowerLawFit(
        slope=float(slope),
        intercept=float(intercept),
        stderr=s,
        slope_stderr=s / math.sqrt(sxx) if sxx > 0 else math.inf,
        n_min=min(n for n, _ in pts),
        n_max=max(n for n, _ in pts),
        points=len(pts),
    )


def dyadic_grid(lo_exp: int, hi_exp: int) -> list[int]:
    return [2**k for k in range(lo_exp, hi_exp + 1)]


def omega_samples(table: CountTable, N_grid: Sequence[int]) -> list[tuple[int, int]]:
    cum = table.cumulative()
    return [(N, int(cum[N])) for N in N_grid]


def estimate_B(table: CountTable, w: float, s0_w: float, N_grid: Sequence[int]) -> list[tuple[int, float]]:
    """``Psi_w(N) / N**(2 s0(w))`` along ``N_grid``; should level off at ``B(w)``."""
    if max(N_grid) > table.N:
        raise DomainError(f"table covers n <= {table.N}, grid needs {max(N_grid)}")
    psi = np.cumsum(table.weighted_at(w))
    return [(int(N), float(psi[N] / float(N) ** (2 * s0_w))) for N in N_grid]


@dataclass
class SmoothingRecord:
    N: int
    width: int
    thickened: int
    sigma: int
    omega: int
    ratio: float


@dataclass
class SmoothingReport:
    A: int
    gamma: float
    delta: float
    records: list[SmoothingRecord]
    fit: PowerLawFit
    predicted: float
    window_fit: PowerLawFit | None
    predicted_window: float
    inclusion_ok: bool

    def as_record(self) -> dict:
        return {
            "A": self.A,
            "gamma": self.gamma,
            "delta": self.delta,
            "fit": self.fit.as_record(),
            "prediction": self.predicted,
            "window_fit": None if self.window_fit is None else self.window_fit.as_record(),
            "window_prediction": self.predicted_window,
            "inclusion_ok": self.inclusion_ok,
            "samples": [asdict(r) for r in self.records],
        }


def smoothing_experiment(
    A: int,
    gamma: float,
    N_grid: Sequence[int],
    delta: float | None = None,
    table: CountTable | None = None,
) -> SmoothingReport:
    """Counts over the windows ``[N - floor(N eps), N]`` and their growth exponent.

    With ``eps = N**(-gamma/2)`` the window width grows like ``N**(1 - gamma/2)``,
    so the thickened count should grow like ``N**(2 delta - gamma/2)``.
    ``ratio`` is ``thickened / (2 * width * N**(2 delta - 1))``.
    """
    N_grid = sorted(N_grid)
    if table is None:
        table = enumerate_real(A, max(N_grid), collect_lengths=False)
    if delta is None:
        delta = spectral.solve_dimension(A).delta
    cum = table.cumulative()
    records = []
    inclusion_ok = True
    for N in N_grid:
        win = ThickenedWindow(N, gamma)
        th = thickened_count(table, win)
        sig = sigma_count(table, N)
        om = int(cum[N])
        inclusion_ok &= sig <= th <= om
        ratio = th / (2 * win.width * N ** (2 * delta - 1)) if win.width else math.nan
        records.append(SmoothingRecord(N, win.width, th, sig, om, ratio))
    fit = fit_exponent((r.N, r.thickened) for r in records)
    widths = [(r.N, r.width) for r in records if r.width > 0]
    window_fit = fit_exponent(widths) if len(widths) >= 3 else None
    return SmoothingReport(
        A=A,
        gamma=gamma,
        delta=delta,
        records=records,
        fit=fit,
        predicted=2 * delta - gamma / 2,
        window_fit=window_fit,
        predicted_window=1 - gamma / 2,
        inclusion_ok=bool(inclusion_ok),
    )


def complex_exponent_fit(
    d: int,
    alphabet: Sequence,
    N_grid: Sequence[int],
    table: CountTable | None = None,
    workers: int = 1,
) -> PowerLawFit:
    """Fit ``|Omega_{N,A_d}|`` (keyed by height squared) against ``N``.

    The slope estimates the dimension of ``E_{A_d}`` itself, because
    ``ht**2 <= N`` bounds denominators by ``sqrt(N)``.
    """
    if not alphabet:
        raise DomainError("empty alphabet: no data to fit")
    if table is None:
        table = enumerate_complex(d, alphabet, max(N_grid), w_grid=(), workers=workers)
    return fit_exponent(omega_samples(table, N_grid))


# -- reports ---------------------------------------------------------------


def samples_csv(samples: Sequence[tuple[int, float]], exponent: float) -> str:
    """CSV of ``N, count, predicted`` with the prefactor fitted at fixed exponent."""
    pos = [(n, c) for n, c in samples if c > 0]
    logc = np.mean([math.log(c) - exponent * math.log(n) for n, c in pos]) if pos else 0.0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "count", "predicted"])
    for n, c in samples:
        w.writerow([n, c, repr(float(math.exp(logc) * n**exponent))])
    return buf.getvalue()


@dataclass
class Check:
    name: str
    measured: float
    predicted: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: measured={self.measured!r} predicted={self.predicted!r} "
            f"tol={self.tolerance!r}" + (f" ({self.detail})" if self.detail else "")
        )


@dataclass
class VerifyConfig:
    A: int = 2
    N_max: int = 2**16
    N_min: int = 2**10
    gamma: float = 0.5
    depth: int = 10
    m: int = spectral.DEFAULT_NODES
    identity_only: bool = False
    delta_override: float | None = None  # test hook: inject a wrong dimension
    workers: int = 1
    identity_sigmas: tuple[float, ...] = (0.7, 0.8)
    identity_ws: tuple[float, ...] = (0.0, 0.1)


IDENTITY_TOL = 1e-8
EXPONENT_TOL = 0.03
SMOOTHING_TOL = 0.05
WINDOW_TOL = 0.02


def identity_checks(A: int, sigmas, ws, depth: int, m: int) -> list[Check]:
    checks = []
    for sigma in sigmas:
        for w in ws:
            op = spectral.operator_series_at_zero(A, sigma, w, depth, m)
            orbit = spectral.exact_orbit_sum(A, sigma, w, depth)
            checks.append(
                Check(
                    f"identity A={A} sigma={sigma} w={w} depth={depth}",
                    op,
                    orbit,
                    IDENTITY_TOL,
                    abs(op - orbit) <= IDENTITY_TOL,
                )
            )
    return checks


def run_verification(cfg: VerifyConfig) -> list[Check]:
    """Operator identity, Omega exponent and smoothing exponent checks."""
    checks = identity_checks(cfg.A, cfg.identity_sigmas, cfg.identity_ws, cfg.depth, cfg.m)
    if cfg.identity_only:
        return checks
    delta = spectral.solve_dimension(cfg.A, m=cfg.m).delta if cfg.delta_override is None else cfg.delta_override
    lo = max(int(math.log2(cfg.N_min)), 2)
    hi = int(math.log2(cfg.N_max))
    if hi - lo < 3:
        raise DomainError("need at least four dyadic sample points")
    # the lowest octave is dropped to limit pre-asymptotic bias
    grid = dyadic_grid(lo + 1, hi)
    table = enumerate_real(cfg.A, 2**hi, collect_lengths=False, workers=cfg.workers)
    fit = fit_exponent(omega_samples(table, grid))
    checks.append(
        Check(
            f"omega exponent A={cfg.A} N=2^{lo + 1}..2^{hi}",
            fit.slope,
            2 * delta,
            EXPONENT_TOL,
            abs(fit.slope - 2 * delta) <= EXPONENT_TOL,
        )
    )
    rep = smoothing_experiment(cfg.A, cfg.gamma, grid, delta=delta, table=table)
    checks.append(
        Check(
            f"smoothing exponent gamma={cfg.gamma}",
            rep.fit.slope,
            rep.predicted,
            SMOOTHING_TOL,
            abs(rep.fit.slope - rep.predicted) <= SMOOTHING_TOL,
        )
    )
    if rep.window_fit is not None:
        checks.append(
            Check(
                f"window exponent gamma={cfg.gamma}",
                rep.window_fit.slope,
                rep.predicted_window,
                WINDOW_TOL,
                abs(rep.window_fit.slope - rep.predicted_window) <= WINDOW_TOL,
            )
        )
    checks.append(Check("inclusion Sigma <= Sigma(eps) <= Omega", float(rep.inclusion_ok), 1.0, 0.0, rep.inclusion_ok))
    return checks
