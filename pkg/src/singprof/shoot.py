"""Boundary value problem for the angular profile, solved by shooting.

The profile of a separable singular solution is the trajectory of the pole
IVP that first vanishes exactly at the equator theta = pi/2.  The shooting
function

    F(alpha) = theta0(alpha) - pi/2        (no zero before pi - 1e-3 => F = +1)

is scanned for sign changes on a geometric alpha grid and each bracket is
bisected.  The uniqueness results say at most one positive solution exists,
so multiple disjoint brackets indicate a numerical defect and surface as an
error rather than a silent pick.

For N = 2 the drift term vanishes and the ODE v'' + ell v + v^q = 0 conserves
E(v, v') = v'^2/2 + ell v^2/2 + v^{q+1}/(q+1); the pole value m = v(0) of the
profile then solves the half-period equation

    int_0^m dxi / sqrt(2 (E(m) - E(xi))) = pi/2,

an independent quadrature oracle for the shooting result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ivp
from .params import Params, classify, Existence
from .quadrature import gauss_panels

__all__ = [
    "ProfileSolution",
    "NoRootError",
    "MultipleRootsError",
    "shooting_function",
    "solve_profile",
    "count_bvp_roots",
    "quadrature_oracle_2d",
    "eval_separable",
]

HALF_PI = math.pi / 2.0
SCAN_RANGE_DEFAULT = (1e-4, 1e4)
SCAN_POINTS_DEFAULT = 400
# Tolerances: scans only need the sign of F, bisection needs theta0 to ~1e-12.
SCAN_TOL = 1e-9
REFINE_TOL = 1e-12
# Integration horizon for shooting evaluations: a zero past this point cannot
# flip the sign of F, so stopping early only saves work.
SHOOT_THETA_MAX = HALF_PI + 0.2


class NoRootError(RuntimeError):
    """The shooting scan found no sign change: no profile in the alpha range."""

    def __init__(self, msg: str, scan_table: list[tuple[float, float]]):
        super().__init__(msg)
        self.scan_table = scan_table


class MultipleRootsError(RuntimeError):
    """The shooting scan found several disjoint brackets (numerical defect)."""

    def __init__(self, msg: str, brackets: list[tuple[float, float]]):
        super().__init__(msg)
        self.brackets = brackets


@dataclass
class ProfileSolution:
    """The shot profile: pole value alpha_star, trajectory, and residuals."""

    params: Params
    alpha_star: float
    trajectory: ivp.Trajectory
    boundary_slope: float
    ode_residual_max: float
    bc_residual: float

    def omega(self, theta):
        """Profile value on [0, pi/2] from the dense trajectory."""
        return self.trajectory.value(theta)

    def to_dict(self, trajectory_csv_path: str | None = None) -> dict:
        doc = {
            "params": self.params.to_dict(),
            "alpha_star": self.alpha_star,
            "boundary_slope": self.boundary_slope,
            "residuals": {
                "ode_residual_max": self.ode_residual_max,
                "bc_residual": self.bc_residual,
                "first_zero_offset": (self.trajectory.first_zero or math.nan) - HALF_PI,
            },
        }
        if trajectory_csv_path is not None:
            doc["trajectory_csv_path"] = str(trajectory_csv_path)
        return doc


def shooting_function(p: Params, alpha: float, tol: float = SCAN_TOL) -> float:
    """F(alpha) = theta0(alpha) - pi/2, with +1 when no zero occurs."""
    traj = ivp.integrate(
        p, alpha, theta_max=SHOOT_THETA_MAX, tol=tol, stop_at_first_zero=True
    )
    if traj.first_zero is None:
        return 1.0
    return traj.first_zero - HALF_PI


def _geometric_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def _scan_brackets(
    p: Params, grid: np.ndarray, tol: float
) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    table = [(float(a), shooting_function(p, float(a), tol)) for a in grid]
    brackets = []
    for (a, fa), (b, fb) in zip(table[:-1], table[1:]):
        if (fa > 0) != (fb > 0):
            brackets.append((a, b))
    return brackets, table


def _bisect_alpha(p: Params, lo: float, hi: float, tol: float) -> float:
    flo = shooting_function(p, lo, tol)
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        fm = shooting_function(p, mid, tol)
        if fm == 0.0:
            return mid
        if (flo > 0) != (fm > 0):
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _snap_to_canonical_cell(
    p: Params, alpha_rough: float, grid: np.ndarray, tol: float
) -> tuple[float, float] | None:
    """Canonical scan cell around a rough root, so warm and cold starts bisect
    the same bracket and produce bit-identical results."""
    k = int(np.searchsorted(grid, alpha_rough)) - 1
    lo_i = max(0, k - 1)
    hi_i = min(grid.size - 1, k + 2)
    vals = [(grid[i], shooting_function(p, float(grid[i]), tol)) for i in range(lo_i, hi_i + 1)]
    for (a, fa), (b, fb) in zip(vals[:-1], vals[1:]):
        if (fa > 0) != (fb > 0):
            return float(a), float(b)
    return None


def solve_profile(
    p: Params,
    tol: float = 1e-10,
    *,
    force: bool = False,
    alpha_range: tuple[float, float] = SCAN_RANGE_DEFAULT,
    n_scan: int = SCAN_POINTS_DEFAULT,
    alpha_hint: float | None = None,
) -> ProfileSolution:
    """Shoot for the profile: the alpha whose trajectory first vanishes at pi/2.

    Scans F on a geometric grid over ``alpha_range`` (400 points by default),
    bisects the unique sign-change bracket to 1e-12 relative in alpha, and
    re-integrates the winning trajectory at high accuracy.  Raises
    ``NoRootError`` (carrying the scan table) when no bracket exists --
    including, unless ``force`` is set, when the regime classifier already
    proves nonexistence -- and ``MultipleRootsError`` when several disjoint
    brackets appear.

    ``alpha_hint`` (e.g. the neighbouring sweep point's alpha_star) skips the
    full scan: a small scan around the hint locates the root, which is then
    snapped to its canonical grid cell so the result is identical to a cold
    start.
    """
    grid = _geometric_grid(alpha_range[0], alpha_range[1], n_scan)
    scan_tol = min(SCAN_TOL, tol * 10.0)

    bracket: tuple[float, float] | None = None
    if alpha_hint is not None and alpha_range[0] < alpha_hint < alpha_range[1]:
        warm_grid = _geometric_grid(alpha_hint / 4.0, alpha_hint * 4.0, 48)
        warm_brackets, _ = _scan_brackets(p, warm_grid, scan_tol)
        if len(warm_brackets) == 1:
            lo, hi = warm_brackets[0]
            # rough root, then snap to the canonical cold-scan cell
            flo = shooting_function(p, lo, scan_tol)
            while hi - lo > 1e-3 * hi:
                mid = 0.5 * (lo + hi)
                fm = shooting_function(p, mid, scan_tol)
                if (flo > 0) != (fm > 0):
                    hi = mid
                else:
                    lo, flo = mid, fm
            bracket = _snap_to_canonical_cell(p, 0.5 * (lo + hi), grid, scan_tol)

    if bracket is None:
        regime = classify(p)
        proved_absent = regime.existence is Existence.NOT_EXISTS
        brackets, table = _scan_brackets(p, grid, scan_tol)
        if proved_absent and not force:
            extra = (
                f"; scan nevertheless found {len(brackets)} bracket(s) -- "
                "pass force=True to explore" if brackets else ""
            )
            raise NoRootError(
                "profile classified nonexistent "
                f"({', '.join(regime.applied_results)}){extra}",
                table,
            )
        if len(brackets) == 0:
            raise NoRootError(
                f"no sign change of the shooting function on "
                f"[{alpha_range[0]:g}, {alpha_range[1]:g}] ({n_scan} points)",
                table,
            )
        if len(brackets) > 1:
            raise MultipleRootsError(
                f"{len(brackets)} disjoint shooting brackets "
                "(uniqueness results admit at most one positive solution)",
                brackets,
            )
        bracket = brackets[0]

    refine_tol = min(tol, REFINE_TOL)
    alpha_star = _bisect_alpha(p, bracket[0], bracket[1], refine_tol)

    # High-accuracy trajectory for residual evaluation; store a uniform grid
    # on [0, pi/2] for serialization.
    tol_final = min(tol, 1e-13)
    traj = ivp.integrate(
        p,
        alpha_star,
        theta_max=SHOOT_THETA_MAX,
        tol=tol_final,
        theta_grid=np.linspace(0.0, HALF_PI, 513),
    )
    if traj.first_zero is None:
        raise NoRootError(
            f"refined trajectory at alpha={alpha_star!r} lost its zero", []
        )

    boundary_slope = float(traj.derivative(HALF_PI))
    bc_residual = abs(float(traj.value(HALF_PI)))
    sample = np.linspace(0.01, HALF_PI - 0.01, 257)
    ode_residual_max = float(np.max(np.abs(traj.ode_residual(sample))))
    return ProfileSolution(
        params=p,
        alpha_star=alpha_star,
        trajectory=traj,
        boundary_slope=boundary_slope,
        ode_residual_max=ode_residual_max,
        bc_residual=bc_residual,
    )


def count_bvp_roots(
    p: Params, alpha_lo: float, alpha_hi: float, n_scan: int
) -> int:
    """Number of sign-change brackets of F on a geometric alpha grid."""
    if not 0 < alpha_lo < alpha_hi:
        raise ValueError(f"need 0 < alpha_lo < alpha_hi, got [{alpha_lo}, {alpha_hi}]")
    if n_scan < 2:
        raise ValueError(f"need n_scan >= 2, got {n_scan}")
    brackets, _ = _scan_brackets(p, _geometric_grid(alpha_lo, alpha_hi, n_scan), SCAN_TOL)
    return len(brackets)


def _period_integral(m: float, q: float, ell: float, quad_tol: float = 1e-12) -> float:
    """Time for the N=2 oscillator to fall from v = m (at rest) to v = 0.

    Returns +inf when the trajectory turns around before reaching zero.  The
    substitution xi = m cos(delta) maps the inverse-square-root endpoint
    singularity to a smooth integrand on [0, pi/2].
    """
    f_m = ell * m + m**q
    energy_m = ell * m * m / 2.0 + m ** (q + 1.0) / (q + 1.0)
    if f_m <= 0.0 or energy_m <= 0.0:
        return math.inf

    def integrand(delta):
        s = np.sin(delta)
        # 1 - cos(delta)^(q+1) without cancellation near delta = 0
        one_minus_pow = -np.expm1((q + 1.0) * np.log1p(-2.0 * np.sin(delta / 2.0) ** 2))
        gap = ell * m * m * s * s / 2.0 + m ** (q + 1.0) * one_minus_pow / (q + 1.0)
        return m * s / np.sqrt(2.0 * gap)

    prev = None
    for n_panels in (1, 2, 4, 8, 16, 32, 64):
        x, w = gauss_panels(0.0, HALF_PI, n_panels, 48)
        val = float(np.dot(w, integrand(x)))
        if prev is not None and abs(val - prev) <= quad_tol * abs(val):
            return val
        prev = val
    return prev


def quadrature_oracle_2d(
    q: float,
    ell: float,
    *,
    m_range: tuple[float, float] = (1e-6, 1e6),
    n_scan: int = 200,
) -> float:
    """Pole value m of the N=2 profile from the half-period equation.

    Bisects the strictly decreasing time map T(m) to 1e-12 relative in m;
    raises ``NoRootError`` when T stays below pi/2 (or never reaches zero) on
    the whole scan range.
    """
    if not q > 1:
        raise ValueError(f"exponent q must be > 1, got {q}")

    def period_gap(m: float) -> float:
        t = _period_integral(m, q, ell)
        return 1.0 if math.isinf(t) else t - HALF_PI

    grid = np.geomspace(m_range[0], m_range[1], n_scan)
    table = [(float(m), period_gap(float(m))) for m in grid]
    brackets = [
        (a, b)
        for (a, fa), (b, fb) in zip(table[:-1], table[1:])
        if (fa > 0) != (fb > 0)
    ]
    if not brackets:
        raise NoRootError(
            f"half-period equation has no root for q={q}, ell={ell} on "
            f"[{m_range[0]:g}, {m_range[1]:g}]",
            table,
        )
    lo, hi = brackets[0]
    flo = period_gap(lo)
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        fm = period_gap(mid)
        if fm == 0.0:
            return mid
        if (flo > 0) != (fm > 0):
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def eval_separable(sol: ProfileSolution, x) -> float:
    """Separable singular solution u(x) = |x|^(-2/(q-1)) * omega(x/|x|).

    ``x`` is a point of the closed upper half-space with x[-1] >= 0, x != 0;
    the profile is interpolated at colatitude arccos(x_N / |x|).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (sol.params.dim,):
        raise ValueError(f"expected a point in R^{sol.params.dim}, got shape {x.shape}")
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise ValueError("the separable solution is singular at the origin")
    if x[-1] < 0.0:
        raise ValueError("point lies outside the closed upper half-space")
    if x[-1] == 0.0:
        return 0.0
    theta = math.acos(min(1.0, x[-1] / r))
    power = -2.0 / (sol.params.q - 1.0)
    return r**power * float(sol.omega(theta))
