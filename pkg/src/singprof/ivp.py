"""Singular initial value problem for the angular profile ODE.

In the colatitude theta measured from the north pole, an axisymmetric profile
solves

    v'' + (N-2) cot(theta) v' + ell v + |v|^(q-1) v = 0,
    v(0) = alpha,   v'(0) = 0,

with the odd extension |v|^(q-1) v so trajectories continue through zero.
The cot(theta) drift is singular at the pole, so integration launches at a
small theta_start from the even Taylor expansion

    v(theta) = alpha - c2 theta^2 + c4 theta^4 + O(theta^6),
    c2 = f(alpha) / (2(N-1)),
    c4 = c2 (f'(alpha) - 2(N-2)/3) / (4(N+1)),      f(v) = ell v + |v|^(q-1) v,

which is one more Picard iteration of the integral fixed-point form of the
equation (the same expansion the contraction-mapping construction produces).
From theta_start an adaptive high-order explicit Runge-Kutta stepper with
dense output carries the state; a sign change of v is located by bracketing
on the dense output and bisecting to 1e-13 in theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from .params import Params

__all__ = ["Trajectory", "TrajectoryStatus", "integrate", "first_zero_of"]

THETA_MAX_DEFAULT = math.pi - 1e-3
THETA_START_DEFAULT = 1e-3
TOL_DEFAULT = 1e-10
DIVERGENCE_LIMIT = 1e12
ZERO_REFINE_TOL = 1e-13
# Points sampled per solver step when hunting for the first sign change.
_SCAN_PER_STEP = 8


class TrajectoryStatus(Enum):
    REACHED_END = "ReachedEnd"
    HIT_ZERO = "HitZero"
    DIVERGED = "Diverged"


def _nonlinearity(v, q: float, scale: float):
    """Odd extension |v|^(q-1) v, scaled by the test hook coefficient."""
    with np.errstate(over="ignore"):
        r = np.minimum(np.abs(v) ** q, 1e300)
    return scale * np.sign(v) * r


def _pow_odd(v: float, q: float) -> float:
    """Scalar |v|^(q-1) v, clamped so rejected trial steps near blow-up stay finite."""
    av = abs(v)
    if av == 0.0:
        return 0.0
    if av > 1.0 and q * math.log10(av) > 300.0:
        return math.copysign(1e300, v)
    return math.copysign(av**q, v)


def _series_coeffs(p: Params, alpha: float, scale: float) -> tuple[float, float]:
    n, q, ell = p.dim, p.q, p.ell
    f_a = ell * alpha + float(_nonlinearity(alpha, q, scale))
    fp_a = ell + scale * q * abs(alpha) ** (q - 1.0) if alpha != 0.0 else ell
    c2 = f_a / (2.0 * (n - 1.0))
    c4 = c2 * (fp_a - 2.0 * (n - 2.0) / 3.0) / (4.0 * (n + 1.0))
    return c2, c4


@dataclass
class Trajectory:
    """Dense numerical solution of the profile IVP with first-zero metadata.

    The stored arrays sample the solution for serialization; ``value`` and
    ``derivative`` evaluate the underlying dense output (series expansion on
    [0, theta_start], integrator interpolant beyond) and are the only source
    other modules should differentiate.
    """

    params: Params
    alpha: float
    theta_grid: np.ndarray
    v: np.ndarray
    v_theta: np.ndarray
    first_zero: float | None
    status: TrajectoryStatus
    theta_start: float
    theta_end: float
    tol: float
    nonlinearity_scale: float = 1.0
    _dense: object = field(default=None, repr=False)
    _coeffs: tuple[float, float] = field(default=(0.0, 0.0), repr=False)

    def _series_eval(self, theta):
        c2, c4 = self._coeffs
        t2 = theta * theta
        return self.alpha - c2 * t2 + c4 * t2 * t2

    def _series_deriv(self, theta):
        c2, c4 = self._coeffs
        return -2.0 * c2 * theta + 4.0 * c4 * theta**3

    def _eval(self, theta, component: int):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta < 0.0) or np.any(theta > self.theta_end * (1 + 1e-12)):
            raise ValueError(
                f"theta outside trajectory domain [0, {self.theta_end}]"
            )
        scalar = theta.ndim == 0
        theta = np.atleast_1d(theta)
        out = np.empty_like(theta)
        early = theta < self.theta_start
        if np.any(early):
            t = theta[early]
            out[early] = self._series_eval(t) if component == 0 else self._series_deriv(t)
        late = ~early
        if np.any(late):
            t = np.minimum(theta[late], self.theta_end)
            if self._dense is None:
                # no integration span: the series is the only representation
                out[late] = self._series_eval(t) if component == 0 else self._series_deriv(t)
            else:
                out[late] = self._dense(t)[component]
        return float(out[0]) if scalar else out

    def value(self, theta):
        """Profile value v(theta) from dense output."""
        return self._eval(theta, 0)

    def derivative(self, theta):
        """Profile slope v'(theta) from dense output."""
        return self._eval(theta, 1)

    def _stencil_d1(self, f, theta, hh):
        lo, hi = 0.0, self.theta_end
        return (
            -f(np.minimum(theta + 2 * hh, hi))
            + 8.0 * f(np.minimum(theta + hh, hi))
            - 8.0 * f(np.maximum(theta - hh, lo))
            + f(np.maximum(theta - 2 * hh, lo))
        ) / (12.0 * hh)

    def second_derivative(self, theta, h: float = 2e-3):
        """v''(theta) by Richardson-extrapolated 5-point stencils on the dense slope.

        Differentiates the dense output, never stored grids; the stencil
        shrinks near the ends of the integration span.  Combining widths h
        and h/2 cancels the h^4 truncation term, which otherwise dominates
        where the profile's high derivatives are large.
        """
        theta = np.asarray(theta, dtype=float)
        scalar = theta.ndim == 0
        theta = np.atleast_1d(theta)
        lo, hi = 0.0, self.theta_end
        hh = np.minimum(h, np.minimum((theta - lo) / 2.0, (hi - theta) / 2.0))
        hh = np.maximum(hh, 1e-6)
        d_h = self._stencil_d1(self.derivative, theta, hh)
        d_h2 = self._stencil_d1(self.derivative, theta, hh / 2.0)
        d = (16.0 * d_h2 - d_h) / 15.0
        return float(d[0]) if scalar else d

    def ode_residual(self, theta):
        """Residual of the profile ODE at theta, differentiating dense output."""
        v = self.value(theta)
        vt = self.derivative(theta)
        vtt = self.second_derivative(theta)
        p = self.params
        return vtt + (p.dim - 2.0) / np.tan(theta) * vt + p.ell * v + _nonlinearity(
            v, p.q, self.nonlinearity_scale
        )

    def to_csv(self, path) -> None:
        """Write theta, v, v_theta columns at 17 significant digits."""
        with open(path, "w") as fh:
            fh.write("theta,v,v_theta\n")
            for t, v, vt in zip(self.theta_grid, self.v, self.v_theta):
                fh.write(f"{t:.17g},{v:.17g},{vt:.17g}\n")


def _zero_trajectory(p: Params, theta_max: float, tol: float, scale: float) -> Trajectory:
    grid = np.array([0.0, theta_max])
    return Trajectory(
        params=p,
        alpha=0.0,
        theta_grid=grid,
        v=np.zeros(2),
        v_theta=np.zeros(2),
        first_zero=None,
        status=TrajectoryStatus.REACHED_END,
        theta_start=0.0,
        theta_end=theta_max,
        tol=tol,
        nonlinearity_scale=scale,
        _dense=None,
        _coeffs=(0.0, 0.0),
    )


def _refine_zero(dense, lo: float, hi: float) -> float:
    """Bisect a bracketing interval of v on the dense output to 1e-13 in theta."""
    flo = dense(lo)[0]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= ZERO_REFINE_TOL:
            return mid
        fm = dense(mid)[0]
        if fm == 0.0:
            return mid
        if (flo > 0) != (fm > 0):
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _first_sign_change(dense, t_lo: float, t_hi: float, steps: np.ndarray) -> float | None:
    """First zero of the dense v on [t_lo, t_hi], scanning each solver step."""
    ts = steps[(steps >= t_lo) & (steps <= t_hi)]
    ts = np.unique(np.concatenate([[t_lo], ts, [t_hi]]))
    for a, b in zip(ts[:-1], ts[1:]):
        if b <= a:
            continue
        sub = np.linspace(a, b, _SCAN_PER_STEP + 1)
        vals = dense(sub)[0]
        if not np.all(np.isfinite(vals)):
            return None
        if vals[0] <= 0.0:
            # sign change resolved in the previous interval
            return a
        neg = np.nonzero(vals <= 0.0)[0]
        if neg.size:
            k = neg[0]
            return _refine_zero(dense, sub[k - 1], sub[k])
    return None


def integrate(
    p: Params,
    alpha: float,
    theta_max: float = THETA_MAX_DEFAULT,
    tol: float = TOL_DEFAULT,
    *,
    theta_start: float = THETA_START_DEFAULT,
    nonlinearity_scale: float = 1.0,
    stop_at_first_zero: bool = False,
    theta_grid: np.ndarray | None = None,
) -> Trajectory:
    """Integrate the profile IVP from v(0) = alpha, v'(0) = 0.

    Launches through the pole singularity with the quartic series on
    [0, theta_start], then advances with an adaptive 8th-order explicit
    Runge-Kutta stepper (dense output) at absolute/relative tolerance ``tol``.
    ``first_zero`` records the first sign change of v, located to 1e-13 in
    theta.  A non-finite or exploding state truncates the trajectory with
    status Diverged; it is data, not an exception.

    ``nonlinearity_scale`` multiplies the |v|^(q-1) v term (test hook: 0
    integrates the linearized equation).  ``stop_at_first_zero`` terminates
    integration at the zero (the shooting scans only need the crossing).
    ``theta_grid`` stores the solution on a caller-chosen grid instead of the
    solver steps, e.g. to compare two trajectories pointwise.
    """
    if not tol > 0 or not math.isfinite(tol):
        raise ValueError(f"tolerance must be positive and finite, got {tol}")
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if not 0 < theta_max <= math.pi - 1e-3 + 1e-15:
        raise ValueError(f"theta_max must lie in (0, pi - 1e-3], got {theta_max}")
    if not 0 < theta_start < theta_max:
        raise ValueError(f"theta_start must lie in (0, theta_max), got {theta_start}")

    if alpha == 0.0:
        return _zero_trajectory(p, theta_max, tol, nonlinearity_scale)

    n, q, ell = p.dim, p.q, p.ell
    scale = nonlinearity_scale
    c2, c4 = _series_coeffs(p, alpha, scale)

    # The launch point must stay well inside the series' validity: successive
    # series terms shrink by roughly the ratio eps = c2 theta^2 / alpha, so
    # the quartic truncation is ~ alpha eps^3; eps <= 1e-5 keeps it near
    # roundoff.  Steep launches (large alpha) shrink theta_start as far as
    # needed; the stepper handles the power-law drift from there.
    if c2 > 0.0 and c2 * theta_start**2 > 1e-5 * alpha:
        theta_start = math.sqrt(1e-5 * alpha / c2)

    def rhs(theta, y):
        v, vt = y
        return (
            vt,
            -((n - 2.0) / math.tan(theta) * vt + ell * v + scale * _pow_odd(v, q)),
        )

    def diverged(theta, y):
        return abs(y[0]) - DIVERGENCE_LIMIT

    diverged.terminal = True

    events = [diverged]
    if stop_at_first_zero:
        def crossing(theta, y):
            return y[0]

        crossing.terminal = True
        crossing.direction = -1.0
        events.append(crossing)

    y0 = (
        alpha - c2 * theta_start**2 + c4 * theta_start**4,
        -2.0 * c2 * theta_start + 4.0 * c4 * theta_start**3,
    )
    sol = solve_ivp(
        rhs,
        (theta_start, theta_max),
        y0,
        method="DOP853",
        dense_output=True,
        rtol=tol,
        atol=tol,
        events=events,
    )

    if sol.t.size < 2:
        # solver could not advance at all: truncate to the launch point
        grid = np.array([0.0, theta_start])
        traj = Trajectory(
            params=p,
            alpha=alpha,
            theta_grid=grid,
            v=np.empty(2),
            v_theta=np.empty(2),
            first_zero=None,
            status=TrajectoryStatus.DIVERGED,
            theta_start=theta_start,
            theta_end=theta_start,
            tol=tol,
            nonlinearity_scale=scale,
            _dense=None,
            _coeffs=(c2, c4),
        )
        traj.v = traj.value(grid)
        traj.v_theta = traj.derivative(grid)
        return traj

    theta_end = float(sol.t[-1])
    hit_divergence = sol.status == 1 and len(sol.t_events[0]) > 0
    solver_failed = sol.status < 0

    first_zero: float | None = None
    if stop_at_first_zero and sol.status == 1 and len(sol.t_events) > 1 and len(sol.t_events[1]) > 0:
        first_zero = float(sol.t_events[1][0])
    else:
        first_zero = _first_sign_change(sol.sol, theta_start, theta_end, sol.t)

    if first_zero is not None:
        status = TrajectoryStatus.HIT_ZERO
    elif hit_divergence or solver_failed:
        status = TrajectoryStatus.DIVERGED
    else:
        status = TrajectoryStatus.REACHED_END

    if theta_grid is not None:
        grid = np.asarray(theta_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("theta_grid must be a strictly increasing 1D array")
        if grid[0] < 0 or grid[-1] > theta_end:
            raise ValueError(
                f"theta_grid must lie within [0, {theta_end}] (trajectory span)"
            )
    else:
        grid = np.concatenate([[0.0], sol.t])

    traj = Trajectory(
        params=p,
        alpha=alpha,
        theta_grid=grid,
        v=np.empty(grid.size),
        v_theta=np.empty(grid.size),
        first_zero=first_zero,
        status=status,
        theta_start=theta_start,
        theta_end=theta_end,
        tol=tol,
        nonlinearity_scale=scale,
        _dense=sol.sol,
        _coeffs=(c2, c4),
    )
    traj.v = traj.value(grid)
    traj.v_theta = traj.derivative(grid)
    return traj


def first_zero_of(p: Params, alpha: float, tol: float = TOL_DEFAULT) -> float | None:
    """First zero of the trajectory launched at alpha, or None.

    Returns the smallest theta in (0, pi - 1e-3) where v vanishes, refined on
    the dense output; None when the trajectory stays positive to the end or
    diverges first.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    traj = integrate(p, alpha, tol=tol, stop_at_first_zero=True)
    return traj.first_zero
