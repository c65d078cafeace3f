"""Constants and checks for the critical exponent q = (N+1)/(N-1).

At the critical exponent the linear and nonlinear characteristic exponents
coincide (2/(q-1) = N-1), and the singular behavior gets a logarithmic
correction: the model profile is

    u(x) = kappa * (x_N/|x|) * |x|^-(N-1) * (log 1/|x|)^-((N-1)/2),

where kappa = (N(N-1) / (2 theta))^((N-1)/2) and theta is the weighted
moment int (cos theta)^(q1+1) dsigma of the first eigenfunction over the
half-sphere (unnormalized).

The module also validates the two scalar ODE facts the asymptotics rest on:
the asymptotic solution pair of y'' + (a - a1/t) y' + (b - b1/t) y / t = 0
(rates fitted by log-linear regression on numerically integrated solutions)
and the algebraic decay bound sup y t^(1/(q-1)) < +inf for damped power
decay y'' + a y' + b y^q = c e^-t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .quadrature import gauss_panels, sphere_area

__all__ = [
    "KappaResult",
    "LinearODESpec",
    "DecayODESpec",
    "FittedAsymptotics",
    "kappa",
    "eval_critical_profile",
    "check_lemma_2_3",
    "check_lemma_2_1",
    "decay_balance_constant",
]


@dataclass(frozen=True)
class KappaResult:
    """Critical-profile constant and the moment that determines it."""

    dim: int
    q1: float
    theta_const: float
    kappa: float

    def to_dict(self) -> dict:
        return {
            "N": self.dim,
            "q1": self.q1,
            "theta_const": self.theta_const,
            "kappa": self.kappa,
        }


@dataclass(frozen=True)
class LinearODESpec:
    """Coefficients of y'' + (a - a1/t) y' + (1/t)(b - b1/t) y = 0."""

    a: float
    a1: float
    b: float
    b1: float

    def __post_init__(self):
        if self.a == 0.0:
            raise ValueError("leading damping coefficient a must be nonzero")


@dataclass(frozen=True)
class DecayODESpec:
    """Coefficients of y'' + a y' + b y^q = c e^-t (a > 1, b > 0, c >= 0, q > 1)."""

    a: float
    b: float
    c: float
    q: float

    def __post_init__(self):
        if not self.a > 1:
            raise ValueError(f"need a > 1, got {self.a}")
        if not self.b > 0:
            raise ValueError(f"need b > 0, got {self.b}")
        if self.c < 0:
            raise ValueError(f"need c >= 0, got {self.c}")
        if not self.q > 1:
            raise ValueError(f"need q > 1, got {self.q}")


def kappa(dim: int, n_quad: int = 1024) -> KappaResult:
    """Critical constant kappa = (N(N-1)/(2 theta))^((N-1)/2) by quadrature.

    theta is int over the half-sphere of (cos theta)^(q1+1) with the
    unnormalized first eigenfunction cos(theta); ``n_quad`` sets the total
    Gauss node budget.
    """
    if int(dim) != dim or dim < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {dim}")
    n = int(dim)
    q1 = (n + 1) / (n - 1)
    panels = max(1, round(n_quad / 64))
    x, w = gauss_panels(0.0, math.pi / 2.0, panels, 64)
    integrand = np.cos(x) ** (q1 + 1.0) * np.sin(x) ** (n - 2)
    theta_const = sphere_area(n - 1) * float(np.dot(w, integrand))
    kap = (n * (n - 1) / (2.0 * theta_const)) ** ((n - 1) / 2.0)
    return KappaResult(dim=n, q1=q1, theta_const=theta_const, kappa=kap)


def eval_critical_profile(dim: int, kappa_value: float, x) -> float:
    """Model log-corrected singular solution at a point of the unit half-ball."""
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"expected a point in R^{dim}, got shape {x.shape}")
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise ValueError("the singular profile is undefined at the origin")
    if r >= 1.0:
        raise ValueError("the log factor requires |x| < 1")
    if x[-1] < 0.0:
        raise ValueError("point lies outside the closed upper half-space")
    if x[-1] == 0.0:
        return 0.0
    return (
        kappa_value
        * (x[-1] / r)
        * r ** (-(dim - 1.0))
        * math.log(1.0 / r) ** (-(dim - 1.0) / 2.0)
    )


@dataclass(frozen=True)
class FittedAsymptotics:
    """Log-linear fit log|y| ~ const + rate * t + power * log t."""

    rate: float
    power: float
    rate_expected: float
    power_expected: float

    @property
    def max_error(self) -> float:
        return max(
            abs(self.rate - self.rate_expected),
            abs(self.power - self.power_expected),
        )


def _fit_log_linear(ts: np.ndarray, log_y: np.ndarray) -> tuple[float, float]:
    # the 1/t column absorbs the leading correction of the (1 + o(1)) factor,
    # which otherwise biases the fitted power on short windows
    cols = np.column_stack([np.ones_like(ts), ts, np.log(ts), 1.0 / ts])
    # normalize columns so the conditioning test is scale-free
    norms = np.linalg.norm(cols, axis=0)
    if np.linalg.cond(cols / norms) > 1e10:
        raise ValueError(
            "degenerate fit: t and log t are numerically collinear on this window"
        )
    coef, *_ = np.linalg.lstsq(cols, log_y, rcond=None)
    return float(coef[1]), float(coef[2])


def _log_derivative_flow(spec: LinearODESpec, u0: float, t_from: float, t_to: float,
                         sample: np.ndarray) -> np.ndarray:
    """log |y(t)| - log |y(t_from)| along the Riccati flow u = y'/y.

    Integrating the log-derivative avoids overflow/underflow over windows
    where y itself spans hundreds of orders of magnitude; each solution is
    integrated in the direction in which it dominates, which keeps the flow
    numerically stable.
    """
    a, a1, b, b1 = spec.a, spec.a1, spec.b, spec.b1

    def rhs(t, z):
        u = z[0]
        return (-(u * u) - (a - a1 / t) * u - (b - b1 / t) / t, u)

    sol = solve_ivp(
        rhs,
        (t_from, t_to),
        (u0, 0.0),
        method="DOP853",
        dense_output=True,
        rtol=1e-12,
        atol=1e-12,
    )
    if not sol.success:
        raise RuntimeError(f"log-derivative integration failed: {sol.message}")
    return sol.sol(sample)[1]


def check_lemma_2_3(
    spec: LinearODESpec, t0: float, t1: float, n_sample: int = 200
) -> tuple[FittedAsymptotics, FittedAsymptotics]:
    """Fit the decaying and algebraic solution branches against predictions.

    Seeds the exponentially decaying branch at t1 (it dominates backward, so
    backward integration to t0 is stable) and the algebraic branch at t0 (it
    dominates forward), then fits (rate, power) of log|y| on [t0, t1] by
    least squares.  Expected values: (-a, a1 + b/a) and (0, -b/a).
    """
    if not 0 < t0 < t1:
        raise ValueError(f"need 0 < t0 < t1, got [{t0}, {t1}]")
    if t0 < 5.0:
        raise ValueError("t0 below 5 is outside the asymptotic window")
    a, a1, b, b1 = spec.a, spec.a1, spec.b, spec.b1
    p_decay = a1 + b / a
    p_alg = -b / a
    sample = np.geomspace(t0, t1, n_sample)

    log_y1 = _log_derivative_flow(spec, -a + p_decay / t1, t1, t0, sample)
    rate1, power1 = _fit_log_linear(sample, log_y1)
    fit_decay = FittedAsymptotics(
        rate=rate1, power=power1, rate_expected=-a, power_expected=p_decay
    )

    log_y2 = _log_derivative_flow(spec, p_alg / t0, t0, t1, sample)
    rate2, power2 = _fit_log_linear(sample, log_y2)
    fit_alg = FittedAsymptotics(
        rate=rate2, power=power2, rate_expected=0.0, power_expected=p_alg
    )
    return fit_decay, fit_alg


def decay_balance_constant(spec: DecayODESpec) -> float:
    """Dominant-balance limit of y t^(1/(q-1)): ((q-1) b / a)^(-1/(q-1))."""
    return ((spec.q - 1.0) * spec.b / spec.a) ** (-1.0 / (spec.q - 1.0))


def check_lemma_2_1(
    spec: DecayODESpec,
    T: float,
    horizon: float,
    y0_scale: float = 1.0,
    n_sample: int = 400,
) -> float:
    """sup of y(t) t^(1/(q-1)) over [2T, horizon] on the decaying branch.

    Integrates the equality case y'' + a y' + b y^q = c e^-t from slow-branch
    initial data at T (y0_scale rescales it; 0 with c = 0 gives the zero
    solution).  The slow branch attracts, so small seed errors wash out; if
    the trajectory still leaves the positive decaying regime, nearby seeds
    are tried before giving up.
    """
    if not 0 < T < horizon / 2:
        raise ValueError(f"need 0 < T < horizon/2, got T={T}, horizon={horizon}")
    a, b, c, q = spec.a, spec.b, spec.c, spec.q

    if y0_scale == 0.0 and c == 0.0:
        return 0.0

    def slow_branch(t):
        y = ((q - 1.0) * b * t / a) ** (-1.0 / (q - 1.0))
        return y, -y / ((q - 1.0) * t)

    def rhs(t, z):
        y, yt = z
        return (yt, c * math.exp(-t) - a * yt - b * math.copysign(abs(y) ** q, y))

    sample = np.geomspace(2 * T, horizon, n_sample)
    last_error = None
    for scale in (y0_scale, 0.95 * y0_scale, 1.05 * y0_scale, 0.9 * y0_scale, 1.1 * y0_scale):
        y_T, yt_T = slow_branch(T)
        sol = solve_ivp(
            rhs,
            (T, horizon),
            (scale * y_T, scale * yt_T),
            method="LSODA",
            dense_output=True,
            rtol=1e-10,
            atol=1e-14,
        )
        if not sol.success:
            last_error = sol.message
            continue
        y = sol.sol(sample)[0]
        if np.all(y > 0.0):
            return float(np.max(y * sample ** (1.0 / (q - 1.0))))
        last_error = "trajectory left the positive decaying branch"
    raise RuntimeError(
        f"could not land on the decaying branch near t={T}: {last_error}"
    )
