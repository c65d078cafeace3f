"""Integral and pointwise identities satisfied by exact profile solutions.

Every identity here is exact for exact solutions, so its numerical residual
measures solution quality end to end (integrator, root finder, quadrature):

* the weighted boundary identity on the half-sphere, whose coefficient signs
  also drive the nonexistence results,
* the eigenfunction-pairing identity (valid on the separable line only),
* the Kwong-Li energy E with weight G, where E' = G' w^2 / 2 along solutions
  and E(pi/2) equals half the squared boundary slope,
* the Wronskian J = v1 v2' - v2 v1' of two trajectories, whose weighted form
  rises then falls and stays positive between crossings,
* the N=2 phase-plane conservation law, and the N=3 half-power transform
  that removes the first-order term.

All sphere integrals reduce to weighted 1D quadrature (see quadrature module)
and all derivatives come from dense output, never from stored grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ivp import Trajectory, _nonlinearity
from .params import Params, ell_coeff, REL_TOL
from .quadrature import gauss_panels, sphere_area
from .shoot import ProfileSolution

__all__ = [
    "PohozaevReport",
    "EnergyTrace",
    "WronskianTrace",
    "InvariantReport",
    "pohozaev",
    "identity_91",
    "energy_trace",
    "wronskian_J",
    "phase_plane_check",
    "z_transform_check",
    "full_report",
]

HALF_PI = math.pi / 2.0
RESIDUAL_FLOOR = 1e-30


def grad_coefficient(dim: int, q: float):
    """Gradient-term coefficient (N-3)/2 - (N-1)/(q+1); zero at q = q3."""
    return (dim - 3) / 2 - (dim - 1) / (q + 1)


def mass_coefficient(dim: int, q: float, ell):
    """Mass-term coefficient -(N-1)/2 * (ell(q-1) + N-1)/(q+1)."""
    return -(dim - 1) / 2 * (ell * (q - 1) + (dim - 1)) / (q + 1)


@dataclass(frozen=True)
class PohozaevReport:
    """Terms of the weighted boundary identity and their imbalance."""

    grad_term: float
    mass_term: float
    boundary_term: float
    residual: float
    relative_residual: float

    def to_dict(self) -> dict:
        return {
            "grad_term": self.grad_term,
            "mass_term": self.mass_term,
            "boundary_term": self.boundary_term,
            "residual": self.residual,
            "relative_residual": self.relative_residual,
        }


def _pohozaev_from_samples(
    p: Params, v_fn, vt_fn, boundary_slope: float,
    n_panels: int = 16, n_nodes: int = 64,
) -> PohozaevReport:
    n, q, ell = p.dim, p.q, p.ell
    area = sphere_area(n - 1)
    x, w = gauss_panels(0.0, HALF_PI, n_panels, n_nodes)
    weight = np.cos(x) * np.sin(x) ** (n - 2)
    v = np.asarray(v_fn(x), dtype=float)
    vt = np.asarray(vt_fn(x), dtype=float)
    grad_term = float(grad_coefficient(n, q)) * area * float(np.dot(w, vt * vt * weight))
    mass_term = float(mass_coefficient(n, q, ell)) * area * float(np.dot(w, v * v * weight))
    # equatorial sphere has unit radius; the geodesic derivative of the
    # weight cos(theta) along the outward normal there is exactly -1
    boundary_term = -0.5 * area * boundary_slope**2
    residual = grad_term + mass_term - boundary_term
    rel = abs(residual) / max(
        abs(grad_term), abs(mass_term), abs(boundary_term), RESIDUAL_FLOOR
    )
    return PohozaevReport(grad_term, mass_term, boundary_term, residual, rel)


def pohozaev(sol: ProfileSolution, n_panels: int = 16, n_nodes: int = 64) -> PohozaevReport:
    """Evaluate the boundary identity on a computed profile by quadrature."""
    t = sol.trajectory
    return _pohozaev_from_samples(
        sol.params, t.value, t.derivative, sol.boundary_slope, n_panels, n_nodes
    )


def identity_91(sol: ProfileSolution, n_panels: int = 16, n_nodes: int = 64) -> float:
    """Residual of the eigenfunction pairing (N-1-ell) int(v phi) = int(v^q phi).

    Only meaningful on the separable line ell = ell_coeff(N, q).  At the
    subcritical endpoint q = q1 the left coefficient vanishes, so the raw
    right-hand side is returned instead of a ratio (a positive profile would
    force it to zero, which is the nonexistence mechanism).
    """
    p = sol.params
    if not p.ell_is_separable:
        raise ValueError(
            "identity requires the separable coefficient "
            f"ell = {ell_coeff(p.dim, p.q)!r}, got ell = {p.ell!r}"
        )
    n, q = p.dim, p.q
    area = sphere_area(n - 1)
    x, w = gauss_panels(0.0, HALF_PI, n_panels, n_nodes)
    weight = np.cos(x) * np.sin(x) ** (n - 2)
    v = sol.trajectory.value(x)
    lhs_coeff = (n - 1) - p.ell
    rhs = area * float(np.dot(w, _nonlinearity(v, q, 1.0) * weight))
    if abs(lhs_coeff) <= REL_TOL * (n - 1):
        return rhs
    lhs = lhs_coeff * area * float(np.dot(w, v * weight))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), RESIDUAL_FLOOR)


@dataclass
class EnergyTrace:
    """Kwong-Li energy E and weight G along a profile, with identity residuals."""

    alpha_exp: float
    beta_exp: float
    theta_grid: np.ndarray
    w: np.ndarray
    E: np.ndarray
    G: np.ndarray
    identity_residual_max: float
    endpoint_energy_residual: float


def _energy_pieces(p: Params, theta, v, vt):
    n, q, ell = p.dim, p.q, p.ell
    a = 2.0 * (n - 2.0) / (q + 3.0)
    b = a * (q - 1.0)
    s, c = np.sin(theta), np.cos(theta)
    w = s**a * v
    wt = a * s ** (a - 1.0) * c * v + s**a * vt
    g0 = a * (n - 2.0 - a) + ell
    g1 = a * (a + 3.0 - n)
    G = (g0 * s * s + g1) * s ** (b - 2.0)
    E = s**b * wt * wt / 2.0 + G * w * w / 2.0 + np.abs(w) ** (q + 1.0) / (q + 1.0)
    return a, b, w, E, G


def _G_theta(p: Params, theta):
    n, q, ell = p.dim, p.q, p.ell
    a = 2.0 * (n - 2.0) / (q + 3.0)
    b = a * (q - 1.0)
    s, c = np.sin(theta), np.cos(theta)
    g0 = a * (n - 2.0 - a) + ell
    g1 = a * (a + 3.0 - n)
    return (g0 * b * s * s + g1 * (b - 2.0)) * s ** (b - 3.0) * c


def energy_trace(sol: ProfileSolution, n_grid: int = 129, n_nodes: int = 16) -> EnergyTrace:
    """E, G along the profile and the integrated-identity residual.

    The identity E(t2) - E(t1) = int_{t1}^{t2} G' w^2/2 is checked panel by
    panel on [theta_lo, pi/2]; the trace starts slightly inside the pole
    because E need not extend continuously to 0 for N <= 3, and the panels
    are geometrically graded there (the integrand grows like a power of
    1/theta in low dimension).
    """
    p = sol.params
    t = sol.trajectory
    theta_lo = max(1e-3, t.theta_start)
    grid = np.geomspace(theta_lo, HALF_PI, n_grid)
    a, b, w_arr, E_arr, G_arr = _energy_pieces(p, grid, t.value(grid), t.derivative(grid))

    worst = 0.0
    for t1, t2, e1, e2 in zip(grid[:-1], grid[1:], E_arr[:-1], E_arr[1:]):
        x, wq = gauss_panels(t1, t2, 1, n_nodes)
        v = t.value(x)
        s = np.sin(x)
        w_loc = s**a * v
        rhs = float(np.dot(wq, _G_theta(p, x) * w_loc * w_loc / 2.0))
        worst = max(worst, abs((e2 - e1) - rhs))

    endpoint = abs(float(E_arr[-1]) - sol.boundary_slope**2 / 2.0)
    return EnergyTrace(
        alpha_exp=a,
        beta_exp=b,
        theta_grid=grid,
        w=w_arr,
        E=E_arr,
        G=G_arr,
        identity_residual_max=worst,
        endpoint_energy_residual=endpoint,
    )


@dataclass
class WronskianTrace:
    """J = v1 v2' - v2 v1' of two trajectories on their common grid."""

    theta: np.ndarray
    J: np.ndarray
    weighted: np.ndarray


def wronskian_J(t1: Trajectory, t2: Trajectory) -> WronskianTrace:
    """Wronskian of two trajectories sharing parameters and grid.

    Also returns the weighted form sin(theta)^(N-2) J, which increases up to
    the crossing of the two graphs and decreases after it.
    """
    if (t1.params.dim, t1.params.q, t1.params.ell) != (
        t2.params.dim,
        t2.params.q,
        t2.params.ell,
    ):
        raise ValueError("trajectories were integrated with different parameters")
    if t1.theta_grid.shape != t2.theta_grid.shape or not np.array_equal(
        t1.theta_grid, t2.theta_grid
    ):
        raise ValueError("trajectories are stored on different grids")
    if not t1.alpha > t2.alpha:
        raise ValueError("expected t1.alpha > t2.alpha")
    J = t1.v * t2.v_theta - t2.v * t1.v_theta
    weighted = np.sin(t1.theta_grid) ** (t1.params.dim - 2) * J
    return WronskianTrace(theta=t1.theta_grid.copy(), J=J, weighted=weighted)


def phase_plane_check(t: Trajectory, p: Params, n_sample: int = 512) -> float:
    """Max deviation from the N=2 conservation law on a monotone trajectory.

    For N = 2 the slope squared equals slope(theta0)^2 - ell v^2 - 2 v^{q+1}/(q+1)
    pointwise; checked on [theta_start, first_zero].  Raises when the profile
    is not monotone decreasing there (the phase-plane change of variables
    needs an invertible v).
    """
    if p.dim != 2:
        raise ValueError("phase-plane law applies to dimension 2 only")
    if t.alpha == 0.0:
        return 0.0
    if t.first_zero is None:
        raise ValueError("trajectory has no zero: no boundary slope to anchor the law")
    theta = np.linspace(t.theta_start, t.first_zero, n_sample)
    v = t.value(theta)
    vt = t.derivative(theta)
    if np.any(vt > 1e-10):
        k = int(np.argmax(vt > 1e-10))
        raise ValueError(
            f"profile not monotone decreasing near theta = {theta[k]:.6f}"
        )
    slope = t.derivative(t.first_zero)
    predicted = slope**2 - p.ell * v * v - 2.0 * np.abs(v) ** (p.q + 1.0) / (p.q + 1.0)
    return float(np.max(np.abs(vt * vt - predicted)))


def z_transform_profile(t: Trajectory, p: Params, n_sample: int = 512):
    """z = sqrt(sin) v and its residual in the transformed N=3 equation."""
    if p.dim != 3:
        raise ValueError("half-power transform applies to dimension 3 only")
    hi = min(HALF_PI, t.theta_end)
    theta = np.linspace(max(1e-3, t.theta_start), hi, n_sample)
    s, c = np.sin(theta), np.cos(theta)
    v = t.value(theta)
    vt = t.derivative(theta)
    vtt = t.second_derivative(theta)
    z = np.sqrt(s) * v
    # z'' from the product rule; (sqrt sin)'' = -sqrt(sin)/2 - cos^2/(4 sin^(3/2))
    root_tt = -np.sqrt(s) / 2.0 - c * c / (4.0 * s**1.5)
    z_tt = root_tt * v + c / np.sqrt(s) * vt + np.sqrt(s) * vtt
    residual = (
        z_tt
        + (p.ell + 0.25 + 1.0 / (4.0 * s * s)) * z
        + _nonlinearity(z, p.q, 1.0) / s ** ((p.q - 1.0) / 2.0)
    )
    return theta, z, z_tt, residual


def z_transform_check(t: Trajectory, p: Params, n_sample: int = 512) -> float:
    """Max residual of the N=3 half-power transform equation along t."""
    if t.alpha == 0.0:
        if p.dim != 3:
            raise ValueError("half-power transform applies to dimension 3 only")
        return 0.0
    _, _, _, residual = z_transform_profile(t, p, n_sample)
    return float(np.max(np.abs(residual)))


@dataclass
class InvariantReport:
    """All identity residuals for one profile solution."""

    pohozaev: PohozaevReport
    identity91_residual: float | None
    energy_identity_residual: float
    endpoint_energy_residual: float
    phase_plane_residual_max: float | None
    z_transform_residual_max: float | None

    def to_dict(self) -> dict:
        return {
            "pohozaev": self.pohozaev.to_dict(),
            "identity91_residual": self.identity91_residual,
            "energy_identity_residual": self.energy_identity_residual,
            "endpoint_energy_residual": self.endpoint_energy_residual,
            "phase_plane_residual_max": self.phase_plane_residual_max,
            "z_transform_residual_max": self.z_transform_residual_max,
        }


def full_report(sol: ProfileSolution) -> InvariantReport:
    """Evaluate every applicable identity on a profile solution."""
    p = sol.params
    energy = energy_trace(sol)
    return InvariantReport(
        pohozaev=pohozaev(sol),
        identity91_residual=identity_91(sol) if p.ell_is_separable else None,
        energy_identity_residual=energy.identity_residual_max,
        endpoint_energy_residual=energy.endpoint_energy_residual,
        phase_plane_residual_max=(
            phase_plane_check(sol.trajectory, p) if p.dim == 2 else None
        ),
        z_transform_residual_max=(
            z_transform_check(sol.trajectory, p) if p.dim == 3 else None
        ),
    )
