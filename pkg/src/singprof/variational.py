"""Variational route to the profile and weighted cap eigenvalues.

The profile can be produced without shooting: minimize the quadratic energy

    J(w) = int_0^{pi/2} (w'^2 - ell w^2) sin(theta)^{N-2} dtheta

over axisymmetric w >= 0 with Dirichlet end at pi/2, subject to the
normalization int (w+)^{q+1} sin^{N-2} = 1.  The minimizer satisfies the
profile equation up to a Lagrange multiplier lambda = J(w), and
lambda^(1/(q-1)) w is the profile itself.  This gives an existence oracle
fully independent of the IVP integrator.

The same tridiagonal machinery computes weighted Rayleigh quotients on caps
[0, theta_c]: the smallest generalized eigenvalue of

    int |z'|^2 cos(theta) sin(theta)^{N-2}  /  int z^2 cos(theta) sin(theta)^{N-2}

over z vanishing at theta_c (natural at the pole).  At theta_c = pi/2 the
weight cos(theta) vanishes linearly at the Dirichlet end, the constraint
there carries no energy (zero capacity, as in a 2D point condition), and the
infimum is 0; the discretization treats that endpoint as natural, matching
the continuum value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .params import Params, critical_exponents

__all__ = [
    "DiscreteProfile",
    "LambdaEstimate",
    "NonConvergenceError",
    "minimize_profile",
    "lambda_cap",
    "dirichlet_eigenvalue_half_sphere",
]

HALF_PI = math.pi / 2.0


class NonConvergenceError(RuntimeError):
    """Minimization stalled; carries the last iterate and its residual."""

    def __init__(self, msg: str, iterate: np.ndarray, residual: float):
        super().__init__(msg)
        self.iterate = iterate
        self.residual = residual


@dataclass
class DiscreteProfile:
    """Constrained minimizer on a uniform grid with surface weight."""

    theta_grid: np.ndarray
    values: np.ndarray
    weight: np.ndarray
    lagrange_multiplier: float
    el_residual: float
    iterations: int
    energy: float

    def to_csv(self, path) -> None:
        """Same schema as trajectory CSV; slopes from centered differences."""
        h = self.theta_grid[1] - self.theta_grid[0]
        vt = np.gradient(self.values, h)
        with open(path, "w") as fh:
            fh.write("theta,v,v_theta\n")
            for t, v, d in zip(self.theta_grid, self.values, vt):
                fh.write(f"{t:.17g},{v:.17g},{d:.17g}\n")


@dataclass(frozen=True)
class LambdaEstimate:
    """Smallest weighted Rayleigh quotient on the cap [0, theta_c]."""

    theta_c: float
    lam: float
    n_grid: int

    def to_dict(self) -> dict:
        return {"theta_c": self.theta_c, "lambda": self.lam, "n_grid": self.n_grid}


def _tridiag_forms(grid: np.ndarray, stiff_weight, mass_weight):
    """Stiffness (banded upper form) and lumped mass for -(s u')' on the grid."""
    h = grid[1] - grid[0]
    mids = (grid[:-1] + grid[1:]) / 2.0
    sm = stiff_weight(mids)
    n = grid.size
    diag = np.zeros(n)
    diag[:-1] += sm / h
    diag[1:] += sm / h
    off = -sm / h
    mass = mass_weight(grid) * h
    mass[0] *= 0.5
    mass[-1] *= 0.5
    return diag, off, mass


def _banded(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    ab = np.zeros((2, diag.size))
    ab[0, 1:] = off
    ab[1, :] = diag
    return ab


def _apply_tridiag(diag, off, x):
    y = diag * x
    y[:-1] += off * x[1:]
    y[1:] += off * x[:-1]
    return y


def minimize_profile(
    p: Params,
    n: int,
    max_iter: int = 50000,
    el_tol: float = 1e-8,
    progress=None,
    allow_outside_theory: bool = False,
) -> DiscreteProfile:
    """Projected-gradient minimizer of the constrained profile energy.

    Runs gradient descent in the H^1 metric (descent directions are
    preconditioned by the stiffness-plus-mass form, which keeps the iteration
    count mesh-independent) with Armijo backtracking; each step clips
    negatives and renormalizes onto the constraint manifold.  Stops when the
    discrete Euler-Lagrange residual drops below ``el_tol`` in the dual norm.

    Outside q1 < q < q3 at the separable coefficient, no continuum minimizer
    exists; such runs are refused unless ``allow_outside_theory`` is set.
    """
    if n < 64:
        raise ValueError(f"need at least 64 grid nodes, got {n}")
    ce = critical_exponents(p.dim)
    if not (ce.q1 < p.q < ce.q3 and p.ell_is_separable):
        if not allow_outside_theory:
            raise ValueError(
                "constrained minimization is backed by theory only for "
                f"q1 < q < q3 at the separable coefficient (q1={ce.q1}, "
                f"q3={ce.q3}); pass allow_outside_theory=True to explore"
            )
    nu, q, ell = p.dim, p.q, p.ell

    grid = np.linspace(0.0, HALF_PI, n)
    sweight = lambda t: np.sin(t) ** (nu - 2)
    kdiag, koff, mass = _tridiag_forms(grid, sweight, sweight)

    # Dirichlet end: eliminate the last node from all forms.
    kdiag_i, koff_i, mass_i = kdiag[:-1].copy(), koff[:-1].copy(), mass[:-1].copy()
    m0 = _banded(kdiag_i + mass_i, koff_i)
    chol = cholesky_banded(m0)

    def constraint(w):
        return float(np.dot(mass_i, np.maximum(w, 0.0) ** (q + 1.0)))

    def project(w):
        w = np.maximum(w, 0.0)
        c = constraint(w)
        if c <= 0.0:
            return None  # collapsed trial; the line search backs off
        return w / c ** (1.0 / (q + 1.0))

    def energy(w):
        return float(np.dot(w, _apply_tridiag(kdiag_i, koff_i, w)) - ell * np.dot(mass_i, w * w))

    def el_vector(w):
        # manifold gradient: the Euler-Lagrange residual with multiplier J(w)
        lam = energy(w)
        r = _apply_tridiag(kdiag_i, koff_i, w) - ell * mass_i * w
        r -= lam * mass_i * np.maximum(w, 0.0) ** q
        return r, lam

    w = project(np.cos(grid[:-1]))
    if w is None:
        raise NonConvergenceError("initial iterate has empty positive part", np.zeros(n - 1), math.inf)
    r, lam = el_vector(w)
    d = cho_solve_banded((chol, False), r)
    res = float(math.sqrt(np.dot(r, d)))
    w_prev = d_prev = None
    recent: list[float] = []
    it = 0
    while res > el_tol:
        if it >= max_iter:
            raise NonConvergenceError(
                f"no convergence after {max_iter} iterations (residual {res:.3e})",
                w,
                res,
            )
        j0 = energy(w)
        recent.append(j0)
        if len(recent) > 8:
            recent.pop(0)
        j_ref = max(recent)
        slope = 2.0 * res * res  # first-order decrease of the projected energy
        # Barzilai-Borwein step along the preconditioned residual, safeguarded
        # by a nonmonotone Armijo test with constraint retraction each trial;
        # the roundoff allowance keeps the test meaningful once the true
        # decrease falls below float precision of the energy.
        allowance = 4e-15 * max(1.0, abs(j0))
        s = 1.0
        if w_prev is not None:
            dw = w - w_prev
            dd = d - d_prev
            denom = float(np.dot(dw, dd))
            if denom > 0.0:
                s = float(np.dot(dw, dw)) / denom
            s = min(max(s, 1e-6), 1e4)
        while True:
            trial = project(w - s * d)
            if trial is not None and (
                energy(trial) <= j_ref - 1e-6 * s * slope + allowance
            ):
                break
            s *= 0.5
            if s < 1e-14:
                break
        if s < 1e-14:
            raise NonConvergenceError(
                f"line search stalled at iteration {it} (residual {res:.3e})", w, res
            )
        w_prev, d_prev = w, d
        w = trial
        r, lam = el_vector(w)
        d = cho_solve_banded((chol, False), r)
        res = float(math.sqrt(np.dot(r, d)))
        it += 1
        if progress is not None and it % 25 == 0:
            progress(it, lam, res)

    values = np.concatenate([w, [0.0]])
    return DiscreteProfile(
        theta_grid=grid,
        values=values,
        weight=sweight(grid),
        lagrange_multiplier=lam,
        el_residual=res,
        iterations=it,
        energy=lam,
    )


def rescaled_profile(profile: DiscreteProfile, q: float) -> np.ndarray:
    """Multiplier-rescaled minimizer: the ODE profile the minimizer encodes."""
    return profile.lagrange_multiplier ** (1.0 / (q - 1.0)) * profile.values


def _smallest_pencil_eigenvalue(
    kdiag: np.ndarray,
    koff: np.ndarray,
    mass: np.ndarray,
    shift: float,
    max_iter: int = 500,
    rtol: float = 1e-13,
) -> float:
    """Smallest generalized eigenvalue of (K, M) by inverse power iteration.

    The factorization shift regularizes a semidefinite K (constants are flat
    directions when both ends are natural); the reported value is the
    Rayleigh quotient of the unshifted pencil, so the shift only steers the
    iteration.
    """
    scale = float(np.max(kdiag))
    chol = None
    for s in (shift, 1e-12 * scale, 1e-9 * scale, 1e-6 * scale):
        try:
            chol = cholesky_banded(_banded(kdiag + s * mass, koff))
            break
        except np.linalg.LinAlgError:
            continue
    if chol is None:
        raise np.linalg.LinAlgError("stiffness pencil is not positive semidefinite")
    x = np.ones_like(kdiag)
    x /= math.sqrt(np.dot(mass, x * x))
    lam_prev = math.inf
    for _ in range(max_iter):
        y = cho_solve_banded((chol, False), mass * x)
        y /= math.sqrt(np.dot(mass, y * y))
        num = float(np.dot(y, _apply_tridiag(kdiag, koff, y)))
        lam = num / float(np.dot(mass, y * y))
        x = y
        if abs(lam - lam_prev) <= rtol * max(1.0, abs(lam)):
            return lam
        lam_prev = lam
    return lam


def lambda_cap(dim: int, theta_c: float, n: int) -> LambdaEstimate:
    """Weighted Poincare constant of the polar cap of colatitude ``theta_c``.

    Discretizes the cos-weighted Rayleigh quotient on a uniform grid with a
    Dirichlet end at theta_c and natural condition at the pole, and runs
    inverse power iteration on the tridiagonal pencil.  At theta_c = pi/2 the
    Dirichlet constraint has zero capacity in the degenerate weight and is
    dropped; the constant is 0 there and grows without bound as the cap
    shrinks.
    """
    if int(dim) != dim or dim < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {dim}")
    if not 0.0 < theta_c <= HALF_PI:
        raise ValueError(f"theta_c must lie in (0, pi/2], got {theta_c}")
    if n < 64:
        raise ValueError(f"need at least 64 grid nodes, got {n}")

    grid = np.linspace(0.0, theta_c, n)
    weight = lambda t: np.cos(t) * np.sin(t) ** (dim - 2)
    kdiag, koff, mass = _tridiag_forms(grid, weight, weight)

    degenerate_end = abs(theta_c - HALF_PI) <= 1e-12
    if not degenerate_end:
        kdiag, koff, mass = kdiag[:-1], koff[:-1], mass[:-1]

    scale = float(np.max(kdiag))
    lam = _smallest_pencil_eigenvalue(kdiag, koff, mass, shift=1e-14 * scale)
    return LambdaEstimate(theta_c=theta_c, lam=max(lam, 0.0), n_grid=n)


def dirichlet_eigenvalue_half_sphere(dim: int, n: int) -> float:
    """First Dirichlet eigenvalue of the axisymmetric Laplace-Beltrami pencil.

    Same 1D machinery as ``lambda_cap`` but with the plain surface weight
    sin(theta)^{N-2} (no cos factor) and an honest Dirichlet end at pi/2;
    the exact value is N - 1 with eigenfunction cos(theta).
    """
    if int(dim) != dim or dim < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {dim}")
    grid = np.linspace(0.0, HALF_PI, n)
    weight = lambda t: np.sin(t) ** (dim - 2)
    kdiag, koff, mass = _tridiag_forms(grid, weight, weight)
    kdiag, koff, mass = kdiag[:-1], koff[:-1], mass[:-1]
    return _smallest_pencil_eigenvalue(kdiag, koff, mass, shift=0.0)
