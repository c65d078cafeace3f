"""Problem parameters and the existence/uniqueness regime map.

Positive singular solutions of -Laplace(u) = u^q near a boundary point of the
half-space separate as u(x) = |x|^(-2/(q-1)) * v(x/|x|), where the angular
profile v solves the Dirichlet problem on the upper unit half-sphere:

    -Delta' v = ell * v + v^q   in S^{N-1}_+,     v = 0 on the equator,

with Delta' the Laplace-Beltrami operator.  The separable ansatz forces
ell = 2(N - q(N-2)) / (q-1)^2; three exponents

    q1 = (N+1)/(N-1),   q2 = (N+2)/(N-2),   q3 = (N+1)/(N-3)

(q2 = +inf for N = 2, q3 = +inf for N <= 3) split the parameter plane into
regimes where the profile exists, is unique, or cannot exist.  ``classify``
encodes the known regime results; it answers Unknown wherever no result
applies, and never guesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

__all__ = [
    "Params",
    "CriticalExponents",
    "Existence",
    "Uniqueness",
    "RegimeReport",
    "critical_exponents",
    "ell_coeff",
    "classify",
    "cap_nonexistence",
]

# Relative tolerance for "parameter sits exactly on a threshold" tests. The
# regime theorems include their endpoints, so ties go to the closed side.
REL_TOL = 1e-12

# Fixed citation tags carried by RegimeReport.applied_results.
TAG_EXISTS_UNIQUE = "Thm 1.0(ii)"
TAG_NOT_EXISTS_SUBCRITICAL = "Thm 1.0(i)"
TAG_NOT_EXISTS_SUPERCRITICAL = "Thm 1.0(iii)"
TAG_UNIQUE_N2 = "Thm 8.1"
TAG_UNIQUE_HIGH_DIM = "Thm 8.2"
TAG_UNIQUE_N3 = "Thm 8.3"
TAG_CAP_NONEXISTENCE = "Cor 7.1"
TAG_CAP_CONDITION = "Remark (C)"
TAG_OPEN_EXISTENCE = "open: no existence result applies"
TAG_OPEN_UNIQUENESS = "open: no uniqueness result applies"
TAG_OPEN_UNIQUENESS_N3 = "open: N=3 uniqueness gap"


def _is_close(a: float, b: float) -> bool:
    """Threshold equality at REL_TOL relative (absolute floor 1)."""
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= REL_TOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class Params:
    """The triple (N, q, ell) driving every equation in the toolkit.

    ``ell=None`` selects the separable coefficient ell_coeff(dim, q), which is
    the headline case (the profile of an actual singular solution).
    """

    dim: int
    q: float
    ell: float | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.dim}")
        if not self.q > 1:
            raise ValueError(f"exponent q must be > 1, got {self.q}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "q", float(self.q))
        if self.ell is None:
            object.__setattr__(self, "ell", ell_coeff(self.dim, self.q))
        else:
            object.__setattr__(self, "ell", float(self.ell))

    @property
    def ell_is_separable(self) -> bool:
        return _is_close(self.ell, ell_coeff(self.dim, self.q))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "q": self.q, "ell": self.ell}


@dataclass(frozen=True)
class CriticalExponents:
    """The thresholds q1 < q2 < q3, with q2 = +inf at N=2 and q3 = +inf at N<=3."""

    q1: float
    q2: float
    q3: float


class Existence(Enum):
    EXISTS = "Exists"
    NOT_EXISTS = "NotExists"
    UNKNOWN = "Unknown"


class Uniqueness(Enum):
    AT_MOST_ONE = "AtMostOne"
    UNKNOWN = "Unknown"
    NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class RegimeReport:
    """Theorem-by-theorem verdict for one parameter triple.

    ``applied_results`` lists the citation tags backing each verdict;
    ``thresholds`` records every comparison constant that was consulted, so
    the verdict can be audited from the report alone.
    """

    params: Params
    existence: Existence
    uniqueness: Uniqueness
    applied_results: tuple[str, ...]
    thresholds: dict[str, float]
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "existence": self.existence.value,
            "uniqueness": self.uniqueness.value,
            "applied_results": list(self.applied_results),
            "thresholds": dict(self.thresholds),
            "notes": list(self.notes),
        }


def critical_exponents(dim: int) -> CriticalExponents:
    """Exponent thresholds for dimension ``dim``.

    q1 = (N+1)/(N-1), q2 = (N+2)/(N-2), q3 = (N+1)/(N-3), with the usual
    infinity conventions when the denominators vanish or go negative.
    """
    if int(dim) != dim or dim < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {dim}")
    n = int(dim)
    q1 = (n + 1) / (n - 1)
    q2 = math.inf if n == 2 else (n + 2) / (n - 2)
    q3 = math.inf if n <= 3 else (n + 1) / (n - 3)
    return CriticalExponents(q1=q1, q2=q2, q3=q3)


def ell_coeff(dim: int, q: float) -> float:
    """Linear coefficient 2(N - q(N-2)) / (q-1)^2 produced by the separable ansatz."""
    if int(dim) != dim or dim < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {dim}")
    if not q > 1:
        raise ValueError(f"exponent q must be > 1, got {q}")
    n = int(dim)
    return 2.0 * (n - q * (n - 2)) / (q - 1.0) ** 2


def thm83_ell_max(q: float) -> float:
    """Largest ell covered by the N=3 uniqueness result for q > 5: 2(3-q)/((q+3)(q-1))."""
    return 2.0 * (3.0 - q) / ((q + 3.0) * (q - 1.0))


def cor71_ell_max(dim: int, q: float) -> float:
    """Largest ell for which half-sphere nonexistence holds at q >= q3: -(N-1)/(q-1)."""
    return -(dim - 1.0) / (q - 1.0)


def classify(p: Params) -> RegimeReport:
    """Existence/uniqueness verdict for the profile problem at ``p``.

    Existence is decided only where a theorem decides it: on the separable
    line ell = ell_coeff(N, q) (nonexistence for q <= q1 or q >= q3, a unique
    positive solution in between), and by the half-sphere cap identity for
    N >= 4, q >= q3, ell <= -(N-1)/(q-1).  Uniqueness holds for every ell when
    N = 2, when N >= 4 and q < q3, and when N = 3 with q <= 5 or with
    ell <= 2(3-q)/((q+3)(q-1)); the remaining N = 3 region is genuinely open
    and reported as Unknown.  Ties at thresholds take the closed side stated
    by the corresponding theorem.
    """
    n, q, ell = p.dim, p.q, p.ell
    ce = critical_exponents(n)
    thresholds = {
        "q1": ce.q1,
        "q2": ce.q2,
        "q3": ce.q3,
        "ell_separable": ell_coeff(n, q),
        "thm83_ell_max": thm83_ell_max(q),
        "cor71_ell_max": cor71_ell_max(n, q),
    }
    notes: list[str] = []
    if _is_close(q, ce.q2):
        notes.append(
            "q equals q2: profile convergence statements exclude this exponent; "
            "the regime verdict itself is unaffected"
        )

    q_le_q1 = q < ce.q1 or _is_close(q, ce.q1)
    q_ge_q3 = q > ce.q3 or _is_close(q, ce.q3)
    tags: list[str] = []

    if p.ell_is_separable:
        if q_le_q1:
            existence = Existence.NOT_EXISTS
            tags.append(TAG_NOT_EXISTS_SUBCRITICAL)
        elif q_ge_q3:
            existence = Existence.NOT_EXISTS
            tags.append(TAG_NOT_EXISTS_SUPERCRITICAL)
        else:
            existence = Existence.EXISTS
            tags.append(TAG_EXISTS_UNIQUE)
    elif n >= 4 and q_ge_q3 and (ell < thresholds["cor71_ell_max"] or _is_close(ell, thresholds["cor71_ell_max"])):
        existence = Existence.NOT_EXISTS
        tags.append(TAG_CAP_NONEXISTENCE)
    else:
        existence = Existence.UNKNOWN
        tags.append(TAG_OPEN_EXISTENCE)

    if existence is Existence.NOT_EXISTS:
        uniqueness = Uniqueness.NOT_APPLICABLE
    elif n == 2:
        uniqueness = Uniqueness.AT_MOST_ONE
        tags.append(TAG_UNIQUE_N2)
    elif n >= 4:
        if q < ce.q3 and not _is_close(q, ce.q3):
            uniqueness = Uniqueness.AT_MOST_ONE
            tags.append(TAG_UNIQUE_HIGH_DIM)
        else:
            uniqueness = Uniqueness.UNKNOWN
            tags.append(TAG_OPEN_UNIQUENESS)
    else:  # N == 3
        if q < 5.0 or _is_close(q, 5.0):
            uniqueness = Uniqueness.AT_MOST_ONE
            tags.append(TAG_UNIQUE_N3)
        elif ell < thresholds["thm83_ell_max"] or _is_close(ell, thresholds["thm83_ell_max"]):
            uniqueness = Uniqueness.AT_MOST_ONE
            tags.append(TAG_UNIQUE_N3)
        else:
            uniqueness = Uniqueness.UNKNOWN
            tags.append(TAG_OPEN_UNIQUENESS_N3)

    return RegimeReport(
        params=p,
        existence=existence,
        uniqueness=uniqueness,
        applied_results=tuple(tags),
        thresholds=thresholds,
        notes=tuple(notes),
    )


def cap_nonexistence(p: Params, lambda_est: float) -> bool:
    """Nonexistence test on a spherical cap with weighted Poincare constant ``lambda_est``.

    On a cap S strictly inside the half-sphere the boundary identity improves:
    the zero function is the only solution whenever

        ell * (q - 1) <= 1 - N + (q(N-3) - N - 1)/(N-1) * lambda(S, phi),

    which reduces to the half-sphere threshold ell <= -(N-1)/(q-1) at
    lambda = 0 and admits larger ell as the cap (and hence lambda) grows.
    Requires N >= 4 and q > q3 so the gradient coefficient of the identity is
    positive.
    """
    n, q, ell = p.dim, p.q, p.ell
    if n < 4:
        raise ValueError("cap nonexistence test requires dimension >= 4")
    q3 = critical_exponents(n).q3
    if not q > q3:
        raise ValueError(f"cap nonexistence test requires q > q3 = {q3}, got q = {q}")
    if lambda_est < 0:
        raise ValueError(f"lambda estimate must be >= 0, got {lambda_est}")
    rhs = 1.0 - n + (q * (n - 3.0) - n - 1.0) / (n - 1.0) * lambda_est
    return ell * (q - 1.0) <= rhs
