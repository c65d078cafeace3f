"""Verification documents: one machine-readable record per parameter point.

``verify`` chains the whole toolkit on a single parameter triple: regime
classification, profile shooting (when existence is known or forced), every
identity residual, the uniqueness root count, and the N=2 quadrature
cross-check.  Each check lands in the document as {value, tolerance, pass},
and shooting failures (no bracket, several brackets) are recorded as
structured data rather than raised, so sweeps across nonexistence regions
produce complete result sets.

``sweep`` runs verify over a q grid, carrying the previous point's pole
value as a warm-start hint (an optimization only: hints snap to the same
canonical scan cell a cold start uses, so documents are identical either
way) and writes one JSON file per point plus an index.csv.
"""

from __future__ import annotations

import dataclasses
import math
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import invariants as inv
from . import shoot
from .params import Params, Existence, classify

__all__ = [
    "VerificationDocument",
    "SweepSpec",
    "verify",
    "sweep",
    "exit_code_for",
    "dumps_17g",
]

# Tolerances for the pass/fail flags, pinned once for the whole artifact.
CHECK_TOLERANCES = {
    "ode_residual_max": 1e-8,
    "bc_residual": 1e-10,
    "first_zero_offset": 1e-10,
    "boundary_slope_negative": 0.0,
    "pohozaev_rel_residual": 1e-6,
    "identity91_residual": 1e-6,
    "energy_identity_residual": 1e-6,
    "energy_endpoint_residual": 1e-8,
    "phase_plane_residual": 1e-8,
    "z_transform_residual": 1e-6,
    "bvp_root_count": 0.0,
    "quadrature_2d_alpha_rel": 1e-8,
}


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return f"{x:.17g}"


def dumps_17g(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits.

    Non-finite floats are emitted as the strings "inf", "-inf", "nan" (plain
    JSON has no literals for them); key order follows construction order.
    """
    pad = "  " * indent
    pad_in = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{out}"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{pad_in}{dumps_17g(str(k))}: {dumps_17g(v, indent + 1)}"
            for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = ",\n".join(f"{pad_in}{dumps_17g(v, indent + 1)}" for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


@dataclasses.dataclass
class VerificationDocument:
    """Assembled verdicts, residual checks and failures for one point."""

    params: Params
    regime: dict
    profile: dict | None
    invariants: dict | None
    oracle_checks: dict
    failure: dict | None
    timestamp: str
    versions: dict

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "regime": self.regime,
            "profile": self.profile,
            "invariants": self.invariants,
            "oracle_checks": self.oracle_checks,
            "failure": self.failure,
            "timestamp": self.timestamp,
            "versions": self.versions,
        }

    def to_json(self) -> str:
        return dumps_17g(self.to_dict()) + "\n"

    @property
    def all_checks_pass(self) -> bool:
        return self.failure is None and all(
            c["pass"] for c in self.oracle_checks.values()
        )


def exit_code_for(doc: dict) -> int:
    """Exit code as a pure function of a verification document dict.

    4 = numerical failure (no root where existence was expected, several
    roots, divergence); 2 = some residual check failed; 0 = clean.
    """
    if doc.get("failure") is not None:
        return 4
    checks = doc.get("oracle_checks", {})
    if any(not c["pass"] for c in checks.values()):
        return 2
    return 0


def _check(value: float, name: str, passed: bool | None = None) -> dict:
    tol = CHECK_TOLERANCES[name]
    if passed is None:
        passed = abs(value) <= tol
    return {"value": value, "tolerance": tol, "pass": bool(passed)}


def _versions() -> dict:
    return {
        "singprof": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def verify(
    p: Params,
    tol: float = 1e-10,
    *,
    force: bool = False,
    alpha_hint: float | None = None,
    count_scan_points: int = 200,
) -> VerificationDocument:
    """Classify, solve, and check every applicable identity at one point.

    The profile is computed when the classifier proves existence (or when
    ``force`` is set); shooting failures become the document's ``failure``
    entry.  All tolerances come from CHECK_TOLERANCES.
    """
    regime = classify(p)
    checks: dict = {}
    profile_doc = None
    invariants_doc = None
    failure = None

    attempt = regime.existence is Existence.EXISTS or force
    if attempt:
        try:
            sol = shoot.solve_profile(p, tol, force=force, alpha_hint=alpha_hint)
        except shoot.NoRootError as e:
            failure = {"kind": "NoRoot", "detail": str(e)}
            sol = None
        except shoot.MultipleRootsError as e:
            failure = {
                "kind": "MultipleRoots",
                "detail": str(e),
                "brackets": [list(b) for b in e.brackets],
            }
            sol = None
        if sol is not None:
            profile_doc = sol.to_dict()
            report = inv.full_report(sol)
            invariants_doc = report.to_dict()

            checks["ode_residual_max"] = _check(sol.ode_residual_max, "ode_residual_max")
            checks["bc_residual"] = _check(sol.bc_residual, "bc_residual")
            first_zero = sol.trajectory.first_zero
            checks["first_zero_offset"] = _check(
                first_zero - math.pi / 2.0, "first_zero_offset"
            )
            checks["boundary_slope_negative"] = _check(
                sol.boundary_slope, "boundary_slope_negative", sol.boundary_slope < 0.0
            )
            checks["pohozaev_rel_residual"] = _check(
                report.pohozaev.relative_residual, "pohozaev_rel_residual"
            )
            if report.identity91_residual is not None:
                checks["identity91_residual"] = _check(
                    report.identity91_residual, "identity91_residual"
                )
            checks["energy_identity_residual"] = _check(
                report.energy_identity_residual, "energy_identity_residual"
            )
            checks["energy_endpoint_residual"] = _check(
                report.endpoint_energy_residual, "energy_endpoint_residual"
            )
            if report.phase_plane_residual_max is not None:
                checks["phase_plane_residual"] = _check(
                    report.phase_plane_residual_max, "phase_plane_residual"
                )
            if report.z_transform_residual_max is not None:
                checks["z_transform_residual"] = _check(
                    report.z_transform_residual_max, "z_transform_residual"
                )

            count = shoot.count_bvp_roots(
                p, sol.alpha_star / 10.0, sol.alpha_star * 10.0, count_scan_points
            )
            checks["bvp_root_count"] = _check(float(count), "bvp_root_count", count == 1)

            if p.dim == 2:
                try:
                    m = shoot.quadrature_oracle_2d(p.q, p.ell)
                    rel = abs(sol.alpha_star - m) / sol.alpha_star
                    checks["quadrature_2d_alpha_rel"] = _check(
                        rel, "quadrature_2d_alpha_rel"
                    )
                except shoot.NoRootError as e:
                    failure = {"kind": "NoRoot", "detail": f"2d oracle: {e}"}

    return VerificationDocument(
        params=p,
        regime=regime.to_dict(),
        profile=profile_doc,
        invariants=invariants_doc,
        oracle_checks=checks,
        failure=failure,
        timestamp=datetime.now(timezone.utc).isoformat(),
        versions=_versions(),
    )


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """A q sweep at fixed dimension: grid, coefficient mode, output directory."""

    dim: int
    q_from: float
    q_to: float
    steps: int
    ell: float | None = None  # None = separable coefficient per point
    outputs: str | None = None

    def __post_init__(self):
        if not self.q_from < self.q_to:
            raise ValueError(f"need q_from < q_to, got [{self.q_from}, {self.q_to}]")
        if self.steps < 2:
            raise ValueError(f"need steps >= 2, got {self.steps}")


INDEX_COLUMNS = (
    "q",
    "ell",
    "existence",
    "alpha_star",
    "pohozaev_rel_residual",
    "identity91_residual",
    "energy_residual",
)


def _index_row(doc: VerificationDocument) -> list[str]:
    d = doc.to_dict()
    prof = d["profile"] or {}
    invs = d["invariants"] or {}
    poho = (invs.get("pohozaev") or {}).get("relative_residual")
    vals = [
        d["params"]["q"],
        d["params"]["ell"],
        d["regime"]["existence"],
        prof.get("alpha_star"),
        poho,
        invs.get("identity91_residual"),
        invs.get("energy_identity_residual"),
    ]
    out = []
    for v in vals:
        if v is None:
            out.append("")
        elif isinstance(v, str):
            out.append(v)
        else:
            out.append(f"{v:.17g}")
    return out


def threads_limit() -> int:
    """Sweep parallelism cap from SINGPROF_THREADS (default: available cores)."""
    env = os.environ.get("SINGPROF_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as e:
            raise ValueError(f"SINGPROF_THREADS must be an integer, got {env!r}") from e
        return max(1, n)
    return os.cpu_count() or 1


def sweep(spec: SweepSpec, tol: float = 1e-10, force: bool = False) -> list[VerificationDocument]:
    """Verify every point of the q grid; failures are data, never aborts.

    Serial execution chains a warm-start hint between neighbouring points;
    with SINGPROF_THREADS > 1, points run concurrently without chaining.
    Either way the documents are identical (hints only skip scan work).
    When ``spec.outputs`` is set, writes q_<value>.json per point and an
    index.csv.
    """
    qs = np.linspace(spec.q_from, spec.q_to, spec.steps)
    points = [
        Params(spec.dim, float(q), spec.ell if spec.ell is not None else None)
        for q in qs
    ]

    n_threads = min(threads_limit(), len(points))
    docs: list[VerificationDocument]
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            docs = list(pool.map(lambda p: verify(p, tol, force=force), points))
    else:
        docs = []
        hint: float | None = None
        for p in points:
            doc = verify(p, tol, force=force, alpha_hint=hint)
            docs.append(doc)
            if doc.profile is not None:
                hint = doc.profile["alpha_star"]
            else:
                hint = None

    if spec.outputs is not None:
        outdir = Path(spec.outputs)
        outdir.mkdir(parents=True, exist_ok=True)
        for q, doc in zip(qs, docs):
            (outdir / f"q_{q:.10g}.json").write_text(doc.to_json())
        lines = [",".join(INDEX_COLUMNS)]
        lines += [",".join(_index_row(doc)) for doc in docs]
        (outdir / "index.csv").write_text("\n".join(lines) + "\n")
    return docs
