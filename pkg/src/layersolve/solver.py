"""Tridiagonal solves and time marching.

Thomas elimination is used without pivoting: every assembled system is an
M-matrix (checked at runtime under the default policy), so elimination is
stable and pivots cannot vanish.  A cheap residual pass after each solve
catches conditioning pathologies at extreme eps instead of guessing at a
remedy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .discretization import TridiagonalSystem, assemble, m_matrix_check
from .errors import (CheckWarning, MMatrixViolation, NonFiniteValue,
                     ResidualViolation, StabilityViolation, ZeroPivot)
from .mesh import LayerParams, SpatialMesh, TimeGrid
from .problem import ProblemSpec, _sample

__all__ = [
    "PIVOT_FLOOR",
    "RESIDUAL_RTOL",
    "CheckPolicy",
    "DiscreteSolution",
    "thomas_solve",
    "residual_max_norm",
    "march",
    "AuditReport",
    "stability_audit",
    "EnvelopeReport",
    "layer_envelope_diagnostic",
]

PIVOT_FLOOR = 1e-300
RESIDUAL_RTOL = 1e-10
STABILITY_SLACK = 1e-8
_MATRIX_RTOL = 100.0 * np.finfo(float).eps


@dataclass(frozen=True)
class CheckPolicy:
    """Which runtime audits run during a march and how failures are handled.

    With ``strict`` a failed audit raises (MMatrixViolation, ResidualViolation,
    StabilityViolation); otherwise it warns and the march continues.  The
    default keeps all audits on in warn mode so experiments complete while
    logging anomalies.
    """

    m_matrix: bool = True
    residual: bool = True
    stability: bool = True
    strict: bool = False

    @classmethod
    def strict_policy(cls) -> "CheckPolicy":
        return cls(strict=True)

    @classmethod
    def off(cls) -> "CheckPolicy":
        return cls(m_matrix=False, residual=False, stability=False)


@dataclass(frozen=True, eq=False)
class DiscreteSolution:
    """Solution values on mesh x time grid; values[j][i] approximates u(x_i, t_j)."""

    mesh: SpatialMesh
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        expected = (self.grid.m + 1, self.mesh.n + 1)
        if self.values.shape != expected:
            raise ValueError(f"values must have shape {expected}")
        self.values.setflags(write=False)


def thomas_solve(sys: TridiagonalSystem) -> np.ndarray:
    """Solve the tridiagonal system by Thomas elimination (no pivoting).

    Raises ZeroPivot (with the row index) when an eliminated pivot has
    magnitude below PIVOT_FLOOR.  Boundary identity rows come back bit-exact.
    """
    size = sys.size
    if size < 3:
        raise ValueError("system must have at least 3 rows")
    sub = sys.sub.tolist()
    diag = sys.diag.tolist()
    sup = sys.sup.tolist()
    rhs = sys.rhs.tolist()
    c = [0.0] * size
    x = [0.0] * size

    piv = diag[0]
    if abs(piv) < PIVOT_FLOOR:
        raise ZeroPivot(0)
    c[0] = sup[0] / piv
    x[0] = rhs[0] / piv
    for i in range(1, size):
        piv = diag[i] - sub[i] * c[i - 1]
        if abs(piv) < PIVOT_FLOOR:
            raise ZeroPivot(i)
        c[i] = sup[i] / piv
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / piv
    for i in range(size - 2, -1, -1):
        x[i] -= c[i] * x[i + 1]
    return np.asarray(x)


def residual_max_norm(sys: TridiagonalSystem, x: np.ndarray) -> float:
    """Max-norm of A x - rhs for the stored tridiagonal matrix."""
    return float(np.max(np.abs(sys.apply(x) - sys.rhs)))


def _eval_on(fn, arg) -> np.ndarray:
    vals = np.asarray(fn(arg), dtype=float)
    return np.ascontiguousarray(np.broadcast_to(vals, np.shape(arg)))


def _f_sup(spec: ProblemSpec, sample_density: int = 101) -> float:
    ts = np.linspace(0.0, spec.t_final, sample_density)
    sup = 0.0
    for lo, hi, fn in ((0.0, spec.d, spec.f.left), (spec.d, 1.0, spec.f.right)):
        xs = np.linspace(lo, hi, sample_density)
        sup = max(sup, float(np.max(np.abs(_sample(fn, xs, ts)))))
    return sup


def _data_sup(spec: ProblemSpec, mesh: SpatialMesh, grid: TimeGrid) -> float:
    p_vals = np.array([float(spec.p(t)) for t in grid.times])
    r_vals = np.array([float(spec.r(t)) for t in grid.times])
    q_vals = _eval_on(spec.q, mesh.points)
    return float(max(np.max(np.abs(p_vals)), np.max(np.abs(r_vals)),
                     np.max(np.abs(q_vals))))


def _fail(strict: bool, exc_type, message: str) -> None:
    if strict:
        raise exc_type(message)
    warnings.warn(message, CheckWarning, stacklevel=3)


def march(spec: ProblemSpec, mesh: SpatialMesh, grid: TimeGrid,
          checks: CheckPolicy = CheckPolicy()) -> DiscreteSolution:
    """Advance the fully discrete scheme from t = 0 to t = T.

    values[0] is q sampled on the mesh; each later level solves one
    Crank-Nicolson system.  Boundary entries are assigned from p and r, not
    solved.  Audits run per the policy; the stability audit compares the
    running max against data_sup + sup|f|/beta.
    """
    n = mesh.n
    values = np.empty((grid.m + 1, n + 1))
    values[0] = _eval_on(spec.q, mesh.points)
    if not np.all(np.isfinite(values[0])):
        raise NonFiniteValue("initial data contains non-finite values")

    if checks.stability:
        bound = (_data_sup(spec, mesh, grid) + _f_sup(spec) / spec.beta
                 + STABILITY_SLACK)
    running_max = float(np.max(np.abs(values[0])))

    for j in range(grid.m):
        t_next = float(grid.times[j + 1])
        sys = assemble(spec, mesh, t_next, grid.dt, values[j])
        if checks.m_matrix:
            report = m_matrix_check(sys)
            if not report.passed:
                _fail(checks.strict, MMatrixViolation,
                      f"M-matrix check failed at step j={j} (N={n}, M={grid.m}): "
                      f"{report.violations[:3]}")
        try:
            u = thomas_solve(sys)
        except ZeroPivot as exc:
            raise ZeroPivot(exc.row,
                            f"zero pivot at row {exc.row}, step j={j} "
                            f"(N={n}, M={grid.m})") from exc
        if not np.all(np.isfinite(u)):
            raise NonFiniteValue(f"non-finite value at step j={j} (N={n}, M={grid.m})")
        if checks.residual:
            res = residual_max_norm(sys, u)
            # rhs-anchored tolerance, plus a matrix-scale term for degenerate
            # (eps ~ 1) instances whose matrix entries dwarf the rhs
            row_scale = float(np.max(np.abs(sys.sub) + np.abs(sys.diag)
                                     + np.abs(sys.sup)))
            tol = (RESIDUAL_RTOL * (1.0 + float(np.max(np.abs(sys.rhs))))
                   + _MATRIX_RTOL * row_scale * (1.0 + float(np.max(np.abs(u)))))
            if res > tol:
                _fail(checks.strict, ResidualViolation,
                      f"solve residual {res:.3e} exceeds {tol:.3e} at step j={j} "
                      f"(N={n}, M={grid.m})")
        u[0] = sys.rhs[0]
        u[n] = sys.rhs[n]
        values[j + 1] = u
        running_max = max(running_max, float(np.max(np.abs(u))))
        if checks.stability and running_max > bound:
            _fail(checks.strict, StabilityViolation,
                  f"running max {running_max:.6g} exceeds stability bound "
                  f"{bound:.6g} at step j={j} (N={n}, M={grid.m})")
    return DiscreteSolution(mesh=mesh, grid=grid, values=values)


@dataclass(frozen=True)
class AuditReport:
    """Comparison of the computed solution against the a priori bound.

    The bound is data_sup + f_sup/beta (+ small slack); ``margin`` is how far
    below it the solution stays.
    """

    max_abs: float
    data_sup: float
    f_sup: float
    beta: float
    bound: float
    margin: float

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0


def stability_audit(sol: DiscreteSolution, spec: ProblemSpec,
                    sample_density: int = 101) -> AuditReport:
    """Check max |U| <= data_sup + sup|f|/beta + slack on a completed solution."""
    data_sup = _data_sup(spec, sol.mesh, sol.grid)
    f_sup = _f_sup(spec, sample_density)
    bound = data_sup + f_sup / spec.beta + STABILITY_SLACK
    max_abs = float(np.max(np.abs(sol.values)))
    return AuditReport(max_abs=max_abs, data_sup=data_sup, f_sup=f_sup,
                       beta=spec.beta, bound=bound, margin=bound - max_abs)


@dataclass(frozen=True)
class EnvelopeReport:
    """Max backward-difference slope of U over the outer (layer-free) region."""

    max_outer_slope: float
    c_env: float
    argmax_x: float
    argmax_t: float
    layer: LayerParams

    @property
    def passed(self) -> bool:
        return self.max_outer_slope <= self.c_env


def layer_envelope_diagnostic(sol: DiscreteSolution, layer: LayerParams | None = None,
                              c_env: float = 100.0) -> EnvelopeReport:
    """Advisory check that steep gradients stay confined to the layer regions.

    Reports max |D- U| over [tau1, d-tau2] u [d+tau3, 1-tau4] (all time
    levels) and whether it stays below ``c_env``.  The outer region is fixed
    by the mesh's segment indices; ``layer`` (defaulting to the mesh's own
    parameters) is echoed in the report for context.
    """
    mesh = sol.mesh
    n = mesh.n
    h = mesh.h
    n8, n38, n58, n78 = n // 8, 3 * n // 8, 5 * n // 8, 7 * n // 8
    best = (0.0, 0, 0)
    for lo, hi in ((n8 + 1, n38), (n58 + 1, n78)):
        idx = np.arange(lo, hi + 1)
        slopes = np.abs((sol.values[:, idx] - sol.values[:, idx - 1]) / h[idx])
        j, k = np.unravel_index(int(np.argmax(slopes)), slopes.shape)
        if slopes[j, k] > best[0]:
            best = (float(slopes[j, k]), int(idx[k]), int(j))
    return EnvelopeReport(max_outer_slope=best[0], c_env=c_env,
                          argmax_x=float(mesh.points[best[1]]),
                          argmax_t=float(sol.grid.times[best[2]]),
                          layer=layer if layer is not None else mesh.layer)
