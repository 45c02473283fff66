"""One Crank-Nicolson step as a tridiagonal system.

Writing U^{j+1/2} = (U^{j+1} + U^j)/2 and clearing the factor 2, each time
step solves

    (eps*d2 + mu*a^{j+1/2}*D* - cbar*I) U^{j+1} = gtilde,

with
    cbar   = b^{j+1/2} + 2*c^{j+1/2}/dt,
    dbar   = b^{j+1/2} - 2*c^{j+1/2}/dt,
    gtilde = 2*f^{j+1/2} - eps*d2 U^j - mu*a^{j+1/2}*D* U^j + dbar*U^j,

where d2 is the non-uniform three-point second difference and D* the upwind
one-sided difference (D- left of the discontinuity index, D+ right of it).
For c == 1 this is exactly cbar = b + 2/dt, dbar = b - 2/dt.  Rows are stored
negated (positive diagonal, non-positive off-diagonals) so the M-matrix
structure can be read directly off the arrays.  Row N/2 carries the
transmission condition D+ U = D- U instead of the PDE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import SpatialMesh
from .problem import ProblemSpec

__all__ = [
    "StencilWeights",
    "TridiagonalSystem",
    "MMatrixReport",
    "interior_row",
    "discontinuity_row",
    "assemble",
    "m_matrix_check",
]


@dataclass(frozen=True)
class StencilWeights:
    """Coefficients of (U_{i-1}, U_i, U_{i+1}) in one row, plus its right side."""

    w_minus: float
    w_center: float
    w_plus: float
    forcing: float


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """Tridiagonal system over N+1 unknowns; sub[0] and sup[N] are unused (zero).

    Rows 0 and N are identity rows pinning the boundary values.  Interior
    rows follow the positive-diagonal convention.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        size = self.diag.shape[0]
        for name in ("sub", "diag", "sup", "rhs"):
            arr = getattr(self, name)
            if arr.shape != (size,):
                raise ValueError("sub, diag, sup, rhs must have the same length")
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Matrix-vector product of the stored tridiagonal matrix with x."""
        y = self.diag * x
        y[1:] += self.sub[1:] * x[:-1]
        y[:-1] += self.sup[:-1] * x[1:]
        return y

    def dump_rows(self) -> str:
        """Debug dump: one row per line as ``i sub diag sup rhs``."""
        return "\n".join(
            f"{i} {self.sub[i]:.17g} {self.diag[i]:.17g} {self.sup[i]:.17g} {self.rhs[i]:.17g}"
            for i in range(self.size))


def interior_row(spec: ProblemSpec, mesh: SpatialMesh, i: int, t_mid: float,
                 dt: float, u_prev: np.ndarray) -> StencilWeights:
    """Implicit weights and forcing of one interior row, in operator form.

    The weights encode eps*d2 + mu*a*D* - cbar*I (off-diagonals >= 0, center
    < 0); :func:`assemble` negates them for storage.  All coefficients are
    evaluated at (x_i, t_mid) on the branch matching i's side of N/2; the
    forcing is gtilde built from the same discrete operators applied to
    ``u_prev``.
    """
    n = mesh.n
    mid = n // 2
    if not (1 <= i <= n - 1) or i == mid:
        raise ValueError(f"i={i} is not an interior PDE row for N={n}")
    x = mesh.points
    hi = float(mesh.h[i])
    hi1 = float(mesh.h[i + 1])
    hbar2 = hi + hi1  # 2 * hbar_i
    eps = spec.params.epsilon
    mu = spec.params.mu
    xi = float(x[i])

    if i < mid:
        a_v = float(spec.a.left(xi, t_mid))
        f_v = float(spec.f.left(xi, t_mid))
    else:
        a_v = float(spec.a.right(xi, t_mid))
        f_v = float(spec.f.right(xi, t_mid))
    b_v = float(spec.b(xi, t_mid))
    c_v = float(spec.c(xi, t_mid))
    cbar = b_v + 2.0 * c_v / dt
    dbar = b_v - 2.0 * c_v / dt

    w_minus = 2.0 * eps / (hi * hbar2)
    w_plus = 2.0 * eps / (hi1 * hbar2)
    w_center = -2.0 * eps / (hi * hi1) - cbar

    um, u0, up = float(u_prev[i - 1]), float(u_prev[i]), float(u_prev[i + 1])
    d2u = 2.0 * ((up - u0) / hi1 - (u0 - um) / hi) / hbar2
    if i < mid:
        # upwind D- on the left of the discontinuity (a < 0 there)
        w_minus += -mu * a_v / hi
        w_center += mu * a_v / hi
        du = (u0 - um) / hi
    else:
        w_plus += mu * a_v / hi1
        w_center += -mu * a_v / hi1
        du = (up - u0) / hi1
    forcing = 2.0 * f_v - eps * d2u - mu * a_v * du + dbar * u0
    return StencilWeights(w_minus, w_center, w_plus, forcing)


def discontinuity_row(mesh: SpatialMesh) -> StencilWeights:
    """Transmission row at i = N/2: D+ U = D- U, independent of t and u_prev.

    Returned directly in the stored (positive-diagonal) convention; any
    globally linear profile satisfies it exactly.
    """
    mid = mesh.n // 2
    hm = float(mesh.h[mid])
    hp = float(mesh.h[mid + 1])
    return StencilWeights(-1.0 / hm, 1.0 / hm + 1.0 / hp, -1.0 / hp, 0.0)


def assemble(spec: ProblemSpec, mesh: SpatialMesh, t_next: float, dt: float,
             u_prev: np.ndarray) -> TridiagonalSystem:
    """Assemble the full system for the step advancing to t_next.

    Row 0 pins U_0 = p(t_next), row N pins U_N = r(t_next), row N/2 is the
    transmission row; every other row is the (negated) interior stencil.
    Vectorized; equivalent row-by-row to :func:`interior_row`.
    """
    n = mesh.n
    if u_prev.shape != (n + 1,):
        raise ValueError(f"u_prev must have {n + 1} entries, got {u_prev.shape}")
    x = mesh.points
    h = mesh.h
    t_mid = t_next - 0.5 * dt
    eps = spec.params.epsilon
    mu = spec.params.mu
    mid = n // 2

    sub = np.zeros(n + 1)
    diag = np.zeros(n + 1)
    sup = np.zeros(n + 1)
    rhs = np.zeros(n + 1)

    diag[0] = 1.0
    rhs[0] = float(spec.p(t_next))
    diag[n] = 1.0
    rhs[n] = float(spec.r(t_next))

    for left_side in (True, False):
        if left_side:
            idx = np.arange(1, mid)
            a_fn, f_fn = spec.a.left, spec.f.left
        else:
            idx = np.arange(mid + 1, n)
            a_fn, f_fn = spec.a.right, spec.f.right
        xi = x[idx]
        hi = h[idx]
        hi1 = h[idx + 1]
        hbar2 = hi + hi1
        a_v = np.asarray(a_fn(xi, t_mid), dtype=float)
        b_v = np.asarray(spec.b(xi, t_mid), dtype=float)
        c_v = np.asarray(spec.c(xi, t_mid), dtype=float)
        f_v = np.asarray(f_fn(xi, t_mid), dtype=float)
        cbar = b_v + 2.0 * c_v / dt
        dbar = b_v - 2.0 * c_v / dt

        w_minus = 2.0 * eps / (hi * hbar2)
        w_plus = 2.0 * eps / (hi1 * hbar2)
        w_center = -2.0 * eps / (hi * hi1) - cbar

        um = u_prev[idx - 1]
        u0 = u_prev[idx]
        up = u_prev[idx + 1]
        d2u = 2.0 * ((up - u0) / hi1 - (u0 - um) / hi) / hbar2
        if left_side:
            w_minus = w_minus - mu * a_v / hi
            w_center = w_center + mu * a_v / hi
            du = (u0 - um) / hi
        else:
            w_plus = w_plus + mu * a_v / hi1
            w_center = w_center - mu * a_v / hi1
            du = (up - u0) / hi1
        g = 2.0 * f_v - eps * d2u - mu * a_v * du + dbar * u0

        sub[idx] = -w_minus
        diag[idx] = -w_center
        sup[idx] = -w_plus
        rhs[idx] = -g

    row = discontinuity_row(mesh)
    sub[mid] = row.w_minus
    diag[mid] = row.w_center
    sup[mid] = row.w_plus
    rhs[mid] = row.forcing

    return TridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs)


@dataclass(frozen=True)
class MMatrixReport:
    """Outcome of the M-matrix structure check.

    ``violations`` holds (row, reason) pairs; ``min_margin`` is the smallest
    diagonal-dominance margin |diag| - (|sub| + |sup|) over all rows and
    ``strict_rows`` counts rows where it is strictly positive.
    """

    passed: bool
    violations: tuple[tuple[int, str], ...]
    min_margin: float
    strict_rows: int


def m_matrix_check(sys: TridiagonalSystem) -> MMatrixReport:
    """Verify M-matrix structure after normalizing each row's diagonal to be positive.

    Checks: off-diagonals <= 0 in every row except the two boundary identity
    rows; |diag| >= |sub| + |sup| in every row, strictly in at least one.
    Purely diagnostic; never raises.
    """
    n = sys.size - 1
    sign = np.where(sys.diag >= 0.0, 1.0, -1.0)
    diag = sign * sys.diag
    sub = sign * sys.sub
    sup = sign * sys.sup

    violations: list[tuple[int, str]] = []
    for i in np.nonzero(diag == 0.0)[0]:
        violations.append((int(i), "zero diagonal"))
    interior = np.arange(1, n)
    bad_sign = interior[(sub[interior] > 0.0) | (sup[interior] > 0.0)]
    for i in bad_sign:
        violations.append((int(i), "positive off-diagonal"))

    margin = np.abs(diag) - (np.abs(sub) + np.abs(sup))
    margin[0] = np.abs(diag[0]) - np.abs(sup[0])
    margin[n] = np.abs(diag[n]) - np.abs(sub[n])
    for i in np.nonzero(margin < 0.0)[0]:
        violations.append((int(i), "not diagonally dominant"))
    strict_rows = int(np.count_nonzero(margin > 0.0))
    if strict_rows == 0:
        violations.append((-1, "no strictly dominant row"))

    return MMatrixReport(passed=not violations,
                         violations=tuple(violations),
                         min_margin=float(margin.min()),
                         strict_rows=strict_rows)
