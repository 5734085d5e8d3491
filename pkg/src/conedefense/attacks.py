"""Transmission zeros and zero-dynamics (undetectable) actuator attacks.

An attack plan pairs the exponential input d(t) = -e^{s0 t} d0 (or the real
combination of its real and imaginary parts for complex s0) with a spoofed
initial state x0 - zeta, where (zeta, d0) spans the kernel of the Rosenbrock
matrix [[s0 I - A, B], [C, 0]]. The output from (x0, attack) then equals the
output from (x_spoof, no attack) for all t.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from slycot import ab08nd

from .cones import ConeSpec

log = logging.getLogger(__name__)

ZERO_TOL = 1e-7
# multiple real zeros split by about sqrt(eps) off the axis
REAL_SNAP_TOL = 1e-6
RESIDUAL_TOL = 1e-8


class DegenerateSystem(ValueError):
    """The Rosenbrock pencil is singular for every s (normal rank deficient)."""


class NotAZero(ValueError):
    """The requested s0 is not a transmission zero."""


@dataclass(frozen=True)
class LtiSystem:
    """x' = A x + B d, y = C x, with an optional cone tag."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    cone: ConeSpec | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        C = np.asarray(self.C, dtype=float)
        if C.ndim == 1:
            C = C.reshape(1, -1)
        if B.shape[0] != n:
            raise ValueError(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise ValueError(f"C has {C.shape[1]} columns, expected {n}")
        if self.cone is not None and self.cone.ambient_dim != n:
            raise ValueError(f"cone lives in R^{self.cone.ambient_dim}, state in R^{n}")
        for M in (A, B, C):
            M.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    @classmethod
    def from_indices(cls, A, b_index, c_index, cone=None) -> "LtiSystem":
        """System whose input/output matrices are canonical basis vectors (0-based)."""
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        b_index = np.atleast_1d(b_index)
        c_index = np.atleast_1d(c_index)
        for k in (*b_index, *c_index):
            if not 0 <= k < n:
                raise ValueError(f"basis index {k} outside 0..{n - 1}")
        eye = np.eye(n)
        return cls(A, eye[:, b_index], eye[c_index, :], cone)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def l(self) -> int:
        return self.C.shape[0]

    @property
    def siso(self) -> bool:
        return self.m == 1 and self.l == 1

    def with_io(self, B, C) -> "LtiSystem":
        return dataclasses.replace(self, B=B, C=C)

    def rosenbrock(self, s) -> np.ndarray:
        """[[s I - A, B], [C, 0]]."""
        n, m, l = self.n, self.m, self.l
        top = np.hstack([s * np.eye(n) - self.A, self.B])
        bot = np.hstack([self.C, np.zeros((l, m))])
        return np.vstack([top, bot])


def basis_indices(M, axis: int) -> list[int] | None:
    """Indices of the canonical basis vectors forming the columns (axis=1) or rows
    (axis=0) of M, or None if M is not of that form."""
    M = np.asarray(M, dtype=float)
    vecs = M.T if axis == 1 else M
    out = []
    for v in vecs:
        nz = np.flatnonzero(v)
        if len(nz) != 1 or v[nz[0]] != 1.0:
            return None
        out.append(int(nz[0]))
    return out


# zeros ----------------------------------------------------------------------------

def rosenbrock_sigma(sys: LtiSystem, s) -> tuple[float, float]:
    """(sigma_min, sigma_max) of the Rosenbrock matrix at s."""
    sv = np.linalg.svd(sys.rosenbrock(s), compute_uv=False)
    return float(sv[-1]), float(sv[0])


def transmission_zeros(sys: LtiSystem, tol: float = ZERO_TOL) -> np.ndarray:
    """Finite transmission zeros of a square system, sorted by real part descending.

    Finite generalized eigenvalues of the Rosenbrock pencil, taken from the
    pencil reduced by SLICOT AB08ND; every returned value is also certified by
    a small singular value of the Rosenbrock matrix.
    """
    if sys.m != sys.l:
        raise ValueError(f"transmission zeros need a square system, got "
                         f"{sys.m} inputs and {sys.l} outputs")
    n, m, p = sys.n, sys.m, sys.l
    # staircase reduction of the Rosenbrock pencil; the reduced pencil (Af, Ef)
    # carries exactly the finite zeros, so infinite ones never need a threshold
    nu, rank, *_, Af, Ef = ab08nd(n, m, p, sys.A, sys.B, sys.C, np.zeros((p, m)))
    if rank < m:
        raise DegenerateSystem("Rosenbrock pencil is singular for every s")
    z = sla.eigvals(Af[:nu, :nu], Ef[:nu, :nu]) if nu else np.zeros(0, dtype=complex)
    keep = []
    for s in z:
        lo, hi = rosenbrock_sigma(sys, s)
        if lo <= tol * hi:
            keep.append(s)
        else:
            log.debug("dropping uncertified zero candidate %s (sigma ratio %.2e)", s, lo / hi)
    z = np.array(keep, dtype=complex)
    # snap numerically real zeros onto the real axis so conjugate pairing is exact
    small = np.abs(z.imag) <= REAL_SNAP_TOL * np.maximum(1.0, np.abs(z))
    z[small] = z[small].real
    order = np.lexsort((-z.imag, -z.real))
    return z[order]


# null vectors ---------------------------------------------------------------------

@dataclass(frozen=True)
class NullVector:
    zeta: np.ndarray
    d0: np.ndarray
    multiplicity: int
    sigma_ratio: float


def rosenbrock_null_basis(sys: LtiSystem, s0, tol: float = ZERO_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of the Rosenbrock matrix."""
    R = sys.rosenbrock(s0)
    U, sv, Vh = np.linalg.svd(R)
    small = sv <= tol * sv[0]
    # svd returns min(rows, cols) values; R is square for square systems
    return Vh[small].conj().T


def rosenbrock_nullvector(sys: LtiSystem, s0, tol: float = ZERO_TOL) -> NullVector:
    """Unit-norm (zeta, d0) with Rosenbrock(s0) [zeta; d0] = 0.

    With a multi-dimensional kernel, the basis vector with the smallest d0 part
    is returned and the kernel dimension is reported as ``multiplicity``.
    """
    R = sys.rosenbrock(s0)
    sv = np.linalg.svd(R, compute_uv=False)
    ratio = float(sv[-1] / sv[0])
    if ratio > tol:
        raise NotAZero(f"s0 = {s0} is not a transmission zero "
                       f"(sigma_min/sigma_max = {ratio:.2e})")
    V = rosenbrock_null_basis(sys, s0, tol)
    n = sys.n
    k = int(np.argmin(np.linalg.norm(V[n:], axis=0)))
    v = V[:, k]
    if np.isreal(s0) and np.allclose(np.imag(s0), 0):
        # rotate the phase so the vector is real when the kernel allows it
        j = int(np.argmax(np.abs(v)))
        v = v * np.exp(-1j * np.angle(v[j]))
        if np.abs(v.imag).max() <= 1e-8:
            v = v.real
    v = v / np.linalg.norm(v)
    return NullVector(v[:n], v[n:], V.shape[1], ratio)


def scale_to_reference(zeta, d0, reference) -> float:
    """Scale factor k making k*(zeta, d0) agree with ``reference`` on its largest entry."""
    v = np.concatenate([np.ravel(zeta), np.ravel(d0)])
    ref = np.ravel(np.asarray(reference, dtype=complex))
    j = int(np.argmax(np.abs(ref)))
    if v[j] == 0:
        raise ValueError("null vector vanishes where the reference is largest")
    k = ref[j] / v[j]
    return k.real if np.isreal(k) else k


# attack plans ---------------------------------------------------------------------

@dataclass(frozen=True)
class AttackPlan:
    s0: complex
    d0: np.ndarray
    zeta: np.ndarray
    x0: np.ndarray
    l1: float = 1.0
    l2: float = 0.0
    cone_feasible: bool = False
    residual: float = 0.0

    @property
    def is_real(self) -> bool:
        return np.imag(self.s0) == 0

    @property
    def offset(self) -> np.ndarray:
        """x0 - x_spoof = l1 Re(zeta) + l2 Im(zeta)."""
        z = np.asarray(self.zeta, dtype=complex)
        return self.l1 * z.real + self.l2 * z.imag

    @property
    def x_spoof(self) -> np.ndarray:
        return np.asarray(self.x0, dtype=float) - self.offset

    def signal(self, t) -> np.ndarray:
        """d(t); shape (m,) for scalar t, (len(t), m) for arrays."""
        t = np.asarray(t, dtype=float)
        e = np.exp(np.multiply.outer(t, complex(self.s0)))
        w = np.multiply.outer(e, np.asarray(self.d0, dtype=complex))
        return -self.l1 * w.real - self.l2 * w.imag

    def scaled(self, k) -> "AttackPlan":
        """Same attack with (zeta, d0) multiplied by k."""
        zeta = np.asarray(self.zeta) * k
        d0 = np.asarray(self.d0) * k
        if np.iscomplexobj(zeta) and not np.iscomplexobj(k) and self.is_real:
            zeta, d0 = zeta.real, d0.real
        return dataclasses.replace(self, zeta=zeta, d0=d0)

    def with_x0(self, x0) -> "AttackPlan":
        return dataclasses.replace(self, x0=np.asarray(x0, dtype=float))


def plan_residual(sys: LtiSystem, plan: AttackPlan) -> float:
    """Relative Rosenbrock residual of the plan's (zeta, d0)."""
    v = np.concatenate([np.asarray(plan.zeta, dtype=complex),
                        np.asarray(plan.d0, dtype=complex)])
    R = sys.rosenbrock(plan.s0)
    return float(np.linalg.norm(R @ v) / (np.linalg.norm(R, 2) * np.linalg.norm(v)))


def synth_real_attack(sys: LtiSystem, s0: float, x0, tol: float = ZERO_TOL) -> AttackPlan:
    """Attack d(t) = -e^{s0 t} d0 with spoofed state x0 - zeta at a real zero."""
    if np.iscomplexobj(s0) and np.imag(s0) != 0:
        raise ValueError("synth_real_attack needs a real zero; use synth_complex_attack")
    s0 = float(np.real(s0))
    x0 = _state(sys, x0)
    nv = rosenbrock_nullvector(sys, s0, tol)
    if np.iscomplexobj(nv.zeta):
        raise NotAZero(f"kernel at s0 = {s0} has no real vector")
    plan = AttackPlan(s0, nv.d0, nv.zeta, x0, 1.0, 0.0)
    return dataclasses.replace(plan, residual=plan_residual(sys, plan))


def synth_complex_attack(sys: LtiSystem, s0: complex, x0, l1: float = 1.0,
                         l2: float = 0.0, tol: float = ZERO_TOL) -> AttackPlan:
    """Attack -l1 Re(e^{s0 t} d0) - l2 Im(e^{s0 t} d0) with x0 - (l1 Re zeta + l2 Im zeta)."""
    if l1 == 0 and l2 == 0:
        raise ValueError("(l1, l2) = (0, 0) gives the zero attack")
    x0 = _state(sys, x0)
    s0 = complex(s0)
    if s0.imag == 0:
        plan = synth_real_attack(sys, s0.real, x0, tol)
        return dataclasses.replace(plan, l1=float(l1), l2=float(l2))
    nv = rosenbrock_nullvector(sys, s0, tol)
    plan = AttackPlan(s0, np.asarray(nv.d0, dtype=complex),
                      np.asarray(nv.zeta, dtype=complex), x0, float(l1), float(l2))
    return dataclasses.replace(plan, residual=plan_residual(sys, plan))


def cone_feasibility(plan: AttackPlan, sys: LtiSystem,
                     tol: float = 1e-12) -> tuple[bool, AttackPlan]:
    """Make the attack input nonnegative if possible, as cone-invariance requires.

    Real zero: flip (zeta, d0) so every entry of d0 is <= 0, giving
    d(t) = -e^{s0 t} d0 >= 0. Complex zero: never feasible, the input oscillates.
    """
    if sys.cone is None:
        raise ValueError("system carries no cone")
    if not plan.is_real:
        return False, dataclasses.replace(plan, cone_feasible=False)
    d = np.real(np.asarray(plan.d0)) * plan.l1
    scale = max(np.abs(d).max(initial=0.0), 1e-300)
    if np.all(d <= tol * scale):
        return True, dataclasses.replace(plan, cone_feasible=True)
    if np.all(d >= -tol * scale):
        flipped = plan.scaled(-1.0)
        return True, dataclasses.replace(flipped, cone_feasible=True)
    return False, dataclasses.replace(plan, cone_feasible=False)


def _state(sys, x0):
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size != sys.n:
        raise ValueError(f"x0 has {x0.size} entries, state dimension is {sys.n}")
    return x0
