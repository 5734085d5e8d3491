"""Classification of square matrices relative to a proper cone.

Verdicts are tri-state: sampled checks (PSD cone) can refute membership in a
class with a witness but never certify it, so they answer ``UNDETERMINED``
when no counterexample turns up.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from . import cones
from .cones import ConeKind, ConeSpec

DEFAULT_SAMPLES = 1000
SCALAR_RANGE = (-1e6, 1e6)
SCALAR_WIDTH = 1e-9
RESOLVENT_GRID = (0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6)


class Verdict(enum.Enum):
    YES = "yes"
    NO = "no"
    UNDETERMINED = "undetermined"

    def __bool__(self):
        return self is Verdict.YES


@dataclass
class Check:
    verdict: Verdict
    exact: bool
    evidence: dict = field(default_factory=dict)

    @property
    def refuted(self) -> bool:
        return self.verdict is Verdict.NO


@dataclass
class DominantPair:
    mu: float
    right: np.ndarray
    left: np.ndarray
    warnings: list[str] = field(default_factory=list)


@dataclass
class ClassReport:
    cone_invariant: Check
    cross_positive: Check
    irreducible: Check
    k_positive: Check
    dominant: DominantPair

    def verdicts(self) -> dict[str, Verdict]:
        return {"cone_invariant": self.cone_invariant.verdict,
                "cross_positive": self.cross_positive.verdict,
                "irreducible": self.irreducible.verdict,
                "k_positive": self.k_positive.verdict}


def _square(A, cone: ConeSpec) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if A.shape[0] != cone.ambient_dim:
        raise ValueError(f"{A.shape[0]}x{A.shape[0]} matrix against a cone in "
                         f"R^{cone.ambient_dim}")
    return A


def _scale(A) -> float:
    return max(1.0, float(np.abs(A).max(initial=0.0)))


def _lorentz_q(n):
    return np.diag(np.r_[1.0, -np.ones(n - 1)])


def _minimize_lmax(S, Q, lo, hi, width=SCALAR_WIDTH):
    """Minimize the convex function t -> lambda_max(t*Q - S) over [lo, hi].

    Bisection on the sign of the derivative v^T Q v, v the top eigenvector.
    """
    def value_and_slope(t):
        w, V = np.linalg.eigh(t * Q - S)
        v = V[:, -1]
        return w[-1], v @ Q @ v

    a, b = lo, hi
    while b - a > width * max(1.0, abs(a), abs(b)):
        mid = 0.5 * (a + b)
        _, slope = value_and_slope(mid)
        if slope > 0:
            b = mid
        else:
            a = mid
    t = 0.5 * (a + b)
    return t, value_and_slope(t)[0]


def _bisection_slack(t, tol):
    # lambda_max is 1-Lipschitz in t (|Q| = 1), so the bracket width bounds the gap
    return tol + 4 * SCALAR_WIDTH * max(1.0, abs(t))


def _lorentz_two_rays():
    # the 2-dimensional Lorentz cone is polyhedral with rays (1, 1) and (1, -1)
    return np.array([[1.0, 1.0], [1.0, -1.0]])


# cone invariance ------------------------------------------------------------------

def is_cone_invariant(A, cone: ConeSpec, tol: float = cones.DEFAULT_TOL,
                      samples: int = DEFAULT_SAMPLES, rng=None) -> Check:
    """Decide whether A maps the cone into itself."""
    A = _square(A, cone)
    n = A.shape[0]
    scale = _scale(A)
    if cone.kind is ConeKind.ORTHANT:
        i, j = np.unravel_index(np.argmin(A), A.shape)
        ok = A[i, j] >= -tol * scale
        ev = {} if ok else {"ray": np.eye(n)[j], "image": A[:, j]}
        return Check(Verdict.YES if ok else Verdict.NO, True, ev)

    if cone.kind is ConeKind.LORENTZ:
        return _lorentz_invariant(A, cone, tol)

    if cone.kind is ConeKind.POLYHEDRAL:
        # A K in K  iff  A^T m_i in K* = cone(M^T) for every facet row m_i
        M = cone.facets
        for i, m in enumerate(M):
            g = A.T @ m
            _, res = nnls(M.T, g / max(1.0, np.abs(g).max()))
            if res > tol:
                return Check(Verdict.NO, True, {"facet": i, "residual": res})
        return Check(Verdict.YES, True)

    rng = np.random.default_rng(rng)
    for x in cones.sample_extreme_rays(cone, samples, rng):
        y = A @ x
        if not cones.contains(cone, y, tol * scale):
            return Check(Verdict.NO, False, {"ray": x, "image": y})
    return Check(Verdict.UNDETERMINED, False, {"samples": samples})


def _lorentz_invariant(A, cone, tol):
    n = A.shape[0]
    scale = _scale(A)
    if n <= 2:
        rays = np.eye(1) if n == 1 else _lorentz_two_rays()
        for x in rays:
            if not cones.contains(cone, A @ x, tol):
                return Check(Verdict.NO, True, {"ray": x, "image": A @ x})
        return Check(Verdict.YES, True)
    if not cones.contains(cone, A[0], tol):
        # A^T is cone-invariant whenever A is, so A^T e_1 (the first row) lies
        # in the cone; this also fixes the sign left open by the quadratic test
        return Check(Verdict.NO, True, {"first_row": A[0]})
    Q = _lorentz_q(n)
    S = A.T @ Q @ A
    # A K in K  iff  A^T Q A - delta Q >= 0 (PSD) for some delta >= 0, with the
    # sign fixed by the first row lying in K.
    delta, lmax = _minimize_lmax(S, Q, 0.0, SCALAR_RANGE[1])
    ok = lmax <= _bisection_slack(delta, tol * scale ** 2)
    ev = {"delta": delta, "lambda_max": lmax}
    if not ok:
        # find a boundary ray mapped outside, for the record
        rng = np.random.default_rng(0)
        for x in cones.sample_extreme_rays(cone, 200, rng):
            if not cones.contains(cone, A @ x, tol):
                ev["ray"], ev["image"] = x, A @ x
                break
    return Check(Verdict.YES if ok else Verdict.NO, True, ev)


# cross-positivity -------------------------------------------------------------------

def is_cross_positive(A, cone: ConeSpec, tol: float = cones.DEFAULT_TOL,
                      samples: int = DEFAULT_SAMPLES, rng=None) -> Check:
    """Decide <y, A x> >= 0 for all complementary x in K, y in K*."""
    A = _square(A, cone)
    n = A.shape[0]
    scale = _scale(A)
    if cone.kind is ConeKind.ORTHANT:
        off = A - np.diag(np.diag(A))
        i, j = np.unravel_index(np.argmin(off), A.shape)
        ok = n == 1 or off[i, j] >= -tol * scale
        ev = {} if ok else {"x": np.eye(n)[j], "y": np.eye(n)[i]}
        return Check(Verdict.YES if ok else Verdict.NO, True, ev)

    if cone.kind is ConeKind.LORENTZ:
        return _lorentz_cross_positive(A, cone, tol)

    if cone.kind is ConeKind.POLYHEDRAL:
        # K* is generated by the facet rows, so it suffices to take y = m_i and
        # x in the face {x in K : m_i x = 0}; the condition then reads
        # A^T m_i in cone(M^T) + span(m_i).
        M = cone.facets
        for i, m in enumerate(M):
            g = A.T @ m
            gen = np.column_stack([M.T, m, -m])
            _, res = nnls(gen, g / max(1.0, np.abs(g).max()))
            if res > tol:
                return Check(Verdict.NO, True, {"facet": i, "residual": res})
        return Check(Verdict.YES, True)

    rng = np.random.default_rng(rng)
    for x, y in cones.sample_boundary_pairs(cone, samples, rng):
        val = y @ A @ x
        if val < -tol * scale:
            return Check(Verdict.NO, False, {"x": x, "y": y, "value": val})
    return Check(Verdict.UNDETERMINED, False, {"samples": samples})


def _lorentz_cross_positive(A, cone, tol):
    n = A.shape[0]
    scale = _scale(A)
    if n == 1:
        return Check(Verdict.YES, True)
    if n == 2:
        r = _lorentz_two_rays()
        for x, y in ((r[0], r[1]), (r[1], r[0])):
            if y @ A @ x < -tol * scale:
                return Check(Verdict.NO, True, {"x": x, "y": y})
        return Check(Verdict.YES, True)
    Q = _lorentz_q(n)
    S = Q @ A + A.T @ Q
    # cross-positive iff Q A + A^T Q - xi Q >= 0 (PSD) for some real xi
    xi, lmax = _minimize_lmax(S, Q, *SCALAR_RANGE)
    ok = lmax <= _bisection_slack(xi, tol * scale)
    return Check(Verdict.YES if ok else Verdict.NO, True,
                 {"xi": xi, "lambda_max": lmax})


# irreducibility ---------------------------------------------------------------------

def pattern_strongly_connected(A, tol: float | None = None) -> bool:
    """Strong connectivity of the digraph with an edge j -> i whenever |A_ij| > tol."""
    from .network import Digraph, is_strongly_connected

    A = np.asarray(A, dtype=float)
    if tol is None:
        tol = 1e-12 * np.abs(A).sum(axis=1).max(initial=0.0)
    g = Digraph.from_adjacency(np.where(np.abs(A) > tol, 1.0, 0.0))
    return is_strongly_connected(g)


def is_irreducible(A, cone: ConeSpec, tol: float = cones.DEFAULT_TOL) -> Check:
    """No eigenvector of A on the boundary of the cone."""
    A = _square(A, cone)
    if cone.kind is ConeKind.ORTHANT:
        ok = pattern_strongly_connected(A)
        return Check(Verdict.YES if ok else Verdict.NO, True)
    w, V = np.linalg.eig(A)
    skipped = 0
    for k in range(len(w)):
        v = V[:, k]
        if abs(w[k].imag) > 1e-9 * max(1.0, abs(w[k])):
            skipped += 1
            continue
        v = v.real
        v = v / np.abs(v).max()
        for s in (v, -v):
            if cones.contains(cone, s, 1e-7) and not cones.contains_interior(cone, s, 1e-7):
                return Check(Verdict.NO, True, {"eigenvalue": w[k].real, "eigenvector": s})
    if skipped:
        return Check(Verdict.UNDETERMINED, False, {"complex_skipped": skipped})
    return Check(Verdict.YES, False, {"real_eigenvectors_scanned": len(w)})


def is_k_positive(A, cone: ConeSpec, tol: float = cones.DEFAULT_TOL,
                  samples: int = DEFAULT_SAMPLES, rng=None) -> Check:
    """Decide whether A maps K minus the origin into int K."""
    A = _square(A, cone)
    n = A.shape[0]
    scale = _scale(A)
    if cone.kind is ConeKind.ORTHANT:
        ok = A.min() > tol * scale
        return Check(Verdict.YES if ok else Verdict.NO, True)
    if cone.kind is ConeKind.POLYHEDRAL:
        for i, m in enumerate(cone.facets):
            if not cones.dual_contains_interior(cone, A.T @ m, tol):
                return Check(Verdict.NO, True, {"facet": i})
        return Check(Verdict.YES, True)
    if cone.kind is ConeKind.LORENTZ and n <= 2:
        rays = np.eye(1) if n == 1 else _lorentz_two_rays()
        ok = all(cones.contains_interior(cone, A @ x, tol) for x in rays)
        return Check(Verdict.YES if ok else Verdict.NO, True)
    rng = np.random.default_rng(rng)
    for x in cones.sample_extreme_rays(cone, samples, rng):
        if not cones.contains_interior(cone, A @ x, tol):
            return Check(Verdict.NO, False, {"ray": x, "image": A @ x})
    return Check(Verdict.UNDETERMINED, False, {"samples": samples})


# spectra ------------------------------------------------------------------------------

def _orient(cone, v, dual):
    test = cones.dual_contains if dual else cones.contains
    v = v / np.abs(v).max()
    if test(cone, v, 1e-7):
        return v, True
    if test(cone, -v, 1e-7):
        return -v, True
    return v, False


def _nonneg_null_vector(M):
    """A nonnegative unit-sum vector in ker M, via LP; None if there is none."""
    from scipy.linalg import null_space
    from scipy.optimize import linprog

    N = null_space(M, rcond=1e-8)
    if N.shape[1] == 0:
        return None
    n, k = N.shape
    # variables c (k): N c >= 0, sum(N c) = 1
    res = linprog(np.zeros(k), A_ub=-N, b_ub=np.zeros(n),
                  A_eq=N.sum(axis=0, keepdims=True), b_eq=[1.0],
                  bounds=[(None, None)] * k, method="highs")
    return None if res.status != 0 else N @ res.x


def dominant_eigenpair(A, cone: ConeSpec) -> DominantPair:
    """Eigenvalue of maximal real part and its cone-oriented right/left eigenvectors."""
    A = _square(A, cone)
    notes = []
    w, V = np.linalg.eig(A)
    wl, W = np.linalg.eig(A.T)
    top = w.real.max()
    tol = 1e-9 * _scale(A)
    cand = np.flatnonzero(w.real >= top - tol)
    k = cand[np.argmin(np.abs(w[cand].imag))]
    if abs(w[k].imag) > 1e-8 * _scale(A):
        notes.append("eigenvalue of maximal real part is complex; "
                     "A is not cross-positive")
    mu = float(w[k].real)
    kl = np.argmin(np.abs(wl - w[k]))
    right, r_ok = _orient(cone, V[:, k].real, dual=False)
    left, l_ok = _orient(cone, W[:, kl].real, dual=True)
    if (not r_ok or not l_ok) and cone.kind is ConeKind.ORTHANT:
        # repeated dominant eigenvalue: the solver's basis need not be nonnegative
        n = A.shape[0]
        if not r_ok:
            v = _nonneg_null_vector(A - mu * np.eye(n))
            if v is not None:
                right, r_ok = v / np.abs(v).max(), True
        if not l_ok:
            v = _nonneg_null_vector(A.T - mu * np.eye(n))
            if v is not None:
                left, l_ok = v / np.abs(v).max(), True
    if not r_ok:
        notes.append("no right eigenvector found in the cone")
    if not l_ok:
        notes.append("no left eigenvector found in the dual cone")
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return DominantPair(mu, right, left, notes)


def spectral_abscissa(A) -> float:
    A = np.asarray(A, dtype=float)
    return float(np.linalg.eigvals(A).real.max())


def is_hurwitz(A, tol: float = 1e-10) -> bool:
    return spectral_abscissa(A) < -tol


def resolvent(A, s0) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    return np.linalg.inv(s0 * np.eye(n) - A)


def resolvent_is_cone_invariant(A, cone: ConeSpec, s0: float,
                                tol: float = cones.DEFAULT_TOL, **kw) -> Check:
    """Cone invariance of (s0 I - A)^{-1} for Hurwitz A and s0 >= 0."""
    A = _square(A, cone)
    if s0 < 0:
        raise ValueError("s0 must be nonnegative")
    if not is_hurwitz(A):
        raise ValueError("A is not Hurwitz")
    R = resolvent(A, s0)
    check = is_cone_invariant(R, cone, tol, **kw)
    check.evidence["s0"] = s0
    return check


def resolvent_witness(A, cone: ConeSpec, grid=RESOLVENT_GRID,
                      tol: float = cones.DEFAULT_TOL, **kw) -> float | None:
    """First s0 on the grid at which the resolvent fails to be cone-invariant."""
    for s0 in grid:
        if resolvent_is_cone_invariant(A, cone, s0, tol, **kw).refuted:
            return s0
    return None


def classify(A, cone: ConeSpec, tol: float = cones.DEFAULT_TOL,
             samples: int = DEFAULT_SAMPLES, seed=None) -> ClassReport:
    rng = np.random.default_rng(seed)
    inv = is_cone_invariant(A, cone, tol, samples, rng)
    cross = is_cross_positive(A, cone, tol, samples, rng)
    if inv.verdict is Verdict.YES and cross.verdict is not Verdict.YES:
        # every cone-invariant matrix is cross-positive
        cross = Check(Verdict.YES, inv.exact, {"implied_by": "cone_invariant"})
    irr = is_irreducible(A, cone, tol)
    kpos = is_k_positive(A, cone, tol, samples, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        dom = dominant_eigenpair(A, cone)
    return ClassReport(inv, cross, irr, kpos, dom)
