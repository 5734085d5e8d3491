"""Proper cones: orthant, Lorentz (ice-cream), PSD in svec coordinates, polyhedral.

Every membership query normalizes the vector by its infinity norm before
comparing against the absolute tolerance, so ``tol`` is a relative margin.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

DEFAULT_TOL = 1e-9
SYMMETRY_TOL = 1e-10

SQRT2 = np.sqrt(2.0)


class ConeKind(enum.Enum):
    ORTHANT = "orthant"
    LORENTZ = "lorentz"
    PSD = "psd"
    POLYHEDRAL = "polyhedral"


class AssumptionViolated(ValueError):
    """No canonical basis vector lies in the cone (or its dual)."""


@dataclass(frozen=True)
class ConeSpec:
    """A proper cone in R^ambient_dim.

    ``order`` is the matrix order for the PSD cone and equals ``ambient_dim``
    for every other kind. ``facets`` is the M of {x : Mx >= 0}.
    """

    kind: ConeKind
    ambient_dim: int
    order: int = 0
    facets: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise ValueError("ambient_dim must be >= 1")
        if self.kind is ConeKind.PSD:
            n = self.order
            if n < 1 or n * (n + 1) // 2 != self.ambient_dim:
                raise ValueError(
                    f"PSD cone of order {n} needs ambient_dim {n * (n + 1) // 2}, "
                    f"got {self.ambient_dim}")
        elif self.order == 0:
            object.__setattr__(self, "order", self.ambient_dim)
        if self.kind is ConeKind.POLYHEDRAL:
            if self.facets is None:
                raise ValueError("polyhedral cone needs a facet matrix")
            M = np.array(self.facets, dtype=float)
            if M.ndim != 2 or M.shape[1] != self.ambient_dim:
                raise ValueError(
                    f"facet matrix must have {self.ambient_dim} columns")
            if np.linalg.matrix_rank(M) < self.ambient_dim:
                raise ValueError("facet matrix must have full column rank "
                                 "(otherwise the cone is not pointed)")
            M.setflags(write=False)
            object.__setattr__(self, "facets", M)
        elif self.facets is not None:
            raise ValueError(f"{self.kind.value} cone takes no facet matrix")

    @classmethod
    def orthant(cls, n: int) -> "ConeSpec":
        return cls(ConeKind.ORTHANT, n)

    @classmethod
    def lorentz(cls, n: int) -> "ConeSpec":
        return cls(ConeKind.LORENTZ, n)

    @classmethod
    def psd(cls, order: int) -> "ConeSpec":
        return cls(ConeKind.PSD, order * (order + 1) // 2, order)

    @classmethod
    def polyhedral(cls, facets) -> "ConeSpec":
        M = np.atleast_2d(np.asarray(facets, dtype=float))
        return cls(ConeKind.POLYHEDRAL, M.shape[1], facets=M)

    @property
    def self_dual(self) -> bool:
        return self.kind is not ConeKind.POLYHEDRAL

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value,
               "n": self.order if self.kind is ConeKind.PSD else self.ambient_dim}
        if self.kind is ConeKind.POLYHEDRAL:
            out["facets"] = self.facets.tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ConeSpec":
        kind = ConeKind(d["kind"])
        if kind is ConeKind.POLYHEDRAL:
            cone = cls.polyhedral(d["facets"])
            if "n" in d and d["n"] != cone.ambient_dim:
                raise ValueError(f"cone.n = {d['n']} but facets have "
                                 f"{cone.ambient_dim} columns")
            return cone
        if "facets" in d:
            raise ValueError(f"{kind.value} cone takes no facets")
        n = int(d["n"])
        if kind is ConeKind.PSD:
            return cls.psd(n)
        return cls(kind, n)


# svec / smat ----------------------------------------------------------------

def _triu_indices(n):
    # row-major upper triangle: (0,0), (0,1), ..., (0,n-1), (1,1), ...
    return np.triu_indices(n)


def svec(X, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Vectorize a symmetric matrix so that ``svec(X) @ svec(Y) == trace(X @ Y)``.

    Coordinates follow the row-major upper triangle; off-diagonal entries are
    scaled by sqrt(2).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("svec needs a square matrix")
    scale = max(1.0, np.abs(X).max(initial=0.0))
    if np.abs(X - X.T).max(initial=0.0) > tol * scale:
        raise ValueError("svec needs a symmetric matrix")
    n = X.shape[0]
    i, j = _triu_indices(n)
    v = X[i, j].copy()
    v[i != j] *= SQRT2
    return v


def svec_order(dim: int) -> int:
    n = int(round((np.sqrt(8 * dim + 1) - 1) / 2))
    if n * (n + 1) // 2 != dim:
        raise ValueError(f"{dim} is not a triangular number")
    return n


def smat(v) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    n = svec_order(v.size)
    i, j = _triu_indices(n)
    vals = np.where(i == j, v, v / SQRT2)
    X = np.zeros((n, n))
    X[i, j] = vals
    X[j, i] = vals
    return X


def svec_operator(fn, order: int) -> np.ndarray:
    """Matrix of the linear map ``X -> fn(X)`` on symmetric matrices, in svec coordinates."""
    dim = order * (order + 1) // 2
    cols = [svec(fn(smat(e))) for e in np.eye(dim)]
    return np.column_stack(cols)


def congruence_operator(B) -> np.ndarray:
    """svec matrix of X -> B X B^T (the symmetric part of B kron B)."""
    B = np.asarray(B, dtype=float)
    return svec_operator(lambda X: B @ X @ B.T, B.shape[0])


def lyapunov_operator(B) -> np.ndarray:
    """svec matrix of X -> B X + X B^T (the Kronecker sum restricted to symmetric X)."""
    B = np.asarray(B, dtype=float)
    return svec_operator(lambda X: B @ X + X @ B.T, B.shape[0])


# membership -------------------------------------------------------------------

def _check_dim(cone: ConeSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != cone.ambient_dim:
        raise ValueError(f"vector of length {x.size} tested against a cone in "
                         f"R^{cone.ambient_dim}")
    return x


def _normalized(x):
    s = np.abs(x).max(initial=0.0)
    return None if s == 0.0 else x / s


def margin(cone: ConeSpec, x) -> float:
    """Signed distance-like margin of x (scaled to unit inf-norm) w.r.t. the cone.

    Nonnegative iff x is in the cone, positive iff x is in its interior.
    Returns 0 for x = 0.
    """
    x = _check_dim(cone, x)
    u = _normalized(x)
    if u is None:
        return 0.0
    if cone.kind is ConeKind.ORTHANT:
        return float(u.min())
    if cone.kind is ConeKind.LORENTZ:
        return float(u[0] - np.linalg.norm(u[1:]))
    if cone.kind is ConeKind.PSD:
        return float(np.linalg.eigvalsh(smat(u))[0])
    return float((cone.facets @ u).min())


def contains(cone: ConeSpec, x, tol: float = DEFAULT_TOL) -> bool:
    return margin(cone, x) >= -tol


def contains_interior(cone: ConeSpec, x, tol: float = DEFAULT_TOL) -> bool:
    x = _check_dim(cone, x)
    if not x.any():
        return False
    return margin(cone, x) > tol


def _polyhedral_dual_residual(M, y):
    # y in K* iff y = M^T lam for some lam >= 0
    _, res = nnls(M.T, y, maxiter=50 * M.shape[0] + 100)
    return res


def dual_contains(cone: ConeSpec, y, tol: float = DEFAULT_TOL) -> bool:
    """Membership in the dual cone K*."""
    y = _check_dim(cone, y)
    if cone.self_dual:
        return contains(cone, y, tol)
    u = _normalized(y)
    if u is None:
        return True
    return _polyhedral_dual_residual(cone.facets, u) <= tol


def dual_contains_interior(cone: ConeSpec, y, tol: float = DEFAULT_TOL) -> bool:
    """Membership in int K*.

    For polyhedral cones, w = M^T 1 lies in int K* (M has full column rank), so
    y is interior with margin ``tol`` iff y - tol * w/|w| stays in K*.
    """
    y = _check_dim(cone, y)
    if cone.self_dual:
        return contains_interior(cone, y, tol)
    u = _normalized(y)
    if u is None:
        return False
    w = cone.facets.sum(axis=0)
    w = w / np.abs(w).max()
    shifted = u - max(tol, 1e-12) * w
    return _polyhedral_dual_residual(cone.facets, shifted) <= 1e-12


def candidate_attack_set(cone: ConeSpec, tol: float = DEFAULT_TOL) -> list[int]:
    """Indices i (0-based) with e_i in K: the positions an attacker can inject into.

    Raises :class:`AssumptionViolated` when the set is empty.
    """
    eye = np.eye(cone.ambient_dim)
    out = [i for i in range(cone.ambient_dim) if contains(cone, eye[i], tol)]
    if not out:
        raise AssumptionViolated(f"no canonical basis vector lies in {cone}")
    return out


def candidate_sensor_set(cone: ConeSpec, interior_only: bool = False,
                         tol: float = DEFAULT_TOL) -> list[int]:
    """Indices j (0-based) with e_j in K* (or int K* when ``interior_only``)."""
    eye = np.eye(cone.ambient_dim)
    test = dual_contains_interior if interior_only else dual_contains
    return [j for j in range(cone.ambient_dim) if test(cone, eye[j], tol)]


def check_dual_assumption(cone: ConeSpec, tol: float = DEFAULT_TOL) -> list[int]:
    """Like :func:`candidate_sensor_set` but raises when {e_j in K*} is empty."""
    out = candidate_sensor_set(cone, False, tol)
    if not out:
        raise AssumptionViolated(f"no canonical basis vector lies in the dual of {cone}")
    return out


# sampling ------------------------------------------------------------------------

def sample_boundary_pairs(cone: ConeSpec, count: int, rng: np.random.Generator):
    """Yield complementary pairs (x, y), x in bd K, y in bd K*, <x, y> = 0.

    Only the Lorentz and PSD cones are supported; both are self-dual.
    """
    n = cone.ambient_dim
    if cone.kind is ConeKind.LORENTZ:
        if n == 1:
            # the half-line has no nonzero complementary pairs
            return
        for _ in range(count):
            u = rng.standard_normal(n - 1)
            u /= np.linalg.norm(u)
            yield np.concatenate(([1.0], u)), np.concatenate(([1.0], -u))
    elif cone.kind is ConeKind.PSD:
        k = cone.order
        for _ in range(count):
            Q, _ = np.linalg.qr(rng.standard_normal((k, k)))
            u, v = Q[:, 0], Q[:, 1 % k]
            if k == 1:
                return
            yield svec(np.outer(u, u)), svec(np.outer(v, v))
    else:
        raise ValueError(f"no boundary sampler for {cone.kind.value} cones")


def sample_extreme_rays(cone: ConeSpec, count: int, rng: np.random.Generator):
    """Yield random extreme rays of a Lorentz or PSD cone."""
    n = cone.ambient_dim
    if cone.kind is ConeKind.LORENTZ:
        for _ in range(count):
            u = rng.standard_normal(n - 1)
            nu = np.linalg.norm(u)
            yield np.concatenate(([1.0], u / nu if nu else u))
    elif cone.kind is ConeKind.PSD:
        for _ in range(count):
            u = rng.standard_normal(cone.order)
            u /= np.linalg.norm(u)
            yield svec(np.outer(u, u))
    else:
        raise ValueError(f"no ray sampler for {cone.kind.value} cones")
