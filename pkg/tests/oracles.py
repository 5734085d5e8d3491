"""Reference computations that share no code with the package.

Exact arithmetic (sympy) for zeros and defense verdicts on rational matrices,
boolean transitive closure for graph questions, and scipy's matrix
exponential for trajectories.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy as sp
from scipy.linalg import expm

s = sp.Symbol("s")


def rational(A):
    """Sympy matrix of exact rationals from floats that are short decimals."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return sp.Matrix(A.shape[0], A.shape[1],
                     lambda i, j: sp.Rational(str(Fraction(A[i, j]).limit_denominator(10**6))))


def rosenbrock_poly(A, B, C) -> sp.Poly:
    """det [[sI - A, B], [C, 0]] as an exact polynomial in s (square systems).

    The degree is at most n, so exact values at s = 0..n determine it.
    """
    A, B, C = rational(A), rational(B), rational(C)
    n, m = A.shape[0], B.shape[1]
    pts = []
    for k in range(n + 1):
        R = sp.BlockMatrix([[k * sp.eye(n) - A, B], [C, sp.zeros(C.shape[0], m)]]).as_explicit()
        pts.append((k, R.det(method="bareiss")))
    return sp.Poly(sp.interpolate(pts, s), s)


def zeros(A, B, C) -> list[complex]:
    p = rosenbrock_poly(A, B, C)
    if p.is_zero:
        raise ValueError("degenerate")
    if p.degree() == 0:
        return []
    return sorted((complex(r) for r in sp.Poly(p, s).nroots(n=30)),
                  key=lambda z: (-z.real, z.imag))


def _kernel_has_attack(A, B, C, s0) -> bool | None:
    A, B, C = rational(A), rational(B), rational(C)
    n, m = A.shape[0], B.shape[1]
    R = sp.BlockMatrix([[s0 * sp.eye(n) - A, B], [C, sp.zeros(C.shape[0], m)]]).as_explicit()
    ker = R.nullspace()
    if not ker:
        return None
    return any(any(v[n + k] != 0 for k in range(m)) for v in ker)


def defense_verdict(A, B, C) -> str:
    """'SUCCESSFUL' | 'ALMOST_SUCCESSFUL' | 'FAILED' from exact rank analysis.

    The Rosenbrock determinant is split into irreducible factors over Q. A root
    of a factor that does not divide det(sI - A) is off the spectrum of A, where
    any kernel vector has d0 != 0. A factor shared with det(sI - A) needs the
    exact kernel, which is only supported for linear (rational root) factors.
    """
    p = rosenbrock_poly(A, B, C)
    if p.is_zero:
        return "FAILED"
    chi = rational(A).charpoly(s).as_poly()
    origin_attack = False
    for f, _ in p.factor_list()[1]:
        roots = [r for r in sp.real_roots(f) if r >= 0]
        if not roots:
            continue
        if chi.rem(f).is_zero:
            if f.degree() != 1:
                raise NotImplementedError("irrational root shared with the spectrum")
            attack = _kernel_has_attack(A, B, C, roots[0])
        else:
            attack = True
        if not attack:
            continue
        if any(r != 0 for r in roots):
            return "FAILED"
        origin_attack = True
    return "ALMOST_SUCCESSFUL" if origin_attack else "SUCCESSFUL"


# graphs ---------------------------------------------------------------------------

def reach_matrix(adj) -> np.ndarray:
    """R[p, q] = True iff q influences p through a walk (a_pq > 0 is q -> p)."""
    adj = np.asarray(adj) > 0
    n = adj.shape[0]
    R = adj.copy() | np.eye(n, dtype=bool)
    for k in range(n):
        R |= np.outer(R[:, k], R[k, :])
    return R


def sccs(adj) -> set[frozenset[int]]:
    R = reach_matrix(adj)
    mutual = R & R.T
    return {frozenset(np.flatnonzero(mutual[i])) for i in range(R.shape[0])}


def universal_sink(adj) -> frozenset[int] | None:
    """Nodes that every node influences; None when empty."""
    R = reach_matrix(adj)
    nodes = frozenset(int(p) for p in range(R.shape[0]) if R[p].all())
    return nodes or None


# trajectories ---------------------------------------------------------------------

def free_response(A, x0, t) -> np.ndarray:
    return expm(np.asarray(A, dtype=float) * t) @ np.asarray(x0, dtype=float)


# cones ----------------------------------------------------------------------------

def polyhedral_rays_2d(M) -> list[np.ndarray]:
    """Extreme rays of {x in R^2 : Mx >= 0} by intersecting facet lines."""
    M = np.asarray(M, dtype=float)
    rays = []
    for row in M:
        for d in (np.array([-row[1], row[0]]), np.array([row[1], -row[0]])):
            if np.all(M @ d >= -1e-12):
                rays.append(d)
    return rays
