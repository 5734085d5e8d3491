"""Sensor placement against zero-dynamics attacks, and exact verification.

A single sensor c defends against an attack entering through b when, at every
real s0 >= 0, the Rosenbrock matrix has full rank or every kernel vector has
d0 = 0 (successful); "almost successful" relaxes this to s0 > 0. The
continuum over s0 is reduced to a finite check: only transmission zeros can
make the matrix rank deficient, so we enumerate them (plus s0 = 0, always).
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import cones, matrix_classes as mc, network
from .attacks import (ZERO_TOL, DegenerateSystem, LtiSystem, basis_indices,
                      rosenbrock_null_basis, transmission_zeros)
from .cones import ConeSpec
from .matrix_classes import Verdict
from .network import Digraph

AXIS_TOL = 1e-8
S0_GRID = (0.0, 0.1, 1.0, 10.0, 100.0)


class DefenseStatus(enum.IntEnum):
    # ordered by strength so min() over pairs gives the weakest verdict
    FAILED = 0
    ALMOST_SUCCESSFUL = 1
    SUCCESSFUL = 2


class Reason(enum.Enum):
    FULL_RANK = "full_rank"
    NULL_FORCES_D0_ZERO = "null_forces_d0_zero"
    ZERO_AT_ORIGIN_ONLY = "zero_at_origin_only"
    RANK_DEFICIENT_WITH_ATTACK = "rank_deficient_with_attack"


class Rule(enum.Enum):
    STABLE_INTERIOR_DUAL = "stable: sensors with e_j in int K*"
    STABLE_IRREDUCIBLE_DUAL = "stable, K-irreducible: sensors with e_j in K*"
    MARGINAL_IRREDUCIBLE = "marginally stable, K-irreducible: sensors with e_j in K*"
    FIRST_ORDER_COMPONENT = "first-order consensus: sensor in the attacked component"
    FIRST_ORDER_SINK = "first-order consensus: sensor in the universal sink component"
    SECOND_ORDER_DAMPED = "second-order consensus with velocity damping"
    SECOND_ORDER_RELATIVE_POSITION = "second-order relative-velocity consensus, position attacks"
    SECOND_ORDER_RELATIVE_VELOCITY = "second-order relative-velocity consensus, velocity attacks"
    VERIFIED = "exhaustive numerical verification"


@dataclass(frozen=True)
class DefenseVerdict:
    status: DefenseStatus
    reason: Reason
    witness_zero: complex | None = None
    complex_rhp_zeros: tuple[complex, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status is not DefenseStatus.FAILED


@dataclass
class PlacementReport:
    attack_set: list[int]
    sensor_set: list[int]
    rule: Rule
    claim: DefenseStatus
    per_pair: dict[tuple[int, int], DefenseVerdict] | None = None
    notes: list[str] = field(default_factory=list)

    def discrepancies(self) -> list[tuple[int, int]]:
        """Pairs whose verified status is weaker than the rule's claim."""
        if self.per_pair is None:
            return []
        return [k for k, v in self.per_pair.items() if v.status < self.claim]

    def worst(self) -> DefenseStatus | None:
        if not self.per_pair:
            return None
        return min(v.status for v in self.per_pair.values())


# verification --------------------------------------------------------------------

def _kernel_allows_attack(sys: LtiSystem, s0, tol) -> bool | None:
    """None if the Rosenbrock matrix has full rank at s0; otherwise whether some
    kernel vector has d0 != 0."""
    V = rosenbrock_null_basis(sys, s0, tol)
    if V.shape[1] == 0:
        return None
    d_part = V[sys.n:]
    return bool(np.linalg.norm(d_part, 2) > 1e-6)


def _candidate_points(sys: LtiSystem, tol, real_only):
    """Real s0 >= 0 (and complex zeros with Re >= 0 when not real_only) to test."""
    try:
        zs = transmission_zeros(sys, tol)
    except DegenerateSystem:
        # the transfer matrix is rank deficient for every s: any s0 > 0 works
        return [0.0, 1.0], ()
    pts, rhp_complex = [0.0], []
    for z in zs:
        if z.real < -AXIS_TOL * max(1.0, abs(z)):
            continue
        if abs(z.imag) <= AXIS_TOL * max(1.0, abs(z)):
            if abs(z.real) > AXIS_TOL:
                pts.append(float(z.real))
        else:
            rhp_complex.append(complex(z))
            if not real_only:
                pts.append(complex(z))
    return pts, tuple(rhp_complex)


def _verdict(sys: LtiSystem, tol, real_only) -> DefenseVerdict:
    pts, rhp_complex = _candidate_points(sys, tol, real_only)
    deficient_safe = None
    at_origin = False
    for s0 in pts:
        attack = _kernel_allows_attack(sys, s0, tol)
        if attack is None:
            continue
        if not attack:
            deficient_safe = deficient_safe if deficient_safe is not None else s0
            continue
        if s0 == 0.0:
            at_origin = True
            continue
        return DefenseVerdict(DefenseStatus.FAILED, Reason.RANK_DEFICIENT_WITH_ATTACK,
                              s0, rhp_complex)
    if at_origin:
        return DefenseVerdict(DefenseStatus.ALMOST_SUCCESSFUL, Reason.ZERO_AT_ORIGIN_ONLY,
                              0.0, rhp_complex)
    if deficient_safe is not None:
        return DefenseVerdict(DefenseStatus.SUCCESSFUL, Reason.NULL_FORCES_D0_ZERO,
                              deficient_safe, rhp_complex)
    return DefenseVerdict(DefenseStatus.SUCCESSFUL, Reason.FULL_RANK, None, rhp_complex)


def verify_defense(sys: LtiSystem, tol: float = ZERO_TOL,
                   real_only: bool = True) -> DefenseVerdict:
    """Exact verdict for a single attack channel b = e_i and single sensor c = e_j.

    ``real_only`` restricts the test to real s0 >= 0, the exponential attacks
    that keep a cone-invariant system in its cone. With ``real_only=False``
    complex zeros with nonnegative real part also count as failures; they are
    reported in ``complex_rhp_zeros`` either way.
    """
    if not sys.siso:
        raise ValueError("verify_defense handles one input and one output; "
                         "use verify_defense_mimo")
    if basis_indices(sys.B, 1) is None or basis_indices(sys.C, 0) is None:
        raise ValueError("b and c must be canonical basis vectors")
    return _verdict(sys, tol, real_only)


def verify_defense_mimo(sys: LtiSystem, tol: float = ZERO_TOL,
                        real_only: bool = True) -> DefenseVerdict:
    """Verdict for m attack channels and m sensors, all distinct basis vectors."""
    if sys.m != sys.l:
        raise ValueError(f"need as many sensors as attack channels, got "
                         f"m = {sys.m}, l = {sys.l}")
    ib, ic = basis_indices(sys.B, 1), basis_indices(sys.C, 0)
    if ib is None or ic is None:
        raise ValueError("B columns and C rows must be canonical basis vectors")
    if len(set(ib)) != len(ib) or len(set(ic)) != len(ic):
        raise ValueError("repeated basis vectors in B or C")
    return _verdict(sys, tol, real_only)


def transfer_rank(sys: LtiSystem, s0, tol: float = ZERO_TOL) -> int:
    """Rank of C (s0 I - A)^{-1} B, or of the Rosenbrock matrix minus n when s0 is
    an eigenvalue of A (the two agree away from the spectrum)."""
    n = sys.n
    M = s0 * np.eye(n) - sys.A
    sv_m = np.linalg.svd(M, compute_uv=False)
    if sv_m[-1] > tol * sv_m[0]:
        G = sys.C @ np.linalg.solve(M, sys.B)
        sv = np.linalg.svd(G, compute_uv=False)
        return int(np.sum(sv > tol * max(1.0, sv[0] if sv.size else 0.0)))
    sv = np.linalg.svd(sys.rosenbrock(s0), compute_uv=False)
    return int(np.sum(sv > tol * sv[0])) - n


def mimo_exhaustive(A, m: int, tol: float = ZERO_TOL,
                    real_only: bool = True) -> dict[tuple[tuple[int, ...], tuple[int, ...]], DefenseVerdict]:
    """Verdict for every (attack set, sensor set) pair of size m; small n only."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n > 8 or m > 2:
        raise ValueError("exhaustive MIMO search is limited to n <= 8, m <= 2")
    out = {}
    for ib in itertools.combinations(range(n), m):
        for ic in itertools.combinations(range(n), m):
            sys = LtiSystem.from_indices(A, list(ib), list(ic))
            out[(ib, ic)] = verify_defense_mimo(sys, tol, real_only)
    return out


def verify_pairs(A, attacks, sensors, tol: float = ZERO_TOL,
                 real_only: bool = True) -> dict[tuple[int, int], DefenseVerdict]:
    A = np.asarray(A, dtype=float)
    return {(i, j): verify_defense(LtiSystem.from_indices(A, i, j), tol, real_only)
            for i in attacks for j in sensors}


# stability ------------------------------------------------------------------------

def is_marginally_stable(A, tol: float = AXIS_TOL) -> bool:
    """All eigenvalues in the closed left half-plane, at least one on the axis,
    and every on-axis eigenvalue semisimple (rank(A - lam I) = n - multiplicity)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    w = np.linalg.eigvals(A)
    if w.real.max() > tol:
        return False
    on_axis = w[np.abs(w.real) <= tol]
    if on_axis.size == 0:
        return False
    seen = []
    for lam in on_axis:
        if any(abs(lam - s) <= 1e-6 for s in seen):
            continue
        seen.append(lam)
        mult = int(np.sum(np.abs(on_axis - lam) <= 1e-6))
        rank = np.linalg.matrix_rank(A - lam * np.eye(n), tol=1e-8 * max(1.0, np.abs(A).max()))
        if rank != n - mult:
            return False
    return True


# cone placement -------------------------------------------------------------------

def placement_cone_stable(A, cone: ConeSpec, exhaustive: bool = False,
                          tol: float = cones.DEFAULT_TOL, samples: int = mc.DEFAULT_SAMPLES,
                          seed=0) -> PlacementReport:
    """Attack positions {e_i in K} and sensor positions {e_j in int K*}, widened to
    {e_j in K*} when A is K-irreducible."""
    A = np.asarray(A, dtype=float)
    if not mc.is_hurwitz(A):
        raise ValueError("A is not Hurwitz")
    rng = np.random.default_rng(seed)
    cross = mc.is_cross_positive(A, cone, tol, samples, rng)
    if cross.refuted:
        raise ValueError("A is not cross-positive over the cone")
    attack = cones.candidate_attack_set(cone, tol)
    notes = []
    if cross.verdict is Verdict.UNDETERMINED:
        notes.append(f"cross-positivity not refuted by {samples} samples (not certified)")
    irr = mc.is_irreducible(A, cone, tol)
    if irr.verdict is Verdict.YES:
        sensors = cones.check_dual_assumption(cone, tol)
        rule = Rule.STABLE_IRREDUCIBLE_DUAL
    else:
        sensors = cones.candidate_sensor_set(cone, True, tol)
        rule = Rule.STABLE_INTERIOR_DUAL
        if not sensors:
            notes.append("no basis vector lies in int K*; irreducibility is needed "
                         "to place a sensor on the boundary of K*")
    report = PlacementReport(attack, sensors, rule, DefenseStatus.SUCCESSFUL, notes=notes)
    if exhaustive:
        report.per_pair = verify_pairs(A, attack, sensors)
    return report


def placement_cone_marginal(A, cone: ConeSpec, exhaustive: bool = False,
                            tol: float = cones.DEFAULT_TOL) -> PlacementReport:
    """Marginally stable, K-irreducible A: sensors anywhere in {e_j in K*}."""
    A = np.asarray(A, dtype=float)
    if not is_marginally_stable(A):
        raise ValueError("A is not marginally stable")
    if mc.is_cross_positive(A, cone, tol).refuted:
        raise ValueError("A is not cross-positive over the cone")
    irr = mc.is_irreducible(A, cone, tol)
    if irr.verdict is not Verdict.YES:
        raise ValueError(f"K-irreducibility not certified ({irr.verdict.value})")
    attack = cones.candidate_attack_set(cone, tol)
    sensors = cones.check_dual_assumption(cone, tol)
    notes = []
    for i in attack:
        # at s0 = 0 the defense hinges on e_i lying outside Im(A)
        if network.basis_in_image(A, i):
            notes.append(f"e_{i} lies in Im(A): s0 = 0 branch not covered")
    report = PlacementReport(attack, sensors, Rule.MARGINAL_IRREDUCIBLE,
                             DefenseStatus.SUCCESSFUL, notes=notes)
    if exhaustive:
        report.per_pair = verify_pairs(A, attack, sensors)
    return report


# multi-agent placement ------------------------------------------------------------

def placement_first_order(g: Digraph, exhaustive: bool = False) -> list[PlacementReport]:
    """Per-component reports, plus a global report when a universal sink exists.

    Sensors inside the component that every node influences detect attacks
    anywhere, since the resolvent entry (sensor, attack) is positive exactly
    when an influence walk runs from the attacked node to the sensor.
    """
    L = network.laplacian(g)
    A = -L
    d = network.scc_decompose(g)
    reports = []
    for comp in d.components:
        nodes = list(comp)
        r = PlacementReport(nodes, nodes, Rule.FIRST_ORDER_COMPONENT,
                            DefenseStatus.ALMOST_SUCCESSFUL)
        if exhaustive:
            r.per_pair = verify_pairs(A, nodes, nodes)
        reports.append(r)
    sink = network.universal_sink_component(g)
    if sink is not None and d.n_components > 1:
        r = PlacementReport(list(range(g.n_nodes)), sorted(sink), Rule.FIRST_ORDER_SINK,
                            DefenseStatus.ALMOST_SUCCESSFUL)
        if exhaustive:
            r.per_pair = verify_pairs(A, r.attack_set, r.sensor_set)
        reports.append(r)
    return reports


def damped_system_matrix(L, gains) -> np.ndarray:
    """[[0, I], [-L, -K]] for double integrators with velocity damping K = diag(gains)."""
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    K = np.diag(np.broadcast_to(np.asarray(gains, dtype=float), (n,)))
    return np.block([[np.zeros((n, n)), np.eye(n)], [-L, -K]])


def relative_velocity_system_matrix(L, r: float) -> np.ndarray:
    """[[0, I], [-L, -r L]] for double integrators with relative-velocity coupling."""
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    return np.block([[np.zeros((n, n)), np.eye(n)], [-L, -r * L]])


def _require_strong(g):
    if not network.is_strongly_connected(g):
        raise ValueError("digraph is not strongly connected")


def placement_second_order_damped(g: Digraph, gains, exhaustive: bool = False) -> PlacementReport:
    """Every position and velocity channel may be attacked; any single sensor succeeds."""
    _require_strong(g)
    gains = np.broadcast_to(np.asarray(gains, dtype=float), (g.n_nodes,))
    if np.any(gains <= 0):
        raise ValueError("damping gains must be positive")
    A = damped_system_matrix(network.laplacian(g), gains)
    allpos = list(range(2 * g.n_nodes))
    report = PlacementReport(allpos, allpos, Rule.SECOND_ORDER_DAMPED,
                             DefenseStatus.SUCCESSFUL)
    if exhaustive:
        report.per_pair = verify_pairs(A, allpos, allpos)
    return report


def placement_second_order_velocity(g: Digraph, r: float,
                                    exhaustive: bool = False) -> list[PlacementReport]:
    """Position attacks: almost successful; velocity attacks: successful."""
    _require_strong(g)
    if not r > 0:
        raise ValueError("velocity coupling r must be positive")
    n = g.n_nodes
    A = relative_velocity_system_matrix(network.laplacian(g), r)
    sensors = list(range(2 * n))
    reports = [
        PlacementReport(list(range(n)), sensors, Rule.SECOND_ORDER_RELATIVE_POSITION,
                        DefenseStatus.ALMOST_SUCCESSFUL),
        PlacementReport(list(range(n, 2 * n)), sensors, Rule.SECOND_ORDER_RELATIVE_VELOCITY,
                        DefenseStatus.SUCCESSFUL),
    ]
    if exhaustive:
        for rep in reports:
            rep.per_pair = verify_pairs(A, rep.attack_set, sensors)
    return reports


# closed-form rank expressions --------------------------------------------------------

def damped_case_matrices(L, gains, s0: float) -> dict[str, np.ndarray]:
    """Matrices whose (j, i) entries decide the rank at s0 > 0 for the damped system.

    Keys: ``pp`` (position attack, position sensor), ``vp`` (velocity attack,
    position sensor), ``vv`` (velocity attack, velocity sensor) and ``pv``
    (position attack, velocity sensor).
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    K = np.diag(np.broadcast_to(np.asarray(gains, dtype=float), (n,)))
    I = np.eye(n)
    Minv = np.linalg.inv(s0 ** 2 * I + s0 * K + L)
    P = Minv @ (s0 * I + K)
    return {"pp": P, "vp": Minv, "vv": s0 * Minv, "pv": I - s0 * P}


def relative_velocity_case_matrices(L, r: float, s0: float) -> dict[str, np.ndarray]:
    """As :func:`damped_case_matrices` for [[0, I], [-L, -r L]]."""
    L = np.asarray(L, dtype=float)
    I = np.eye(L.shape[0])
    Minv = np.linalg.inv(s0 ** 2 * I + (s0 * r + 1) * L)
    P = Minv @ (s0 * I + r * L)
    return {"pp": P, "vp": Minv, "vv": s0 * Minv, "pv": I - s0 * P}


def jacobi_minor_pair(M, rows, cols) -> tuple[float, float, float]:
    """(det(inv(M)[rows, cols]), det(M[comp(cols), comp(rows)]), det(M)).

    Jacobi's complementary minor identity: the first equals
    +-(second / third), so the two minors vanish together.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    rows, cols = list(rows), list(cols)
    Minv = np.linalg.inv(M)
    crow = [k for k in range(n) if k not in cols]
    ccol = [k for k in range(n) if k not in rows]
    a = np.linalg.det(Minv[np.ix_(rows, cols)])
    b = np.linalg.det(M[np.ix_(crow, ccol)]) if crow else 1.0
    return float(a), float(b), float(np.linalg.det(M))


def augmented_laplacian(L, s0: float) -> np.ndarray:
    """Laplacian with an extra node 0 from which every node receives weight s0.

    Rows/columns 1..n of the result equal s0 I + L.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    out = np.zeros((n + 1, n + 1))
    out[1:, 1:] = L + s0 * np.eye(n)
    out[1:, 0] = -s0
    return out
