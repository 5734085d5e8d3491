"""Linearized power-network models used as test beds."""
from __future__ import annotations

import numpy as np

from . import network
from .attacks import LtiSystem
from .cones import ConeSpec
from .network import Digraph


def _positive(name, v, n):
    v = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
    if np.any(v <= 0):
        raise ValueError(f"{name} must be positive")
    return v


def _symmetric(g: Digraph):
    for (i, j), w in g.weights.items():
        if g.weights.get((j, i)) != w:
            raise ValueError(f"line ({i}, {j}) is not symmetric")


def lines(n: int, branches) -> Digraph:
    """Undirected network from (i, j, weight) triples, 0-based."""
    w = {}
    for i, j, b in branches:
        w[(i, j)] = b
        w[(j, i)] = b
    return Digraph(n, w)


def droop_matrix(g: Digraph, v_bar, tau, kappa) -> np.ndarray:
    """-diag(v_bar) diag(tau)^{-1} (diag(kappa) + B_G), B_G the susceptance Laplacian."""
    _symmetric(g)
    n = g.n_nodes
    v_bar = _positive("v_bar", v_bar, n)
    tau = _positive("tau", tau, n)
    kappa = _positive("kappa", kappa, n)
    BG = network.laplacian(g)
    return -np.diag(v_bar / tau) @ (np.diag(kappa) + BG)


def gen_droop_network(g: Digraph, v_bar, tau, kappa, b_index=0, c_index=0) -> LtiSystem:
    """Voltage-magnitude dynamics of inverter buses under quadratic droop control."""
    A = droop_matrix(g, v_bar, tau, kappa)
    return LtiSystem.from_indices(A, b_index, c_index, ConeSpec.orthant(g.n_nodes))


def swing_matrix(g: Digraph, inertia, damping) -> np.ndarray:
    """[[0, I], [-M^{-1} L_k, -M^{-1} D]] for m_i th_i'' + d_i th_i' + sum k_ij (th_i - th_j) = P_i."""
    n = g.n_nodes
    inertia = _positive("inertia", inertia, n)
    damping = _positive("damping", damping, n)
    L = network.laplacian(g) / inertia[:, None]
    return np.block([[np.zeros((n, n)), np.eye(n)],
                     [-L, -np.diag(damping / inertia)]])


def gen_swing_network(g: Digraph, inertia, damping, b_index=0, c_index=None) -> LtiSystem:
    """Linearized phase-angle dynamics; state is (angles, frequencies)."""
    A = swing_matrix(g, inertia, damping)
    n = g.n_nodes
    if c_index is None:
        c_index = n + b_index
    return LtiSystem.from_indices(A, b_index, c_index, ConeSpec.orthant(2 * n))


# 4-bus line network with unit voltages and time constants; the gains and
# susceptances below reproduce the published system matrix entry for entry.
FOUR_BUS_SUSCEPTANCE = ((0, 1, 1.48), (1, 2, 1.57), (2, 3, 0.64))
FOUR_BUS_KAPPA = (2.55, 0.52, 1.03, 0.61)


def four_bus() -> LtiSystem:
    g = lines(4, FOUR_BUS_SUSCEPTANCE)
    return gen_droop_network(g, 1.0, 1.0, FOUR_BUS_KAPPA, b_index=0, c_index=2)


# WSCC 3-machine 9-bus topology with line susceptances 1/x (per unit).
NINE_BUS_REACTANCE = (
    (0, 3, 0.0576), (1, 6, 0.0625), (2, 8, 0.0586),
    (3, 4, 0.085), (3, 5, 0.092), (4, 6, 0.161),
    (5, 8, 0.17), (6, 7, 0.072), (7, 8, 0.1008),
)
# machine and load-bus coefficients; chosen, not taken from any data set
NINE_BUS_INERTIA = (23.64, 6.4, 3.01, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0)
NINE_BUS_DAMPING = (2.4, 1.6, 1.2, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)


def nine_bus_graph() -> Digraph:
    return lines(9, [(i, j, 1.0 / x) for i, j, x in NINE_BUS_REACTANCE])


def nine_bus(b_index: int = 0, c_index: int = 9) -> LtiSystem:
    return gen_swing_network(nine_bus_graph(), NINE_BUS_INERTIA, NINE_BUS_DAMPING,
                             b_index, c_index)
