"""Fixed-step RK4 simulation of x' = A x + B d(t), y = C x."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import cones
from .attacks import AttackPlan, LtiSystem

DIVERGENCE = 1e12
DEFAULT_DT = 1e-3
DEFAULT_T_END = 10.0


class Label(enum.Enum):
    NOMINAL = "nominal"
    ATTACKED = "attacked"
    SPOOFED = "spoofed"


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    outputs: np.ndarray
    label: Label
    truncated: bool = False

    def to_csv(self, path) -> None:
        n, l = self.states.shape[1], self.outputs.shape[1]
        header = ["t"] + [f"x_{k + 1}" for k in range(n)] + [f"y_{k + 1}" for k in range(l)] + ["label"]
        with open(path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for t, x, y in zip(self.times, self.states, self.outputs):
                vals = [repr(float(t))] + [repr(float(v)) for v in x] + [repr(float(v)) for v in y]
                fh.write(",".join(vals + [self.label.value]) + "\n")


class Divergence(RuntimeError):
    pass


def simulate(sys: LtiSystem, x0, plan: AttackPlan | None = None,
             t_end: float = DEFAULT_T_END, dt: float = DEFAULT_DT,
             label: Label | None = None) -> Trajectory:
    """Classical RK4 with the attack input evaluated analytically at stage times.

    A trajectory whose state exceeds 1e12 in inf-norm is cut before that step
    and flagged ``truncated``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_end < dt:
        raise ValueError("t_end must be at least dt")
    A, B, C = sys.A, sys.B, sys.C
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    if x.size != sys.n:
        raise ValueError(f"x0 has {x.size} entries, state dimension is {sys.n}")
    if plan is not None and np.asarray(plan.d0).size != sys.m:
        raise ValueError(f"plan drives {np.asarray(plan.d0).size} inputs, system has {sys.m}")
    if label is None:
        label = Label.NOMINAL if plan is None else Label.ATTACKED
    steps = int(round(t_end / dt))
    times = np.arange(steps + 1) * dt
    h = dt
    n = sys.n
    I = np.eye(n)
    A2 = A @ A
    A3 = A2 @ A
    # one RK4 step on a linear system, written out: x+ = Phi x + h/6 (G1 u1 + G2 u2 + u3)
    # with u1, u2, u3 the input B d at the start, midpoint and end of the step
    phi = I + h * A + h ** 2 / 2 * A2 + h ** 3 / 6 * A3 + h ** 4 / 24 * (A3 @ A)
    forcing = None
    if plan is not None:
        G1 = I + h * A + h ** 2 / 2 * A2 + h ** 3 / 4 * A3
        G2 = 4 * I + 2 * h * A + h ** 2 / 2 * A2
        u1 = plan.signal(times[:-1]) @ B.T
        u2 = plan.signal(times[:-1] + h / 2) @ B.T
        u3 = plan.signal(times[1:]) @ B.T
        forcing = (h / 6) * (u1 @ G1.T + u2 @ G2.T + u3)

    states = np.empty((steps + 1, n))
    states[0] = x
    phi_t = phi.T
    with np.errstate(over="ignore", invalid="ignore"):
        if forcing is None:
            for k in range(steps):
                x = x @ phi_t
                states[k + 1] = x
        else:
            for k in range(steps):
                x = x @ phi_t + forcing[k]
                states[k + 1] = x
        bad = ~np.isfinite(states).all(axis=1) | (np.abs(states).max(axis=1) > DIVERGENCE)
    truncated = bool(bad.any())
    if truncated:
        last = int(np.argmax(bad))
        states = states[:last]
        times = times[:last]
    return Trajectory(times, states, states @ C.T, label, truncated)


def undetectability_gap(sys: LtiSystem, plan: AttackPlan, t_end: float = DEFAULT_T_END,
                        dt: float = DEFAULT_DT) -> float:
    """sup_t |y_attacked(t) - y_spoofed(t)|_inf over [0, t_end]."""
    att = simulate(sys, plan.x0, plan, t_end, dt)
    spf = simulate(sys, plan.x_spoof, None, t_end, dt, label=Label.SPOOFED)
    if att.truncated or spf.truncated:
        raise Divergence("simulation diverged before t_end")
    return float(np.abs(att.outputs - spf.outputs).max())


def cone_violation(traj: Trajectory, cone: cones.ConeSpec) -> float:
    """Largest membership deficit along the trajectory; 0 if it stays in the cone."""
    worst = 0.0
    for x in traj.states:
        s = np.abs(x).max(initial=0.0)
        if s == 0:
            continue
        worst = max(worst, -cones.margin(cone, x) * s)
    return float(worst)
