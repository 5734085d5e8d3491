"""Command-line driver: ``cis <subcommand> ...``.

Exit codes: 0 success, 2 verdict failure (defense failed, attack infeasible,
undetectability gap above threshold), 1 error. Files may be given as
``builtin:<name>`` to use a bundled fixture.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys as _sys
from pathlib import Path

import numpy as np

from . import attacks, defense, matrix_classes as mc, model_io, network, simulate
from .attacks import ZERO_TOL

EXIT_OK, EXIT_ERROR, EXIT_VERDICT = 0, 1, 2
GAP_TOL = 1e-6


def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


def _fmt(z):
    z = complex(z)
    return f"{z.real:.10g}" if z.imag == 0 else f"{z.real:.10g}{z.imag:+.10g}j"


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _vector(text, n, name):
    vals = [float(v) for v in text.replace(",", " ").split()]
    if len(vals) != n:
        raise ValueError(f"{name} needs {n} entries, got {len(vals)}")
    return np.array(vals)


def _parse_s0(text) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


# subcommands ------------------------------------------------------------------------

def cmd_classify(args) -> int:
    s = model_io.load_system(args.system)
    if s.cone is None:
        raise ValueError("system file has no cone")
    rep = mc.classify(s.A, s.cone, samples=args.samples, seed=args.seed)
    checks = {"cone_invariant": rep.cone_invariant, "cross_positive": rep.cross_positive,
              "irreducible": rep.irreducible, "k_positive": rep.k_positive}
    payload = {k: {"verdict": c.verdict.value, "exact": c.exact} for k, c in checks.items()}
    payload["dominant_eigenvalue"] = rep.dominant.mu
    payload["hurwitz"] = mc.is_hurwitz(s.A)
    lines = [f"{k:15s} {c.verdict.value}{'' if c.exact else ' (sampled)'}"
             for k, c in checks.items()]
    lines.append(f"{'dominant':15s} {rep.dominant.mu:.10g}")
    lines.append(f"{'hurwitz':15s} {payload['hurwitz']}")
    _emit(args, payload, lines)
    requested = args.require or []
    refuted = [k for k in requested if checks[k].refuted]
    return EXIT_VERDICT if refuted else EXIT_OK


def cmd_zeros(args) -> int:
    s = model_io.load_system(args.system)
    zs = attacks.transmission_zeros(s, args.tol)
    _emit(args, {"zeros": [_cplx(z) for z in zs]},
          [_fmt(z) for z in zs] or ["no finite transmission zeros"])
    return EXIT_OK


def cmd_attack(args) -> int:
    s = model_io.load_system(args.system)
    zero = args.zero.strip()
    if zero.isdigit():
        zs = attacks.transmission_zeros(s, args.tol)
        if not len(zs):
            _emit(args, {"error": "no transmission zeros"}, ["no transmission zeros: no attack"])
            return EXIT_VERDICT
        k = int(zero)
        if k >= len(zs):
            raise ValueError(f"--zero {k} but only {len(zs)} zeros")
        s0 = complex(zs[k])
    else:
        s0 = _parse_s0(zero)
    x0 = _vector(args.x0, s.n, "--x0") if args.x0 else np.zeros(s.n)
    plan = attacks.synth_complex_attack(s, s0, x0, args.l1, args.l2, args.tol)
    status = EXIT_OK
    if args.cone_feasible:
        ok, plan = attacks.cone_feasibility(plan, s)
        if not ok:
            status = EXIT_VERDICT
    if args.out:
        model_io.save_plan(plan, args.out, args.tol)
    payload = model_io.plan_to_dict(plan, args.tol)
    payload["x_spoof"] = plan.x_spoof.tolist()
    lines = [f"s0        {_fmt(plan.s0)}",
             f"d0        {' '.join(_fmt(v) for v in np.atleast_1d(plan.d0))}",
             f"zeta      {' '.join(_fmt(v) for v in np.atleast_1d(plan.zeta))}",
             f"x_spoof   {' '.join(f'{v:.10g}' for v in plan.x_spoof)}",
             f"residual  {plan.residual:.3e}"]
    if args.cone_feasible:
        lines.append(f"cone-feasible {plan.cone_feasible}")
    _emit(args, payload, lines)
    return status


def _verdict_payload(v: defense.DefenseVerdict) -> dict:
    return {"status": v.status.name, "reason": v.reason.value,
            "witness_zero": None if v.witness_zero is None else _cplx(v.witness_zero),
            "complex_rhp_zeros": [_cplx(z) for z in v.complex_rhp_zeros]}


def cmd_defend(args) -> int:
    s = model_io.load_system(args.system)
    if args.cone:
        if s.cone is None:
            raise ValueError("placement needs a cone in the system file")
        if defense.is_marginally_stable(s.A):
            rep = defense.placement_cone_marginal(s.A, s.cone, args.exhaustive)
        else:
            rep = defense.placement_cone_stable(s.A, s.cone, args.exhaustive, seed=args.seed)
        return _report_placements(args, [rep])
    real_only = not args.complex
    if s.siso:
        v = defense.verify_defense(s, args.tol, real_only)
    else:
        v = defense.verify_defense_mimo(s, args.tol, real_only)
    lines = [f"status  {v.status.name}", f"reason  {v.reason.value}"]
    if v.witness_zero is not None:
        lines.append(f"witness s0 = {_fmt(v.witness_zero)}")
    if v.complex_rhp_zeros:
        lines.append("complex zeros with Re >= 0: "
                     + ", ".join(_fmt(z) for z in v.complex_rhp_zeros))
    _emit(args, _verdict_payload(v), lines)
    return EXIT_OK if v.ok else EXIT_VERDICT


def _report_placements(args, reports) -> int:
    out, lines, bad = [], [], False
    for r in reports:
        d = {"rule": r.rule.value, "claim": r.claim.name,
             "attack_set": [k + 1 for k in r.attack_set],
             "sensor_set": [k + 1 for k in r.sensor_set], "notes": r.notes}
        lines.append(f"{r.rule.value}")
        lines.append(f"  claim    {r.claim.name}")
        lines.append(f"  attacks  {d['attack_set']}")
        lines.append(f"  sensors  {d['sensor_set']}")
        if r.per_pair is not None:
            worst = r.worst()
            disc = [[i + 1, j + 1] for i, j in r.discrepancies()]
            d["verified_worst"] = None if worst is None else worst.name
            d["discrepancies"] = disc
            lines.append(f"  verified worst {d['verified_worst']}, "
                         f"{len(disc)} pair(s) below claim")
            bad |= bool(disc) or worst is defense.DefenseStatus.FAILED
        lines.extend(f"  note: {n}" for n in r.notes)
        out.append(d)
    _emit(args, {"reports": out}, lines)
    return EXIT_VERDICT if bad else EXIT_OK


def _gains(text, n):
    """Gains from a CSV file or an inline comma list; one value is broadcast."""
    if text is None:
        return np.ones(n)
    p = Path(text)
    raw = p.read_text() if p.is_file() else text
    vals = np.array([float(v) for v in raw.replace("\n", ",").split(",") if v.strip()])
    if vals.size == 1:
        return np.full(n, vals[0])
    if vals.size != n:
        raise ValueError(f"need {n} gains, got {vals.size}")
    return vals


def cmd_mas(args) -> int:
    g = model_io.load_graph(args.graph)
    if args.order == 1:
        reports = defense.placement_first_order(g, args.exhaustive)
    elif args.r is None:
        reports = [defense.placement_second_order_damped(g, _gains(args.gains, g.n_nodes),
                                                         args.exhaustive)]
    else:
        reports = defense.placement_second_order_velocity(g, args.r, args.exhaustive)
    if args.order == 1 and not args.json:
        d = network.scc_decompose(g)
        print("components " + " ".join(
            "{" + ",".join(str(v + 1) for v in c) + "}" for c in d.components))
    return _report_placements(args, reports)


def cmd_simulate(args) -> int:
    s = model_io.load_system(args.system)
    plan = model_io.load_plan(args.attack) if args.attack else None
    if args.spoofed:
        if plan is None:
            raise ValueError("--spoofed needs --attack")
        traj = simulate.simulate(s, plan.x_spoof, None, args.t_end, args.dt,
                                 simulate.Label.SPOOFED)
    else:
        if args.x0:
            x0 = _vector(args.x0, s.n, "--x0")
        elif plan is not None:
            x0 = plan.x0
        else:
            raise ValueError("need --x0 or --attack")
        traj = simulate.simulate(s, x0, plan, args.t_end, args.dt)
    traj.to_csv(args.out)
    payload = {"rows": len(traj.times), "truncated": traj.truncated, "output": args.out}
    _emit(args, payload, [f"wrote {len(traj.times)} rows to {args.out}"
                          + (" (diverged, truncated)" if traj.truncated else "")])
    return EXIT_OK


def cmd_verify(args) -> int:
    s = model_io.load_system(args.system)
    plan = model_io.load_plan(args.attack)
    gap = simulate.undetectability_gap(s, plan, args.t_end, args.dt)
    residual = attacks.plan_residual(s, plan)
    ok = gap <= args.threshold
    _emit(args, {"gap": gap, "residual": residual, "undetectable": ok},
          [f"gap       {gap:.3e}", f"residual  {residual:.3e}",
           f"undetectable {ok}"])
    return EXIT_OK if ok else EXIT_VERDICT


# parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def flags(suppress):
        # subcommand copies must not reset flags given before the subcommand
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        f = argparse.ArgumentParser(add_help=False)
        f.add_argument("--tol", type=float, default=d(ZERO_TOL),
                       help=f"relative rank tolerance (default {ZERO_TOL:g})")
        f.add_argument("--seed", type=int, default=d(0), help="seed for sampled checks")
        f.add_argument("--json", action="store_true", default=d(False),
                       help="machine-readable output")
        f.add_argument("-v", "--verbose", action="store_true", default=d(False))
        return f

    common = flags(suppress=True)
    p = argparse.ArgumentParser(prog="cis", parents=[flags(suppress=False)],
                                description="Zero-dynamics attacks and sensor placement "
                                            "for cone-invariant systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def system_arg(c):
        c.add_argument("--system", required=True,
                       help="system JSON file, or builtin:<name>")

    c = sub.add_parser("classify", parents=[common], help="matrix classes relative to the cone")
    system_arg(c)
    c.add_argument("--samples", type=int, default=mc.DEFAULT_SAMPLES)
    c.add_argument("--require", action="append",
                   choices=("cone_invariant", "cross_positive", "irreducible", "k_positive"),
                   help="class whose 'no' verdict sets exit code 2; repeatable")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("zeros", parents=[common], help="finite transmission zeros")
    system_arg(c)
    c.set_defaults(func=cmd_zeros)

    c = sub.add_parser("attack", parents=[common], help="synthesize a zero-dynamics attack")
    system_arg(c)
    c.add_argument("--zero", default="0",
                   help="index into the sorted zeros, or a value such as -1.25 or -0.2+1.5j")
    c.add_argument("--x0", help="true initial state, comma separated (default 0)")
    c.add_argument("--l1", type=float, default=1.0)
    c.add_argument("--l2", type=float, default=0.0)
    c.add_argument("--cone-feasible", action="store_true",
                   help="require a nonnegative input (exit 2 if impossible)")
    c.add_argument("--out", help="write the plan as JSON")
    c.set_defaults(func=cmd_attack)

    c = sub.add_parser("defend", parents=[common], help="verify or place sensors")
    system_arg(c)
    c.add_argument("--cone", action="store_true",
                   help="report the cone placement rule instead of checking the file's B, C")
    c.add_argument("--exhaustive", action="store_true",
                   help="verify every pair of the placement")
    c.add_argument("--complex", action="store_true",
                   help="count complex zeros with Re >= 0 as failures")
    c.set_defaults(func=cmd_defend)

    c = sub.add_parser("mas", parents=[common], help="multi-agent sensor placement")
    c.add_argument("--graph", required=True, help="graph JSON file, or builtin:<name>")
    c.add_argument("--order", type=int, choices=(1, 2), default=1)
    g = c.add_mutually_exclusive_group()
    g.add_argument("--gains", help="damping gains: CSV file or comma list (damped model)")
    g.add_argument("--r", type=float, help="relative-velocity coupling (velocity model)")
    c.add_argument("--exhaustive", action="store_true")
    c.set_defaults(func=cmd_mas)

    c = sub.add_parser("simulate", parents=[common], help="RK4 trajectory to CSV")
    system_arg(c)
    c.add_argument("--out", required=True)
    c.add_argument("--attack", help="plan JSON written by 'cis attack'")
    c.add_argument("--x0")
    c.add_argument("--spoofed", action="store_true",
                   help="simulate the spoofed initial state without attack")
    c.add_argument("--t-end", type=float, default=simulate.DEFAULT_T_END)
    c.add_argument("--dt", type=float, default=simulate.DEFAULT_DT)
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("verify", parents=[common], help="undetectability gap of a plan")
    system_arg(c)
    c.add_argument("--attack", required=True, help="plan JSON written by 'cis attack'")
    c.add_argument("--t-end", type=float, default=simulate.DEFAULT_T_END)
    c.add_argument("--dt", type=float, default=simulate.DEFAULT_DT)
    c.add_argument("--threshold", type=float, default=GAP_TOL)
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError, simulate.Divergence) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    _sys.exit(main())
