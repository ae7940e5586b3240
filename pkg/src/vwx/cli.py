"""Command-line front end: ``vwx {bifurcation,solve,evolve,verify,limits}``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid configuration
or input, 3 no admissible mode, 4 Newton failure at the first continuation
step, 5 topology breach during evolution.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import serialize as io
from .contour import AnnulusParams, ContourState
from .errors import AliasingError, NegativeDiscriminant, NotFound, TopologyBreach, VWXError

log = logging.getLogger("vwx")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NOMODE, EXIT_NEWTON, EXIT_TOPOLOGY = 0, 1, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _sign(v: str) -> int:
    try:
        return io._parse_sign(v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [params], [mode], ... sections")
    common.add_argument("--a1", type=float)
    common.add_argument("--a2", type=float)
    common.add_argument("--n", type=int, help="mode index")
    common.add_argument("--sign", type=_sign, help="branch sign, + or -")
    common.add_argument("--modes", dest="M", type=int, help="cosine truncation order M")
    common.add_argument("--ntheta", dest="n_theta", type=int)
    common.add_argument("--nrho", dest="n_rho", type=int)
    common.add_argument("--step", type=float, help="amplitude step")
    common.add_argument("--tol", type=float, help="Newton residual tolerance")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="vwx", description="Rotating patch / point-vortex solutions: spectra, branches, evolution.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    b = sub.add_parser("bifurcation", parents=[common], help="table of bifurcation velocities")
    b.add_argument("--nmax", dest="n_max", type=int, help="largest mode scanned")
    s = sub.add_parser("solve", parents=[common], help="continue a branch from its bifurcation point")
    s.add_argument("--max-steps", dest="max_steps", type=int)
    e = sub.add_parser("evolve", parents=[common], help="contour-dynamics run")
    e.add_argument("--input", help="branch JSON; omit for the radial stationary state")
    e.add_argument("--point", type=int, default=None, help="index of the branch point (default: amplitude nearest 0.01)")
    e.add_argument("--dt", type=float)
    e.add_argument("--steps", type=int)
    e.add_argument("--periods", type=float)
    e.add_argument("--frame-every", dest="frame_every", type=int)
    e.add_argument("--redistribute-every", dest="redistribute_every", type=int)
    sub.add_parser("verify", parents=[common], help="run the oracle suite")
    lim = sub.add_parser("limits", parents=[common], help="limit velocities and density table")
    lim.add_argument("--targets", type=float, nargs="+", default=[0.05, 0.2, 1.0, 5.0])
    return p


def resolve_config(args) -> io.RunConfig:
    cfg = io.load_config(args.config) if args.config else io.RunConfig()
    for f in io.fields(io.RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and f.name != "extra":
            setattr(cfg, f.name, v)
    cfg.validate()
    return cfg


def _spec(cfg):
    from .quadrature import QuadratureSpec
    return QuadratureSpec(cfg.n_theta, cfg.n_rho)


# --- commands ----------------------------------------------------------------------

def cmd_bifurcation(cfg: io.RunConfig) -> int:
    from . import spectral as sp

    params = cfg.params
    try:
        n0 = sp.threshold_mode(params, cfg.n_max)
    except NotFound as exc:
        print(f"no admissible mode up to n={cfg.n_max}: {exc}", file=sys.stderr)
        return EXIT_NOMODE
    excluded = (sp.outer_rate(params), sp.inner_rate(params), 0.0)
    rows = []
    for n, d, om, op, tm, tp in sp.scan_modes(params, cfg.n_max):
        hit = any(abs(o - e) <= 1e-10 * max(1.0, abs(e)) for o in (om, op) for e in excluded)
        rows.append({"n": n, "delta": d, "omega_minus": om, "omega_plus": op,
                     "tau_minus": tm, "tau_plus": tp, "excluded_collision": hit, "admissible": n >= n0})
    lo, hi = sp.velocity_limits(params)
    out = {"params": {"a1": params.a1, "a2": params.a2}, "n_max": cfg.n_max, "threshold": n0,
           "limits": {"omega_minus": lo, "omega_plus": hi}, "rows": rows}
    path = io.write_json(Path(cfg.out) / "bifurcation.json", out)
    print(f"a1={params.a1:g} a2={params.a2:g}: threshold mode N={n0}; "
          f"{len(rows)} modes with positive discriminant up to n={cfg.n_max}")
    print(f"{'n':>4} {'Omega-':>14} {'Omega+':>14} {'tau-':>11} {'tau+':>11}")
    for r in rows:
        if r["n"] >= n0 and (r["n"] <= n0 + 9 or r["n"] == cfg.n_max):
            print(f"{r['n']:>4} {r['omega_minus']:>14.10f} {r['omega_plus']:>14.10f} "
                  f"{r['tau_minus']:>11.3e} {r['tau_plus']:>11.3e}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_solve(cfg: io.RunConfig) -> int:
    from .branch import ContinuationConfig, continue_branch
    from .spectral import bifurcation_point

    params = cfg.params
    try:
        bp = bifurcation_point(params, cfg.n, cfg.sign, cfg.M)
    except NegativeDiscriminant as exc:
        print(f"mode n={cfg.n} admits no bifurcation: {exc}", file=sys.stderr)
        return EXIT_NOMODE
    try:
        ccfg = ContinuationConfig(cfg.n, cfg.sign, cfg.step, cfg.max_steps, cfg.tol, cfg.max_newton_iters,
                                  _spec(cfg), cfg.M)
    except (ValueError, VWXError) as exc:
        print(f"invalid continuation settings: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rec = continue_branch(bp, ccfg)
    out = Path(cfg.out)
    tag = f"n{cfg.n}{'p' if cfg.sign > 0 else 'm'}"
    path = io.write_json(out / f"branch_{tag}.json", io.branch_to_dict(rec))
    if rec.points:
        for k in sorted({0, len(rec.points) - 1}):
            io.write_contour_csv(out / f"contour_{tag}_{k:03d}.csv", rec.points[k].state, cfg.n_theta)
    print(f"n={cfg.n} sign={cfg.sign:+d}: {len(rec.points)} points, Omega_n={bp.omega:.12f}, {rec.elapsed:.1f} s")
    for p in rec.points[:: max(1, len(rec.points) // 5)]:
        print(f"  s={p.s:.4e} Omega={p.state.omega:.12f} |F|={p.residual_norm:.2e} const={p.constancy:.2e}")
    print(f"wrote {path}")
    if rec.error is not None:
        if not rec.points:
            print(f"Newton failed at the first step: {rec.error}", file=sys.stderr)
            return EXIT_NEWTON
        print(f"warning: branch truncated: {rec.error}", file=sys.stderr)
    return EXIT_OK


def _load_branch_state(path, index):
    try:
        data = io.read_json(path)
        params = AnnulusParams(data["params"]["a1"], data["params"]["a2"])
        pts = data["points"]
        if not pts:
            raise ValueError("branch file has no points")
        if index is None:
            index = int(np.argmin([abs(abs(p["s"]) - 0.01) for p in pts]))
        st = io.state_from_dict(pts[index], params)
        n = int(data["bifurcation"]["n"])
    except FileNotFoundError as exc:
        raise io.ConfigError(f"{path}: file not found") from exc
    except io.json.JSONDecodeError as exc:
        raise io.ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise io.ConfigError(f"{path}: malformed branch file ({type(exc).__name__}: {exc})") from exc
    return st, n


def cmd_evolve(cfg: io.RunConfig, input_path=None, point=None) -> int:
    from .evolution import VortexWaveState, evolve, fit_rotation_rate

    if input_path:
        st, n = _load_branch_state(input_path, point)
    else:
        st = ContourState.trivial(cfg.params, 1, 0.0)   # radial, so one mode suffices
        n = cfg.n
    vs = VortexWaveState.from_contour_state(st, cfg.n_theta)
    if cfg.dt is not None:
        dt = cfg.dt
    elif st.omega != 0:
        dt = 2 * math.pi / abs(st.omega) / cfg.steps_per_period
    else:
        dt = 0.01
    steps = cfg.steps if cfg.steps is not None else (
        max(1, int(round(cfg.periods * 2 * math.pi / abs(st.omega) / dt))) if st.omega else 1000)
    out = Path(cfg.out)
    try:
        traj = evolve(vs, dt, steps, frame_every=cfg.frame_every, redistribute_every=cfg.redistribute_every,
                      moment_mode=n, raise_on_breach=False)
    except VWXError as exc:
        print(f"evolution failed: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    io.write_trajectory_csv(out / "trajectory.csv", traj.frames)
    d0, d1 = traj.diagnostics[0], traj.diagnostics[-1]
    layer = int(np.argmax([abs(m) for m in d0.moments]))
    shape_amp = abs(d0.moments[layer])
    # a radial state has only roundoff in its moments, which scale like a2**(n+2)
    floor = 1e-10 * 2 * math.pi * st.params.a2 ** (n + 2)
    rate = fit_rotation_rate(traj.times, [d.moments[layer] for d in traj.diagnostics], n) if shape_amp > floor else 0.0
    report = {
        "dt": dt, "steps": len(traj.times) - 1, "final_time": traj.times[-1], "omega_input": st.omega,
        "fitted_rate": rate, "rate_rel_error": abs(rate - st.omega) / abs(st.omega) if st.omega else None,
        "area_drift": abs(d1.patch_area - d0.patch_area) / d0.patch_area,
        "contour_area_drift": [abs(a - b) / b for a, b in zip(d1.areas, d0.areas)],
        "vortex_radius": list(d1.vortex_radius),
        "error": None if traj.error is None else str(traj.error),
    }
    io.write_json(out / "evolve_diagnostics.json", report)
    print(f"evolved {report['steps']} steps (dt={dt:.4g}); fitted rate={rate:.10g}, "
          f"input Omega={st.omega:.10g}, area drift={report['area_drift']:.2e}")
    if traj.error is not None:
        last = traj.error.state
        if last is not None:
            io.write_trajectory_csv(out / "last_good_frame.csv", [last])
        print(f"topology breach: {traj.error}", file=sys.stderr)
        return EXIT_TOPOLOGY
    return EXIT_OK


def cmd_verify(cfg: io.RunConfig) -> int:
    from .verify import run_checks

    report = run_checks(cfg.params, cfg.n_theta, cfg.n_rho)
    io.write_json(Path(cfg.out) / "verify.json", report)
    width = max(len(c["name"]) for c in report["checks"])
    for c in report["checks"]:
        err = "-" if c["error"] is None else f"{c['error']:.2e}"
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']:<{width}}  err={err}  tol={c['tol']:.0e}  {c.get('note', '')}")
    ok = all(c["passed"] for c in report["checks"])
    print(f"{sum(c['passed'] for c in report['checks'])}/{len(report['checks'])} checks passed")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_limits(cfg: io.RunConfig, targets) -> int:
    from . import spectral as sp

    lo, hi = sp.velocity_limits(cfg.params)
    print(f"a1={cfg.a1:g} a2={cfg.a2:g}: lim Omega^- = {lo!r}, lim Omega^+ = {hi!r}")
    rows = []
    for c in targets:
        w = sp.density_witness(c)
        rows.append({"c": c, "a1": w.a1, "a2": w.a2, "sign": w.sign, "limit": w.limit,
                     "modes": w.modes, "gaps": w.gaps, "extrapolated_gap": w.extrapolated_gap})
        print(f"c={c:<6g} a1={w.a1:.6f} branch {'+' if w.sign > 0 else '-'} limit={w.limit!r} "
              f"|Omega_n - c| at n=1e4: {w.gaps[-1]:.2e}")
    io.write_json(Path(cfg.out) / "limits.json", {"params": {"a1": cfg.a1, "a2": cfg.a2},
                                                 "limits": {"omega_minus": lo, "omega_plus": hi},
                                                 "density": rows})
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (io.ConfigError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "bifurcation":
            return cmd_bifurcation(cfg)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "evolve":
            return cmd_evolve(cfg, args.input, args.point)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "limits":
            return cmd_limits(cfg, args.targets)
    except (io.ConfigError, AliasingError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TopologyBreach as exc:
        print(f"topology breach: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
