"""Command-line harness.

    helixvortex {ode,leapfrog,blob,sweep} --config PATH [--out DIR]
                [--dump-particles] [--self-check] [--threads N]

Exit codes: 0 success, 1 configuration/validation error, 2 runtime halt
(collision, non-finite state, failed sweep member), 3 self-check failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import blob as blobmod
from . import io
from . import leapfrog as lf
from . import selfcheck
from .config import ConfigError, RunConfig, load_config
from .errors import CollisionError, HelixVortexError, NonFiniteStateError
from .pointvortex import (OdeParams, from_physical, hamiltonian_total, integrate, to_physical,
                          weighted_centroid, OdeState)

log = logging.getLogger("helixvortex")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_SELFCHECK = 0, 1, 2, 3


class SelfCheckFailed(Exception):
    pass


def _ode_setup(cfg: RunConfig):
    geom = cfg.geometry.build()
    params = OdeParams(geom, cfg.strengths)
    return params, from_physical(cfg.physical_centers(), params)


def _leapfrog_setup(cfg: RunConfig):
    if len(cfg.strengths) != 2:
        raise ConfigError("leapfrog analysis needs exactly two vortices")
    params, state = _ode_setup(cfg)
    try:
        lp = lf.LeapfrogParams(params.geom, *cfg.strengths)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return lp, state


def _run_checks(checks):
    failed = [c for c in checks if not c.passed]
    for c in checks:
        log.info("self-check %-40s %s (%s)", c.name, "PASS" if c.passed else "FAIL", c.detail)
    if failed:
        raise SelfCheckFailed(", ".join(c.name for c in failed))


# ---------------------------------------------------------------------------

def cmd_ode(cfg: RunConfig, out: Path, self_check=False, **_):
    if cfg.ode is None:
        raise ConfigError("the 'ode' section is required")
    params, state = _ode_setup(cfg)
    if self_check:
        _run_checks(selfcheck.check_geometry(params.geom, to_physical(state, params) / 4.0)
                    + selfcheck.check_ode(params, state))
    oc = cfg.ode
    status = EXIT_OK
    try:
        traj = integrate(state, params, oc.dt, oc.n_steps, oc.collision_floor)
    except (CollisionError, NonFiniteStateError) as exc:
        log.error("halted: %s", exc)
        traj = exc.trajectory
        status = EXIT_RUNTIME
    keep = np.arange(0, len(traj), oc.stride)
    if keep[-1] != len(traj) - 1:
        keep = np.append(keep, len(traj) - 1)
    p_t = traj.p_tilde[keep]
    p_phys = p_t @ params.geom.dt0_inv.T
    normalized = float(np.sum(params.strengths)) != 0.0
    states = [OdeState(traj.times[k], traj.p_tilde[k]) for k in keep]
    h_tot = np.array([hamiltonian_total(s, params) for s in states])
    cen = np.array([weighted_centroid(s, params, normalized) for s in states])
    out.mkdir(parents=True, exist_ok=True)
    io.write_rows(out / "trajectory.csv", io.TRAJECTORY_HEADER,
                  io.trajectory_rows(traj.times[keep], p_t, p_phys, h_tot, cen))
    return status


def _level_entry(c_e, lp):
    entry = {"C_E": c_e, "E": lf.level_energy(c_e, lp), "T_E_asymptotic": lf.small_level_period(c_e, lp)}
    if lp.c_star is not None:
        entry["C_E_over_C_star"] = c_e / lp.c_star
    roots = lf.domain_roots(c_e, lp)
    entry["class"] = roots.kind
    if roots.kind == "periodic":
        entry["roots"] = {"eta1": roots.eta1, "eta2": roots.eta2, "eta3": roots.eta3}
        t_e = lf.period_quadrature(c_e, lp)
        entry["T_E"] = t_e
        entry["asymptotic_ratio"] = t_e / entry["T_E_asymptotic"]
    else:
        entry["roots"] = {"eta_bar": roots.eta_bar, "tangent": roots.tangent}
        entry["T_E"] = None
        entry["asymptotic_ratio"] = None
    return entry, roots


def _portrait_rows(level_idx, c_e, roots, lp, n):
    theta = np.linspace(0.0, math.pi, n)

    def seg(a, b, branch_up, branch_dn):
        x1 = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(theta)
        f = np.nan_to_num(lf.level_curve(x1, c_e, lp), nan=0.0)
        for u, v in zip(x1, f):
            yield (level_idx, c_e, branch_up, u, v)
        for u, v in zip(x1, f):
            yield (level_idx, c_e, branch_dn, u, -v)

    if roots.kind == "periodic":
        yield from seg(roots.eta1, roots.eta2, 1, 2)
        if roots.eta3 is not None:
            span = abs(roots.eta3 - roots.eta1)
            end = roots.eta3 + math.copysign(span, roots.eta3)
            lo, hi = sorted((roots.eta3, end))
            yield from seg(lo, hi, 3, 4)
    else:
        span = max(abs(roots.eta_bar), abs(lp.x_star[0]) if lp.x_star is not None else 1.0) * 2.0
        end = roots.eta_bar - math.copysign(span, roots.eta_bar)
        lo, hi = sorted((roots.eta_bar, end))
        yield from seg(lo, hi, 3, 4)


def cmd_leapfrog(cfg: RunConfig, out: Path, self_check=False, **_):
    lc = cfg.leapfrog if cfg.leapfrog is not None else type_default_leapfrog()
    lp, state = _leapfrog_setup(cfg)
    x_init, _ = lf.reduce(state, lp)
    if self_check:
        _run_checks(selfcheck.check_leapfrog(lp, x_init))
    c_init = lf.level_of_point(x_init, lp)
    levels = [c_init]
    if lc.level_fractions:
        if lp.c_star is None:
            raise ConfigError("level_fractions need a critical level (r0 > 0 and a1 != a2)")
        levels += [f * lp.c_star for f in lc.level_fractions]
    levels += list(lc.levels)

    entries, portrait = [], []
    for k, c_e in enumerate(levels):
        entry, roots = _level_entry(c_e, lp)
        entry["index"] = k
        entries.append(entry)
        portrait.extend(_portrait_rows(k, c_e, roots, lp, lc.polyline_points))

    p_phys = cfg.physical_centers()
    sep = float(np.hypot(*(p_phys[0] - p_phys[1])))
    rho = lc.rho if lc.rho is not None else lc.rho_fraction * lf.max_admissible_rho(sep, lp.geom)
    init = entries[0]
    init["on_closed_orbit"] = lf.on_closed_orbit(x_init, lp)
    if init["on_closed_orbit"]:
        t_e = init["T_E"]
        dt = t_e / lc.steps_per_period
        path = lf.integrate_relative(x_init, lp, dt, lc.periods * lc.steps_per_period)
        cert = lf.min_separation_certificate(path, lp, rho)
        certificate = {"periods": lc.periods, "rho": rho, "threshold": cert.threshold,
                       "minimum": cert.minimum, "passed": cert.passed, "dt": dt,
                       "samples": len(path)}
    else:
        certificate = {"skipped": "initial point is not on a closed orbit", "rho": rho}

    g = lp.geom
    doc = {
        "h": g.h, "r0": g.r0, "tau_squared": g.tau_squared,
        "a1": lp.a1, "a2": lp.a2, "A": g.A, "B": g.B, "A1": lp.A1, "B1": lp.B1,
        "a_prime": lp.a_prime, "C_star": lp.c_star,
        "x_star": None if lp.x_star is None else lp.x_star.tolist(),
        "initial_x": x_init.tolist(), "initial_separation": sep,
        "levels": entries, "certificate": certificate,
    }
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "leapfrog.json", doc)
    io.write_rows(out / "phase_portrait.csv", io.PORTRAIT_HEADER, portrait)
    return EXIT_OK


def type_default_leapfrog():
    from .config import LeapfrogConfig

    return LeapfrogConfig()


def _blob_horizon(cfg: RunConfig):
    b = cfg.blob
    if b.periods is None:
        return b.t_final
    lp, state = _leapfrog_setup(cfg)
    x, _ = lf.reduce(state, lp)
    if not lf.on_closed_orbit(x, lp):
        raise ConfigError("blob.periods needs initial centres on a closed relative orbit")
    return b.periods * lf.period_quadrature(lf.level_of_point(x, lp), lp)


def _write_dumps(out: Path, run, mode):
    pf = run.final
    files = []
    if mode == "single":
        def rows():
            for t, z in run.dumps:
                yield from io.particle_rows(t, z, pf.weights, pf.component)
        files.append(io.write_rows(out / "particles.csv", io.PARTICLES_HEADER, rows()).name)
    else:
        for k, (t, z) in enumerate(run.dumps):
            name = f"particles_{k:06d}.csv"
            io.write_rows(out / name, io.PARTICLES_HEADER, io.particle_rows(t, z, pf.weights, pf.component))
            files.append(name)
    return files


def cmd_blob(cfg: RunConfig, out: Path, self_check=False, dump_particles=False, **_):
    if cfg.blob is None:
        raise ConfigError("the 'blob' section is required")
    try:
        scenario = cfg.scenario(t_final=_blob_horizon(cfg))
        blobmod.init_patches(scenario)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if self_check:
        _run_checks(selfcheck.check_blob(scenario))
    run = blobmod.run(scenario, with_reference=True, dump_particles=dump_particles)
    out.mkdir(parents=True, exist_ok=True)
    io.write_rows(out / "diagnostics.csv", io.DIAGNOSTICS_HEADER, io.diagnostics_rows(run.records))
    io.write_rows(out / "pairs.csv", io.PAIRS_HEADER, io.pair_rows(run.records))
    files = ["diagnostics.csv", "pairs.csv"]
    if dump_particles:
        files += _write_dumps(out, run, cfg.blob.dump_mode)
    io.write_json(out / "manifest.json", {
        "status": run.status, "partial": not run.ok, "error": run.error,
        "particle_count": run.particle_count, "epsilon": scenario.epsilon,
        "spacing": scenario.spacing, "delta": scenario.delta_factor * scenario.spacing,
        "dt": run.dt, "n_steps": run.n_steps, "t_final": scenario.t_final,
        "records": len(run.records), "files": files,
        "wall_clock_seconds": run.wall_clock,
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    })
    if not run.ok:
        log.error("blob run halted: %s", run.error)
        return EXIT_RUNTIME
    return EXIT_OK


def sweep_member(cfg: RunConfig, eps: float, t_final: float):
    scenario = cfg.scenario(epsilon=eps, t_final=t_final)
    return blobmod.run(scenario, with_reference=True)


def cmd_sweep(cfg: RunConfig, out: Path, self_check=False, **_):
    if cfg.sweep is None or cfg.blob is None:
        raise ConfigError("the 'sweep' and 'blob' sections are required")
    t_final = _blob_horizon(cfg)
    try:
        for eps in cfg.sweep.epsilons:
            blobmod.init_patches(cfg.scenario(epsilon=eps, t_final=t_final))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if self_check:
        _run_checks(selfcheck.check_blob(cfg.scenario(epsilon=cfg.sweep.epsilons[-1], t_final=0.0)))
    rows, summary, manifest = [], [], []
    status = EXIT_OK
    for eps in cfg.sweep.epsilons:
        try:
            run = sweep_member(cfg, eps, t_final)
        except HelixVortexError as exc:
            summary.append((eps, None, "failed"))
            manifest.append({"epsilon": eps, "status": "failed", "error": str(exc)})
            status = EXIT_RUNTIME
            continue
        worst = 0.0
        for rec in run.records:
            for i, e in enumerate(rec.tracking_error):
                rows.append((eps, rec.t, i + 1, e))
                worst = max(worst, float(e))
        summary.append((eps, worst if run.records else None, run.status))
        manifest.append({"epsilon": eps, "status": run.status, "error": run.error,
                         "particle_count": run.particle_count, "dt": run.dt,
                         "n_steps": run.n_steps, "wall_clock_seconds": run.wall_clock})
        if not run.ok:
            status = EXIT_RUNTIME
    out.mkdir(parents=True, exist_ok=True)
    io.write_rows(out / "sweep.csv", io.SWEEP_HEADER, rows)
    io.write_rows(out / "sweep_summary.csv", io.SWEEP_SUMMARY_HEADER, summary)
    io.write_json(out / "manifest.json", {"t_final": t_final, "members": manifest})
    return status


COMMANDS = {"ode": cmd_ode, "leapfrog": cmd_leapfrog, "blob": cmd_blob, "sweep": cmd_sweep}


def build_parser():
    ap = argparse.ArgumentParser(prog="helixvortex", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML or JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (default: config 'output' or ./out)")
        p.add_argument("--dump-particles", action="store_true")
        p.add_argument("--self-check", action="store_true")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        import numba

        if args.threads < 1:
            log.error("--threads must be >= 1")
            return EXIT_CONFIG
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        cfg = load_config(args.config)
        out = Path(args.out or cfg.output or "out")
        return COMMANDS[args.command](cfg, out, self_check=args.self_check,
                                      dump_particles=args.dump_particles)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SelfCheckFailed as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return EXIT_SELFCHECK
    except HelixVortexError as exc:
        print(f"runtime halt: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
