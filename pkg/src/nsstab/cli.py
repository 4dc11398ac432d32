"""Command line front end: ``nsstab <mode> [--config FILE | --preset NAME] [flags]``.

Exit status is 0 on success, 1 when a computation fails (partial outputs
are kept and the manifest is marked partial) and 2 for configuration or
usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, diagnostics, evolve, hyperbolic, io, steady
from .config import PRESETS, RunConfig, output_dir, parse_config
from .errors import ConfigurationError, NSStabError, UsageError
from .figures import BUILDERS
from .plotting import render

log = logging.getLogger("nsstab")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def _triple(text):
    try:
        lo, hi, n = text.split(",")
        return [float(lo), float(hi), int(n)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi,n; got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--preset", choices=sorted(PRESETS), help="built-in parameter set")
    common.add_argument("--out", help="output directory (default: $NSSTAB_OUTPUT_ROOT/<mode>-<name>)")
    common.add_argument("--N", type=int, help="grid intervals")
    common.add_argument("--T", type=float, help="final time")
    common.add_argument("--seed", type=int, help="seed for random perturbations")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="nsstab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"nsstab {__version__}")
    sub = p.add_subparsers(dest="mode", required=True)

    sub.add_parser("steady", parents=[common], help="stationary profile and alpha*")

    ev = sub.add_parser("evolve", parents=[common], help="time evolution with diagnostics")
    ev.add_argument("--cfl-hyperbolic", type=float)
    ev.add_argument("--cfl-parabolic", type=float)
    ev.add_argument("--dt", type=float, help="fixed time step instead of the CFL rule")
    ev.add_argument("--stride", type=int, help="steps between logged states")
    ev.add_argument("--init", help="steady | tanh(a,b) | perturbed-steady(amplitude) | file(path)")
    ev.add_argument("--closure", choices=evolve.CLOSURES, help="right-end momentum closure")
    ev.add_argument("--limiter", choices=evolve.LIMITERS)
    ev.add_argument("--compare-closures", action="store_true",
                    help="also run the other right-end closure and log the difference")
    ev.add_argument("--no-snapshots", action="store_true", help="skip trajectory.csv")

    sm = sub.add_parser("sigma-map", parents=[common], help="membership table over (v*, alpha)")
    sm.add_argument("--v-range", type=_triple, help="lo,hi,n")
    sm.add_argument("--alpha-range", type=_triple, help="lo,hi,n")

    hc = sub.add_parser("hyperbolic-check", parents=[common], help="jump admissibility verdict")
    for name in ("rho-minus", "w-minus", "rho-plus", "w-plus", "c"):
        hc.add_argument(f"--{name}", type=float)
    hc.add_argument("--json", action="store_true", help="print the verdict as JSON")

    fg = sub.add_parser("figures", parents=[common], help="render reproduction figures")
    fg.add_argument("--which", nargs="+", choices=sorted(BUILDERS))
    return p


def _overrides(args) -> dict:
    scheme, evolve_, top, jump, smap = {}, {}, {}, {}, {}
    if args.N is not None:
        scheme["N"] = args.N
    if args.T is not None:
        scheme["T_final"] = args.T
    if args.seed is not None:
        top["seed"] = args.seed
    for flag, key in (("cfl_hyperbolic", "cfl_hyperbolic"), ("cfl_parabolic", "cfl_parabolic"),
                      ("dt", "dt"), ("stride", "output_stride"), ("closure", "right_closure"),
                      ("limiter", "limiter")):
        val = getattr(args, flag, None)
        if val is not None:
            scheme[key] = val
    if getattr(args, "init", None):
        evolve_["init"] = args.init
    if getattr(args, "compare_closures", False):
        evolve_["compare_closures"] = True
    for name in ("rho_minus", "w_minus", "rho_plus", "w_plus", "c"):
        val = getattr(args, name, None)
        if val is not None:
            jump[name] = val
    if getattr(args, "v_range", None):
        smap["v_star"] = args.v_range
    if getattr(args, "alpha_range", None):
        smap["alpha"] = args.alpha_range
    for key, block in (("scheme", scheme), ("evolve", evolve_), ("jump", jump), ("sigma_map", smap)):
        if block:
            top[key] = block
    return top


def _echo_config(cfg: RunConfig, outdir: Path, manifest: io.Manifest):
    manifest.add(io.write_json(outdir / "config.json", cfg.resolved()), "config")


def _problem_meta(cfg: RunConfig) -> dict:
    b, laws = cfg.boundary, cfg.laws
    return {"ell": b.ell, "eps": b.eps, "u_minus": b.u_minus, "u_plus": b.u_plus,
            "v_minus": b.v_minus, "pressure": repr(laws.pressure), "viscosity": repr(laws.viscosity)}


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------


def run_steady(cfg: RunConfig, outdir: Path, manifest: io.Manifest):
    b, laws = cfg.boundary, cfg.laws
    h2 = hyperbolic.h2_residual(b.u_minus, b.u_plus, b.v_star, laws.pressure)
    abar = steady.alpha_bar(b.v_star, b.u_minus, b.u_plus, laws)
    prof = steady.steady_state(b, laws, cfg.scheme.N)
    shoot = steady.shoot_alpha_star(b, laws)
    summary = {
        "alpha_star": prof.alpha_star, "alpha_bar": abar, "v_star": b.v_star,
        "alpha_star_shooting": shoot,
        "shooting_relative_difference": abs(shoot - prof.alpha_star) / prof.alpha_star,
        "residual_inf": prof.residual_inf, "length_residual": prof.length_residual,
        "terminal_mismatch": prof.terminal_mismatch, "h2_residual": h2,
        "v_star_from_jump_relation": cfg.h2_from_jump,
    }
    meta = dict(_problem_meta(cfg), N=prof.N, **summary)
    manifest.add(io.write_csv(outdir / "profile.csv", ("x", "u_bar", "v_bar"),
                              zip(prof.x, prof.u_bar, prof.v), meta), "profile")
    manifest.summary = summary
    for k, v in summary.items():
        print(f"{k}: {v}")


def _initial_state(cfg: RunConfig, x, prof):
    b, init = cfg.boundary, cfg.init
    if init.kind == "steady":
        return evolve.FieldState(x, prof.u_bar.copy(), prof.v.copy(), 0.0)
    if init.kind == "tanh":
        return evolve.tanh_initial(x, b, *init.args)
    if init.kind == "perturbed-steady":
        rng = np.random.default_rng(cfg.seed)
        return evolve.perturbed_initial(x, prof.u_bar, prof.v_bar, b, init.args[0], rng)
    meta, cols, arr = io.read_csv(init.path)
    if cols[:3] != ["x", "u", "v"]:
        raise UsageError(f"{init.path}: expected columns x,u,v")
    if arr.shape[0] != x.size or not np.allclose(arr[:, 0], x, rtol=0, atol=1e-12):
        raise UsageError(f"{init.path}: grid does not match N={cfg.scheme.N}")
    return evolve.FieldState(x, arr[:, 1].copy(), arr[:, 2].copy(), float(meta.get("t", 0.0)))


def run_evolve(cfg: RunConfig, outdir: Path, manifest: io.Manifest, snapshots: bool = True):
    b, laws, sch = cfg.boundary, cfg.laws, cfg.scheme
    prof = steady.steady_state(b, laws, sch.N)
    x = prof.x
    s0 = _initial_state(cfg, x, prof)
    if s0.t > 0:
        sch = replace(sch, T_final=max(sch.T_final, s0.t))
    recorder = diagnostics.DiagnosticRecorder(prof, laws, b, sch.limiter)
    snaps = []
    hooks = [recorder]
    if snapshots or cfg.compare_closures:
        hooks.append(lambda s, prev, dt: snaps.append((s.t, s.u.copy(), s.v.copy())))
    result = evolve.run(s0, sch, laws, b.eps, b, hooks=hooks, keep_snapshots=False, raise_errors=False)
    partial = not result.completed
    meta = dict(_problem_meta(cfg), N=sch.N, alpha_star=prof.alpha_star, init=str(cfg.init.kind),
                init_args=list(cfg.init.args), seed=cfg.seed, right_closure=sch.right_closure,
                limiter=sch.limiter)

    manifest.add(io.write_csv(outdir / "diagnostics.csv", diagnostics.COLUMNS,
                              recorder.table(), meta), "diagnostics", partial)
    if snaps and snapshots:
        rows = ((t, xi, ui, vi) for t, u, v in snaps for xi, ui, vi in zip(x, u, v))
        manifest.add(io.write_csv(outdir / "trajectory.csv", ("t", "x", "u", "v"), rows, meta),
                     "trajectory", partial)
    fin = result.final
    manifest.add(io.write_csv(outdir / "final_state.csv", ("x", "u", "v"), zip(x, fin.u, fin.v),
                              dict(meta, t=fin.t)), "final_state", partial)

    summary = {"steps": result.steps, "t_final": fin.t, "alpha_star": prof.alpha_star,
               "completed": result.completed}
    if len(recorder.lyapunov) >= 2:
        verdict = diagnostics.lyapunov_decay_check(recorder.lyapunov, 1e-6, cfg.delta1, cfg.delta2)
        d0 = recorder.rows[0]["l2_distance"]
        summary.update({
            "lyapunov_decay": verdict.status, "lyapunov_message": verdict.message,
            "L_initial": recorder.rows[0]["L"], "L_final": recorder.rows[-1]["L"],
            "l2_distance_initial": d0,
            "l2_distance_sup": max(r["l2_distance"] for r in recorder.rows),
            "entropy_residual_max": recorder.max_entropy_residual(),
            "rho_Linf_max": max(r["rho_Linf"] for r in recorder.rows),
        })
    if cfg.compare_closures and result.completed and snaps:
        other = "extrapolate" if sch.right_closure == "neumann" else "neumann"
        alt = []
        evolve.run(s0, replace(sch, right_closure=other), laws, b.eps, b, keep_snapshots=False,
                   hooks=[lambda s, prev, dt: alt.append((s.u.copy(), s.v.copy()))])
        dx = x[1] - x[0]
        rows = [(t, diagnostics.trapezoid((u - u2) ** 2, dx) ** 0.5,
                 diagnostics.trapezoid((v - v2) ** 2, dx) ** 0.5, v[-1], v2[-1])
                for (t, u, v), (u2, v2) in zip(snaps, alt)]
        manifest.add(io.write_csv(outdir / "closure_comparison.csv",
                                  ("t", "u_L2_difference", "v_L2_difference",
                                   f"v_right_{sch.right_closure}", f"v_right_{other}"),
                                  rows, meta), "closure_comparison")
    manifest.summary = summary
    for k, v in summary.items():
        print(f"{k}: {v}")
    if result.error is not None:
        raise result.error


def _lattice(spec, default):
    lo, hi, n = spec if spec else default
    if not (0 < lo <= hi) or int(n) < 1:
        raise ConfigurationError(f"sigma_map: bad range {spec}")
    return np.linspace(lo, hi, int(n))


def run_sigma_map(cfg: RunConfig, outdir: Path, manifest: io.Manifest):
    b, laws = cfg.boundary, cfg.laws
    vs = _lattice(cfg.sigma_map.get("v_star"), (0.25 * b.v_star, 2.0 * b.v_star, 8))
    alphas = _lattice(cfg.sigma_map.get("alpha"), (0.5, 4.0, 36))
    rows = []
    for v in vs:
        for a in alphas:
            sp = steady.sigma_membership(float(v), float(a), b.u_minus, b.u_plus, laws)
            rows.append((sp.v_star, sp.alpha, sp.in_sigma, sp.margin, sp.refinement_ok))
    manifest.add(io.write_csv(outdir / "sigma_map.csv",
                              ("v_star", "alpha", "in_sigma", "margin", "refinement_ok"),
                              rows, _problem_meta(cfg)), "sigma_map")
    manifest.summary = {"points": len(rows), "in_sigma": int(sum(r[2] for r in rows))}
    print(f"points: {len(rows)}  in_sigma: {manifest.summary['in_sigma']}")


def run_hyperbolic_check(cfg: RunConfig, outdir: Path, manifest: io.Manifest, as_json=False):
    b, law = cfg.boundary, cfg.laws.pressure
    j = cfg.jump
    if j:
        missing = [k for k in ("rho_minus", "w_minus", "rho_plus", "w_plus") if k not in j]
        if missing:
            raise ConfigurationError("jump: missing " + ", ".join(missing))
        cand = hyperbolic.JumpCandidate(j["rho_minus"], j["w_minus"], j["rho_plus"], j["w_plus"],
                                        j.get("c", 0.0))
    else:
        cand = hyperbolic.JumpCandidate.stationary(b.u_minus, b.u_plus, b.v_star)
    record = hyperbolic.verdict(cand, law).as_record()
    record.update({"rho_minus": cand.rho_minus, "w_minus": cand.w_minus, "rho_plus": cand.rho_plus,
                   "w_plus": cand.w_plus, "c": cand.c})
    record["rh_residual_mass"], record["rh_residual_momentum"] = (
        float(record["rh_residual_mass"]), float(record["rh_residual_momentum"]))
    manifest.add(io.write_json(outdir / "verdict.json", record), "verdict")
    manifest.summary = {"admissible": record["admissible"]}
    if as_json:
        print(json.dumps(record, indent=2, sort_keys=True))
    else:
        for k in sorted(record):
            print(f"{k}: {record[k]}")


def run_figures(cfg: RunConfig, outdir: Path, manifest: io.Manifest, which=None):
    names = which or ([cfg.figure["name"]] if "name" in cfg.figure else sorted(BUILDERS))
    for name in names:
        fd = BUILDERS[name](cfg)
        labels = {str(k): lab for k, (lab, _, _) in enumerate(fd.curves)}
        data = manifest.add(io.write_csv(outdir / f"{name}_data.csv", ("curve", "x", "y"),
                                         fd.rows(), dict(fd.meta, curves=labels)), "figure-data")
        desc = json.dumps({"figure": name, "data": data.name, "data_sha256": io.sha256_file(data),
                           "curves": labels, **fd.meta}, sort_keys=True, default=str)
        manifest.add(render(outdir / f"{name}.svg", fd.panels, desc, fd.title), "figure")
        print(f"{name}: {outdir / (name + '.svg')}")
    manifest.summary = {"figures": list(names)}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.mode, args.config, args.preset, _overrides(args), args.out)
    except (ConfigurationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    outdir = output_dir(cfg, args.config)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = io.Manifest(outdir, cfg.mode)
    error = None
    try:
        _echo_config(cfg, outdir, manifest)
        if cfg.mode == "steady":
            run_steady(cfg, outdir, manifest)
        elif cfg.mode == "evolve":
            run_evolve(cfg, outdir, manifest, not args.no_snapshots)
        elif cfg.mode == "sigma-map":
            run_sigma_map(cfg, outdir, manifest)
        elif cfg.mode == "hyperbolic-check":
            run_hyperbolic_check(cfg, outdir, manifest, args.json)
        else:
            run_figures(cfg, outdir, manifest, args.which)
    except NSStabError as exc:
        error = exc
    finally:
        manifest.finish(error)
    if error is not None:
        print(f"error: {type(error).__name__}: {error}", file=sys.stderr)
        if isinstance(error, (ConfigurationError, UsageError)):
            return EXIT_USAGE
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
