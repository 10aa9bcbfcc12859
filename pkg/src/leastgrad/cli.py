"""Batch command-line front end.

Subcommands: ``solve``, ``dual``, ``density``, ``sbv``,
``stability data|domain``, ``check monotone``, ``demo brothers``.

Exit codes: 0 success, 1 domain/model failure (nonexistence verdict,
failed certificate, failed stability verdict), 2 configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .boundary import BoundaryBV
from .duality import dual_field_z, dual_potentials, duality_report, extend_potential
from .errors import LeastGradError
from .fields import GridSpec, rasterize_density, sbv_split
from .geometry import ConvexPolygon, domain_from_json
from .harness import (
    brothers_g1,
    brothers_g2,
    check_monotone_polygon,
    run_data_stability,
    run_domain_approx,
)
from .pipeline import solve_lgp
from .svgfig import (
    render_arc_potential,
    render_family_regions,
    render_pinwheel_potential,
    render_plan,
    render_solution,
)
from .transport import count_crossings


class ConfigError(Exception):
    """Invalid or missing configuration."""


_PRESETS = {
    "brothers_g1": lambda spec: brothers_g1(int(spec.get("samples", 720))),
    "brothers_g2": lambda spec: brothers_g2(int(spec.get("samples", 180))),
}


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}")
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _domain_datum(cfg: dict):
    try:
        domain = domain_from_json(cfg["domain"])
    except KeyError:
        raise ConfigError("config needs a 'domain' entry")
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad domain spec: {e}")
    try:
        spec = cfg["datum"]
    except KeyError:
        raise ConfigError("config needs a 'datum' entry")
    try:
        if "preset" in spec:
            name = spec["preset"]
            if name not in _PRESETS:
                raise ConfigError(f"unknown datum preset {name!r}")
            g = _PRESETS[name](spec)
            if g.domain.to_json() != domain.to_json():
                raise ConfigError(f"preset {name!r} requires the unit disc domain")
        else:
            g = BoundaryBV.from_json(domain, spec)
    except (ValueError, TypeError, KeyError) as e:
        raise ConfigError(f"bad datum spec: {e}")
    return domain, g


def _numbers(args, cfg) -> tuple[int, int]:
    n_diffuse = args.diffuse if args.diffuse is not None else cfg.get("n_diffuse", 180)
    grid = args.grid if args.grid is not None else cfg.get("grid", 256)
    if n_diffuse < 1:
        raise ConfigError("n_diffuse must be >= 1")
    if grid < 16:
        raise ConfigError("grid must be >= 16")
    return int(n_diffuse), int(grid)


def _emit(outdir: str | None, name: str, payload):
    if outdir is None:
        return
    path = Path(outdir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / name
    if isinstance(payload, str):
        target.write_text(payload)
    else:
        target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _solution_csv(res, grid_n: int) -> str:
    grid = GridSpec.cover(res.domain, grid_n)
    xs, ys = grid.centers()
    X, Y = np.meshgrid(xs, ys)
    inside = np.array(
        [res.domain.contains((x, y)) for x, y in zip(X.ravel(), Y.ravel())]
    )
    vals = np.full(X.size, np.nan)
    vals[inside] = res.solution.evaluate_many(X.ravel()[inside], Y.ravel()[inside])
    lines = ["x,y,value"]
    for x, y, v, ok in zip(X.ravel(), Y.ravel(), vals, inside):
        if ok:
            lines.append(f"{x:.12g},{y:.12g},{v:.12g}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    domain, g = _domain_datum(cfg)
    n_diffuse, grid_n = _numbers(args, cfg)
    res = solve_lgp(domain, g, n_diffuse)
    report = {
        "cost": res.cost,
        "boundary_mass": res.boundary_mass,
        "exists": res.exists,
        "crossings": count_crossings(res.plan),
    }
    _emit(args.out, "plan.json", res.plan.to_json())
    if not res.exists:
        _emit(args.out, "report.json", report)
        print(
            "no least gradient solution: "
            f"boundary mass {round(float(res.boundary_mass), 12)!r}",
            file=sys.stderr,
        )
        return 1
    report["total_variation"] = res.total_variation()
    _emit(args.out, "report.json", report)
    _emit(args.out, "solution.json", res.solution.to_json())
    _emit(args.out, "solution.svg", render_solution(res.solution))
    _emit(args.out, "solution.csv", _solution_csv(res, grid_n))
    print(
        f"cost {res.cost:.12g}  total variation {report['total_variation']:.12g}  "
        f"faces {len(res.solution.face_values)}"
    )
    return 0


def _cmd_dual(args) -> int:
    cfg = _load_config(args.config)
    domain, g = _domain_datum(cfg)
    n_diffuse, grid_n = _numbers(args, cfg)
    res = solve_lgp(domain, g, n_diffuse, reconstruct=False)
    phi = dual_potentials(res.plan, res.mu)
    rep = duality_report(res.plan, phi, res.mu)
    field = extend_potential(phi)
    z = dual_field_z(field, GridSpec.cover(domain, grid_n))
    _emit(
        args.out,
        "potentials.json",
        {
            "points": [list(p) for p in phi.points],
            "values": list(phi.values),
            "gap": rep.gap,
            "primal_cost": rep.primal_cost,
            "dual_value": rep.dual_value,
            "saturation_residual": rep.saturation_residual,
            "lipschitz_violation": rep.lipschitz_violation,
            "certified": rep.certified,
        },
    )
    _emit(args.out, "z.csv", z.to_csv())
    print(
        f"duality gap {rep.gap:.3e}  saturation {rep.saturation_residual:.3e}  "
        f"certified {rep.certified}"
    )
    return 0 if rep.certified else 1


def _cmd_density(args) -> int:
    cfg = _load_config(args.config)
    domain, g = _domain_datum(cfg)
    n_diffuse, grid_n = _numbers(args, cfg)
    res = solve_lgp(domain, g, n_diffuse, reconstruct=False)
    dens = rasterize_density(res.plan, GridSpec.cover(domain, grid_n), domain)
    identity = abs(dens.total_sigma() + dens.boundary_mass - res.cost)
    _emit(args.out, "density.csv", dens.to_csv())
    _emit(
        args.out,
        "density_report.json",
        {
            "total_sigma": dens.total_sigma(),
            "boundary_mass": dens.boundary_mass,
            "cost": res.cost,
            "identity_residual": identity,
            "max_flux_excess": dens.max_flux_excess(),
        },
    )
    print(
        f"sigma {dens.total_sigma():.12g}  boundary mass "
        f"{dens.boundary_mass:.12g}  identity residual {identity:.3e}"
    )
    return 0


def _cmd_sbv(args) -> int:
    cfg = _load_config(args.config)
    domain, g = _domain_datum(cfg)
    n_diffuse, _ = _numbers(args, cfg)
    res = solve_lgp(domain, g, n_diffuse, reconstruct=False)
    split = sbv_split(res.plan)
    names = ("gamma1", "gamma2", "gamma3", "gamma4")
    payload = {
        name: {"pairs": len(frag.pairs), "cost": frag.cost}
        for name, frag in zip(names, split.fragments)
    }
    payload["cost_sum"] = split.cost_sum()
    payload["total_cost"] = res.cost
    payload["singular_segments"] = [
        {"src": list(a), "dst": list(b), "mass": m}
        for a, b, m in split.singular_segments()
    ]
    _emit(args.out, "sbv.json", payload)
    print(
        "  ".join(
            f"{n} cost {payload[n]['cost']:.12g} ({payload[n]['pairs']} pairs)"
            for n in names
        )
    )
    return 0


def _cmd_stability(args) -> int:
    cfg = _load_config(args.config)
    domain, g = _domain_datum(cfg)
    n_diffuse, grid_n = _numbers(args, cfg)
    if args.mode == "data":
        schedule = cfg.get("schedule")
        if not schedule:
            raise ConfigError("stability data needs a 'schedule' list")
        rep = run_data_stability(g, schedule, grid_n=grid_n)
    else:
        eps = cfg.get("eps_schedule")
        if not eps:
            raise ConfigError("stability domain needs an 'eps_schedule' list")
        rep = run_domain_approx(domain, g, eps, n_diffuse=n_diffuse, grid_n=grid_n)
    _emit(args.out, f"stability_{args.mode}.json", rep.to_json())
    for r in rep.records:
        print(
            f"level {r.level:g}  L1 {r.l1_distance:.6g}  tv gap {r.tv_gap:.6g}"
        )
    ok = all(bool(v) for v in rep.verdicts.values())
    print(f"verdicts: {rep.verdicts}")
    return 0 if ok else 1


def _cmd_check(args) -> int:
    cfg = _load_config(args.config)
    domain, g = _domain_datum(cfg)
    n_diffuse, _ = _numbers(args, cfg)
    if not isinstance(domain, ConvexPolygon):
        raise ConfigError("check monotone needs a polygon domain")
    verdict = check_monotone_polygon(domain, g, n_diffuse)
    _emit(
        args.out,
        "monotone.json",
        {
            "monotone": verdict.monotone,
            "violations": list(verdict.violations),
            "boundary_mass": verdict.boundary_mass,
            "exists": verdict.exists,
        },
    )
    if verdict.exists:
        print(verdict.message)
        return 0
    print(verdict.message, file=sys.stderr)
    return 1


def _cmd_demo(args) -> int:
    out = args.out or "."
    _emit(out, "potential_cone.svg", render_pinwheel_potential())
    _emit(out, "potential_arcs.svg", render_arc_potential())
    _emit(out, "family_regions.svg", render_family_regions())
    res = solve_lgp(brothers_g1().domain, brothers_g1(), n_diffuse=180)
    _emit(out, "solution_g1.svg", render_solution(res.solution))
    _emit(out, "plan_g1.svg", render_plan(res.plan, res.domain))
    res2 = solve_lgp(brothers_g2().domain, brothers_g2(), n_diffuse=180)
    _emit(out, "solution_g2.svg", render_solution(res2.solution))
    print(f"wrote demo figures to {out}")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="leastgrad",
        description="Least gradient problems via boundary optimal transport",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory for artifacts")
        p.add_argument("--grid", type=int, default=None, help="evaluation grid size")
        p.add_argument(
            "--diffuse", type=int, default=None, help="cells per sign-constant run"
        )
        p.add_argument("--seed", type=int, default=None, help="random seed")

    for name, fn in (
        ("solve", _cmd_solve),
        ("dual", _cmd_dual),
        ("density", _cmd_density),
        ("sbv", _cmd_sbv),
    ):
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("stability")
    p.add_argument("mode", choices=("data", "domain"))
    common(p)
    p.set_defaults(fn=_cmd_stability)

    p = sub.add_parser("check")
    p.add_argument("mode", choices=("monotone",))
    common(p)
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("demo")
    p.add_argument("mode", choices=("brothers",))
    common(p, config_required=False)
    p.set_defaults(fn=_cmd_demo)
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    if getattr(args, "seed", None) is not None:
        np.random.seed(args.seed)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except LeastGradError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
