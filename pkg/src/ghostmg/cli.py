"""Command-line front end.

Subcommands: solve (homogeneous cycling experiment on one case), rho-sweep
(convergence factor over a theta x dtau grid), dtau-table (tabulated optimal
parameters), spectrum (DFT of the ghost-layer residual), cases (registry
listing).  All floats are written with 17 significant digits so identical
configurations reproduce byte-identical files.
"""

import argparse
import concurrent.futures
import csv
import json
import math
import os
import sys

import numpy as np

from . import blfa
from .cases import REGISTRY, build_case
from .geometry import ELIMINATED, GHOST, INACTIVE
from .kinds import BC_DIRICHLET, BC_NEUMANN, PDE_POISSON, VARIANT_POLY, VARIANTS
from .operators import ProblemSpec
from .smoothing import DTAU_BLFA, DTAU_BLFA_POLY, DTAU_CONSTANT, SmootherConfig
from .solver import CycleConfig, build_solver, measure_rho
from .spectrum import boundary_spectrum, ghost_residual_probe

LABEL_NAMES = {0: "internal", 1: "ghost", 2: "inactive", 3: "eliminated"}


def fmt(x):
    return format(float(x), ".17g")


def parse_dtau_mode(text):
    """'constant:<value>', 'blfa' or 'blfa-poly' -> SmootherConfig pieces."""
    if text.startswith("constant:"):
        return DTAU_CONSTANT, float(text.split(":", 1)[1])
    if text in (DTAU_BLFA, DTAU_BLFA_POLY):
        return text, 1.0
    raise ValueError(f"bad dtau mode {text!r}; use constant:<v>, blfa or blfa-poly")


def parse_grid_arg(text):
    """Comma list 'a,b,c' or linspace 'lo:hi:n' -> list of floats."""
    if ":" in text:
        lo, hi, n = text.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
    return [float(v) for v in text.split(",")]


def load_config(path):
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _case_spec(args):
    setup = build_case(args.case, args.N, getattr(args, "theta", 0.5))
    spec = ProblemSpec(pde=args.pde, bc=args.bc)
    return setup, spec


def _smoother(args):
    mode, value = parse_dtau_mode(args.dtau)
    return SmootherConfig(dtau_mode=mode, dtau_value=value, nu1=args.nu1, nu2=args.nu2)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ----- solve ---------------------------------------------------------


def cmd_solve(args):
    setup, spec = _case_spec(args)
    solver = build_solver(
        setup.grid,
        setup.phi,
        spec,
        eliminated_faces=setup.eliminated_faces,
        smoother=_smoother(args),
        cycle=CycleConfig(scheme=args.scheme, cycles=args.cycles, norm=args.norm),
        default_variant=setup.default_variant,
    )
    u, report = solver.solve(cycles=args.cycles, seed=args.seed)

    os.makedirs(args.out_dir, exist_ok=True)
    cls = solver.levels[0].cls
    coords = setup.grid.coords()
    axis_names = ["x", "y", "z"][: setup.grid.d]
    rows = []
    for i in range(setup.grid.n_nodes):
        rows.append(
            [*(fmt(c) for c in coords[i]), LABEL_NAMES[int(cls.labels[i])], fmt(u[i])]
        )
    _write_csv(os.path.join(args.out_dir, "field.csv"), [*axis_names, "label", "value"], rows)

    res_rows = [["0", fmt(report.residual_norms[0]), ""]]
    for m, rho in enumerate(report.rho_sequence, start=1):
        res_rows.append([str(m), fmt(report.residual_norms[m]), fmt(rho)])
    _write_csv(
        os.path.join(args.out_dir, "residuals.csv"), ["cycle", "residual_norm", "rho"], res_rows
    )

    dtau = solver.plans[0].ghost_dtau
    payload = {
        "config": {
            "case": args.case,
            "N": args.N,
            "theta": getattr(args, "theta", None),
            "bc": args.bc,
            "pde": args.pde,
            "dtau": args.dtau,
            "scheme": args.scheme,
            "nu1": args.nu1,
            "nu2": args.nu2,
            "seed": args.seed,
            "cycles": args.cycles,
            "norm": args.norm,
        },
        "n_ghosts": int(cls.n_ghosts),
        "dtau_min": float(dtau.min()) if len(dtau) else None,
        "dtau_max": float(dtau.max()) if len(dtau) else None,
        "report": report.to_dict(),
    }
    with open(os.path.join(args.out_dir, "report.json"), "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    rho = report.rho_asymptotic
    print(f"rho_asymptotic = {rho if rho is not None else 'n/a'}"
          f"{' (diverged)' if report.diverged else ''}")
    return 0


# ----- rho-sweep -----------------------------------------------------


def _sweep_cell(payload):
    (case, N, theta, bc, pde, dtau_value, scheme, nu1, nu2, seed, cycles, norm) = payload
    setup = build_case(case, N, theta)
    spec = ProblemSpec(pde=pde, bc=bc)
    solver = build_solver(
        setup.grid,
        setup.phi,
        spec,
        eliminated_faces=setup.eliminated_faces,
        smoother=SmootherConfig(
            dtau_mode=DTAU_CONSTANT, dtau_value=dtau_value, nu1=nu1, nu2=nu2
        ),
        cycle=CycleConfig(scheme=scheme, cycles=cycles, norm=norm),
        default_variant=setup.default_variant,
    )
    report = measure_rho(solver, seed=seed, cycles=cycles)
    rho = min(report.rho_asymptotic, 1.0)
    return theta, dtau_value, rho, report.diverged


def cmd_rho_sweep(args):
    thetas = parse_grid_arg(args.thetas)
    dtaus = parse_grid_arg(args.dtaus)
    cells = [
        (args.case, args.N, th, args.bc, args.pde, dt, args.scheme,
         args.nu1, args.nu2, args.seed, args.cycles, args.norm)
        for th in thetas
        for dt in dtaus
    ]
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(c) for c in cells]
    rows = [
        [fmt(th), fmt(dt), fmt(rho), "1" if diverged else "0"]
        for th, dt, rho, diverged in results
    ]
    _write_csv(args.out, ["theta", "dtau", "rho", "diverged"], rows)
    print(f"wrote {len(rows)} cells to {args.out}")
    return 0


# ----- dtau-table ----------------------------------------------------


def cmd_dtau_table(args):
    thetas = parse_grid_arg(args.thetas)
    rows = []
    for theta in thetas:
        row = [fmt(theta)]
        for bc in (BC_DIRICHLET, BC_NEUMANN):
            query = blfa.BlfaQuery(bc=bc, d=args.d, theta=theta, h=1.0, variant=args.variant)
            row.append(fmt(blfa.dtau_opt(query)))
        for bc in (BC_DIRICHLET, BC_NEUMANN):
            gs = [
                abs(
                    blfa.g0(
                        blfa.BlfaQuery(bc=bc, d=args.d, theta=theta, h=1.0, variant=args.variant),
                        blfa.symbol_p_continuous(a),
                    )
                )
                for a in blfa.corner_points(max(args.d, 2))
            ]
            row.append(fmt(blfa.minimax_lines(gs)[0]))
        row.extend([args.variant, str(args.d)])
        rows.append(row)
    header = [
        "theta",
        "dtau_dirichlet",
        "dtau_neumann_over_h",
        "dtau_dirichlet_continuous",
        "dtau_neumann_over_h_continuous",
        "variant",
        "d",
    ]
    _write_csv(args.out, header, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# ----- spectrum ------------------------------------------------------


def cmd_spectrum(args):
    setup, spec = _case_spec(args)
    from .geometry import classify

    cls = classify(setup.grid, setup.phi, setup.eliminated_faces)
    base = blfa.dtau_opt(
        blfa.BlfaQuery(
            bc=args.bc,
            d=setup.grid.d,
            theta=args.theta,
            h=setup.grid.h,
            variant=setup.default_variant,
        )
    )
    os.makedirs(args.out_dir, exist_ok=True)
    factors = parse_grid_arg(args.factors)
    summary = {"dtau_base": float(base), "theta": args.theta, "N": args.N, "runs": []}
    for factor in factors:
        dtau = factor * base
        r = ghost_residual_probe(cls, spec, dtau, seed=args.seed, sweeps=args.sweeps)
        rep = boundary_spectrum(r)
        name = f"spectrum_f{fmt(factor)}.csv"
        _write_csv(
            os.path.join(args.out_dir, name),
            ["alpha", "amplitude"],
            [[fmt(a), fmt(v)] for a, v in zip(rep.alphas, rep.amplitudes)],
        )
        summary["runs"].append(
            {
                "factor": float(factor),
                "dtau": float(dtau),
                "file": name,
                "high_low_ratio": rep.high_low_ratio,
                "energy_high_low_ratio": rep.energy_high_low_ratio,
            }
        )
        print(f"factor {factor:g}: high/low peak ratio {rep.high_low_ratio:.4f}")
    with open(os.path.join(args.out_dir, "spectrum.json"), "w", encoding="ascii") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


# ----- cases ---------------------------------------------------------


def cmd_cases(args):
    for name in sorted(REGISTRY):
        c = REGISTRY[name]
        theta = "theta" if c.uses_theta else "     "
        print(f"{name:10s} d={c.d} {theta}  {c.description}")
    return 0


# ----- parser --------------------------------------------------------


def _add_common(p, theta=True):
    p.add_argument("--case", default="vline", choices=sorted(REGISTRY))
    p.add_argument("--N", type=int, default=64)
    if theta:
        p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--bc", default=BC_DIRICHLET, choices=[BC_DIRICHLET, BC_NEUMANN])
    p.add_argument("--pde", default=PDE_POISSON)
    p.add_argument("--nu1", type=int, default=2)
    p.add_argument("--nu2", type=int, default=1)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--cycles", type=int, default=16)
    p.add_argument("--norm", default="inf", choices=["inf", "l2"])
    p.add_argument("--scheme", default="two-grid", choices=["two-grid", "v", "w"])
    p.add_argument("--config", default=None, help="flat key=value file with defaults")


def build_parser():
    parser = argparse.ArgumentParser(prog="ghostmg")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the homogeneous cycling experiment")
    _add_common(p)
    p.add_argument("--dtau", default="blfa", help="constant:<v>, blfa or blfa-poly")
    p.add_argument("--out-dir", dest="out_dir", default="out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("rho-sweep", help="rho over a theta x dtau grid")
    _add_common(p, theta=False)
    p.add_argument("--thetas", default="0.2,0.5,0.8")
    p.add_argument("--dtaus", default="0.25:3.0:12")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="rho_sweep.csv")
    p.set_defaults(func=cmd_rho_sweep)

    p = sub.add_parser("dtau-table", help="tabulate optimal dtau against theta")
    p.add_argument("--d", type=int, default=2, choices=[1, 2, 3])
    p.add_argument("--variant", default=VARIANT_POLY, choices=list(VARIANTS))
    p.add_argument("--thetas", default="0.0:0.99:100")
    p.add_argument("--out", default="dtau_table.csv")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_dtau_table)

    p = sub.add_parser("spectrum", help="ghost-layer residual DFT")
    _add_common(p)
    p.add_argument("--factors", default="0.5,1.0,1.5")
    p.add_argument("--sweeps", type=int, default=10)
    p.add_argument("--out-dir", dest="out_dir", default="out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("cases", help="list the case registry")
    p.set_defaults(func=cmd_cases)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        overrides = load_config(args.config)
        # explicit command-line flags keep priority over the config file
        explicit = {
            a.split("=", 1)[0].lstrip("-").replace("-", "_")
            for a in argv
            if a.startswith("--")
        }
        for key, text in overrides.items():
            if key == "config" or key in explicit:
                continue
            if not hasattr(args, key):
                raise SystemExit(f"config key {key!r} is not an option of {args.command!r}")
            current = getattr(args, key)
            if isinstance(current, bool):
                value = text.lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int):
                value = int(text)
            elif isinstance(current, float):
                value = float(text)
            else:
                value = text
            setattr(args, key, value)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
