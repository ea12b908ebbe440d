"""Command-line front end: JSON/CSV in, CSV/JSON out, machine-readable errors.

Exit codes: 0 success, 2 validation/configuration, 3 convergence,
4 unsupported index or domain.  Every subcommand accepts --dry-run, which
validates the configuration without computing.  The environment variable
CAPLACE_THREADS caps BLAS/OpenMP parallelism for reproducible timings.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .aharmonic import solve_directional_aharmonic, solve_neumann_aharmonic
from .beltrami import (
    A_from_mu,
    BeltramiField,
    MatrixFieldA,
    extend_mu,
    mu_from_A,
    solve_beltrami,
)
from .conformal import riemann_map, solve_directional_jordan, solve_neumann_jordan
from .errors import CaplaceError, ConfigurationError, IncompatibleDataError
from .family import generate_family
from .geometry import (
    BoundaryData,
    DirectionField,
    JordanCurve,
    limacon_curve,
    normal_field,
    unit_circle,
)
from .harmonic import export_solution_csv, solve_directional_disk, solve_neumann_disk
from .oracle import FDGrid, fd_solve_neumann, fourier_neumann_disk
from .validation import check_power_of_two


def _cap_threads():
    cap = os.environ.get("CAPLACE_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


# -- selectors ---------------------------------------------------------------


def parse_curve(spec, n):
    if spec == "circle":
        return unit_circle(n)
    if spec.startswith("limacon:"):
        return limacon_curve(n, float(spec.split(":", 1)[1]))
    if os.path.exists(spec):
        return JordanCurve.from_csv(spec)
    raise ConfigurationError(f"unknown curve selector {spec!r}")


def parse_phi(spec, curve):
    n = curve.size
    t = curve.t
    if spec == "cos":
        return BoundaryData(np.cos(t))
    if spec == "sin":
        return BoundaryData(np.sin(t))
    if spec == "sin2":
        return BoundaryData(np.sin(2 * t))
    if spec == "normal-x":
        # directional data of the manufactured solution u0 = x
        return BoundaryData(curve.n.real)
    if spec.startswith("const:"):
        return BoundaryData.constant(float(spec.split(":", 1)[1]), n)
    if os.path.exists(spec):
        data = BoundaryData.from_csv(spec)
        if data.size != n:
            raise ConfigurationError(
                f"{spec}: {data.size} samples but the curve has {n}"
            )
        return data
    raise ConfigurationError(f"unknown phi selector {spec!r}")


def parse_nu(spec, curve):
    if spec == "normal":
        return normal_field(curve)
    if spec.startswith("const:"):
        re, im = (float(v) for v in spec.split(":", 1)[1].split(","))
        return DirectionField.constant(complex(re, im), curve.size)
    raise ConfigurationError(f"unknown nu selector {spec!r}")


def parse_a(spec, grid_n, box):
    if spec == "identity":
        return MatrixFieldA.identity(L=box, n=grid_n)
    if spec.startswith("diag:"):
        p, q = (float(v) for v in spec.split(":", 1)[1].split(","))
        return MatrixFieldA.constant([[p, 0.0], [0.0, q]], L=box, n=grid_n)
    if os.path.exists(spec):
        data = np.loadtxt(spec, delimiter=",", skiprows=1, ndmin=2)
        n = int(round(np.sqrt(data.shape[0])))
        if n * n != data.shape[0] or data.shape[1] != 5:
            raise ConfigurationError(
                f"{spec}: expected n^2 rows of x,y,a11,a12,a22"
            )
        x = np.unique(data[:, 0])
        y = np.unique(data[:, 1])
        return MatrixFieldA(
            x, y,
            data[:, 2].reshape(n, n), data[:, 3].reshape(n, n),
            data[:, 4].reshape(n, n),
        )
    raise ConfigurationError(f"unknown coefficient selector {spec!r}")


def parse_mu(spec, grid_n, box, cutoff):
    if spec.startswith("const:"):
        parts = [float(v) for v in spec.split(":", 1)[1].split(",")]
        c = complex(parts[0], parts[1] if len(parts) > 1 else 0.0)
        return extend_mu(lambda z: c + 0.0 * np.asarray(z), R=cutoff, L=box, n=grid_n)
    if os.path.exists(spec):
        data = np.loadtxt(spec, delimiter=",", skiprows=1, ndmin=2)
        n = int(round(np.sqrt(data.shape[0])))
        if n * n != data.shape[0] or data.shape[1] != 4:
            raise ConfigurationError(f"{spec}: expected n^2 rows of x,y,re,im")
        x = np.unique(data[:, 0])
        return BeltramiField(
            x, np.unique(data[:, 1]),
            (data[:, 2] + 1j * data[:, 3]).reshape(n, n),
            support_radius=cutoff,
        )
    raise ConfigurationError(f"unknown mu selector {spec!r}")


def parse_zeta0(spec):
    re, im = (float(v) for v in spec.split(","))
    return complex(re, im)


# -- output helpers ----------------------------------------------------------


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_solution(prefix, sol, stages, report_kwargs=None):
    if hasattr(sol, "interior_grid"):
        pts, _ = sol.interior_grid()
    else:
        from .harmonic import disk_grid

        pts = disk_grid()
    u = np.asarray(sol.u(pts), dtype=float)
    g = np.asarray(sol.grad(pts))
    export_solution_csv(f"{prefix}_solution.csv", pts, u, g)
    rep = sol.residual_report(**(report_kwargs or {}))
    _write_json(f"{prefix}_residual.json", rep.to_json_dict())
    _write_json(f"{prefix}_stages.json", stages)
    print(f"{prefix}: residual max {rep.max_abs:.3e} over {rep.n_probes} probes")


# -- subcommands -------------------------------------------------------------


def cmd_solve_disk(args, directional):
    n = check_power_of_two(args.n)
    curve = unit_circle(n)
    phi = parse_phi(args.phi, curve)
    zeta0 = parse_zeta0(args.zeta0)
    if args.dry_run:
        return 0
    t0 = time.time()
    if directional:
        nu = parse_nu(args.nu, curve)
        sol = solve_directional_disk(nu, phi, zeta0)
    else:
        sol = solve_neumann_disk(phi, zeta0)
    stages = {"solver": "disk", "n": n, "zeta0": [zeta0.real, zeta0.imag],
              "elapsed_s": time.time() - t0}
    _write_solution(args.out, sol, stages, report_kwargs={"kappa": args.kappa})
    return 0


def cmd_solve_jordan(args, directional):
    n = check_power_of_two(args.n)
    curve = parse_curve(args.curve, n)
    phi = parse_phi(args.phi, curve)
    if args.dry_run:
        return 0
    t0 = time.time()
    if directional:
        nu = parse_nu(args.nu, curve)
        sol = solve_directional_jordan(curve, nu, phi, t0=args.t0)
    else:
        sol = solve_neumann_jordan(curve, phi, t0=args.t0)
    stages = {"solver": "jordan", "n": n, "curve": args.curve,
              "map_defect": sol.cmap.analyticity_defect,
              "elapsed_s": time.time() - t0}
    _write_solution(args.out, sol, stages)
    return 0


def cmd_solve_aharmonic(args, directional):
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    a_spec = cfg.get("A", args.a)
    curve_spec = cfg.get("curve", args.curve)
    phi_spec = cfg.get("phi", args.phi)
    grid_n = int(cfg.get("grid", args.grid))
    out = cfg.get("out", args.out)
    zeta0 = complex(*cfg["zeta0"]) if "zeta0" in cfg else parse_zeta0(args.zeta0)

    n = check_power_of_two(args.n)
    curve = parse_curve(curve_spec, n)
    phi = parse_phi(phi_spec, curve)
    A = parse_a(a_spec, grid_n, args.box)
    t0_param = float(np.angle(zeta0)) % (2.0 * np.pi)
    if args.dry_run:
        A.validate()
        return 0
    t_start = time.time()
    if directional:
        nu = parse_nu(args.nu, curve)
        sol = solve_directional_aharmonic(A, curve, nu, phi, t0=t0_param)
    else:
        sol = solve_neumann_aharmonic(A, curve, phi, t0=t0_param)
    stages = {
        "solver": "aharmonic", "n": n, "grid": grid_n, "A": str(a_spec),
        "curve": str(curve_spec),
        "beltrami_iterations": sol.h.iterations,
        "beltrami_residual": sol.h.residual_sup,
        "map_defect": sol.U.cmap.analyticity_defect,
        "elapsed_s": time.time() - t_start,
    }
    pts = 0.8 * np.asarray(
        [r * np.exp(1j * th) for r in np.linspace(0.1, 1.0, 10)
         for th in 2.0 * np.pi * np.arange(32) / 32]
    )
    u = np.asarray(sol.u(pts), dtype=float)
    g = np.asarray(sol.grad(pts))
    export_solution_csv(f"{out}_solution.csv", pts, u, g)
    rep = sol.residual_report()
    _write_json(f"{out}_residual.json", rep.to_json_dict())
    _write_json(f"{out}_stages.json", stages)
    print(f"{out}: residual max {rep.max_abs:.3e} over {rep.n_probes} probes")
    return 0


def cmd_beltrami(args):
    mu = parse_mu(args.mu, args.grid, args.box, args.cutoff)
    if args.dry_run:
        return 0
    h = solve_beltrami(mu, tol=args.tol,
                       max_iters=args.max_iters if args.max_iters else None)
    h.to_csv(f"{args.out}_h", tolerances={"iteration": args.tol})
    print(f"{args.out}: {h.iterations} iterations, residual {h.residual_sup:.3e}")
    return 0


def cmd_conformal(args):
    n = check_power_of_two(args.n)
    curve = parse_curve(args.curve, n)
    if args.dry_run:
        return 0
    cmap = riemann_map(curve, tol=args.tol)
    cmap.to_json(f"{args.out}_map.json")
    print(f"{args.out}: map defect {cmap.analyticity_defect:.3e}")
    return 0


def cmd_mu_from_a(args):
    A = parse_a(args.a, args.grid, args.box)
    if args.dry_run:
        return 0
    mu = mu_from_A(A)
    if args.a == "identity" or args.a.startswith("diag:"):
        v = mu.mu[0, 0]
        print(f"mu = {v.real:.10f}" + (f" + {v.imag:.10f}i" if abs(v.imag) > 1e-15 else ""))
    if args.out:
        mu.to_csv(f"{args.out}_mu")
    return 0


def cmd_a_from_mu(args):
    mu = parse_mu(args.mu, args.grid, args.box, args.cutoff)
    if args.dry_run:
        return 0
    A = A_from_mu(mu)
    if args.mu.startswith("const:"):
        print(f"a11 = {A.a11[0, 0]:.10f}  a12 = {A.a12[0, 0]:.10f}  "
              f"a22 = {A.a22[0, 0]:.10f}")
    if args.out:
        X, Y = np.meshgrid(A.x, A.y, indexing="ij")
        data = np.column_stack([X.ravel(), Y.ravel(), A.a11.ravel(),
                                A.a12.ravel(), A.a22.ravel()])
        np.savetxt(f"{args.out}_a.csv", data, fmt="%.17g", delimiter=",",
                   header="x,y,a11,a12,a22", comments="")
    return 0


def cmd_validate_a(args):
    A = parse_a(args.a, args.grid, args.box)
    if args.dry_run:
        return 0
    A.validate()
    lo, hi = A.eigen_range()
    print(f"class B ok: eigenvalues in [{lo:.6g}, {hi:.6g}]")
    return 0


def cmd_family(args):
    n = check_power_of_two(args.n)
    curve = unit_circle(n)
    phi = parse_phi(args.phi, curve)
    k = int(args.k)
    if k < 1:
        raise ConfigurationError("family size must be >= 1")
    anchors = [np.exp(2j * np.pi * j / k) for j in range(k)]
    if args.dry_run:
        return 0
    fam = generate_family(normal_field(curve), phi, anchors)
    fam.to_json(f"{args.out}_family.json")
    print(f"{args.out}: k={fam.size} rank={fam.rank} min_eig={fam.min_eigenvalue:.3e}")
    return 0


def cmd_oracle_compare(args):
    n = check_power_of_two(args.n)
    curve = unit_circle(n)
    if args.a == "identity":
        phi = parse_phi(args.phi, curve)
        if args.dry_run:
            return 0
        sol = solve_neumann_disk(phi)
        oracle = fourier_neumann_disk(phi)  # refuses nonzero-mean data
        xs = np.linspace(-0.8, 0.8, 33)
        Z = (xs[:, None] + 1j * xs[None, :]).ravel()
        Z = Z[np.abs(Z) <= 0.8]
        d = np.asarray(sol.u(Z)) - np.asarray(oracle.u(Z))
    elif args.a.startswith("diag:"):
        p, q = (float(v) for v in args.a.split(":", 1)[1].split(","))
        if args.dry_run:
            return 0
        A = parse_a(args.a, args.grid, args.box)
        sol = solve_neumann_aharmonic(A, curve, BoundaryData(curve.n.real))
        grid = FDGrid(curve, args.fd_n)
        fd = fd_solve_neumann((p, q), grid, BoundaryData(p * curve.n.real))
        Zn, un = fd.points()
        m = np.abs(Zn) <= 0.8
        Z, un = Zn[m], un[m]
        d = np.asarray(sol.u(Z)) - un
    else:
        raise IncompatibleDataError(
            f"no oracle available for coefficient selector {args.a!r}"
        )
    d = d - np.mean(d)
    report = {
        "max_discrepancy": float(np.max(np.abs(d))),
        "mean_discrepancy": float(np.mean(np.abs(d))),
        "n_points": int(len(d)),
        "a": args.a, "phi": args.phi,
    }
    _write_json(f"{args.out}_compare.json", report)
    print(f"{args.out}: max discrepancy {report['max_discrepancy']:.3e}")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="caplace",
        description="Nonclassical Neumann / directional-derivative solvers",
    )
    p.add_argument("--version", action="version", version=f"caplace {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, curve=False, nu=False, aharm=False):
        sp.add_argument("--n", type=int, default=1024, help="boundary samples (power of two)")
        sp.add_argument("--phi", default="cos", help="cos|sin|sin2|normal-x|const:c|file.csv")
        sp.add_argument("--zeta0", default="1,0", help="corrector anchor re,im")
        sp.add_argument("--out", default="caplace_run", help="output prefix")
        sp.add_argument("--kappa", type=float, default=0.5, help="Stolz aperture")
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.add_argument("--max-iters", type=int, default=0)
        sp.add_argument("--dry-run", action="store_true")
        if curve:
            sp.add_argument("--curve", default="circle", help="circle|limacon:a|file.csv")
            sp.add_argument("--t0", type=float, default=0.0, help="corrector curve parameter")
        if nu:
            sp.add_argument("--nu", default="normal", help="normal|const:re,im")
        if aharm:
            sp.add_argument("--a", default="identity", help="identity|diag:p,q|file.csv")
            sp.add_argument("--grid", type=int, default=512, help="Beltrami grid per side")
            sp.add_argument("--box", type=float, default=2.0, help="computational half-width")
            sp.add_argument("--config", default=None, help="pipeline configuration JSON")

    sp = sub.add_parser("solve-neumann-disk", help="Neumann problem on the unit disk")
    common(sp)
    sp.set_defaults(fn=lambda a: cmd_solve_disk(a, directional=False))

    sp = sub.add_parser("solve-directional-disk", help="directional problem on the disk")
    common(sp, nu=True)
    sp.set_defaults(fn=lambda a: cmd_solve_disk(a, directional=True))

    sp = sub.add_parser("solve-neumann-jordan", help="Neumann problem on a Jordan domain")
    common(sp, curve=True)
    sp.set_defaults(fn=lambda a: cmd_solve_jordan(a, directional=False))

    sp = sub.add_parser("solve-directional-jordan", help="directional problem on a Jordan domain")
    common(sp, curve=True, nu=True)
    sp.set_defaults(fn=lambda a: cmd_solve_jordan(a, directional=True))

    sp = sub.add_parser("solve-neumann-aharmonic", help="A-harmonic Neumann problem")
    common(sp, curve=True, aharm=True)
    sp.set_defaults(fn=lambda a: cmd_solve_aharmonic(a, directional=False))

    sp = sub.add_parser("solve-directional-aharmonic", help="A-harmonic directional problem")
    common(sp, curve=True, nu=True, aharm=True)
    sp.set_defaults(fn=lambda a: cmd_solve_aharmonic(a, directional=True))

    sp = sub.add_parser("beltrami-solve", help="principal quasiconformal map of a dilatation")
    sp.add_argument("--mu", default="const:0.3", help="const:re[,im]|file.csv")
    sp.add_argument("--grid", type=int, default=512)
    sp.add_argument("--box", type=float, default=2.0)
    sp.add_argument("--cutoff", type=float, default=1.5)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iters", type=int, default=0)
    sp.add_argument("--out", default="caplace_run")
    sp.add_argument("--dry-run", action="store_true")
    sp.set_defaults(fn=cmd_beltrami)

    sp = sub.add_parser("conformal-map", help="Theodorsen Riemann map of a star-like curve")
    sp.add_argument("--curve", default="limacon:0.3")
    sp.add_argument("--n", type=int, default=1024)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--out", default="caplace_run")
    sp.add_argument("--dry-run", action="store_true")
    sp.set_defaults(fn=cmd_conformal)

    sp = sub.add_parser("mu-from-a", help="Beltrami coefficient of a class-B matrix")
    sp.add_argument("--a", required=True)
    sp.add_argument("--grid", type=int, default=16)
    sp.add_argument("--box", type=float, default=2.0)
    sp.add_argument("--out", default=None)
    sp.add_argument("--dry-run", action="store_true")
    sp.set_defaults(fn=cmd_mu_from_a)

    sp = sub.add_parser("a-from-mu", help="class-B matrix of a Beltrami coefficient")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--grid", type=int, default=16)
    sp.add_argument("--box", type=float, default=2.0)
    sp.add_argument("--cutoff", type=float, default=1.5)
    sp.add_argument("--out", default=None)
    sp.add_argument("--dry-run", action="store_true")
    sp.set_defaults(fn=cmd_a_from_mu)

    sp = sub.add_parser("validate-a", help="check class-B invariants, listing violations")
    sp.add_argument("--a", required=True)
    sp.add_argument("--grid", type=int, default=64)
    sp.add_argument("--box", type=float, default=2.0)
    sp.add_argument("--dry-run", action="store_true")
    sp.set_defaults(fn=cmd_validate_a)

    sp = sub.add_parser("family", help="independent solution family via corrector anchors")
    sp.add_argument("--k", type=int, default=3, help="number of anchors (roots of unity)")
    sp.add_argument("--n", type=int, default=512)
    sp.add_argument("--phi", default="const:1")
    sp.add_argument("--out", default="caplace_run")
    sp.add_argument("--dry-run", action="store_true")
    sp.set_defaults(fn=cmd_family)

    sp = sub.add_parser("oracle-compare", help="analytic pipeline vs reference oracle")
    sp.add_argument("--a", default="identity")
    sp.add_argument("--phi", default="cos")
    sp.add_argument("--n", type=int, default=1024)
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--fd-n", type=int, default=129)
    sp.add_argument("--box", type=float, default=2.0)
    sp.add_argument("--out", default="caplace_run")
    sp.add_argument("--dry-run", action="store_true")
    sp.set_defaults(fn=cmd_oracle_compare)

    return p


def main(argv=None):
    _cap_threads()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CaplaceError as e:
        json.dump(e.to_json_dict(), sys.stderr)
        sys.stderr.write("\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
