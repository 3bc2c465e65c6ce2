"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 invalid input,
3 numerical failure.
"""

import argparse
import csv
import io
import math
import os
import sys

import numpy as np

from . import atom, figures, oracles, validate
from .errors import (DegenerateSpectrumError, IntegratorError, InvalidInputError,
                     NumericalConsistencyError)
from .linalg import dagger, max_abs, rotation_operator
from .pathio import PRESETS, read_path_file
from .transport import (HolonomyResult, TransportProblem, amplitude_phase_from_holonomy,
                        holonomy, holonomy_via_potential, mixed_state_geometric_phase)

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
fmt = figures.fmt


def _finite(text):
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"{text!r} is not a finite number")
    return v


def _steps(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("--steps must be at least 2")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="uhlmann", description="Uhlmann holonomies of a spin-orbit coupled atom")
    sub = p.add_subparsers(dest="command", required=True)

    h = sub.add_parser("holonomy", help="holonomy and phases along one path")
    h.add_argument("--l", type=int, required=True)
    h.add_argument("--mu2", type=int, required=True, help="2*mu, an odd integer")
    h.add_argument("--g", type=_finite, required=True)
    h.add_argument("--branch", choices=("+", "-"), default="+")
    h.add_argument("--subsystem", choices=("L", "S", "J"), default="L")
    h.add_argument("--method", choices=("ode", "potential", "oracle", "all"), default="ode")
    src = h.add_mutually_exclusive_group(required=True)
    src.add_argument("--path", help="YAML/JSON path document")
    src.add_argument("--preset", choices=sorted(PRESETS))
    h.add_argument("--phi0", type=_finite, default=0.0, help="radians")
    h.add_argument("--phi1", type=_finite, default=math.pi / 2, help="radians")
    h.add_argument("--steps", type=_steps, default=2000, help="initial nodes per segment")
    h.add_argument("--section", choices=("north", "south", "auto"), default="north")
    h.add_argument("--out", default=None, help="output directory for csv/svg files")
    h.add_argument("--format", choices=("csv", "svg", "summary"), default="summary")

    f = sub.add_parser("figure", help="sweep data and plot for one figure")
    f.add_argument("which", choices=sorted(figures.SWEEPS))
    f.add_argument("--out", default=".")
    f.add_argument("--steps", type=_steps, default=2000)

    v = sub.add_parser("validate", help="run the invariant suite")
    v.add_argument("--level", choices=("quick", "full"), default="quick")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--inject-fault", type=_finite, default=0.0, metavar="SHIFT",
                   help="perturb the potential off-diagonal (self-test of the suite)")

    pth = sub.add_parser("paths", help="path document tools")
    psub = pth.add_subparsers(dest="paths_command", required=True)
    chk = psub.add_parser("check", help="parse and summarise a path document")
    chk.add_argument("file")
    return p


# -- holonomy -------------------------------------------------------------------

def _path_from_args(args):
    if args.path:
        return read_path_file(args.path)
    return PRESETS[args.preset](args.phi0, args.phi1)


def _mu(args):
    if args.mu2 % 2 == 0:
        raise InvalidInputError(f"--mu2 must be odd, got {args.mu2}")
    if abs(args.mu2) > 2 * args.l + 1:
        raise InvalidInputError(f"|--mu2| must not exceed 2l+1 = {2 * args.l + 1}")
    return args.mu2 / 2


def _oracle(args, mu, path):
    """Closed-form holonomy in the full subsystem space, or ``None`` if none applies."""
    l, g = args.l, args.g
    if args.subsystem == "J":
        return oracles.j_holonomy_closed_form(atom.eigenstate(atom.ModelParams(l, g), mu, args.branch), path)
    if atom.is_extremal(l, mu):
        u_l, u_s, _ = oracles.extremal_holonomies(l, "+" if mu > 0 else "-", path)
        return u_l if args.subsystem == "L" else u_s
    if args.path or args.preset not in PRESETS:
        return None
    p = oracles.Figure8Params(l, mu, g, args.phi0, args.phi1)
    table = {("figure-8", "L"): oracles.figure8_L_holonomy, ("figure-8", "S"): oracles.figure8_S_holonomy,
             ("orange-slice", "L"): oracles.orange_slice_L_holonomy,
             ("orange-slice", "S"): oracles.orange_slice_S_holonomy}
    return oracles.embed_block(args.subsystem, l, mu, table[args.preset, args.subsystem](p))


def compute_holonomies(args):
    mu = _mu(args)
    atom.ModelParams(args.l, args.g)
    path = _path_from_args(args)
    rho, ops = atom.reference_state(args.l, mu, args.g, args.branch, args.subsystem)
    methods = ("ode", "potential", "oracle") if args.method == "all" else (args.method,)
    results, notes = [], []
    for m in methods:
        if m == "ode":
            prob = TransportProblem(rho, ops, path, section=args.section,
                                    subsystem=args.subsystem, steps=args.steps)
            results.append(holonomy(prob))
        elif m == "potential":
            if args.subsystem == "J" or atom.is_extremal(args.l, mu):
                msg = "potential method needs a non-extremal L or S subsystem"
                if args.method == "potential":
                    raise InvalidInputError(msg)
                notes.append(msg)
                continue
            results.append(holonomy_via_potential(args.subsystem, args.l, mu, args.g, path, steps=args.steps))
        else:
            u = _oracle(args, mu, path)
            if u is None:
                msg = "no closed form for this subsystem and path"
                if args.method == "oracle":
                    raise InvalidInputError(msg)
                notes.append(msg)
                continue
            results.append(HolonomyResult(u, args.subsystem, "oracle"))
    (t0, p0), (t1, p1) = path.start, path.end
    r0 = rotation_operator(ops, t0, p0) @ rho @ dagger(rotation_operator(ops, t0, p0))
    r1 = rotation_operator(ops, t1, p1) @ rho @ dagger(rotation_operator(ops, t1, p1))
    beta = None
    if path.closed and not path.degenerate:
        beta = _beta(rho, ops, path, args)
    rows = []
    for h in results:
        rows.append({
            "method": h.method, "steps": h.steps, "trace": h.trace, "abs_trace": abs(h.trace),
            "gamma": h.phase_gamma, "phi_uhl": amplitude_phase_from_holonomy(r0, r1, h.matrix),
            "beta": beta, "residual": h.residual, "matrix": h.matrix,
        })
    return rows, notes, path


def _beta(rho, ops, path, args):
    """Mixed-state geometric phase (pure-state phase for J); ``None`` if ambiguous."""
    try:
        return mixed_state_geometric_phase(rho, ops, path, n_per_segment=args.steps)
    except (InvalidInputError, DegenerateSpectrumError):
        return None


def _summary(rows, notes, args, path):
    out = io.StringIO()
    w = out.write
    w(f"l={args.l} mu={args.mu2}/2 g={args.g:g} branch={args.branch} subsystem={args.subsystem}\n")
    w(f"path={path.label} segments={len(path.segments)} closed={path.closed} "
      f"section={args.section}\n")
    for r in rows:
        w(f"\n[{r['method']}] steps/segment={r['steps']}\n")
        # entries at roundoff level are shown as zero
        shown = np.where(np.abs(r["matrix"]) < 1e-15, 0.0, r["matrix"])
        for row in shown:
            w("  " + "  ".join(f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}j"
                             for z in row) + "\n")
        w(f"  |Tr U|   = {fmt(r['abs_trace'])}\n")
        w(f"  gamma    = {fmt(r['gamma'])}\n")
        w(f"  phi_uhl  = {fmt(r['phi_uhl'])}\n")
        w(f"  beta     = {fmt(r['beta'])}\n")
        w(f"  isometry residual = {fmt(r['residual'])}\n")
    if len(rows) > 1:
        ref = rows[0]["matrix"]
        for r in rows[1:]:
            w(f"\nmax |U_{rows[0]['method']} - U_{r['method']}| = {fmt(max_abs(ref - r['matrix']))}\n")
    for n in notes:
        w(f"note: {n}\n")
    return out.getvalue()


CSV_HEADER = ["method", "steps", "trace_re", "trace_im", "abs_trace", "gamma", "phi_uhl", "beta", "residual"]


def _csv(rows):
    out = io.StringIO()
    wr = csv.writer(out, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    for r in rows:
        wr.writerow([r["method"], r["steps"], fmt(r["trace"].real), fmt(r["trace"].imag),
                     fmt(r["abs_trace"]), fmt(r["gamma"]), fmt(r["phi_uhl"]), fmt(r["beta"]),
                     fmt(r["residual"])])
    return out.getvalue()


def _matrix_csv(filename, m):
    with open(filename, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["row", "col", "re", "im"])
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                wr.writerow([i, j, fmt(m[i, j].real), fmt(m[i, j].imag)])


def cmd_holonomy(args):
    rows, notes, path = compute_holonomies(args)
    if args.format == "summary":
        sys.stdout.write(_summary(rows, notes, args, path))
        return EXIT_OK
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    if args.format == "csv":
        text = _csv(rows)
        sys.stdout.write(text)
        if args.out:
            with open(os.path.join(out_dir, "holonomy.csv"), "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
            for r in rows:
                _matrix_csv(os.path.join(out_dir, f"holonomy_{r['method']}_matrix.csv"), r["matrix"])
        return EXIT_OK
    from .plotting import plot_holonomy
    for r in rows:
        fn = os.path.join(out_dir, f"holonomy_{r['method']}.svg")
        plot_holonomy(fn, r["matrix"], f"{args.subsystem} holonomy ({r['method']})")
        print(fn)
    return EXIT_OK


# -- figure / validate / paths ---------------------------------------------------

def cmd_figure(args):
    spec = figures.SWEEPS[args.which]
    figures.check_or_raise(spec, steps=args.steps)
    os.makedirs(args.out, exist_ok=True)
    header, rows = figures.sweep_rows(spec)
    csv_fn = os.path.join(args.out, f"{spec.name}.csv")
    svg_fn = os.path.join(args.out, f"{spec.name}.svg")
    figures.write_csv(csv_fn, header, rows)
    from .plotting import plot_sweep
    d = np.array([r[0] for r in rows])
    cols = [np.array([r[k] for r in rows]) for k in range(1, len(header))]
    plot_sweep(svg_fn, d, cols, [f"g = {g:g}" for g in spec.gs],
               "ξ" if spec.quantity == "xi" else "ζ")
    print(csv_fn)
    print(svg_fn)
    return EXIT_OK


def cmd_validate(args):
    results = validate.run(args.level, args.seed, args.inject_fault)
    wr = csv.writer(sys.stdout, lineterminator="\n")
    wr.writerow(["invariant", "status", "detail"])
    for name, ok, detail in results:
        wr.writerow([name, "PASS" if ok else "FAIL", detail])
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VALIDATION


def cmd_paths_check(args):
    spec = read_path_file(args.file)
    print(f"label={spec.label}")
    print(f"segments={len(spec.segments)}")
    for k, seg in enumerate(spec.segments):
        (t0, p0), (t1, p1) = seg.endpoints()
        print(f"  {k}: {seg.kind} ({fmt(t0)}, {fmt(p0)}) -> ({fmt(t1)}, {fmt(p1)})")
    print(f"closed={spec.closed}")
    print(f"loop_integral={fmt(spec.loop_integral())}")
    return EXIT_OK


COMMANDS = {"holonomy": cmd_holonomy, "figure": cmd_figure, "validate": cmd_validate}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = cmd_paths_check if args.command == "paths" else COMMANDS[args.command]
    try:
        return handler(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IntegratorError, NumericalConsistencyError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
