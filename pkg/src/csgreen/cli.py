"""Command line harness: matrices, Green's matrices, spectra, states, sweeps.

Usage::

    csgreen <subcommand> --config <path> [--z <re>,<im>] [--out <path>]

Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
3 benchmark mismatch.
"""
import argparse
import io
import logging
import os
import sys
import tempfile

import numpy as np

from . import reference
from .basis import kinetic_matrix, overlap_matrix, power_matrix
from .config import ConfigError, RunConfig, format_config, parse_config
from .errors import CSGreenError
from .mcf import defect_residual, green_matrix, hamiltonian_blocks
from .spectral import eigenstate_eval, find_eigenvalues, residue_at, sweep_b

log = logging.getLogger(__name__)

SUBCOMMANDS = ("matelem", "green", "spectrum", "states", "sweep", "bench-table1")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(x):
    """17 significant digits: enough for an exact binary64 round trip."""
    return f"{float(x):.17g}"


def _header(out, name, cfg, extra=()):
    out.write(f"# csgreen {name}\n")
    if cfg is not None:
        for line in format_config(cfg):
            out.write(f"# {line}\n")
    for key, value in extra:
        out.write(f"# {key} = {value}\n")


def _block_size(cfg):
    return cfg.potential().half_bandwidth


def cmd_matelem(cfg, args, out):
    basis, pot = cfg.basis(), cfg.potential()
    M = cfg.blocks * _block_size(cfg)
    mats = [("S", overlap_matrix(basis, M)), ("T", kinetic_matrix(basis, M))]
    mats += [(f"R{i}", power_matrix(basis, M, i)) for i in sorted(pot.coeffs)]
    _header(out, "matelem", cfg, [("order", M)])
    out.write("matrix,row,col,value\n")
    for name, A in mats:
        w = A.half_bandwidth
        for n in range(M):
            for n2 in range(max(0, n - w), min(M, n + w + 1)):
                out.write(f"{name},{n},{n2},{fmt(A.entry(n, n2))}\n")
    return EXIT_OK


def _parse_z(text):
    if text is None:
        raise UsageError("green requires --z <re>,<im>")
    parts = text.split(",")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad --z value {text!r}") from None
    if len(vals) == 1:
        vals.append(0.0)
    if len(vals) != 2:
        raise UsageError(f"bad --z value {text!r}")
    return complex(*vals)


def cmd_green(cfg, args, out):
    z = _parse_z(args.z)
    blocks = hamiltonian_blocks(cfg.basis(), cfg.potential())
    g = green_matrix(blocks, z, cfg.N, tol=cfg.tol, K_max=cfg.k_max)
    extra = [
        ("z", f"{fmt(z.real)},{fmt(z.imag)}"),
        ("N", g.N),
        ("block_size", g.m),
        ("tail_depth", g.depth),
        ("convergence_estimate", f"{g.estimate:.3e}"),
        ("defect_residual", f"{defect_residual(blocks, g):.3e}"),
        ("asymmetry", f"{g.asymmetry():.3e}"),
    ]
    _header(out, "green", cfg, extra)
    out.write("row,col,re,im\n")
    G = np.asarray(g.values, dtype=complex)
    for p in range(G.shape[0]):
        for q in range(G.shape[1]):
            out.write(f"{p},{q},{fmt(G[p, q].real)},{fmt(G[p, q].imag)}\n")
    return EXIT_OK


def _window(cfg):
    if cfg.window is None:
        raise UsageError("config needs a 'window = lo, hi' entry for this subcommand")
    return cfg.window


def cmd_spectrum(cfg, args, out):
    spec = find_eigenvalues(cfg.basis(), cfg.potential(), _window(cfg), cfg.N, tol=cfg.tol,
                            K_max=cfg.k_max, validate=True)
    extra = [("levels", len(spec)), ("rejected", len(spec.rejected)), ("flagged", len(spec.flagged))]
    _header(out, "spectrum", cfg, extra)
    out.write("index,E,bracket,N,K,validated\n")
    for lv in spec.levels:
        out.write(f"{lv.index},{fmt(lv.E)},{lv.bracket:.3e},{lv.N},{lv.K},{int(lv.validated)}\n")
    for lv in spec.rejected:
        out.write(f"# rejected {lv.index} {fmt(lv.E)}\n")
    for reason, z in spec.flagged:
        out.write(f"# flagged {reason} {fmt(z)}\n")
    return EXIT_OK


def cmd_states(cfg, args, out):
    basis, pot = cfg.basis(), cfg.potential()
    blocks = hamiltonian_blocks(basis, pot)
    spec = find_eigenvalues(basis, pot, _window(cfg), cfg.N, tol=cfg.tol, K_max=cfg.k_max, blocks=blocks)
    states = [residue_at(basis, pot, lv.E, N=cfg.N, spectrum=spec, blocks=blocks) for lv in spec.levels]
    size = cfg.blocks * blocks.m
    r = np.linspace(0.0, 2.0 * size / basis.b, 201)
    extra = [(f"state {lv.index}", f"E={fmt(s.E)} norm_defect={s.norm_defect:.3e} rank_defect={s.rank_defect:.3e}")
             for lv, s in zip(spec.levels, states)]
    _header(out, "states", cfg, extra)
    out.write("# section = coefficients\n")
    out.write("index,n,c\n")
    for lv, s in zip(spec.levels, states):
        for n, c in enumerate(s.coefficients):
            out.write(f"{lv.index},{n},{fmt(c)}\n")
    out.write("# section = wavefunction\n")
    out.write("index,r,psi\n")
    for lv, s in zip(spec.levels, states):
        psi = eigenstate_eval(basis, s, r)
        for ri, v in zip(r, psi):
            out.write(f"{lv.index},{fmt(ri)},{fmt(v)}\n")
    return EXIT_OK


def cmd_sweep(cfg, args, out):
    records = sweep_b(cfg.basis(), cfg.potential(), cfg.sweep_values(), cfg.N, _window(cfg), tol=cfg.tol,
                      K_max=cfg.k_max)
    _header(out, "sweep", cfg, [("records", len(records))])
    out.write("b,index,E\n")
    for b, i, E in records:
        out.write(f"{fmt(b)},{i},{fmt(E)}\n")
    return EXIT_OK


def cmd_bench_table1(cfg, args, out):
    rtol = reference.TABLE1_RTOL
    N = cfg.N if cfg is not None else 3
    _header(out, "bench-table1", None, [("rtol", f"{rtol:g}"), ("N", N)])
    out.write("column,n,reference,computed,rel_err,pass\n")
    passed = total = 0
    for name, (basis, pot, window, ref) in reference.TABLE1.items():
        spec = find_eigenvalues(basis, pot, window, N, count_limit=len(ref))
        got = {lv.index: lv.E for lv in spec.levels}
        for n, E_ref in enumerate(ref):
            E = got.get(n)
            err = abs(E - E_ref) / abs(E_ref) if E is not None else float("inf")
            ok = err <= rtol
            passed += ok
            total += 1
            computed = fmt(E) if E is not None else "nan"
            out.write(f"{name},{n + 1},{E_ref!r},{computed},{err:.3e},{'PASS' if ok else 'FAIL'}\n")
    out.write(f"# summary = {passed}/{total}\n")
    return EXIT_OK if passed == total else EXIT_MISMATCH


COMMANDS = {
    "matelem": cmd_matelem,
    "green": cmd_green,
    "spectrum": cmd_spectrum,
    "states": cmd_states,
    "sweep": cmd_sweep,
    "bench-table1": cmd_bench_table1,
}


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".csgreen-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def build_parser():
    parser = argparse.ArgumentParser(prog="csgreen", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="configuration file (key = value lines)")
    parser.add_argument("--z", help="complex energy for 'green', as re,im")
    parser.add_argument("--out", help="output CSV path (default: config 'out', else stdout)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def run_subcommand(name, cfg: RunConfig, args=None, out_path=None):
    """Run one subcommand; returns ``(exit_code, text)`` and writes ``out_path`` on success."""
    args = args or argparse.Namespace(z=None)
    buf = io.StringIO()
    code = COMMANDS[name](cfg, args, buf)
    text = buf.getvalue()
    if out_path is not None:
        # mismatch reports are still written; numerical failures never reach here
        _write_atomic(out_path, text)
    return code, text


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = None
        if args.config is not None:
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
        elif args.subcommand != "bench-table1":
            raise UsageError(f"{args.subcommand} requires --config")
        out_path = args.out or (cfg.out if cfg is not None else None)
        code, text = run_subcommand(args.subcommand, cfg, args, out_path)
        if out_path is None:
            sys.stdout.write(text)
        return code
    except (UsageError, ConfigError, OSError) as exc:
        print(f"csgreen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CSGreenError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"csgreen: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
