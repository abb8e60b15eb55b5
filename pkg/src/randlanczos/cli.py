"""Command line interface.

Subcommands: ``lanczos run``, ``stieltjes``, ``equidist certify|falsify``,
``bounds eval <name>``, ``experiment <kind>``.  Exit codes: 0 success,
1 usage error, 2 numerical failure (breakdown where forbidden, transfer
exhaustion).  Every randomized run prints the resolved seed.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import secrets
import sys

import numpy as np

from . import bounds as bounds_mod
from . import experiments
from .equidist import TransferExhaustedError, cluster_cert, falsify, kol_transfer, potential_cert
from .lanczos import lanczos_run, read_operator
from .measures import ContinuousRef, Spectrum, read_measure
from .orthopoly import stieltjes, write_jacobi_csv
from .randomness import derive_rng, sample_sphere

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; the CLI contract wants 1
        raise UsageError(message)


def _resolve_seed(seed) -> int:
    if seed is None:
        seed = secrets.randbits(64)
    seed = int(seed) & ((1 << 64) - 1)
    print(f"seed: {seed}")
    return seed


def _parse_ref(text: str) -> ContinuousRef:
    """uniform:a,b or semicircle:center,radius"""
    try:
        kind, params = text.split(":", 1)
        vals = [float(x) for x in params.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad reference spec {text!r}: {exc}") from exc
    if kind == "uniform" and len(vals) == 2:
        return ContinuousRef.uniform(*vals)
    if kind == "semicircle" and len(vals) == 2:
        return ContinuousRef.semicircle(*vals)
    raise UsageError(f"bad reference spec {text!r}")


def build_parser() -> _Parser:
    p = _Parser(prog="randlanczos", description=__doc__)
    sub = p.add_subparsers(dest="command")

    lan = sub.add_parser("lanczos", help="Lanczos iteration on an operator file")
    lan_sub = lan.add_subparsers(dest="subcommand")
    lan_run = lan_sub.add_parser("run")
    lan_run.add_argument("--operator", required=True, help="operator file (diag/dense text format)")
    lan_run.add_argument("--k", type=int, required=True)
    lan_run.add_argument("--reorth", choices=["full", "none"], default="full")
    lan_run.add_argument("--seed", type=int, default=None)
    lan_run.add_argument("--allow-breakdown", action="store_true")
    lan_run.add_argument("--out", default=None, help="write Jacobi CSV here instead of stdout")

    sti = sub.add_parser("stieltjes", help="Jacobi coefficients of a measure file")
    sti.add_argument("--measure", required=True)
    sti.add_argument("--k", type=int, required=True)
    sti.add_argument("--allow-breakdown", action="store_true")
    sti.add_argument("--out", default=None)

    eq = sub.add_parser("equidist", help="certify or falsify equidistribution")
    eq_sub = eq.add_subparsers(dest="subcommand")
    eq_cert = eq_sub.add_parser("certify")
    eq_cert.add_argument("--ref", help="uniform:a,b or semicircle:center,radius")
    eq_cert.add_argument("--spectrum", help="operator/measure file with the spectrum atoms")
    eq_cert.add_argument("--gap-threshold", type=float, default=None, help="cluster certificates")
    eq_cert.add_argument("--transfer-j", type=int, default=None)
    eq_cert.add_argument("--transfer-kol", type=float, default=None)
    eq_fals = eq_sub.add_parser("falsify")
    eq_fals.add_argument("--spectrum", required=True)
    eq_fals.add_argument("--omega", type=float, required=True)
    eq_fals.add_argument("--j", type=int, required=True)
    eq_fals.add_argument("--budget", type=int, default=20000)
    eq_fals.add_argument("--seed", type=int, default=None)

    bnd = sub.add_parser("bounds", help="evaluate a closed-form bound")
    bnd_sub = bnd.add_subparsers(dest="subcommand")
    bnd_eval = bnd_sub.add_parser("eval")
    bnd_eval.add_argument("name", choices=sorted(bounds_mod.EVALUATORS))
    for pname in sorted({p for _, params in bounds_mod.EVALUATORS.values() for p in params}):
        bnd_eval.add_argument(f"--{pname}", type=float, default=None)

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    exp.add_argument("kind", choices=sorted(experiments.KINDS))
    exp.add_argument("--config", required=True)
    exp.add_argument("--out", default=None)
    exp.add_argument("--seed", type=int, default=None)
    exp.add_argument("--svg", action="store_true")
    exp.add_argument("--threads", type=int, default=0, help="0 = auto")

    return p


def _cmd_lanczos(args) -> int:
    op = read_operator(args.operator)
    seed = _resolve_seed(args.seed)
    u = sample_sphere(op.n, derive_rng(seed, 0, "u"))
    out = lanczos_run(op, u, args.k, reorth=args.reorth)
    if out.jacobi.k < args.k and not args.allow_breakdown:
        print(
            f"error: breakdown at step {out.breakdown_at} (Krylov dimension {out.jacobi.k} < k={args.k}); "
            "pass --allow-breakdown to accept the truncated output",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    buf = io.StringIO()
    write_jacobi_csv(out.jacobi, buf)
    _emit(buf.getvalue(), args.out)
    print("ritz: " + " ".join(repr(float(x)) for x in out.ritz_values))
    return EXIT_OK


def _cmd_stieltjes(args) -> int:
    m = read_measure(args.measure)
    jac = stieltjes(m, args.k)
    if jac.k < args.k and not args.allow_breakdown:
        print(
            f"error: breakdown after {jac.k} coefficients (measure has {m.natoms} atoms); "
            "pass --allow-breakdown to accept the truncated output",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    buf = io.StringIO()
    write_jacobi_csv(jac, buf)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _read_spectrum_file(path) -> Spectrum:
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.read(16)
    if head.startswith(("diag", "dense")):
        op = read_operator(path)
        if op.kind == "diagonal":
            return Spectrum(op.diag)
        return Spectrum(np.linalg.eigvalsh(op.matrix))
    return Spectrum(read_measure(path).support)


def _cmd_equidist(args) -> int:
    if args.subcommand == "certify":
        if args.ref:
            cert = potential_cert(_parse_ref(args.ref))
            if args.transfer_j is not None:
                kol = args.transfer_kol if args.transfer_kol is not None else 0.0
                cert = kol_transfer(cert, args.transfer_j, kol)
            records = [cert]
        elif args.spectrum:
            if args.gap_threshold is None:
                raise UsageError("spectrum certification needs --gap-threshold")
            spec = _read_spectrum_file(args.spectrum)
            records = cluster_cert(spec, args.gap_threshold)
        else:
            raise UsageError("certify needs --ref or --spectrum")
        for cert in records:
            print(
                json.dumps(
                    {
                        "delta": cert.delta,
                        "omega": cert.omega,
                        "j": cert.j,
                        "method": cert.method,
                        "detail": cert.detail,
                    },
                    sort_keys=True,
                )
            )
        return EXIT_OK
    if args.subcommand == "falsify":
        spec = _read_spectrum_file(args.spectrum)
        seed = _resolve_seed(args.seed)
        t, frac = falsify(spec, args.omega, args.j, budget=args.budget, seed=seed)
        print("t_index,t_value")
        if t is not None:
            for i, tv in enumerate(t):
                print(f"{i},{float(tv)!r}")
        print(f"fraction,{frac!r}")
        return EXIT_OK
    raise UsageError("equidist needs a subcommand: certify or falsify")


def _cmd_bounds(args) -> int:
    if args.subcommand != "eval":
        raise UsageError("bounds needs the 'eval' subcommand")
    fn, params = bounds_mod.EVALUATORS[args.name]
    kwargs = {}
    for pname in params:
        val = getattr(args, pname, None)
        if val is None:
            raise UsageError(f"bounds eval {args.name} requires --{pname}")
        if pname in ("i", "k", "j", "m"):
            val = int(val)
        kwargs[pname] = val
    result = fn(**kwargs)
    if isinstance(result, bounds_mod.BoundResult):
        print(json.dumps(result.as_dict(), sort_keys=True))
    else:
        print(json.dumps({"value": result}, sort_keys=True))
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = experiments.ExperimentConfig.from_json(args.config)
    if cfg.kind != args.kind:
        raise UsageError(f"config kind {cfg.kind!r} does not match subcommand {args.kind!r}")
    if args.seed is not None:
        cfg.master_seed = _resolve_seed(args.seed)
    else:
        _resolve_seed(cfg.master_seed)
    if args.out:
        cfg.out_dir = args.out
    threads = args.threads
    if threads == 0:
        threads = min(4, max(1, (os.cpu_count() or 1)))
    cfg.threads = threads
    summary = experiments.run(cfg)
    if cfg.out_dir:
        written = experiments.persist(summary, cfg.out_dir, svg=args.svg)
        print(f"wrote {written['runs']} and {written['summary']}")
    else:
        print(json.dumps(summary.to_json_dict(), sort_keys=True, indent=2))
    return EXIT_OK


def _emit(text: str, out_path) -> None:
    if out_path:
        experiments._atomic_write(out_path, text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage()
            return EXIT_USAGE
        if args.command == "lanczos":
            if getattr(args, "subcommand", None) != "run":
                raise UsageError("lanczos needs the 'run' subcommand")
            return _cmd_lanczos(args)
        if args.command == "stieltjes":
            return _cmd_stieltjes(args)
        if args.command == "equidist":
            return _cmd_equidist(args)
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TransferExhaustedError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
