"""Command-line front end.

Exit codes: 0 success, 1 infeasible allocation or failed check, 2 usage or
input error. Every random draw derives from ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path

from . import kernels
from .beamforming import DEFAULT_T, BeamParams, alignment_fraction, alignment_fraction_exact
from .channel import DEFAULT_HI, DEFAULT_LO, ChannelConfig, rng_for, sample_channel, validate
from .cof import gram_matrix
from .lattice_lab import (
    LatticeChain1D,
    crypto_uniformity_test,
    decomposition_residual,
    quantization_entropy_check,
)
from .oracles import corrupted_gram, run_oracle_checks
from .power import DEFAULT_DELTA, AllocationGrid, Infeasible, default_allocation, grid_search
from .secure import log_grid, sdof_sweep, sum_secure_rate_objective, secure_rate_report

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(obj, path: str | None) -> None:
    with _output(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _channel(args) -> ChannelConfig:
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file not found: {path}")
        try:
            config = ChannelConfig.load(path)
        except (ValueError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot parse {path}: {exc}") from None
        if args.P is not None:
            config = config.with_power(args.P)
    else:
        config = sample_channel(args.K, args.seed, args.lo, args.hi, P=args.P or 1e6)
    res = validate(config)
    if not res.ok:
        raise UsageError("invalid channel: " + "; ".join(res.violations))
    return config


def _add_channel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="channel JSON {K, h, G, P}; sampled from --seed when omitted")
    p.add_argument("--K", type=int, default=3, help="receivers when sampling (default 3)")
    p.add_argument("--lo", type=float, default=DEFAULT_LO)
    p.add_argument("--hi", type=float, default=DEFAULT_HI)
    p.add_argument("--P", type=float, default=None, help="override the power budget")
    p.add_argument("--T", type=int, default=DEFAULT_T, help="exponent range of the beam-forming monomials")
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="own-helper jamming margin")


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pmin", type=float, default=1e4)
    p.add_argument("--pmax", type=float, default=1e12)
    p.add_argument("--points", type=int, default=9)


def cmd_rates(args) -> int:
    config = _channel(args)
    params = BeamParams(config.K, args.T)
    if args.grid_file:
        grid = AllocationGrid.load(args.grid_file, config.K)
        alloc = grid_search(config, params, sum_secure_rate_objective(config), grid)
    else:
        alloc = default_allocation(config, params, args.delta)
    report = secure_rate_report(config, alloc)
    out = {
        "config": config.to_dict(),
        "T": args.T,
        "M": params.M,
        "allocation": {
            "messageTotals": alloc.message_totals.tolist(),
            "jammingTotals": alloc.jamming_totals.tolist(),
            "mPrime": alloc.m_prime.tolist(),
        },
        "report": report.to_dict(include_cof=args.dump_cof),
    }
    if args.dump_alloc:
        out["allocation"].update(alloc.to_dict())
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _channel(args)
    params = BeamParams(config.K, args.T)
    sweep = sdof_sweep(config, params, args.delta, log_grid(args.pmin, args.pmax, args.points))
    header = ["P"] + [f"R_{i + 1}" for i in range(config.K)] + ["sumRate", "halfLog2_1pP", "ratio"]
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for pt in sweep.points:
            w.writerow(
                [repr(pt.P)] + [repr(float(r)) for r in pt.report.R]
                + [repr(pt.report.sum_rate), repr(pt.benchmark), repr(pt.ratio)]
            )
    for P, why in sweep.dropped:
        print(f"dropped P={P:g}: {why}", file=sys.stderr)
    return EXIT_OK if sweep.points else EXIT_INFEASIBLE


def _sdof_one(config: ChannelConfig, args) -> dict:
    params = BeamParams(config.K, args.T)
    sweep = sdof_sweep(config, params, args.delta, log_grid(args.pmin, args.pmax, args.points))
    d: dict = {
        "points": [
            {"P": pt.P, "log10P": math.log10(pt.P), "sumRate": pt.report.sum_rate, "ratio": pt.ratio}
            for pt in sweep.points
        ],
        "dropped": [{"P": P, "reason": why} for P, why in sweep.dropped],
    }
    if len(sweep.points) >= 2:
        slope, intercept, resid = sweep.fit()
        d.update(slope=slope, intercept=intercept, maxResidual=resid)
    else:
        d.update(slope=None, intercept=None, maxResidual=None)
    return d


def cmd_sdof(args) -> int:
    if args.seeds:
        runs = []
        for s in _parse_seeds(args.seeds):
            args.seed = s
            config = _channel(args)
            runs.append({"seed": s, **_sdof_one(config, args)})
        out = {"runs": runs, "slopes": [r["slope"] for r in runs]}
    else:
        out = {"seed": args.seed, **_sdof_one(_channel(args), args)}
    _emit_json(out, args.out)
    return EXIT_OK


def _parse_seeds(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def cmd_align_stats(args) -> int:
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["T", "K", "fraction_exact", "fraction_enumerated"])
        for K in args.K:
            for T in range(args.t_min, args.t_max + 1):
                params = BeamParams(K, T)
                w.writerow([T, K, repr(alignment_fraction_exact(T)), repr(alignment_fraction(0, 1, params))])
    return EXIT_OK


def cmd_lab(args) -> int:
    if args.test == "crypto":
        chain = LatticeChain1D(args.q, args.fine)
        res = crypto_uniformity_test(chain, args.t, args.samples, args.seed)
        out = {"test": "crypto", "q": args.q, "fine": args.fine, "samples": args.samples,
               "seed": args.seed, **res.to_dict()}
        code = EXIT_OK if res.passed else EXIT_INFEASIBLE
    elif args.test == "entropy":
        powers = [float(x) for x in args.powers.split(",")]
        jam = args.jam_cell if args.jam_cell is not None else min(powers)
        ent, bound = quantization_entropy_check(powers, jam, args.samples, args.seed)
        out = {"test": "entropy", "powers": powers, "jamCellPower": jam, "samples": args.samples,
               "seed": args.seed, "empiricalEntropy": ent, "bound": bound, "passed": ent <= bound}
        code = EXIT_OK if ent <= bound else EXIT_INFEASIBLE
    else:
        chain = LatticeChain1D(args.q, args.fine)
        v = rng_for(args.seed, "lab").uniform(-1e3, 1e3, size=args.samples)
        worst = float(abs(decomposition_residual(v, chain)).max())
        ok = worst <= 1e-9 * 1e3
        out = {"test": "decomp", "q": args.q, "samples": args.samples, "seed": args.seed,
               "maxResidual": worst, "passed": ok}
        code = EXIT_OK if ok else EXIT_INFEASIBLE
    _emit_json(out, args.out)
    return code


def cmd_oracle_check(args) -> int:
    gram = corrupted_gram if args.negative_control else gram_matrix
    results = run_oracle_checks(quick=args.quick, gram=gram)
    buf = io.StringIO()
    print(f"kernel backend: {kernels.BACKEND}", file=buf)
    for r in results:
        print(r.line(), file=buf)
    with _output(args.out) as fh:
        fh.write(buf.getvalue())
    return EXIT_OK if all(r.ok for r in results) else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cofsec", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="master seed for all random streams")
    parser.add_argument("--out", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)

    p = sub.add_parser("rates", parents=[common], help="secure-rate report for one channel")
    _add_channel_args(p)
    p.add_argument("--grid-file", help="JSON power grid {deltas, shares | share_steps}")
    p.add_argument("--dump-cof", action="store_true", help="include per-receiver A, sigma2, R_comb, decodeOrder")
    p.add_argument("--dump-alloc", action="store_true", help="include the full power matrices")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("sweep", parents=[common], help="CSV of secure rates along a power grid")
    _add_channel_args(p)
    _add_grid_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sdof", parents=[common], help="fitted slope of sum rate against 1/2 log2(1+P)")
    _add_channel_args(p)
    _add_grid_args(p)
    p.add_argument("--seeds", help="several channel seeds, e.g. 1-20 or 1,4,7")
    p.set_defaults(func=cmd_sdof)

    p = sub.add_parser("align-stats", parents=[common], help="alignment fractions by enumeration")
    p.add_argument("--K", type=int, nargs="+", default=[3])
    p.add_argument("--t-min", type=int, default=2)
    p.add_argument("--t-max", type=int, default=8)
    p.set_defaults(func=cmd_align_stats)

    p = sub.add_parser("lab", parents=[common], help="scalar nested-lattice experiments")
    p.add_argument("--test", choices=["crypto", "entropy", "decomp"], required=True)
    p.add_argument("--q", type=float, default=8.0, help="coarse lattice spacing")
    p.add_argument("--fine", type=float, default=1.0, help="fine lattice spacing")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--t", type=float, default=0.0, help="fixed codeword for the crypto test")
    p.add_argument("--powers", default="1,1,1,1", help="component powers for the entropy test")
    p.add_argument("--jam-cell", type=float, default=None, help="coarse cell second moment (default min power)")
    p.set_defaults(func=cmd_lab)

    p = sub.add_parser("oracle-check", parents=[common], help="compare the engine with independent oracles")
    p.add_argument("--quick", action="store_true", help="one tenth of the trials")
    p.add_argument("--negative-control", action="store_true", help="run the LLL check on a corrupted Gram")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, ValueError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
