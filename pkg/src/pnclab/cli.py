"""Command-line front end.

Subcommands: ``ber``, ``rates``, ``energy``, ``locus``, ``netsched``.  Each
writes CSV to ``--out`` (or a summary to stdout) and, with ``--plot``,
renders a PNG figure next to the CSV.  Exit codes: 0 success, 2 usage error,
3 runtime or decoder structural error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness, rates
from .harness import ExperimentConfig, UsageError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnc-lab",
        description="Two-way relay channel PNC workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ber = sub.add_parser("ber", help="Monte Carlo BER sweep of a relay decoder")
    ber.add_argument("--scheme", default=None,
                     choices=["uncoded", "joint-cnc", "mud-xor", "xor-cd"],
                     help="uncoded BP decoder or one of the coded relay designs")
    ber.add_argument("--delta", type=float, default=None,
                     help="symbol offset in [0, 1)")
    ber.add_argument("--phi", type=str, default=None,
                     help="phase offset in radians; accepts forms like pi/4")
    ber.add_argument("--ebn0", type=str, default=None,
                     help="grid as start:step:stop or a comma list (dB)")
    ber.add_argument("--packets", type=int, default=None)
    ber.add_argument("--bits", type=int, default=None,
                     help="source bits per packet per node")
    ber.add_argument("--max-iter", type=int, default=None)
    ber.add_argument("--seed", type=int, default=None)
    ber.add_argument("--noiseless", action="store_true", default=None)
    ber.add_argument("--config", type=str, default=None,
                     help="key = value file; command-line flags override it")
    ber.add_argument("--out", type=str, default=None)
    ber.add_argument("--plot", action="store_true")

    rates_cmd = sub.add_parser("rates", help="symmetric exchange-rate table")
    rates_cmd.add_argument("--pdb", type=str, default="0,2,4,6,8,10",
                           help="power grid in dB, comma separated")
    rates_cmd.add_argument("--out", type=str, default=None)
    rates_cmd.add_argument("--plot", action="store_true")

    energy = sub.add_parser("energy", help="equal-energy requirement table")
    energy.add_argument("--pdb", type=str, default="0,2,4,6,8,10")
    energy.add_argument("--out", type=str, default=None)
    energy.add_argument("--plot", action="store_true")

    locus = sub.add_parser("locus", help="cut-set and lattice-coded rate loci")
    locus.add_argument("--p1r", type=float, default=4.0)
    locus.add_argument("--p2r", type=float, default=2.0)
    locus.add_argument("--pr1", type=float, default=4.0)
    locus.add_argument("--pr2", type=float, default=2.0)
    locus.add_argument("--steps", type=int, default=1000)
    locus.add_argument("--out", type=str, default=None)
    locus.add_argument("--plot", action="store_true")

    nets = sub.add_parser("netsched", help="1-D flow packing and frame stats")
    nets.add_argument("--nodes", type=int, default=64)
    nets.add_argument("--trials", type=int, default=20)
    nets.add_argument("--seed", type=int, default=1)
    nets.add_argument("--out", type=str, default=None)
    nets.add_argument("--plot", action="store_true")

    return parser


def _maybe_plot(enabled: bool, out: str | None, render) -> None:
    if not enabled:
        return
    if out is None:
        raise UsageError("--plot needs --out to know where the figure goes")
    render(Path(out).with_suffix(".png"))


def _run_ber(args) -> int:
    values = {}
    if args.config:
        values.update(harness.load_config_file(args.config))
    overrides = {
        "scheme": args.scheme, "delta": args.delta, "phi": args.phi,
        "ebn0": args.ebn0, "packets": args.packets, "source_bits": args.bits,
        "max_iter": args.max_iter, "seed": args.seed, "out": args.out,
        "noiseless": args.noiseless,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    scheme = values.get("scheme", "uncoded")
    values["kind"] = "ber-uncoded" if scheme == "uncoded" else "ber-coded"
    config = harness.config_from_values(values)
    points = harness.run_ber_sweep(config)
    if config.out:
        harness.write_ber_csv(config.out, points, config)
    else:
        for p in points:
            print(f"{p.ebn0_db:7.2f} dB  ber={p.ber:.6g}  "
                  f"[{p.ci_low:.3g}, {p.ci_high:.3g}]  ({p.errors}/{p.bits})")

    def render(png):
        from . import plotting
        plotting.plot_ber(points, config, png)

    _maybe_plot(args.plot, config.out, render)
    return 0


def _parse_pdb(text: str) -> list[float]:
    try:
        grid = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"bad power grid {text!r}") from exc
    if not grid:
        raise UsageError("power grid must be nonempty")
    return grid


def _run_rates(args) -> int:
    rows = harness.run_table3(_parse_pdb(args.pdb))
    if args.out:
        harness.write_table3_csv(args.out, rows)
    else:
        for row in rows:
            cells = "  ".join(f"{s}={row[s]:.3f}" for s in rates.TABLE3_SCHEMES)
            print(f"P={row['p_db']:>4} dB  {cells}  bound={row['CUTSET']:.3f}")

    def render(png):
        from . import plotting
        plotting.plot_table3(rows, png)

    _maybe_plot(args.plot, args.out, render)
    return 0


def _run_energy(args) -> int:
    rows = harness.run_table4(_parse_pdb(args.pdb))
    if args.out:
        harness.write_table4_csv(args.out, rows)
    else:
        for row in rows:
            cells = "  ".join(
                f"{s}={row[f'E_{s}_db']:.3f}" for s in rates.TABLE4_SCHEMES
            )
            print(f"P_SNC={row['p_snc_db']:>4} dB  R={row['rate']:.4f}  {cells}")

    def render(png):
        from . import plotting
        plotting.plot_table4(rows, png)

    _maybe_plot(args.plot, args.out, render)
    return 0


def _run_locus(args) -> int:
    caps = rates.LinkCapacities(args.p1r, args.p2r, args.pr1, args.pr2)
    rows = harness.run_locus(caps, args.steps)
    if args.out:
        harness.write_locus_csv(args.out, rows)
    else:
        worst = max(r["U12"] - r["R12_LC"] for r in rows)
        print(f"{len(rows)} samples; max uplink-side gap U12-R12 = {worst:.6f}")

    def render(png):
        from . import plotting
        plotting.plot_locus(rows, png)

    _maybe_plot(args.plot, args.out, render)
    return 0


def _run_netsched(args) -> int:
    if args.nodes < 4 or args.nodes % 2:
        raise UsageError("--nodes must be an even number of at least 4")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rows = harness.run_netsched(args.nodes, args.trials, args.seed)
    if args.out:
        harness.write_netsched_csv(args.out, rows, args.seed)
    else:
        mean = sum(r["lambdaN_over_4"] for r in rows) / len(rows)
        print(f"N={args.nodes} trials={args.trials} "
              f"mean lambda*N/4 = {mean:.4f}")

    def render(png):
        from . import plotting
        plotting.plot_netsched(rows, png)

    _maybe_plot(args.plot, args.out, render)
    return 0


_RUNNERS = {
    "ber": _run_ber,
    "rates": _run_rates,
    "energy": _run_energy,
    "locus": _run_locus,
    "netsched": _run_netsched,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _RUNNERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # decoder/structural failures -> exit 3
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
