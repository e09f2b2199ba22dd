"""Figure rendering for the CLI report path.

Each CLI command with ``--plot`` writes a PNG next to its CSV.  Rendering is
headless (Agg) and never required for the numeric outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from . import rates  # noqa: E402


def plot_ber(points, config, out_path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    xs = [p.ebn0_db for p in points]
    ax.semilogy(xs, [max(p.ber, 1e-12) for p in points], "o-", label=config.scheme)
    ax.fill_between(xs, [max(p.ci_low, 1e-12) for p in points],
                    [max(p.ci_high, 1e-12) for p in points], alpha=0.25)
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("BER of the relayed XOR")
    ax.set_title(
        f"{config.kind}  delta={config.delta:g}  phi={config.phi:.4g} rad"
    )
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_table3(rows, out_path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    xs = [row["p_db"] for row in rows]
    for scheme in rates.TABLE3_SCHEMES:
        ax.plot(xs, [row[scheme] for row in rows], "o-", label=scheme)
    ax.plot(xs, [row["CUTSET"] for row in rows], "k--", label="cut-set bound")
    ax.set_xlabel("P (dB)")
    ax.set_ylabel("symmetric exchange rate (bits/use)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_table4(rows, out_path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    xs = [row["p_snc_db"] for row in rows]
    for scheme in rates.TABLE4_SCHEMES:
        ax.plot(xs, [row[f"E_{scheme}_db"] for row in rows], "o-", label=scheme)
    ax.set_xlabel("SNC power (dB)")
    ax.set_ylabel("per-node energy (dB)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_locus(rows, out_path) -> None:
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    ax.plot([r["U12"] for r in rows], [r["U21"] for r in rows],
            "r--", label="cut-set locus")
    ax.plot([r["R12_LC"] for r in rows], [r["R21_LC"] for r in rows],
            "b-", label="lattice-coded locus")
    ax.set_xlabel("rate 1 -> 2 (bits/use)")
    ax.set_ylabel("rate 2 -> 1 (bits/use)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_netsched(rows, out_path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.plot(range(len(rows)), [r["lambdaN_over_4"] for r in rows], "o")
    ax.axhline(1.0, color="k", linestyle="--", label="upper bound 4/N")
    ax.set_xlabel("trial")
    ax.set_ylabel("lambda * N / 4")
    ax.set_ylim(bottom=0)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
