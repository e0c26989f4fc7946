"""Static figures for CLI reports, written as PNG files next to the report."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _num(v):
    if isinstance(v, str):
        return float(v)
    return v


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_quotients(reports, path):
    """Empirical extreme quotients against the lower and upper constants, one panel per bound."""
    ids = sorted({r["bound_id"] for r in reports})
    fig, axes = plt.subplots(1, len(ids), figsize=(4 * len(ids), 3.4), squeeze=False)
    for ax, bid in zip(axes[0], ids):
        rows = sorted((r for r in reports if r["bound_id"] == bid), key=lambda r: r["alpha"])
        a = [r["alpha"] for r in rows]
        for key, style, label in (("upper_const", "k-", "upper constant"), ("lower_const", "k--", "lower constant"),
                                  ("max_quotient", "o", "max quotient"), ("min_quotient", "s", "min quotient")):
            vals = [_num(r.get(key)) for r in rows]
            if any(v is not None for v in vals):
                ax.plot(a, [v if v is not None else float("nan") for v in vals], style, label=label)
        ax.set_xscale("log")
        ax.set_xlabel("alpha")
        ax.set_title(bid)
    axes[0][0].set_ylabel("lhs / rhs")
    axes[0][-1].legend(fontsize=7)
    return _save(fig, path)


def plot_sharpness(results, path):
    labels = [f"{r['bound']} a={r['alpha']:g} {side}" for r in results for side in r["sides"]]
    ratios = [_num(s["ratio"]) for r in results for s in r["sides"].values()]
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(labels) + 2), 3.6))
    ax.bar(range(len(ratios)), ratios, color="tab:blue")
    ax.axhline(0.98, color="k", ls="--", lw=1)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("achieved / target")
    ax.set_ylim(min(0.9, min(ratios, default=1) - 0.02), 1.02)
    return _save(fig, path)


def plot_conjecture(scans, path):
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for alpha in sorted({s["alpha"] for s in scans}):
        rows = sorted((s for s in scans if s["alpha"] == alpha), key=lambda s: abs(complex(*s["a"])))
        mods = [abs(complex(*s["a"])) for s in rows]
        ax.plot(mods, [s["sup_ratio"] for s in rows], "o-", label=f"sup, alpha={alpha:g}")
        ax.plot(mods, [s["inf_ratio"] for s in rows], "s:", label=f"inf, alpha={alpha:g}")
    grid = [i / 100 for i in range(100)]
    ax.plot(grid, [1 + g for g in grid], "k-", lw=1, label="1+|a|")
    ax.plot(grid, [1 / (1 + g) for g in grid], "k--", lw=1, label="1/(1+|a|)")
    ax.set_xlabel("|a|")
    ax.set_ylabel("distortion ratio")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_lambda(lam, path):
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(lam["t_values"], lam["log_lambda2_estimates"], "o-", label="estimate")
    ax.axhline(lam["log_lambda2"], color="k", ls="--", lw=1, label="last value")
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("log lambda2 estimate")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_report(command, body, prefix):
    """Render the figures for one command; returns the written paths."""
    paths = []
    if command in ("verify", "quasi") and body.get("reports"):
        paths.append(plot_quotients(body["reports"], f"{prefix}_quotients.png"))
    elif command == "sharpness" and body.get("sharpness"):
        paths.append(plot_sharpness(body["sharpness"], f"{prefix}_sharpness.png"))
    elif command == "conjecture" and body.get("scans"):
        paths.append(plot_conjecture(body["scans"], f"{prefix}_conjecture.png"))
    elif command == "specfun" and body.get("lambda2"):
        paths.append(plot_lambda(body["lambda2"], f"{prefix}_lambda2.png"))
    return paths
