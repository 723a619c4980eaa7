"""Figure rendering for the report path.

Whenever a stage emits a delimited table (DET sweep CSV, training log
CSV), a sibling PNG is rendered next to it. Metrics math lives in
`metrics`; this module only draws.
"""

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

FIG_DPI = 120
# Keep PNG output byte-stable across reruns.
_SAVEFIG_KW = {"dpi": FIG_DPI, "metadata": {"Software": None}}


def sibling_png(path: str) -> str:
    return os.path.splitext(path)[0] + ".png"


def write_det_csv(path: str, points) -> None:
    from .dataio import atomic_open

    with atomic_open(path, "w") as handle:
        writer = csv.writer(handle)
        writer.writerow(["threshold", "p_miss", "p_fa"])
        for p in points:
            writer.writerow([f"{p.threshold:.6f}", f"{p.p_miss:.6f}", f"{p.p_fa:.6f}"])


def render_det_curve(points, out_png: str, title: str = "Detection error tradeoff") -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    p_fa = [p.p_fa for p in points]
    p_miss = [p.p_miss for p in points]
    ax.plot(p_fa, p_miss, drawstyle="steps-post", color="tab:blue")
    ax.plot([0, 1], [0, 1], linestyle=":", color="gray", linewidth=0.8)
    ax.set_xlabel("false alarm rate")
    ax.set_ylabel("miss rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, **_SAVEFIG_KW)
    plt.close(fig)


def write_train_log(path: str, history) -> None:
    from .dataio import atomic_open

    with atomic_open(path, "w") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "lr", "margin", "loss", "val_acc"])
        for row in history:
            writer.writerow([
                row["step"],
                f"{row['lr']:.8g}",
                f"{row['margin']:.8g}",
                f"{row['loss']:.8g}",
                "" if row["val_acc"] == "" else f"{row['val_acc']:.6f}",
            ])


def render_train_curves(log_csv: str, out_png: str) -> None:
    steps, lrs, margins, losses = [], [], [], []
    val_steps, val_accs = [], []
    with open(log_csv, "r", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            steps.append(int(row["step"]))
            lrs.append(float(row["lr"]))
            margins.append(float(row["margin"]))
            losses.append(float(row["loss"]))
            if row["val_acc"]:
                val_steps.append(int(row["step"]))
                val_accs.append(float(row["val_acc"]))

    fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
    axes[0, 0].plot(steps, losses, color="tab:blue")
    axes[0, 0].set_ylabel("train loss")
    axes[0, 1].plot(val_steps, val_accs, marker="o", color="tab:green")
    axes[0, 1].set_ylabel("val accuracy")
    axes[1, 0].plot(steps, lrs, color="tab:orange")
    axes[1, 0].set_yscale("log")
    axes[1, 0].set_ylabel("learning rate")
    axes[1, 0].set_xlabel("step")
    axes[1, 1].plot(steps, margins, color="tab:red")
    axes[1, 1].set_ylabel("margin")
    axes[1, 1].set_xlabel("step")
    for ax in axes.flat:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, **_SAVEFIG_KW)
    plt.close(fig)
