"""Static KL-vs-iteration plots, drawn from trace CSV files"""
import logging

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from utils.io import read_csv

logger = logging.getLogger(__name__)


def plot_kl_trace(csv_path, svg_path, contraction=None, title=None):
    """Log-scale KL(π*|π^{n,n}) and KL(π*|π^{n+1,n}) with an optional geometric envelope

    The envelope starts at the first positive KL(π*|π^{n,n}) value and shrinks by `contraction` per step.
    """
    header, rows = read_csv(csv_path)
    if not rows:
        logger.warning(f"No trace rows in {csv_path}; plot skipped")
        return None
    data = np.array(rows, dtype=float)
    n = data[:, header.index("n")]
    kl_nn = data[:, header.index("kl_plan_nn")]
    kl_n1n = data[:, header.index("kl_plan_n1n")]

    fig, ax = plt.subplots(figsize=(6, 4))
    positive = kl_nn > 0
    ax.semilogy(n[positive], kl_nn[positive], label="KL(π* | π^{n,n})")
    ax.semilogy(n[kl_n1n > 0], kl_n1n[kl_n1n > 0], linestyle="--", label="KL(π* | π^{n+1,n})")
    if contraction is not None and np.any(positive) and 0 < contraction < 1:
        start = np.argmax(positive)
        envelope = kl_nn[start] * contraction ** (n[start:] - n[start])
        ax.semilogy(n[start:], envelope, color="gray", linestyle=":", label=f"envelope {contraction:.3f}^n")
    ax.set_xlabel("iteration n")
    ax.set_ylabel("KL")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    logger.info(f"Plot saved: {svg_path}")
    return svg_path
