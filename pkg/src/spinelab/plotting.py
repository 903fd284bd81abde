"""Figure of a spine word: one row per sort, one column per cluster."""
from __future__ import annotations

from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .multiorder import FIN, OMEGA, ColouredMultiOrder  # noqa: E402

REPEAT_SHOWN = 3


def plot_multiorder(M: ColouredMultiOrder, path: str, title: Optional[str] = None) -> str:
    rows = {s: i for i, s in enumerate(M.sorts)}
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * _columns(M) + 2), 0.45 * len(rows) + 1.5))
    x = 0
    for seg in M.word:
        if seg.kind == FIN:
            for ell in seg.letters:
                _column(ax, x, ell, rows, 1.0)
                x += 1
            continue
        xs = list(range(x, x + REPEAT_SHOWN))
        alphas = [1.0, 0.6, 0.3] if seg.kind == OMEGA else [0.3, 0.6, 1.0]
        for xi, a in zip(xs, alphas):
            _column(ax, xi, seg.letter, rows, a)
        dots = xs[-1] + 0.5 if seg.kind == OMEGA else xs[0] - 0.5
        ax.text(dots, -0.8, "...", ha="center")
        ax.axvspan(xs[0] - 0.4, xs[-1] + 0.4, color="0.92", zorder=0)
        x += REPEAT_SHOWN
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels(list(rows))
    ax.set_xticks([])
    ax.set_xlim(-1, max(x, 1))
    ax.set_ylim(-1.2, len(rows) - 0.3)
    ax.set_xlabel("spine order (smaller subgroups to the right)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _columns(M: ColouredMultiOrder) -> int:
    return sum(len(s.letters) if s.kind == FIN else REPEAT_SHOWN for s in M.word)


def _column(ax, x, ell, rows, alpha) -> None:
    ys = sorted(rows[p.sort] for p in ell)
    if len(ys) > 1:
        ax.plot([x, x], [ys[0], ys[-1]], color="0.6", lw=1, alpha=alpha, zorder=1)
    for p in ell:
        filled = "discr" in p.colours
        ax.scatter([x], [rows[p.sort]], s=60, alpha=alpha, zorder=2,
                   facecolors="black" if filled else "white", edgecolors="black")
        q = [c for c in p.colours if c.startswith("Q")]
        if q:
            ax.annotate(q[0], (x, rows[p.sort]), textcoords="offset points", xytext=(5, 5),
                        fontsize=7, alpha=alpha)
