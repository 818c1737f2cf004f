"""PNG figures from a report's sweep data (matplotlib, non-interactive)."""

from __future__ import annotations

import os


def _series(sweep, key):
    pts = [(d["n"], d[key], d.get("trace_level")) for d in sweep if "n" in d and key in d]
    return pts


def _semilogy(ax, pts, label):
    pts = [(n, max(float(v), 1e-300)) for n, v, _ in pts]
    if pts:
        x, y = zip(*pts)
        ax.loglog(x, y, "o-", label=label)


def render(report, directory):
    """Write one figure per sweep quantity into ``directory``; returns paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(directory, exist_ok=True)
    written = []
    keys = [("rel_gap", "relative gap"), ("szego_gap", "|D_n - limit|"), ("sup_gap", "sup-norm kernel gap"),
            ("trace_gap", "trace gap")]
    for key, ylabel in keys:
        pts = _series(report.sweep, key)
        if not pts:
            continue
        fig, ax = plt.subplots(figsize=(5, 3.5))
        if key == "trace_gap":
            for l in sorted({p[2] for p in pts}):
                _semilogy(ax, [p for p in pts if p[2] == l], f"l = {l}")
            ax.legend(frameon=False)
        else:
            _semilogy(ax, pts, key)
        ax.set_xlabel("n")
        ax.set_ylabel(ylabel)
        ax.set_title(report.identity)
        fig.tight_layout()
        path = os.path.join(directory, f"{report.identity}_{key}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    # route values against n
    routes = {}
    for r in report.routes:
        if r.n is not None:
            routes.setdefault(r.name, []).append((r.n, complex(r.value).real))
    if routes:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for name, pts in sorted(routes.items()):
            x, y = zip(*sorted(pts))
            ax.plot(x, y, ".-", label=name)
        ax.set_xlabel("n")
        ax.set_ylabel("Re value")
        ax.set_title(report.identity)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        path = os.path.join(directory, f"{report.identity}_routes.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
