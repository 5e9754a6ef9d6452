"""Minimal native SVG writer for report plots.

Plots are conveniences; the CSV files are the contract.  Two chart kinds are
needed: estimated-vs-incident scatter and semilog singular-value curves.
"""

import math

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 40, 55
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


class _Canvas:
    def __init__(self, title, xlabel, ylabel, xlim, ylim):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
            f'height="{_H}" viewBox="0 0 {_W} {_H}">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{_esc(title)}</text>',
            f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{_esc(xlabel)}</text>',
            f'<text x="16" y="{_H / 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 16 {_H / 2})">{_esc(ylabel)}</text>',
            f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
            f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>',
        ]
        self.xlim = xlim
        self.ylim = ylim

    def x(self, v):
        x0, x1 = self.xlim
        return _ML + (v - x0) / (x1 - x0) * (_W - _ML - _MR)

    def y(self, v):
        y0, y1 = self.ylim
        return _H - _MB - (v - y0) / (y1 - y0) * (_H - _MT - _MB)

    def xticks(self, values, labels=None):
        labels = labels or [f"{v:g}" for v in values]
        for v, lab in zip(values, labels):
            px = self.x(v)
            self.parts.append(f'<line x1="{px:.1f}" y1="{_H - _MB}" '
                              f'x2="{px:.1f}" y2="{_H - _MB + 5}" stroke="black"/>')
            self.parts.append(f'<text x="{px:.1f}" y="{_H - _MB + 18}" '
                              f'text-anchor="middle" font-family="sans-serif" '
                              f'font-size="11">{_esc(lab)}</text>')

    def yticks(self, values, labels=None):
        labels = labels or [f"{v:g}" for v in values]
        for v, lab in zip(values, labels):
            py = self.y(v)
            self.parts.append(f'<line x1="{_ML - 5}" y1="{py:.1f}" '
                              f'x2="{_ML}" y2="{py:.1f}" stroke="black"/>')
            self.parts.append(f'<text x="{_ML - 8}" y="{py + 4:.1f}" '
                              f'text-anchor="end" font-family="sans-serif" '
                              f'font-size="11">{_esc(lab)}</text>')

    def circle(self, x, y, color, r=3.0):
        self.parts.append(f'<circle cx="{self.x(x):.2f}" cy="{self.y(y):.2f}" '
                          f'r="{r}" fill="{color}" fill-opacity="0.7"/>')

    def polyline(self, xs, ys, color):
        pts = " ".join(f"{self.x(a):.2f},{self.y(b):.2f}" for a, b in zip(xs, ys))
        self.parts.append(f'<polyline points="{pts}" fill="none" '
                          f'stroke="{color}" stroke-width="1.5"/>')

    def line(self, x0, y0, x1, y1, color, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<line x1="{self.x(x0):.2f}" y1="{self.y(y0):.2f}" '
                          f'x2="{self.x(x1):.2f}" y2="{self.y(y1):.2f}" '
                          f'stroke="{color}"{d}/>')

    def legend(self, labels_colors):
        for k, (label, color) in enumerate(labels_colors):
            y = _MT + 16 + 16 * k
            self.parts.append(f'<line x1="{_ML + 10}" y1="{y - 4}" '
                              f'x2="{_ML + 34}" y2="{y - 4}" stroke="{color}" '
                              f'stroke-width="2"/>')
            self.parts.append(f'<text x="{_ML + 40}" y="{y}" '
                              f'font-family="sans-serif" font-size="11">'
                              f'{_esc(label)}</text>')

    def write(self, path):
        self.parts.append("</svg>")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.parts) + "\n")


def scatter_estimated_vs_incident(path, true_deg, est_deg, title):
    """One point per estimation; the diagonal marks perfect recovery."""
    c = _Canvas(title, "incident angle (deg)", "estimated angle (deg)",
                (0.0, 360.0), (0.0, 360.0))
    ticks = [0, 90, 180, 270, 360]
    c.xticks(ticks)
    c.yticks(ticks)
    c.line(0, 0, 360, 360, "#888888", dash="4 3")
    for t, e in zip(true_deg, est_deg):
        c.circle(float(t), float(e), _COLORS[0])
    c.write(path)


def svd_curves(path, labelled_spectra, title="Normalized singular values"):
    """Semilog-y decay curves, one per labelled spectrum."""
    floor = 1e-6
    n = max(len(s) for _, s in labelled_spectra)
    c = _Canvas(title, "index", "normalized value (log10)",
                (0.0, float(n - 1)), (math.log10(floor), 0.0))
    c.xticks([0, n // 4, n // 2, 3 * n // 4, n - 1])
    c.yticks([0, -1, -2, -3, -4, -5, -6],
             ["1", "1e-1", "1e-2", "1e-3", "1e-4", "1e-5", "1e-6"])
    legend = []
    for k, (label, spectrum) in enumerate(labelled_spectra):
        color = _COLORS[k % len(_COLORS)]
        ys = [math.log10(max(float(v), floor)) for v in spectrum]
        c.polyline(list(range(len(ys))), ys, color)
        legend.append((label, color))
    c.legend(legend)
    c.write(path)
