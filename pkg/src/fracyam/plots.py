"""Bare SVG line plots of sweep series found in report details."""

import math
import os

# (x key, y key, x label, y label) pairs looked up in report details
SERIES = (
    ("log_eps_ij", "log_integral", "log eps_ij", "log integral"),
    ("eps", "normalized", "eps", "normalized value"),
    ("log_radius", "values", "log(delta/eps)", "integral"),
)


def _series(rep):
    d = rep.details or {}
    for xk, yk, xl, yl in SERIES:
        if xk in d and yk in d and len(d[xk]) == len(d[yk]) > 1:
            return [float(v) for v in d[xk]], [float(v) for v in d[yk]], xl, yl
    rows = d.get("sweep")
    if rows and all("eps" in r and "ratio" in r for r in rows):
        return [math.log(r["eps"]) for r in rows], [r["ratio"] for r in rows], "log eps", "ratio"
    return None


def svg_line(xs, ys, title, xlabel, ylabel, width=480, height=320, pad=48):
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = (width - 2 * pad) / ((x1 - x0) or 1.0)
    sy = (height - 2 * pad) / ((y1 - y0) or 1.0)
    pts = " ".join(f"{pad + (x - x0) * sx:.2f},{height - pad - (y - y0) * sy:.2f}" for x, y in zip(xs, ys))
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n'
            f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="13">{title}</text>\n'
            f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>\n'
            f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>\n'
            f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="11">{xlabel} '
            f'[{x0:.3g}, {x1:.3g}]</text>\n'
            f'<text x="12" y="{height / 2}" font-size="11" transform="rotate(-90 12 {height / 2})" '
            f'text-anchor="middle">{ylabel} [{y0:.3g}, {y1:.3g}]</text>\n'
            f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{pts}"/>\n</svg>\n')


def write_plots(reports, directory):
    """One SVG per report carrying a sweep; returns the written paths."""
    paths = []
    for rep in reports:
        s = _series(rep)
        if s is None:
            continue
        xs, ys, xl, yl = s
        name = "".join(c if c.isalnum() or c in "._-" else "_" for c in rep.check_id) + ".svg"
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg_line(xs, ys, rep.check_id, xl, yl))
        paths.append(path)
    return paths
