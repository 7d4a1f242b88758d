"""Hand-written SVG line charts for the experiment summary."""

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
          "#bcbd22", "#17becf"]

WIDTH, HEIGHT = 880, 520
LEFT, RIGHT, TOP, BOTTOM = 70, 190, 50, 60


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = np.floor(lo / step) * step
    return [float(v) for v in np.arange(start, hi + step * 0.5, step)]


def line_chart_svg(series, title, x_label, y_label, vlines=(), y_range=None):
    """Render ``{label: (xs, ys)}`` as an SVG document string.

    ``vlines`` are x positions drawn as dashed markers.
    """
    xs_all = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys_all = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    ys_all = ys_all[np.isfinite(ys_all)]
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    if x1 == x0:
        x1 = x0 + 1
    if y_range is None:
        y0, y1 = (float(ys_all.min()), float(ys_all.max())) if ys_all.size else (0.0, 1.0)
        pad = 0.05 * (y1 - y0 or 1.0)
        y0, y1 = y0 - pad, y1 + pad
    else:
        y0, y1 = y_range
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * pw

    def py(y):
        return TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>',
    ]
    for ty in _nice_ticks(y0, y1):
        if y0 <= ty <= y1:
            out.append(f'<line class="grid" x1="{LEFT}" x2="{LEFT + pw}" y1="{py(ty):.1f}" y2="{py(ty):.1f}" '
                       'stroke="#e5e5e5"/>')
            out.append(f'<text x="{LEFT - 6}" y="{py(ty) + 4:.1f}" text-anchor="end">{ty:g}</text>')
    for tx in _nice_ticks(x0, x1, 10):
        if x0 <= tx <= x1:
            out.append(f'<text x="{px(tx):.1f}" y="{TOP + ph + 18}" text-anchor="middle">{tx:g}</text>')
    out.append(f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>')
    for v in vlines:
        if x0 <= v <= x1:
            out.append(f'<line class="marker" x1="{px(v):.1f}" x2="{px(v):.1f}" y1="{TOP}" y2="{TOP + ph}" '
                       'stroke="#888" stroke-dasharray="4,3"/>')
    for k, (label, (xs, ys)) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys) if np.isfinite(y))
        out.append(f'<polyline class="series" data-label="{escape(label)}" fill="none" stroke="{color}" '
                   f'stroke-width="1.8" points="{pts}"/>')
        ly = TOP + 16 + 18 * k
        out.append(f'<line x1="{LEFT + pw + 14}" x2="{LEFT + pw + 38}" y1="{ly}" y2="{ly}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw + 44}" y="{ly + 4}">{escape(label)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 18}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text transform="translate(18,{TOP + ph / 2:.1f}) rotate(-90)" text-anchor="middle">'
               f'{escape(y_label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_summary_plots(result, output_dir):
    """coverage.svg, mse.svg and probabilities.svg (replication 0)."""
    out = Path(output_dir)
    per_step = result.summary["per_step"]
    T = result.config.env.horizon
    ts = np.arange(T)
    shifts = sorted({s.at_step for s in result.config.env.shifts})
    files = {
        "coverage.svg": line_chart_svg({s: (ts, v["coverage"]) for s, v in per_step.items()},
                                       "Mean coverage per step", "t", "mean D_t", shifts,
                                       y_range=(0, result.config.env.n_types)),
        "mse.svg": line_chart_svg({s: (ts, v["mse"]) for s, v in per_step.items()},
                                  "Estimation MSE per step", "t", "mean MSE", shifts),
        "probabilities.svg": line_chart_svg({f"type {i}": (ts, 1.0 - result.trajectory[:, i])
                                             for i in range(result.trajectory.shape[1])},
                                            "Detection probabilities p_i(t), replication 0", "t", "p_i(t)",
                                            shifts),
    }
    paths = []
    for name, text in files.items():
        path = out / name
        path.write_text(text)
        paths.append(path)
    return paths
