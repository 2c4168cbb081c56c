"""Dependency-free SVG figures: loss histograms and Bloch-sphere heatmaps."""

from __future__ import annotations

import numpy as np


def _svg_header(width: int, height: int) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def freedman_diaconis_bins(samples: np.ndarray) -> int:
    q75, q25 = np.percentile(samples, [75, 25])
    iqr = q75 - q25
    if iqr <= 0:
        return 20
    width = 2.0 * iqr / samples.size ** (1.0 / 3.0)
    span = samples.max() - samples.min()
    return max(5, min(200, int(np.ceil(span / width))))


def loss_histogram_svg(losses: np.ndarray, theory_samples: np.ndarray | None = None,
                       bins: int | None = None, title: str = "",
                       width: int = 640, height: int = 420) -> str:
    """Density histogram of fidelity losses with an optional theory curve."""
    losses = np.asarray(losses, dtype=float)
    bins = freedman_diaconis_bins(losses) if bins is None else bins
    lo = 0.0
    hi = float(losses.max()) * 1.05 if losses.max() > 0 else 1.0
    if theory_samples is not None:
        hi = max(hi, float(np.percentile(theory_samples, 99.5)))
    hist, edges = np.histogram(losses, bins=bins, range=(lo, hi), density=True)

    margin = 50
    pw, ph = width - 2 * margin, height - 2 * margin
    ymax = hist.max() * 1.1 if hist.max() > 0 else 1.0
    if theory_samples is not None:
        th_hist, th_edges = np.histogram(theory_samples, bins=max(bins, 60),
                                         range=(lo, hi), density=True)
        ymax = max(ymax, th_hist.max() * 1.1)

    def x_px(x):
        return margin + (x - lo) / (hi - lo) * pw

    def y_px(y):
        return height - margin - y / ymax * ph

    parts = _svg_header(width, height)
    for h, e0, e1 in zip(hist, edges[:-1], edges[1:]):
        if h <= 0:
            continue
        parts.append(
            f'<rect x="{x_px(e0):.2f}" y="{y_px(h):.2f}" '
            f'width="{x_px(e1) - x_px(e0):.2f}" '
            f'height="{y_px(0) - y_px(h):.2f}" '
            'fill="#7f9fc4" stroke="#44618a" stroke-width="0.5"/>'
        )
    if theory_samples is not None:
        centers = 0.5 * (th_edges[:-1] + th_edges[1:])
        pts = " ".join(f"{x_px(x):.2f},{y_px(y):.2f}"
                       for x, y in zip(centers, th_hist))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     'stroke="#2a7d2a" stroke-width="2"/>')
    parts.append(
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>'
    )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = lo + frac * (hi - lo)
        parts.append(
            f'<text x="{x_px(x):.1f}" y="{height - margin + 18}" '
            f'font-size="11" text-anchor="middle">{x:.2e}</text>'
        )
    parts.append(
        f'<text x="{width / 2}" y="{height - 8}" font-size="12" '
        'text-anchor="middle">fidelity loss 1 - F</text>'
    )
    if title:
        parts.append(f'<text x="{width / 2}" y="22" font-size="14" '
                     f'text-anchor="middle">{title}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def _heat_color(frac: float) -> str:
    """Blue (low) to red (high) through white."""
    frac = min(1.0, max(0.0, frac))
    if frac < 0.5:
        t = frac / 0.5
        r, g, b = int(40 + t * 215), int(70 + t * 185), 255
    else:
        t = (frac - 0.5) / 0.5
        r, g, b = 255, int(255 - t * 185), int(255 - t * 215)
    return f"rgb({r},{g},{b})"


def bloch_heatmap_svg(points: np.ndarray, title: str = "",
                      width: int = 720, height: int = 420) -> str:
    """Rectangular (phi, theta) heatmap of the scaled loss L."""
    points = np.asarray(points, dtype=float)
    thetas = np.unique(points[:, 0])
    l_min, l_max = points[:, 2].min(), points[:, 2].max()
    span = l_max - l_min if l_max > l_min else 1.0

    margin = 50
    pw, ph = width - 2 * margin, height - 2 * margin
    dth = np.pi / max(1, thetas.size - 1)

    parts = _svg_header(width, height)
    for theta, phi, l in points:
        at_pole = theta < 1e-12 or abs(theta - np.pi) < 1e-12
        dphi = 2 * np.pi if at_pole else _phi_step(points, theta)
        x = margin + (phi / (2 * np.pi)) * pw
        y = margin + (theta / np.pi) * ph - 0.5 * (dth / np.pi) * ph
        w = (dphi / (2 * np.pi)) * pw
        h = (dth / np.pi) * ph
        color = _heat_color((l - l_min) / span)
        parts.append(
            f'<rect x="{x:.2f}" y="{max(y, margin):.2f}" width="{w:.2f}" '
            f'height="{h:.2f}" fill="{color}"/>'
        )
    parts.append(
        f'<text x="{width / 2}" y="{height - 10}" font-size="12" '
        'text-anchor="middle">phi (0 to 2pi), theta top-to-bottom '
        f'(0 to pi); L in [{l_min:.3g}, {l_max:.3g}]</text>'
    )
    if title:
        parts.append(f'<text x="{width / 2}" y="22" font-size="14" '
                     f'text-anchor="middle">{title}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def _phi_step(points: np.ndarray, theta: float) -> float:
    ring = points[np.abs(points[:, 0] - theta) < 1e-12]
    if ring.shape[0] < 2:
        return 2 * np.pi
    return 2 * np.pi / ring.shape[0]
