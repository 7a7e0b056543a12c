"""Deterministic SVG and PPM output for point clouds and patches."""
from __future__ import annotations

import json
from typing import Mapping

import numpy as np

from .discrete_geometry import Patch
from .rauzy import PointCloud

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"]


def _color(label: int) -> str:
    return PALETTE[(int(label) - 1) % len(PALETTE)]


def _config_comment(config: Mapping) -> str:
    text = json.dumps(dict(config), sort_keys=True, default=str)
    return "<!-- config " + text.replace("--", "- -") + " -->"


def _frame(points: np.ndarray, size: int, margin: int) -> tuple[np.ndarray, float]:
    lo, hi = points.min(axis=0), points.max(axis=0)
    span = float((hi - lo).max()) or 1.0
    scale = (size - 2 * margin) / span
    xy = (points - lo) * scale + margin
    xy[:, 1] = size - xy[:, 1]  # y axis up
    return xy, scale


def cloud_svg(cloud: PointCloud, config: Mapping, size: int = 800, radius: float = 1.2) -> str:
    """Subtiles coloured by label. One-dimensional clouds are drawn as a
    strip, one row per subtile."""
    pts = cloud.coords
    if pts.shape[1] == 1:
        rows = (cloud.labels - 1).astype(float)[:, None] * 0.05
        pts = np.hstack([pts, rows])
    margin = 20
    xy, _ = _frame(pts, size, margin)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + 40}" '
           f'viewBox="0 0 {size} {size + 40}">', _config_comment(config),
           f'<rect width="{size}" height="{size + 40}" fill="white"/>']
    for lab in sorted(set(cloud.labels.tolist())):
        sel = cloud.labels == lab
        out.append(f'<g fill="{_color(lab)}">')
        out.extend(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{radius}"/>' for x, y in xy[sel])
        out.append("</g>")
    legend = ", ".join(f"{lab}: {_color(lab)}" for lab in sorted(set(cloud.labels.tolist())))
    meta = cloud.meta
    out.append(f'<text x="10" y="{size + 25}" font-size="12" font-family="monospace">'
               f'{meta.get("directive", "")} level={meta.get("level", 0)} N={meta.get("N", "")} '
               f'plane={config.get("plane", "one")}-perp labels {legend}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cloud_ppm(cloud: PointCloud, size: int = 1024) -> bytes:
    """Raster fallback for very large clouds (binary P6)."""
    pts = cloud.coords if cloud.coords.shape[1] > 1 else np.hstack([cloud.coords, np.zeros((len(cloud), 1))])
    xy, _ = _frame(pts, size, 4)
    img = np.full((size, size, 3), 255, np.uint8)
    ij = np.clip(xy.astype(int), 0, size - 1)
    for lab in sorted(set(cloud.labels.tolist())):
        c = _color(lab)
        rgb = [int(c[k:k + 2], 16) for k in (1, 3, 5)]
        sel = cloud.labels == lab
        img[ij[sel, 1], ij[sel, 0]] = rgb
    return f"P6 {size} {size} 255\n".encode() + img.tobytes()


def patch_svg(patch: Patch, config: Mapping, size: int = 800) -> str:
    """Faces drawn as parallelograms under the orthogonal projection onto 1^perp."""
    d = patch.d
    if d != 3:
        raise ValueError("patch rendering is implemented for d = 3")
    basis = np.array([[1, -1, 0], [1, 1, -2]], float)
    basis /= np.linalg.norm(basis, axis=1, keepdims=True)
    polys = []
    for x, i in zip(patch.coords, patch.types):
        free = [j for j in range(3) if j != i - 1]
        e = np.eye(3)
        corners = [x, x + e[free[0]], x + e[free[0]] + e[free[1]], x + e[free[1]]]
        polys.append((int(i), np.array(corners, float) @ basis.T))
    allpts = np.vstack([p for _, p in polys])
    lo = allpts.min(axis=0)
    span = float((allpts.max(axis=0) - lo).max()) or 1.0
    scale = (size - 40) / span
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
           _config_comment(config), f'<rect width="{size}" height="{size}" fill="white"/>']
    for i, p in sorted(polys, key=lambda t: (t[0], tuple(t[1].ravel()))):
        q = (p - lo) * scale + 20
        q[:, 1] = size - q[:, 1]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in q)
        out.append(f'<polygon points="{pts}" fill="{_color(i)}" stroke="black" stroke-width="0.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
