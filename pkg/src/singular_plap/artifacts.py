"""CSV and SVG output.

Numbers are written with 17 significant digits so a profile read back from
CSV is bit-identical to the one written; nothing time-dependent is written.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .problem import ProblemParams
from .radial_ode import RadialProfile, Termination

__all__ = [
    "fmt",
    "write_csv",
    "write_profile_csv",
    "read_profile_csv",
    "write_eigen_csv",
    "read_eigen_lambda",
    "write_shots_csv",
    "write_bifurcation_csv",
    "write_mu_probe_csv",
    "write_eps_path_csv",
    "write_rescaled_csv",
    "svg_plot",
]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], comment: str | None = None):
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(",".join(header))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def write_profile_csv(path, profile: RadialProfile) -> None:
    write_csv(path, ("r", "u", "du"), zip(profile.r, profile.u, profile.du))


def _read_table(path) -> tuple[list[str], np.ndarray, list[str]]:
    text = Path(path).read_text().splitlines()
    comments = [ln[1:].strip() for ln in text if ln.startswith("#")]
    body = [ln for ln in text if ln.strip() and not ln.startswith("#")]
    if not body:
        raise ValueError(f"{path}: empty CSV")
    header = body[0].split(",")
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in body[1:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    return header, data.reshape(-1, len(header)), comments


def read_profile_csv(path, params: ProblemParams | None = None) -> RadialProfile:
    """Read an ``r,u,du`` CSV (``r,phi,dphi`` for eigenfunctions is accepted)."""
    header, data, _ = _read_table(path)
    if header not in (["r", "u", "du"], ["r", "phi", "dphi"]):
        raise ValueError(f"{path}: unexpected header {header}")
    r, u, du = data.T
    term, rc = Termination.REACHED_R, None
    if params is not None and r[-1] < params.radius_R and u[-1] == 0.0:
        term, rc = Termination.HIT_ZERO, float(r[-1])
    return RadialProfile(r=r, u=u, du=du, params=params, terminated=term, r_cross=rc)


def write_eigen_csv(path, eigenpair) -> None:
    ph = eigenpair.phi1
    write_csv(path, ("r", "phi", "dphi"), zip(ph.r, ph.u, ph.du),
              comment=f"lambda1={fmt(eigenpair.lambda1)}")


def read_eigen_lambda(path) -> float:
    _, _, comments = _read_table(path)
    for c in comments:
        if c.startswith("lambda1="):
            return float(c.split("=", 1)[1])
    raise ValueError(f"{path}: no lambda1 comment")


def write_shots_csv(path, grid, misses, terminations) -> None:
    write_csv(path, ("a", "miss", "terminated"), zip(grid, misses, terminations))


def write_bifurcation_csv(path, records) -> None:
    write_csv(path, ("lambda", "branch", "a_star", "sup_norm", "converged", "weak_residual"),
              ((r.param_value, r.branch, r.a_star, r.sup_norm, r.converged, r.weak_residual)
               for r in records))


def write_mu_probe_csv(path, rows) -> None:
    write_csv(path, ("mu", "exists", "k", "lambda1"),
              ((r.mu, r.exists, r.k, r.lambda1) for r in rows))


def write_eps_path_csv(path, path_obj) -> None:
    incs = [math.nan, *path_obj.increments]
    write_csv(path, ("eps", "a_star", "sup_norm", "cauchy_increment"),
              ((e, pr.a, pr.sup_norm, d)
               for e, pr, d in zip(path_obj.eps_values, path_obj.profiles, incs)))


def write_rescaled_csv(path, rescaled) -> None:
    rows = []
    for rp in rescaled:
        rows.extend((rp.H, rp.M, x, v, dv) for x, v, dv in zip(rp.v.r, rp.v.u, rp.v.du))
    write_csv(path, ("H", "M", "x", "v", "dv"), rows)


# --------------------------------------------------------------------------
# minimal SVG line plots

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 36, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def svg_plot(series: Sequence[tuple[Sequence[float], Sequence[float], str]],
             title: str = "", xlabel: str = "", ylabel: str = "",
             logy: bool = False, markers: bool = False) -> str:
    """Render ``(x, y, label)`` series as a standalone SVG document string."""
    pts = []
    for xs, ys, label in series:
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        if logy:
            y = np.where(y > 0, np.log10(np.where(y > 0, y, 1.0)), np.nan)
        ok = np.isfinite(x) & np.isfinite(y)
        pts.append((x[ok], y[ok], label))
    allx = np.concatenate([p[0] for p in pts]) if pts else np.array([0.0])
    ally = np.concatenate([p[1] for p in pts]) if pts else np.array([0.0])
    if allx.size == 0:
        allx, ally = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(v):
        return _ML + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return _MT + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{_MT + ph}" x2="{X:.2f}" y2="{_MT + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{_MT + ph + 18}" font-size="11" '
                   f'text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        Y = sy(t)
        lab = f"1e{t:.2g}" if logy else f"{t:.4g}"
        out.append(f'<line x1="{_ML - 5}" y1="{Y:.2f}" x2="{_ML}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 8}" y="{Y + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{lab}</text>')
    for i, (x, y, label) in enumerate(pts):
        color = _COLORS[i % len(_COLORS)]
        if x.size:
            path = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
            if markers:
                out.extend(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="2.5" fill="{color}"/>'
                           for a, b in zip(x, y))
        if label:
            ly = _MT + 16 + 16 * i
            out.append(f'<line x1="{_ML + pw - 120}" y1="{ly - 4}" x2="{_ML + pw - 100}" '
                       f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{_ML + pw - 95}" y="{ly}" font-size="11">{_esc(label)}</text>')
    out.append(f'<text x="{_W / 2:.1f}" y="22" font-size="14" text-anchor="middle">{_esc(title)}</text>')
    out.append(f'<text x="{_ML + pw / 2:.1f}" y="{_H - 12}" font-size="12" '
               f'text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{_MT + ph / 2:.1f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {_MT + ph / 2:.1f})">{_esc(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
