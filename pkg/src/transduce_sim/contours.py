"""Dispersion and matching contours in the (delta, omega) plane.

Three level-set families are traced with marching squares:

* ``optical``:   ``omega + delta - Re xi_a = 0``
* ``microwave``: ``omega - Re xi_c = 0``
* ``matching``:  ``4 |xi_ac|^2 - kappa_a kappa_c = 0``

Axes are sinh-spaced around zero so that features separated by many decades
(the spin Rabi splitting near tens of kHz and the optical one near GHz) are
all resolved on one grid. Every sign change along a grid edge is refined by
bisection, and the result is kept only when the condition really vanishes
there. Sign flips through a pole of the real part fail this test and are
dropped. A vertex is also dropped when some class sits within one linewidth of
its own dressed resonance. Such roots hug an absorption line and are not
dispersion branches.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .model import DomainError
from .system import TransducerSystem

FAMILIES = ("optical", "microwave", "matching")
_BISECT_STEPS = 64


@dataclass(frozen=True)
class ContourWindow:
    delta_min: float
    delta_max: float
    omega_min: float
    omega_max: float
    n_delta: int = 800
    n_omega: int = 800
    scale_delta: float | None = None  # sinh knee; None means automatic, 0 means uniform
    scale_omega: float | None = None

    def __post_init__(self):
        if not (self.delta_max > self.delta_min and self.omega_max > self.omega_min):
            raise DomainError("contour window must have max > min on both axes", "window")
        if self.n_delta < 4 or self.n_omega < 4:
            raise DomainError("contour window needs at least 4 nodes per axis", "window")


@dataclass(frozen=True)
class Intersection:
    delta: float
    omega: float
    kind: str  # "origin" or "cross"
    polished: bool
    residual: float


@dataclass(frozen=True)
class ContourSet:
    """Polylines are ``(n, 2)`` arrays of ``(delta, omega)`` vertices."""

    optical_branches: list
    microwave_branches: list
    matching_branches: list
    intersections: list
    window: ContourWindow
    tolerance: float
    rejected: dict = field(default_factory=dict)

    def branches(self, family: str) -> list:
        return {"optical": self.optical_branches, "microwave": self.microwave_branches,
                "matching": self.matching_branches}[family]

    def vertices(self, family: str) -> np.ndarray:
        b = self.branches(family)
        return np.concatenate(b, axis=0) if b else np.zeros((0, 2))


def _axis(lo: float, hi: float, n: int, knee: float) -> np.ndarray:
    # even node counts keep the origin off the grid, which makes sign tests well defined there
    if n % 2:
        n += 1
    if knee <= 0:
        return np.linspace(lo, hi, n)
    return knee * np.sinh(np.linspace(math.asinh(lo / knee), math.asinh(hi / knee), n))


class _Conditions:
    """Evaluates the three conditions, their natural scales and the pole guard."""

    def __init__(self, system: TransducerSystem, n_pump: float):
        self.system = system
        self.n_pump = n_pump
        ka, kc = system.noncenter_losses(n_pump)
        self.kk = ka * kc
        self.guard_classes = None
        if not system.is_gaussian:
            arr = system.classes_at(n_pump)
            self.guard_classes = arr

    def values(self, omega: np.ndarray, delta: np.ndarray):
        xa, xc, xac = self.system.xi_grid(omega, delta, self.n_pump)
        f = np.stack([omega + delta - xa.real, omega - xc.real, 4.0 * np.abs(xac) ** 2 - self.kk])
        s = np.stack([np.abs(omega) + np.abs(delta) + np.abs(xa.real), np.abs(omega) + np.abs(xc.real),
                      4.0 * np.abs(xac) ** 2 + self.kk])
        return f, s

    def guarded(self, omega: np.ndarray, delta: np.ndarray) -> np.ndarray:
        """True where any class is within a linewidth of its dressed resonance."""
        out = np.zeros(omega.shape, dtype=bool)
        arr = self.guard_classes
        if arr is None or omega.size == 0:
            return out
        for k in range(len(arr)):
            if arr.weight[k] == 0:
                continue
            a13 = (omega + delta - arr.delta13[k]) + 0.5j * arr.gamma13[k]
            a12 = (omega - arr.delta12[k]) + 0.5j * arr.gamma12[k]
            den = a13 * a12 - arr.omega_p[k] ** 2
            out |= np.abs(den.real) < np.abs(den.imag)
        return out


def _bisect(cond: _Conditions, fam: int, p0: np.ndarray, p1: np.ndarray, f0: np.ndarray):
    """Vectorised bisection along segments ``p0 -> p1`` (rows are (omega, delta))."""
    lo = np.zeros(p0.shape[0])
    hi = np.ones(p0.shape[0])
    s0 = np.sign(f0)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        pts = p0 + mid[:, None] * (p1 - p0)
        fm, _ = cond.values(pts[:, 0], pts[:, 1])
        same = np.sign(fm[fam]) == s0
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    t = 0.5 * (lo + hi)
    pts = p0 + t[:, None] * (p1 - p0)
    f, s = cond.values(pts[:, 0], pts[:, 1])
    return pts, np.abs(f[fam]), s[fam]


def _segments_for_cell(present: list[int], corner_sign: np.ndarray, center_sign: float) -> list[tuple[int, int]]:
    """Pair the crossing edges of one cell. Edges: 0 bottom, 1 right, 2 top, 3 left."""
    if len(present) == 2:
        return [(present[0], present[1])]
    if len(present) == 4:
        if center_sign == corner_sign[0]:
            return [(0, 1), (2, 3)]
        return [(0, 3), (1, 2)]
    return []


def _link(segments: list[tuple[int, int]], points: dict) -> list[np.ndarray]:
    adj = defaultdict(list)
    for a, b in segments:
        adj[a].append(b)
        adj[b].append(a)
    seen = set()
    lines = []
    starts = sorted(k for k, v in adj.items() if len(v) != 2) + sorted(adj)
    for s in starts:
        if s in seen:
            continue
        path = [s]
        seen.add(s)
        cur, prev = s, None
        while True:
            nxt = [n for n in adj[cur] if n != prev and n not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            seen.add(cur)
            path.append(cur)
        if len(path) >= 2:
            lines.append(np.array([points[k] for k in path]))
    return lines


def _seg_intersect(p, q, r, s):
    """Intersection of segments p-q and r-s in the plane, or None."""
    d1 = q - p
    d2 = s - r
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if den == 0:
        return None
    t = ((r[0] - p[0]) * d2[1] - (r[1] - p[1]) * d2[0]) / den
    u = ((r[0] - p[0]) * d1[1] - (r[1] - p[1]) * d1[0]) / den
    if -1e-9 <= t <= 1 + 1e-9 and -1e-9 <= u <= 1 + 1e-9:
        return p + t * d1
    return None


def trace_contours(system: TransducerSystem, window: ContourWindow, tolerance: float = 1e-8,
                   n_pump: float = 0.0, merge_radius: float = 1e-3, families=FAMILIES) -> ContourSet:
    """Trace the dispersion and matching contours and locate their intersections.

    A vertex is kept when ``|condition| <= tolerance * scale`` with ``scale``
    the sum of magnitudes of the terms in that condition. Intersections of
    optical and microwave branches are polished with a 2D root solve and
    merged within ``merge_radius`` of the window diagonal.
    """
    if not tolerance > 0:
        raise DomainError("tolerance must be > 0", "tolerance")
    ref = system.reference_class
    n_a = system.n_total
    k_d = window.scale_delta if window.scale_delta is not None else 0.02 * math.sqrt(n_a) * ref.g13
    k_w = window.scale_omega if window.scale_omega is not None else 0.02 * math.sqrt(n_a) * ref.g12
    w_ax = _axis(window.omega_min, window.omega_max, window.n_omega, k_w)
    d_ax = _axis(window.delta_min, window.delta_max, window.n_delta, k_d)
    nw, nd = w_ax.shape[0], d_ax.shape[0]
    W, D = np.meshgrid(w_ax, d_ax, indexing="ij")
    cond = _Conditions(system, n_pump)
    F, _ = cond.values(W.ravel(), D.ravel())
    F = F.reshape(3, nw, nd)

    n_wedges = (nw - 1) * nd  # edge (i,j)-(i+1,j)
    out_lines = {}
    out_segments = {}
    edge_points = {}
    rejected = {}
    for fam_name in families:
        fam = FAMILIES.index(fam_name)
        f = F[fam]
        sg = f > 0
        ok = np.isfinite(f)
        # omega-direction edges
        ew = np.argwhere((sg[:-1, :] != sg[1:, :]) & ok[:-1, :] & ok[1:, :])
        ed = np.argwhere((sg[:, :-1] != sg[:, 1:]) & ok[:, :-1] & ok[:, 1:])
        p0 = np.concatenate([np.c_[w_ax[ew[:, 0]], d_ax[ew[:, 1]]], np.c_[w_ax[ed[:, 0]], d_ax[ed[:, 1]]]])
        p1 = np.concatenate([np.c_[w_ax[ew[:, 0] + 1], d_ax[ew[:, 1]]], np.c_[w_ax[ed[:, 0]], d_ax[ed[:, 1] + 1]]])
        f0 = np.concatenate([f[ew[:, 0], ew[:, 1]], f[ed[:, 0], ed[:, 1]]])
        ids = np.concatenate([ew[:, 0] * nd + ew[:, 1], n_wedges + ed[:, 0] * (nd - 1) + ed[:, 1]])
        if ids.size:
            pts, res, scale = _bisect(cond, fam, p0, p1, f0)
            good = res <= tolerance * scale
            n_res = int((~good).sum())
            guard = cond.guarded(pts[:, 0], pts[:, 1]) & good
            good &= ~guard
            rejected[fam_name] = {"residual": n_res, "pole_guard": int(guard.sum())}
        else:
            pts = np.zeros((0, 2))
            good = np.zeros(0, dtype=bool)
            rejected[fam_name] = {"residual": 0, "pole_guard": 0}
        points = {int(k): (float(p[1]), float(p[0])) for k, p, g in zip(ids, pts, good) if g}
        edge_points[fam_name] = points
        # cells touched by accepted edges
        cells = set()
        for k in points:
            if k < n_wedges:
                i, j = divmod(k, nd)
                cells.update({(i, j), (i, j - 1)})
            else:
                i, j = divmod(k - n_wedges, nd - 1)
                cells.update({(i, j), (i - 1, j)})
        segments = []
        seg_by_cell = defaultdict(list)
        for (i, j) in sorted(cells):
            if not (0 <= i < nw - 1 and 0 <= j < nd - 1):
                continue
            edges = (i * nd + j, n_wedges + (i + 1) * (nd - 1) + j, i * nd + j + 1, n_wedges + i * (nd - 1) + j)
            present = [e for e, key in enumerate(edges) if key in points]
            corners = np.array([sg[i, j], sg[i + 1, j], sg[i + 1, j + 1], sg[i, j + 1]])
            center_sign = None
            if len(present) == 4:
                fc, _ = cond.values(np.array([0.5 * (w_ax[i] + w_ax[i + 1])]), np.array([0.5 * (d_ax[j] + d_ax[j + 1])]))
                center_sign = bool(fc[fam][0] > 0)
            for a, b in _segments_for_cell(present, corners, center_sign):
                segments.append((edges[a], edges[b]))
                seg_by_cell[(i, j)].append((points[edges[a]], points[edges[b]]))
        out_lines[fam_name] = _link(segments, points)
        out_segments[fam_name] = seg_by_cell

    inters = []
    if "optical" in families and "microwave" in families:
        inters = _intersections(cond, out_segments["optical"], out_segments["microwave"], w_ax, d_ax,
                                window, tolerance, merge_radius)
    return ContourSet(out_lines.get("optical", []), out_lines.get("microwave", []), out_lines.get("matching", []),
                      inters, window, tolerance, rejected)


def _intersections(cond: _Conditions, seg_o: dict, seg_m: dict, w_ax, d_ax, window: ContourWindow,
                   tolerance: float, merge_radius: float) -> list[Intersection]:
    raw = []
    for cell in sorted(set(seg_o) & set(seg_m)):
        i, j = cell
        hw = w_ax[i + 1] - w_ax[i]
        hd = d_ax[j + 1] - d_ax[j]
        origin = np.array([d_ax[j], w_ax[i]])
        unit = np.array([hd, hw])
        for a0, a1 in seg_o[cell]:
            for b0, b1 in seg_m[cell]:
                p = _seg_intersect((np.array(a0) - origin) / unit, (np.array(a1) - origin) / unit,
                                   (np.array(b0) - origin) / unit, (np.array(b1) - origin) / unit)
                if p is not None:
                    raw.append((cell, origin, unit, p))

    found = []
    for cell, origin, unit, p in raw:
        fc, sc = cond.values(np.array([origin[1], origin[1] + unit[1]]), np.array([origin[0], origin[0] + unit[0]]))
        span = np.maximum(np.abs(fc[:2]).max(axis=1), 1e-300)

        def fun(z):
            d = origin[0] + z[0] * unit[0]
            w = origin[1] + z[1] * unit[1]
            f, _ = cond.values(np.array([w]), np.array([d]))
            return f[:2, 0] / span

        sol = optimize.root(fun, p, method="hybr", options={"xtol": 1e-13})
        z = sol.x if sol.success and np.all(np.abs(sol.x - 0.5) <= 2.5) else p
        d = float(origin[0] + z[0] * unit[0])
        w = float(origin[1] + z[1] * unit[1])
        f, s = cond.values(np.array([w]), np.array([d]))
        # relative to the larger of the term magnitudes and the variation across the cell
        rel = float(np.max(np.abs(f[:2, 0]) / np.maximum(np.maximum(s[:2, 0], span), 1e-300)))
        polished = bool(sol.success and rel <= tolerance)
        if cond.guarded(np.array([w]), np.array([d]))[0]:
            continue
        found.append((d, w, polished, rel))

    span_d = window.delta_max - window.delta_min
    span_w = window.omega_max - window.omega_min
    radius = merge_radius * math.sqrt(2.0)
    merged: list[list] = []
    for d, w, pol, rel in sorted(found, key=lambda t: (not t[2], t[3], t[0], t[1])):
        u = np.array([d / span_d, w / span_w])
        if any(np.hypot(*(u - m[4])) <= radius for m in merged):
            continue
        merged.append([d, w, pol, rel, u])
    out = []
    for d, w, pol, rel, u in sorted(merged, key=lambda m: (m[1], m[0])):
        kind = "origin" if np.hypot(*u) <= radius else "cross"
        out.append(Intersection(d, w, kind, pol, rel))
    return out
