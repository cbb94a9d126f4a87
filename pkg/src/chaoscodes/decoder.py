"""Exact maximum-likelihood decoding of the chaotic analog codes.

Each code is piecewise affine in the source: fixing the branch signs of
every component map makes the codeword ``gain @ u + offset`` on a convex
region of the source box. The decoder maximizes the Gaussian likelihood
on every region (a small constrained least-squares problem) and keeps
the best.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelObservation
from .codes import CodeSpec, Family, encode_batch
from .maps import tent_inverse

_FEAS_TOL = 1e-12


@dataclass(frozen=True)
class AffineSegment:
    """Codeword = ``gain @ u + offset`` wherever every ``a @ u + c >= 0`` holds."""

    gain: np.ndarray
    offset: np.ndarray
    constraints: tuple[tuple[tuple[float, ...], float], ...]
    signs: tuple[tuple[int, ...], ...]
    # k=1: (lo, hi) interval; k=2: polygon vertices in order. None when empty.
    region: object = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return self.gain.shape[1]

    @property
    def empty(self) -> bool:
        return self.region is None

    @property
    def degenerate(self) -> bool:
        return np.linalg.matrix_rank(self.gain) < self.k

    def contains(self, u, tol: float = _FEAS_TOL) -> bool:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(np.abs(u) > 1.0 + tol):
            return False
        return all(np.dot(a, u) + c >= -tol for a, c in self.constraints)


def _interval(constraints) -> tuple[float, float] | None:
    lo, hi = -1.0, 1.0
    for (a,), c in constraints:
        if a > 0:
            lo = max(lo, -c / a)
        elif a < 0:
            hi = min(hi, -c / a)
        elif c < 0:
            return None
    # + 0.0 folds -0.0 into 0.0
    return (lo + 0.0, hi + 0.0) if lo <= hi else None


def _polygon(constraints) -> np.ndarray | None:
    """Clip the square ``[-1, 1]^2`` by each half-plane (Sutherland-Hodgman)."""
    poly = [np.array(p, dtype=float) for p in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
    for a, c in constraints:
        a = np.asarray(a, dtype=float)
        out = []
        for i, p in enumerate(poly):
            q = poly[(i + 1) % len(poly)]
            fp, fq = a @ p + c, a @ q + c
            if fp >= 0:
                out.append(p)
            if (fp >= 0) != (fq >= 0):
                t = fp / (fp - fq)
                out.append(p + t * (q - p))
        poly = out
        if not poly:
            return None
    # drop repeated vertices produced by clipping through a corner
    verts = [poly[0]]
    for p in poly[1:]:
        if np.max(np.abs(p - verts[-1])) > 1e-15:
            verts.append(p)
    if len(verts) > 1 and np.max(np.abs(verts[-1] - verts[0])) <= 1e-15:
        verts.pop()
    return np.array(verts) + 0.0


def _tent_rows(spec: CodeSpec, s, col: int, k: int):
    """Affine rows of the forward orbit and (for turbo) the backward orbit."""
    beta = spec.beta
    g = np.zeros(k)
    g[col] = 1.0
    o = 0.0
    fwd = [(g, o)]
    cons = []
    for si in s:
        cons.append((tuple(si * g), si * o))
        g, o = -beta * si * g, beta - 1.0 - beta * si * o
        fwd.append((g, o))
    return fwd, cons


def _tent_backward_rows(spec: CodeSpec, s, k: int):
    beta = spec.beta
    g = np.zeros(k)
    g[0] = 1.0
    o = 0.0
    rows = [(g, o)]
    for si in reversed(s):
        g, o = -si * g / beta, si * (beta - 1.0 - o) / beta
        rows.append((g, o))
    return rows[::-1]


def _baker_rows(s, xcol: int, ycol: int):
    gx = np.zeros(2)
    gx[xcol] = 1.0
    gy = np.zeros(2)
    gy[ycol] = 1.0
    ox = oy = 0.0
    rows = [(gx, ox), (gy, oy)]
    cons = []
    for si in s:
        cons.append((tuple(si * gx), si * ox))
        gx, ox = -2.0 * si * gx, 1.0 - 2.0 * si * ox
        gy, oy = -0.5 * si * gy, si * (0.5 - 0.5 * oy)
        rows += [(gx, ox), (gy, oy)]
    return rows, cons


def make_segment(gain, offset, constraints, signs=()) -> AffineSegment:
    """Build a segment and resolve its feasible region inside ``[-1, 1]^k``."""
    gain = np.array(gain, dtype=float)
    if gain.ndim == 1:
        gain = gain[:, None]
    offset = np.array(offset, dtype=float)
    k = gain.shape[1]
    cons = tuple((tuple(float(v) for v in np.atleast_1d(a)), float(c)) for a, c in constraints)
    region = _interval(cons) if k == 1 else _polygon(cons)
    gain.setflags(write=False)
    offset.setflags(write=False)
    return AffineSegment(gain, offset, cons, tuple(signs), region)


def _make_segment(rows, cons, signs, k) -> AffineSegment:
    gain = np.array([g for g, _ in rows], dtype=float).reshape(len(rows), k)
    return make_segment(gain, [o for _, o in rows], cons, signs)


@functools.lru_cache(maxsize=None)
def _segments(spec: CodeSpec) -> tuple[AffineSegment, ...]:
    n, fam, k = spec.n, spec.family, spec.k
    patterns = list(itertools.product((1, -1), repeat=n - 1))
    segs = []
    if fam in (Family.TENT, Family.TENT_TURBO):
        top = spec.source_bounds[1]
        for s in patterns:
            rows, cons = _tent_rows(spec, s, 0, 1)
            if top < 1.0:
                cons.append(((-1.0,), top))
            if fam is Family.TENT_TURBO:
                back = _tent_backward_rows(spec, s, 1)
                rows = rows + (back[:-1] if spec.puncture_systematic else back)
            segs.append(_make_segment(rows, cons, (s,), 1))
    elif fam is Family.BAKER:
        for s in patterns:
            rows, cons = _baker_rows(s, 0, 1)
            segs.append(_make_segment(rows, cons, (s,), 2))
    else:
        for s, t in itertools.product(patterns, patterns):
            rows1, cons1 = _baker_rows(s, 0, 1)
            rows2, cons2 = _baker_rows(t, 1, 0)
            if spec.puncture_systematic:
                rows2 = rows2[2:]
            segs.append(_make_segment(rows1 + rows2, cons1 + cons2, (s, t), 2))
    # sign patterns that no source realizes carry no candidate
    return tuple(seg for seg in segs if not seg.empty)


def enumerate_segments(spec: CodeSpec) -> list[AffineSegment]:
    return list(_segments(spec))


@dataclass(frozen=True)
class DecodeResult:
    estimate: np.ndarray
    log_likelihood: float
    segment_index: int


def log_likelihood(rss, sigma2: float):
    """Gaussian log-likelihood up to an additive constant."""
    rss = np.asarray(rss, dtype=float)
    if sigma2 > 0:
        return -rss / (2.0 * sigma2)
    return np.where(rss == 0, 0.0, -np.inf)


def _segment_batch(seg: AffineSegment, resid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Best point of one segment for each row of ``resid = r - offset``; returns (u, rss)."""
    G = seg.gain
    if seg.k == 1:
        g = G[:, 0]
        den = g @ g
        lo, hi = seg.region
        u = np.clip(resid @ g / den, lo, hi) if den > 0 else np.full(len(resid), lo)
        rss = np.sum((resid - u[:, None] * g) ** 2, axis=1)
        return u[:, None], rss

    verts = seg.region
    cands = []
    if not seg.degenerate:
        u_free = resid @ np.linalg.pinv(G).T
        a = np.array([c[0] for c in seg.constraints]).reshape(-1, 2)
        c = np.array([c[1] for c in seg.constraints])
        ok = np.all(np.abs(u_free) <= 1.0 + _FEAS_TOL, axis=1)
        if len(c):
            ok &= np.all(u_free @ a.T + c >= -_FEAS_TOL, axis=1)
        rss = np.sum((resid - u_free @ G.T) ** 2, axis=1)
        cands.append((u_free, np.where(ok, rss, np.inf)))
    nv = len(verts)
    edges = [(verts[i], verts[(i + 1) % nv]) for i in range(nv if nv > 2 else 1)]
    for p, q in edges:
        d = q - p
        Gp, Gd = G @ p, G @ d
        den = Gd @ Gd
        t = np.clip((resid - Gp) @ Gd / den, 0.0, 1.0) if den > 0 else np.zeros(len(resid))
        u = p + t[:, None] * d
        cands.append((u, np.sum((resid - u @ G.T) ** 2, axis=1)))
    us = np.stack([u for u, _ in cands])
    rs = np.stack([r for _, r in cands])
    best = np.argmin(rs, axis=0)
    idx = np.arange(resid.shape[0])
    return us[best, idx], rs[best, idx]


def segment_ml(seg: AffineSegment, obs: ChannelObservation) -> DecodeResult | None:
    """Likelihood maximizer restricted to one segment; ``None`` if its region is empty."""
    if seg.empty:
        return None
    r = np.asarray(obs.received, dtype=float)
    if r.shape != seg.offset.shape:
        raise ValueError(f"observation length {len(r)} != codeword length {len(seg.offset)}")
    u, rss = _segment_batch(seg, (r - seg.offset)[None, :])
    return DecodeResult(u[0], float(log_likelihood(rss[0], obs.sigma2)), -1)


_CHUNK_ELEMS = 1 << 22


def ml_decode_batch(spec: CodeSpec, received) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ML estimates for each row of ``received`` (T x L).

    Returns ``(estimates (T, k), rss (T,), segment index (T,))``. Ties go
    to the lowest segment index.
    """
    R = np.atleast_2d(np.asarray(received, dtype=float))
    if R.shape[1] != spec.length:
        raise ValueError(f"observation length {R.shape[1]} != codeword length {spec.length}")
    segs = _segments(spec)
    T = R.shape[0]

    if spec.k == 1:
        G = np.stack([s.gain[:, 0] for s in segs])
        O = np.stack([s.offset for s in segs])
        lo = np.array([s.region[0] for s in segs])
        hi = np.array([s.region[1] for s in segs])
        den = np.sum(G * G, axis=1)
        est = np.empty((T, 1))
        best_rss = np.empty(T)
        best_idx = np.empty(T, dtype=int)
        step = max(1, _CHUNK_ELEMS // (G.size))
        for start in range(0, T, step):
            resid = R[start:start + step, None, :] - O[None]
            u = np.clip(np.sum(resid * G, axis=2) / den, lo, hi)
            rss = np.sum((resid - u[..., None] * G) ** 2, axis=2)
            j = np.argmin(rss, axis=1)
            rows = np.arange(len(j))
            est[start:start + step, 0] = u[rows, j]
            best_rss[start:start + step] = rss[rows, j]
            best_idx[start:start + step] = j
        return est, best_rss, best_idx

    est = np.zeros((T, 2))
    best_rss = np.full(T, np.inf)
    best_idx = np.zeros(T, dtype=int)
    for i, seg in enumerate(segs):
        u, rss = _segment_batch(seg, R - seg.offset)
        better = rss < best_rss
        est[better] = u[better]
        best_rss[better] = rss[better]
        best_idx[better] = i
    return est, best_rss, best_idx


def ml_decode(spec: CodeSpec, obs: ChannelObservation) -> DecodeResult:
    est, rss, idx = ml_decode_batch(spec, np.asarray(obs.received, dtype=float)[None, :])
    return DecodeResult(est[0], float(log_likelihood(rss[0], obs.sigma2)), int(idx[0]))


def _default_step(k: int) -> float:
    return 1e-4 if k == 1 else 1e-3


def grid_points(k: int, step: float, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    m = int(round((hi - lo) / step))
    axis = np.linspace(lo, hi, m + 1)
    if k == 1:
        return axis[:, None]
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([uu.ravel(), vv.ravel()])


def grid_oracle_batch(spec: CodeSpec, received, step: float | None = None,
                      chunk: int = 200_000) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force likelihood search on a regular grid over the source box.

    Returns ``(estimates (T, k), rss (T,))``. Test-only reference; it uses
    the encoder directly and never touches the segment machinery.
    """
    R = np.atleast_2d(np.asarray(received, dtype=float))
    step = _default_step(spec.k) if step is None else step
    if step <= 0:
        raise ValueError("grid step must be positive")
    pts = grid_points(spec.k, step, *spec.source_bounds)
    T = R.shape[0]
    best_score = np.full(T, np.inf)
    best_pt = np.zeros((T, spec.k))
    r2 = np.sum(R * R, axis=1)
    for start in range(0, len(pts), chunk):
        P = pts[start:start + chunk]
        C = encode_batch(spec, P)
        score = np.sum(C * C, axis=1)[:, None] - 2.0 * (C @ R.T) + r2[None, :]
        j = np.argmin(score, axis=0)
        s = score[j, np.arange(T)]
        better = s < best_score
        best_score[better] = s[better]
        best_pt[better] = P[j[better]]
    rss = np.sum((R - encode_batch(spec, best_pt)) ** 2, axis=1)
    return best_pt, rss


def grid_oracle(spec: CodeSpec, obs: ChannelObservation, step: float | None = None) -> DecodeResult:
    est, rss = grid_oracle_batch(spec, np.asarray(obs.received, dtype=float)[None, :], step)
    return DecodeResult(est[0], float(log_likelihood(rss[0], obs.sigma2)), -1)


def genie_decode_tent_batch(spec: CodeSpec, received, signs) -> np.ndarray:
    R = np.atleast_2d(np.asarray(received, dtype=float))
    S = np.atleast_2d(np.asarray(signs))
    if spec.family is not Family.TENT:
        raise ValueError("genie decoding is defined for the tent map code")
    if S.shape[1] != spec.n - 1:
        raise ValueError(f"need {spec.n - 1} signs, got {S.shape[1]}")
    z = R[:, spec.n - 1]
    for i in range(spec.n - 2, -1, -1):
        z = tent_inverse(z, S[:, i], spec.beta, strict=False)
    return np.clip(z, -1.0, 1.0)


def genie_decode_tent(obs: ChannelObservation, signs, spec: CodeSpec) -> float:
    """Invert the last received parity back to the source using the true signs."""
    return float(genie_decode_tent_batch(spec, np.asarray(obs.received)[None, :], np.asarray(signs)[None, :])[0])
