"""Vectorized numpy kernels; the fallback when numba is disabled."""
import numpy as np


def _unit(v):
    n = np.linalg.norm(v, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return v / n[..., None], n


def _signed(tri_pts, origin, nrm, eps):
    d = np.einsum("nkc,nc->nk", tri_pts - origin[:, None, :], nrm)
    d[np.abs(d) <= eps] = 0.0
    return d


def _clip(tri, d, base):
    # up to six candidates: three vertices on the plane, three crossing edges
    n = tri.shape[0]
    cand = np.zeros((n, 6, 3))
    valid = np.zeros((n, 6), dtype=bool)
    codes = np.zeros((n, 6), dtype=np.int8)
    for k in range(3):
        cand[:, k] = tri[:, k]
        valid[:, k] = d[:, k] == 0.0
        codes[:, k] = base + 3 + k
    for k in range(3):
        j = (k + 1) % 3
        cross = d[:, k] * d[:, j] < 0.0
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(cross, d[:, k] / np.where(cross, d[:, k] - d[:, j], 1.0), 0.0)
        cand[:, 3 + k] = tri[:, k] + s[:, None] * (tri[:, j] - tri[:, k])
        valid[:, 3 + k] = cross
        codes[:, 3 + k] = base + k
    return cand, valid, codes


def _coplanar_overlap(P, Q, nrm, eps):
    ax = np.argmax(np.abs(nrm), axis=1)
    i0 = (ax + 1) % 3
    i1 = (ax + 2) % 3
    rows = np.arange(P.shape[0])[:, None]
    cols = np.arange(3)[None, :]
    P2 = np.stack([P[rows, cols, i0[:, None]], P[rows, cols, i1[:, None]]], axis=-1)
    Q2 = np.stack([Q[rows, cols, i0[:, None]], Q[rows, cols, i1[:, None]]], axis=-1)
    overlap = np.ones(P.shape[0], dtype=bool)
    for T in (P2, Q2):
        for k in range(3):
            e = T[:, (k + 1) % 3] - T[:, k]
            nx, ny = -e[:, 1], e[:, 0]
            ln = np.hypot(nx, ny)
            good = ln > 0
            ln = np.where(good, ln, 1.0)
            nx, ny = nx / ln, ny / ln
            sp = P2[..., 0] * nx[:, None] + P2[..., 1] * ny[:, None]
            sq = Q2[..., 0] * nx[:, None] + Q2[..., 1] * ny[:, None]
            sep = (sp.max(1) <= sq.min(1) + eps) | (sq.max(1) <= sp.min(1) + eps)
            overlap &= ~(sep & good)
    return overlap


def tri_tri_3d(P, Q, eps, min_len, sin_tol):
    n = P.shape[0]
    status = np.zeros(n, dtype=np.int8)
    seg = np.zeros((n, 2, 3))
    feat = np.full((n, 2), -1, dtype=np.int8)
    if n == 0:
        return status, seg, feat
    n1, l1 = _unit(np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]))
    n2, l2 = _unit(np.cross(Q[:, 1] - Q[:, 0], Q[:, 2] - Q[:, 0]))
    live = (l1 > 0) & (l2 > 0)
    n1 = np.where(live[:, None], n1, 0.0)
    n2 = np.where(live[:, None], n2, 0.0)
    dq = _signed(Q, P[:, 0], n1, eps)
    pos_q = (dq > 0).sum(1)
    neg_q = (dq < 0).sum(1)
    live &= (pos_q < 3) & (neg_q < 3)
    coplanar = live & (pos_q == 0) & (neg_q == 0)
    if coplanar.any():
        idx = np.nonzero(coplanar)[0]
        ov = _coplanar_overlap(P[idx], Q[idx], n1[idx], eps)
        status[idx[ov]] = 2
    live &= ~coplanar
    dp = _signed(P, Q[:, 0], n2, eps)
    pos_p = (dp > 0).sum(1)
    neg_p = (dp < 0).sum(1)
    live &= (pos_p < 3) & (neg_p < 3)
    candP, validP, codeP = _clip(P, dp, 0)
    candQ, validQ, codeQ = _clip(Q, dq, 6)
    live &= validP.any(1) & validQ.any(1)
    L, sl = _unit(np.cross(n1, n2))
    flat = live & (sl < sin_tol)
    status[flat] = 3
    live &= ~flat
    L = np.where(live[:, None], L, 0.0)
    tP = np.einsum("nkc,nc->nk", candP, L)
    tQ = np.einsum("nkc,nc->nk", candQ, L)
    big = 1e300
    # first-occurrence argmin/argmax matches the vertices-then-edges loop order
    ip_lo = np.argmin(np.where(validP, tP, big), axis=1)
    ip_hi = np.argmax(np.where(validP, tP, -big), axis=1)
    iq_lo = np.argmin(np.where(validQ, tQ, big), axis=1)
    iq_hi = np.argmax(np.where(validQ, tQ, -big), axis=1)
    rows = np.arange(n)
    tp_lo, tp_hi = tP[rows, ip_lo], tP[rows, ip_hi]
    tq_lo, tq_hi = tQ[rows, iq_lo], tQ[rows, iq_hi]
    lo = np.maximum(tp_lo, tq_lo)
    hi = np.minimum(tp_hi, tq_hi)
    hit = live & (hi - lo > min_len)
    status[hit] = 1
    from_p_lo = tp_lo >= tq_lo
    from_p_hi = tp_hi <= tq_hi
    seg[:, 0] = np.where(from_p_lo[:, None], candP[rows, ip_lo], candQ[rows, iq_lo])
    seg[:, 1] = np.where(from_p_hi[:, None], candP[rows, ip_hi], candQ[rows, iq_hi])
    feat[:, 0] = np.where(from_p_lo, codeP[rows, ip_lo], codeQ[rows, iq_lo])
    feat[:, 1] = np.where(from_p_hi, codeP[rows, ip_hi], codeQ[rows, iq_hi])
    seg[~hit] = 0.0
    feat[~hit] = -1
    return status, seg, feat


def tri_tri_4d(P, Q, tol, rank_tol):
    n = P.shape[0]
    out = np.zeros(n, dtype=np.int8)
    if n == 0:
        return out
    M = np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 0], Q[:, 0] - Q[:, 1], Q[:, 0] - Q[:, 2]], axis=-1)
    rhs = Q[:, 0] - P[:, 0]
    U, S, Vt = np.linalg.svd(M)
    s0 = S[:, 0]
    zero = s0 == 0.0
    out[zero] = 2
    s0 = np.where(zero, 1.0, s0)
    keep = S > rank_tol * s0[:, None]
    rank = keep.sum(1)
    coef = np.einsum("nck,nc->nk", U, rhs) / np.where(keep, S, 1.0)
    coef = np.where(keep, coef, 0.0)
    k0 = np.einsum("nk,nkc->nc", coef, Vt)
    res = np.linalg.norm(np.einsum("nck,nk->nc", M, k0) - rhs, axis=1)
    scale = np.maximum(np.abs(M).reshape(n, -1).max(1), 1.0)
    consistent = ~zero & (res <= tol * scale)
    s, t, a, b = k0.T
    inside = (s >= -tol) & (t >= -tol) & (s + t <= 1 + tol) & (a >= -tol) & (b >= -tol) & (a + b <= 1 + tol)
    out[consistent & (rank == 4) & inside] = 1
    out[consistent & (rank < 3)] = 2
    one = consistent & (rank == 3)
    if one.any():
        idx = np.nonzero(one)[0]
        k = k0[idx]
        nv = Vt[idx, 3]
        a0 = np.stack([k[:, 0] + tol, k[:, 1] + tol, k[:, 2] + tol, k[:, 3] + tol,
                       1 + tol - k[:, 0] - k[:, 1], 1 + tol - k[:, 2] - k[:, 3]], axis=1)
        b0 = np.stack([nv[:, 0], nv[:, 1], nv[:, 2], nv[:, 3],
                       -nv[:, 0] - nv[:, 1], -nv[:, 2] - nv[:, 3]], axis=1)
        flat = np.abs(b0) < 1e-300
        bad = (flat & (a0 < 0)).any(1)
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = -a0 / np.where(flat, 1.0, b0)
        lo = np.where(~flat & (b0 > 0), bound, -np.inf).max(1)
        hi = np.where(~flat & (b0 < 0), bound, np.inf).min(1)
        out[idx[~bad & (lo <= hi)]] = 1
    return out


def seg_seg_2d(A, B, C, D, eps):
    n = A.shape[0]
    status = np.zeros(n, dtype=np.int8)
    r = B - A
    q = D - C
    w = C - A
    den = r[:, 0] * q[:, 1] - r[:, 1] * q[:, 0]
    lr = np.hypot(r[:, 0], r[:, 1])
    lq = np.hypot(q[:, 0], q[:, 1])
    live = (lr > 0) & (lq > 0)
    par = live & (np.abs(den) <= eps * lr * lq)
    lr2 = np.where(lr > 0, lr * lr, 1.0)
    col = par & (np.abs(w[:, 0] * r[:, 1] - w[:, 1] * r[:, 0]) <= eps * lr2)
    t0 = (w * r).sum(1) / lr2
    t1 = ((D - A) * r).sum(1) / lr2
    status[col & (np.maximum(t0, t1) >= -eps) & (np.minimum(t0, t1) <= 1 + eps)] = 2
    gen = live & ~par
    dd = np.where(gen, den, 1.0)
    s = (w[:, 0] * q[:, 1] - w[:, 1] * q[:, 0]) / dd
    t = (w[:, 0] * r[:, 1] - w[:, 1] * r[:, 0]) / dd
    inside = gen & (s >= -eps) & (s <= 1 + eps) & (t >= -eps) & (t <= 1 + eps)
    edge = (s <= eps) | (s >= 1 - eps) | (t <= eps) | (t >= 1 - eps)
    status[inside & edge] = 2
    status[inside & ~edge] = 1
    sp = np.where(inside, s, 0.0)
    tp = np.where(inside, t, 0.0)
    return status, sp, tp
