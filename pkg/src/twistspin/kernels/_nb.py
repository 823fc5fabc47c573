"""numba-compiled kernels. Semantics must match ``_np`` exactly."""
import numpy as np
from numba import njit


@njit(cache=True)
def _cross(a, b):
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


@njit(cache=True)
def _clip(tri, d, pts, feat, base):
    # points where the triangle meets the zero set of d; vertices first
    n = 0
    for k in range(3):
        if d[k] == 0.0:
            for c in range(3):
                pts[n, c] = tri[k, c]
            feat[n] = base + 3 + k
            n += 1
    for k in range(3):
        j = (k + 1) % 3
        if d[k] * d[j] < 0.0:
            s = d[k] / (d[k] - d[j])
            for c in range(3):
                pts[n, c] = tri[k, c] + s * (tri[j, c] - tri[k, c])
            feat[n] = base + k
            n += 1
    return n


@njit(cache=True)
def _coplanar_overlap(P, Q, nrm, eps):
    ax = 0
    if abs(nrm[1]) > abs(nrm[ax]):
        ax = 1
    if abs(nrm[2]) > abs(nrm[ax]):
        ax = 2
    i0 = (ax + 1) % 3
    i1 = (ax + 2) % 3
    for which in range(2):
        for k in range(3):
            if which == 0:
                a = P[k]
                b = P[(k + 1) % 3]
            else:
                a = Q[k]
                b = Q[(k + 1) % 3]
            nx = -(b[i1] - a[i1])
            ny = b[i0] - a[i0]
            ln = np.sqrt(nx * nx + ny * ny)
            if ln == 0.0:
                continue
            nx /= ln
            ny /= ln
            pmin = 1e300
            pmax = -1e300
            qmin = 1e300
            qmax = -1e300
            for v in range(3):
                sp = P[v, i0] * nx + P[v, i1] * ny
                sq = Q[v, i0] * nx + Q[v, i1] * ny
                pmin = min(pmin, sp)
                pmax = max(pmax, sp)
                qmin = min(qmin, sq)
                qmax = max(qmax, sq)
            if pmax <= qmin + eps or qmax <= pmin + eps:
                return False
    return True


@njit(cache=True)
def tri_tri_3d(P, Q, eps, min_len, sin_tol):
    n = P.shape[0]
    status = np.zeros(n, dtype=np.int8)
    seg = np.zeros((n, 2, 3))
    feat = np.full((n, 2), -1, dtype=np.int8)
    pp = np.zeros((3, 3))
    qp = np.zeros((3, 3))
    pf = np.zeros(3, dtype=np.int8)
    qf = np.zeros(3, dtype=np.int8)
    dp = np.zeros(3)
    dq = np.zeros(3)
    for r in range(n):
        A = P[r]
        B = Q[r]
        n1 = _cross(A[1] - A[0], A[2] - A[0])
        n2 = _cross(B[1] - B[0], B[2] - B[0])
        l1 = np.sqrt(n1[0] ** 2 + n1[1] ** 2 + n1[2] ** 2)
        l2 = np.sqrt(n2[0] ** 2 + n2[1] ** 2 + n2[2] ** 2)
        if l1 == 0.0 or l2 == 0.0:
            continue
        n1 = n1 / l1
        n2 = n2 / l2
        pos = 0
        neg = 0
        for k in range(3):
            d = (B[k, 0] - A[0, 0]) * n1[0] + (B[k, 1] - A[0, 1]) * n1[1] + (B[k, 2] - A[0, 2]) * n1[2]
            if abs(d) <= eps:
                d = 0.0
            dq[k] = d
            if d > 0.0:
                pos += 1
            elif d < 0.0:
                neg += 1
        if pos == 3 or neg == 3:
            continue
        if pos == 0 and neg == 0:
            if _coplanar_overlap(A, B, n1, eps):
                status[r] = 2
            continue
        pos = 0
        neg = 0
        for k in range(3):
            d = (A[k, 0] - B[0, 0]) * n2[0] + (A[k, 1] - B[0, 1]) * n2[1] + (A[k, 2] - B[0, 2]) * n2[2]
            if abs(d) <= eps:
                d = 0.0
            dp[k] = d
            if d > 0.0:
                pos += 1
            elif d < 0.0:
                neg += 1
        if pos == 3 or neg == 3:
            continue
        L = _cross(n1, n2)
        sl = np.sqrt(L[0] ** 2 + L[1] ** 2 + L[2] ** 2)
        npn = _clip(A, dp, pp, pf, 0)
        nqn = _clip(B, dq, qp, qf, 6)
        if npn == 0 or nqn == 0:
            continue
        if sl < sin_tol:
            status[r] = 3
            continue
        L = L / sl
        # interval of each clip set along L
        ip_lo = 0
        ip_hi = 0
        tp_lo = 1e300
        tp_hi = -1e300
        for k in range(npn):
            t = pp[k, 0] * L[0] + pp[k, 1] * L[1] + pp[k, 2] * L[2]
            if t < tp_lo:
                tp_lo = t
                ip_lo = k
            if t > tp_hi:
                tp_hi = t
                ip_hi = k
        iq_lo = 0
        iq_hi = 0
        tq_lo = 1e300
        tq_hi = -1e300
        for k in range(nqn):
            t = qp[k, 0] * L[0] + qp[k, 1] * L[1] + qp[k, 2] * L[2]
            if t < tq_lo:
                tq_lo = t
                iq_lo = k
            if t > tq_hi:
                tq_hi = t
                iq_hi = k
        lo = max(tp_lo, tq_lo)
        hi = min(tp_hi, tq_hi)
        if hi - lo <= min_len:
            continue
        status[r] = 1
        if tp_lo >= tq_lo:
            seg[r, 0] = pp[ip_lo]
            feat[r, 0] = pf[ip_lo]
        else:
            seg[r, 0] = qp[iq_lo]
            feat[r, 0] = qf[iq_lo]
        if tp_hi <= tq_hi:
            seg[r, 1] = pp[ip_hi]
            feat[r, 1] = pf[ip_hi]
        else:
            seg[r, 1] = qp[iq_hi]
            feat[r, 1] = qf[iq_hi]
    return status, seg, feat


@njit(cache=True)
def _inv4(M, out):
    # Gauss-Jordan with partial pivoting; False when a pivot vanishes
    A = M.copy()
    for i in range(4):
        for j in range(4):
            out[i, j] = 1.0 if i == j else 0.0
    for c in range(4):
        p = c
        for r in range(c + 1, 4):
            if abs(A[r, c]) > abs(A[p, c]):
                p = r
        if A[p, c] == 0.0:
            return False
        for j in range(4):
            A[c, j], A[p, j] = A[p, j], A[c, j]
            out[c, j], out[p, j] = out[p, j], out[c, j]
        f = 1.0 / A[c, c]
        for j in range(4):
            A[c, j] *= f
            out[c, j] *= f
        for r in range(4):
            if r != c and A[r, c] != 0.0:
                g = A[r, c]
                for j in range(4):
                    A[r, j] -= g * A[c, j]
                    out[r, j] -= g * out[c, j]
    return True


@njit(cache=True)
def tri_tri_4d(P, Q, tol, rank_tol):
    """1 where two 4D triangles share a point, 2 where the test is inconclusive."""
    n = P.shape[0]
    out = np.zeros(n, dtype=np.int8)
    M = np.zeros((4, 4))
    Minv = np.zeros((4, 4))
    rhs = np.zeros(4)
    for r in range(n):
        A = P[r]
        B = Q[r]
        for c in range(4):
            M[c, 0] = A[1, c] - A[0, c]
            M[c, 1] = A[2, c] - A[0, c]
            M[c, 2] = B[0, c] - B[1, c]
            M[c, 3] = B[0, c] - B[2, c]
            rhs[c] = B[0, c] - A[0, c]
        # ||M||_F ||M^-1||_F bounds the condition number, so a small value
        # proves full rank and the SVD can be skipped
        if _inv4(M, Minv):
            cond = np.sqrt(np.sum(M * M) * np.sum(Minv * Minv))
            if cond * rank_tol < 1e-3:
                s, t, a, b = Minv @ rhs
                if s >= -tol and t >= -tol and s + t <= 1.0 + tol and a >= -tol and b >= -tol and a + b <= 1.0 + tol:
                    out[r] = 1
                continue
        U, S, Vt = np.linalg.svd(M)
        if S[0] == 0.0:
            out[r] = 2
            continue
        rank = 0
        for k in range(4):
            if S[k] > rank_tol * S[0]:
                rank += 1
        # least-squares particular solution
        k0 = np.zeros(4)
        for k in range(rank):
            coef = 0.0
            for c in range(4):
                coef += U[c, k] * rhs[c]
            coef /= S[k]
            for c in range(4):
                k0[c] += coef * Vt[k, c]
        res = 0.0
        for c in range(4):
            acc = 0.0
            for k in range(4):
                acc += M[c, k] * k0[k]
            res += (acc - rhs[c]) ** 2
        scale = 0.0
        for c in range(4):
            scale = max(scale, abs(M[c, 0]), abs(M[c, 1]), abs(M[c, 2]), abs(M[c, 3]))
        if np.sqrt(res) > tol * max(scale, 1.0):
            continue
        if rank == 4:
            s, t, a, b = k0[0], k0[1], k0[2], k0[3]
            if s >= -tol and t >= -tol and s + t <= 1.0 + tol and a >= -tol and b >= -tol and a + b <= 1.0 + tol:
                out[r] = 1
            continue
        if rank < 3:
            out[r] = 2
            continue
        # one-parameter family k0 + lam * null
        nv = Vt[3]
        lo = -1e300
        hi = 1e300
        ok = True
        for ci in range(6):
            if ci < 4:
                a0 = k0[ci] + tol
                b0 = nv[ci]
            elif ci == 4:
                a0 = 1.0 + tol - k0[0] - k0[1]
                b0 = -nv[0] - nv[1]
            else:
                a0 = 1.0 + tol - k0[2] - k0[3]
                b0 = -nv[2] - nv[3]
            # a0 + lam * b0 >= 0
            if abs(b0) < 1e-300:
                if a0 < 0.0:
                    ok = False
            elif b0 > 0.0:
                lo = max(lo, -a0 / b0)
            else:
                hi = min(hi, -a0 / b0)
        if ok and lo <= hi:
            out[r] = 1
    return out


@njit(cache=True)
def seg_seg_2d(A, B, C, D, eps):
    """Proper crossings of segments AB and CD.

    Returns (status, s, t): status 1 proper crossing, 2 degenerate contact
    (touching, collinear overlap, endpoint incidence), 0 disjoint.
    """
    n = A.shape[0]
    status = np.zeros(n, dtype=np.int8)
    sp = np.zeros(n)
    tp = np.zeros(n)
    for r in range(n):
        rx = B[r, 0] - A[r, 0]
        ry = B[r, 1] - A[r, 1]
        qx = D[r, 0] - C[r, 0]
        qy = D[r, 1] - C[r, 1]
        den = rx * qy - ry * qx
        wx = C[r, 0] - A[r, 0]
        wy = C[r, 1] - A[r, 1]
        lr = np.sqrt(rx * rx + ry * ry)
        lq = np.sqrt(qx * qx + qy * qy)
        if lr == 0.0 or lq == 0.0:
            continue
        if abs(den) <= eps * lr * lq:
            # parallel: degenerate only if collinear and overlapping
            if abs(wx * ry - wy * rx) <= eps * lr * lr:
                t0 = (wx * rx + wy * ry) / (lr * lr)
                t1 = ((D[r, 0] - A[r, 0]) * rx + (D[r, 1] - A[r, 1]) * ry) / (lr * lr)
                if max(t0, t1) >= -eps and min(t0, t1) <= 1.0 + eps:
                    status[r] = 2
            continue
        s = (wx * qy - wy * qx) / den
        t = (wx * ry - wy * rx) / den
        if s < -eps or s > 1.0 + eps or t < -eps or t > 1.0 + eps:
            continue
        sp[r] = s
        tp[r] = t
        if s <= eps or s >= 1.0 - eps or t <= eps or t >= 1.0 - eps:
            status[r] = 2
        else:
            status[r] = 1
    return status, sp, tp
