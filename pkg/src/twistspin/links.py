"""Planar link diagrams from frame curves, and cheap isotopy invariants.

Diagrams are stored as PD codes. Each crossing lists four edge labels
counterclockwise (as seen by the viewer) starting at the incoming
under-edge, so slots 0 and 2 carry the under strand and slots 1 and 3
the over strand. ``over_in`` records which odd slot the over strand
enters through; it is 3 for a positive crossing and 1 for a negative
one. Sign convention: a crossing is positive when the under strand
passes from right to left as seen while travelling along the over
strand.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .geometry import bbox_diagonal, random_rotation

DEFAULT_VIEW = np.array([-1.0, 0.0137, 0.0291]) / np.linalg.norm([-1.0, 0.0137, 0.0291])
TOP_VIEW = np.array([0.0, 0.0, -1.0])


class DiagramError(ValueError):
    pass


# ---------------------------------------------------------------- PD core

def _occurrences(pd) -> dict:
    occ: dict = {}
    for c, row in enumerate(pd):
        for p, lab in enumerate(row):
            occ.setdefault(int(lab), []).append((c, p))
    return occ


def _is_in(over_in, c, p) -> bool:
    return p == 0 or p == over_in[c]


def _ends(pd, over_in):
    """Map label -> (tail slot, head slot)."""
    tail, head = {}, {}
    for c, row in enumerate(pd):
        for p, lab in enumerate(row):
            (head if _is_in(over_in, c, p) else tail)[int(lab)] = (c, p)
    return tail, head


def _traverse(pd, over_in):
    """Components as ordered label lists, each starting at its smallest label."""
    tail, head = _ends(pd, over_in)
    seen = set()
    comps = []
    for start in sorted(head):
        if start in seen:
            continue
        comp = []
        lab = start
        while lab not in seen:
            seen.add(lab)
            comp.append(lab)
            c, p = head[lab]
            lab = int(pd[c][(p + 2) % 4])
        comps.append(comp)
    return comps


def _faces(pd):
    """Faces as lists of darts (crossing, slot) with the face on the right."""
    occ = _occurrences(pd)
    seen = set()
    faces = []
    for c in range(len(pd)):
        for p in range(4):
            if (c, p) in seen:
                continue
            face = []
            d = (c, p)
            while d not in seen:
                seen.add(d)
                face.append(d)
                a, b = occ[int(pd[d[0]][d[1]])]
                c2, p2 = b if a == d else a
                d = (c2, (p2 + 1) % 4)
            faces.append(face)
    return faces


def _pieces(pd):
    """Connected pieces of the crossing graph as sets of crossings."""
    occ = _occurrences(pd)
    parent = list(range(len(pd)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for slots in occ.values():
        a, b = find(slots[0][0]), find(slots[1][0])
        parent[a] = b
    out: dict = {}
    for c in range(len(pd)):
        out.setdefault(find(c), set()).add(c)
    return list(out.values())


def check_pd(pd, over_in) -> list[str]:
    """Structural problems of a PD code; empty when well formed and planar."""
    problems = []
    if len(over_in) != len(pd):
        return [f"{len(over_in)} over slots for {len(pd)} crossings"]
    problems += [f"crossing {c} has over slot {o}" for c, o in enumerate(over_in) if o not in (1, 3)]
    if problems:
        return problems
    occ = _occurrences(pd)
    for lab, slots in occ.items():
        if len(slots) != 2:
            problems.append(f"edge {lab} used {len(slots)} times")
            continue
        kinds = sorted(_is_in(over_in, c, p) for c, p in slots)
        if kinds != [False, True]:
            problems.append(f"edge {lab} is not oriented head to tail")
    if problems:
        return problems
    faces = _faces(pd)
    face_piece = {}
    pieces = _pieces(pd)
    owner = {c: k for k, piece in enumerate(pieces) for c in piece}
    for f in faces:
        face_piece.setdefault(owner[f[0][0]], []).append(f)
    for k, piece in enumerate(pieces):
        v = len(piece)
        nf = len(face_piece.get(k, []))
        if v - 2 * v + nf != 2:
            problems.append(f"piece {k} is not planar: V - E + F = {nf - v}")
    return problems


@dataclass
class LinkDiagram:
    pd: np.ndarray  # (C, 4) edge labels, counterclockwise from the incoming under-edge
    over_in: np.ndarray  # (C,) slot of the incoming over-edge, 1 or 3
    loops: int = 0  # crossingless components
    view: np.ndarray | None = None
    retries: int = 0  # seeded view rotations spent on degeneracies
    under_points: np.ndarray | None = None  # (C, 3) under-strand point of each crossing
    curve_of_component: list = field(default_factory=list)

    def __post_init__(self):
        self.pd = np.asarray(self.pd, dtype=np.int64).reshape(-1, 4)
        self.over_in = np.asarray(self.over_in, dtype=np.int64).reshape(-1)

    @property
    def crossing_count(self) -> int:
        return len(self.pd)

    @property
    def signs(self) -> np.ndarray:
        return np.where(self.over_in == 3, 1, -1)

    def _comps(self):
        return _traverse(self.pd.tolist(), self.over_in.tolist())

    @property
    def components(self) -> int:
        return len(self._comps()) + self.loops

    def edge_components(self) -> dict:
        return {lab: k for k, comp in enumerate(self._comps()) for lab in comp}

    @property
    def crossings(self) -> list[dict]:
        comp = self.edge_components()
        return [
            {"over": comp[int(self.pd[c, self.over_in[c]])], "under": comp[int(self.pd[c, 0])], "sign": int(s)}
            for c, s in enumerate(self.signs)
        ]

    @property
    def gauss_code(self) -> list[list[tuple]]:
        """Per component, the passages as (crossing number, 'O' or 'U', sign)."""
        signs = self.signs
        tail, head = _ends(self.pd.tolist(), self.over_in.tolist())
        number: dict = {}
        out = []
        for comp in self._comps():
            seq = []
            for lab in comp:
                c, p = head[lab]
                number.setdefault(c, len(number) + 1)
                seq.append((number[c], "U" if p == 0 else "O", int(signs[c])))
            out.append(seq)
        out.extend([] for _ in range(self.loops))
        return out

    @property
    def arcs(self) -> list[list[int]]:
        """Over-arcs: maximal label runs not interrupted by an under-pass."""
        tail, head = _ends(self.pd.tolist(), self.over_in.tolist())
        arcs = []
        for comp in self._comps():
            cuts = [i for i, lab in enumerate(comp) if head[lab][1] == 0]
            if not cuts:
                arcs.append(list(comp))
                continue
            for a, b in zip(cuts, cuts[1:] + [cuts[0] + len(comp)]):
                arcs.append([comp[(i + 1) % len(comp)] for i in range(a, b)])
        arcs.extend([] for _ in range(self.loops))
        return arcs

    def to_dict(self) -> dict:
        return {
            "pd": self.pd.tolist(),
            "over_in": self.over_in.tolist(),
            "loops": int(self.loops),
            "gauss_code": gauss_code_text(self),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinkDiagram":
        return cls(np.array(d["pd"], dtype=np.int64).reshape(-1, 4), np.array(d["over_in"], dtype=np.int64), int(d["loops"]))


def canonical(diagram: LinkDiagram) -> LinkDiagram:
    """Relabel edges 0..E-1 in traversal order and crossings by first visit."""
    pd = diagram.pd.tolist()
    oi = diagram.over_in.tolist()
    tail, head = _ends(pd, oi)
    new_lab = {}
    order = []
    for comp in _traverse(pd, oi):
        for lab in comp:
            new_lab[lab] = len(new_lab)
            c = head[lab][0]
            if c not in order:
                order.append(c)
    pd2 = [[new_lab[int(x)] for x in pd[c]] for c in order]
    up = None if diagram.under_points is None else diagram.under_points[order]
    return LinkDiagram(np.array(pd2, dtype=np.int64).reshape(-1, 4), np.array([oi[c] for c in order], dtype=np.int64),
                       diagram.loops, diagram.view, diagram.retries, up, list(diagram.curve_of_component))


def gauss_code_text(diagram: LinkDiagram) -> str:
    """Components separated by ' | ', e.g. 'O1+ U2+ O3+ U1+ O2+ U3+'."""
    parts = []
    for seq in diagram.gauss_code:
        parts.append(" ".join(f"{kind}{num}{'+' if s > 0 else '-'}" for num, kind, s in seq) or "()")
    return " | ".join(parts)


def parse_gauss_code(text: str) -> list[list[tuple]]:
    out = []
    for part in text.split("|"):
        part = part.strip()
        seq = []
        if part != "()":
            for tok in part.split():
                if len(tok) < 3 or tok[0] not in "OU" or tok[-1] not in "+-":
                    raise DiagramError(f"bad Gauss code token {tok!r}")
                seq.append((int(tok[1:-1]), tok[0], 1 if tok[-1] == "+" else -1))
        out.append(seq)
    return out


# ------------------------------------------------------------- invariants

def _rank_mod3(A: np.ndarray) -> int:
    A = np.array(A, dtype=np.int64) % 3
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        piv = np.nonzero(A[r:, c])[0]
        if len(piv) == 0:
            continue
        p = r + piv[0]
        A[[r, p]] = A[[p, r]]
        A[r] = (A[r] * A[r, c]) % 3  # 1 and 2 are their own inverses mod 3
        others = np.nonzero(A[:, c])[0]
        others = others[others != r]
        A[others] = (A[others] - np.outer(A[others, c], A[r])) % 3
        r += 1
        if r == rows:
            break
    return r


def coloring_matrix(diagram: LinkDiagram) -> np.ndarray:
    arcs = diagram.arcs
    arc_of = {lab: k for k, arc in enumerate(arcs) for lab in arc}
    M = np.zeros((diagram.crossing_count, len(arcs)), dtype=np.int64)
    for c in range(diagram.crossing_count):
        M[c, arc_of[int(diagram.pd[c, diagram.over_in[c]])]] += 2
        M[c, arc_of[int(diagram.pd[c, 0])]] -= 1
        M[c, arc_of[int(diagram.pd[c, 2])]] -= 1
    return M


def tricoloring_count(diagram: LinkDiagram) -> int:
    """Number of Fox 3-colorings, 3 to the kernel dimension over GF(3)."""
    M = coloring_matrix(diagram)
    n = M.shape[1]
    rank = _rank_mod3(M) if M.size else 0
    return 3 ** (n - rank)


def linking_matrix(diagram: LinkDiagram) -> np.ndarray:
    n = diagram.components
    L = np.zeros((n, n), dtype=np.int64)
    for x in diagram.crossings:
        i, j = x["over"], x["under"]
        if i != j:
            L[i, j] += x["sign"]
            L[j, i] += x["sign"]
    return L // 2


def canonical_linking(L) -> np.ndarray:
    """Component-order independent representative of a linking matrix."""
    L = np.asarray(L, dtype=np.int64)
    n = len(L)
    if n == 0 or not L.any():
        return L
    if n <= 7:
        best = None
        for perm in itertools.permutations(range(n)):
            key = tuple(L[np.ix_(perm, perm)].ravel())
            if best is None or key < best[0]:
                best = (key, perm)
        perm = best[1]
    else:
        perm = sorted(range(n), key=lambda i: (tuple(sorted(L[i])), i))
    return L[np.ix_(perm, perm)]


@dataclass(frozen=True)
class InvariantSignature:
    component_count: int
    crossing_count_reduced: int
    tricoloring_count: int
    linking_matrix: tuple
    total_linking: int

    def to_dict(self) -> dict:
        return {
            "component_count": self.component_count,
            "crossing_count_reduced": self.crossing_count_reduced,
            "tricoloring_count": self.tricoloring_count,
            "linking_matrix": [list(r) for r in self.linking_matrix],
            "total_linking": self.total_linking,
        }


def signature(diagram: LinkDiagram) -> InvariantSignature:
    L = canonical_linking(linking_matrix(diagram))
    n = len(L)
    return InvariantSignature(
        component_count=diagram.components,
        crossing_count_reduced=simplify(diagram).crossing_count,
        tricoloring_count=tricoloring_count(diagram),
        linking_matrix=tuple(tuple(int(x) for x in row) for row in L) if n > 1 else (),
        total_linking=int(np.triu(L, 1).sum()),
    )


def signatures_equal(a: InvariantSignature, b: InvariantSignature, strict: bool = False) -> bool:
    """Equality of the isotopy-invariant fields.

    The reduced crossing count comes from a greedy, non-canonical
    simplification, so it only participates when ``strict`` is set.
    Equal signatures are necessary, not sufficient, for isotopy.
    """
    same = (
        a.component_count == b.component_count
        and a.tricoloring_count == b.tricoloring_count
        and a.linking_matrix == b.linking_matrix
        and a.total_linking == b.total_linking
    )
    return same and (not strict or a.crossing_count_reduced == b.crossing_count_reduced)


# -------------------------------------------------------- frame projection

def _view_basis(w):
    w = np.asarray(w, dtype=float)
    w = w / np.linalg.norm(w)
    k = int(np.argmin(np.abs(w)))
    a = np.zeros(3)
    a[k] = 1.0
    e1 = a - (a @ w) * w
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(-w, e1)
    return np.stack([e1, e2]), w


def _curves_of(frame):
    curves = frame.curves if hasattr(frame, "curves") else frame
    return [np.asarray(c, dtype=float).reshape(-1, 3) for c in curves]


def _default_view(frame):
    return TOP_VIEW if getattr(frame, "coords", "") == "ryh" else DEFAULT_VIEW


def _crossings_2d(curves, basis, w, scale):
    """Proper crossings of the projected closed polylines, or None if degenerate."""
    starts, ends, owner, local = [], [], [], []
    for k, c in enumerate(curves):
        n = len(c)
        starts.append(c)
        ends.append(np.roll(c, -1, axis=0))
        owner.append(np.full(n, k))
        local.append(np.arange(n))
    if not starts:
        return []
    A3 = np.concatenate(starts)
    B3 = np.concatenate(ends)
    owner = np.concatenate(owner)
    local = np.concatenate(local)
    A = A3 @ basis.T
    B = B3 @ basis.T
    lo = np.minimum(A, B)
    hi = np.maximum(A, B)
    pairs = kernels.box_pairs(lo, hi, pad=1e-12 * scale)
    if len(pairs) == 0:
        return []
    i, j = pairs[:, 0], pairs[:, 1]
    sizes = np.array([len(c) for c in curves])
    same = owner[i] == owner[j]
    gap = np.abs(local[i] - local[j])
    adjacent = same & ((gap == 1) | (gap == sizes[owner[i]] - 1))
    i, j = i[~adjacent], j[~adjacent]
    status, s, t = kernels.seg_seg_2d(A[i], B[i], A[j], B[j], 1e-9)
    if np.any(status == 2):
        return None
    hit = status == 1
    i, j, s, t = i[hit], j[hit], s[hit], t[hit]
    P = A[i] + s[:, None] * (B[i] - A[i])
    if len(P) > 1:
        from scipy.spatial import cKDTree

        if cKDTree(P).query_pairs(1e-9 * scale):
            return None
    Pi = A3[i] + s[:, None] * (B3[i] - A3[i])
    Pj = A3[j] + t[:, None] * (B3[j] - A3[j])
    di = -(Pi @ w)
    dj = -(Pj @ w)
    if np.any(np.abs(di - dj) <= 1e-9 * scale):
        raise DiagramError("frame curves meet in space; the frame is not a link")
    out = []
    for k in range(len(i)):
        a, b = (i[k], s[k], Pi[k]), (j[k], t[k], Pj[k])
        over, under = (a, b) if di[k] > dj[k] else (b, a)
        out.append((over, under))
    return out


def _build_pd(curves, crossings, A2dir, owner, local):
    """PD code from crossings given as ((seg, param, point) over, (...) under)."""
    n_curves = len(curves)
    passages = [[] for _ in range(n_curves)]
    for c, (ov, un) in enumerate(crossings):
        for role, (g, par, _) in (("O", ov), ("U", un)):
            passages[owner[g]].append((local[g] + par, c, role))
    in_lab = {}
    out_lab = {}
    label = 0
    loops = 0
    comp_curves = []
    for k in range(n_curves):
        ps = sorted(passages[k])
        if not ps:
            loops += 1
            continue
        comp_curves.append(k)
        base = label
        q = len(ps)
        for r, (_, c, role) in enumerate(ps):
            in_lab[(c, role)] = base + r
            out_lab[(c, role)] = base + (r + 1) % q
        label += q
    pd = np.zeros((len(crossings), 4), dtype=np.int64)
    over_in = np.zeros(len(crossings), dtype=np.int64)
    under_points = np.zeros((len(crossings), 3))
    for c, (ov, un) in enumerate(crossings):
        do = A2dir[ov[0]]
        du = A2dir[un[0]]
        positive = do[0] * du[1] - do[1] * du[0] > 0
        if positive:
            pd[c] = [in_lab[(c, "U")], out_lab[(c, "O")], out_lab[(c, "U")], in_lab[(c, "O")]]
            over_in[c] = 3
        else:
            pd[c] = [in_lab[(c, "U")], in_lab[(c, "O")], out_lab[(c, "U")], out_lab[(c, "O")]]
            over_in[c] = 1
        under_points[c] = un[2]
    free = [k for k in range(n_curves) if k not in comp_curves]
    return pd, over_in, loops, under_points, comp_curves + free


def planar_project_frame(frame, view_direction=None, seed: int = 0, max_retries: int = 8) -> LinkDiagram:
    """Orthographic link diagram of a frame's closed curves.

    ``frame`` is a Frame or a list of (k, 3) closed polylines. Crossings
    come from a sweep over segment bounding boxes; the over strand is the
    one nearer the viewer, who looks along ``view_direction``. Tangencies
    and coincident crossings trigger a seeded small view rotation.
    """
    curves = [c for c in _curves_of(frame) if len(c) >= 3]
    w0 = np.asarray(_default_view(frame) if view_direction is None else view_direction, dtype=float)
    w0 = w0 / np.linalg.norm(w0)
    scale = bbox_diagonal(np.concatenate(curves)) if curves else 1.0
    rng = np.random.default_rng(seed)
    w = w0
    for attempt in range(max_retries + 1):
        basis, w = _view_basis(w)
        found = _crossings_2d(curves, basis, w, scale)
        if found is not None:
            break
        w = random_rotation(3, rng, 1e-4 * 2.0**attempt) @ w0
    else:
        raise DiagramError(f"projection still degenerate after {max_retries} view rotations")
    owner = np.concatenate([np.full(len(c), k) for k, c in enumerate(curves)]) if curves else np.zeros(0, int)
    local = np.concatenate([np.arange(len(c)) for c in curves]) if curves else np.zeros(0, int)
    if curves:
        A3 = np.concatenate(curves)
        B3 = np.concatenate([np.roll(c, -1, axis=0) for c in curves])
        dirs = (B3 - A3) @ basis.T
    else:
        dirs = np.zeros((0, 2))
    pd, over_in, loops, up, comp_curves = _build_pd(curves, found, dirs, owner, local)
    d = LinkDiagram(pd, over_in, loops, w, attempt, up, comp_curves)
    return canonical(d)


# ------------------------------------------------------------------ moves

def _splice(pd, over_in, remove):
    """Delete crossings, joining the strand ends through each of them."""
    parent: dict = {}

    def find(a):
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        parent[find(a)] = find(b)

    for c in remove:
        union(int(pd[c][0]), int(pd[c][2]))
        union(int(pd[c][1]), int(pd[c][3]))
    keep = [c for c in range(len(pd)) if c not in set(remove)]
    new_pd = [[find(int(x)) for x in pd[c]] for c in keep]
    used = {x for row in new_pd for x in row}
    freed = {find(a) for a in parent} - used
    return new_pd, [over_in[c] for c in keep], len(freed)


def _next_label(pd):
    return 1 + max((int(x) for row in pd for x in row), default=-1)


def _wrap(pd, over_in, loops, like: LinkDiagram) -> LinkDiagram:
    return canonical(LinkDiagram(np.array(pd, dtype=np.int64).reshape(-1, 4), np.array(over_in, dtype=np.int64),
                                 loops, like.view))


def r1_sites(d: LinkDiagram) -> list[int]:
    """Crossings removable by a Reidemeister I move."""
    out = []
    for c, row in enumerate(d.pd.tolist()):
        if any(row[p] == row[(p + 1) % 4] for p in range(4)):
            out.append(c)
    return out


def r1_remove(d: LinkDiagram, c: int) -> LinkDiagram:
    pd, oi, freed = _splice(d.pd.tolist(), d.over_in.tolist(), [c])
    return _wrap(pd, oi, d.loops + freed, d)


def r1_add(d: LinkDiagram, label: int | None, side: int, first_over: bool) -> LinkDiagram:
    """Add a kink on edge ``label``; ``label=None`` kinks a free loop."""
    pd = d.pd.tolist()
    oi = d.over_in.tolist()
    loops = d.loops
    new = _next_label(pd)
    L, e_out = new, new + 1
    if label is None:
        if loops == 0:
            raise DiagramError("no free loop to kink")
        loops -= 1
        e = e_out = new + 2
    else:
        e = int(label)
        _, head = _ends(pd, oi)
        hc, hp = head[e]
        pd[hc][hp] = e_out
    j = 3 if side else 1
    s = [e, 0, L, 0]
    s[j] = L
    s[(j + 2) % 4] = e_out
    if not first_over:
        pd.append(s)
        oi.append(j)
    else:
        pd.append([s[(j + k) % 4] for k in range(4)])
        oi.append((-j) % 4)
    return _wrap(pd, oi, loops, d)


def r2_sites(d: LinkDiagram) -> list[tuple[int, int]]:
    """Bigon faces whose two crossings can be cancelled."""
    out = []
    pd = d.pd.tolist()
    for face in _faces(pd):
        if len(face) != 2 or face[0][0] == face[1][0]:
            continue
        lab = pd[face[0][0]][face[0][1]]
        slots = [(c, p) for c, row in enumerate(pd) for p, x in enumerate(row) if x == lab]
        if slots[0][1] % 2 == slots[1][1] % 2:
            out.append((face[0][0], face[1][0]))
    return out


def r2_remove(d: LinkDiagram, site: tuple[int, int]) -> LinkDiagram:
    pd, oi, freed = _splice(d.pd.tolist(), d.over_in.tolist(), list(site))
    return _wrap(pd, oi, d.loops + freed, d)


def r2_add(d: LinkDiagram, dart1, dart2, finger_over: bool) -> LinkDiagram:
    """Push a finger from the edge of ``dart1`` across the edge of ``dart2``.

    Both darts must lie on the same face; the two new crossings bound a
    bigon with the finger over (or under) at both.
    """
    pd = d.pd.tolist()
    oi = d.over_in.tolist()
    (c1, p1), (c2, p2) = dart1, dart2
    e1, e2 = pd[c1][p1], pd[c2][p2]
    if e1 == e2:
        raise DiagramError("finger needs two distinct edges")
    occ = _occurrences(pd)
    far1 = [s for s in occ[e1] if s != (c1, p1)][0]
    far2 = [s for s in occ[e2] if s != (c2, p2)][0]
    s1 = 1 if not _is_in(oi, c1, p1) else -1
    s2 = 1 if not _is_in(oi, c2, p2) else -1
    new = _next_label(pd)
    n1, m1, n2, m2 = new, new + 1, new + 2, new + 3
    pd[far1[0]][far1[1]] = n1
    pd[far2[0]][far2[1]] = n2
    # local picture: finger rises from the first edge, crosses the second
    # at P then Q; slots listed as right, up, left, down
    P = [n2, m1, m2, e1]
    Q = [m2, m1, e2, n1]
    for lst, f_dir in ((P, 1 if s1 > 0 else 3), (Q, 3 if s1 > 0 else 1)):
        g_dir = 0 if s2 > 0 else 2
        over_dir, under_dir = (f_dir, g_dir) if finger_over else (g_dir, f_dir)
        u_in = (under_dir + 2) % 4
        o_in = (over_dir + 2) % 4
        pd.append([lst[(u_in + k) % 4] for k in range(4)])
        oi.append((o_in - u_in) % 4)
    return _wrap(pd, oi, d.loops, d)


def r3_sites(d: LinkDiagram) -> list[list]:
    """Triangle faces with a strand that is over (or under) at both ends."""
    pd = d.pd.tolist()
    occ = _occurrences(pd)
    out = []
    for face in _faces(pd):
        if len(face) != 3 or len({c for c, _ in face}) != 3:
            continue
        for c, p in face:
            a, b = occ[pd[c][p]]
            if a[1] % 2 == b[1] % 2:
                out.append(face)
                break
    return out


def r3_move(d: LinkDiagram, face) -> LinkDiagram:
    """Slide a strand across the opposite crossing of a triangle face.

    Every strand of the triangle meets its two crossings in the reverse
    order afterwards, so the in-edges and the out-edges of each strand
    swap between its two crossings.
    """
    pd = d.pd.tolist()
    oi = d.over_in.tolist()
    old = [row[:] for row in pd]
    tail, head = _ends(old, oi)
    for c, p in face:
        t = old[c][p]
        (x1, pout), (x2, pin) = tail[t], head[t]
        pd[x1][(pout + 2) % 4] = t
        pd[x1][pout] = old[x2][(pin + 2) % 4]
        pd[x2][pin] = old[x1][(pout + 2) % 4]
        pd[x2][(pin + 2) % 4] = t
    return _wrap(pd, oi, d.loops, d)


def random_reidemeister(d: LinkDiagram, count: int, seed: int = 0, max_crossings: int = 40) -> LinkDiagram:
    """Apply ``count`` random Reidemeister moves."""
    rng = np.random.default_rng(seed)
    done = 0
    while done < count:
        kind = rng.integers(5)
        grow = d.crossing_count < max_crossings
        if kind == 0 and grow:
            labels = sorted({int(x) for x in d.pd.ravel()})
            if d.loops and (not labels or rng.random() < 0.3):
                d = r1_add(d, None, int(rng.integers(2)), bool(rng.integers(2)))
            elif labels:
                d = r1_add(d, labels[rng.integers(len(labels))], int(rng.integers(2)), bool(rng.integers(2)))
            else:
                continue
        elif kind == 1:
            sites = r1_sites(d)
            if not sites:
                continue
            d = r1_remove(d, sites[rng.integers(len(sites))])
        elif kind == 2 and grow:
            faces = [f for f in _faces(d.pd.tolist()) if len({d.pd[c, p] for c, p in f}) >= 2]
            if not faces:
                continue
            f = faces[rng.integers(len(faces))]
            a, b = rng.choice(len(f), 2, replace=False)
            if d.pd[f[a]] == d.pd[f[b]]:
                continue
            d = r2_add(d, f[a], f[b], bool(rng.integers(2)))
        elif kind == 3:
            sites = r2_sites(d)
            if not sites:
                continue
            d = r2_remove(d, sites[rng.integers(len(sites))])
        elif kind == 4:
            sites = r3_sites(d)
            if not sites:
                continue
            d = r3_move(d, sites[rng.integers(len(sites))])
        else:
            continue
        done += 1
    return d


def simplify(d: LinkDiagram) -> LinkDiagram:
    """Greedy Reidemeister I/II reduction."""
    while True:
        s1 = r1_sites(d)
        if s1:
            d = r1_remove(d, s1[0])
            continue
        s2 = r2_sites(d)
        if s2:
            d = r2_remove(d, s2[0])
            continue
        return d


# --------------------------------------------------------------- builders

def mirror(d: LinkDiagram) -> LinkDiagram:
    """Reflect through the projection plane: every crossing flips."""
    pd = [[row[(o + k) % 4] for k in range(4)] for row, o in zip(d.pd.tolist(), d.over_in.tolist())]
    oi = [(-o) % 4 for o in d.over_in.tolist()]
    return _wrap(pd, oi, d.loops, d)


def connected_sum(a: LinkDiagram, b: LinkDiagram, edge_a: int = 0, edge_b: int = 0) -> LinkDiagram:
    """Band the component through ``edge_a`` to the one through ``edge_b``."""
    shift = _next_label(a.pd.tolist())
    pa = a.pd.tolist()
    pb = [[x + shift for x in row] for row in b.pd.tolist()]
    oi = a.over_in.tolist() + b.over_in.tolist()
    pd = pa + pb
    _, head = _ends(pd, oi)
    ea, eb = edge_a, edge_b + shift
    ha, hb = head[ea], head[eb]
    pd[ha[0]][ha[1]] = eb
    pd[hb[0]][hb[1]] = ea
    return _wrap(pd, oi, a.loops + b.loops, a)


def _circle(n=64, center=(0, 0, 0), radius=1.0, plane=(0, 1)):
    t = 2 * np.pi * np.arange(n) / n
    p = np.zeros((n, 3))
    p[:, plane[0]] = radius * np.cos(t)
    p[:, plane[1]] = radius * np.sin(t)
    return p + np.asarray(center, dtype=float)


def _parametric(f, n=240):
    t = 2 * np.pi * np.arange(n) / n
    return np.column_stack(f(t))


def corpus() -> dict:
    """Reference diagrams built from explicit space curves."""
    trefoil = planar_project_frame(
        [_parametric(lambda t: ((2 + np.cos(3 * t)) * np.cos(2 * t), (2 + np.cos(3 * t)) * np.sin(2 * t), np.sin(3 * t)))],
        TOP_VIEW,
    )
    figure8 = planar_project_frame(
        [_parametric(lambda t: ((2 + np.cos(2 * t)) * np.cos(3 * t), (2 + np.cos(2 * t)) * np.sin(3 * t), np.sin(4 * t)))],
        TOP_VIEW,
    )
    # positive Hopf link: the second circle runs against the first
    hopf = planar_project_frame([_circle(), _circle(center=(1, 0, 0), plane=(0, 2))[::-1]], TOP_VIEW)
    out = {
        "unknot": planar_project_frame([_circle()], TOP_VIEW),
        "trefoil": trefoil,
        "figure_eight": figure8,
        "square_knot": connected_sum(trefoil, mirror(trefoil)),
        "hopf": hopf,
    }
    for m in range(1, 5):
        out[f"unlink_{m}"] = planar_project_frame([_circle(center=(3 * k, 0, 0)) for k in range(m)], TOP_VIEW)
    return out
