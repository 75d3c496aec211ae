"""Dynkin types with fixed orientations, root systems, and the involution machinery.

Vertex numbering and orientations follow the defining tables: type A is the
linear quiver 1 -> 2 -> ... -> n, type D branches at n-2, and the E types
branch at 3 (E6), 4 (E7) and 5 (E8).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

from .dgpres import DgMap, DgPresentation, dagger_id, loop_id, pi2_of_quiver
from .qcore import Arrow, Path, PathSum, Quiver, QuiverError, Vertex

DEFAULT_RANK_CAP = 8
RANK_CAP_ENV = "SCHOBER_FORGE_RANK_CAP"


def rank_cap() -> int:
    try:
        return int(os.environ.get(RANK_CAP_ENV, DEFAULT_RANK_CAP))
    except ValueError:
        return DEFAULT_RANK_CAP


@dataclass(frozen=True)
class DynkinDatum:
    family: str  # "A", "D" or "E"
    rank: int

    def __post_init__(self):
        if self.family == "A":
            if self.rank < 1:
                raise QuiverError("type A needs rank >= 1")
        elif self.family == "D":
            if self.rank < 4:
                raise QuiverError("type D needs rank >= 4")
        elif self.family == "E":
            if self.rank not in (6, 7, 8):
                raise QuiverError("type E has ranks 6, 7, 8")
        else:
            raise QuiverError(f"unknown Dynkin family {self.family}")
        if self.rank > rank_cap():
            raise QuiverError(
                f"rank {self.rank} exceeds the configured cap {rank_cap()}"
            )

    @property
    def tag(self) -> str:
        return f"{self.family}{self.rank}"

    def __str__(self):
        return self.tag


def parse_type(tag: str) -> DynkinDatum:
    tag = tag.strip().upper()
    if len(tag) < 2 or tag[0] not in "ADE":
        raise QuiverError(f"bad Dynkin type tag {tag!r}")
    try:
        rank = int(tag[1:])
    except ValueError:
        raise QuiverError(f"bad Dynkin type tag {tag!r}")
    return DynkinDatum(tag[0], rank)


def all_types(max_rank: int = 8) -> list[DynkinDatum]:
    types = [DynkinDatum("A", n) for n in range(1, max_rank + 1)]
    types += [DynkinDatum("D", n) for n in range(4, max_rank + 1)]
    types += [DynkinDatum("E", n) for n in (6, 7, 8) if n <= max_rank]
    return types


def _edges(t: DynkinDatum) -> list[tuple[str, int, int]]:
    """Arrow list (id, source, target) in the fixed orientation."""
    n = t.rank
    if t.family == "A":
        return [(f"a{i}", i, i + 1) for i in range(1, n)]
    if t.family == "D":
        edges = [(f"a{i}", i, i + 1) for i in range(1, n - 1)]
        edges.append((f"a{n-1}", n - 2, n))
        return edges
    branch = {6: 3, 7: 4, 8: 5}[n]
    edges = [(f"a{i}", i, i + 1) for i in range(1, n - 1)]
    edges.append((f"a{n-1}", branch, n))
    return edges


def dynkin_quiver(t: DynkinDatum) -> Quiver:
    vertices = [Vertex(str(i), str(i)) for i in range(1, t.rank + 1)]
    arrows = [Arrow(aid, str(s), str(tt), aid) for aid, s, tt in _edges(t)]
    return Quiver(vertices, arrows)


# ---------------------------------------------------------------------------
# Root systems and the longest element


class RootSystem:
    """Positive roots over the simple-root basis, generated by reflections."""

    def __init__(self, t: DynkinDatum):
        self.type = t
        n = t.rank
        adj = [[0] * n for _ in range(n)]
        for _, s, tt in _edges(t):
            adj[s - 1][tt - 1] = adj[tt - 1][s - 1] = 1
        self.cartan = [
            [2 if i == j else -adj[i][j] for j in range(n)] for i in range(n)
        ]
        self.positive_roots = self._closure()

    def _reflect(self, vec: tuple[int, ...], i: int) -> tuple[int, ...]:
        pairing = sum(self.cartan[i][j] * vec[j] for j in range(len(vec)))
        out = list(vec)
        out[i] -= pairing
        return tuple(out)

    def _closure(self) -> list[tuple[int, ...]]:
        n = self.type.rank
        simples = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
        seen = set(simples)
        queue = list(simples)
        while queue:
            vec = queue.pop()
            for i in range(n):
                img = self._reflect(vec, i)
                if all(x >= 0 for x in img) and img not in seen:
                    seen.add(img)
                    queue.append(img)
        return sorted(seen)

    def count(self) -> int:
        return len(self.positive_roots)


def positive_roots(t: DynkinDatum) -> RootSystem:
    return RootSystem(t)


def minus_w0_permutation(t: DynkinDatum) -> dict[int, int]:
    """The permutation i -> index of -w0(alpha_i), via chamber descent.

    Starting from a strictly dominant pairing vector, reflect at any violated
    wall until antidominant; the accumulated word is w0.  The result is
    verified against w0(Phi+) = Phi-.
    """
    rs = RootSystem(t)
    n = t.rank
    cartan = rs.cartan
    pairing = [1] * n
    word: list[int] = []
    guard = rs.count() + 1
    while True:
        i = next((k for k in range(n) if pairing[k] > 0), None)
        if i is None:
            break
        if len(word) > guard:
            raise RuntimeError("chamber descent failed to terminate")
        word.append(i)
        p_i = pairing[i]
        pairing = [pairing[j] - p_i * cartan[j][i] for j in range(n)]

    columns = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    for i in word:
        columns = [rs._reflect(col, i) for col in columns]

    image_of_positive = {
        tuple(-x for x in _apply_columns(columns, root)) for root in rs.positive_roots
    }
    if image_of_positive != set(rs.positive_roots):
        raise RuntimeError("computed w0 does not map positive roots to negatives")

    perm = {}
    for i, col in enumerate(columns):
        neg = tuple(-x for x in col)
        ones = [j for j, x in enumerate(neg) if x == 1]
        if sum(abs(x) for x in neg) != 1 or len(ones) != 1:
            raise RuntimeError("-w0 does not permute the simple roots")
        perm[i + 1] = ones[0] + 1
    return perm


def _apply_columns(columns, root):
    n = len(root)
    out = [0] * n
    for j in range(n):
        if root[j]:
            for k in range(n):
                out[k] += root[j] * columns[j][k]
    return tuple(out)


# ---------------------------------------------------------------------------
# Pi2 and the involution sigma


def pi2(t: DynkinDatum) -> DgPresentation:
    return pi2_of_quiver(dynkin_quiver(t))


def sigma_vertex(t: DynkinDatum, i: int) -> int:
    n = t.rank
    if t.family == "A":
        return n - i + 1
    if t.family == "D":
        if n % 2 == 0:
            return i
        if i == n - 1:
            return n
        if i == n:
            return n - 1
        return i
    if n == 6:
        return 6 if i == 6 else 6 - i
    return i


def _sigma_arrow(t: DynkinDatum, j: int) -> tuple[int, bool, int]:
    """Image of the generator a_j: (arrow index, to_dagger, sign)."""
    n = t.rank
    if t.family == "A":
        return (n - j, True, 1)
    if t.family == "D":
        if n % 2 == 0:
            return (j, False, 1)
        if j == n - 2:
            return (n - 1, False, 1)
        if j == n - 1:
            return (n - 2, False, 1)
        return (j, False, 1)
    if n == 6:
        if j == 5:
            return (5, False, 1)
        return (5 - j, True, 1)
    return (j, False, 1)


def _sigma_dagger(t: DynkinDatum, j: int) -> tuple[int, bool, int]:
    """Image of the generator a_j_dag: (arrow index, to_dagger, sign)."""
    n = t.rank
    if t.family == "A":
        return (n - j, False, 1)
    if t.family == "D":
        if n % 2 == 0:
            return (j, True, -1)
        if j == n - 2:
            return (n - 1, True, -1)
        if j == n - 1:
            return (n - 2, True, -1)
        return (j, True, -1)
    if n == 6:
        if j == 5:
            return (5, True, -1)
        return (5 - j, False, 1)
    return (j, True, -1)


def sigma(t: DynkinDatum) -> DgMap:
    """The defining involution of the completion, as a dg map."""
    P = pi2(t)
    q = P.quiver
    object_map = {str(i): str(sigma_vertex(t, i)) for i in range(1, t.rank + 1)}
    gen_map: dict[str, PathSum] = {}
    for j in range(1, t.rank):
        idx, dag, sgn = _sigma_arrow(t, j)
        target_gen = dagger_id(f"a{idx}") if dag else f"a{idx}"
        gen_map[f"a{j}"] = PathSum.of(q.path((target_gen,)), sgn)
        idx, dag, sgn = _sigma_dagger(t, j)
        target_gen = dagger_id(f"a{idx}") if dag else f"a{idx}"
        gen_map[dagger_id(f"a{j}")] = PathSum.of(q.path((target_gen,)), sgn)
    for i in range(1, t.rank + 1):
        gen_map[loop_id(str(i))] = PathSum.of(
            q.path((loop_id(str(sigma_vertex(t, i))),)), -1
        )
    return DgMap(P, P, object_map, gen_map)


def psi(E: Quiver, Ep: Quiver, vertex_bij: dict[str, str], arrow_bij: dict[str, str],
        shared: frozenset[str] | set[str]) -> DgMap:
    """The orientation-change dg isomorphism between completions.

    Shared arrows map by a -> a, a_dag -> -a_dag; reversed arrows swap a and
    a_dag; every loop picks up a sign.
    """
    P, Pp = pi2_of_quiver(E), pi2_of_quiver(Ep)
    qp = Pp.quiver
    gen_map: dict[str, PathSum] = {}
    for a in E.arrows:
        image = arrow_bij[a.id]
        if a.id in shared:
            gen_map[a.id] = PathSum.of(qp.path((image,)))
            gen_map[dagger_id(a.id)] = PathSum.of(qp.path((dagger_id(image),)), -1)
        else:
            gen_map[a.id] = PathSum.of(qp.path((dagger_id(image),)))
            gen_map[dagger_id(a.id)] = PathSum.of(qp.path((image,)))
    for v in E.vertices:
        gen_map[loop_id(v.id)] = PathSum.of(qp.path((loop_id(vertex_bij[v.id]),)), -1)
    return DgMap(P, Pp, object_map=dict(vertex_bij), gen_map=gen_map)


def xi_decomposition(t: DynkinDatum):
    """The factorization data of sigma: (E', matching maps, xi).

    Returns (Ep, vertex_bij, arrow_bij, shared, xi) with xi a dg map
    pi2(Ep) -> pi2(t) induced by a quiver isomorphism; the composite of xi
    with psi along the matching equals sigma.
    """
    E = dynkin_quiver(t)
    n = t.rank
    ident_v = {str(i): str(i) for i in range(1, n + 1)}
    ident_a = {a.id: a.id for a in E.arrows}

    if t.family == "A":
        Ep = Quiver(
            E.vertices,
            [Arrow(f"a{i}", str(i + 1), str(i), f"a{i}") for i in range(1, n)],
        )
        shared: frozenset[str] = frozenset()
        xi_vmap = {str(i): str(n + 1 - i) for i in range(1, n + 1)}
        xi_arrow = {f"a{i}": f"a{n - i}" for i in range(1, n)}
    elif t.family == "E" and n == 6:
        Ep = Quiver(
            E.vertices,
            [
                Arrow("a1", "5", "4", "a1"),
                Arrow("a2", "4", "3", "a2"),
                Arrow("a3", "3", "2", "a3"),
                Arrow("a4", "2", "1", "a4"),
                Arrow("a5", "3", "6", "a5"),
            ],
        )
        ident_a = {"a1": "a4", "a2": "a3", "a3": "a2", "a4": "a1", "a5": "a5"}
        shared = frozenset({"a5"})
        xi_vmap = {str(i): str(sigma_vertex(t, i)) for i in range(1, 7)}
        xi_arrow = {f"a{i}": f"a{i}" for i in range(1, 6)}
    elif t.family == "D" and n % 2 == 1:
        Ep = E
        shared = frozenset(a.id for a in E.arrows)
        xi_vmap = {str(i): str(sigma_vertex(t, i)) for i in range(1, n + 1)}
        xi_arrow = {f"a{i}": f"a{i}" for i in range(1, n)}
        xi_arrow[f"a{n-2}"] = f"a{n-1}"
        xi_arrow[f"a{n-1}"] = f"a{n-2}"
    else:
        # D even, E7, E8: xi is the identity and sigma = psi.
        Ep = E
        shared = frozenset(a.id for a in E.arrows)
        xi_vmap = ident_v
        xi_arrow = {a.id: a.id for a in E.arrows}

    P_target = pi2(t)
    P_source = pi2_of_quiver(Ep)
    q = P_target.quiver
    gen_map: dict[str, PathSum] = {}
    for a in Ep.arrows:
        gen_map[a.id] = PathSum.of(q.path((xi_arrow[a.id],)))
        gen_map[dagger_id(a.id)] = PathSum.of(q.path((dagger_id(xi_arrow[a.id]),)))
    for v in Ep.vertices:
        gen_map[loop_id(v.id)] = PathSum.of(q.path((loop_id(xi_vmap[v.id]),)))
    xi = DgMap(P_source, P_target, xi_vmap, gen_map)
    return Ep, ident_v, ident_a, shared, xi


# ---------------------------------------------------------------------------
# The windowed infinite completion


@dataclass(frozen=True)
class Window:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise QuiverError("empty window")

    def levels(self) -> range:
        return range(self.lo, self.hi + 1)

    def crossing_levels(self) -> range:
        return range(self.lo, self.hi)


def _obj(x: str, i: int) -> str:
    return f"{x}@{i}"


def _lvl(gen: str, i: int) -> str:
    return f"{gen}@{i}"


def tilde_pi2(t: DynkinDatum, w: Window) -> DgPresentation:
    """Window of the infinite completion: objects are (vertex, level) pairs."""
    I = dynkin_quiver(t)
    vertices = [
        Vertex(_obj(v.id, i), f"({i},{v.id})") for i in w.levels() for v in I.vertices
    ]
    arrows: list[Arrow] = []
    for i in w.levels():
        for a in I.arrows:
            arrows.append(Arrow(_lvl(a.id, i), _obj(a.source, i), _obj(a.target, i), a.label, 0))
    for i in w.crossing_levels():
        for a in I.arrows:
            arrows.append(
                Arrow(_lvl(dagger_id(a.id), i), _obj(a.target, i), _obj(a.source, i + 1), "", 0)
            )
        for v in I.vertices:
            arrows.append(
                Arrow(_lvl(loop_id(v.id), i), _obj(v.id, i), _obj(v.id, i + 1), "", 1)
            )
    quiver = Quiver(vertices, arrows)
    differential: dict[str, PathSum] = {}
    for i in w.crossing_levels():
        for v in I.vertices:
            d = PathSum.zero()
            for a in I.arrows:
                if a.target == v.id:
                    d = d + PathSum.of(
                        quiver.path((_lvl(a.id, i + 1), _lvl(dagger_id(a.id), i)))
                    )
                if a.source == v.id:
                    d = d - PathSum.of(
                        quiver.path((_lvl(dagger_id(a.id), i), _lvl(a.id, i)))
                    )
            if not d.is_zero():
                differential[_lvl(loop_id(v.id), i)] = d
    return DgPresentation(quiver, differential)


@dataclass
class PartialDgMap:
    """A dg map together with the generators whose images left the window."""

    map: DgMap
    out_of_window: list[str]


def translation(t: DynkinDatum, w: Window, shift: int = 1) -> PartialDgMap:
    """The level translation, landing in the shifted window."""
    source = tilde_pi2(t, w)
    target_window = Window(w.lo + shift, w.hi + shift)
    target = tilde_pi2(t, target_window)
    I = dynkin_quiver(t)
    object_map = {
        _obj(v.id, i): _obj(v.id, i + shift) for i in w.levels() for v in I.vertices
    }
    gen_map: dict[str, PathSum] = {}
    for a in source.quiver.arrows:
        base, level = a.id.rsplit("@", 1)
        gen_map[a.id] = PathSum.of(target.quiver.path((_lvl(base, int(level) + shift),)))
    return PartialDgMap(DgMap(source, target, object_map, gen_map), [])


def _sigma_tilde_object(t: DynkinDatum, i: int, x: int) -> tuple[int, int]:
    n = t.rank
    if t.family == "A":
        return (i + x, n + 1 - x)
    if t.family == "D":
        return (i + n - 1, sigma_vertex(t, x))
    if n == 6:
        if x == 6:
            return (i + 6, 6)
        return (i + 3 + x, 6 - x)
    if n == 7:
        return (i + 9, x)
    return (i + 15, x)


def _sigma_tilde_gen(t: DynkinDatum, kind: str, j_or_x: int, i: int):
    """Image data for a generator at level i: (kind, index, level, sign).

    kind is "a", "dag" or "l"; indices refer to arrows a_j or vertices x.
    """
    n = t.rank
    if t.family == "A":
        if kind == "a":
            return ("dag", n - j_or_x, i + j_or_x, 1)
        if kind == "dag":
            return ("a", n - j_or_x, i + j_or_x + 1, 1)
        return ("l", n + 1 - j_or_x, i + j_or_x, -1)
    if t.family == "D":
        shift = n - 1
        if n % 2 == 0:
            swap = {j: j for j in range(1, n)}
            lsign = 1
        else:
            swap = {j: j for j in range(1, n)}
            swap[n - 2], swap[n - 1] = n - 1, n - 2
            lsign = 1
        if kind == "a":
            return ("a", swap[j_or_x], i + shift, 1)
        if kind == "dag":
            return ("dag", swap[j_or_x], i + shift, 1)
        return ("l", sigma_vertex(t, j_or_x), i + shift, lsign)
    if n == 6:
        if kind == "a":
            if j_or_x == 5:
                return ("a", 5, i + 6, 1)
            return ("dag", 5 - j_or_x, i + 3 + j_or_x, 1)
        if kind == "dag":
            if j_or_x == 5:
                return ("dag", 5, i + 6, -1)
            return ("a", 5 - j_or_x, i + 4 + j_or_x, 1)
        lvl, _ = _sigma_tilde_object(t, i, j_or_x)
        return ("l", sigma_vertex(t, j_or_x), lvl, -1)
    shift = 9 if n == 7 else 15
    if kind == "a":
        return ("a", j_or_x, i + shift, 1)
    if kind == "dag":
        return ("dag", j_or_x, i + shift, 1)
    return ("l", j_or_x, i + shift, 1)


def sigma_tilde(t: DynkinDatum, w: Window, target_window: Window | None = None) -> PartialDgMap:
    """The lift of sigma to the windowed completion.

    When no target window is supplied, a minimal covering window is computed
    so the map is total; with a tight window, out-of-range generators are
    reported instead of mapped.
    """
    n = t.rank
    source = tilde_pi2(t, w)
    I = dynkin_quiver(t)
    objects = [(i, int(v.id)) for i in w.levels() for v in I.vertices]
    images = [_sigma_tilde_object(t, i, x) for i, x in objects]
    if target_window is None:
        lo = min(i for i, _ in images)
        hi = max(i for i, _ in images)
        hi = max(hi, max(_sigma_tilde_gen(t, "l", x, i)[2] + 1
                         for i in w.crossing_levels() for x in range(1, n + 1)) if w.lo < w.hi else hi)
        for i in w.crossing_levels():
            for j in range(1, n):
                hi = max(hi, _sigma_tilde_gen(t, "dag", j, i)[2])
        for i in w.levels():
            for j in range(1, n):
                kind, _, lvl, _ = _sigma_tilde_gen(t, "a", j, i)
                hi = max(hi, lvl + 1 if kind == "dag" else lvl)
        target_window = Window(lo, hi)
    target = tilde_pi2(t, target_window)

    object_map = {}
    for (i, x), (ii, xx) in zip(objects, images):
        if not (target_window.lo <= ii <= target_window.hi):
            raise QuiverError("target window does not contain all object images")
        object_map[_obj(str(x), i)] = _obj(str(xx), ii)

    def in_target(kind: str, lvl: int) -> bool:
        if kind == "a":
            return target_window.lo <= lvl <= target_window.hi
        return target_window.lo <= lvl < target_window.hi

    gen_map: dict[str, PathSum] = {}
    skipped: list[str] = []
    for a in source.quiver.arrows:
        base, level = a.id.rsplit("@", 1)
        i = int(level)
        if base.startswith("l_"):
            kind, idx = "l", int(base[2:])
        elif base.endswith("_dag"):
            kind, idx = "dag", int(base[1:-4])
        else:
            kind, idx = "a", int(base[1:])
        okind, oidx, olvl, osign = _sigma_tilde_gen(t, kind, idx, i)
        if not in_target(okind, olvl):
            skipped.append(a.id)
            continue
        if okind == "a":
            gid = _lvl(f"a{oidx}", olvl)
        elif okind == "dag":
            gid = _lvl(dagger_id(f"a{oidx}"), olvl)
        else:
            gid = _lvl(loop_id(str(oidx)), olvl)
        gen_map[a.id] = PathSum.of(target.quiver.path((gid,)), osign)

    crossing_sign = -1 if (t.family == "D" or (t.family == "E" and n in (7, 8))) else 1
    return PartialDgMap(
        DgMap(source, target, object_map, gen_map, sign=crossing_sign), skipped
    )


def orbit_project(t: DynkinDatum, w: Window) -> DgMap:
    """Collapse levels: (i,x) -> x, a@i -> a, daggers and loops likewise."""
    source = tilde_pi2(t, w)
    target = pi2(t)
    I = dynkin_quiver(t)
    object_map = {_obj(v.id, i): v.id for i in w.levels() for v in I.vertices}
    gen_map = {}
    for a in source.quiver.arrows:
        base, _ = a.id.rsplit("@", 1)
        gen_map[a.id] = PathSum.of(target.quiver.path((base,)))
    return DgMap(source, target, object_map, gen_map)


def is_crossing_generator(gen_id: str) -> bool:
    """Crossing generators of the windowed completion: daggers and loops."""
    base = gen_id.rsplit("@", 1)[0]
    return base.endswith("_dag") or base.startswith("l_")
