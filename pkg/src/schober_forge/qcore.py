"""Core data model: quivers, ice quivers, paths, potentials and amalgamation.

Composition is in function order throughout: in a path ``(f, g, h)`` the
rightmost arrow ``h`` acts first.  All coefficients are exact rationals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence


class QuiverError(ValueError):
    """Malformed quiver data."""


class CompositionError(QuiverError):
    """Paths with non-matching endpoints."""


class MatchingError(QuiverError):
    """Invalid amalgamation matching."""


@dataclass(frozen=True)
class Vertex:
    id: str
    label: str = ""


@dataclass(frozen=True)
class Arrow:
    id: str
    source: str
    target: str
    label: str = ""
    degree: int = 0


class Quiver:
    """A finite quiver with unique vertex and arrow ids.

    Arrows may carry a homological degree; plain quivers leave it at 0.
    """

    def __init__(self, vertices: Iterable[Vertex], arrows: Iterable[Arrow]):
        self.vertices = tuple(vertices)
        self.arrows = tuple(arrows)
        self.vertex_by_id = {v.id: v for v in self.vertices}
        self.arrow_by_id = {a.id: a for a in self.arrows}
        if len(self.vertex_by_id) != len(self.vertices):
            raise QuiverError("duplicate vertex ids")
        if len(self.arrow_by_id) != len(self.arrows):
            raise QuiverError("duplicate arrow ids")
        for a in self.arrows:
            if a.source not in self.vertex_by_id or a.target not in self.vertex_by_id:
                raise QuiverError(f"arrow {a.id} has dangling endpoint")

    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    def arrow_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.arrows)

    def arrows_from(self, v: str) -> list[Arrow]:
        return [a for a in self.arrows if a.source == v]

    def arrows_to(self, v: str) -> list[Arrow]:
        return [a for a in self.arrows if a.target == v]

    def path(self, arrow_ids: Sequence[str], base: Optional[str] = None) -> "Path":
        """Build a validated path from arrow ids in function order."""
        if not arrow_ids:
            if base is None:
                raise CompositionError("empty path needs a base vertex")
            if base not in self.vertex_by_id:
                raise QuiverError(f"unknown vertex {base}")
            return Path((), base, base)
        arrows = []
        for aid in arrow_ids:
            if aid not in self.arrow_by_id:
                raise KeyError(f"unknown arrow id {aid}")
            arrows.append(self.arrow_by_id[aid])
        for left, right in zip(arrows, arrows[1:]):
            if left.source != right.target:
                raise CompositionError(
                    f"arrows {left.id} and {right.id} do not compose"
                )
        return Path(tuple(arrow_ids), arrows[-1].source, arrows[0].target)

    def opposite(self) -> "Quiver":
        return Quiver(
            self.vertices,
            [Arrow(a.id, a.target, a.source, a.label, a.degree) for a in self.arrows],
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Quiver)
            and self.vertices == other.vertices
            and self.arrows == other.arrows
        )

    def __hash__(self):
        return hash((self.vertices, self.arrows))

    def __repr__(self):
        return f"Quiver({len(self.vertices)} vertices, {len(self.arrows)} arrows)"


@dataclass(frozen=True)
class Path:
    """Composable arrow sequence in function order (rightmost acts first)."""

    arrows: tuple[str, ...]
    source: str
    target: str

    def is_identity(self) -> bool:
        return not self.arrows

    def __len__(self):
        return len(self.arrows)


def compose_paths(p: Path, q: Path) -> Path:
    """Compose p after q (function order): q acts first."""
    if p.source != q.target:
        raise CompositionError(
            f"cannot compose: p starts at {p.source}, q ends at {q.target}"
        )
    if not p.arrows:
        return q
    if not q.arrows:
        return p
    return Path(p.arrows + q.arrows, q.source, p.target)


class PathSum:
    """Finitely supported rational linear combination of paths."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Path, Fraction]] = None):
        clean: dict[Path, Fraction] = {}
        if terms:
            for path, coef in terms.items():
                coef = Fraction(coef)
                if coef:
                    clean[path] = coef
        self.terms = clean

    @staticmethod
    def zero() -> "PathSum":
        return PathSum()

    @staticmethod
    def of(path: Path, coef: Fraction | int = 1) -> "PathSum":
        return PathSum({path: Fraction(coef)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "PathSum") -> "PathSum":
        out = dict(self.terms)
        for path, coef in other.terms.items():
            new = out.get(path, Fraction(0)) + coef
            if new:
                out[path] = new
            else:
                out.pop(path, None)
        return PathSum(out)

    def __sub__(self, other: "PathSum") -> "PathSum":
        return self + other.scale(-1)

    def scale(self, coef: Fraction | int) -> "PathSum":
        coef = Fraction(coef)
        return PathSum({p: c * coef for p, c in self.terms.items()})

    def compose(self, other: "PathSum") -> "PathSum":
        """Bilinear extension of path composition: self after other."""
        out: dict[Path, Fraction] = {}
        for p, cp in self.terms.items():
            for q, cq in other.terms.items():
                path = compose_paths(p, q)
                new = out.get(path, Fraction(0)) + cp * cq
                if new:
                    out[path] = new
                else:
                    out.pop(path, None)
        return PathSum(out)

    def items(self) -> Iterator[tuple[Path, Fraction]]:
        return iter(sorted(self.terms.items(), key=lambda kv: (len(kv[0].arrows), kv[0].arrows)))

    def __eq__(self, other) -> bool:
        return isinstance(other, PathSum) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for path, coef in self.items():
            word = "*".join(path.arrows) if path.arrows else f"id_{path.source}"
            bits.append(f"{coef}·{word}")
        return " + ".join(bits)


@dataclass(frozen=True)
class CyclicWord:
    """A closed arrow word stored in its lexicographically least rotation."""

    arrows: tuple[str, ...]

    @staticmethod
    def canonical(arrows: Sequence[str]) -> "CyclicWord":
        if not arrows:
            raise QuiverError("cyclic words must be nonempty")
        word = tuple(arrows)
        best = min(word[i:] + word[:i] for i in range(len(word)))
        return CyclicWord(best)

    def rotations(self) -> list[tuple[str, ...]]:
        w = self.arrows
        return [w[i:] + w[:i] for i in range(len(w))]

    def __len__(self):
        return len(self.arrows)


class Potential:
    """Rational linear combination of cyclic words; keys canonical, no zeros."""

    def __init__(self, terms: Optional[Mapping[CyclicWord, Fraction]] = None):
        clean: dict[CyclicWord, Fraction] = {}
        if terms:
            for word, coef in terms.items():
                word = CyclicWord.canonical(word.arrows)
                coef = Fraction(coef)
                if not coef:
                    continue
                clean[word] = clean.get(word, Fraction(0)) + coef
                if not clean[word]:
                    del clean[word]
        self.terms = clean

    @staticmethod
    def zero() -> "Potential":
        return Potential()

    @staticmethod
    def from_cycles(cycles: Iterable[tuple[Sequence[str], Fraction | int]]) -> "Potential":
        acc: dict[CyclicWord, Fraction] = {}
        for arrows, coef in cycles:
            word = CyclicWord.canonical(arrows)
            acc[word] = acc.get(word, Fraction(0)) + Fraction(coef)
        return Potential(acc)

    def __add__(self, other: "Potential") -> "Potential":
        acc = dict(self.terms)
        for word, coef in other.terms.items():
            acc[word] = acc.get(word, Fraction(0)) + coef
        return Potential(acc)

    def scale(self, coef: Fraction | int) -> "Potential":
        coef = Fraction(coef)
        return Potential({w: c * coef for w, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def arrows_used(self) -> set[str]:
        used: set[str] = set()
        for word in self.terms:
            used.update(word.arrows)
        return used

    def sorted_terms(self) -> list[tuple[CyclicWord, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].arrows)

    def __eq__(self, other) -> bool:
        return isinstance(other, Potential) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}·({'*'.join(w.arrows)})" for w, c in self.sorted_terms())


class IceQuiver:
    """Quiver with frozen vertex/arrow subsets; frozen arrows stay frozen-to-frozen."""

    def __init__(self, quiver: Quiver, frozen_vertices: Iterable[str], frozen_arrows: Iterable[str]):
        self.quiver = quiver
        self.frozen_vertices = frozenset(frozen_vertices)
        self.frozen_arrows = frozenset(frozen_arrows)
        unknown_v = self.frozen_vertices - set(quiver.vertex_by_id)
        unknown_a = self.frozen_arrows - set(quiver.arrow_by_id)
        if unknown_v or unknown_a:
            raise QuiverError(f"frozen ids not in quiver: {sorted(unknown_v | unknown_a)}")
        for aid in self.frozen_arrows:
            a = quiver.arrow_by_id[aid]
            if a.source not in self.frozen_vertices or a.target not in self.frozen_vertices:
                raise QuiverError(f"frozen arrow {aid} has a non-frozen endpoint")

    def frozen_subquiver(self) -> Quiver:
        return Quiver(
            [v for v in self.quiver.vertices if v.id in self.frozen_vertices],
            [a for a in self.quiver.arrows if a.id in self.frozen_arrows],
        )


class IceQuiverWP:
    """Ice quiver with potential: the universal exchange format."""

    def __init__(self, ice: IceQuiver, potential: Potential):
        self.ice = ice
        self.potential = potential
        unknown = potential.arrows_used() - set(ice.quiver.arrow_by_id)
        if unknown:
            raise QuiverError(f"potential uses unknown arrows: {sorted(unknown)}")
        for word in potential.terms:
            self._check_closed(word)

    def _check_closed(self, word: CyclicWord) -> None:
        q = self.ice.quiver
        arrows = [q.arrow_by_id[aid] for aid in word.arrows]
        for left, right in zip(arrows, arrows[1:]):
            if left.source != right.target:
                raise CompositionError(f"cycle {word.arrows} is not composable")
        if arrows[-1].source != arrows[0].target:
            raise CompositionError(f"cycle {word.arrows} is not closed")

    @property
    def quiver(self) -> Quiver:
        return self.ice.quiver

    @property
    def frozen_vertices(self) -> frozenset[str]:
        return self.ice.frozen_vertices

    @property
    def frozen_arrows(self) -> frozenset[str]:
        return self.ice.frozen_arrows


@dataclass(frozen=True)
class QPMatching:
    """Identification of two frozen subquivers up to arrow reversal.

    ``vertex_bij`` maps E0 to E0'; ``arrow_bij`` maps E1 to E1'; ``shared``
    lists the arrows of E1 oriented the same way on both sides.
    """

    vertex_bij: tuple[tuple[str, str], ...]
    arrow_bij: tuple[tuple[str, str], ...]
    shared: frozenset[str] = field(default_factory=frozenset)

    @staticmethod
    def build(vertex_bij: Mapping[str, str], arrow_bij: Mapping[str, str], shared: Iterable[str] = ()) -> "QPMatching":
        return QPMatching(
            tuple(sorted(vertex_bij.items())),
            tuple(sorted(arrow_bij.items())),
            frozenset(shared),
        )

    def vertex_map(self) -> dict[str, str]:
        return dict(self.vertex_bij)

    def arrow_map(self) -> dict[str, str]:
        return dict(self.arrow_bij)


def validate_matching(P: IceQuiverWP, Pp: IceQuiverWP, m: QPMatching) -> None:
    """Check that m identifies frozen subquivers of P and P' up to orientation."""
    vmap = m.vertex_map()
    amap = m.arrow_map()
    if len(set(vmap.values())) != len(vmap) or len(set(amap.values())) != len(amap):
        raise MatchingError("matching bijections are not injective")
    for v, vp in vmap.items():
        if v not in P.frozen_vertices:
            raise MatchingError(f"vertex {v} is not frozen in the left quiver")
        if vp not in Pp.frozen_vertices:
            raise MatchingError(f"vertex {vp} is not frozen in the right quiver")
    for e, ep in amap.items():
        if e not in P.frozen_arrows:
            raise MatchingError(f"arrow {e} is not frozen in the left quiver")
        if ep not in Pp.frozen_arrows:
            raise MatchingError(f"arrow {ep} is not frozen in the right quiver")
        a = P.quiver.arrow_by_id[e]
        ap = Pp.quiver.arrow_by_id[ep]
        if a.source not in vmap or a.target not in vmap:
            raise MatchingError(f"arrow {e} leaves the matched vertex set")
        same = vmap[a.source] == ap.source and vmap[a.target] == ap.target
        reverse = vmap[a.source] == ap.target and vmap[a.target] == ap.source
        if e in m.shared:
            if not same:
                raise MatchingError(f"shared arrow {e} is not oriented the same way")
        else:
            if not reverse:
                raise MatchingError(f"non-shared arrow {e} must reverse orientation")


def cyclic_derivative(P: IceQuiverWP, arrow_id: str) -> PathSum:
    """d/da of the potential: each occurrence c = u a v contributes coef * (v u)."""
    q = P.quiver
    if arrow_id not in q.arrow_by_id:
        raise KeyError(f"unknown arrow id {arrow_id}")
    out = PathSum.zero()
    for word, coef in P.potential.terms.items():
        w = word.arrows
        n = len(w)
        for i, aid in enumerate(w):
            if aid != arrow_id:
                continue
            rest = w[i + 1:] + w[:i]
            a = q.arrow_by_id[arrow_id]
            if rest:
                path = q.path(rest)
            else:
                path = q.path((), base=a.target)
            out = out + PathSum.of(path, coef)
    return out


def necklace_sum(P: IceQuiverWP) -> PathSum:
    """Sum over arrows of a∘(dW/da) − (dW/da)∘a; identically zero by rotation."""
    q = P.quiver
    total = PathSum.zero()
    for a in q.arrows:
        d = cyclic_derivative(P, a.id)
        if d.is_zero():
            continue
        unit = PathSum.of(q.path((a.id,)))
        total = total + unit.compose(d) - d.compose(unit)
    return total


def amalgamate(P: IceQuiverWP, Pp: IceQuiverWP, m: QPMatching) -> IceQuiverWP:
    """Glue two ice quivers with potential along matched frozen subquivers.

    Vertices are pushed out over E0, arrows of E1 and E1' are deleted except
    for the shared ones, and every deleted-arrow occurrence in a potential is
    replaced by the cyclic derivative of the other potential at the matched
    arrow.  The glued locus is unfrozen.  Ids of the two inputs must be
    disjoint away from the glued locus.
    """
    validate_matching(P, Pp, m)
    vmap = m.vertex_map()
    amap = m.arrow_map()
    shared_left = m.shared
    shared_right = {amap[e] for e in shared_left}
    glued_right_vertices = set(vmap.values())

    left_q, right_q = P.quiver, Pp.quiver
    surviving_right_v = [v for v in right_q.vertices if v.id not in glued_right_vertices]
    clash_v = {v.id for v in surviving_right_v} & set(left_q.vertex_by_id)
    if clash_v:
        raise MatchingError(f"vertex id collision outside glued locus: {sorted(clash_v)}")

    deleted_left = set(amap) - shared_left
    deleted_right = set(amap.values()) - shared_right
    surviving_right_a = [a for a in right_q.arrows if a.id not in set(amap.values())]
    clash_a = {a.id for a in surviving_right_a} & set(left_q.arrow_by_id)
    if clash_a:
        raise MatchingError(f"arrow id collision outside glued locus: {sorted(clash_a)}")

    # Vertices: left ids survive; matched right vertices collapse onto them.
    right_vertex_rename = {vp: v for v, vp in vmap.items()}

    def right_v(vid: str) -> str:
        return right_vertex_rename.get(vid, vid)

    vertices = list(left_q.vertices) + surviving_right_v
    arrows = [a for a in left_q.arrows if a.id not in deleted_left]
    for a in surviving_right_a:
        arrows.append(Arrow(a.id, right_v(a.source), right_v(a.target), a.label, a.degree))

    new_quiver = Quiver(vertices, arrows)

    glued_vertices = set(vmap)
    frozen_vertices = (P.frozen_vertices - glued_vertices) | {
        v for v in Pp.frozen_vertices - glued_right_vertices
    }
    frozen_arrows = (P.frozen_arrows - set(amap)) | (
        Pp.frozen_arrows - set(amap.values())
    )

    # Potential substitution.  The derivative of the opposite potential never
    # references deleted arrows for well-formed inputs; we check and refuse
    # otherwise instead of iterating.
    right_arrow_rename = {amap[e]: e for e in shared_left}

    def subst_word(word: CyclicWord, coef: Fraction, deleted: set[str],
                   derivative: "dict[str, list[tuple[tuple[str, ...], Fraction]]]",
                   rename_arrow, rename_vertex) -> list[tuple[tuple[str, ...], Fraction]]:
        expansions: list[tuple[tuple[str, ...], Fraction]] = [((), coef)]
        for aid in word.arrows:
            if aid in deleted:
                repl = derivative[aid]
                expansions = [
                    (prefix + arrows, c * rc)
                    for prefix, c in expansions
                    for arrows, rc in repl
                ]
            else:
                expansions = [(prefix + (rename_arrow(aid),), c) for prefix, c in expansions]
        return expansions

    def derivative_table(source: IceQuiverWP, deleted: set[str], partner_of, rename_arrow) -> dict:
        table = {}
        for aid in deleted:
            d = cyclic_derivative(source, partner_of(aid))
            entries = []
            for path, c in d.terms.items():
                bad = set(path.arrows) & (deleted_left | deleted_right)
                if bad:
                    raise MatchingError(
                        f"cyclic derivative at {partner_of(aid)} references deleted arrows {sorted(bad)}"
                    )
                entries.append((tuple(rename_arrow(x) for x in path.arrows), c))
            table[aid] = entries
        return table

    # Occurrences of deleted left arrows e are replaced by d(W')/d(phi(e));
    # deleted right arrows by d(W)/d(phi^{-1}(e)).
    inv_amap = {v: k for k, v in amap.items()}
    table_left = derivative_table(Pp, deleted_left, lambda e: amap[e],
                                  lambda x: right_arrow_rename.get(x, x))
    table_right = derivative_table(P, deleted_right, lambda e: inv_amap[e], lambda x: x)

    cycles: list[tuple[tuple[str, ...], Fraction]] = []
    for word, coef in P.potential.terms.items():
        cycles.extend(subst_word(word, coef, deleted_left, table_left, lambda x: x, None))
    for word, coef in Pp.potential.terms.items():
        cycles.extend(
            subst_word(word, coef, deleted_right, table_right,
                       lambda x: right_arrow_rename.get(x, x), None)
        )
    potential = Potential.from_cycles(cycles)

    return IceQuiverWP(IceQuiver(new_quiver, frozen_vertices, frozen_arrows), potential)


def disjoint_union(P: IceQuiverWP, Pp: IceQuiverWP) -> IceQuiverWP:
    return amalgamate(P, Pp, QPMatching.build({}, {}, ()))


# ---------------------------------------------------------------------------
# Isomorphism testing


def _refine_colors(q: Quiver, frozen_v: frozenset[str], frozen_a: frozenset[str]) -> dict[str, int]:
    color = {
        v.id: (v.id in frozen_v,)
        for v in q.vertices
    }
    canon: dict = {}

    def canonical(value) -> int:
        if value not in canon:
            canon[value] = len(canon)
        return canon[value]

    cur = {v: canonical(c) for v, c in color.items()}
    for _ in range(len(q.vertices)):
        nxt = {}
        for v in q.vertex_by_id:
            outs = sorted(
                (a.id in frozen_a, a.degree, cur[a.target]) for a in q.arrows if a.source == v
            )
            ins = sorted(
                (a.id in frozen_a, a.degree, cur[a.source]) for a in q.arrows if a.target == v
            )
            nxt[v] = canonical((cur[v], tuple(outs), tuple(ins)))
        if nxt == cur:
            break
        cur = nxt
    return cur


def _arrow_class(q: Quiver, frozen: frozenset[str], colors: dict[str, int], a: Arrow):
    return (a.id in frozen, a.degree, colors[a.source], colors[a.target])


def _potential_matches(A: IceQuiverWP, B: IceQuiverWP, arrow_bij: dict[str, str],
                       allow_rescale: bool, rescale_arrows: Optional[set[str]]) -> bool:
    mapped: dict[CyclicWord, Fraction] = {}
    for word, coef in A.potential.terms.items():
        new = CyclicWord.canonical(tuple(arrow_bij[x] for x in word.arrows))
        mapped[new] = mapped.get(new, Fraction(0)) + coef
    mapped = {w: c for w, c in mapped.items() if c}
    target = B.potential.terms
    if not allow_rescale:
        return mapped == target
    if set(mapped) != set(target):
        return False
    if rescale_arrows is None:
        rescale_arrows = set(B.quiver.arrow_by_id)
    variables = sorted(rescale_arrows)
    var_index = {a: i for i, a in enumerate(variables)}
    rows: list[tuple[list[int], int]] = []
    for word, coef in mapped.items():
        other = target[word]
        if abs(coef) != abs(other):
            return False
        bit = 0 if coef == other else 1
        row = [0] * len(variables)
        for aid in word.arrows:
            if aid in var_index:
                row[var_index[aid]] ^= 1
        rows.append((row, bit))
    # GF(2) Gaussian elimination.
    pivots: dict[int, tuple[list[int], int]] = {}
    for row, bit in rows:
        row = row[:]
        for col, (prow, pbit) in pivots.items():
            if row[col]:
                row = [x ^ y for x, y in zip(row, prow)]
                bit ^= pbit
        lead = next((i for i, x in enumerate(row) if x), None)
        if lead is None:
            if bit:
                return False
            continue
        pivots[lead] = (row, bit)
    return True


def quiver_isomorphic(A: IceQuiverWP, B: IceQuiverWP, compare_potential: bool = False,
                      allow_arrow_rescale: bool = False,
                      rescale_arrows: Optional[set[str]] = None) -> Optional[dict]:
    """Search for a frozen-respecting isomorphism; returns a witness or None.

    With compare_potential the potentials must agree after relabeling, up to
    an optional sign rescale on the given arrow subset of B (all arrows when
    unspecified).
    """
    qa, qb = A.quiver, B.quiver
    if len(qa.vertices) != len(qb.vertices) or len(qa.arrows) != len(qb.arrows):
        return None
    if len(A.frozen_vertices) != len(B.frozen_vertices):
        return None
    if len(A.frozen_arrows) != len(B.frozen_arrows):
        return None

    col_a = _refine_colors(qa, A.frozen_vertices, A.frozen_arrows)
    col_b = _refine_colors(qb, B.frozen_vertices, B.frozen_arrows)

    # Color classes must correspond; colors are canonical by construction order,
    # so compare class signatures instead of raw ids.
    def signature(q, frozen_v, frozen_a, colors):
        sig = {}
        for v in q.vertex_by_id:
            outs = sorted((a.id in frozen_a, a.degree, colors[a.target]) for a in q.arrows if a.source == v)
            ins = sorted((a.id in frozen_a, a.degree, colors[a.source]) for a in q.arrows if a.target == v)
            sig[v] = (v in frozen_v, tuple(outs), tuple(ins))
        return sig

    sig_a = signature(qa, A.frozen_vertices, A.frozen_arrows, col_a)
    sig_b = signature(qb, B.frozen_vertices, B.frozen_arrows, col_b)
    from collections import Counter

    if Counter(sig_a.values()) != Counter(sig_b.values()):
        return None

    verts_a = sorted(qa.vertex_by_id, key=lambda v: (str(sig_a[v]), v))
    candidates = {v: [w for w in qb.vertex_by_id if sig_b[w] == sig_a[v]] for v in verts_a}
    order = sorted(verts_a, key=lambda v: len(candidates[v]))

    arrows_between_a: dict[tuple[str, str], list[Arrow]] = {}
    for a in qa.arrows:
        arrows_between_a.setdefault((a.source, a.target), []).append(a)
    arrows_between_b: dict[tuple[str, str], list[Arrow]] = {}
    for a in qb.arrows:
        arrows_between_b.setdefault((a.source, a.target), []).append(a)

    def compatible(v: str, w: str, vmap: dict[str, str]) -> bool:
        for u, x in vmap.items():
            for (s, t) in ((v, u), (u, v)):
                s_img = w if s == v else vmap[s]
                t_img = w if t == v else vmap[t]
                left = arrows_between_a.get((s, t), [])
                right = arrows_between_b.get((s_img, t_img), [])
                if len(left) != len(right):
                    return False
                left_kinds = sorted((a.id in A.frozen_arrows, a.degree) for a in left)
                right_kinds = sorted((a.id in B.frozen_arrows, a.degree) for a in right)
                if left_kinds != right_kinds:
                    return False
        return True

    def arrow_bijections(vmap: dict[str, str]) -> Iterator[dict[str, str]]:
        """All arrow bijections over a fixed vertex bijection (parallel arrows permute)."""
        groups: list[tuple[list[Arrow], list[Arrow]]] = []
        for (s, t), left in arrows_between_a.items():
            right = arrows_between_b.get((vmap[s], vmap[t]), [])
            if len(left) != len(right):
                return
            groups.append((left, right))

        def backtrack(i: int, acc: dict[str, str]) -> Iterator[dict[str, str]]:
            if i == len(groups):
                yield dict(acc)
                return
            left, right = groups[i]
            from itertools import permutations

            for perm in permutations(right):
                ok = True
                for a, b in zip(left, perm):
                    if (a.id in A.frozen_arrows) != (b.id in B.frozen_arrows) or a.degree != b.degree:
                        ok = False
                        break
                if not ok:
                    continue
                for a, b in zip(left, perm):
                    acc[a.id] = b.id
                yield from backtrack(i + 1, acc)
                for a, _ in zip(left, perm):
                    del acc[a.id]

        yield from backtrack(0, {})

    def search(i: int, vmap: dict[str, str], used: set[str]) -> Iterator[dict[str, str]]:
        if i == len(order):
            yield dict(vmap)
            return
        v = order[i]
        for w in candidates[v]:
            if w in used or not compatible(v, w, vmap):
                continue
            vmap[v] = w
            used.add(w)
            yield from search(i + 1, vmap, used)
            del vmap[v]
            used.remove(w)

    for vmap in search(0, {}, set()):
        for amap in arrow_bijections(vmap):
            if A.frozen_arrows != {a for a in amap if amap[a] in B.frozen_arrows}:
                # arrow_bijections already enforces frozen kinds; keep as guard
                continue
            if compare_potential and not _potential_matches(
                A, B, amap, allow_arrow_rescale, rescale_arrows
            ):
                continue
            return {"vertices": dict(vmap), "arrows": amap}
    return None


# ---------------------------------------------------------------------------
# Serialization


def _quiver_payload(quiver: Quiver, frozen_v: frozenset[str], frozen_a: frozenset[str],
                    potential: Potential, differential=None, classes=None) -> dict:
    vertices = [
        {"id": v.id, "label": v.label, "frozen": v.id in frozen_v}
        for v in sorted(quiver.vertices, key=lambda v: v.id)
    ]
    arrows = []
    for a in sorted(quiver.arrows, key=lambda a: a.id):
        entry = {
            "id": a.id,
            "source": a.source,
            "target": a.target,
            "label": a.label,
            "frozen": a.id in frozen_a,
        }
        if a.degree:
            entry["degree"] = a.degree
        if classes and a.id in classes:
            entry["class"] = classes[a.id]
        arrows.append(entry)
    payload = {
        "vertices": vertices,
        "arrows": arrows,
        "frozen_vertices": sorted(frozen_v),
        "frozen_arrows": sorted(frozen_a),
        "potential": [
            {"num": c.numerator, "den": c.denominator, "cycle": list(w.arrows)}
            for w, c in potential.sorted_terms()
        ],
    }
    if differential is not None:
        payload["differential"] = differential
    return payload


def qp_to_payload(P: IceQuiverWP) -> dict:
    return _quiver_payload(P.quiver, P.frozen_vertices, P.frozen_arrows, P.potential)


def export_json(P: IceQuiverWP) -> bytes:
    return json.dumps(qp_to_payload(P), separators=(",", ":")).encode()


def qp_from_payload(payload: Mapping) -> IceQuiverWP:
    vertices = [Vertex(v["id"], v.get("label", "")) for v in payload["vertices"]]
    arrows = [
        Arrow(a["id"], a["source"], a["target"], a.get("label", ""), a.get("degree", 0))
        for a in payload["arrows"]
    ]
    frozen_v = {v["id"] for v in payload["vertices"] if v.get("frozen")}
    frozen_a = {a["id"] for a in payload["arrows"] if a.get("frozen")}
    if "frozen_vertices" in payload:
        listed = set(payload["frozen_vertices"])
        if listed != frozen_v:
            raise QuiverError("frozen_vertices array disagrees with vertex flags")
    if "frozen_arrows" in payload:
        listed = set(payload["frozen_arrows"])
        if listed != frozen_a:
            raise QuiverError("frozen_arrows array disagrees with arrow flags")
    potential = Potential.from_cycles(
        (tuple(t["cycle"]), Fraction(t["num"], t["den"])) for t in payload.get("potential", [])
    )
    return IceQuiverWP(IceQuiver(Quiver(vertices, arrows), frozen_v, frozen_a), potential)


def import_json(data: bytes | str) -> IceQuiverWP:
    return qp_from_payload(json.loads(data))


def export_dot(P: IceQuiverWP, name: str = "quiver") -> bytes:
    lines = [f"digraph {name} {{"]
    for v in sorted(P.quiver.vertices, key=lambda v: v.id):
        shape = "box" if v.id in P.frozen_vertices else "circle"
        label = v.label or v.id
        lines.append(f'  "{v.id}" [shape={shape}, label="{label}"];')
    for a in sorted(P.quiver.arrows, key=lambda a: a.id):
        attrs = []
        if a.id in P.frozen_arrows:
            attrs.append("color=blue")
        if a.degree:
            attrs.append(f'label="deg={a.degree}"')
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f'  "{a.source}" -> "{a.target}"{suffix};')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode()
