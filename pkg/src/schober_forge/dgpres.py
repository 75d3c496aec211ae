"""Graded quivers with differentials on generators and dg maps between them.

A presentation is a graded quiver whose arrows are the generators; the
differential is recorded on generators and extended by the signed Leibniz
rule d(p∘q) = d(p)∘q + (-1)^{deg p} p∘d(q) in function order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .qcore import (
    Arrow,
    CompositionError,
    Path,
    PathSum,
    Quiver,
    QuiverError,
    Vertex,
)


class DegreeError(QuiverError):
    """Inhomogeneous input where a homogeneous combination is required."""


class IncompleteMapError(QuiverError):
    """A dg map is missing a generator image."""


@dataclass
class CheckReport:
    ok: bool
    failures: list[dict] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


class DgPresentation:
    """Freely generated dg category presentation on a graded quiver."""

    def __init__(self, quiver: Quiver, differential: Mapping[str, PathSum]):
        self.quiver = quiver
        self.differential = {g: ps for g, ps in differential.items()}
        for a in quiver.arrows:
            if a.degree < 0:
                raise QuiverError(f"generator {a.id} has negative degree")
            d = self.differential.get(a.id, PathSum.zero())
            if a.degree == 0 and not d.is_zero():
                raise QuiverError(f"degree-0 generator {a.id} has nonzero differential")
            for path, _ in d.terms.items():
                if path.source != a.source or path.target != a.target:
                    raise QuiverError(
                        f"differential term of {a.id} has endpoints "
                        f"{path.source}->{path.target}, expected {a.source}->{a.target}"
                    )
                if self.path_degree(path) != a.degree - 1:
                    raise QuiverError(
                        f"differential term of {a.id} has degree "
                        f"{self.path_degree(path)}, expected {a.degree - 1}"
                    )
        unknown = set(self.differential) - set(quiver.arrow_by_id)
        if unknown:
            raise QuiverError(f"differential on unknown generators {sorted(unknown)}")

    def path_degree(self, path: Path) -> int:
        return sum(self.quiver.arrow_by_id[a].degree for a in path.arrows)

    def degree_of(self, ps: PathSum) -> Optional[int]:
        """Common degree of all terms; None for 0; raises if mixed."""
        degs = {self.path_degree(p) for p in ps.terms}
        if not degs:
            return None
        if len(degs) > 1:
            raise DegreeError(f"inhomogeneous combination of degrees {sorted(degs)}")
        return degs.pop()

    def d_of_generator(self, gen: str) -> PathSum:
        if gen not in self.quiver.arrow_by_id:
            raise KeyError(f"unknown generator {gen}")
        return self.differential.get(gen, PathSum.zero())

    def generators(self) -> tuple[Arrow, ...]:
        return self.quiver.arrows

    def rename(self, object_map: Mapping[str, str], gen_map: Mapping[str, str]) -> "DgPresentation":
        """Relabel objects and generators (both maps must be injective)."""

        def ov(v: str) -> str:
            return object_map.get(v, v)

        def og(g: str) -> str:
            return gen_map.get(g, g)

        quiver = Quiver(
            [Vertex(ov(v.id), v.label) for v in self.quiver.vertices],
            [Arrow(og(a.id), ov(a.source), ov(a.target), a.label, a.degree) for a in self.quiver.arrows],
        )
        diff = {}
        for g, ps in self.differential.items():
            diff[og(g)] = PathSum(
                {
                    Path(tuple(og(x) for x in p.arrows), ov(p.source), ov(p.target)): c
                    for p, c in ps.terms.items()
                }
            )
        return DgPresentation(quiver, diff)


def d_extend(P: DgPresentation, x: PathSum) -> PathSum:
    """Extend the generator differential by the signed Leibniz rule."""
    P.degree_of(x)  # raises on inhomogeneous input
    out = PathSum.zero()
    for path, coef in x.terms.items():
        if not path.arrows:
            continue
        sign = 1
        for i, gen in enumerate(path.arrows):
            dgen = P.d_of_generator(gen)
            if not dgen.is_zero():
                prefix = path.arrows[:i]
                suffix = path.arrows[i + 1:]
                arrow = P.quiver.arrow_by_id[gen]
                left = PathSum.of(
                    Path(prefix, arrow.target, path.target)
                ) if prefix else PathSum.of(Path((), arrow.target, arrow.target))
                right = PathSum.of(
                    Path(suffix, path.source, arrow.source)
                ) if suffix else PathSum.of(Path((), arrow.source, arrow.source))
                term = left.compose(dgen).compose(right)
                out = out + term.scale(coef * sign)
            sign *= (-1) ** P.quiver.arrow_by_id[gen].degree
    return out


def check_d_squared(P: DgPresentation) -> CheckReport:
    """Verify d(d(g)) = 0 for every generator; failures carry the residue."""
    failures = []
    for a in P.generators():
        d = P.d_of_generator(a.id)
        if d.is_zero():
            continue
        dd = d_extend(P, d)
        if not dd.is_zero():
            failures.append({"generator": a.id, "residue": repr(dd)})
    return CheckReport(ok=not failures, failures=failures)


class DgMap:
    """Object map plus generator images; sign records equivariant bookkeeping."""

    def __init__(self, source: DgPresentation, target: DgPresentation,
                 object_map: Mapping[str, str], gen_map: Mapping[str, PathSum],
                 sign: int = 1):
        self.source = source
        self.target = target
        self.object_map = dict(object_map)
        self.gen_map = dict(gen_map)
        self.sign = sign
        for v in source.quiver.vertex_by_id:
            if v not in self.object_map:
                raise IncompleteMapError(f"object {v} has no image")
            if self.object_map[v] not in target.quiver.vertex_by_id:
                raise QuiverError(f"object image {self.object_map[v]} not in target")
        for g, ps in self.gen_map.items():
            a = source.quiver.arrow_by_id[g]
            deg = target.degree_of(ps)
            if deg is not None and deg != a.degree:
                raise QuiverError(f"image of {g} has degree {deg}, expected {a.degree}")
            for p in ps.terms:
                if p.source != self.object_map[a.source] or p.target != self.object_map[a.target]:
                    raise QuiverError(f"image of {g} has wrong endpoints")

    def is_total(self) -> bool:
        return all(a.id in self.gen_map for a in self.source.generators())

    def apply(self, ps: PathSum) -> PathSum:
        """Image of a path combination under generator substitution."""
        out = PathSum.zero()
        for path, coef in ps.terms.items():
            if not path.arrows:
                v = self.object_map[path.source]
                out = out + PathSum.of(Path((), v, v), coef)
                continue
            acc: Optional[PathSum] = None
            for gen in path.arrows:
                if gen not in self.gen_map:
                    raise IncompleteMapError(f"generator {gen} has no image")
                img = self.gen_map[gen]
                acc = img if acc is None else acc.compose(img)
            out = out + acc.scale(coef)
        return out


def check_dg_map(f: DgMap, allow_partial: bool = False) -> CheckReport:
    """Verify degree/endpoint preservation and f(d g) = d(f g) on generators."""
    failures = []
    skipped = []
    for a in f.source.generators():
        if a.id not in f.gen_map:
            if allow_partial:
                skipped.append(a.id)
                continue
            raise IncompleteMapError(f"generator {a.id} has no image")
        try:
            lhs = f.apply(f.source.d_of_generator(a.id))
        except IncompleteMapError as exc:
            if allow_partial:
                skipped.append(a.id)
                continue
            raise
        rhs = d_extend(f.target, f.gen_map[a.id])
        if lhs != rhs:
            failures.append({
                "generator": a.id,
                "f_of_dg": repr(lhs),
                "d_of_fg": repr(rhs),
            })
    return CheckReport(ok=not failures, failures=failures, skipped=skipped)


def compose_dg_maps(f: DgMap, g: DgMap) -> DgMap:
    """f after g (g acts first)."""
    if g.target is not f.source and g.target.quiver != f.source.quiver:
        raise QuiverError("maps are not composable")
    object_map = {v: f.object_map[g.object_map[v]] for v in g.object_map}
    gen_map = {}
    for gen, img in g.gen_map.items():
        gen_map[gen] = f.apply(img)
    return DgMap(g.source, f.target, object_map, gen_map, sign=f.sign * g.sign)


def identity_dg_map(P: DgPresentation) -> DgMap:
    return DgMap(
        P,
        P,
        {v: v for v in P.quiver.vertex_by_id},
        {a.id: PathSum.of(P.quiver.path((a.id,))) for a in P.generators()},
    )


def maps_equal(f: DgMap, g: DgMap) -> bool:
    """Generator-level equality of normalized images (sign datum ignored)."""
    if f.source.quiver != g.source.quiver or f.target.quiver != g.target.quiver:
        return False
    if f.object_map != g.object_map:
        return False
    gens = {a.id for a in f.source.generators()}
    for gen in gens:
        if f.gen_map.get(gen) != g.gen_map.get(gen):
            return False
    return True


def strict_pushout(i: DgMap, j: DgMap) -> DgPresentation:
    """Pushout of presentations along a generator-level inclusion i: E -> A.

    Every generator of E must map under i to a distinct single generator of A
    with coefficient 1; j may be any dg map E -> B.  The result keeps B as is,
    keeps the A-generators outside the image of i, and substitutes j-images
    for the identified generators inside the remaining A-differentials.
    """
    E, A, B = i.source, i.target, j.target
    if j.source.quiver != E.quiver:
        raise QuiverError("pushout legs have different sources")

    gen_image: dict[str, str] = {}
    for g in E.quiver.arrow_by_id:
        img = i.gen_map.get(g)
        if img is None:
            raise IncompleteMapError(f"inclusion undefined on {g}")
        if len(img.terms) != 1:
            raise QuiverError("inclusion is not generator-level")
        (path, coef), = img.terms.items()
        if coef != 1 or len(path.arrows) != 1:
            raise QuiverError("inclusion is not generator-level")
        gen_image[g] = path.arrows[0]
    if len(set(gen_image.values())) != len(gen_image):
        raise QuiverError("inclusion is not injective on generators")
    obj_image = dict(i.object_map)
    if len(set(obj_image.values())) != len(obj_image):
        raise QuiverError("inclusion is not injective on objects")

    identified_objects = {obj_image[v]: j.object_map[v] for v in obj_image}
    identified_gens = {gen_image[g]: j.gen_map[g] for g in gen_image}

    def map_object(v: str) -> str:
        return identified_objects.get(v, v)

    surviving_a_objects = [v for v in A.quiver.vertices if v.id not in identified_objects]
    clash_o = {v.id for v in surviving_a_objects} & set(B.quiver.vertex_by_id)
    if clash_o:
        raise QuiverError(f"object id collision in pushout: {sorted(clash_o)}")
    surviving_a_gens = [a for a in A.quiver.arrows if a.id not in identified_gens]
    clash_g = {a.id for a in surviving_a_gens} & set(B.quiver.arrow_by_id)
    if clash_g:
        raise QuiverError(f"generator id collision in pushout: {sorted(clash_g)}")

    vertices = list(B.quiver.vertices) + [Vertex(map_object(v.id), v.label) for v in surviving_a_objects]
    arrows = list(B.quiver.arrows) + [
        Arrow(a.id, map_object(a.source), map_object(a.target), a.label, a.degree)
        for a in surviving_a_gens
    ]
    quiver = Quiver(vertices, arrows)

    def translate(ps: PathSum) -> PathSum:
        out = PathSum.zero()
        for path, coef in ps.terms.items():
            if not path.arrows:
                v = map_object(path.source)
                out = out + PathSum.of(Path((), v, v), coef)
                continue
            acc: Optional[PathSum] = None
            for gen in path.arrows:
                if gen in identified_gens:
                    img = identified_gens[gen]
                else:
                    a = A.quiver.arrow_by_id[gen]
                    img = PathSum.of(Path((gen,), map_object(a.source), map_object(a.target)))
                acc = img if acc is None else acc.compose(img)
            out = out + acc.scale(coef)
        return out

    differential: dict[str, PathSum] = dict(B.differential)
    for a in surviving_a_gens:
        d = A.d_of_generator(a.id)
        if not d.is_zero():
            differential[a.id] = translate(d)
    return DgPresentation(quiver, differential)


# ---------------------------------------------------------------------------
# The 2-Calabi-Yau completion presentation of a plain quiver


def dagger_id(arrow_id: str) -> str:
    return f"{arrow_id}_dag"


def loop_id(vertex_id: str) -> str:
    return f"l_{vertex_id}"


def pi2_of_quiver(Q: Quiver) -> DgPresentation:
    """The completion with dual arrows and degree-1 loops.

    Generators: a (deg 0), a_dag (deg 0, reversed), l_v (deg 1) with
    d(l_v) = sum of incoming a∘a_dag minus outgoing a_dag∘a at v.
    """
    vertices = list(Q.vertices)
    arrows: list[Arrow] = []
    for a in Q.arrows:
        arrows.append(Arrow(a.id, a.source, a.target, a.label, 0))
        arrows.append(Arrow(dagger_id(a.id), a.target, a.source, f"{a.label}+" if a.label else "", 0))
    for v in Q.vertices:
        arrows.append(Arrow(loop_id(v.id), v.id, v.id, "", 1))
    quiver = Quiver(vertices, arrows)
    differential: dict[str, PathSum] = {}
    for v in Q.vertices:
        d = PathSum.zero()
        for a in Q.arrows:
            if a.target == v.id:
                d = d + PathSum.of(quiver.path((a.id, dagger_id(a.id))))
            if a.source == v.id:
                d = d - PathSum.of(quiver.path((dagger_id(a.id), a.id)))
        if not d.is_zero():
            differential[loop_id(v.id)] = d
    return DgPresentation(quiver, differential)


# ---------------------------------------------------------------------------
# Serialization


def presentation_payload(P: DgPresentation, classes: Optional[Mapping[str, str]] = None) -> dict:
    from .qcore import _quiver_payload, Potential

    differential = []
    for gen in sorted(P.differential):
        ps = P.differential[gen]
        if ps.is_zero():
            continue
        differential.append(
            {
                "generator": gen,
                "terms": [
                    {"num": c.numerator, "den": c.denominator, "path": list(p.arrows)}
                    for p, c in ps.items()
                ],
            }
        )
    return _quiver_payload(
        P.quiver, frozenset(), frozenset(), Potential.zero(), differential, classes
    )


def presentation_from_payload(payload: Mapping) -> DgPresentation:
    vertices = [Vertex(v["id"], v.get("label", "")) for v in payload["vertices"]]
    arrows = [
        Arrow(a["id"], a["source"], a["target"], a.get("label", ""), a.get("degree", 0))
        for a in payload["arrows"]
    ]
    quiver = Quiver(vertices, arrows)
    differential = {}
    for entry in payload.get("differential", []):
        gen = quiver.arrow_by_id[entry["generator"]]
        ps = PathSum.zero()
        for term in entry["terms"]:
            if term["path"]:
                path = quiver.path(tuple(term["path"]))
            else:
                path = quiver.path((), base=gen.source)
            ps = ps + PathSum.of(path, Fraction(term["num"], term["den"]))
        differential[entry["generator"]] = ps
    return DgPresentation(quiver, differential)
