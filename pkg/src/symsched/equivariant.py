"""Solving for equivariant maps between group actions via coset maps.

A map f between acted sets satisfies f(g.x) = rho(g).f(x). Solutions are
assembled orbit by orbit: each source orbit picks a compatible target orbit
and one coset-map parameter; evaluation walks a witness word to the orbit
anchor. A brute-force enumerator over raw functions serves as the oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .actions import GroupAction, is_subgroup, orbits, stabilizer
from .errors import (
    CapExceeded,
    NonUniformFiber,
    NotASubgroup,
    NotTransitive,
    OracleCapExceeded,
    StructureMismatch,
)
from .groups import FiniteGroup, Homomorphism, apply_hom, canonical_key

DEFAULT_SOLUTION_LIMIT = 10 ** 4
DEFAULT_ORACLE_CAP = 10 ** 6


def identity_hom(group: FiniteGroup) -> Homomorphism:
    return Homomorphism(source=group, target=group,
                        images=tuple(group.generators), validated=True)


@dataclass(frozen=True)
class CosetMapParam:
    """Parameter fixing one equivariant coset map G/L -> H/K: gL -> rho(g)aK."""

    a: object
    source_stab: FiniteGroup
    target_stab: FiniteGroup
    hom: Homomorphism


def coset_map_exists(G, H, rho, L, K, a) -> bool:
    """True iff a^{-1} rho(L) a is contained in K."""
    if not is_subgroup(G, L):
        raise NotASubgroup("L is not a subgroup of G")
    if not is_subgroup(H, K):
        raise NotASubgroup("K is not a subgroup of H")
    a_inv = H.inv(a)
    K_set = K.element_set()
    for l in L.elements():
        conj = H.op(a_inv, H.op(apply_hom(rho, l), a))
        if conj not in K_set:
            return False
    return True


def enumerate_coset_maps(G, H, rho, L, K) -> tuple[CosetMapParam, ...]:
    """One parameter per coset aK of K that satisfies the existence test."""
    if not is_subgroup(G, L):
        raise NotASubgroup("L is not a subgroup of G")
    if not is_subgroup(H, K):
        raise NotASubgroup("K is not a subgroup of H")
    seen = set()
    params = []
    for a in H.elements():
        rep = min((H.op(a, k) for k in K.elements()), key=canonical_key)
        if rep in seen:
            continue
        seen.add(rep)
        if coset_map_exists(G, H, rho, L, K, rep):
            params.append(CosetMapParam(a=rep, source_stab=L, target_stab=K, hom=rho))
    params.sort(key=lambda p: canonical_key(p.a))
    return tuple(params)


@dataclass(frozen=True)
class OrbitComponent:
    anchor_x: object
    anchor_y: object
    target_orbit: int
    param: CosetMapParam


class EquivariantMap:
    """A solved map, evaluated through orbit witnesses."""

    def __init__(self, source: GroupAction, target: GroupAction,
                 rho: Homomorphism, components: dict):
        self.source = source
        self.target = target
        self.rho = rho
        self.components = components  # orbit index -> OrbitComponent
        self._orbit_of = {}
        self._witness = {}
        for idx, orb in enumerate(orbits(source)):
            wit = source.orbit_witnesses(components[idx].anchor_x)
            for x in orb:
                self._orbit_of[x] = idx
                self._witness[x] = wit[x]

    def eval(self, x):
        if x not in self._orbit_of:
            raise StructureMismatch(f"{x!r} is not a source point")
        comp = self.components[self._orbit_of[x]]
        g = self._witness[x]
        moved = self.target.group.op(apply_hom(self.rho, g), comp.param.a)
        return self.target.apply(moved, comp.anchor_y)

    def eval_via_witness(self, x, g):
        """Evaluate through an explicit witness g with x = g . anchor."""
        comp = self.components[self._orbit_of[x]]
        moved = self.target.group.op(apply_hom(self.rho, g), comp.param.a)
        return self.target.apply(moved, comp.anchor_y)

    def as_mapping(self) -> tuple:
        return tuple((x, self.eval(x)) for x in self.source.set.points)

    def satisfies_square(self) -> bool:
        for g in self.source.group.elements():
            hg = apply_hom(self.rho, g)
            for x in self.source.set.points:
                if self.eval(self.source.apply(g, x)) != self.target.apply(hg, self.eval(x)):
                    return False
        return True


def iter_equivariant(source: GroupAction, target: GroupAction, rho: Homomorphism):
    """Lazily yield all equivariant maps for the given homomorphism."""
    src_orbits = orbits(source)
    tgt_orbits = orbits(target)
    anchors_x = [orb[0] for orb in src_orbits]
    anchors_y = [orb[0] for orb in tgt_orbits]
    stabs_x = [stabilizer(source, a) for a in anchors_x]
    stabs_y = [stabilizer(target, a) for a in anchors_y]

    per_orbit_choices = []
    for i in range(len(src_orbits)):
        choices = []
        for j in range(len(tgt_orbits)):
            for param in enumerate_coset_maps(
                source.group, target.group, rho, stabs_x[i], stabs_y[j]
            ):
                choices.append(OrbitComponent(
                    anchor_x=anchors_x[i], anchor_y=anchors_y[j],
                    target_orbit=j, param=param,
                ))
        if not choices:
            return
        per_orbit_choices.append(choices)

    for combo in itertools.product(*per_orbit_choices):
        components = dict(enumerate(combo))
        candidate = EquivariantMap(source, target, rho, components)
        # orbit-wise candidates are complete; the square check filters the
        # few assemblies whose coset parameter is incompatible with the anchor
        if candidate.satisfies_square():
            yield candidate


def solve_equivariant(source: GroupAction, target: GroupAction, rho: Homomorphism,
                      limit: int = DEFAULT_SOLUTION_LIMIT) -> tuple:
    """All equivariant maps, in canonical order, up to limit."""
    found = []
    for m in iter_equivariant(source, target, rho):
        found.append(m)
        if len(found) > limit:
            raise CapExceeded(f"more than {limit} solutions; stream iter_equivariant instead")
    found.sort(key=lambda m: tuple(canonical_key_point(y) for _, y in m.as_mapping()))
    return tuple(found)


def canonical_key_point(x):
    return (str(type(x)), repr(x))


def brute_force_equivariant(source: GroupAction, target: GroupAction,
                            rho: Homomorphism,
                            oracle_cap: int = DEFAULT_ORACLE_CAP) -> tuple:
    """Exhaustively enumerate mappings satisfying the defining square.

    Transitive sources are scanned by anchor image only; otherwise every
    function from source points to target points is tried, capped.
    """
    X = source.set.points
    Y = target.set.points
    if not X:
        return ((),)
    group_elems = source.group.elements()

    def square_holds(mapping: dict) -> bool:
        for g in group_elems:
            hg = apply_hom(rho, g)
            for x in X:
                if mapping[source.apply(g, x)] != target.apply(hg, mapping[x]):
                    return False
        return True

    if source.is_transitive():
        x0 = X[0]
        witnesses = source.orbit_witnesses(x0)
        found = []
        for y0 in Y:
            mapping = {}
            ok = True
            for x, g in witnesses.items():
                y = target.apply(apply_hom(rho, g), y0)
                if x in mapping and mapping[x] != y:
                    ok = False
                    break
                mapping[x] = y
            if ok and square_holds(mapping):
                found.append(tuple((x, mapping[x]) for x in X))
        return tuple(sorted(found, key=lambda mp: tuple(canonical_key_point(y) for _, y in mp)))

    total = len(Y) ** len(X)
    if total > oracle_cap:
        raise OracleCapExceeded(f"{total} candidate functions exceed cap {oracle_cap}")
    found = []
    for images in itertools.product(Y, repeat=len(X)):
        mapping = dict(zip(X, images))
        if square_holds(mapping):
            found.append(tuple((x, mapping[x]) for x in X))
    return tuple(sorted(found, key=lambda mp: tuple(canonical_key_point(y) for _, y in mp)))


def preimage_size(emap: EquivariantMap) -> int:
    """|G/L| / |H/K| for transitive source and target actions."""
    if not emap.source.is_transitive():
        raise NotTransitive("source action is not transitive")
    if not emap.target.is_transitive():
        raise NotTransitive("target action is not transitive")
    comp = emap.components[0]
    g_cosets = emap.source.group.order() // comp.param.source_stab.order()
    h_cosets = emap.target.group.order() // comp.param.target_stab.order()
    if g_cosets % h_cosets:
        raise NonUniformFiber(
            f"|G/L| = {g_cosets} is not a multiple of |H/K| = {h_cosets}"
        )
    return g_cosets // h_cosets
