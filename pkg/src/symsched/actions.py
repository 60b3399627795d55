"""Group actions on finite point sets: orbits, stabilizers, cosets.

An action is specified on generators only and extended along generator
words, which is also how every action in the schedule models is defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CapExceeded, NotASubgroup, StructureMismatch
from .groups import FiniteGroup, canonical_key, generated_subgroup


@dataclass(frozen=True)
class ActionSet:
    """A labeled finite set of distinct, hashable point identifiers."""

    label: str
    points: tuple

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise StructureMismatch("point identifiers must be distinct")

    def index(self, x):
        return self.points.index(x)


class GroupAction:
    """Action of a finite group on an ActionSet, given per generator."""

    def __init__(self, group: FiniteGroup, point_set: ActionSet, act_on_generator):
        self.group = group
        self.set = point_set
        self._gen_maps = []
        pts = point_set.points
        for g in group.generators:
            table = {x: act_on_generator(g, x) for x in pts}
            if sorted(map(_pt_key, table.values())) != sorted(map(_pt_key, pts)):
                raise StructureMismatch(f"generator {g!r} does not act bijectively")
            self._gen_maps.append(table)
        self._elem_maps: dict = {}

    def apply(self, elem, x):
        table = self._element_map(elem)
        return table[x]

    def _element_map(self, elem) -> dict:
        if elem not in self._elem_maps:
            words = self.group.element_words()
            if elem not in words:
                raise StructureMismatch(f"{elem!r} not in the enumerated group")
            table = {x: x for x in self.set.points}
            # left-to-right word w means elem = g_w0 * g_w1 * ...; with the
            # right factor acting first, apply maps right-to-left
            for gi in reversed(words[elem]):
                gm = self._gen_maps[gi]
                table = {x: gm[y] for x, y in table.items()}
            self._elem_maps[elem] = table
        return self._elem_maps[elem]

    def validate(self):
        """Check identity and compatibility laws over the whole group."""
        ident = self.group.identity()
        for x in self.set.points:
            assert self.apply(ident, x) == x
        elems = self.group.elements()
        for g in elems:
            for h in elems:
                gh = self.group.op(g, h)
                for x in self.set.points:
                    if self.apply(gh, x) != self.apply(g, self.apply(h, x)):
                        raise StructureMismatch(f"not an action at ({g!r}, {h!r}, {x!r})")
        return True

    def orbit(self, x) -> tuple:
        reach = {x}
        frontier = [x]
        while frontier:
            nxt = []
            for y in frontier:
                for gm in self._gen_maps:
                    z = gm[y]
                    if z not in reach:
                        reach.add(z)
                        nxt.append(z)
            frontier = nxt
        return tuple(sorted(reach, key=_pt_key))

    def orbit_witnesses(self, x0) -> dict:
        """Map each orbit point to one group element sending x0 there."""
        out = {x0: self.group.identity()}
        frontier = [x0]
        gens = self.group.generators
        while frontier:
            nxt = []
            for y in frontier:
                for gi, gm in enumerate(self._gen_maps):
                    z = gm[y]
                    if z not in out:
                        out[z] = self.group.op(gens[gi], out[y])
                        nxt.append(z)
            frontier = nxt
        return out

    def is_transitive(self) -> bool:
        return len(self.orbit(self.set.points[0])) == len(self.set.points)


def _pt_key(x):
    return (str(type(x)), repr(x))


def orbits(action: GroupAction) -> tuple[tuple, ...]:
    """Partition of the point set into orbits, each sorted, orbits sorted."""
    remaining = set(action.set.points)
    parts = []
    for x in action.set.points:
        if x in remaining:
            orb = action.orbit(x)
            parts.append(orb)
            remaining.difference_update(orb)
    return tuple(sorted(parts, key=lambda orb: _pt_key(orb[0])))


def stabilizer(action: GroupAction, x) -> FiniteGroup:
    """Subgroup of elements fixing x, as a generated subgroup."""
    fixing = [g for g in action.group.elements() if action.apply(g, x) == x]
    fixing.sort(key=canonical_key)
    return generated_subgroup(action.group, fixing)


@dataclass(frozen=True)
class Coset:
    """Left coset a*K of a subgroup K, normalized to a canonical representative."""

    subgroup_elements: frozenset
    representative: object
    _key: tuple = field(default=(), compare=False)

    @staticmethod
    def of(group: FiniteGroup, subgroup: FiniteGroup, rep) -> "Coset":
        members = sorted((group.op(rep, k) for k in subgroup.elements()), key=canonical_key)
        return Coset(frozenset(members), members[0])

    def __eq__(self, other):
        return (
            isinstance(other, Coset)
            and self.subgroup_elements == other.subgroup_elements
            and self.representative == other.representative
        )

    def __hash__(self):
        return hash((self.subgroup_elements, canonical_key(self.representative)))


def is_subgroup(group: FiniteGroup, sub: FiniteGroup) -> bool:
    try:
        sub_elems = sub.element_set()
        big = group.element_set()
    except CapExceeded:
        raise
    if not sub_elems <= big:
        return False
    for a in sub_elems:
        for b in sub_elems:
            if group.op(a, b) not in sub_elems:
                return False
    return True


def cosets(group: FiniteGroup, sub: FiniteGroup) -> tuple[Coset, ...]:
    """All left cosets of sub in group, deterministically ordered."""
    if not is_subgroup(group, sub):
        raise NotASubgroup(f"{sub.name} is not a subgroup of {group.name}")
    seen = set()
    out = []
    for g in group.elements():
        c = Coset.of(group, sub, g)
        if c.representative not in seen:
            seen.add(c.representative)
            out.append(c)
    out.sort(key=lambda c: canonical_key(c.representative))
    assert len(out) * sub.order() == group.order()
    return tuple(out)


def orbit_coset_bijection(action: GroupAction, x0):
    """Bijection between the orbit of x0 and cosets of its stabilizer.

    Returns (point -> Coset, Coset -> point) with C_{x0} = K and the
    equivariance C_{g.x} = g C_x for every enumerated g.
    """
    stab = stabilizer(action, x0)
    witnesses = action.orbit_witnesses(x0)
    fwd = {}
    rev = {}
    for x, g in witnesses.items():
        c = Coset.of(action.group, stab, g)
        fwd[x] = c
        rev[c] = x
    if len(rev) != len(fwd):
        raise StructureMismatch("orbit/coset correspondence is not bijective")
    return fwd, rev
