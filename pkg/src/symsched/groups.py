"""Finite groups: permutations, modular vectors, products, wreath products.

Elements are immutable values; a :class:`FiniteGroup` bundles the operation,
inverses, generator set and (capped) enumeration for one descriptor family.
Composition of permutations follows ``(a * b)(i) = a(b(i))``: the right factor
acts first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, prod

from .errors import (
    CapExceeded,
    NotAHomomorphism,
    NotInGroup,
    StructureMismatch,
)

DEFAULT_ENUMERATION_CAP = 10 ** 6


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class Perm:
    """A permutation of ``[n]`` stored as its image sequence."""

    images: tuple[int, ...]

    def __post_init__(self):
        n = len(self.images)
        if sorted(self.images) != list(range(n)):
            raise StructureMismatch(f"not a bijection on [{n}]: {self.images}")

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def after(self, other: "Perm") -> "Perm":
        """self composed after other: i -> self(other(i))."""
        return Perm(tuple(self.images[other.images[i]] for i in range(self.degree)))

    def inverse(self) -> "Perm":
        inv = [0] * self.degree
        for i, img in enumerate(self.images):
            inv[img] = i
        return Perm(tuple(inv))

    def cycle_lengths(self) -> tuple[int, ...]:
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            length, cur = 0, start
            while not seen[cur]:
                seen[cur] = True
                cur = self.images[cur]
                length += 1
            out.append(length)
        return tuple(sorted(out))

    def is_primitive(self) -> bool:
        """Single full-length cycle (the paper's usage of primitive)."""
        return self.cycle_lengths() == (self.degree,)


def identity_perm(n: int) -> Perm:
    return Perm(tuple(range(n)))


def shift_perm(n: int, step: int = 1) -> Perm:
    """Cyclic shift sending i to i + step mod n."""
    return Perm(tuple((i + step) % n for i in range(n)))


@dataclass(frozen=True)
class ModVector:
    """Vector of residues with per-coordinate moduli."""

    residues: tuple[int, ...]
    moduli: tuple[int, ...]

    def __post_init__(self):
        if len(self.residues) != len(self.moduli):
            raise StructureMismatch("residue/modulus length mismatch")
        for r, q in zip(self.residues, self.moduli):
            if not 0 <= r < q:
                raise StructureMismatch(f"residue {r} outside [0, {q})")

    def add(self, other: "ModVector") -> "ModVector":
        return ModVector(
            tuple((a + b) % q for a, b, q in zip(self.residues, other.residues, self.moduli)),
            self.moduli,
        )

    def neg(self) -> "ModVector":
        return ModVector(tuple((-a) % q for a, q in zip(self.residues, self.moduli)), self.moduli)


def modvec(residues, moduli) -> ModVector:
    mods = tuple(moduli)
    return ModVector(tuple(r % q for r, q in zip(residues, mods)), mods)


@dataclass(frozen=True)
class WreathTuple:
    """Base elements per block plus a top permutation of the blocks."""

    bases: tuple
    top: Perm

    def __post_init__(self):
        if len(self.bases) != self.top.degree:
            raise StructureMismatch("block count does not match top degree")


@dataclass(frozen=True)
class ProductTuple:
    """One element per direct-product factor."""

    parts: tuple


GroupElement = Perm | ModVector | WreathTuple | ProductTuple


def canonical_key(elem):
    """Total order key over elements; used for deterministic choices."""
    if isinstance(elem, Perm):
        return ("perm", elem.images)
    if isinstance(elem, ModVector):
        return ("mod", elem.residues)
    if isinstance(elem, WreathTuple):
        return ("wr", tuple(canonical_key(b) for b in elem.bases), elem.top.images)
    if isinstance(elem, ProductTuple):
        return ("prod", tuple(canonical_key(p) for p in elem.parts))
    raise StructureMismatch(f"not a group element: {elem!r}")


# ---------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group given by a descriptor kind plus parameters.

    kinds:
      symmetric(n)            Perm elements on [n]
      shift(q)                subgroup of symmetric(q) generated by the 1-step shift
      trivial(n)              identity-only Perm group on [n]
      modvec(moduli)          ModVector elements (cyclic groups and tori)
      product(factors)        ProductTuple elements
      wreath(base,blocks,top) WreathTuple elements; top is a Perm group on [blocks]
      generated(parent,gens)  subgroup of parent generated by gens
    """

    kind: str
    n: int = 0
    moduli: tuple[int, ...] = ()
    factors: tuple["FiniteGroup", ...] = ()
    base: "FiniteGroup | None" = None
    blocks: int = 0
    top: "FiniteGroup | None" = None
    parent: "FiniteGroup | None" = None
    generators: tuple = ()
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __hash__(self):
        return hash((self.kind, self.n, self.moduli, self.factors, self.base, self.blocks, self.top))

    # -- structure

    def identity(self):
        k = self.kind
        if k in ("symmetric", "shift", "trivial"):
            return identity_perm(self.n)
        if k == "modvec":
            return ModVector((0,) * len(self.moduli), self.moduli)
        if k == "product":
            return ProductTuple(tuple(f.identity() for f in self.factors))
        if k == "wreath":
            return WreathTuple(tuple(self.base.identity() for _ in range(self.blocks)), self.top.identity())
        if k == "generated":
            return self.parent.identity()
        raise StructureMismatch(f"unknown kind {k}")

    def op(self, a, b):
        k = self.kind
        if k in ("symmetric", "shift", "trivial"):
            return a.after(b)
        if k == "modvec":
            return a.add(b)
        if k == "product":
            return ProductTuple(tuple(f.op(x, y) for f, x, y in zip(self.factors, a.parts, b.parts)))
        if k == "wreath":
            # top permutes base slots of the right factor before combining
            bases = tuple(
                self.base.op(a.bases[b.top(j)], b.bases[j]) for j in range(self.blocks)
            )
            return WreathTuple(bases, a.top.after(b.top))
        if k == "generated":
            return self.parent.op(a, b)
        raise StructureMismatch(f"unknown kind {k}")

    def inv(self, a):
        k = self.kind
        if k in ("symmetric", "shift", "trivial"):
            return a.inverse()
        if k == "modvec":
            return a.neg()
        if k == "product":
            return ProductTuple(tuple(f.inv(x) for f, x in zip(self.factors, a.parts)))
        if k == "wreath":
            tinv = a.top.inverse()
            bases = tuple(self.base.inv(a.bases[tinv(j)]) for j in range(self.blocks))
            return WreathTuple(bases, tinv)
        if k == "generated":
            return self.parent.inv(a)
        raise StructureMismatch(f"unknown kind {k}")

    def power(self, a, k: int):
        out = self.identity()
        if k < 0:
            a, k = self.inv(a), -k
        for _ in range(k):
            out = self.op(out, a)
        return out

    def matches(self, elem) -> bool:
        """Structural membership check (full membership for closed families)."""
        k = self.kind
        try:
            if k == "symmetric":
                return isinstance(elem, Perm) and elem.degree == self.n
            if k == "trivial":
                return isinstance(elem, Perm) and elem == identity_perm(self.n)
            if k == "shift":
                return (
                    isinstance(elem, Perm)
                    and elem.degree == self.n
                    and elem in {shift_perm(self.n, s) for s in range(self.n)}
                )
            if k == "modvec":
                return isinstance(elem, ModVector) and elem.moduli == self.moduli
            if k == "product":
                return (
                    isinstance(elem, ProductTuple)
                    and len(elem.parts) == len(self.factors)
                    and all(f.matches(p) for f, p in zip(self.factors, elem.parts))
                )
            if k == "wreath":
                return (
                    isinstance(elem, WreathTuple)
                    and len(elem.bases) == self.blocks
                    and self.top.matches(elem.top)
                    and all(self.base.matches(b) for b in elem.bases)
                )
            if k == "generated":
                if not self.parent.matches(elem):
                    return False
                return elem in self.element_set()
        except StructureMismatch:
            return False
        return False

    # -- size and enumeration

    def order(self) -> int:
        k = self.kind
        if k == "symmetric":
            return factorial(self.n)
        if k == "shift":
            return self.n
        if k == "trivial":
            return 1
        if k == "modvec":
            return prod(self.moduli)
        if k == "product":
            return prod(f.order() for f in self.factors)
        if k == "wreath":
            return self.base.order() ** self.blocks * self.top.order()
        if k == "generated":
            return len(self.elements())
        raise StructureMismatch(f"unknown kind {k}")

    def known_order(self) -> int | None:
        """Closed-form order, or None for generated subgroups."""
        return None if self.kind == "generated" else self.order()

    def elements(self) -> tuple:
        """All elements, via closure of the generators under the operation."""
        if "elements" not in self._cache:
            self._words()
        return self._cache["elements"]

    def element_set(self) -> frozenset:
        if "element_set" not in self._cache:
            self._cache["element_set"] = frozenset(self.elements())
        return self._cache["element_set"]

    def element_words(self) -> dict:
        """Map element -> generator-index word (left-to-right product)."""
        if "words" not in self._cache:
            self._words()
        return self._cache["words"]

    def _words(self):
        known = self.known_order()
        if known is not None and known > self.enumeration_cap:
            raise CapExceeded(f"order {known} exceeds cap {self.enumeration_cap}")
        gens = self.generators
        ident = self.identity()
        words = {ident: ()}
        frontier = [ident]
        while frontier:
            nxt = []
            for cur in frontier:
                for gi, g in enumerate(gens):
                    new = self.op(cur, g)
                    if new not in words:
                        words[new] = words[cur] + (gi,)
                        nxt.append(new)
                        if len(words) > self.enumeration_cap:
                            raise CapExceeded(
                                f"closure exceeds cap {self.enumeration_cap}"
                            )
            frontier = nxt
        elems = tuple(sorted(words, key=canonical_key))
        self._cache["elements"] = elems
        self._cache["words"] = words

    # -- permutation view

    def degree(self) -> int | None:
        """Size of the set a permutation-like group naturally acts on."""
        k = self.kind
        if k in ("symmetric", "shift", "trivial"):
            return self.n
        if k == "wreath":
            d = self.base.degree()
            return None if d is None else d * self.blocks
        if k == "generated":
            return self.parent.degree()
        return None

    def leaf_perm(self, elem) -> Perm:
        """Flatten an element to its permutation of the natural point set."""
        k = self.kind
        if k in ("symmetric", "shift", "trivial"):
            return elem
        if k == "wreath":
            d = self.base.degree()
            images = [0] * (d * self.blocks)
            for j in range(self.blocks):
                inner = self.base.leaf_perm(elem.bases[j])
                for r in range(d):
                    images[j * d + r] = elem.top(j) * d + inner(r)
            return Perm(tuple(images))
        if k == "generated":
            return self.parent.leaf_perm(elem)
        raise StructureMismatch(f"{k} group has no natural point set")


# ---------------------------------------------------------------------------
# constructors


def symmetric(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> FiniteGroup:
    if n < 1:
        raise StructureMismatch("degree must be >= 1")
    gens = []
    if n >= 2:
        gens.append(Perm((1, 0) + tuple(range(2, n))))
    if n >= 3:
        gens.append(shift_perm(n))
    return FiniteGroup(kind="symmetric", n=n, generators=tuple(gens),
                       enumeration_cap=cap, name=f"S{n}")


def shift(q: int, cap: int = DEFAULT_ENUMERATION_CAP) -> FiniteGroup:
    gens = (shift_perm(q),) if q > 1 else ()
    return FiniteGroup(kind="shift", n=q, generators=gens, enumeration_cap=cap,
                       name=f"Shift{q}")


def trivial(n: int = 1) -> FiniteGroup:
    return FiniteGroup(kind="trivial", n=n, generators=(), name=f"Triv{n}")


def cyclic(q: int, cap: int = DEFAULT_ENUMERATION_CAP) -> FiniteGroup:
    return mod_group((q,), cap=cap)


def mod_group(moduli, cap: int = DEFAULT_ENUMERATION_CAP) -> FiniteGroup:
    mods = tuple(moduli)
    if any(q < 1 for q in mods):
        raise StructureMismatch("moduli must be positive")
    gens = tuple(
        ModVector(tuple(1 if j == i else 0 for j in range(len(mods))), mods)
        for i, q in enumerate(mods)
        if q > 1
    )
    return FiniteGroup(kind="modvec", moduli=mods, generators=gens,
                       enumeration_cap=cap, name="Z" + "x".join(map(str, mods)))


def product(factor_groups, cap: int = DEFAULT_ENUMERATION_CAP) -> FiniteGroup:
    facs = tuple(factor_groups)
    gens = []
    for i, f in enumerate(facs):
        for g in f.generators:
            parts = [h.identity() for h in facs]
            parts[i] = g
            gens.append(ProductTuple(tuple(parts)))
    return FiniteGroup(kind="product", factors=facs, generators=tuple(gens),
                       enumeration_cap=cap,
                       name="(" + "x".join(f.name for f in facs) + ")")


def wreath(base: FiniteGroup, blocks: int, top: FiniteGroup,
           cap: int = DEFAULT_ENUMERATION_CAP) -> FiniteGroup:
    """Wreath product base wr top, with top acting on [blocks]."""
    if top.degree() != blocks:
        raise StructureMismatch("top group must act on the block index set")
    gens = []
    for j in range(blocks):
        for g in base.generators:
            bases = [base.identity()] * blocks
            bases[j] = g
            gens.append(WreathTuple(tuple(bases), identity_perm(blocks)))
    for t in top.generators:
        gens.append(WreathTuple((base.identity(),) * blocks, t))
    return FiniteGroup(kind="wreath", base=base, blocks=blocks, top=top,
                       generators=tuple(gens), enumeration_cap=cap,
                       name=f"({base.name} wr {top.name})")


def iterated_wreath(k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> FiniteGroup:
    """k-fold iterated wreath product of S2; acts on 2**k points."""
    if k < 1:
        return trivial(1)
    grp = symmetric(2, cap=cap)
    for _ in range(k - 1):
        grp = wreath(grp, 2, symmetric(2, cap=cap), cap=cap)
    return grp


def generated_subgroup(parent: FiniteGroup, gens,
                       cap: int | None = None) -> FiniteGroup:
    gens = tuple(gens)
    for g in gens:
        if not _structurally_valid(parent, g):
            raise StructureMismatch("generator not shaped like a parent element")
    return FiniteGroup(kind="generated", parent=parent, generators=gens,
                       enumeration_cap=cap if cap is not None else parent.enumeration_cap,
                       name=f"<{len(gens)} gens in {parent.name}>")


# ---------------------------------------------------------------------------
# spec operations


def compose(group: FiniteGroup, a, b):
    """a * b under the group's operation; right factor acts first."""
    for x in (a, b):
        if not _structurally_valid(group, x):
            raise StructureMismatch(f"{x!r} does not match {group.name}")
    return group.op(a, b)


def inverse(group: FiniteGroup, a):
    if not _structurally_valid(group, a):
        raise StructureMismatch(f"{a!r} does not match {group.name}")
    return group.inv(a)


def enumerate_group(group: FiniteGroup) -> tuple:
    return group.elements()


def _structurally_valid(group: FiniteGroup, elem) -> bool:
    k = group.kind
    if k in ("symmetric", "shift", "trivial"):
        return isinstance(elem, Perm) and elem.degree == group.n
    if k == "modvec":
        return isinstance(elem, ModVector) and elem.moduli == group.moduli
    if k == "product":
        return (
            isinstance(elem, ProductTuple)
            and len(elem.parts) == len(group.factors)
            and all(_structurally_valid(f, p) for f, p in zip(group.factors, elem.parts))
        )
    if k == "wreath":
        return (
            isinstance(elem, WreathTuple)
            and len(elem.bases) == group.blocks
            and _structurally_valid(group.top, elem.top)
            and all(_structurally_valid(group.base, b) for b in elem.bases)
        )
    if k == "generated":
        return _structurally_valid(group.parent, elem)
    return False


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class Homomorphism:
    """Generator-image table from source to target, checked on construction."""

    source: FiniteGroup
    target: FiniteGroup
    images: tuple
    validated: bool = False

    def apply(self, g):
        return apply_hom(self, g)

    def image_table(self) -> dict:
        return dict(zip(self.source.generators, self.images))


def make_hom(source: FiniteGroup, target: FiniteGroup, images) -> Homomorphism:
    """Build and validate a homomorphism from generator images.

    Enumerable sources are checked by extending the table over the whole
    closure; any inconsistency yields NotAHomomorphism with a witness pair.
    Above the cap, declared relation sets are checked for mod-vector style
    descriptors; other families raise CapExceeded.
    """
    if isinstance(images, dict):
        img = tuple(images[g] for g in source.generators)
    else:
        img = tuple(images)
    if len(img) != len(source.generators):
        raise NotAHomomorphism("every source generator needs an image")
    for e in img:
        if not _structurally_valid(target, e):
            raise StructureMismatch(f"image {e!r} not in target {target.name}")

    known = source.known_order()
    if known is None or known <= source.enumeration_cap:
        _validate_by_closure(source, target, img)
    else:
        _validate_by_relations(source, target, img)
    return Homomorphism(source=source, target=target, images=img, validated=True)


def _validate_by_closure(source, target, img):
    gens = source.generators
    table = {source.identity(): target.identity()}
    frontier = [source.identity()]
    while frontier:
        nxt = []
        for cur in frontier:
            for gi, g in enumerate(gens):
                new = source.op(cur, g)
                new_img = target.op(table[cur], img[gi])
                if new in table:
                    if table[new] != new_img:
                        raise NotAHomomorphism(
                            "images disagree on a product", witness=(cur, g)
                        )
                else:
                    table[new] = new_img
                    nxt.append(new)
                    if len(table) > source.enumeration_cap:
                        raise CapExceeded("source closure exceeds cap")
        frontier = nxt
    # sufficient: the table is a well-defined multiplicative extension, and
    # every relation in the generated group is a closed walk of the table


def _validate_by_relations(source, target, img):
    k = source.kind
    if k == "modvec":
        for g, e in zip(source.generators, img):
            q = g.moduli[g.residues.index(1)]
            if target.power(e, q) != target.identity():
                raise NotAHomomorphism(
                    f"generator of order {q} maps to element of non-dividing order",
                    witness=(g, e),
                )
        # images must commute for the extension to be well defined
        for i in range(len(img)):
            for j in range(i + 1, len(img)):
                if target.op(img[i], img[j]) != target.op(img[j], img[i]):
                    raise NotAHomomorphism("images of commuting generators do not commute",
                                           witness=(source.generators[i], source.generators[j]))
        return
    if k == "product" and all(f.kind == "modvec" for f in source.factors):
        orders = []
        for g in source.generators:
            part = next(p for p in g.parts if p != ModVector((0,) * len(p.residues), p.moduli))
            orders.append(part.moduli[part.residues.index(1)])
        for g, e, q in zip(source.generators, img, orders):
            if target.power(e, q) != target.identity():
                raise NotAHomomorphism("order obstruction", witness=(g, e))
        for i in range(len(img)):
            for j in range(i + 1, len(img)):
                if target.op(img[i], img[j]) != target.op(img[j], img[i]):
                    raise NotAHomomorphism("images do not commute", witness=(i, j))
        return
    raise CapExceeded(f"no declared relation set for kind {k} above the cap")


def apply_hom(hom: Homomorphism, g):
    """Image of g, computed through its generator word."""
    words = hom.source.element_words()
    if g not in words:
        raise NotInGroup(f"{g!r} is not in the enumerated source group")
    out = hom.target.identity()
    for gi in words[g]:
        out = hom.target.op(out, hom.images[gi])
    return out


def compose_homs(outer: Homomorphism, inner: Homomorphism) -> Homomorphism:
    """outer o inner, defined on inner's source generators."""
    imgs = tuple(apply_hom(outer, e) for e in inner.images)
    return make_hom(inner.source, outer.target, imgs)
