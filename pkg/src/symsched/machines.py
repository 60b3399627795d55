"""Machine topology models: node sets, network groups, hop costs, time.

Every model prices the move of one word between two nodes as hop-units per
link class; the simulator sums these over placement deltas. Per-element
costs follow each family's own counting convention (per word for
translations, per leaf for tree permutations).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import prod

from .errors import (
    InvalidHierarchy,
    MachineMismatch,
    ParseError,
    StructureMismatch,
    UnroutableMove,
    WindowOverflow,
)
from .groups import FiniteGroup, iterated_wreath, mod_group


@dataclass(frozen=True)
class LinkClass:
    label: str
    weight: int = 1

    def __post_init__(self):
        if self.weight < 0:
            raise StructureMismatch("link weights must be nonnegative")


@dataclass
class MachineModel:
    kind: str
    descriptor: dict
    nodes: tuple
    link_classes: tuple[LinkClass, ...]
    memory_words: int
    network_group: object
    _is_processor: object
    _move_cost: object
    _element_cost: object
    _act: object
    node_index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.node_index = {n: i for i, n in enumerate(self.nodes)}

    def is_processor(self, node) -> bool:
        return self._is_processor(node)

    def processors(self) -> tuple:
        return tuple(n for n in self.nodes if self.is_processor(n))

    def move_cost(self, src, dst) -> dict:
        """Hop-units per link-class label for one word moving src -> dst."""
        if src == dst:
            return {}
        return self._move_cost(src, dst)

    def element_cost(self, elem) -> dict:
        """Cost breakdown of one network element under the family's counting."""
        return self._element_cost(elem)

    def act(self, elem, node):
        return self._act(elem, node)

    def weight_of(self, label: str) -> int:
        for lc in self.link_classes:
            if lc.label == label:
                return lc.weight
        raise StructureMismatch(f"unknown link class {label}")

    def same_machine(self, other: "MachineModel") -> bool:
        return self.descriptor == other.descriptor

    def to_config(self) -> dict:
        return dict(self.descriptor)


# ---------------------------------------------------------------------------
# torus


def torus(dims, memory_words: int = 3, weights=None) -> MachineModel:
    """Multi-dimensional torus; dimension-ordered minimal wraparound routing."""
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise StructureMismatch("torus extents must be positive")
    nodes = tuple(_grid_points(dims))
    group = mod_group(dims)
    classes = tuple(
        LinkClass(f"torus-dim-{i}", (weights or {}).get(f"torus-dim-{i}", 1))
        for i in range(len(dims))
    )

    def wrap_dist(a, b, q):
        d = (b - a) % q
        return min(d, q - d)

    def move_cost(src, dst):
        out = {}
        for i, q in enumerate(dims):
            hops = wrap_dist(src[i], dst[i], q)
            if hops:
                out[f"torus-dim-{i}"] = hops
        return out

    def element_cost(elem):
        out = {}
        for i, (r, q) in enumerate(zip(elem.residues, elem.moduli)):
            hops = min(r, q - r)
            if hops:
                out[f"torus-dim-{i}"] = hops
        return out

    def act(elem, node):
        return tuple((x + r) % q for x, r, q in zip(node, elem.residues, dims))

    return MachineModel(
        kind="torus",
        descriptor={"kind": "torus", "dims": list(dims), "memory_words": memory_words},
        nodes=nodes,
        link_classes=classes,
        memory_words=memory_words,
        network_group=group,
        _is_processor=lambda node: True,
        _move_cost=move_cost,
        _element_cost=element_cost,
        _act=act,
    )


def _grid_points(dims):
    if not dims:
        yield ()
        return
    for head in range(dims[0]):
        for rest in _grid_points(dims[1:]):
            yield (head,) + rest


# ---------------------------------------------------------------------------
# fat tree


def fat_tree(levels: int, memory_words: int = 3, weights=None) -> MachineModel:
    """Balanced binary fat-tree with 2**levels leaf processors.

    A word moving between leaves is charged one unit on every tree level up
    to the least common ancestor, so the per-leaf path length is twice the
    sum of level crossings.
    """
    if levels < 1:
        raise StructureMismatch("fat tree needs at least one level")
    n = 2 ** levels
    nodes = tuple(range(n))
    group = iterated_wreath(levels)
    classes = tuple(
        LinkClass(f"tree-level-{l}", (weights or {}).get(f"tree-level-{l}", 1))
        for l in range(1, levels + 1)
    )

    def lca_height(a, b):
        h = 0
        while a != b:
            a //= 2
            b //= 2
            h += 1
        return h

    def move_cost(src, dst):
        h = lca_height(src, dst)
        return {f"tree-level-{l}": 1 for l in range(1, h + 1)}

    def element_cost(elem):
        perm = group.leaf_perm(elem)
        counts = {}
        for leaf in range(n):
            h = lca_height(leaf, perm(leaf))
            for l in range(1, h + 1):
                counts[f"tree-level-{l}"] = counts.get(f"tree-level-{l}", 0) + 1
        return counts

    def act(elem, node):
        return group.leaf_perm(elem)(node)

    return MachineModel(
        kind="fat_tree",
        descriptor={"kind": "fat_tree", "levels": levels, "memory_words": memory_words},
        nodes=nodes,
        link_classes=classes,
        memory_words=memory_words,
        network_group=group,
        _is_processor=lambda node: True,
        _move_cost=move_cost,
        _element_cost=element_cost,
        _act=act,
    )


# ---------------------------------------------------------------------------
# parallel memory hierarchy


def pmh(levels, memory_words: int = 3, weights=None) -> MachineModel:
    """Inclusive cache tree flattened onto M_h/3 nodes of 3 words each.

    levels: sequence of (M_i, f_i) pairs from innermost to outermost. The
    first f_i sub-blocks of every level-i block are the level-(i-1) caches;
    a node is a processor when its index stays within the first f_i blocks
    at every level. A word move is charged once, to the class of the
    smallest cache level containing both endpoints.
    """
    levels = [(int(m), int(f)) for m, f in levels]
    if not levels:
        raise InvalidHierarchy("at least one level required")
    for m, f in levels:
        if m % 3 or m <= 0 or f <= 0:
            raise InvalidHierarchy(f"cache size {m} must be a positive multiple of 3")
    block_words = [m // 3 for m, _ in levels]
    for inner, outer in zip(block_words, block_words[1:]):
        if outer % inner:
            raise InvalidHierarchy("level sizes must nest evenly")
    fanouts = [f for _, f in levels]
    if fanouts[0] > block_words[0]:
        raise InvalidHierarchy("processors do not fit inside the innermost cache")
    for i in range(1, len(levels)):
        if fanouts[i] * block_words[i - 1] > block_words[i]:
            raise InvalidHierarchy("children do not fit inside their parent cache")

    h = len(levels)
    total_nodes = block_words[-1]
    nodes = tuple(range(total_nodes))

    def is_processor(node):
        rem = node
        for lvl in range(h - 1, 0, -1):
            if rem // block_words[lvl - 1] >= fanouts[lvl]:
                return False
            rem %= block_words[lvl - 1]
        return rem < fanouts[0]

    def smallest_common_level(a, b):
        for lvl in range(h + 1):
            size = 1 if lvl == 0 else block_words[lvl - 1]
            if a // size == b // size:
                return lvl
        raise UnroutableMove(f"nodes {a}, {b} share no cache")

    classes = tuple(
        LinkClass(f"pmh-level-{l}", (weights or {}).get(f"pmh-level-{l}", 1))
        for l in range(1, h + 1)
    )

    def move_cost(src, dst):
        lvl = smallest_common_level(src, dst)
        return {f"pmh-level-{lvl}": 1}

    def element_cost(elem):
        raise StructureMismatch("pmh prices word moves, not group elements")

    group_order = _pmh_group_order(block_words)

    return MachineModel(
        kind="pmh",
        descriptor={"kind": "pmh", "levels": [list(l) for l in levels],
                    "memory_words": memory_words},
        nodes=nodes,
        link_classes=classes,
        memory_words=memory_words,
        network_group=PmhNetworkSummary(tuple(block_words), group_order),
        _is_processor=is_processor,
        _move_cost=move_cost,
        _element_cost=element_cost,
        _act=lambda elem, node: node,
    )


@dataclass(frozen=True)
class PmhNetworkSummary:
    """Order-and-shape summary of the inductive wreath tower N_i."""

    block_words: tuple
    order: int


def _pmh_group_order(block_words):
    from math import factorial

    order = factorial(block_words[0])
    for inner, outer in zip(block_words, block_words[1:]):
        order = order ** (outer // inner) * factorial(outer // inner)
    return order


# ---------------------------------------------------------------------------
# hexagonal array window


@dataclass(frozen=True)
class HexGroup:
    """Windowed presentation of <g1,g2,g3 | abelian, g1 = g2 g3>.

    Elements are integer (a, b) pairs meaning a*g2 + b*g3; g1 is (1, 1).
    """

    g1: tuple = (1, 1)
    g2: tuple = (1, 0)
    g3: tuple = (0, 1)

    def identity(self):
        return (0, 0)

    def op(self, a, b):
        return (a[0] + b[0], a[1] + b[1])

    def inv(self, a):
        return (-a[0], -a[1])


def hex_array(window: int, memory_words: int = 3, weights=None) -> MachineModel:
    """Finite window of the infinite hexagonal array, coordinates in (g2, g3)."""
    if window < 1:
        raise StructureMismatch("window extent must be positive")
    nodes = tuple(
        (u, v) for u in range(-window, window + 1) for v in range(-window, window + 1)
    )
    group = HexGroup()
    classes = tuple(
        LinkClass(f"hex-{d}", (weights or {}).get(f"hex-{d}", 1))
        for d in ("g1", "g2", "g3")
    )

    def decompose(du, dv):
        """Minimal-hop split of a lattice delta into g1/g2/g3 steps."""
        if du * dv > 0:
            a = min(abs(du), abs(dv)) * (1 if du > 0 else -1)
        else:
            a = 0
        return a, du - a, dv - a

    def move_cost(src, dst):
        for node in (src, dst):
            if abs(node[0]) > window or abs(node[1]) > window:
                raise UnroutableMove(f"{node} is outside the +-{window} window")
        a, b, c = decompose(dst[0] - src[0], dst[1] - src[1])
        out = {}
        if a:
            out["hex-g1"] = abs(a)
        if b:
            out["hex-g2"] = abs(b)
        if c:
            out["hex-g3"] = abs(c)
        return out

    def element_cost(elem):
        fake_src = (0, 0)
        return move_cost(fake_src, elem)

    def act(elem, node):
        target = (node[0] + elem[0], node[1] + elem[1])
        if abs(target[0]) > window or abs(target[1]) > window:
            raise WindowOverflow(f"{target} leaves the +-{window} window")
        return target

    return MachineModel(
        kind="hex",
        descriptor={"kind": "hex", "window": window, "memory_words": memory_words},
        nodes=nodes,
        link_classes=classes,
        memory_words=memory_words,
        network_group=group,
        _is_processor=lambda node: True,
        _move_cost=move_cost,
        _element_cost=element_cost,
        _act=act,
    )


# ---------------------------------------------------------------------------
# time


@dataclass(frozen=True)
class TimeModel:
    """Nested time steps; index 0 is the outermost level in a time vector."""

    step_sets: tuple[int, ...]

    def __post_init__(self):
        if any(t < 1 for t in self.step_sets):
            raise StructureMismatch("step counts must be positive")

    @property
    def levels(self) -> int:
        return len(self.step_sets)

    def delta_group(self) -> FiniteGroup:
        return mod_group(self.step_sets)

    def all_vectors(self):
        return tuple(_grid_points(self.step_sets))


@dataclass(frozen=True)
class FlattenedClock:
    """Homomorphic flattening of time vectors onto clock cycles."""

    step_sets: tuple[int, ...]
    stretch: tuple[int, ...]
    units: tuple[int, ...]

    def clock(self, tv) -> int:
        return sum(v * u for v, u in zip(tv, self.units))

    def total_cycles(self) -> int:
        return self.units[0] * self.step_sets[0] if self.step_sets else 1

    def makespan(self, tvs) -> int:
        return 1 + max(self.clock(tv) for tv in tvs) if tvs else 0


def flatten_time(tm: TimeModel, stretch=None) -> FlattenedClock:
    """Build the clock map; level l of k has unit stretch_l * prod(inner sizes)."""
    k = tm.levels
    if stretch is None:
        stretch = (1,) * k
    stretch = tuple(int(s) for s in stretch)
    if len(stretch) != k or any(s < 1 for s in stretch):
        raise StructureMismatch("one positive stretch factor per level required")
    units = [0] * k
    acc = 1
    for pos in range(k - 1, -1, -1):
        units[pos] = acc * stretch[pos]
        acc = units[pos] * tm.step_sets[pos]
    return FlattenedClock(step_sets=tm.step_sets, stretch=stretch, units=tuple(units))


# ---------------------------------------------------------------------------
# config files


_BUILDERS = {
    "torus": lambda cfg: torus(cfg["dims"], cfg.get("memory_words", 3), cfg.get("weights")),
    "fat_tree": lambda cfg: fat_tree(cfg["levels"], cfg.get("memory_words", 3), cfg.get("weights")),
    "pmh": lambda cfg: pmh(cfg["levels"], cfg.get("memory_words", 3), cfg.get("weights")),
    "hex": lambda cfg: hex_array(cfg["window"], cfg.get("memory_words", 3), cfg.get("weights")),
}


def machine_from_config(cfg: dict) -> MachineModel:
    try:
        kind = cfg["kind"]
        return _BUILDERS[kind](cfg)
    except KeyError as exc:
        raise ParseError(f"bad machine config: missing {exc}") from exc


def load_machine(path) -> MachineModel:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read machine config {path}: {exc}") from exc
    return machine_from_config(cfg)


def require_same_machine(a: MachineModel, b: MachineModel):
    if not a.same_machine(b):
        raise MachineMismatch(f"{a.descriptor} vs {b.descriptor}")
