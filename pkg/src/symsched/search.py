"""Schedule search: enumerate candidate homomorphisms for a machine's
subgroup family, build the induced bundles, verify each, and rank.

Families:
  shift  index-shift images on a q x q torus (all generator-image matrices
         mod q; complete for prime q by the cyclic-homomorphism lemmas)
  flip   index-flip images on the two-level fat tree (all commuting
         involution triples in the network-by-time group)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .bundle import ScheduleBundle, instance
from .errors import CapExceeded, ConditionViolated, NotAHomomorphism, ParameterInfeasible
from .groups import (
    ModVector,
    Perm,
    ProductTuple,
    WreathTuple,
    cyclic,
    identity_perm,
    iterated_wreath,
    make_hom,
    product,
    symmetric,
)
from .machines import MachineModel, fat_tree
from .matmul import TorusHomParams, torus_schedule
from .simulate import verify

DEFAULT_SOLUTION_CAP = 64
DEFAULT_ENUM_CAP = 200_000


@dataclass
class SearchResult:
    ranked: list = field(default_factory=list)
    candidates_tried: int = 0
    feasible: int = 0
    truncated: bool = False

    def to_json_dict(self) -> dict:
        return {
            "format": 1,
            "candidates_tried": self.candidates_tried,
            "feasible": self.feasible,
            "truncated": self.truncated,
            "ranked": self.ranked,
        }


def rank_key(entry) -> tuple:
    return (
        entry["violations"],
        entry["total_traffic"],
        entry["makespan"],
        entry["id"],
    )


def search(machine: MachineModel, dims: int | None = None,
           solution_cap: int = DEFAULT_SOLUTION_CAP,
           enum_cap: int = DEFAULT_ENUM_CAP,
           keep_bundles: bool = False) -> SearchResult:
    if machine.kind == "torus":
        q0, q1 = machine.descriptor["dims"][0], machine.descriptor["dims"][1]
        if len(machine.descriptor["dims"]) != 2 or q0 != q1:
            raise ParameterInfeasible("shift-family search needs a square 2D torus")
        return search_torus(q0, solution_cap, enum_cap, keep_bundles)
    if machine.kind == "fat_tree":
        if machine.descriptor["levels"] != 2:
            raise ParameterInfeasible("flip-family search covers the 2-level fat tree")
        return search_fat_tree_base(solution_cap, enum_cap, keep_bundles)
    raise ParameterInfeasible(f"no search family for machine kind {machine.kind}")


def search_torus(q: int, solution_cap: int = DEFAULT_SOLUTION_CAP,
                 enum_cap: int = DEFAULT_ENUM_CAP,
                 keep_bundles: bool = False) -> SearchResult:
    """Sweep every generator-image matrix mod q for the Shift^3 subgroup."""
    total = q ** 9
    if total > enum_cap:
        raise CapExceeded(
            f"{total} candidate matrices exceed the enumeration cap {enum_cap}")
    result = SearchResult()
    entries = []
    for flat in itertools.product(range(q), repeat=9):
        result.candidates_tried += 1
        rows = (flat[0:3], flat[3:6], flat[6:9])
        try:
            mu = TorusHomParams.derive_mu(q, rows)
            params = TorusHomParams(rows=rows, mu=mu)
            bundle = torus_schedule(q, params)
        except ConditionViolated:
            continue
        rep = verify(bundle)
        result.feasible += 1
        entry = {
            "id": "m" + "".join(map(str, flat)),
            "rows": [list(r) for r in rows],
            "violations": len(rep.violations),
            "total_traffic": rep.total_traffic(),
            "makespan": rep.makespan,
            "traffic": {k: rep.traffic[k] for k in sorted(rep.traffic)},
        }
        if keep_bundles:
            entry["bundle"] = bundle
        entries.append(entry)
    entries.sort(key=rank_key)
    if len(entries) > solution_cap:
        entries = entries[:solution_cap]
        result.truncated = True
    result.ranked = entries
    return result


# ---------------------------------------------------------------------------
# fat-tree base case


def _involution_candidates():
    """Elements of order <= 2 in iterwr(2,2) x Z2, canonically ordered."""
    iw = iterated_wreath(2)
    z2 = cyclic(2)
    tgt = product([iw, z2])
    out = []
    for w in iw.elements():
        for t in z2.elements():
            e = ProductTuple((w, t))
            if tgt.op(e, e) == tgt.identity():
                out.append(e)
    return tgt, iw, tuple(out)


def search_fat_tree_base(solution_cap: int = DEFAULT_SOLUTION_CAP,
                         enum_cap: int = DEFAULT_ENUM_CAP,
                         keep_bundles: bool = False) -> SearchResult:
    """Sweep commuting involution triples as images of the three index flips."""
    tgt, iw, candidates = _involution_candidates()
    if len(candidates) ** 3 > enum_cap:
        raise CapExceeded("flip-family candidate space exceeds the enumeration cap")
    src = product([symmetric(2)] * 3)
    inst = instance(2, 2, 2)
    machine = fat_tree(2)
    result = SearchResult()
    entries = []
    for idx, images in enumerate(itertools.product(candidates, repeat=3)):
        result.candidates_tried += 1
        try:
            hom = make_hom(src, tgt, images)
        except NotAHomomorphism:
            continue
        bundle = _bundle_from_flip_hom(inst, machine, iw, hom, f"h{idx:04d}")
        if bundle is None:
            continue
        rep = verify(bundle)
        result.feasible += 1
        entry = {
            "id": f"h{idx:04d}",
            "images": [_flip_signature(iw, img) for img in hom.images],
            "violations": len(rep.violations),
            "total_traffic": rep.total_traffic(),
            "makespan": rep.makespan,
            "traffic": {k: rep.traffic[k] for k in sorted(rep.traffic)},
        }
        if keep_bundles:
            entry["bundle"] = bundle
        entries.append(entry)
    entries.sort(key=rank_key)
    if len(entries) > solution_cap:
        entries = entries[:solution_cap]
        result.truncated = True
    result.ranked = entries
    return result


def _flip_signature(iw, image):
    leaf = iw.leaf_perm(image.parts[0])
    return {"leaf_images": list(leaf.images), "time": image.parts[1].residues[0]}


def _bundle_from_flip_hom(inst, machine, iw, hom, tag) -> ScheduleBundle | None:
    """Anchor f(X_000) = (leaf 0, t 0), extend by the hom, derive placements."""
    src = hom.source
    slots = {}
    rows = []
    for (i, j, k) in inst.instructions:
        word_elem = _flip_element(src, i, j, k)
        img = hom.apply(word_elem)
        leaf = iw.leaf_perm(img.parts[0])(0)
        t = img.parts[1].residues[0]
        rows.append(((i, j, k), leaf, (t,)))
        if (leaf, t) in slots:
            return None                    # not an embedding
        slots[(leaf, t)] = (i, j, k)

    placements = {(t,): {} for t in range(2)}
    for set_name in ("A", "B", "C"):
        for t in range(2):
            for var in inst.vars(set_name):
                readers = [
                    leaf for (instr, leaf, tv) in rows
                    if tv == (t,) and inst.operands(instr)[set_name] == var
                ]
                if len(set(readers)) != 1:
                    return None            # operand needed in two places at once
                placements[(t,)][(set_name, var, 0)] = readers[0]

    inp = {sn: {} for sn in "ABC"}
    for instr, _leaf, tv in rows:
        ops = inst.operands(instr)
        for sn in "ABC":
            inp[sn][instr] = (ops[sn], 0, tv)

    return ScheduleBundle(
        kind="fat-tree-search",
        instance=inst,
        machine=machine,
        copies=1,
        step_sets=(2,),
        placement_level=1,
        budget=3,
        schedule_rows=tuple(rows),
        placements=placements,
        inp=inp,
        homs=None,
        meta={"search_id": tag},
    )


def _flip_element(src, i, j, k):
    swap = Perm((1, 0))
    ident = identity_perm(2)
    return ProductTuple((
        swap if i else ident,
        swap if j else ident,
        swap if k else ident,
    ))
