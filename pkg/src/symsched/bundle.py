"""Schedule bundles: schedule, placements, operand routes, hom tables.

A bundle is the complete, replayable description of one schedule on one
machine. Placements are keyed by a prefix of the time vector (movement
granularity); everything serializes to a versioned integer-only JSON
document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ParseError, SizeCap
from .machines import MachineModel, machine_from_config

FORMAT_VERSION = 1


@dataclass(frozen=True)
class MatmulInstance:
    """The l x m x n classical matmul instruction and variable sets."""

    l: int
    m: int
    n: int

    def __post_init__(self):
        if min(self.l, self.m, self.n) < 1:
            raise SizeCap("extents must be positive")
        if self.l * self.m * self.n > 10 ** 6:
            raise SizeCap("instance too large to materialize")

    @property
    def instructions(self) -> tuple:
        return tuple(
            (i, j, k)
            for i in range(self.l)
            for j in range(self.m)
            for k in range(self.n)
        )

    def vars(self, set_name: str) -> tuple:
        if set_name == "A":
            return tuple((r, c) for r in range(self.l) for c in range(self.m))
        if set_name == "B":
            return tuple((r, c) for r in range(self.m) for c in range(self.n))
        if set_name == "C":
            return tuple((r, c) for r in range(self.n) for c in range(self.l))
        raise ParseError(f"unknown variable set {set_name}")

    @staticmethod
    def operands(instr) -> dict:
        i, j, k = instr
        return {"A": (i, j), "B": (j, k), "C": (k, i)}

    def symmetry_descriptor(self) -> tuple:
        return ("symmetric", self.l), ("symmetric", self.m), ("symmetric", self.n)


def instance(l: int, m: int, n: int) -> MatmulInstance:
    return MatmulInstance(l, m, n)


@dataclass
class HomTables:
    """Generator-image tables for rho and the per-set rho_l / rho_d pair.

    Net components are machine-native encodings (residue tuples, leaf
    permutation images, lattice pairs) with None for the identity; time
    components are vectors modulo time_moduli.
    """

    g_labels: tuple
    rho: dict
    per_set: dict
    time_moduli: tuple


@dataclass
class ScheduleBundle:
    kind: str
    instance: MatmulInstance
    machine: MachineModel
    copies: int
    step_sets: tuple
    placement_level: int
    budget: int
    schedule_rows: tuple
    placements: dict
    inp: dict
    homs: HomTables | None = None
    meta: dict = field(default_factory=dict)

    def schedule(self) -> dict:
        return {instr: (node, tv) for instr, node, tv in self.schedule_rows}

    def placement_keys(self) -> tuple:
        return tuple(sorted(self.placements))

    def placement_at(self, tv) -> dict:
        return self.placements[tuple(tv[: self.placement_level])]

    def hom_time_moduli(self) -> tuple:
        if self.homs is not None:
            return self.homs.time_moduli
        return self.step_sets

    # -- serialization

    def to_json_dict(self) -> dict:
        rows = sorted(self.schedule_rows)
        placements = []
        for key in self.placement_keys():
            entries = sorted(
                [s, list(v), c, _enc_node(n)]
                for (s, v, c), n in self.placements[key].items()
            )
            placements.append([list(key), entries])
        inp = {}
        for set_name in sorted(self.inp):
            inp[set_name] = sorted(
                [list(instr), list(var), copy, list(tv)]
                for instr, (var, copy, tv) in self.inp[set_name].items()
            )
        return {
            "format": FORMAT_VERSION,
            "kind": self.kind,
            "instance": {"l": self.instance.l, "m": self.instance.m, "n": self.instance.n},
            "machine": dict(self.machine.descriptor),
            "copies": self.copies,
            "step_sets": list(self.step_sets),
            "placement_level": self.placement_level,
            "budget": self.budget,
            "schedule": [[list(i), _enc_node(n), list(t)] for i, n, t in rows],
            "placements": placements,
            "inp": inp,
            "homs": _enc_homs(self.homs),
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=1)


def _enc_node(node):
    return list(node) if isinstance(node, tuple) else node


def _dec_node(node):
    return tuple(node) if isinstance(node, list) else node


def _enc_net(net):
    return None if net is None else list(net)


def _dec_net(net):
    return None if net is None else tuple(net)


def _enc_homs(homs: HomTables | None):
    if homs is None:
        return None
    return {
        "g_labels": list(homs.g_labels),
        "time_moduli": list(homs.time_moduli),
        "rho": {
            lab: [_enc_net(net), list(time)] for lab, (net, time) in sorted(homs.rho.items())
        },
        "per_set": {
            s: {
                "rho_l": {g: dict(sorted(word.items())) for g, word in sorted(t["rho_l"].items())},
                "rho_d": {
                    h: [_enc_net(net), list(time)]
                    for h, (net, time) in sorted(t["rho_d"].items())
                },
            }
            for s, t in sorted(homs.per_set.items())
        },
    }


def _dec_homs(doc):
    if doc is None:
        return None
    return HomTables(
        g_labels=tuple(doc["g_labels"]),
        time_moduli=tuple(doc["time_moduli"]),
        rho={lab: (_dec_net(net), tuple(time)) for lab, (net, time) in doc["rho"].items()},
        per_set={
            s: {
                "rho_l": {g: dict(word) for g, word in t["rho_l"].items()},
                "rho_d": {h: (_dec_net(net), tuple(time)) for h, (net, time) in t["rho_d"].items()},
            }
            for s, t in doc["per_set"].items()
        },
    )


def bundle_from_json_dict(doc: dict) -> ScheduleBundle:
    try:
        if doc.get("format") != FORMAT_VERSION:
            raise ParseError(f"unsupported bundle format {doc.get('format')}")
        machine = machine_from_config(doc["machine"])
        inst = MatmulInstance(doc["instance"]["l"], doc["instance"]["m"], doc["instance"]["n"])
        rows = tuple(
            (tuple(i), _dec_node(n), tuple(t)) for i, n, t in doc["schedule"]
        )
        placements = {}
        for key, entries in doc["placements"]:
            placements[tuple(key)] = {
                (s, tuple(v), c): _dec_node(n) for s, v, c, n in entries
            }
        inp = {}
        for set_name, entries in doc["inp"].items():
            inp[set_name] = {
                tuple(i): (tuple(v), c, tuple(t)) for i, v, c, t in entries
            }
        return ScheduleBundle(
            kind=doc["kind"],
            instance=inst,
            machine=machine,
            copies=doc["copies"],
            step_sets=tuple(doc["step_sets"]),
            placement_level=doc["placement_level"],
            budget=doc["budget"],
            schedule_rows=rows,
            placements=placements,
            inp=inp,
            homs=_dec_homs(doc["homs"]),
            meta=doc.get("meta", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed bundle document: {exc}") from exc


def bundle_from_json(text: str) -> ScheduleBundle:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad bundle JSON: {exc}") from exc
    return bundle_from_json_dict(doc)


def load_bundle(path) -> ScheduleBundle:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read bundle {path}: {exc}") from exc
    return bundle_from_json(text)
