"""Discrete-time replay of a schedule bundle: legality checks and costs.

The verifier walks flattened clock steps, confirms every instruction runs
exactly once on a processor with its three operands resident, accounts
per-link-class traffic from placement deltas, and reports peak memory.
All failures are collected as violations; nothing fails fast.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import MachineMismatch, ParseError
from .machines import MachineModel, TimeModel, flatten_time

VIOLATION_KINDS = (
    "MissingOperand",
    "DoubleBooking",
    "MemoryExceeded",
    "NonProcessorCompute",
    "UncoveredInstruction",
    "DuplicateInstruction",
)


@dataclass(frozen=True)
class Violation:
    kind: str
    node: object
    timevec: tuple
    detail: str

    def to_json(self):
        return {
            "kind": self.kind,
            "node": _enc(self.node),
            "timevec": list(self.timevec),
            "detail": self.detail,
        }


@dataclass
class CostReport:
    machine_descriptor: dict
    traffic: dict = field(default_factory=dict)           # class -> hop-units
    set_traffic: dict = field(default_factory=dict)       # set -> class -> units
    transitions: list = field(default_factory=list)       # per-boundary breakdown
    peak_memory: dict = field(default_factory=dict)       # node repr -> words
    makespan: int = 0
    coverage: int = 0
    violations: list = field(default_factory=list)

    def total_traffic(self) -> int:
        return sum(self.traffic.values())

    def ok(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "format": 1,
            "machine": self.machine_descriptor,
            "traffic": {k: self.traffic[k] for k in sorted(self.traffic)},
            "set_traffic": {
                s: {k: v[k] for k in sorted(v)}
                for s, v in sorted(self.set_traffic.items())
            },
            "transitions": self.transitions,
            "peak_memory": {k: self.peak_memory[k] for k in sorted(self.peak_memory)},
            "makespan": self.makespan,
            "coverage": self.coverage,
            "violations": [v.to_json() for v in self.violations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=1)


def _enc(node):
    return list(node) if isinstance(node, tuple) else node


def report_from_json(text: str) -> CostReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad report JSON: {exc}") from exc
    rep = CostReport(machine_descriptor=doc["machine"])
    rep.traffic = dict(doc["traffic"])
    rep.set_traffic = {s: dict(v) for s, v in doc["set_traffic"].items()}
    rep.transitions = doc["transitions"]
    rep.peak_memory = dict(doc["peak_memory"])
    rep.makespan = doc["makespan"]
    rep.coverage = doc["coverage"]
    rep.violations = [
        Violation(v["kind"], tuple(v["node"]) if isinstance(v["node"], list) else v["node"],
                  tuple(v["timevec"]), v["detail"])
        for v in doc["violations"]
    ]
    return rep


# ---------------------------------------------------------------------------
# traffic


def traffic_delta(before: dict, after: dict, machine: MachineModel):
    """Cost of moving between two placements of the same variables.

    Placements map (set, var, copy) -> node. Copies of one variable moving
    from the same source to the same destination ride together and are
    charged once. Returns (per-class units, per-set per-class units).
    """
    by_class: dict = {}
    by_set: dict = {}
    moves = set()
    for key, src in before.items():
        dst = after.get(key)
        if dst is None or dst == src:
            continue
        moves.add((key[0], key[1], src, dst))
    for set_name, _var, src, dst in moves:
        cost = machine.move_cost(src, dst)
        for label, units in cost.items():
            w = machine.weight_of(label)
            by_class[label] = by_class.get(label, 0) + units * w
            per = by_set.setdefault(set_name, {})
            per[label] = per.get(label, 0) + units * w
    return by_class, by_set


# ---------------------------------------------------------------------------
# verification


def verify(bundle, machine: MachineModel | None = None, stretch=None) -> CostReport:
    """Replay a ScheduleBundle and produce its CostReport."""
    if machine is None:
        machine = bundle.machine
    elif not machine.same_machine(bundle.machine):
        raise MachineMismatch(
            f"bundle built for {bundle.machine.descriptor}, got {machine.descriptor}"
        )
    tm = TimeModel(bundle.step_sets)
    clockmap = flatten_time(tm, stretch)
    budget = bundle.budget if bundle.budget is not None else machine.memory_words
    report = CostReport(machine_descriptor=dict(machine.descriptor))
    violations = []

    instructions = bundle.instance.instructions
    instr_set = set(instructions)

    # -- schedule rows: coverage, booking, processor checks
    seen = {}
    slot_of = {}
    for instr, node, tv in bundle.schedule_rows:
        if instr in seen:
            violations.append(Violation(
                "DuplicateInstruction", node, tv,
                f"instruction {instr} also scheduled at {seen[instr]}"))
            continue
        seen[instr] = (node, tv)
        if instr not in instr_set:
            violations.append(Violation(
                "UncoveredInstruction", node, tv,
                f"{instr} is not an instruction of this instance"))
            continue
        if node not in machine.node_index:
            violations.append(Violation(
                "NonProcessorCompute", node, tv, f"unknown node {node}"))
            continue
        if not machine.is_processor(node):
            violations.append(Violation(
                "NonProcessorCompute", node, tv, f"{node} has no processing element"))
        clk = clockmap.clock(tv)
        if (node, clk) in slot_of:
            violations.append(Violation(
                "DoubleBooking", node, tv,
                f"{instr} and {slot_of[(node, clk)]} share clock {clk}"))
        else:
            slot_of[(node, clk)] = instr
    for instr in instructions:
        if instr not in seen:
            violations.append(Violation(
                "UncoveredInstruction", None, (), f"{instr} never scheduled"))
    coverage = sum(1 for i in instructions if i in seen)

    # -- operand residence
    for instr, node, tv in bundle.schedule_rows:
        if instr not in instr_set or instr in seen and seen[instr] != (node, tv):
            continue
        for set_name in ("A", "B", "C"):
            entry = bundle.inp.get(set_name, {}).get(instr)
            if entry is None:
                violations.append(Violation(
                    "MissingOperand", node, tv, f"no {set_name} operand route for {instr}"))
                continue
            var, copy, read_tv = entry
            if read_tv != tv:
                violations.append(Violation(
                    "MissingOperand", node, tv,
                    f"{set_name}{var} copy {copy} read at {read_tv}, needed at {tv}"))
                continue
            table = bundle.placement_at(tv)
            where = table.get((set_name, var, copy))
            if where != node:
                violations.append(Violation(
                    "MissingOperand", node, tv,
                    f"{set_name}{var} copy {copy} resides at {where}, needed at {node}"))

    # -- memory and traffic over placement boundaries
    keys = bundle.placement_keys()
    peak: dict = {}
    for key in keys:
        table = bundle.placements[key]
        load: dict = {}
        for (set_name, var, _copy), node in table.items():
            load.setdefault(node, set()).add((set_name, var))
        for node, words in load.items():
            name = repr(node)
            count = len(words)
            peak[name] = max(peak.get(name, 0), count)
            if count > budget:
                violations.append(Violation(
                    "MemoryExceeded", node, key,
                    f"{count} words resident, budget {budget}"))
    traffic: dict = {}
    set_traffic: dict = {}
    transitions = []
    for prev, cur in zip(keys, keys[1:]):
        by_class, by_set = traffic_delta(bundle.placements[prev],
                                         bundle.placements[cur], machine)
        for label, units in by_class.items():
            traffic[label] = traffic.get(label, 0) + units
        for s, per in by_set.items():
            acc = set_traffic.setdefault(s, {})
            for label, units in per.items():
                acc[label] = acc.get(label, 0) + units
        transitions.append({
            "from": list(prev),
            "to": list(cur),
            "by_class": {k: by_class[k] for k in sorted(by_class)},
            "by_set": {
                s: {k: v[k] for k in sorted(v)} for s, v in sorted(by_set.items())
            },
        })

    report.traffic = traffic
    report.set_traffic = set_traffic
    report.transitions = transitions
    report.peak_memory = peak
    report.makespan = clockmap.makespan([tv for _, _, tv in bundle.schedule_rows])
    report.coverage = coverage
    report.violations = sorted(
        violations, key=lambda v: (v.kind, repr(v.node), v.timevec, v.detail))
    return report


# ---------------------------------------------------------------------------
# algebraic consistency


def check_consistency(bundle) -> list:
    """Check rho = rho_d o rho_l on every generator, plus the pointwise
    operand condition loc(inp(x)) = node of f(x). Returns violation list."""
    problems = []
    homs = bundle.homs
    if homs is not None:
        for set_name, tables in sorted(homs.per_set.items()):
            for label in homs.g_labels:
                want = homs.rho[label]
                got = _apply_word(bundle, tables["rho_d"], tables["rho_l"][label])
                if not _nettime_eq(bundle, want, got):
                    problems.append(Violation(
                        "MissingOperand", None, (),
                        f"rho != rho_d o rho_l for generator {label} on set {set_name}: "
                        f"{want} vs {got}"))
    for instr, node, tv in bundle.schedule_rows:
        for set_name in ("A", "B", "C"):
            entry = bundle.inp.get(set_name, {}).get(instr)
            if entry is None:
                continue
            var, copy, read_tv = entry
            where = bundle.placement_at(read_tv).get((set_name, var, copy))
            if where != node or read_tv != tv:
                problems.append(Violation(
                    "MissingOperand", node, tv,
                    f"pointwise operand condition fails for {set_name}{var}"))
    return problems


def _apply_word(bundle, rho_d: dict, word: dict):
    net = None
    time = None
    for hlabel in sorted(word):
        power = word[hlabel]
        if not power:
            continue
        img_net, img_time = rho_d[hlabel]
        for _ in range(power):
            net = _net_compose(bundle, net, img_net)
            time = _time_add(bundle, time, img_time)
    return net, time


def _net_compose(bundle, a, b):
    if b is None:
        return a
    if a is None:
        return b
    kind = bundle.machine.kind
    if kind == "torus":
        dims = bundle.machine.descriptor["dims"]
        return tuple((x + y) % q for x, y, q in zip(a, b, dims))
    if kind == "fat_tree":
        return tuple(a[b[i]] for i in range(len(b)))  # perm images, right acts first
    if kind == "hex":
        return (a[0] + b[0], a[1] + b[1])
    raise ParseError(f"no network element algebra for machine kind {kind}")


def _time_add(bundle, a, b):
    if b is None:
        return a
    if a is None:
        return b
    mods = bundle.hom_time_moduli()
    return tuple((x + y) % m for x, y, m in zip(a, b, mods))


def _nettime_eq(bundle, want, got):
    w_net, w_time = want
    g_net, g_time = got
    return _norm_net(bundle, w_net) == _norm_net(bundle, g_net) and \
        _norm_time(bundle, w_time) == _norm_time(bundle, g_time)


def _norm_net(bundle, net):
    if net is None:
        return None
    kind = bundle.machine.kind
    if kind == "torus":
        dims = bundle.machine.descriptor["dims"]
        t = tuple(v % q for v, q in zip(net, dims))
        return None if all(v == 0 for v in t) else t
    if kind == "fat_tree":
        t = tuple(net)
        return None if t == tuple(range(len(t))) else t
    if kind == "hex":
        t = (net[0], net[1])
        return None if t == (0, 0) else t
    return net


def _norm_time(bundle, time):
    mods = bundle.hom_time_moduli()
    if time is None:
        return (0,) * len(mods)
    return tuple(v % m for v, m in zip(time, mods))


# ---------------------------------------------------------------------------
# comparison


def compare_cost(a: CostReport, b: CostReport) -> dict:
    """Deterministic ordering of two reports from the same machine."""
    if a.machine_descriptor != b.machine_descriptor:
        raise MachineMismatch("reports come from different machines")

    def rel(x, y):
        return "less" if x < y else ("greater" if x > y else "equal")

    labels = sorted(set(a.traffic) | set(b.traffic))
    by_class = {lab: rel(a.traffic.get(lab, 0), b.traffic.get(lab, 0)) for lab in labels}
    sets = sorted(set(a.set_traffic) | set(b.set_traffic))
    by_set = {
        s: rel(sum(a.set_traffic.get(s, {}).values()),
               sum(b.set_traffic.get(s, {}).values()))
        for s in sets
    }
    return {
        "total": rel(a.total_traffic(), b.total_traffic()),
        "by_class": by_class,
        "by_set": by_set,
        "makespan": rel(a.makespan, b.makespan),
        "violations": rel(len(a.violations), len(b.violations)),
    }
