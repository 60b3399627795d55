"""The matmul scheduling instance: cyclic-group homomorphism enumeration,
torus schedule parameters, and preset constructors for every modeled
topology (torus, replicated torus, fat tree, memory hierarchy, hex array).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt

from .bundle import HomTables, MatmulInstance, ScheduleBundle, instance
from .errors import (
    ConditionViolated,
    Divisibility,
    MemoryBudget,
    NotPrime,
    ParameterInfeasible,
    WindowOverflow,
)
from .groups import (
    FiniteGroup,
    Homomorphism,
    ModVector,
    canonical_key,
    cyclic,
    make_hom,
    mod_group,
)
from .machines import fat_tree, hex_array, pmh, torus

__all__ = [
    "instance",
    "MatmulInstance",
    "is_prime",
    "homs_to_cyclic",
    "TorusHomParams",
    "torus_schedule",
    "cannon",
    "cannon_blocked",
    "schedule_2_5d",
    "fat_tree_recursive",
    "pmh_space_bounded",
    "hex_systolic",
]


# ---------------------------------------------------------------------------
# homomorphisms from subgroups of S_q to Z/t


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    f = 2
    while f * f <= q:
        if q % f == 0:
            return False
        f += 1
    return True


def homs_to_cyclic(G: FiniteGroup, q: int, t: int) -> tuple[Homomorphism, ...]:
    """All nontrivial homomorphisms from G (a subgroup of S_q, q prime) to Z/t.

    They exist only when G is cyclic of order q, generated by a full-cycle
    permutation; each is fixed by the image of that generator, which must be
    one of the q-1 nonzero elements of the order-q subgroup of Z/t.
    """
    if not is_prime(q):
        raise NotPrime(f"{q} is not prime; use generic enumeration")
    if t % q:
        return ()
    if G.order() != q:
        return ()
    gen = min(
        (e for e in G.elements() if e != G.identity() and e.is_primitive()),
        key=canonical_key,
        default=None,
    )
    if gen is None:
        return ()
    src = G if G.generators == (gen,) else FiniteGroup(
        kind="generated", parent=G.parent if G.kind == "generated" else G,
        generators=(gen,), enumeration_cap=G.enumeration_cap, name=G.name)
    target = cyclic(t)
    out = []
    unit = t // q
    for mult in range(1, q):
        image = ModVector(((mult * unit) % t,), (t,))
        out.append(make_hom(src, target, (image,)))
    return tuple(out)


# ---------------------------------------------------------------------------
# torus schedules


@dataclass(frozen=True)
class TorusHomParams:
    """Generator images for a 2D-torus schedule and per-set movement tables.

    rows[r] = (x, y, t) is the image of the r-th index shift. mu[set] holds
    ((m1x, m1y), (m2x, m2y), (mtx, mty)): images of the set's two index
    shifts and of the unit time step.
    """

    anchor: tuple = (0, 0, 0)
    rows: tuple = ()
    mu: dict = None

    # which f-matrix rows belong to each variable set, and which row is the
    # complementary index whose elimination yields the per-step movement
    SET_ROWS = {"A": (0, 1, 2), "B": (1, 2, 0), "C": (2, 0, 1)}

    @staticmethod
    def derive_mu(q: int, rows) -> dict:
        """The unique movement tables consistent with the schedule rows."""
        mu = {}
        for set_name, (r1, r2, rc) in TorusHomParams.SET_ROWS.items():
            tc = rows[rc][2] % q
            inv = _inv_mod(tc, q)
            if inv is None:
                raise ConditionViolated(
                    f"set {set_name}: complementary time coefficient {tc} "
                    f"is not invertible mod {q}")
            mtx = rows[rc][0] * inv % q
            mty = rows[rc][1] * inv % q
            own = []
            for r in (r1, r2):
                tr = rows[r][2] % q
                own.append(((rows[r][0] - tr * mtx) % q, (rows[r][1] - tr * mty) % q))
            mu[set_name] = (own[0], own[1], (mtx, mty))
        return mu

    @classmethod
    def cannon(cls, q: int) -> "TorusHomParams":
        rows = ((1 % q, 0, (-1) % q), (0, 0, 1 % q), (0, 1 % q, (-1) % q))
        return cls(anchor=(0, 0, 0), rows=rows,
                   mu=cls.derive_mu(q, rows) if q > 1 else
                   {"A": ((0, 0), (0, 0), (0, 0)),
                    "B": ((0, 0), (0, 0), (0, 0)),
                    "C": ((0, 0), (0, 0), (0, 0))})

    def violations(self, q: int) -> list[str]:
        """Failed identities, by name; empty means the parameters are valid."""
        if q == 1:
            return []
        problems = []
        if _det3_mod(self.rows, q) == 0 or gcd(_det3_mod(self.rows, q), q) != 1:
            problems.append("embedding: schedule matrix is singular mod q")
        for set_name, (r1, r2, rc) in self.SET_ROWS.items():
            entry = (self.mu or {}).get(set_name)
            if entry is None:
                problems.append(f"set {set_name}: movement table missing")
                continue
            m1, m2, mt = entry
            tc = self.rows[rc][2] % q
            if gcd(tc, q) != 1:
                problems.append(
                    f"set {set_name}: complementary time coefficient not a unit mod q")
                continue
            if ((mt[0] * tc) % q, (mt[1] * tc) % q) != \
                    (self.rows[rc][0] % q, self.rows[rc][1] % q):
                problems.append(
                    f"set {set_name}: time row is not the complementary row over t")
            for own, r in ((m1, r1), (m2, r2)):
                tr = self.rows[r][2] % q
                want = ((self.rows[r][0] - tr * mt[0]) % q,
                        (self.rows[r][1] - tr * mt[1]) % q)
                if (own[0] % q, own[1] % q) != want:
                    problems.append(
                        f"set {set_name}: commuting identity fails on index row {r}")
            det = (m1[0] * m2[1] - m1[1] * m2[0]) % q
            if gcd(det, q) != 1:
                problems.append(f"set {set_name}: placement is not an embedding")
        return problems


def _inv_mod(a: int, q: int):
    a %= q
    if gcd(a, q) != 1:
        return None
    return pow(a, -1, q)


def _det3_mod(rows, q: int) -> int:
    (a, b, c), (d, e, f), (g, h, i) = rows
    return (a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)) % q


def torus_schedule(q: int, params: TorusHomParams) -> ScheduleBundle:
    """Build and verify-construct a q x q torus schedule from parameters."""
    problems = params.violations(q)
    if problems:
        raise ConditionViolated("; ".join(problems))
    inst = instance(q, q, q)
    machine = torus([q, q])
    x0, y0, t0 = params.anchor
    rows = params.rows if q > 1 else ((0, 0, 0),) * 3

    def f(i, j, k):
        x = (x0 + i * rows[0][0] + j * rows[1][0] + k * rows[2][0]) % q
        y = (y0 + i * rows[0][1] + j * rows[1][1] + k * rows[2][1]) % q
        t = (t0 + i * rows[0][2] + j * rows[1][2] + k * rows[2][2]) % q
        return (x, y), (t,)

    schedule_rows = tuple((instr, *f(*instr)) for instr in inst.instructions)

    mu = params.mu if q > 1 else {s: ((0, 0), (0, 0), (0, 0)) for s in "ABC"}
    placements = {}
    for t in range(q):
        table = {}
        for set_name in ("A", "B", "C"):
            m1, m2, mt = mu[set_name]
            for (a, b) in inst.vars(set_name):
                x = (x0 + a * m1[0] + b * m2[0] + (t - t0) * mt[0]) % q
                y = (y0 + a * m1[1] + b * m2[1] + (t - t0) * mt[1]) % q
                table[(set_name, (a, b), 0)] = (x, y)
        placements[(t,)] = table

    inp = {s: {} for s in "ABC"}
    for instr, _node, tv in schedule_rows:
        ops = inst.operands(instr)
        for set_name in ("A", "B", "C"):
            inp[set_name][instr] = (ops[set_name], 0, tv)

    homs = _torus_hom_tables(q, rows, mu)
    return ScheduleBundle(
        kind="torus",
        instance=inst,
        machine=machine,
        copies=1,
        step_sets=(q,),
        placement_level=1,
        budget=3,
        schedule_rows=schedule_rows,
        placements=placements,
        inp=inp,
        homs=homs,
        meta={"anchor": list(params.anchor),
              "rows": [list(r) for r in rows],
              "mu": {s: [list(v) for v in mu[s]] for s in sorted(mu)}},
    )


def _torus_hom_tables(q, rows, mu) -> HomTables:
    g_labels = ("si", "sj", "sk")
    rho = {
        lab: ((rows[r][0] % q, rows[r][1] % q), (rows[r][2] % q,))
        for r, lab in enumerate(g_labels)
    }
    per_set = {}
    for set_name, (r1, r2, rc) in TorusHomParams.SET_ROWS.items():
        m1, m2, mt = mu[set_name]
        rho_l = {}
        for r, lab in enumerate(g_labels):
            word = {}
            if r == r1:
                word["row"] = 1
            elif r == r2:
                word["col"] = 1
            word["dt"] = rows[r][2] % q
            rho_l[lab] = word
        rho_d = {
            "row": ((m1[0] % q, m1[1] % q), (0,)),
            "col": ((m2[0] % q, m2[1] % q), (0,)),
            "dt": ((mt[0] % q, mt[1] % q), (1 % q,)),
        }
        per_set[set_name] = {"rho_l": rho_l, "rho_d": rho_d}
    return HomTables(g_labels=g_labels, rho=rho, per_set=per_set, time_moduli=(q,))


def cannon(q: int) -> ScheduleBundle:
    """Cannon's schedule: row-skewed A, column-skewed B, stationary C."""
    bundle = torus_schedule(q, TorusHomParams.cannon(q))
    bundle.kind = "cannon"
    return bundle


# ---------------------------------------------------------------------------
# blocked Cannon


def cannon_blocked(l: int, m: int, n: int, q: int) -> ScheduleBundle:
    """Blocked Cannon on a q x q torus; blocks move as units between supersteps."""
    if q < 1:
        raise ParameterInfeasible("q must be positive")
    if l % q or m % q or n % q:
        raise Divisibility(f"q={q} must divide each of l={l}, m={m}, n={n}")
    ql, qm, qn = l // q, m // q, n // q
    budget = ql * qm + qm * qn + qn * ql
    sub = ql * qm * qn
    inst = instance(l, m, n)
    machine = torus([q, q])

    rows = []
    for (i, j, k) in inst.instructions:
        bi, bj, bk = i // ql, j // qm, k // qn
        s = (bj - bi - bk) % q
        u = ((i % ql) * qm + (j % qm)) * qn + (k % qn)
        rows.append(((i, j, k), (bi, bk), (s, u)))
    schedule_rows = tuple(rows)

    placements = {}
    for s in range(q):
        table = {}
        for (a, b) in inst.vars("A"):
            table[("A", (a, b), 0)] = (a // ql, (b // qm - a // ql - s) % q)
        for (a, b) in inst.vars("B"):
            table[("B", (a, b), 0)] = ((a // qm - b // qn - s) % q, b // qn)
        for (a, b) in inst.vars("C"):
            table[("C", (a, b), 0)] = (b // ql, a // qn)
        placements[(s,)] = table

    inp = {sn: {} for sn in "ABC"}
    for instr, _node, tv in schedule_rows:
        ops = inst.operands(instr)
        for sn in "ABC":
            inp[sn][instr] = (ops[sn], 0, tv)

    base = TorusHomParams.cannon(q)
    homs = _torus_hom_tables(q, base.rows if q > 1 else ((0, 0, 0),) * 3,
                             base.mu)
    return ScheduleBundle(
        kind="cannon-blocked",
        instance=inst,
        machine=machine,
        copies=1,
        step_sets=(q, sub),
        placement_level=1,
        budget=budget,
        schedule_rows=schedule_rows,
        placements=placements,
        inp=inp,
        homs=homs,
        meta={"block": [ql, qm, qn], "budget_words": budget},
    )


# ---------------------------------------------------------------------------
# replicated (2.5D) schedule


def schedule_2_5d(n: int, p: int, c: int) -> ScheduleBundle:
    """Replicated Cannon on a q x q x c torus, q = sqrt(p/c), with an explicit
    ring broadcast prologue and C-reduction epilogue of c - 1 stages each."""
    if c < 1:
        raise ParameterInfeasible("c must be positive")
    if p % c:
        raise ParameterInfeasible(f"c={c} must divide p={p}")
    q = isqrt(p // c)
    if q * q * c != p:
        raise ParameterInfeasible(f"p/c = {p // c} is not a perfect square")
    if p * p % (c ** 3):
        raise ParameterInfeasible("p is not a multiple of c^(3/2)")
    if q % c:
        raise ParameterInfeasible(f"t = q/c must be an integer; q={q}, c={c}")
    t = q // c
    if n % (c * t):
        raise Divisibility(f"c*t = {c * t} must divide n = {n}")
    b = n // q
    inst = instance(n, n, n)
    machine = torus([q, q, c])
    pro = c - 1
    main_start, main_end = pro, pro + t
    total_sv = pro + t + (c - 1)
    sub = b ** 3

    def blocks(i, j, k):
        return i // b, j // b, k // b

    rows = []
    for (i, j, k) in inst.instructions:
        bi, bj, bk = blocks(i, j, k)
        g = (bj - bi - bk) % q
        z, tau = divmod(g, t)
        u = ((i % b) * b + (j % b)) * b + (k % b)
        rows.append(((i, j, k), (bi, bk, z), (main_start + tau, u)))
    schedule_rows = tuple(rows)

    def layer_positions(copy_layer, g_step):
        """Placement of all three sets for one copy at one global step."""
        table = {}
        for (a, bb) in inst.vars("A"):
            table[("A", (a, bb), copy_layer)] = (
                a // b, (bb // b - a // b - g_step) % q, copy_layer)
        for (a, bb) in inst.vars("B"):
            table[("B", (a, bb), copy_layer)] = (
                (a // b - bb // b - g_step) % q, bb // b, copy_layer)
        for (a, bb) in inst.vars("C"):
            table[("C", (a, bb), copy_layer)] = (bb // b, a // b, copy_layer)
        return table

    placements = {}
    for sv in range(total_sv):
        table = {}
        if sv < main_start:                      # broadcast pipeline
            for copy in range(c):
                layer = min(copy, sv)
                for key, node in layer_positions(layer, layer * t).items():
                    table[(key[0], key[1], copy)] = node
        elif sv < main_end:                      # main phase
            tau = sv - main_start
            for copy in range(c):
                table.update(layer_positions(copy, copy * t + tau))
        else:                                    # reduction pipeline for C
            stage = sv - main_end + 1
            for copy in range(c):
                frozen = layer_positions(copy, copy * t + (t - 1))
                for key, node in frozen.items():
                    if key[0] == "C":
                        node = (node[0], node[1], min(copy, c - 1 - stage))
                    table[key] = node
        placements[(sv,)] = table

    inp = {sn: {} for sn in "ABC"}
    for instr, node, tv in schedule_rows:
        ops = inst.operands(instr)
        for sn in "ABC":
            inp[sn][instr] = (ops[sn], node[2], tv)

    homs = _hom_tables_2_5d(q, c, t, b)
    return ScheduleBundle(
        kind="2.5d",
        instance=inst,
        machine=machine,
        copies=c,
        step_sets=(total_sv, sub),
        placement_level=1,
        budget=3 * b * b,
        schedule_rows=schedule_rows,
        placements=placements,
        inp=inp,
        homs=homs,
        meta={
            "q": q, "t": t, "block": b,
            "phases": {"prologue": [0, main_start],
                       "main": [main_start, main_end],
                       "epilogue": [main_end, total_sv]},
        },
    )


def _hom_tables_2_5d(q, c, t, b) -> HomTables:
    """Uniform-generator images: index shifts by b*t move whole layers."""
    mt = (t % q)
    g_labels = ["sic", "sjc", "skc"]
    rho = {
        "sic": ((mt, 0, (c - 1) % c), (0,)),
        "sjc": ((0, 0, 1 % c), (0,)),
        "skc": ((0, mt, (c - 1) % c), (0,)),
    }
    per_set = {}
    specs = {
        # set: (label of row shift, label of col shift, and rho_l words)
        "A": {"sic": {"rowc": 1, "cyc": c - 1}, "sjc": {"colc": 1, "cyc": 1},
              "skc": {"cyc": c - 1}},
        "B": {"sic": {"cyc": c - 1}, "sjc": {"rowc": 1, "cyc": 1},
              "skc": {"colc": 1, "cyc": c - 1}},
        "C": {"sic": {"colc": 1, "cyc": c - 1}, "sjc": {"cyc": 1},
              "skc": {"rowc": 1, "cyc": c - 1}},
    }
    rho_d_all = {
        "A": {"rowc": ((mt, (q - mt) % q, 0), (0,)),
              "colc": ((0, mt, 0), (0,)),
              "cyc": ((0, (q - mt) % q, 1 % c), (0,))},
        "B": {"rowc": ((mt, 0, 0), (0,)),
              "colc": (((q - mt) % q, mt, 0), (0,)),
              "cyc": (((q - mt) % q, 0, 1 % c), (0,))},
        "C": {"rowc": ((0, mt, 0), (0,)),
              "colc": ((mt, 0, 0), (0,)),
              "cyc": ((0, 0, 1 % c), (0,))},
    }
    extra = {}
    if b > 1 and b % c == 0:
        # block-internal copy shift: the paper's identity row, testable here
        for lab in ("wci", "wcj", "wck"):
            extra[lab] = (None, (0,))
            g_labels.append(lab)
    for set_name in "ABC":
        rho_l = dict(specs[set_name])
        rho_d = dict(rho_d_all[set_name])
        for lab in extra:
            rho_l[lab] = {}
        per_set[set_name] = {"rho_l": rho_l, "rho_d": rho_d}
    rho.update(extra)
    return HomTables(g_labels=tuple(g_labels), rho=rho, per_set=per_set,
                     time_moduli=(max(t, 1),))


# ---------------------------------------------------------------------------
# recursive fat-tree schedule


def fat_tree_recursive(d: int) -> ScheduleBundle:
    """Recursive 2^d-cubed matmul on the fat tree with 4^d leaves.

    Per bit level: the instruction's k and i bits select the leaf pair,
    the time bit is the parity i ^ j ^ k. A crosses the even leaf bits
    (top of each pair level), B the odd ones, C never moves.
    """
    if d < 1:
        raise ParameterInfeasible("d must be at least 1")
    n = 2 ** d
    inst = instance(n, n, n)
    machine = fat_tree(2 * d)

    def bit(v, lam):
        return (v >> lam) & 1

    def leaf_of(pairs):
        """pairs[lam] = (hi, lo) leaf bit pair at level lam."""
        leaf = 0
        for lam, (hi, lo) in enumerate(pairs):
            leaf |= (2 * hi + lo) << (2 * lam)
        return leaf

    rows = []
    for (i, j, k) in inst.instructions:
        leaf = leaf_of([(bit(k, lam), bit(i, lam)) for lam in range(d)])
        tv = tuple(bit(i, lam) ^ bit(j, lam) ^ bit(k, lam)
                   for lam in range(d - 1, -1, -1))
        rows.append(((i, j, k), leaf, tv))
    schedule_rows = tuple(rows)

    placements = {}
    for tv in _bit_vectors(d):
        table = {}
        tbit = {lam: tv[d - 1 - lam] for lam in range(d)}
        for (a, b) in inst.vars("A"):
            leaf = leaf_of([(bit(a, lam) ^ bit(b, lam) ^ tbit[lam], bit(a, lam))
                            for lam in range(d)])
            table[("A", (a, b), 0)] = leaf
        for (a, b) in inst.vars("B"):
            leaf = leaf_of([(bit(b, lam), tbit[lam] ^ bit(a, lam) ^ bit(b, lam))
                            for lam in range(d)])
            table[("B", (a, b), 0)] = leaf
        for (a, b) in inst.vars("C"):
            leaf = leaf_of([(bit(a, lam), bit(b, lam)) for lam in range(d)])
            table[("C", (a, b), 0)] = leaf
        placements[tv] = table

    inp = {sn: {} for sn in "ABC"}
    for instr, _leaf, tv in schedule_rows:
        ops = inst.operands(instr)
        for sn in "ABC":
            inp[sn][instr] = (ops[sn], 0, tv)

    homs = _fat_tree_hom_tables(d)
    return ScheduleBundle(
        kind="fat-tree",
        instance=inst,
        machine=machine,
        copies=1,
        step_sets=(2,) * d,
        placement_level=d,
        budget=3,
        schedule_rows=schedule_rows,
        placements=placements,
        inp=inp,
        homs=homs,
        meta={"d": d, "leaf_encoding": "pair level lam holds (k_bit, i_bit)"},
    )


def _bit_vectors(k):
    return tuple(
        tuple((v >> (k - 1 - p)) & 1 for p in range(k)) for v in range(2 ** k)
    )


def _flip_perm(nbits, mask):
    return tuple(x ^ mask for x in range(2 ** nbits))


def _fat_tree_hom_tables(d) -> HomTables:
    nbits = 2 * d
    g_labels = []
    rho = {}
    per_set = {s: {"rho_l": {}, "rho_d": {}} for s in "ABC"}
    moduli = (2,) * d

    def tflip(lam):
        return tuple(1 if pos == d - 1 - lam else 0 for pos in range(d))

    for lam in range(d):
        lo, hi = _flip_perm(nbits, 1 << (2 * lam)), _flip_perm(nbits, 1 << (2 * lam + 1))
        both = _flip_perm(nbits, 0b11 << (2 * lam))
        for idx, net in (("i", lo), ("j", None), ("k", hi)):
            lab = f"{idx}-{lam}"
            g_labels.append(lab)
            rho[lab] = (net, tflip(lam))
        # per-set movement generators at this level
        per_set["A"]["rho_d"][f"row-{lam}"] = (both, (0,) * d)
        per_set["A"]["rho_d"][f"col-{lam}"] = (hi, (0,) * d)
        per_set["A"]["rho_d"][f"dt-{lam}"] = (hi, tflip(lam))
        per_set["A"]["rho_l"][f"i-{lam}"] = {f"row-{lam}": 1, f"dt-{lam}": 1}
        per_set["A"]["rho_l"][f"j-{lam}"] = {f"col-{lam}": 1, f"dt-{lam}": 1}
        per_set["A"]["rho_l"][f"k-{lam}"] = {f"dt-{lam}": 1}

        per_set["B"]["rho_d"][f"row-{lam}"] = (lo, (0,) * d)
        per_set["B"]["rho_d"][f"col-{lam}"] = (both, (0,) * d)
        per_set["B"]["rho_d"][f"dt-{lam}"] = (lo, tflip(lam))
        per_set["B"]["rho_l"][f"i-{lam}"] = {f"dt-{lam}": 1}
        per_set["B"]["rho_l"][f"j-{lam}"] = {f"row-{lam}": 1, f"dt-{lam}": 1}
        per_set["B"]["rho_l"][f"k-{lam}"] = {f"col-{lam}": 1, f"dt-{lam}": 1}

        per_set["C"]["rho_d"][f"row-{lam}"] = (hi, (0,) * d)
        per_set["C"]["rho_d"][f"col-{lam}"] = (lo, (0,) * d)
        per_set["C"]["rho_d"][f"dt-{lam}"] = (None, tflip(lam))
        per_set["C"]["rho_l"][f"i-{lam}"] = {f"col-{lam}": 1, f"dt-{lam}": 1}
        per_set["C"]["rho_l"][f"j-{lam}"] = {f"dt-{lam}": 1}
        per_set["C"]["rho_l"][f"k-{lam}"] = {f"row-{lam}": 1, f"dt-{lam}": 1}

    return HomTables(g_labels=tuple(g_labels), rho=rho, per_set=per_set,
                     time_moduli=moduli)


# ---------------------------------------------------------------------------
# space-bounded schedule for the parallel memory hierarchy


def pmh_space_bounded(levels, memory_words: int | None = None) -> ScheduleBundle:
    """Depth-first blocked traversal executing each task inside the smallest
    cache it fits. levels = [(M_1, f_1), ..., (M_h, f_h)], innermost first.

    Parallel fan-out is supported at level 1 (a 2^(c/3)-cube of processors
    per step); higher levels must be sequential.
    """
    levels = [(int(M), int(f)) for M, f in levels]
    ds, cs = [], []
    for M, f in levels:
        if M % 3 or (M // 3) & (M // 3 - 1):
            raise ParameterInfeasible(f"M={M} must be 3 * power of two")
        d = (M // 3).bit_length() - 1
        if d % 2:
            raise ParameterInfeasible(f"M={M} needs an even exponent, got {d}")
        if f & (f - 1):
            raise ParameterInfeasible(f"f={f} must be a power of two")
        ds.append(d)
        cs.append(f.bit_length() - 1)
    if cs[0] % 3:
        raise ParameterInfeasible("innermost fan-out must be a cube (3 | c_1)")
    if any(c != 0 for c in cs[1:]):
        raise ParameterInfeasible("parallel fan-out above level 1 is not supported")
    prev = 0
    for lvl, d in enumerate(ds):
        span = d - prev
        if span <= 0 or span % 2:
            raise ParameterInfeasible("cache exponents must increase by even steps")
        if lvl == 0 and 3 * (d // 2) < cs[0]:
            raise ParameterInfeasible("more processors than level-1 task cells")
        prev = d
    h = len(levels)
    d_top = ds[-1]
    side = 2 ** (d_top // 2)
    beta = 2 ** (cs[0] // 3)
    inst = instance(side, side, side)

    time_bits = 3 * (d_top // 2) - cs[0]
    d1_half = ds[0] // 2
    level1_tasks_bits = 3 * (d_top - ds[0]) // 2  # upper time bits count

    nodes_total = 2 ** d_top
    if memory_words is None:
        deficit = 3 * beta * beta * (beta - 1)
        memory_words = 3 + (deficit + nodes_total - 1) // nodes_total if beta > 1 else 3
    machine = pmh(levels, memory_words=memory_words)
    budget = memory_words
    block_nodes = tuple(range(2 ** ds[0]))
    procs = tuple(range(beta ** 3))

    def morton_time(i, j, k) -> tuple:
        """Time bits, msb first: per index bit level (i, j, k), skipping the
        low proc bits of each index."""
        bits = []
        for lvl in range(d_top // 2 - 1, cs[0] // 3 - 1, -1):
            bits.extend(((i >> lvl) & 1, (j >> lvl) & 1, (k >> lvl) & 1))
        return tuple(bits)

    def proc_of(i, j, k) -> int:
        mask = beta - 1
        return ((i & mask) * beta + (j & mask)) * beta + (k & mask)

    rows = []
    for (i, j, k) in inst.instructions:
        rows.append(((i, j, k), proc_of(i, j, k), morton_time(i, j, k)))
    schedule_rows = tuple(rows)

    def task_ranges(upper_bits) -> tuple:
        """(i0, j0, k0) base of the level-1 task selected by the upper bits."""
        i0 = j0 = k0 = 0
        for pos in range(0, len(upper_bits), 3):
            i0 = (i0 << 1) | upper_bits[pos]
            j0 = (j0 << 1) | upper_bits[pos + 1]
            k0 = (k0 << 1) | upper_bits[pos + 2]
        s1 = 2 ** d1_half
        return i0 * s1, j0 * s1, k0 * s1

    def cube_base(tv) -> tuple:
        """(i, j, k) base of the active beta-cube for a full time vector."""
        i = j = k = 0
        for pos in range(0, time_bits, 3):
            i = (i << 1) | tv[pos]
            j = (j << 1) | tv[pos + 1]
            k = (k << 1) | tv[pos + 2]
        return i * beta, j * beta, k * beta

    def task_words(base) -> list:
        i0, j0, k0 = base
        s1 = 2 ** d1_half
        words = []
        for a in range(s1):
            for b in range(s1):
                words.append(("A", (i0 + a, j0 + b)))
                words.append(("B", (j0 + a, k0 + b)))
                words.append(("C", (k0 + a, i0 + b)))
        return sorted(set(words))

    all_words = sorted(
        {("A", v) for v in inst.vars("A")}
        | {("B", v) for v in inst.vars("B")}
        | {("C", v) for v in inst.vars("C")}
    )

    # sticky park outside the active block, canonical refill inside
    placements = {}
    park: dict = {}
    park_free: list = []
    prev_task = None
    for tv in _bit_vectors(time_bits):
        upper = tv[:level1_tasks_bits]
        base = task_ranges(upper)
        words = task_words(base)
        word_set = set(words)
        if prev_task is None:
            outside = [w for w in all_words if w not in word_set]
            slots = [n for n in machine.nodes if n not in set(block_nodes)
                     for _ in range(budget)]
            if len(outside) > len(slots):
                raise MemoryBudget("parked words exceed machine capacity")
            park = dict(zip(outside, slots))
            park_free = sorted(slots[len(outside):])
        elif base != prev_task:
            prev_set = set(task_words(prev_task))
            entering = sorted(word_set - prev_set)
            leaving = sorted(prev_set - word_set)
            freed = sorted(park.pop(w) for w in entering if w in park)
            freed = sorted(freed + park_free)
            for w, slot in zip(leaving, freed):
                park[w] = slot
            park_free = sorted(freed[len(leaving):])
        prev_task = base

        ci, cj, ck = cube_base(tv)
        table = {}
        used = {n: 0 for n in block_nodes}
        for p in procs:
            pk = p % beta
            pj = (p // beta) % beta
            pi = p // (beta * beta)
            i, j, k = ci + pi, cj + pj, ck + pk
            table[("A", (i, j), pk)] = p
            table[("B", (j, k), pi)] = p
            table[("C", (k, i), pj)] = p
            used[p] = 3
        pinned = {(s, v) for (s, v, _c) in table}
        spill = iter(sorted(n for n in block_nodes for _ in range(budget - used[n])))
        for w in words:
            if w in pinned:
                continue
            node = next(spill)
            for copy in range(_copies_of(w[0], beta)):
                table[(w[0], w[1], copy)] = node
        for w, node in park.items():
            for copy in range(_copies_of(w[0], beta)):
                table[(w[0], w[1], copy)] = node
        # inactive copies of pinned words ride with copy 0's processor
        for (s, v, c0), node in list(table.items()):
            for copy in range(_copies_of(s, beta)):
                if (s, v, copy) not in table:
                    table[(s, v, copy)] = node
        placements[tv] = table

    inp = {sn: {} for sn in "ABC"}
    for instr, _node, tv in schedule_rows:
        i, j, k = instr
        mask = beta - 1
        inp["A"][instr] = ((i, j), k & mask, tv)
        inp["B"][instr] = ((j, k), i & mask, tv)
        inp["C"][instr] = ((k, i), j & mask, tv)

    homs = _pmh_hom_tables(time_bits)
    return ScheduleBundle(
        kind="pmh",
        instance=inst,
        machine=machine,
        copies=beta,
        step_sets=(2,) * time_bits,
        placement_level=time_bits,
        budget=budget,
        schedule_rows=schedule_rows,
        placements=placements,
        inp=inp,
        homs=homs,
        meta={"levels": [list(l) for l in levels], "beta": beta,
              "level1_task_bits": level1_tasks_bits,
              "note": "processor-cube index bits are below hom-table resolution"},
    )


def _copies_of(set_name, beta):
    return beta


def _pmh_hom_tables(time_bits) -> HomTables:
    g_labels = []
    rho = {}
    per_set = {s: {"rho_l": {}, "rho_d": {}} for s in "ABC"}
    reader = {"A": ("i", "j", "k"), "B": ("j", "k", "i"), "C": ("k", "i", "j")}
    for pos in range(time_bits):
        idx = ("i", "j", "k")[pos % 3]
        lab = f"{idx}-{pos // 3}"
        g_labels.append(lab)
        tvec = tuple(1 if p == pos else 0 for p in range(time_bits))
        rho[lab] = (None, tvec)
        for s in "ABC":
            row_idx, col_idx, free_idx = reader[s]
            word = {f"dt-{pos}": 1}
            if idx == row_idx:
                word[f"row-{pos // 3}"] = 1
            elif idx == col_idx:
                word[f"col-{pos // 3}"] = 1
            per_set[s]["rho_l"][lab] = word
            per_set[s]["rho_d"][f"dt-{pos}"] = (None, tvec)
            per_set[s]["rho_d"].setdefault(f"row-{pos // 3}", (None, (0,) * time_bits))
            per_set[s]["rho_d"].setdefault(f"col-{pos // 3}", (None, (0,) * time_bits))
    return HomTables(g_labels=tuple(g_labels), rho=rho, per_set=per_set,
                     time_moduli=(2,) * time_bits)


# ---------------------------------------------------------------------------
# hexagonal systolic schedule


def hex_systolic(q: int, window: int | None = None, anchor=(0, 0)) -> ScheduleBundle:
    """Systolic q-cubed matmul on the hex array over 3q reserved steps."""
    if q < 1:
        raise ParameterInfeasible("q must be positive")
    W = window if window is not None else 3 * q
    machine = hex_array(W)
    inst = instance(q, q, q)
    u0, v0 = anchor
    T = 3 * q

    def node_a(a, b, t):
        return (u0 + a - b, v0 + t - a - 2 * b)

    def node_b(a, b, t):
        return (u0 + t - 2 * a - b, v0 + b - a)

    def node_c(a, b, t):
        return (u0 + 2 * b + a - t, v0 + b + 2 * a - t)

    rows = []
    for (i, j, k) in inst.instructions:
        node = (u0 + i - j, v0 - j + k)
        _require_in_window(node, W)
        rows.append(((i, j, k), node, (i + j + k,)))
    schedule_rows = tuple(rows)

    placements = {}
    for t in range(T):
        table = {}
        for (a, b) in inst.vars("A"):
            node = node_a(a, b, t)
            _require_in_window(node, W)
            table[("A", (a, b), 0)] = node
        for (a, b) in inst.vars("B"):
            node = node_b(a, b, t)
            _require_in_window(node, W)
            table[("B", (a, b), 0)] = node
        for (a, b) in inst.vars("C"):
            node = node_c(a, b, t)
            _require_in_window(node, W)
            table[("C", (a, b), 0)] = node
        placements[(t,)] = table

    inp = {sn: {} for sn in "ABC"}
    for instr, _node, tv in schedule_rows:
        ops = inst.operands(instr)
        for sn in "ABC":
            inp[sn][instr] = (ops[sn], 0, tv)

    homs = _hex_hom_tables(T)
    return ScheduleBundle(
        kind="hex",
        instance=inst,
        machine=machine,
        copies=1,
        step_sets=(T,),
        placement_level=1,
        budget=3,
        schedule_rows=schedule_rows,
        placements=placements,
        inp=inp,
        homs=homs,
        meta={"anchor": list(anchor), "window": W,
              "stream_directions": {"A": "g3", "B": "g2", "C": "-g1"}},
    )


def _require_in_window(node, W):
    if abs(node[0]) > W or abs(node[1]) > W:
        raise WindowOverflow(f"{node} leaves the +-{W} window")


def _hex_hom_tables(T) -> HomTables:
    g_labels = ("si", "sj", "sk")
    rho = {
        "si": ((1, 0), (1,)),
        "sj": ((-1, -1), (1,)),
        "sk": ((0, 1), (1,)),
    }
    per_set = {
        "A": {
            "rho_l": {"si": {"row": 1, "dt": 1}, "sj": {"col": 1, "dt": 1},
                      "sk": {"dt": 1}},
            "rho_d": {"row": ((1, -1), (0,)), "col": ((-1, -2), (0,)),
                      "dt": ((0, 1), (1,))},
        },
        "B": {
            "rho_l": {"si": {"dt": 1}, "sj": {"row": 1, "dt": 1},
                      "sk": {"col": 1, "dt": 1}},
            "rho_d": {"row": ((-2, -1), (0,)), "col": ((-1, 1), (0,)),
                      "dt": ((1, 0), (1,))},
        },
        "C": {
            "rho_l": {"si": {"col": 1, "dt": 1}, "sj": {"dt": 1},
                      "sk": {"row": 1, "dt": 1}},
            "rho_d": {"row": ((1, 2), (0,)), "col": ((2, 1), (0,)),
                      "dt": ((-1, -1), (1,))},
        },
    }
    return HomTables(g_labels=g_labels, rho=rho, per_set=per_set, time_moduli=(T,))
