"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; the whole module is the package's exit gate.
"""

import itertools
import json

import pytest

from symsched.actions import ActionSet, GroupAction
from symsched.bundle import bundle_from_json
from symsched.cli import main as cli_main
from symsched.equivariant import (
    brute_force_equivariant,
    identity_hom,
    preimage_size,
    solve_equivariant,
)
from symsched.errors import Divisibility, NotAHomomorphism
from symsched.groups import (
    Perm,
    apply_hom,
    cyclic,
    enumerate_group,
    generated_subgroup,
    identity_perm,
    iterated_wreath,
    make_hom,
    mod_group,
    shift_perm,
    symmetric,
)
from symsched.matmul import (
    TorusHomParams,
    cannon,
    cannon_blocked,
    fat_tree_recursive,
    hex_systolic,
    homs_to_cyclic,
    pmh_space_bounded,
    schedule_2_5d,
    torus_schedule,
)
from symsched.simulate import traffic_delta, verify


def ok(n, msg):
    print(f"PASS criterion {n}: {msg}")


def test_criterion_01_cannon_reproduction(tmp_path):
    bundle_path = tmp_path / "b.json"
    report_path = tmp_path / "r.json"
    code = cli_main(["preset", "cannon", "--q", "3",
                     "--out-bundle", str(bundle_path),
                     "--out-report", str(report_path)])
    assert code == 0
    rep = json.loads(report_path.read_text())
    assert rep["violations"] == []
    assert rep["coverage"] == 27
    assert rep["makespan"] == 3

    bundle = bundle_from_json(bundle_path.read_text())
    at0 = bundle.placement_at((0,))
    fig10_a = {
        (0, 0): (0, 0), (0, 1): (0, 1), (0, 2): (0, 2),
        (1, 1): (1, 0), (1, 2): (1, 1), (1, 0): (1, 2),
        (2, 2): (2, 0), (2, 0): (2, 1), (2, 1): (2, 2),
    }
    for var, node in fig10_a.items():
        assert at0[("A", var, 0)] == node

    assert "C" not in rep["set_traffic"]
    for tr in rep["transitions"]:
        assert sum(tr["by_set"]["A"].values()) == 9
        assert sum(tr["by_set"]["B"].values()) == 9
        assert "C" not in tr["by_set"]
    ok(1, "cannon q=3 clean, makespan 3, Fig-10 layout, A/B 9 hops per step, C 0")


def test_criterion_02_fat_tree_base(tmp_path):
    report_path = tmp_path / "r.json"
    code = cli_main(["preset", "fat-tree", "--d", "1",
                     "--out-bundle", str(tmp_path / "b.json"),
                     "--out-report", str(report_path)])
    assert code == 0
    rep = json.loads(report_path.read_text())
    assert rep["violations"] == []
    assert rep["traffic"]["tree-level-2"] == 4
    assert rep["traffic"]["tree-level-1"] == 8
    ok(2, "fat-tree d=1 clean with traffic (top 4, lower 8)")


def test_criterion_03_fat_tree_recursion():
    rep = verify(fat_tree_recursive(2))
    assert rep.ok()
    n = 4
    assert rep.traffic["tree-level-4"] == n * n
    assert rep.traffic["tree-level-3"] == 2 * n * n
    ok(3, "fat-tree d=2 moves n^2 across level 2d and 2n^2 across level 2d-1")


def test_criterion_04_25d_feasibility_and_comparison():
    bundle = schedule_2_5d(4, 64, 4)
    rep = verify(bundle)
    assert rep.ok()
    assert rep.coverage == 64
    phases = bundle.meta["phases"]
    for sv in range(*phases["main"]):
        table = bundle.placement_at((sv, 0))
        for var in ((0, 0), (1, 2), (3, 3)):
            for set_name in ("A", "B", "C"):
                layers = {table[(set_name, var, copy)][2] for copy in range(4)}
                assert layers == {0, 1, 2, 3}

    # stated baseline (blocked Cannon on p=64, c=1 at n=4) is infeasible:
    # q = 8 does not divide 4; documented spec defect, comparison done at the
    # smallest n feasible for both routes
    with pytest.raises(Divisibility):
        cannon_blocked(4, 4, 4, 8)
    with pytest.raises(Divisibility):
        schedule_2_5d(4, 64, 1)

    def main_phase_traffic(b):
        lo, hi = b.meta["phases"]["main"]
        keys = b.placement_keys()
        total = 0
        for prev, cur in zip(keys, keys[1:]):
            if lo <= prev[0] and cur[0] < hi:
                by_class, _ = traffic_delta(b.placements[prev], b.placements[cur],
                                            b.machine)
                total += sum(by_class.values())
        return total

    replicated = schedule_2_5d(8, 64, 4)
    flat = schedule_2_5d(8, 64, 1)
    assert verify(replicated).ok()
    assert verify(flat).ok()
    per_node_replicated = main_phase_traffic(replicated) / 64
    per_node_flat = main_phase_traffic(flat) / 64
    assert main_phase_traffic(replicated) < main_phase_traffic(flat)
    assert per_node_replicated < per_node_flat
    ok(4, "2.5d c=4 clean with 4 resident copies; main-phase traffic beats c=1")


# -- criterion 5 corpus


def regular_action(group, label):
    return GroupAction(group, ActionSet(label, group.elements()),
                       lambda g, x: group.op(g, x))


def natural_action(group, n, label):
    return GroupAction(group, ActionSet(label, tuple(range(n))),
                       lambda g, x: group.leaf_perm(g)(x))


def two_orbit_action(group, label):
    """Two disjoint copies of the regular orbit (free, non-transitive)."""
    elems = group.elements()
    pts = tuple(("L", repr(e)) for e in elems) + tuple(("R", repr(e)) for e in elems)
    table = {repr(e): e for e in elems}
    return GroupAction(
        group, ActionSet(label, pts),
        lambda g, pt: (pt[0], repr(group.op(g, table[pt[1]]))),
    )


def all_homs(src, tgt, cap=2000):
    """Brute-force homomorphism enumeration by generator images."""
    out = []
    n_gen = len(src.generators)
    candidates = enumerate_group(tgt)
    if len(candidates) ** n_gen > cap:
        return out
    for imgs in itertools.product(candidates, repeat=n_gen):
        try:
            out.append(make_hom(src, tgt, imgs))
        except NotAHomomorphism:
            continue
    return out


def corpus_cases():
    z2 = mod_group((2,))
    z3 = mod_group((3,))
    z4 = mod_group((4,))
    z22 = mod_group((2, 2))
    z6 = mod_group((6,))
    s3 = symmetric(3)
    iw = iterated_wreath(2)

    cases = []
    # free transitive sources, varied targets
    pairs = [
        (regular_action(z4, "z4"), regular_action(z4, "z4t"), z4, z4),
        (regular_action(z4, "z4"), regular_action(z2, "z2t"), z4, z2),
        (regular_action(z22, "z22"), regular_action(z4, "z4t"), z22, z4),
        (regular_action(z6, "z6"), regular_action(z3, "z3t"), z6, z3),
        (regular_action(s3, "s3"), regular_action(z2, "z2t"), s3, z2),
        (regular_action(s3, "s3"), natural_action(s3, 3, "nat3"), s3, s3),
        (regular_action(iw, "iw"), natural_action(iw, 4, "nat4"), iw, iw),
        (natural_action(s3, 3, "nat3"), natural_action(s3, 3, "nat3b"), s3, s3),
        (natural_action(iw, 4, "nat4"), natural_action(iw, 4, "nat4b"), iw, iw),
        (natural_action(iw, 4, "nat4"), regular_action(z2, "z2t"), iw, z2),
        (two_orbit_action(z2, "2orb"), regular_action(z2, "z2t"), z2, z2),
        (two_orbit_action(z3, "2orb3"), regular_action(z3, "z3t"), z3, z3),
        (two_orbit_action(z2, "2orb"), natural_action(iw, 4, "nat4"), z2, iw),
    ]
    for src_act, tgt_act, gsrc, gtgt in pairs:
        for rho in all_homs(gsrc, gtgt):
            cases.append((src_act, tgt_act, rho))
    return cases


def mapping_set(solutions):
    return {tuple((repr(x), repr(y)) for x, y in m.as_mapping()) for m in solutions}


def brute_set(mappings):
    return {tuple((repr(x), repr(y)) for x, y in m) for m in mappings}


def test_criterion_05_solver_equals_oracle():
    cases = corpus_cases()
    assert len(cases) >= 40
    checked_counts = 0
    for src_act, tgt_act, rho in cases:
        sols = solve_equivariant(src_act, tgt_act, rho)
        brute = brute_force_equivariant(src_act, tgt_act, rho)
        assert mapping_set(sols) == brute_set(brute)
        if (
            sols
            and src_act.is_transitive()
            and tgt_act.is_transitive()
            and sols[0].components[0].param.source_stab.order() == 1
        ):
            # free transitive source: solutions biject with target cosets
            K = sols[0].components[0].param.target_stab
            assert len(sols) == tgt_act.group.order() // K.order()
            checked_counts += 1
    assert checked_counts >= 10
    ok(5, f"solver == oracle on {len(cases)} cases; count law on "
          f"{checked_counts} free transitive cases")


def test_criterion_07_preimage_law():
    surjective_checked = 0
    for src_act, tgt_act, rho in corpus_cases():
        if not (src_act.is_transitive() and tgt_act.is_transitive()):
            continue
        for f in solve_equivariant(src_act, tgt_act, rho):
            fibers = {}
            for x, y in f.as_mapping():
                fibers[repr(y)] = fibers.get(repr(y), 0) + 1
            if len(fibers) == len(tgt_act.set.points):
                assert len(set(fibers.values())) == 1
                assert next(iter(fibers.values())) == preimage_size(f)
                surjective_checked += 1
    assert surjective_checked >= 10
    ok(7, f"fiber law verified on {surjective_checked} surjective transitive maps")


# -- criterion 6


def all_subgroups_of_symmetric(q):
    grp = symmetric(q)
    elems = enumerate_group(grp)
    seen = {}
    singles = {}
    for a in elems:
        sub = generated_subgroup(grp, [a])
        singles[a] = sub.element_set()
        seen.setdefault(sub.element_set(), (a,))
    for a, b in itertools.combinations(elems, 2):
        if b in singles[a]:
            continue
        sub = generated_subgroup(grp, [a, b])
        seen.setdefault(sub.element_set(), (a, b))
    return [(generated_subgroup(grp, gens), members) for members, gens in seen.items()]


def brute_homs_to_z(sub, t):
    """All homs sub -> Z/t by exhaustive generator images with word-table
    consistency checking; returns full element tables."""
    found = []
    elems = enumerate_group(sub)
    words = sub.element_words()
    for imgs in itertools.product(range(t), repeat=len(sub.generators)):
        table = {}
        ok_flag = True
        for e in elems:
            table[e] = sum(imgs[g] for g in words[e]) % t
        for a in elems:
            for b in elems:
                if table[sub.op(a, b)] != (table[a] + table[b]) % t:
                    ok_flag = False
                    break
            if not ok_flag:
                break
        if ok_flag:
            found.append(table)
    return found


@pytest.mark.parametrize("q", [3, 5])
def test_criterion_06_homomorphism_lemmas(q):
    subs = all_subgroups_of_symmetric(q)
    nontrivial_seen = 0
    for sub, members in subs:
        tables = brute_homs_to_z(sub, q)
        nontrivial = [t for t in tables if any(t.values())]
        fast = homs_to_cyclic(sub, q, q)
        # fast path and brute force agree as sets of element tables
        fast_tables = [
            {e: apply_hom(h, e).residues[0] for e in enumerate_group(h.source)}
            for h in fast
        ]
        assert len(fast) == len(nontrivial)
        assert sorted(map(sorted_items, fast_tables)) == sorted(
            map(sorted_items, nontrivial))
        # lemma: nontrivial homs exist only for cyclic primitive-generated groups
        is_cyclic_primitive = len(members) == q and any(
            e.is_primitive() for e in members if e != sub.identity())
        assert bool(nontrivial) == is_cyclic_primitive
        if nontrivial:
            nontrivial_seen += 1
        # lemma: imprimitive elements always land in the kernel
        for table in nontrivial:
            for e, v in table.items():
                if e != sub.identity() and not e.is_primitive():
                    assert v == 0
        # lemma: for primitive-generated subgroups, no nontrivial hom to Z/t
        # exists when q does not divide t (the lemma's hypothesis is a group
        # whose full-cycle generator must map outside the kernel)
        for t in (q + 1, 2 * q - 1):
            assert homs_to_cyclic(sub, q, t) == ()
            if is_cyclic_primitive:
                assert all(
                    not any(tab.values()) for tab in brute_homs_to_z(sub, t)
                )
    assert nontrivial_seen > 0
    ok(6, f"lemmas confirmed over all {len(subs)} subgroups of S_{q}")


def sorted_items(table):
    return tuple(sorted((repr(k), v) for k, v in table.items()))


# -- criterion 8


def identity_holds(q, rows, mu):
    """Independent statement of the movement identities, raw arithmetic."""
    for set_name, (r1, r2, rc) in TorusHomParams.SET_ROWS.items():
        m1, m2, mt = mu[set_name]
        tc = rows[rc][2]
        if (mt[0] * tc - rows[rc][0]) % q or (mt[1] * tc - rows[rc][1]) % q:
            return False
        for own, r in ((m1, r1), (m2, r2)):
            if (own[0] + rows[r][2] * mt[0] - rows[r][0]) % q:
                return False
            if (own[1] + rows[r][2] * mt[1] - rows[r][1]) % q:
                return False
    return True


def test_criterion_08_torus_commuting_sweep():
    q = 3
    accepted = 0
    rejected_perturbations = 0
    for flat in itertools.product(range(q), repeat=9):
        rows = (flat[0:3], flat[3:6], flat[6:9])
        try:
            mu = TorusHomParams.derive_mu(q, rows)
        except Exception:
            continue
        params = TorusHomParams(rows=rows, mu=mu)
        problems = params.violations(q)
        if problems:
            continue
        assert identity_holds(q, rows, mu)
        bundle = torus_schedule(q, params)
        rep = verify(bundle)
        assert rep.ok()
        accepted += 1
        # perturbing any single mu entry must break acceptance and the identity
        m1, m2, mt = mu["A"]
        bad = dict(mu)
        bad["A"] = (((m1[0] + 1) % q, m1[1]), m2, mt)
        bad_params = TorusHomParams(rows=rows, mu=bad)
        assert bad_params.violations(q)
        assert not identity_holds(q, rows, bad)
        rejected_perturbations += 1
    assert accepted == 3456
    assert rejected_perturbations == accepted
    ok(8, f"sweep accepted {accepted} parameter sets, all verified clean; "
          f"every perturbation rejected")


def test_criterion_09_hex_systolic():
    bundle = hex_systolic(3)
    rep = verify(bundle)
    assert rep.ok()
    assert rep.coverage == 27
    assert rep.makespan <= 9
    assert bundle.homs.rho["si"] == ((1, 0), (1,))    # g2
    assert bundle.homs.rho["sj"] == ((-1, -1), (1,))  # -g1
    assert bundle.homs.rho["sk"] == ((0, 1), (1,))    # g3
    direction = {"A": (0, 1), "B": (1, 0), "C": (-1, -1)}
    for t in range(8):
        before = bundle.placements[(t,)]
        after = bundle.placements[(t + 1,)]
        for key, node in before.items():
            du = after[key][0] - node[0]
            dv = after[key][1] - node[1]
            assert (du, dv) == direction[key[0]]
    ok(9, "hex q=3 clean in a 3q window; streams move along g3, g2, -g1")


def test_criterion_10_pmh_space_bound():
    seq = pmh_space_bounded([(48, 1)])
    order = [instr for instr, _n, _tv in
             sorted(seq.schedule_rows, key=lambda row: row[2])]

    def reference(i0, j0, k0, size):
        if size == 1:
            yield (i0, j0, k0)
            return
        h = size // 2
        for di in (0, 1):
            for dj in (0, 1):
                for dk in (0, 1):
                    yield from reference(i0 + di * h, j0 + dj * h, k0 + dk * h, h)

    assert order == list(reference(0, 0, 0, 4))
    assert verify(seq).ok()

    two = pmh_space_bounded([(12, 1), (48, 1)])
    rep = verify(two)
    assert rep.ok()
    m1 = 12
    task_bits = two.meta["level1_task_bits"]
    keys = two.placement_keys()
    crossings_at_switch = []
    for prev, cur in zip(keys, keys[1:]):
        by_class, _ = traffic_delta(two.placements[prev], two.placements[cur],
                                    two.machine)
        level2 = by_class.get("pmh-level-2", 0)
        if prev[:task_bits] == cur[:task_bits]:
            assert level2 == 0          # space bound: no boundary traffic inside
        else:
            assert level2 <= 3 * m1
            crossings_at_switch.append(level2)
    assert crossings_at_switch
    ok(10, f"Z-order matches the recursive reference; boundary traffic per "
           f"superstep <= {3 * m1} words")


def test_criterion_11_round_trip():
    makers = {
        "cannon": lambda: cannon(3),
        "cannon-blocked": lambda: cannon_blocked(6, 6, 6, 3),
        "2.5d": lambda: schedule_2_5d(4, 64, 4),
        "fat-tree": lambda: fat_tree_recursive(1),
        "pmh": lambda: pmh_space_bounded([(48, 1)]),
        "hex": lambda: hex_systolic(2),
    }
    for name, make in makers.items():
        bundle = make()
        text = bundle.to_json()
        again = bundle_from_json(text)
        assert again.to_json() == text, name
        assert verify(again).to_json() == verify(bundle).to_json(), name
    ok(11, "all six presets survive export -> import -> verify bit-exactly")
