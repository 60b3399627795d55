"""Coset maps, equivariant-map solving and the brute-force oracle."""

import pytest

from symsched import groups as G
from symsched.actions import ActionSet, GroupAction, stabilizer
from symsched.equivariant import (
    brute_force_equivariant,
    coset_map_exists,
    enumerate_coset_maps,
    identity_hom,
    iter_equivariant,
    preimage_size,
    solve_equivariant,
)
from symsched.errors import NonUniformFiber, NotTransitive, OracleCapExceeded
from symsched.groups import (
    ModVector,
    Perm,
    cyclic,
    generated_subgroup,
    identity_perm,
    iterated_wreath,
    make_hom,
    mod_group,
    product,
    shift,
    symmetric,
    trivial,
)


def perm_action(group, n):
    return GroupAction(group, ActionSet("pts", tuple(range(n))),
                       lambda g, x: group.leaf_perm(g)(x))


def regular_action(group):
    """Group acting on itself by left translation."""
    return GroupAction(group, ActionSet("self", group.elements()),
                       lambda g, x: group.op(g, x))


def mod_translation_action(group):
    return GroupAction(group, ActionSet("res", group.elements()),
                       lambda g, x: group.op(g, x))


def z4_subgroup(residues):
    z4 = mod_group((4,))
    elems = [ModVector((r,), (4,)) for r in residues]
    return z4, generated_subgroup(z4, elems)


def test_coset_map_exists_z4_contained():
    z4, L = z4_subgroup([0, 2])
    _, K = z4_subgroup([0, 2])
    rho = identity_hom(z4)
    assert coset_map_exists(z4, z4, rho, L, K, ModVector((0,), (4,)))


def test_coset_map_exists_fails_on_size():
    z4, L = z4_subgroup([0, 2])
    _, K = z4_subgroup([0])
    rho = identity_hom(z4)
    for a in z4.elements():
        assert not coset_map_exists(z4, z4, rho, L, K, a)


def test_coset_map_exists_s3_conjugation():
    s3 = symmetric(3)
    L = generated_subgroup(s3, [Perm((1, 0, 2))])   # <(01)>
    K = generated_subgroup(s3, [Perm((0, 2, 1))])   # <(12)>
    rho = identity_hom(s3)
    hits = [a for a in s3.elements() if coset_map_exists(s3, s3, rho, L, K, a)]
    # oracle: direct conjugation over all 6 elements
    expected = []
    for a in s3.elements():
        conj = {s3.op(s3.inv(a), s3.op(l, a)) for l in L.elements()}
        if conj <= K.element_set():
            expected.append(a)
    assert hits == sorted(expected, key=lambda e: repr(e))
    assert hits


def test_enumerate_coset_maps_counts():
    for q in (3, 5):
        zq = mod_group((q,))
        L = generated_subgroup(zq, [])
        rho = identity_hom(zq)
        params = enumerate_coset_maps(zq, zq, rho, L, L)
        assert len(params) == q
    s3 = symmetric(3)
    rho = identity_hom(s3)
    params = enumerate_coset_maps(s3, s3, rho, s3, s3)
    assert len(params) == 1


def test_enumerate_coset_maps_sign_hom():
    s3 = symmetric(3)
    z2 = cyclic(2)
    sign = make_hom(s3, z2, (ModVector((1,), (2,)), ModVector((0,), (2,))))
    L = generated_subgroup(s3, [])
    K = generated_subgroup(z2, [])
    params = enumerate_coset_maps(s3, z2, sign, L, K)
    assert len(params) == 2


def test_solve_shift3_rotations():
    g = shift(3)
    act = perm_action(g, 3)
    sols = solve_equivariant(act, act, identity_hom(g))
    assert len(sols) == 3
    mappings = {s.as_mapping() for s in sols}
    assert tuple((i, (i + 1) % 3) for i in range(3)) in mappings


def test_solve_no_solution_when_stabilizer_blocks():
    # free source, but target stabilizer cannot absorb rho(L): use L = G
    z4 = mod_group((4,))
    src = GroupAction(z4, ActionSet("one", (0,)), lambda g, x: x)  # L = G
    tgt = mod_translation_action(z4)                                # K = {e}
    sols = solve_equivariant(src, tgt, identity_hom(z4))
    assert sols == ()


def test_solver_matches_oracle_smoke():
    s3 = symmetric(3)
    act3 = perm_action(s3, 3)
    reg = regular_action(s3)
    for src, tgt in ((act3, act3), (reg, act3), (act3, reg)):
        sols = {m.as_mapping() for m in solve_equivariant(src, tgt, identity_hom(s3))}
        brute = set(brute_force_equivariant(src, tgt, identity_hom(s3)))
        assert sols == brute


def test_solver_matches_oracle_multi_orbit():
    z2 = mod_group((2,))
    pts = ActionSet("two_orbits", (0, 1, 2, 3))

    def act(g, x):
        flip = g.residues[0]
        if x < 2:
            return x ^ flip
        return 2 + ((x - 2) ^ flip)

    src = GroupAction(z2, pts, act)
    tgt = GroupAction(z2, ActionSet("pair", (0, 1)), lambda g, x: x ^ g.residues[0])
    rho = identity_hom(z2)
    sols = {m.as_mapping() for m in solve_equivariant(src, tgt, rho)}
    brute = set(brute_force_equivariant(src, tgt, rho))
    assert sols == brute
    assert len(sols) == 4


def test_fig8_rho_solutions_contain_anchored_schedule():
    src_grp = product([symmetric(2)] * 3)
    X = ActionSet("instr", tuple((i, j, k) for i in range(2) for j in range(2) for k in range(2)))

    def act_x(g, pt):
        return tuple(g.parts[t](pt[t]) for t in range(3))

    src = GroupAction(src_grp, X, act_x)

    iw = iterated_wreath(2)
    tgt_grp = product([iw, cyclic(2)])
    PT = ActionSet("slots", tuple((p, t) for p in range(4) for t in range(2)))

    def act_pt(g, pt):
        p, t = pt
        return (iw.leaf_perm(g.parts[0])(p), (t + g.parts[1].residues[0]) % 2)

    tgt = GroupAction(tgt_grp, PT, act_pt)

    swap = Perm((1, 0))
    ident = identity_perm(2)
    s00 = G.WreathTuple((swap, ident), ident)
    s01 = G.WreathTuple((ident, swap), ident)
    s10 = G.WreathTuple((ident, ident), swap)
    e_t = ModVector((0,), (2,))
    dt = ModVector((1,), (2,))
    both = iw.op(s00, s01)
    rho = make_hom(src_grp, tgt_grp, (
        G.ProductTuple((both, e_t)),
        G.ProductTuple((iw.op(both, s10), dt)),
        G.ProductTuple((s10, e_t)),
    ))

    sols = solve_equivariant(src, tgt, rho)
    assert len(sols) == 8  # free source: one solution per coset of the slot stabilizer
    anchored = [s for s in sols if s.eval((0, 0, 0)) == (0, 0)]
    assert len(anchored) == 1
    f = anchored[0]
    # the hom and the anchor fix every other image
    assert f.eval((1, 0, 0)) == (1, 0)
    assert f.eval((0, 1, 0)) == (3, 1)
    assert f.eval((0, 0, 1)) == (2, 0)
    assert f.satisfies_square()


def test_eval_well_defined_over_all_witnesses():
    s3 = symmetric(3)
    act = perm_action(s3, 3)
    sols = solve_equivariant(act, act, identity_hom(s3))
    for f in sols:
        for x in range(3):
            anchor = f.components[0].anchor_x
            for g in s3.elements():
                if act.apply(g, anchor) == x:
                    assert f.eval_via_witness(x, g) == f.eval(x)


def test_preimage_formula_and_measurement():
    z6 = mod_group((6,))
    src = mod_translation_action(z6)
    z3 = mod_group((3,))
    tgt = mod_translation_action(z3)
    rho = make_hom(z6, z3, (ModVector((1,), (3,)),))
    sols = solve_equivariant(src, tgt, rho)
    assert len(sols) == 3
    for f in sols:
        assert preimage_size(f) == 2
        fibers = {}
        for x, y in f.as_mapping():
            fibers.setdefault(repr(y), 0)
            fibers[repr(y)] += 1
        assert set(fibers.values()) == {2}


def test_preimage_requires_transitive():
    z2 = mod_group((2,))
    pts = ActionSet("two_free_orbits", (0, 1, 2, 3))

    def act(g, x):
        flip = g.residues[0]
        return (x ^ flip) if x < 2 else 2 + ((x - 2) ^ flip)

    src = GroupAction(z2, pts, act)
    tgt = mod_translation_action(z2)
    sols = solve_equivariant(src, tgt, identity_hom(z2))
    assert len(sols) == 4
    with pytest.raises(NotTransitive):
        preimage_size(sols[0])


def test_preimage_nonuniform_rejected():
    z2 = mod_group((2,))
    z4 = mod_group((4,))
    src = mod_translation_action(z2)
    tgt = mod_translation_action(z4)
    rho = make_hom(z2, z4, (ModVector((2,), (4,)),))
    sols = solve_equivariant(src, tgt, rho)
    assert len(sols) == 4
    with pytest.raises(NonUniformFiber):
        preimage_size(sols[0])


def test_brute_force_empty_source():
    z2 = mod_group((2,))
    src = GroupAction(z2, ActionSet("empty", ()), lambda g, x: x)
    tgt = mod_translation_action(z2)
    assert brute_force_equivariant(src, tgt, identity_hom(z2)) == ((),)


def test_brute_force_trivial_groups_all_functions():
    t = trivial(1)
    src = GroupAction(t, ActionSet("xs", (0, 1, 2)), lambda g, x: x)
    tgt = GroupAction(t, ActionSet("ys", ("a", "b")), lambda g, x: x)
    rho = identity_hom(t)
    assert len(brute_force_equivariant(src, tgt, rho)) == 8


def test_brute_force_cap():
    t = trivial(1)
    src = GroupAction(t, ActionSet("xs", tuple(range(8))), lambda g, x: x)
    tgt = GroupAction(t, ActionSet("ys", tuple(range(8))), lambda g, x: x)
    with pytest.raises(OracleCapExceeded):
        brute_force_equivariant(src, tgt, identity_hom(t), oracle_cap=1000)


def test_iter_equivariant_is_lazy():
    z3 = mod_group((3,))
    act = mod_translation_action(z3)
    gen = iter_equivariant(act, act, identity_hom(z3))
    first = next(gen)
    assert first.satisfies_square()
