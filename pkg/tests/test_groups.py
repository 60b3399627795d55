"""Group arithmetic, enumeration and homomorphism validation."""

import itertools

import pytest

from symsched import groups as G
from symsched.errors import CapExceeded, NotAHomomorphism, NotInGroup, StructureMismatch
from symsched.groups import (
    ModVector,
    Perm,
    apply_hom,
    compose,
    cyclic,
    enumerate_group,
    generated_subgroup,
    identity_perm,
    inverse,
    iterated_wreath,
    make_hom,
    mod_group,
    product,
    shift,
    shift_perm,
    symmetric,
    trivial,
    wreath,
)


def brute_closure(gens, op, ident):
    """Independent closure: no FiniteGroup machinery."""
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for cur in frontier:
            for g in gens:
                new = op(cur, g)
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
        frontier = nxt
    return seen


def test_compose_shift_steps():
    g = shift(3)
    two_step = compose(g, shift_perm(3), shift_perm(3))
    assert two_step == Perm((2, 0, 1))


def test_compose_torus_addition():
    g = mod_group((3, 3))
    a = ModVector((1, 0), (3, 3))
    b = ModVector((2, 2), (3, 3))
    assert compose(g, a, b) == ModVector((0, 2), (3, 3))


def test_compose_wreath_hand_expanded():
    # right factor acts first: swap-top then swap-left-pair is [0,1,2,3]->[2,3,1,0]
    iw = iterated_wreath(2)
    swap = Perm((1, 0))
    ident = identity_perm(2)
    swap_left = G.WreathTuple((swap, ident), ident)
    swap_top = G.WreathTuple((ident, ident), swap)
    first_top = compose(iw, swap_left, swap_top)
    assert iw.leaf_perm(first_top) == Perm((2, 3, 1, 0))
    first_left = compose(iw, swap_top, swap_left)
    assert iw.leaf_perm(first_left) == Perm((3, 2, 0, 1))


def test_compose_structure_mismatch():
    g = mod_group((3, 3))
    with pytest.raises(StructureMismatch):
        compose(g, ModVector((1, 0), (3, 3)), ModVector((1,), (3,)))


def test_inverse_examples():
    s5 = shift(5)
    assert inverse(s5, shift_perm(5)) == shift_perm(5, 4)
    t = mod_group((3, 3))
    assert inverse(t, ModVector((1, 2), (3, 3))) == ModVector((2, 1), (3, 3))
    s3 = symmetric(3)
    assert inverse(s3, Perm((1, 2, 0))) == Perm((2, 0, 1))


def test_compose_inverse_is_identity_everywhere():
    for grp in (shift(4), symmetric(3), mod_group((2, 3)), iterated_wreath(2)):
        for a in enumerate_group(grp):
            assert grp.op(a, grp.inv(a)) == grp.identity()


@pytest.mark.parametrize(
    "grp,expected",
    [
        (shift(3), 3),
        (symmetric(3), 6),
        (mod_group((2, 3)), 6),
        (iterated_wreath(2), 8),
        (wreath(symmetric(2), 2, trivial(2)), 4),
        (wreath(symmetric(2), 2, symmetric(2)), 8),
    ],
)
def test_enumerate_matches_order_formula(grp, expected):
    assert grp.order() == expected
    assert len(enumerate_group(grp)) == expected


def test_iterwr3_brute_closure_of_tree_swaps():
    iw3 = iterated_wreath(3)
    assert len(iw3.generators) == 7
    leaf_gens = [iw3.leaf_perm(g) for g in iw3.generators]
    closure = brute_closure(leaf_gens, lambda a, b: a.after(b), identity_perm(8))
    assert len(closure) == 128
    assert iw3.order() == 128
    assert len(enumerate_group(iw3)) == 128


def test_enumeration_cap():
    big = symmetric(12, cap=1000)
    with pytest.raises(CapExceeded):
        enumerate_group(big)
    assert big.order() == 479001600


def test_wreath_action_shape():
    # block-preserving permutation then block permutation, and a bijection
    iw = iterated_wreath(2)
    for elem in enumerate_group(iw):
        p = iw.leaf_perm(elem)
        assert sorted(p.images) == [0, 1, 2, 3]
        blocks_to = {p(0) // 2, p(1) // 2}, {p(2) // 2, p(3) // 2}
        assert all(len(b) == 1 for b in blocks_to)


def test_wreath_flatten_respects_composition():
    iw = iterated_wreath(2)
    elems = enumerate_group(iw)
    for a in elems:
        for b in elems:
            assert iw.leaf_perm(iw.op(a, b)) == iw.leaf_perm(a).after(iw.leaf_perm(b))


def all_homs_brute(src, tgt):
    """Brute-force homomorphism search: every generator-image combination,
    accepted iff the full pairwise law holds on the induced table."""
    found = []
    elems = enumerate_group(src)
    for imgs in itertools.product(enumerate_group(tgt), repeat=len(src.generators)):
        table = {}
        ok = True
        for e in elems:
            out = tgt.identity()
            for gi in src.element_words()[e]:
                out = tgt.op(out, imgs[gi])
            table[e] = out
        for a in elems:
            for b in elems:
                if table[src.op(a, b)] != tgt.op(table[a], table[b]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            found.append(imgs)
    return found


@pytest.mark.parametrize(
    "src,tgt",
    [
        (shift(3), cyclic(3)),
        (shift(3), cyclic(2)),
        (symmetric(3), cyclic(2)),
        (symmetric(3), cyclic(3)),
        (mod_group((2, 2)), cyclic(4)),
        (iterated_wreath(2), cyclic(2)),
        (symmetric(4), cyclic(2)),
    ],
)
def test_make_hom_agrees_with_brute_force(src, tgt):
    valid = set(all_homs_brute(src, tgt))
    for imgs in itertools.product(enumerate_group(tgt), repeat=len(src.generators)):
        try:
            make_hom(src, tgt, imgs)
            accepted = True
        except NotAHomomorphism:
            accepted = False
        assert accepted == (imgs in valid)


def test_make_hom_shift3_examples():
    ok = make_hom(shift(3), cyclic(3), (ModVector((1,), (3,)),))
    assert ok.validated
    with pytest.raises(NotAHomomorphism):
        make_hom(shift(3), cyclic(2), (ModVector((1,), (2,)),))


def fig8_table_hom():
    """The 2x2x2 base-case generator table as printed: rows over
    (lower-left, lower-right, top, time) flip flags."""
    src = product([symmetric(2)] * 3)
    iw = iterated_wreath(2)
    tgt = product([iw, cyclic(2)])
    swap = Perm((1, 0))
    ident = identity_perm(2)
    s00 = G.WreathTuple((swap, ident), ident)
    s01 = G.WreathTuple((ident, swap), ident)
    s10 = G.WreathTuple((ident, ident), swap)
    dt = ModVector((1,), (2,))
    e_n = iw.identity()
    e_t = ModVector((0,), (2,))

    def net(*parts):
        out = e_n
        for p in parts:
            out = iw.op(out, p)
        return out

    images = (
        G.ProductTuple((net(s00, s01), e_t)),
        G.ProductTuple((net(s00, s01, s10), dt)),
        G.ProductTuple((net(s10), e_t)),
    )
    return make_hom(src, tgt, images), (s00, s01, s10, dt)


def test_fig8_table_is_a_valid_hom():
    hom, _ = fig8_table_hom()
    assert hom.validated
    assert hom.target.order() == 16


def test_apply_hom_identity_and_products():
    hom, (s00, s01, s10, dt) = fig8_table_hom()
    src = hom.source
    assert apply_hom(hom, src.identity()) == hom.target.identity()
    sigma_j = src.generators[1]
    img = apply_hom(hom, sigma_j)
    iw = iterated_wreath(2)
    expected_net = iw.op(iw.op(s00, s01), s10)
    assert img.parts[0] == expected_net
    assert img.parts[1] == ModVector((1,), (2,))
    for a in enumerate_group(src):
        for b in enumerate_group(src):
            lhs = apply_hom(hom, src.op(a, b))
            rhs = hom.target.op(apply_hom(hom, a), apply_hom(hom, b))
            assert lhs == rhs


def test_apply_hom_rejects_foreign_element():
    hom = make_hom(shift(3), cyclic(3), (ModVector((1,), (3,)),))
    with pytest.raises(NotInGroup):
        apply_hom(hom, Perm((1, 0, 2)))


def test_generated_subgroup_words_and_order():
    s3 = symmetric(3)
    sub = generated_subgroup(s3, [Perm((1, 0, 2))])
    assert sub.order() == 2
    assert set(enumerate_group(sub)) == {identity_perm(3), Perm((1, 0, 2))}


def test_relation_validation_above_cap():
    # order 6 modvec group with cap 2 forces the relation path
    src = mod_group((6,), cap=2)
    ok = make_hom(src, cyclic(3), (ModVector((1,), (3,)),))
    assert ok.validated
    with pytest.raises(NotAHomomorphism):
        make_hom(src, cyclic(4), (ModVector((1,), (4,)),))
