import random

import numpy as np
import pytest

from unifact import construct
from unifact.errors import CapacityError, DomainNotPreservedError
from unifact.grp import (
    GroupHandle,
    SemilinearMap,
    act,
    load_chain,
    norm_one_domain_for,
    save_chain,
    set_chain_cache_dir,
)
from unifact.unispace import Subspace, Vector, space_for, standard_objects


def random_elt(G, rng):
    return G.random_element(rng)


def test_act_examples(space42, objs42):
    sp, so = space42, objs42
    gamma = construct.build_gamma(sp)
    assert act(gamma, sp.e(1)) == sp.f(1)
    assert act(gamma, sp.f(2)) == sp.e(2)
    ident = SemilinearMap.identity(sp)
    assert act(ident, so.v) == so.v
    phi = construct.build_phi(sp)
    lam2 = sp.lam * sp.lam
    assert act(phi, so.v) == sp.e(1) + sp.f(1).scale(lam2)
    assert lam2 == sp.lam.conj()          # q = 2: squaring is conjugation


def test_composition_convention(space42):
    """act(g * h, x) = act(h, act(g, x)) and perms compose the same way."""
    sp = space42
    rng = random.Random(11)
    G = construct.build_su(4, 2)
    gamma = construct.build_gamma(sp)
    phi = construct.build_phi(sp)
    pool = list(G.gens) + [gamma, phi]
    dom = G.domain
    for _ in range(50):
        g = pool[rng.randrange(len(pool))]
        h = pool[rng.randrange(len(pool))]
        x = dom.vector(rng.randrange(dom.size))
        assert act(g * h, x) == act(h, act(g, x))
        pg, ph, pgh = dom.perm_of(g), dom.perm_of(h), dom.perm_of(g * h)
        assert np.array_equal(pgh, ph[pg])


def test_inverse_and_identity(space42):
    sp = space42
    rng = random.Random(2)
    gamma = construct.build_gamma(sp)
    phi = construct.build_phi(sp)
    for g in [gamma, phi, phi * gamma]:
        assert (g * g.inverse()).is_identity()
        assert (g.inverse() * g).is_identity()


def test_perm_image_involution(su42, space42):
    gamma = construct.build_gamma(space42)
    p = su42.domain.perm_of(gamma)
    assert len(p) == 120
    assert not np.array_equal(p, np.arange(120))
    assert np.array_equal(p[p], np.arange(120))    # involution as permutation


def test_perm_image_identity(su42, space42):
    ident = SemilinearMap.identity(space42)
    assert np.array_equal(su42.domain.perm_of(ident), np.arange(120))


def test_domain_not_preserved(space42):
    # a non-isometry moves the norm-one set
    bad = SemilinearMap.from_rows(
        space42,
        [[[0, 1], 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
    )
    with pytest.raises(DomainNotPreservedError):
        norm_one_domain_for(space42).perm_of(bad)


def closed_form_su(n, q):
    o = q ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        o *= q**i - (-1) ** i
    return o


def test_bsgs_order_su42(su42):
    assert su42.order() == closed_form_su(4, 2) == 25920


def test_bsgs_order_small_cyclic(space42):
    gamma = construct.build_gamma(space42)
    H = GroupHandle.build(space42, [gamma], label="<gamma>")
    assert H.order() == 2


def test_bsgs_order_su32_via_stabilizer(su42, objs42):
    # SU3(2) is reached as a nonsingular-vector stabilizer: order 216
    K = su42.stabilizer(objs42.v)
    assert K.order() == 216


def test_order_invariance_under_shuffle_and_conjugation(su42, space42):
    rng = random.Random(9)
    gens = list(su42.gens)
    rng.shuffle(gens)
    G2 = GroupHandle.build(space42, gens, label="shuffled", seed=77)
    assert G2.order() == su42.order()
    x = su42.random_element(rng)
    conj = [x.inverse() * g * x for g in gens]
    G3 = GroupHandle.build(space42, conj, label="conjugated", seed=78)
    assert G3.order() == su42.order()


def test_orbit(su42, objs42, space42):
    orb = su42.orbit(objs42.v)
    assert len(orb) == 120                      # transitive on norm-one
    ident = SemilinearMap.identity(space42)
    H = GroupHandle.build(space42, [ident], label="1")
    assert H.orbit_vectors(objs42.v) == [objs42.v]
    assert su42.order() % len(orb) == 0


def test_orbit_outside_domain_rejected(su42, space42):
    with pytest.raises(ValueError):
        su42.orbit(space42.e(1))                # isotropic, not norm-one


def test_orbit_stabilizer_identity(su42, sp42, levi22, rs42):
    rng = random.Random(31)
    pool = [su42, sp42, levi22, rs42]
    for _ in range(50):
        G = pool[rng.randrange(len(pool))]
        x = G.domain.vector(rng.randrange(G.domain.size))
        orb = G.orbit_vectors(x)
        stab = G.stabilizer(x)
        assert len(orb) * stab.order() == G.order()


def test_stabilizer_examples(su42, objs42, space42, levi22):
    gamma = construct.build_gamma(space42)
    C2 = GroupHandle.build(space42, [gamma], label="<gamma>")
    assert C2.stabilizer(space42.e(1)).order() == 1    # gamma moves e1
    # T pointwise stabilizer of e1 and f1 has order |SL1(4)| = 1
    te = levi22.stabilizer(space42.e(1))
    assert te.stabilizer(space42.f(1)).order() == 1


def test_subspace_stabilizer(su42, objs42, space42):
    pu = su42.subspace_stabilizer(objs42.U)
    assert pu.order() == 960                    # q^(m^2) * |SL2(4)| = 16 * 60
    full = Subspace.span(space42, [space42.basis_vector(i) for i in range(4)])
    assert su42.subspace_stabilizer(full).order() == su42.order()


def test_subspace_stabilizer_point_count():
    # stabilizer of an isotropic line has index = number of such lines
    G = construct.build_su(3, 3)
    sp = G.space
    line = Subspace.span(sp, [sp.e(1)])
    stab = G.subspace_stabilizer(line)
    index = G.order() // stab.order()
    # oracle: enumerate isotropic lines as canonical echelon keys
    from unifact.unispace import all_vector_codes, form_eval

    seen = set()
    for row in all_vector_codes(sp)[1:]:
        x = Vector(sp, tuple(int(c) for c in row))
        if form_eval(sp, x, x).idx == 0:
            seen.add(Subspace.span(sp, [x]).rows)
    assert index == len(seen)


def test_membership(su42, su62, space42, objs42):
    gamma = construct.build_gamma(space42)
    assert gamma.det() == space42.spec.elt([1])      # (-1)^2 = 1
    assert su42.membership(gamma)
    assert su42.membership(SemilinearMap.identity(space42))
    assert not su42.membership(construct.build_phi(space42))
    sp6 = su62.space
    gamma6 = construct.build_gamma(sp6)              # det = (-1)^3 = 1 in char 2
    assert su62.membership(gamma6)


def test_membership_outside_order(su42, objs42):
    K = su42.stabilizer(objs42.v)
    moved = [g for g in su42.gens if act(g, objs42.v) != objs42.v]
    assert moved and not K.membership(moved[0])


def test_derived_core(space42, su42):
    gamma = construct.build_gamma(space42)
    C2 = GroupHandle.build(space42, [gamma], label="<gamma>")
    assert C2.derived_core().order() == 1            # abelian
    T = construct.build_levi_T(2, 2, space=space42)
    T2, _ = construct.assemble([T, gamma], label="SL2(4).2")
    d = T2.derived_core()
    assert d.order() == 60                           # back down to SL2(4)
    assert su42.derived_core().order() == su42.order()  # perfect


def test_intersection(su42, sp42, objs42, levi22, space42):
    assert su42.intersection(su42).order() == su42.order()
    Ku = su42.stabilizer(objs42.u)
    assert sp42.intersection(Ku).order() == 6
    gamma = construct.build_gamma(space42)
    H, _ = construct.assemble([levi22, gamma], label="T:gamma")
    Kv = su42.stabilizer(objs42.v)
    assert H.intersection(Kv).order() == 1


def test_intersection_budget(su42, objs42):
    # two incomparable stabilizers force the generic path; tiny budget trips it
    Kv = su42.stabilizer(objs42.v)
    Ku = su42.stabilizer(objs42.u)
    with pytest.raises(CapacityError):
        Kv.intersection(Ku, budget=10)


def test_chain_cache_round_trip(tmp_path, space42):
    set_chain_cache_dir(str(tmp_path))
    try:
        T = construct.build_levi_T(2, 2, space=space42)
        path = save_chain(T)
        assert path is not None
        cached = load_chain(space42, T.domain, T.gens)
        assert cached is not None and cached.order() == 60
        # corrupt the stored order; loader must reject and warn
        import json

        with open(path) as fh:
            payload = json.load(fh)
        payload["order"] = "61"
        with open(path, "w") as fh:
            json.dump(payload, fh)
        with pytest.warns(UserWarning):
            assert load_chain(space42, T.domain, T.gens) is None
    finally:
        set_chain_cache_dir(None)


def test_random_element_uniformish(su42):
    rng = random.Random(4)
    seen = set()
    for _ in range(40):
        g = su42.random_element(rng)
        assert su42.membership(g)
        seen.add(g.key())
    assert len(seen) > 30
