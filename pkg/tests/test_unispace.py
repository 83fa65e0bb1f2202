import random

import pytest

from unifact.errors import CapacityError
from unifact.ff import field, pick_zeta, solve_mu
from unifact.unispace import (
    Subspace,
    Vector,
    form_eval,
    norm_one_array,
    norm_one_count,
    norm_one_domain,
    perp,
    space_for,
    standard_objects,
)


def random_vector(sp, rng):
    return Vector(sp, tuple(rng.randrange(sp.spec.q2) for _ in range(sp.n)))


def test_gram_shape(space42):
    sp = space42
    spec = sp.spec
    one = spec.one
    # hyperbolic-pair layout
    assert form_eval(sp, sp.e(1), sp.f(1)).idx == one
    assert form_eval(sp, sp.e(2), sp.f(2)).idx == one
    assert form_eval(sp, sp.e(1), sp.e(2)).idx == 0
    assert form_eval(sp, sp.f(1), sp.f(2)).idx == 0
    assert form_eval(sp, sp.e(1), sp.f(2)).idx == 0
    # conjugate symmetry of the gram matrix
    for i in range(sp.n):
        for j in range(sp.n):
            assert sp.gram[i][j] == int(spec.conj[sp.gram[j][i]])


def test_conjugate_symmetry_random(space42):
    sp = space42
    rng = random.Random(42)
    for _ in range(100):
        x, y = random_vector(sp, rng), random_vector(sp, rng)
        assert form_eval(sp, x, y) == form_eval(sp, y, x).conj()


def test_sesquilinearity(space42):
    sp = space42
    spec = sp.spec
    rng = random.Random(3)
    for _ in range(25):
        x, y = random_vector(sp, rng), random_vector(sp, rng)
        c = spec.elt(rng.randrange(spec.q2))
        assert form_eval(sp, x.scale(c), y) == c * form_eval(sp, x, y)
        assert form_eval(sp, x, y.scale(c)) == c.conj() * form_eval(sp, x, y)
    # the convention pinning example: beta(e1, lam f1) = lam^q
    assert form_eval(sp, sp.e(1), sp.f(1).scale(sp.lam)) == sp.lam.conj()


def test_form_examples(space42, objs42):
    sp, so = space42, objs42
    one = sp.spec.elt([1])
    assert form_eval(sp, so.v, so.v) == one
    mu, zeta = solve_mu(sp.spec), pick_zeta(sp.spec)
    expected = mu * zeta.conj() + zeta * mu.conj()
    got = form_eval(sp, so.u, so.u)
    assert got == expected
    assert got == mu * (zeta.conj() - zeta)
    assert got.idx != 0


def test_dimension_mismatch(space42):
    other = space_for(2, 6)
    with pytest.raises(ValueError):
        form_eval(space42, other.e(1), space42.e(1))


def test_perp(space42, objs42):
    sp, so = space42, objs42
    vspan = Subspace.span(sp, [so.v])
    pv = perp(sp, vspan)
    assert pv.dim == sp.n - 1
    assert not pv.contains_vector(so.v)          # v nonsingular
    assert perp(sp, pv) == vspan
    full = Subspace.span(sp, [sp.basis_vector(i) for i in range(sp.n)])
    assert perp(sp, full).dim == 0
    # the orthogonal complement of u in the (e1, f1)-plane contains w
    uspan = Subspace.span(sp, [so.u])
    assert perp(sp, uspan).contains_vector(so.w)


def test_u_cap_vperp_is_u1(space42, objs42):
    sp, so = space42, objs42
    assert sp.lam.idx != 0
    pv = perp(sp, Subspace.span(sp, [so.v]))
    assert so.U.intersect(pv) == so.U1


@pytest.mark.parametrize("q,n", [(2, 3), (2, 4), (3, 4), (2, 6)])
def test_norm_one_count(q, n):
    sp = space_for(q, n)
    arr = norm_one_array(sp)
    assert len(arr) == norm_one_count(q, n)
    # spot check: every row really evaluates to 1 under the form
    rng = random.Random(n * 10 + q)
    one = sp.spec.elt([1])
    for _ in range(20):
        row = arr[rng.randrange(len(arr))]
        x = Vector(sp, tuple(int(c) for c in row))
        assert form_eval(sp, x, x) == one


def test_norm_one_counts_match_formula():
    assert norm_one_count(2, 4) == 120
    assert norm_one_count(2, 6) == 2016
    assert norm_one_count(2, 3) == 36
    assert norm_one_count(3, 4) == 2160


def test_norm_one_domain_vectors(space42):
    dom = norm_one_domain(space42)
    assert len(dom) == 120
    one = space42.spec.elt([1])
    assert all(form_eval(space42, x, x) == one for x in dom[:10])


def test_norm_one_budget():
    sp = space_for(2, 6)
    with pytest.raises(CapacityError) as ei:
        norm_one_array(sp, budget=1000)
    assert "1000" in str(ei.value)


def test_standard_objects(space42, objs42):
    sp, so = space42, objs42
    assert so.U.dim == sp.m
    assert so.U1.dim == sp.m - 1
    assert so.W.dim == sp.m
    # U totally isotropic
    for x in so.U.basis_vectors():
        for y in so.U.basis_vectors():
            assert form_eval(sp, x, y).idx == 0
    # v = e1 + lam f1 sits in U + W and is nonsingular
    uw = Subspace.span(sp, so.U.basis_vectors() + so.W.basis_vectors())
    assert uw.contains_vector(so.v)
    assert form_eval(sp, so.v, so.v) == sp.spec.elt([1])


def test_standard_objects_odd_rejected():
    with pytest.raises(ValueError):
        standard_objects(space_for(2, 3))


def test_subspace_canonical():
    sp = space_for(2, 4)
    a = Subspace.span(sp, [sp.e(1), sp.e(2)])
    b = Subspace.span(sp, [sp.e(2), sp.e(1) + sp.e(2)])
    assert a == b
    assert a.rows == b.rows


def test_subspace_intersect_contains():
    sp = space_for(2, 4)
    a = Subspace.span(sp, [sp.e(1), sp.e(2)])
    b = Subspace.span(sp, [sp.e(1), sp.f(1)])
    meet = a.intersect(b)
    assert meet.dim == 1
    assert meet.contains_vector(sp.e(1))
    assert a.contains(meet) and b.contains(meet)
