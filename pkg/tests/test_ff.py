import itertools
import random

import pytest

from unifact.ff import (
    MODULUS_TABLE,
    field,
    elt_from_str,
    elt_to_str,
    pick_zeta,
    solve_lambda,
    solve_mu,
)


def brute_is_irreducible(coeffs, p):
    """Independent irreducibility check: trial division over GF(p)[x]."""
    def rem(a, m):
        a = list(a)
        while len(a) >= len(m):
            c = a[-1]
            if c:
                s = len(a) - len(m)
                for i in range(len(m)):
                    a[s + i] = (a[s + i] - c * m[i]) % p
            a.pop()
        while a and a[-1] == 0:
            a.pop()
        return a

    d = len(coeffs) - 1
    for deg in range(1, d // 2 + 1):
        for tail in itertools.product(range(p), repeat=deg):
            if not rem(coeffs, list(tail) + [1]):
                return False
    return True


def test_modulus_table_irreducible():
    for (p, deg), coeffs in MODULUS_TABLE.items():
        assert len(coeffs) == deg + 1 and coeffs[-1] == 1
        assert brute_is_irreducible(list(coeffs), p), (p, deg)


def test_forced_moduli():
    # GF(4) over the classic w^2 + w + 1; GF(9) as GF(3)[i] with i^2 = -1
    assert MODULUS_TABLE[(2, 2)] == (1, 1, 1)
    assert MODULUS_TABLE[(3, 2)] == (1, 0, 1)


def test_desk_scale_bound():
    # q^2 = 625 and 2401 both exceed the 256-element cap
    with pytest.raises(ValueError):
        field(5, 2)
    with pytest.raises(ValueError):
        field(7, 2)
    with pytest.raises(ValueError):
        field(4, 1)  # p must be prime


def test_gf4_forced_products():
    F = field(2, 1)
    w = F.elt([0, 1])
    assert (w * w).coeffs == (1, 1)          # w^2 = w + 1
    one = F.elt([1, 0])
    rng = random.Random(1)
    for _ in range(10):
        a = F.elt(rng.randrange(F.q2))
        assert a * one == a


def test_gf9_forced_products():
    F = field(3, 1)
    i = F.elt([0, 1])
    assert (i * i).coeffs == (2, 0)          # i^2 = -1 = 2


def test_field_axioms_sampled():
    for (p, f) in [(2, 1), (3, 1), (2, 2), (5, 1)]:
        F = field(p, f)
        rng = random.Random(13 * p + f)
        one = F.elt([1])
        for _ in range(40):
            a = F.elt(rng.randrange(F.q2))
            b = F.elt(rng.randrange(F.q2))
            c = F.elt(rng.randrange(F.q2))
            assert (a + b) * c == a * c + b * c
            assert a * b == b * a
            assert (a * b) * c == a * (b * c)
            if a.idx:
                assert a.inverse() * a == one


def test_division_by_zero():
    F = field(2, 1)
    with pytest.raises(ZeroDivisionError):
        F.elt([1, 0]) / F.elt(0)
    with pytest.raises(ZeroDivisionError):
        F.elt(0).inverse()


def test_mixed_specs_rejected():
    a = field(2, 1).elt([1, 0])
    b = field(3, 1).elt([1, 0])
    with pytest.raises(ValueError):
        a + b


def test_conj_involution_and_fixed_field():
    for (p, f) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2), (2, 4)]:
        F = field(p, f)
        fixed = 0
        for x in F.elements():
            assert x.conj().conj() == x
            if x.conj() == x:
                fixed += 1
                assert x.in_base_field()
        assert fixed == F.q


def test_conj_examples():
    F4 = field(2, 1)
    w = F4.elt([0, 1])
    assert w.conj() == w * w
    assert F4.elt(0).conj() == F4.elt(0)
    assert F4.elt([1, 0]).conj() == F4.elt([1, 0])
    F9 = field(3, 1)
    i = F9.elt([0, 1])
    assert i.conj() == -i                     # i^3 = -i


def test_conj_is_field_automorphism():
    F = field(2, 2)
    rng = random.Random(5)
    for _ in range(50):
        a = F.elt(rng.randrange(F.q2))
        b = F.elt(rng.randrange(F.q2))
        assert (a * b).conj() == a.conj() * b.conj()
        assert (a + b).conj() == a.conj() + b.conj()


def test_frobenius():
    F4 = field(2, 1)
    w = F4.elt([0, 1])
    assert w.frobenius(1) == w * w
    assert w.frobenius(0) == w
    F16 = field(2, 2)
    for x in F16.elements():
        assert x.frobenius(2) == x.conj()      # oracle: full enumeration
        assert x.frobenius(F16.deg) == x


def test_trace_norm_in_subfield():
    for (p, f) in [(2, 1), (3, 1), (2, 2), (5, 1)]:
        F = field(p, f)
        for x in F.elements():
            assert x.trace().in_base_field()
            assert x.norm().in_base_field()


def first_by_enumeration(F, pred):
    for x in F.elements():
        if pred(x):
            return x
    return None


@pytest.mark.parametrize("p,f", [(2, 1), (3, 1), (2, 2)])
def test_solve_lambda_is_first_solution(p, f):
    F = field(p, f)
    one = F.elt([1])
    oracle = first_by_enumeration(F, lambda x: x + x.conj() == one)
    lam = solve_lambda(F)
    assert lam == oracle
    assert lam + lam.conj() == one


def test_lambda_subfield_behavior():
    # p = 2: lambda + lambda = 0 != 1 forces lambda outside GF(q)
    for (p, f) in [(2, 1), (2, 2)]:
        lam = solve_lambda(field(p, f))
        assert not lam.in_base_field()
    # odd p: the pick still satisfies the trace equation
    for (p, f) in [(3, 1), (5, 1), (7, 1)]:
        F = field(p, f)
        lam = solve_lambda(F)
        assert lam + lam.conj() == F.elt([1])


def test_solve_mu():
    F4 = field(2, 1)
    assert solve_mu(F4) == F4.elt([1, 0])      # -1 = 1 in characteristic 2
    F9 = field(3, 1)
    mu = solve_mu(F9)
    assert mu == F9.elt([0, 1])                # i, found by enumeration
    assert mu * mu == -F9.elt([1])
    F25 = field(5, 1)
    mu = solve_mu(F25)
    assert mu ** 4 == -F25.elt([1])
    order = 1
    cur = mu
    one = F25.elt([1])
    while cur != one:
        cur = cur * mu
        order += 1
    assert order == 8


def test_pick_zeta():
    for (p, f) in [(2, 1), (3, 1), (2, 2)]:
        F = field(p, f)
        z = pick_zeta(F)
        assert z.conj() != z
        oracle = first_by_enumeration(F, lambda x: x.conj() != x)
        assert z == oracle
    assert pick_zeta(field(2, 1)).coeffs == (0, 1)   # the cube root w
    assert pick_zeta(field(3, 1)).coeffs == (0, 1)   # i


def test_serialization_round_trip():
    for (p, f) in [(2, 1), (3, 1), (2, 2)]:
        F = field(p, f)
        for x in F.elements():
            assert elt_from_str(F, elt_to_str(x)) == x
    F = field(2, 1)
    assert elt_to_str(F.elt([1, 1])) == "[1,1]"
    with pytest.raises(ValueError):
        elt_from_str(F, "[1,1,1]")
    with pytest.raises(ValueError):
        elt_from_str(F, "[2,0]")
    with pytest.raises(ValueError):
        elt_from_str(F, "1,1")


def test_enumeration_order_is_lex():
    F = field(2, 1)
    seq = [x.coeffs for x in F.elements()]
    assert seq == sorted(seq)
    F = field(3, 1)
    seq = [x.coeffs for x in F.elements()]
    assert seq == sorted(seq)
