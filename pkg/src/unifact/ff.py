"""Exact arithmetic in GF(p^(2f)) with its index-2 subfield GF(q), q = p^f.

Elements are polynomials over GF(p) modulo a fixed monic irreducible of
degree 2f.  Every element is identified with an integer index:

    index([c0, c1, ..., c_{2f-1}]) = c0*p^(2f-1) + c1*p^(2f-2) + ... + c_{2f-1}

so that index order equals lexicographic order on coefficient vectors
(low-degree coefficient first and most significant).  All "first solution"
searches use this order, which makes them reproducible across runs.

The modulus for each supported (p, 2f) is the lexicographically first monic
irreducible polynomial; the resulting table is frozen below and re-verified
at construction time by trial division.

The subfield GF(q) is not a separate type: it is the fixed field of the
conjugation x -> x^q, and membership is a predicate.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

# Desk-scale bound: every downstream domain enumeration stays tractable.
MAX_FIELD_SIZE = 256

# Lexicographically first monic irreducible of degree 2f over GF(p),
# as a low-degree-first coefficient list including the leading 1.
MODULUS_TABLE = {
    (2, 2): (1, 1, 1),
    (2, 4): (1, 0, 0, 1, 1),
    (2, 8): (1, 0, 0, 0, 1, 1, 0, 1, 1),
    (3, 2): (1, 0, 1),
    (3, 4): (1, 0, 1, 1, 1),
    (5, 2): (1, 1, 1),
    (5, 4): (1, 0, 1, 1, 1),
    (7, 2): (1, 0, 1),
}


def _poly_mul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    while out and out[-1] == 0:
        out.pop()
    return out


def _poly_rem(a, m, p):
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


def _is_irreducible(m, p):
    """Trial factorization; fine for degree <= 8."""
    import itertools

    d = len(m) - 1
    for deg in range(1, d // 2 + 1):
        for tail in itertools.product(range(p), repeat=deg):
            f = list(tail) + [1]
            if not _poly_rem(m, f, p):
                return False
    return True


def _is_prime(n):
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


class FieldSpec:
    """GF(p^(2f)) with precomputed arithmetic tables.

    Instances are immutable and shared via the `field` factory; all
    arithmetic is table lookup on element indices.
    """

    def __init__(self, p: int, f: int):
        if not _is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if f < 1:
            raise ValueError("f must be a positive integer")
        q = p**f
        q2 = q * q
        if q2 > MAX_FIELD_SIZE:
            raise ValueError(
                f"field GF({q2}) exceeds the desk-scale bound {MAX_FIELD_SIZE}"
            )
        key = (p, 2 * f)
        if key not in MODULUS_TABLE:
            raise ValueError(f"no modulus on record for (p, 2f) = {key}")
        self.p = p
        self.f = f
        self.q = q
        self.q2 = q2
        self.deg = 2 * f
        self.modulus = MODULUS_TABLE[key]
        if not _is_irreducible(list(self.modulus), p):
            raise ValueError(f"modulus {self.modulus} is reducible over GF({p})")
        self._build_tables()

    def _build_tables(self):
        p, deg, q2 = self.p, self.deg, self.q2
        # index <-> coefficient vector, low-degree-first, c0 most significant
        coeffs = np.zeros((q2, deg), dtype=np.int16)
        for idx in range(q2):
            r = idx
            for i in range(deg - 1, -1, -1):
                coeffs[idx, i] = r % p
                r //= p
        self._coeffs = coeffs
        weights = np.array([p ** (deg - 1 - i) for i in range(deg)], dtype=np.int64)
        self._weights = weights

        def to_idx(cs):
            cs = list(cs) + [0] * (deg - len(cs))
            return int(sum(int(c) * int(w) for c, w in zip(cs, weights)))

        self._to_idx = to_idx

        add = np.zeros((q2, q2), dtype=np.int16)
        for a in range(q2):
            s = (coeffs[a][None, :] + coeffs) % p
            add[a] = (s.astype(np.int64) @ weights).astype(np.int16)
        self.add = add

        mul = np.zeros((q2, q2), dtype=np.int16)
        mod = list(self.modulus)
        polys = [list(coeffs[a]) for a in range(q2)]
        for a in range(q2):
            pa = [int(c) for c in polys[a]]
            for b in range(a, q2):
                pb = [int(c) for c in polys[b]]
                r = _poly_rem(_poly_mul(pa, pb, p), mod, p)
                v = to_idx(r)
                mul[a, b] = v
                mul[b, a] = v
        self.mul = mul

        neg = np.zeros(q2, dtype=np.int16)
        for a in range(q2):
            neg[a] = to_idx([(-c) % p for c in coeffs[a]])
        self.neg = neg

        self.zero = 0
        self.one = to_idx([1])

        inv = np.zeros(q2, dtype=np.int16)
        for a in range(1, q2):
            row = mul[a]
            inv[a] = int(np.nonzero(row == self.one)[0][0])
        self.inv = inv

        # frob[e][x] = x^(p^e) for e in 0..2f-1; conjugation is frob[f]
        frob = np.zeros((deg, q2), dtype=np.int16)
        frob[0] = np.arange(q2, dtype=np.int16)
        pth = np.zeros(q2, dtype=np.int16)
        for a in range(q2):
            r = a
            for _ in range(p - 1):
                r = int(mul[r, a])
            pth[a] = r
        for e in range(1, deg):
            frob[e] = pth[frob[e - 1]]
        self.frob = frob
        self.conj = frob[self.f % deg].copy()
        self.in_base = self.conj == frob[0]

    # -- element lookups -------------------------------------------------

    def coeffs_of(self, idx: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self._coeffs[idx])

    def idx_of(self, coeffs) -> int:
        cs = [int(c) % self.p for c in coeffs]
        if len(cs) > self.deg:
            raise ValueError(f"coefficient list longer than degree {self.deg}")
        return self._to_idx(cs)

    def elt(self, value) -> "FieldElt":
        """Make an element from an index, a coefficient list, or an elt."""
        if isinstance(value, FieldElt):
            if value.spec is not self:
                raise ValueError("element belongs to a different field")
            return value
        if isinstance(value, (list, tuple)):
            return FieldElt(self, self.idx_of(value))
        return FieldElt(self, int(value))

    def elements(self):
        """All field elements in enumeration order."""
        return [FieldElt(self, i) for i in range(self.q2)]

    def __repr__(self):
        return f"GF({self.q2})"

    # FieldSpecs are interned by the factory; identity comparison is fine.
    __hash__ = object.__hash__


@functools.lru_cache(maxsize=None)
def field(p: int, f: int) -> FieldSpec:
    """Shared FieldSpec for GF(p^(2f))."""
    return FieldSpec(p, f)


@dataclass(frozen=True, slots=True)
class FieldElt:
    """An element of GF(p^(2f)), identified by its enumeration index."""

    spec: FieldSpec
    idx: int

    def _check(self, other):
        if not isinstance(other, FieldElt):
            other = self.spec.elt(other)
        if other.spec is not self.spec:
            raise ValueError("mixed field specs")
        return other

    def __add__(self, other):
        other = self._check(other)
        return FieldElt(self.spec, int(self.spec.add[self.idx, other.idx]))

    def __sub__(self, other):
        other = self._check(other)
        return FieldElt(
            self.spec, int(self.spec.add[self.idx, self.spec.neg[other.idx]])
        )

    def __neg__(self):
        return FieldElt(self.spec, int(self.spec.neg[self.idx]))

    def __mul__(self, other):
        other = self._check(other)
        return FieldElt(self.spec, int(self.spec.mul[self.idx, other.idx]))

    def __truediv__(self, other):
        other = self._check(other)
        if other.idx == 0:
            raise ZeroDivisionError("division by zero field element")
        return FieldElt(
            self.spec, int(self.spec.mul[self.idx, self.spec.inv[other.idx]])
        )

    def __pow__(self, e: int):
        if e < 0:
            if self.idx == 0:
                raise ZeroDivisionError("inverse of zero field element")
            base = int(self.spec.inv[self.idx])
            e = -e
        else:
            base = self.idx
        acc = self.spec.one
        mul = self.spec.mul
        while e:
            if e & 1:
                acc = int(mul[acc, base])
            base = int(mul[base, base])
            e >>= 1
        return FieldElt(self.spec, acc)

    def inverse(self):
        if self.idx == 0:
            raise ZeroDivisionError("inverse of zero field element")
        return FieldElt(self.spec, int(self.spec.inv[self.idx]))

    def conj(self):
        """The conjugate x^q under the order-2 automorphism of GF(q^2)/GF(q)."""
        return FieldElt(self.spec, int(self.spec.conj[self.idx]))

    def frobenius(self, e: int):
        """x^(p^e); e is taken mod 2f."""
        return FieldElt(self.spec, int(self.spec.frob[e % self.spec.deg, self.idx]))

    def in_base_field(self) -> bool:
        """Whether x lies in GF(q), i.e. x^q = x."""
        return bool(self.spec.in_base[self.idx])

    def trace(self):
        """x + x^q, always in GF(q)."""
        return self + self.conj()

    def norm(self):
        """x^(1+q), always in GF(q)."""
        return self * self.conj()

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.spec.coeffs_of(self.idx)

    def is_zero(self) -> bool:
        return self.idx == 0

    def __bool__(self):
        return self.idx != 0

    def __repr__(self):
        return f"{list(self.coeffs)}@GF({self.spec.q2})"


# -- serialization ---------------------------------------------------------


def elt_to_str(x: FieldElt) -> str:
    """Serialize as a low-degree-first decimal coefficient list, e.g. [1,1]."""
    return "[" + ",".join(str(c) for c in x.coeffs) + "]"


def elt_from_str(spec: FieldSpec, s: str) -> FieldElt:
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"malformed field element {s!r}")
    body = s[1:-1].strip()
    cs = [int(t) for t in body.split(",")] if body else []
    if len(cs) != spec.deg:
        raise ValueError(
            f"element {s!r} has {len(cs)} coefficients, expected {spec.deg}"
        )
    if any(c < 0 or c >= spec.p for c in cs):
        raise ValueError(f"element {s!r} has coefficients outside 0..{spec.p - 1}")
    return FieldElt(spec, spec.idx_of(cs))


# -- distinguished constants ------------------------------------------------


def solve_lambda(spec: FieldSpec) -> FieldElt:
    """First element (enumeration order) with x + x^q = 1.

    A solution always exists: the trace of GF(q^2)/GF(q) is surjective.
    """
    one = spec.one
    for i in range(spec.q2):
        if int(spec.add[i, spec.conj[i]]) == one:
            return FieldElt(spec, i)
    raise AssertionError("trace map failed to be surjective")


def solve_mu(spec: FieldSpec) -> FieldElt:
    """An element with x^(q-1) = -1.

    In characteristic 2 this means x^(q-1) = 1 and the answer is pinned to 1;
    for odd p the first solution in enumeration order is returned.
    """
    if spec.p == 2:
        return FieldElt(spec, spec.one)
    target = int(spec.neg[spec.one])
    for i in range(1, spec.q2):
        if (FieldElt(spec, i) ** (spec.q - 1)).idx == target:
            return FieldElt(spec, i)
    raise AssertionError("no solution of x^(q-1) = -1; field tables corrupt")


def pick_zeta(spec: FieldSpec) -> FieldElt:
    """First element outside the subfield GF(q)."""
    for i in range(spec.q2):
        if not spec.in_base[i]:
            return FieldElt(spec, i)
    raise AssertionError("GF(q^2) = GF(q); field tables corrupt")
