"""Hermitian geometry: the space V over GF(q^2), its form, and the
distinguished vectors and subspaces every construction references.

Basis order is interleaved: e1, f1, e2, f2, ..., e_m, f_m, with one extra
anchor vector of norm 1 appended when the dimension is odd.  The Gram matrix
is the hyperbolic block-antidiagonal [[0,1],[1,0]] per pair (plus a 1x1
block [1] for the anchor), so every pair (e_i, f_i) satisfies
beta(e_i, f_i) = 1 and all other basis products vanish.

Sesquilinearity convention: conjugation on the SECOND argument, so that
beta(e1, lam*f1) = lam^q.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .ff import FieldElt, FieldSpec, field, pick_zeta, solve_lambda, solve_mu
from . import linalg

# Full-space enumeration cap for norm_one_domain: q^(2n) <= this.
DEFAULT_ENUM_BUDGET = 2**20


class UnitarySpace:
    """Dimension-n Hermitian space over GF(q^2) in the standard basis."""

    def __init__(self, spec: FieldSpec, n: int):
        if n < 2:
            raise ValueError("need dimension >= 2")
        self.spec = spec
        self.n = n
        self.m = n // 2
        self.odd = bool(n % 2)
        one = spec.one
        gram = [[0] * n for _ in range(n)]
        for i in range(self.m):
            gram[2 * i][2 * i + 1] = one
            gram[2 * i + 1][2 * i] = one
        if self.odd:
            gram[n - 1][n - 1] = one
        self.gram = tuple(tuple(r) for r in gram)
        self.lam = solve_lambda(spec)
        self.labels = []
        for i in range(self.m):
            self.labels += [f"e{i + 1}", f"f{i + 1}"]
        if self.odd:
            self.labels.append("g")
        self._norm_one_cache = None

    # -- basis vectors ----------------------------------------------------

    def e(self, i: int) -> "Vector":
        """e_i, 1-indexed."""
        return self.basis_vector(2 * (i - 1))

    def f(self, i: int) -> "Vector":
        """f_i, 1-indexed."""
        return self.basis_vector(2 * (i - 1) + 1)

    def anchor(self) -> "Vector":
        if not self.odd:
            raise ValueError("even-dimensional space has no anchor vector")
        return self.basis_vector(self.n - 1)

    def basis_vector(self, k: int) -> "Vector":
        idxs = [0] * self.n
        idxs[k] = self.spec.one
        return Vector(self, tuple(idxs))

    def vector(self, elts) -> "Vector":
        """Vector from FieldElts, indices, or coefficient lists."""
        idxs = tuple(self.spec.elt(x).idx for x in elts)
        if len(idxs) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {len(idxs)}")
        return Vector(self, idxs)

    def __repr__(self):
        return f"U({self.n}, q={self.spec.q})"

    __hash__ = object.__hash__


@functools.lru_cache(maxsize=None)
def unitary_space(q_p: int, q_f: int, n: int) -> UnitarySpace:
    """Shared space for GF((p^f)^2)^n."""
    return UnitarySpace(field(q_p, q_f), n)


def space_for(q: int, n: int) -> UnitarySpace:
    """Unitary space of dimension n over GF(q^2), q = p^f."""
    p, f = _split_prime_power(q)
    return unitary_space(p, f, n)


def _split_prime_power(q: int) -> tuple[int, int]:
    for p in (2, 3, 5, 7, 11, 13):
        if q % p == 0:
            f = 0
            r = q
            while r % p == 0:
                r //= p
                f += 1
            if r != 1:
                raise ValueError(f"q = {q} is not a prime power")
            return p, f
    raise ValueError(f"q = {q} is not a supported prime power")


@dataclass(frozen=True, slots=True)
class Vector:
    """A row vector of field-element indices, tied to its space."""

    space: UnitarySpace
    idxs: tuple[int, ...]

    def __post_init__(self):
        if len(self.idxs) != self.space.n:
            raise ValueError("vector length does not match its space")

    @property
    def coords(self) -> tuple[FieldElt, ...]:
        return tuple(FieldElt(self.space.spec, i) for i in self.idxs)

    def __add__(self, other: "Vector") -> "Vector":
        return Vector(self.space, linalg.vec_add(self.space.spec, self.idxs, other.idxs))

    def scale(self, c) -> "Vector":
        c = self.space.spec.elt(c)
        return Vector(self.space, linalg.vec_scale(self.space.spec, c.idx, self.idxs))

    def is_zero(self) -> bool:
        return not any(self.idxs)

    def __repr__(self):
        terms = [
            f"{list(FieldElt(self.space.spec, c).coeffs)}*{lbl}"
            for c, lbl in zip(self.idxs, self.space.labels)
            if c
        ]
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True, slots=True)
class Subspace:
    """Row space in canonical reduced echelon form (unique per subspace)."""

    space: UnitarySpace
    rows: tuple[tuple[int, ...], ...]

    @classmethod
    def span(cls, space: UnitarySpace, vectors) -> "Subspace":
        rows = []
        for v in vectors:
            rows.append(v.idxs if isinstance(v, Vector) else tuple(int(c) for c in v))
        if not rows:
            return cls(space, ())
        red, _ = linalg.rref(space.spec, rows)
        return cls(space, red)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def contains_vector(self, v: Vector) -> bool:
        if self.dim == 0:
            return v.is_zero()
        red, _ = linalg.rref(self.space.spec, list(self.rows) + [v.idxs])
        return len(red) == self.dim

    def contains(self, other: "Subspace") -> bool:
        if other.dim == 0:
            return True
        red, _ = linalg.rref(self.space.spec, list(self.rows) + list(other.rows))
        return len(red) == self.dim

    def intersect(self, other: "Subspace") -> "Subspace":
        """Zassenhaus: rref [[A|A],[B|0]]; zero-left rows span the meet."""
        sp = self.space
        n = sp.n
        if self.dim == 0 or other.dim == 0:
            return Subspace(sp, ())
        block = [list(r) + list(r) for r in self.rows]
        block += [list(r) + [0] * n for r in other.rows]
        red, _ = linalg.rref(sp.spec, block)
        meet = [r[n:] for r in red if not any(r[:n])]
        return Subspace.span(sp, [tuple(r) for r in meet])

    def basis_vectors(self) -> list[Vector]:
        return [Vector(self.space, r) for r in self.rows]

    def __repr__(self):
        return f"Subspace(dim={self.dim} of {self.space!r})"


# -- the form ----------------------------------------------------------------


def form_eval(sp: UnitarySpace, x, y) -> FieldElt:
    """beta(x, y) = x . gram . conj(y)^T (conjugate-linear in y)."""
    xi = x.idxs if isinstance(x, Vector) else tuple(x)
    yi = y.idxs if isinstance(y, Vector) else tuple(y)
    if len(xi) != sp.n or len(yi) != sp.n:
        raise ValueError("dimension mismatch in form evaluation")
    spec = sp.spec
    add, mul, conj = spec.add, spec.mul, spec.conj
    acc = 0
    for i in range(sp.n):
        if not xi[i]:
            continue
        row = sp.gram[i]
        for j in range(sp.n):
            g = row[j]
            if g and yi[j]:
                term = int(mul[mul[xi[i], g], conj[yi[j]]])
                acc = int(add[acc, term])
    return FieldElt(spec, acc)


def perp(sp: UnitarySpace, s: Subspace) -> Subspace:
    """Orthogonal complement with respect to the form."""
    if s.dim == 0:
        return Subspace.span(sp, [sp.basis_vector(k) for k in range(sp.n)])
    spec = sp.spec
    # x in perp(s)  <=>  x . (gram . conj(rows)^T) = 0
    conj_rows = tuple(tuple(int(spec.conj[c]) for c in r) for r in s.rows)
    a = linalg.mat_mul(spec, sp.gram, linalg.transpose(conj_rows))
    ker = linalg.right_kernel(spec, a)
    return Subspace.span(sp, [tuple(r) for r in ker])


# -- domains and standard objects --------------------------------------------


def all_vector_codes(sp: UnitarySpace) -> np.ndarray:
    """All q^(2n) coordinate rows, in lexicographic code order."""
    q2, n = sp.spec.q2, sp.n
    total = q2**n
    codes = np.arange(total, dtype=np.int64)
    out = np.zeros((total, n), dtype=np.int16)
    for i in range(n - 1, -1, -1):
        out[:, i] = codes % q2
        codes //= q2
    return out


def norm_one_array(sp: UnitarySpace, budget: int = DEFAULT_ENUM_BUDGET) -> np.ndarray:
    """Coordinate rows of all norm-1 vectors, in enumeration order."""
    q2, n = sp.spec.q2, sp.n
    if q2**n > budget:
        raise CapacityError(
            f"norm-one enumeration needs q^(2n) = {q2**n} rows, "
            f"over the budget of {budget}"
        )
    if sp._norm_one_cache is not None:
        return sp._norm_one_cache
    spec = sp.spec
    rows = all_vector_codes(sp)
    add, mul, conj = spec.add, spec.mul, spec.conj
    acc = np.zeros(len(rows), dtype=np.int16)
    for i in range(n):
        for j in range(n):
            g = sp.gram[i][j]
            if g:
                term = mul[mul[rows[:, i], g], conj[rows[:, j]]]
                acc = add[acc, term]
    sel = rows[acc == spec.one]
    sp._norm_one_cache = sel
    return sel


def norm_one_domain(sp: UnitarySpace, budget: int = DEFAULT_ENUM_BUDGET) -> list[Vector]:
    """All vectors x with beta(x, x) = 1, in enumeration order.

    The count always equals q^(n-1) * (q^n - (-1)^n).
    """
    arr = norm_one_array(sp, budget)
    return [Vector(sp, tuple(int(c) for c in row)) for row in arr]


def norm_one_count(q: int, n: int) -> int:
    return q ** (n - 1) * (q**n - (-1) ** n)


@dataclass(frozen=True)
class StandardObjects:
    U: Subspace
    U1: Subspace
    W: Subspace
    v: Vector
    u: Vector
    w: Vector


def standard_objects(sp: UnitarySpace) -> StandardObjects:
    """The reference subspaces and vectors for an even-dimensional space.

    U = <e1..em>, U1 = <e2..em>, W = <f1..fm>, v = e1 + lam*f1,
    u = mu*e1 + zeta*f1, w = mu*e1 + zeta^q*f1.
    """
    if sp.odd:
        raise ValueError("standard objects are defined for even dimension")
    m = sp.m
    U = Subspace.span(sp, [sp.e(i) for i in range(1, m + 1)])
    U1 = Subspace.span(sp, [sp.e(i) for i in range(2, m + 1)])
    W = Subspace.span(sp, [sp.f(i) for i in range(1, m + 1)])
    v = sp.e(1) + sp.f(1).scale(sp.lam)
    mu = solve_mu(sp.spec)
    zeta = pick_zeta(sp.spec)
    u = sp.e(1).scale(mu) + sp.f(1).scale(zeta)
    w = sp.e(1).scale(mu) + sp.f(1).scale(zeta.conj())
    return StandardObjects(U=U, U1=U1, W=W, v=v, u=u, w=w)
