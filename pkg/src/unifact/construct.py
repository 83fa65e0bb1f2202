"""Builders for the subgroup families and outer elements used in the
factorization catalog: SU_n(q) itself, the unipotent radical R of the
maximal-isotropic parabolic, the Levi T = SL_m(q^2), field-extension
subgroups SL_a(q^(2b)) / Sp_a(q^(2b)) / G2(q^(2b)) inside T, Sp_2m(q)
preserving a rescaled alternating form, G2(q) inside Sp_6(q) from split
octonions (even characteristic), the outer involution swapping each e_i
with f_i, the coordinatewise Frobenius, and a generator-file import path.

Every built-in constructor certifies itself against the closed-form order
of the group it claims to produce; a wrong generating set fails loudly
instead of silently producing a subgroup.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    CapacityError,
    GeneratorFileError,
    InvalidGeneratorError,
    OrderMismatchError,
)
from .ff import FieldElt, FieldSpec, elt_from_str, elt_to_str, field, solve_mu
from . import linalg
from .grp import Domain, GroupHandle, SemilinearMap, subfield_domain_for
from .unispace import UnitarySpace, space_for

# ---------------------------------------------------------------------------
# closed-form orders
# ---------------------------------------------------------------------------


def order_sl(a: int, r: int) -> int:
    n = r ** (a * (a - 1) // 2)
    for i in range(2, a + 1):
        n *= r**i - 1
    return n


def order_su(n: int, q: int) -> int:
    o = q ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        o *= q**i - (-1) ** i
    return o


def order_sp(dim: int, r: int) -> int:
    if dim % 2:
        raise ValueError("symplectic groups need even dimension")
    k = dim // 2
    n = r ** (k * k)
    for i in range(1, k + 1):
        n *= r ** (2 * i) - 1
    return n


def order_g2(r: int) -> int:
    return r**6 * (r**6 - 1) * (r**2 - 1)


# ---------------------------------------------------------------------------
# field helpers
# ---------------------------------------------------------------------------


def gfp_basis(spec: FieldSpec) -> list[int]:
    """GF(p)-basis of GF(q^2): the monomials 1, x, ..., x^(2f-1)."""
    return [spec.idx_of([0] * i + [1]) for i in range(spec.deg)]


def trace_zero_elements(spec: FieldSpec) -> list[int]:
    """All x with x + x^q = 0, in enumeration order."""
    return [
        i for i in range(spec.q2) if int(spec.add[i, spec.conj[i]]) == 0
    ]


def trace_zero_basis(spec: FieldSpec) -> list[int]:
    """Greedy GF(p)-basis of the trace-zero subspace."""
    basis: list[int] = []
    span = {0}
    for cand in trace_zero_elements(spec):
        if cand in span:
            continue
        basis.append(cand)
        span = _gfp_span(spec, basis)
    return basis


def _gfp_span(spec: FieldSpec, gens: list[int]) -> set[int]:
    span = {0}
    for g in gens:
        cur = list(span)
        acc = 0
        for _ in range(1, spec.p):
            acc = int(spec.add[acc, g])
            span.update(int(spec.add[acc, s]) for s in cur)
    return span


def subfield_elements(spec: FieldSpec) -> list[int]:
    return [i for i in range(spec.q2) if spec.in_base[i]]


def subfield_basis(spec: FieldSpec) -> list[int]:
    """Greedy GF(p)-basis of the subfield GF(q)."""
    basis: list[int] = []
    span = {0}
    for cand in subfield_elements(spec):
        if cand in span:
            continue
        basis.append(cand)
        span = _gfp_span(spec, basis)
    return basis


def first_solution_c(spec: FieldSpec, a_idx: int) -> int:
    """First c with c + c^q = -a^(1+q) (enumeration order)."""
    a_norm = int(spec.mul[a_idx, spec.conj[a_idx]])
    target = int(spec.neg[a_norm])
    for c in range(spec.q2):
        if int(spec.add[c, spec.conj[c]]) == target:
            return c
    raise AssertionError("norm equation unsolvable; field tables corrupt")


# ---------------------------------------------------------------------------
# elementary isometries in the standard basis
# ---------------------------------------------------------------------------


def levi_block_map(space: UnitarySpace, a_small) -> SemilinearMap:
    """The isometry acting by A on <e_1..e_m> and conj(A)^-T on <f_1..f_m>.

    The action on the f-block is forced by preserving beta(e_i, f_j);
    determinant is det(A)^(1-q), so A in SL lands in SU.
    """
    spec = space.spec
    m = len(a_small)
    if m > space.m:
        raise ValueError("block too large for the space")
    astar = linalg.mat_inv(spec, linalg.mat_conj(spec, a_small))
    if astar is None:
        raise InvalidGeneratorError("singular block matrix")
    astar = linalg.transpose(astar)
    n = space.n
    rows = [[0] * n for _ in range(n)]
    one = spec.one
    for k in range(n):
        rows[k][k] = one
    for i in range(m):
        for j in range(m):
            rows[2 * i][2 * j] = a_small[i][j]
            rows[2 * i + 1][2 * j + 1] = astar[i][j]
    return SemilinearMap(space, tuple(tuple(r) for r in rows), 0)


def _elementary(spec: FieldSpec, size: int, i: int, j: int, c: int):
    rows = [list(r) for r in linalg.identity(spec, size)]
    rows[i][j] = c
    return tuple(tuple(r) for r in rows)


def pair_unipotent(space: UnitarySpace, pair: int, b_idx: int, lower: bool):
    """In-pair root element: f_i -> f_i + b e_i (lower) or e_i -> e_i + b f_i.

    Requires b + b^q = 0; preserves the form and has determinant 1.
    """
    spec = space.spec
    if int(spec.add[b_idx, spec.conj[b_idx]]) != 0:
        raise ValueError("pair unipotent needs a trace-zero coefficient")
    n = space.n
    rows = [list(r) for r in linalg.identity(spec, n)]
    e, f = 2 * (pair - 1), 2 * (pair - 1) + 1
    if lower:
        rows[f][e] = b_idx
    else:
        rows[e][f] = b_idx
    return SemilinearMap(space, tuple(tuple(r) for r in rows), 0)


def triple_unipotent(space: UnitarySpace, a_idx: int, c_idx: int, lower: bool):
    """Root element of the last-pair-with-anchor 3-space.

    lower: f -> f + a g + c e, g -> g - conj(a) e   (e fixed)
    upper: e -> e + a g + c f, g -> g - conj(a) f   (f fixed)
    with c + c^q = -a^(1+q).
    """
    spec = space.spec
    if not space.odd:
        raise ValueError("triple unipotent needs an anchor coordinate")
    n = space.n
    e, f, g = n - 3, n - 2, n - 1
    rows = [list(r) for r in linalg.identity(spec, n)]
    neg_conj_a = int(spec.neg[spec.conj[a_idx]])
    if lower:
        rows[f][g] = a_idx
        rows[f][e] = c_idx
        rows[g][e] = neg_conj_a
    else:
        rows[e][g] = a_idx
        rows[e][f] = c_idx
        rows[g][f] = neg_conj_a
    return SemilinearMap(space, tuple(tuple(r) for r in rows), 0)


# ---------------------------------------------------------------------------
# main constructors
# ---------------------------------------------------------------------------


def levi_generators(space: UnitarySpace, m: int | None = None):
    """Generators of T = SL_m(q^2) in its block embedding."""
    spec = space.spec
    m = space.m if m is None else m
    gens = []
    if m == 1:
        return gens
    for i in range(m - 1):
        for c in gfp_basis(spec):
            gens.append(levi_block_map(space, _elementary(spec, m, i, i + 1, c)))
            gens.append(levi_block_map(space, _elementary(spec, m, i + 1, i, c)))
    return gens


def su_generators(space: UnitarySpace):
    spec = space.spec
    gens = []
    tz = trace_zero_basis(spec)
    for b in tz:
        gens.append(pair_unipotent(space, 1, b, lower=True))
        gens.append(pair_unipotent(space, 1, b, lower=False))
    gens.extend(levi_generators(space))
    if space.odd:
        for a in gfp_basis(spec):
            c = first_solution_c(spec, a)
            gens.append(triple_unipotent(space, a, c, lower=True))
            gens.append(triple_unipotent(space, a, c, lower=False))
        for c in tz:
            gens.append(triple_unipotent(space, 0, c, lower=True))
            gens.append(triple_unipotent(space, 0, c, lower=False))
    return gens


def build_su(n: int, q: int, *, seed: int = 0,
             domain: Domain | None = None) -> GroupHandle:
    """The special unitary group SU_n(q) on its norm-one vector domain."""
    if n < 3:
        raise ValueError("need n >= 3")
    if (n, q) == (3, 2):
        raise ValueError("(n, q) = (3, 2) is excluded")
    space = space_for(q, n)
    handle = GroupHandle.build(
        space, su_generators(space), domain=domain,
        label=f"SU{n}({q})", seed=seed, check_form=True,
    )
    expect = order_su(n, q)
    if handle.order() != expect:
        raise AssertionError(
            f"SU{n}({q}) generators produced order {handle.order()}, "
            f"closed form says {expect}"
        )
    return handle


def radical_generators(space: UnitarySpace):
    """f_j -> f_j + sum_i B[j][i] e_i for a GF(p)-basis of the B's.

    B ranges over matrices with B[k][j] = -conj(B[j][k]) (so the map is an
    isometry); the full group has order q^(m^2).
    """
    spec = space.spec
    m = space.m
    gens = []
    for j in range(m):
        for s in trace_zero_basis(spec):
            gens.append(_radical_map(space, {(j, j): s}))
    for j in range(m):
        for k in range(j + 1, m):
            for c in gfp_basis(spec):
                gens.append(
                    _radical_map(
                        space, {(j, k): c, (k, j): int(spec.neg[spec.conj[c]])}
                    )
                )
    return gens


def _radical_map(space: UnitarySpace, entries: dict) -> SemilinearMap:
    spec = space.spec
    rows = [list(r) for r in linalg.identity(spec, space.n)]
    for (j, i), c in entries.items():
        rows[2 * j + 1][2 * i] = c
    return SemilinearMap(space, tuple(tuple(r) for r in rows), 0)


def enumerate_radical(space: UnitarySpace, cap: int = 4096):
    """Every element of R, deterministically ordered; needs q^(m^2) <= cap."""
    spec = space.spec
    m = space.m
    size = spec.q**(m * m)
    if size > cap:
        raise CapacityError(f"|R| = {size} exceeds the enumeration cap {cap}")
    tz = trace_zero_elements(spec)
    diag_choices = [tz] * m
    off_positions = [(j, k) for j in range(m) for k in range(j + 1, m)]
    off_choices = [list(range(spec.q2))] * len(off_positions)
    out = []
    for diag in itertools.product(*diag_choices):
        for off in itertools.product(*off_choices):
            entries = {}
            for j, s in enumerate(diag):
                if s:
                    entries[(j, j)] = s
            for (j, k), c in zip(off_positions, off):
                if c:
                    entries[(j, k)] = c
                    entries[(k, j)] = int(spec.neg[spec.conj[c]])
            out.append(_radical_map(space, entries))
    assert len(out) == size
    return out


def build_radical_R(m: int, q: int, *, space: UnitarySpace | None = None,
                    seed: int = 0, domain: Domain | None = None) -> GroupHandle:
    """The kernel R of the isotropic-block stabilizer acting on <e_1..e_m>."""
    space = space or space_for(q, 2 * m)
    handle = GroupHandle.build(
        space, radical_generators(space), domain=domain,
        label=f"R(m={m},q={q})", seed=seed, check_form=True,
    )
    expect = q ** (m * m)
    if handle.order() != expect:
        raise AssertionError(
            f"radical generators gave order {handle.order()}, expected {expect}"
        )
    return handle


def build_levi_T(m: int, q: int, *, space: UnitarySpace | None = None,
                 seed: int = 0, domain: Domain | None = None) -> GroupHandle:
    """T = SL_m(q^2) stabilizing both <e_1..e_m> and <f_1..f_m>."""
    space = space or space_for(q, 2 * m)
    handle = GroupHandle.build(
        space, levi_generators(space, m), domain=domain,
        label=f"T(m={m},q={q})", seed=seed, check_form=True,
    )
    expect = order_sl(m, q * q)
    if handle.order() != expect:
        raise AssertionError(
            f"Levi generators gave order {handle.order()}, expected {expect}"
        )
    return handle


# -- symplectic matrices over an abstract field ------------------------------


def symplectic_gram(spec: FieldSpec, dim: int):
    """Pairs-adjacent alternating Gram: blocks [[0,1],[-1,0]]."""
    one = spec.one
    neg_one = int(spec.neg[one])
    g = [[0] * dim for _ in range(dim)]
    for i in range(dim // 2):
        g[2 * i][2 * i + 1] = one
        g[2 * i + 1][2 * i] = neg_one
    return tuple(tuple(r) for r in g)


def _symplectic_transvection(spec: FieldSpec, gram, u, c: int):
    """x -> x + c * form(x, u) * u."""
    dim = len(u)
    ju = linalg.vec_mat(spec, u, linalg.transpose(gram))  # form(x,u) = x . (gram u^T)
    rows = []
    one = spec.one
    for i in range(dim):
        row = [0] * dim
        row[i] = one
        coef = int(spec.mul[c, ju[i]])
        if coef:
            for j in range(dim):
                row[j] = int(spec.add[row[j], spec.mul[coef, u[j]]])
        rows.append(tuple(row))
    return tuple(rows)


def sp_matrix_generators(spec: FieldSpec, dim: int, coeff_basis=None):
    """Generators of Sp_dim over the field, pairs-adjacent convention.

    Generation is certified downstream by the closed-form order check.
    """
    if dim % 2:
        raise ValueError("even dimension required")
    if coeff_basis is None:
        coeff_basis = gfp_basis(spec)
    one = spec.one
    k = dim // 2
    gens = []
    for c in coeff_basis:
        gens.append(_elementary(spec, dim, 0, 1, c))
        gens.append(_elementary(spec, dim, 1, 0, c))
    if k >= 2:
        # cycle the hyperbolic pairs
        rows = [[0] * dim for _ in range(dim)]
        for i in range(k):
            t = (i + 1) % k
            rows[2 * i][2 * t] = one
            rows[2 * i + 1][2 * t + 1] = one
        gens.append(tuple(tuple(r) for r in rows))
        gram = symplectic_gram(spec, dim)
        u = [0] * dim
        u[0] = one
        u[2] = one
        for c in coeff_basis:
            gens.append(_symplectic_transvection(spec, gram, tuple(u), c))
    return gens


def _check_symplectic(spec: FieldSpec, gram, mat) -> bool:
    lhs = linalg.mat_mul(spec, mat, linalg.mat_mul(spec, gram, linalg.transpose(mat)))
    return lhs == gram


def build_sp2m_in_su(m: int, q: int, *, space: UnitarySpace | None = None,
                     seed: int = 0, domain: Domain | None = None) -> GroupHandle:
    """Sp_2m(q) < SU_2m(q): scalar extension of the isometries of the
    rescaled alternating form on the GF(q)-span of mu*e_1, f_1, ...

    The basis change is diag(mu, 1, ..., mu, 1); the restriction of the
    Hermitian form to that span is mu times a GF(q)-alternating form.
    """
    space = space or space_for(q, 2 * m)
    spec = space.spec
    n = 2 * m
    mu = solve_mu(spec)
    p_rows = [[0] * n for _ in range(n)]
    for i in range(m):
        p_rows[2 * i][2 * i] = mu.idx
        p_rows[2 * i + 1][2 * i + 1] = spec.one
    P = tuple(tuple(r) for r in p_rows)
    P_inv = linalg.mat_inv(spec, P)
    gram = symplectic_gram(spec, n)
    gens = []
    for a in sp_matrix_generators(spec, n, coeff_basis=subfield_basis(spec)):
        if not _check_symplectic(spec, gram, a):
            raise AssertionError("generator is not symplectic")
        mat = linalg.mat_mul(spec, P_inv, linalg.mat_mul(spec, a, P))
        gens.append(SemilinearMap(space, mat, 0))
    handle = GroupHandle.build(
        space, gens, domain=domain, label=f"Sp{n}({q})",
        seed=seed, check_form=True,
    )
    expect = order_sp(n, q)
    if handle.order() != expect:
        raise AssertionError(
            f"symplectic generators gave order {handle.order()}, expected {expect}"
        )
    return handle


# -- field-extension subgroups of the Levi ------------------------------------


class FieldTower:
    """GF(q^(2b)) viewed as a b-dimensional space over GF(q^2).

    The embedding sends the small field's generator to the first root of
    its modulus in the big field; the power basis is 1, theta, ...,
    theta^(b-1) with theta the big field's canonical generator.
    """

    def __init__(self, small: FieldSpec, b: int):
        self.small = small
        self.b = b
        self.big = field(small.p, small.f * b)
        big = self.big
        if b == 1:
            self.embed_table = list(range(small.q2))
        else:
            root = self._find_root()
            table = []
            for i in range(small.q2):
                acc = 0
                pw = big.one
                for c in small.coeffs_of(i):
                    for _ in range(c):
                        acc = int(big.add[acc, pw])
                    pw = int(big.mul[pw, root])
                table.append(acc)
            self.embed_table = table
        self._build_decomposition()

    def _find_root(self) -> int:
        big, small = self.big, self.small
        mod = small.modulus
        for z in range(big.q2):
            acc = 0
            pw = big.one
            for c in mod:
                for _ in range(c):
                    acc = int(big.add[acc, pw])
                pw = int(big.mul[pw, z])
            if acc == 0:
                return z
        raise AssertionError("small modulus has no root in the big field")

    def _build_decomposition(self):
        big, small, b = self.big, self.small, self.b
        theta = big.idx_of([0, 1]) if big.deg >= 2 else big.one
        self.theta = theta
        dim = big.deg  # over GF(p)
        cols = []
        self._basis_pairs = []
        for j in range(b):
            theta_j = big.one
            for _ in range(j):
                theta_j = int(big.mul[theta_j, theta])
            for i in range(small.deg):
                w = int(big.mul[self.embed_table[small.idx_of([0] * i + [1])], theta_j])
                cols.append(big.coeffs_of(w))
                self._basis_pairs.append((i, j))
        # invert the GF(p) change-of-basis matrix
        p = big.p
        mat = [[cols[c][r] for c in range(dim)] for r in range(dim)]
        self._solve = _GFpSolver(p, mat)

    def embed(self, idx_small: int) -> int:
        return self.embed_table[idx_small]

    def decompose(self, idx_big: int) -> list[int]:
        """Coordinates over GF(q^2) in the power basis, as small indices."""
        big, small, b = self.big, self.small, self.b
        rhs = list(big.coeffs_of(idx_big))
        sol = self._solve.solve(rhs)
        coords = [[0] * small.deg for _ in range(b)]
        for val, (i, j) in zip(sol, self._basis_pairs):
            coords[j][i] = val
        return [small.idx_of(cs) for cs in coords]

    def blow_up(self, mat_big):
        """m x m matrix over GF(q^2) of the induced map on GF(q^2)^(ab)."""
        a = len(mat_big)
        b = self.b
        small, big = self.small, self.big
        m = a * b
        out = [[0] * m for _ in range(m)]
        theta = self.theta
        for t in range(a):
            for s in range(a):
                c = mat_big[t][s]
                if not c:
                    continue
                theta_j = big.one
                for j in range(b):
                    prod = int(big.mul[theta_j, c])
                    row_coords = self.decompose(prod)
                    for k in range(b):
                        out[t * b + j][s * b + k] = row_coords[k]
                    theta_j = int(big.mul[theta_j, theta])
        return tuple(tuple(r) for r in out)


class _GFpSolver:
    """LU-style exact solver over GF(p) for a fixed square matrix."""

    def __init__(self, p: int, mat):
        self.p = p
        n = len(mat)
        self.n = n
        aug = [list(mat[r]) + [1 if c == r else 0 for c in range(n)]
               for r in range(n)]
        for col in range(n):
            piv = next(r for r in range(col, n) if aug[r][col] % p)
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = pow(aug[col][col], -1, p)
            aug[col] = [(x * inv) % p for x in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    c = aug[r][col]
                    aug[r] = [(x - c * y) % p for x, y in zip(aug[r], aug[col])]
        self.inverse = [row[n:] for row in aug]

    def solve(self, rhs):
        return [
            sum(self.inverse[r][c] * rhs[c] for c in range(self.n)) % self.p
            for r in range(self.n)
        ]


def build_ext_subgroup(kind: str, a: int, b: int, m: int, q: int, *,
                       space: UnitarySpace | None = None, seed: int = 0,
                       domain: Domain | None = None) -> GroupHandle:
    """SL_a(q^(2b)), Sp_a(q^(2b)) or G2(q^(2b)) inside T = SL_m(q^2),
    via a fixed power basis of GF(q^(2b)) over GF(q^2)."""
    if kind in ("SL", "Sp"):
        if m != a * b:
            raise ValueError(f"need m = a*b, got m={m}, a={a}, b={b}")
        if kind == "Sp" and a % 2:
            raise ValueError("Sp needs even a")
    elif kind == "G2":
        if a != 6 or m != 6 * b:
            raise ValueError("G2 extension needs a = 6 and m = 6b")
        if q % 2:
            raise ValueError("G2 extension needs q even")
    else:
        raise ValueError(f"unknown extension kind {kind!r}")
    space = space or space_for(q, 2 * m)
    spec = space.spec
    tower = FieldTower(spec, b)
    big = tower.big
    if kind == "SL":
        if a == 1:
            mats_big = []
        else:
            mats_big = []
            for i in range(a - 1):
                for c in gfp_basis(big):
                    mats_big.append(_elementary(big, a, i, i + 1, c))
                    mats_big.append(_elementary(big, a, i + 1, i, c))
        expect = order_sl(a, big.q2)
    elif kind == "Sp":
        mats_big = sp_matrix_generators(big, a)
        expect = order_sp(a, big.q2)
    else:
        mats_big = g2_certified_matrices(big, False, seed=seed)
        expect = order_g2(big.q2)
    gens = [levi_block_map(space, tower.blow_up(mb)) for mb in mats_big]
    handle = GroupHandle.build(
        space, gens, domain=domain,
        label=f"{kind}{a}(q^{2 * b})<T(m={m},q={q})",
        seed=seed, check_form=True,
    )
    if handle.order() != expect:
        raise AssertionError(
            f"{kind} extension gave order {handle.order()}, expected {expect}"
        )
    return handle


# -- G2 from split octonions ---------------------------------------------------


def _zorn_mult(spec: FieldSpec, x, y):
    """Split-octonion product on (a, v1..v3, w1..w3, b); characteristic 2."""
    add, mul = spec.add, spec.mul

    def dot(u, v):
        acc = 0
        for i in range(3):
            acc = int(add[acc, mul[u[i], v[i]]])
        return acc

    def cross(u, v):
        return (
            int(add[mul[u[1], v[2]], mul[u[2], v[1]]]),
            int(add[mul[u[2], v[0]], mul[u[0], v[2]]]),
            int(add[mul[u[0], v[1]], mul[u[1], v[0]]]),
        )

    a, v, w, bb = x[0], x[1:4], x[4:7], x[7]
    a2, v2, w2, b2 = y[0], y[1:4], y[4:7], y[7]
    ra = int(add[mul[a, a2], dot(v, w2)])
    rv = tuple(
        int(add[add[mul[a, v2[i]], mul[b2, v[i]]], cross(w, w2)[i]])
        for i in range(3)
    )
    rw = tuple(
        int(add[add[mul[a2, w[i]], mul[bb, w2[i]]], cross(v, v2)[i]])
        for i in range(3)
    )
    rb = int(add[mul[bb, b2], dot(w, v2)])
    return (ra,) + rv + rw + (rb,)


def _octonion_units(spec: FieldSpec):
    units = []
    for k in range(8):
        t = [0] * 8
        t[k] = spec.one
        units.append(tuple(t))
    return units


def _is_octonion_automorphism(spec: FieldSpec, img_of_unit) -> bool:
    units = _octonion_units(spec)

    def apply(x):
        out = [0] * 8
        for k in range(8):
            if x[k]:
                for t in range(8):
                    out[t] = int(
                        spec.add[out[t], spec.mul[x[k], img_of_unit[k][t]]]
                    )
        return tuple(out)

    for xu in units:
        for yu in units:
            if apply(_zorn_mult(spec, xu, yu)) != _zorn_mult(
                spec, apply(xu), apply(yu)
            ):
                return False
    return True


_QUOTIENT_PICKS = (1, 4, 2, 5, 3, 6)  # (x_v1, x_w1, x_v2, x_w2, x_v3, x_w3)


def _aut_to_quotient(spec: FieldSpec, table):
    """6x6 matrix of an algebra symmetry on trace-zero mod the identity line.

    Rows/columns use the interleaved hyperbolic-pair basis given by the
    picks above; the induced alternating form is the pairs-adjacent Gram.
    """
    rows = tuple(
        tuple(table[k][t] for t in _QUOTIENT_PICKS) for k in _QUOTIENT_PICKS
    )
    if not _check_symplectic(spec, symplectic_gram(spec, 6), rows):
        raise AssertionError("induced quotient matrix is not symplectic")
    return rows


def _g2_structure_tables(spec: FieldSpec, coeff_basis):
    """8x8 images-of-units tables for the evident algebra symmetries.

    Unimodular 3x3 blocks act by (a, v, w, b) -> (a, vA, w A^-T, b); the
    diagonal swap (a, v, w, b) -> (b, w, v, a) is multiplicative in
    characteristic 2.  Each table is re-verified on all basis pairs.
    """
    units = _octonion_units(spec)
    tables = []
    for i, j in ((0, 1), (1, 0), (1, 2), (2, 1)):
        for c in coeff_basis:
            A = _elementary(spec, 3, i, j, c)
            A_it = linalg.transpose(linalg.mat_inv(spec, A))
            table = []
            for u in units:
                v = linalg.vec_mat(spec, u[1:4], A)
                w = linalg.vec_mat(spec, u[4:7], A_it)
                table.append((u[0],) + tuple(v) + tuple(w) + (u[7],))
            tables.append(table)
    tables.append([(u[7],) + u[4:7] + u[1:4] + (u[0],) for u in units])
    for t in tables:
        if not _is_octonion_automorphism(spec, t):
            raise AssertionError("structure-map candidate failed multiplicativity")
    return tables


def _g2_unit_conjugations(spec: FieldSpec, coeffs):
    """Conjugations by order-3 units (trace 1, norm 1), deterministic order.

    x^2 = tr(x) x + N(x) in characteristic 2, so such u satisfy u^2 = u + 1
    and u^3 = 1; each candidate is still verified on all basis pairs before
    being yielded.
    """
    add, mul = spec.add, spec.mul
    one = spec.one
    units = _octonion_units(spec)
    for a in coeffs:
        b = int(add[a, one])
        if b not in coeffs:
            continue
        for v in itertools.product(coeffs, repeat=3):
            for w in itertools.product(coeffs, repeat=3):
                dot = 0
                for i in range(3):
                    dot = int(add[dot, mul[v[i], w[i]]])
                if int(add[mul[a, b], dot]) != one:
                    continue
                u = (a,) + v + w + (b,)
                u_inv = _zorn_mult(spec, u, u)
                table = [
                    _zorn_mult(spec, _zorn_mult(spec, u_inv, x), u)
                    for x in units
                ]
                if _is_octonion_automorphism(spec, table):
                    yield table


def g2_certified_matrices(spec: FieldSpec, subfield_only: bool, *,
                          seed: int = 0) -> list:
    """6x6 symplectic generators of G2 over GF(r), certified by order.

    r = q (the subfield) when subfield_only, else the whole field carried
    by `spec`.  Structure maps are extended with unit conjugations until a
    chain on the natural 6-dimensional domain reaches the closed form
    r^6 (r^6 - 1)(r^2 - 1).  Characteristic must be 2.
    """
    if spec.p != 2:
        raise ValueError("split-octonion route requires characteristic 2")
    from .unispace import unitary_space

    r = spec.q if subfield_only else spec.q2
    coeffs = subfield_elements(spec) if subfield_only else list(range(spec.q2))
    cb = subfield_basis(spec) if subfield_only else gfp_basis(spec)
    expect = order_g2(r)
    mats = [_aut_to_quotient(spec, t) for t in _g2_structure_tables(spec, cb)]
    space6 = unitary_space(spec.p, spec.f, 6)
    if subfield_only:
        domain = subfield_domain_for(space6)
    else:
        from .grp import nonzero_domain_for

        domain = nonzero_domain_for(space6)
    for table in _g2_unit_conjugations(spec, coeffs):
        mats.append(_aut_to_quotient(spec, table))
        gens = [SemilinearMap(space6, mmat, 0) for mmat in mats]
        handle = GroupHandle.build(
            space6, gens, domain=domain, label=f"G2({r})-cert", seed=seed,
        )
        if handle.order() == expect:
            return mats
        if handle.order() > expect:
            raise AssertionError("octonion symmetries overshot the G2 order")
    raise AssertionError("failed to reach the G2 order")


def build_g2(q: int, *, space: UnitarySpace | None = None, seed: int = 0,
             domain: Domain | None = None) -> GroupHandle:
    """G2(q) < Sp_6(q) < SU_6(q), q even, from the split octonions.

    The 7-dimensional trace-zero representation is taken modulo its radical
    (the identity line), which lands the group in Sp_6(q).  When no domain
    is given the handle acts on the nonzero GF(q)-rational vectors of the
    6-space; pass the SU_6(q) norm-one domain to embed it in the unitary
    picture.
    """
    if q % 2:
        raise ValueError("this construction requires even q")
    space = space or space_for(q, 6)
    if space.n != 6:
        raise ValueError("G2 lives in a 6-dimensional space")
    spec = space.spec
    if spec.q != q:
        raise ValueError("space field does not match q")
    if domain is None:
        domain = subfield_domain_for(space)
    mats = g2_certified_matrices(spec, True, seed=seed)
    gens = [SemilinearMap(space, mmat, 0) for mmat in mats]
    handle = GroupHandle.build(
        space, gens, domain=domain, label=f"G2({q})", seed=seed,
    )
    expect = order_g2(q)
    if handle.order() != expect:
        raise AssertionError(
            f"G2 generators gave order {handle.order()}, expected {expect}"
        )
    return handle


# -- outer elements -------------------------------------------------------------


def build_gamma(space: UnitarySpace) -> SemilinearMap:
    """The involution swapping e_i and f_i for every pair; det = (-1)^m."""
    spec = space.spec
    n = space.n
    rows = [[0] * n for _ in range(n)]
    one = spec.one
    for i in range(space.m):
        rows[2 * i][2 * i + 1] = one
        rows[2 * i + 1][2 * i] = one
    if space.odd:
        rows[n - 1][n - 1] = one
    return SemilinearMap(space, tuple(tuple(r) for r in rows), 0)


def build_phi(space: UnitarySpace) -> SemilinearMap:
    """Coordinatewise p-th power in the standard basis."""
    return SemilinearMap(space, linalg.identity(space.spec, space.n), 1)


def build_outer(kind: str, space: UnitarySpace) -> SemilinearMap:
    """gamma, phi, or the composites rho in {phi, phi*gamma^(2/f)}.

    For f = 1 the exponent 2/f makes gamma^2 = identity, so rho-phi is
    plain phi; for f = 2 it reads gamma, so rho-phi-gamma is phi * gamma.
    Both composites are exposed so a run can record which one certifies.
    """
    if kind == "gamma":
        return build_gamma(space)
    if kind == "phi":
        return build_phi(space)
    if kind == "rho-phi":
        return build_phi(space)
    if kind == "rho-phi-gamma":
        return build_phi(space) * build_gamma(space)
    raise ValueError(f"unknown outer kind {kind!r}")


def assemble(parts, *, label: str = "assembled", claimed_order: int | None = None,
             seed: int = 0, domain: Domain | None = None):
    """Handle generated by the union of parts (handles and/or single maps).

    Returns (handle, split_ok): split_ok records whether the claimed
    product order matches the certified order, None when no claim given.
    """
    gens: list[SemilinearMap] = []
    space = None
    for part in parts:
        if isinstance(part, GroupHandle):
            gens.extend(part.gens)
            sp = part.space
            if domain is None:
                domain = part.domain
        elif isinstance(part, SemilinearMap):
            gens.append(part)
            sp = part.space
        else:
            raise TypeError(f"cannot assemble {part!r}")
        if space is None:
            space = sp
        elif space is not sp:
            raise ValueError("assemble needs all pieces in one space")
    handle = GroupHandle.build(
        space, gens, domain=domain, label=label, seed=seed,
    )
    split_ok = None
    if claimed_order is not None:
        split_ok = handle.order() == claimed_order
    return handle, split_ok


# ---------------------------------------------------------------------------
# recipes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubgroupRecipe:
    """A named subgroup constructor with its parameters."""

    kind: str           # SU | radical-R | levi-T | ext-SL | ext-Sp | ext-G2 |
                        # sp2m | g2-in-sp6 | gamma-ext | phi-ext | point-stab |
                        # subspace-stab | imported
    n: int = 0
    q: int = 0
    m: int = 0
    a: int = 0
    b: int = 0
    source: str = "built-in"

    def __post_init__(self):
        if self.kind in ("ext-SL", "ext-Sp") and self.m != self.a * self.b:
            raise ValueError("extension recipes need m = a*b")
        if self.kind == "ext-G2":
            if self.m != 6 * self.b:
                raise ValueError("G2 extension recipes need m = 6b")
            if self.q % 2:
                raise ValueError("G2 extension recipes need even q")


# ---------------------------------------------------------------------------
# generator files
# ---------------------------------------------------------------------------


def export_generators(path, space: UnitarySpace, gens, expect_order=None):
    """Write the text generator format; bit-exact round trip guaranteed."""
    spec = space.spec
    frob_allowed = int(any(g.frob for g in gens))
    lines = [f"{space.n} {spec.p} {spec.deg} {frob_allowed}"]
    for g in gens:
        lines.append("")
        if frob_allowed:
            lines.append(f"frob {g.frob}")
        for row in g.mat:
            lines.append(
                " ".join(elt_to_str(FieldElt(spec, c)) for c in row)
            )
    if expect_order is not None:
        lines.append("")
        lines.append(f"expect-order {expect_order}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def import_generators(path, space: UnitarySpace | None = None, *,
                      seed: int = 0, domain: Domain | None = None,
                      verify_order: bool = True) -> GroupHandle:
    """Parse a generator file and build a handle with provenance recorded.

    Raises GeneratorFileError on parse trouble, InvalidGeneratorError on
    singular/mis-sized matrices, OrderMismatchError if a declared
    expect-order disagrees with the certified order.
    """
    with open(path) as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln and not ln.startswith("#")]
    if not lines:
        raise GeneratorFileError(f"{path}: empty generator file")
    head = lines[0].split()
    if len(head) != 4:
        raise GeneratorFileError(f"{path}: header needs 'n p 2f frob-allowed'")
    try:
        n, p, deg, frob_allowed = (int(t) for t in head)
    except ValueError as e:
        raise GeneratorFileError(f"{path}: bad header: {e}") from None
    if deg % 2:
        raise GeneratorFileError(f"{path}: 2f must be even, got {deg}")
    spec = field(p, deg // 2)
    if space is None:
        space = space_for(spec.q, n)
    if space.n != n:
        raise InvalidGeneratorError(
            f"{path}: file carries {n}x{n} matrices, space has dimension {space.n}"
        )
    if space.spec is not spec:
        raise InvalidGeneratorError(f"{path}: field mismatch with target space")
    gens = []
    expect_order = None
    i = 1
    cur_frob = 0
    cur_rows: list[tuple[int, ...]] = []

    def flush():
        nonlocal cur_rows, cur_frob
        if cur_rows:
            if len(cur_rows) != n:
                raise GeneratorFileError(
                    f"{path}: generator has {len(cur_rows)} rows, expected {n}"
                )
            mat = tuple(cur_rows)
            g = SemilinearMap(space, mat, cur_frob)
            if linalg.mat_inv(spec, mat) is None:
                raise InvalidGeneratorError(f"{path}: singular generator matrix")
            gens.append(g)
        cur_rows = []
        cur_frob = 0

    for ln in lines[1:]:
        if ln.startswith("expect-order"):
            flush()
            try:
                expect_order = int(ln.split()[1])
            except (IndexError, ValueError):
                raise GeneratorFileError(f"{path}: bad expect-order line") from None
            continue
        if ln.startswith("frob"):
            flush()
            if not frob_allowed:
                raise GeneratorFileError(
                    f"{path}: frob line in a frob-disallowed file"
                )
            try:
                cur_frob = int(ln.split()[1])
            except (IndexError, ValueError):
                raise GeneratorFileError(f"{path}: bad frob line") from None
            continue
        toks = ln.split()
        if len(toks) != n:
            raise GeneratorFileError(
                f"{path}: matrix row has {len(toks)} entries, expected {n}"
            )
        try:
            row = tuple(elt_from_str(spec, t).idx for t in toks)
        except ValueError as e:
            raise GeneratorFileError(f"{path}: {e}") from None
        cur_rows.append(row)
        if len(cur_rows) == n:
            flush()
    flush()
    handle = GroupHandle.build(
        space, gens, domain=domain, label=f"imported({path})",
        seed=seed, provenance=f"imported from {path}",
    )
    if expect_order is not None and verify_order:
        if handle.order() != expect_order:
            raise OrderMismatchError(
                f"{path}: certified order {handle.order()} differs from "
                f"declared {expect_order}"
            )
    return handle
