"""Dense matrix and vector routines over a FieldSpec.

Matrices are immutable tuples of tuples of element indices; vectors are
tuples of element indices.  Row-vector convention throughout: maps act on
the right, x -> x @ M.
"""

from __future__ import annotations

from .ff import FieldSpec


def identity(spec: FieldSpec, n: int):
    one = spec.one
    return tuple(
        tuple(one if i == j else 0 for j in range(n)) for i in range(n)
    )


def zero_matrix(n: int, m: int | None = None):
    m = n if m is None else m
    return tuple(tuple(0 for _ in range(m)) for _ in range(n))


def mat_from_rows(rows):
    return tuple(tuple(int(c) for c in r) for r in rows)


def mat_mul(spec: FieldSpec, a, b):
    mul, add = spec.mul, spec.add
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        ai = a[i]
        row = []
        for j in range(m):
            acc = 0
            for t in range(k):
                x = ai[t]
                if x:
                    acc = int(add[acc, mul[x, b[t][j]]])
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def vec_mat(spec: FieldSpec, x, a):
    """Row vector times matrix."""
    mul, add = spec.mul, spec.add
    m = len(a[0])
    out = []
    for j in range(m):
        acc = 0
        for t in range(len(x)):
            xt = x[t]
            if xt:
                acc = int(add[acc, mul[xt, a[t][j]]])
        out.append(acc)
    return tuple(out)


def vec_add(spec: FieldSpec, x, y):
    add = spec.add
    return tuple(int(add[a, b]) for a, b in zip(x, y))


def vec_scale(spec: FieldSpec, c, x):
    mul = spec.mul
    return tuple(int(mul[c, a]) for a in x)


def mat_frob(spec: FieldSpec, a, e: int):
    f = spec.frob[e % spec.deg]
    return tuple(tuple(int(f[c]) for c in row) for row in a)


def mat_conj(spec: FieldSpec, a):
    return mat_frob(spec, a, spec.f)


def transpose(a):
    return tuple(zip(*a))


def mat_det(spec: FieldSpec, a):
    """Determinant by fraction-free-ish Gaussian elimination."""
    mul, add, neg, inv = spec.mul, spec.add, spec.neg, spec.inv
    n = len(a)
    m = [list(row) for row in a]
    det = spec.one
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = int(mul[det, neg[spec.one]])
        pv = m[col][col]
        det = int(mul[det, pv])
        pv_inv = int(inv[pv])
        for r in range(col + 1, n):
            c = m[r][col]
            if c:
                factor = int(mul[c, pv_inv])
                for j in range(col, n):
                    m[r][j] = int(add[m[r][j], neg[mul[factor, m[col][j]]]])
    return det


def mat_inv(spec: FieldSpec, a):
    """Inverse, or None if singular."""
    mul, add, neg, inv = spec.mul, spec.add, spec.neg, spec.inv
    n = len(a)
    m = [list(row) + [spec.one if i == j else 0 for j in range(n)]
         for i, row in enumerate(a)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pv_inv = int(inv[m[col][col]])
        if pv_inv != spec.one or m[col][col] != spec.one:
            m[col] = [int(mul[pv_inv, c]) for c in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                c = m[r][col]
                m[r] = [
                    int(add[x, neg[mul[c, y]]]) for x, y in zip(m[r], m[col])
                ]
    return tuple(tuple(row[n:]) for row in m)


def rref(spec: FieldSpec, rows):
    """Reduced row echelon form; returns (rows, pivot_columns).

    Zero rows are dropped, so the result is a canonical basis of the row
    space: subspace equality is tuple equality.
    """
    mul, add, neg, inv = spec.mul, spec.add, spec.neg, spec.inv
    m = [list(r) for r in rows]
    ncols = len(m[0]) if m else 0
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = None
        for r in range(rank, len(m)):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pv_inv = int(inv[m[rank][col]])
        m[rank] = [int(mul[pv_inv, c]) for c in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col]:
                c = m[r][col]
                m[r] = [int(add[x, neg[mul[c, y]]]) for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
        if rank == len(m):
            break
    return tuple(tuple(r) for r in m[:rank]), tuple(pivots)


def right_kernel(spec: FieldSpec, a):
    """Basis (as rows) of {x : x @ a = 0} for an n x m matrix a."""
    # x @ a = 0  <=>  a^T @ x^T = 0; do RREF on a^T and read free variables.
    at = transpose(a)
    red, pivots = rref(spec, at)
    n = len(a)
    neg = spec.neg
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for fj in free:
        v = [0] * n
        v[fj] = spec.one
        for r, pc in enumerate(pivots):
            v[pc] = int(neg[red[r][fj]])
        basis.append(tuple(v))
    return tuple(basis)


def solve_left(spec: FieldSpec, a, b):
    """One x with x @ a = b, or None.  a: n x m, b: length-m row."""
    at = transpose(a)  # m x n
    aug = [list(row) + [b[i]] for i, row in enumerate(at)]
    red, pivots = rref(spec, aug)
    n = len(a)
    x = [0] * n
    for r, pc in enumerate(pivots):
        if pc == n:
            return None  # inconsistent
        x[pc] = red[r][n]
    return tuple(x)
