"""Group-theory kernel: semilinear maps, permutation images, stabilizer
chains, exact orders, orbits, stabilizers, membership, derived core.

A SemilinearMap is an invertible matrix over GF(q^2) paired with a Frobenius
exponent e; it acts on row vectors by x -> sigma_e(x) . mat, where sigma_e
raises coordinates to the p^e power.  Composition is exponent-right:

    (A, e) * (B, d) = (sigma_d(A) . B, e + d mod 2f)

so that (g * h) acts as "g then h" and permutation images compose the same
way.

Groups are handled through a faithful permutation image on a finite vector
domain (norm-1 vectors by default).  Orders are exact arbitrary-precision
integers obtained from a base-and-strong-generating-set chain built by
randomized Schreier-Sims and then certified by a deterministic closure pass
over every Schreier generator (or, for stabilizer-style subgroups, by
hitting a rigorously derived target order: the chain's orbit product never
exceeds the order of the generated group, so reaching the target proves
completeness).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainNotPreservedError
from .ff import FieldElt
from . import linalg
from . import unispace
from .unispace import Subspace, UnitarySpace, Vector

# Arbitrary-precision order type; Python ints never overflow.
BigCount = int

INTERSECTION_BUDGET = 10**7


# ---------------------------------------------------------------------------
# semilinear maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SemilinearMap:
    """Invertible matrix over GF(q^2) with a Frobenius exponent."""

    space: UnitarySpace
    mat: tuple[tuple[int, ...], ...]
    frob: int

    @classmethod
    def from_rows(cls, space, rows, frob=0) -> "SemilinearMap":
        mat = tuple(tuple(space.spec.elt(c).idx for c in row) for row in rows)
        return cls(space, mat, frob % space.spec.deg)

    @classmethod
    def identity(cls, space) -> "SemilinearMap":
        return cls(space, linalg.identity(space.spec, space.n), 0)

    def __mul__(self, other: "SemilinearMap") -> "SemilinearMap":
        """Composition 'self then other'."""
        sp = self.space
        a = linalg.mat_frob(sp.spec, self.mat, other.frob)
        return SemilinearMap(
            sp,
            linalg.mat_mul(sp.spec, a, other.mat),
            (self.frob + other.frob) % sp.spec.deg,
        )

    def inverse(self) -> "SemilinearMap":
        sp = self.space
        minv = linalg.mat_inv(sp.spec, self.mat)
        if minv is None:
            raise ValueError("singular matrix has no inverse")
        e = (-self.frob) % sp.spec.deg
        return SemilinearMap(sp, linalg.mat_frob(sp.spec, minv, e), e)

    def act_idxs(self, idxs) -> tuple[int, ...]:
        spec = self.space.spec
        if self.frob:
            fr = spec.frob[self.frob]
            idxs = tuple(int(fr[c]) for c in idxs)
        return linalg.vec_mat(spec, idxs, self.mat)

    def act(self, x: Vector) -> Vector:
        return Vector(x.space, self.act_idxs(x.idxs))

    def is_identity(self) -> bool:
        return self.frob == 0 and self.mat == linalg.identity(
            self.space.spec, self.space.n
        )

    def det(self) -> FieldElt:
        return FieldElt(self.space.spec, linalg.mat_det(self.space.spec, self.mat))

    def preserves_form(self) -> bool:
        """beta(xg, yg) = sigma_e(beta(x, y)) on all basis pairs."""
        sp = self.space
        spec = sp.spec
        fr = spec.frob[self.frob]
        images = [
            self.act_idxs(tuple(spec.one if k == i else 0 for k in range(sp.n)))
            for i in range(sp.n)
        ]
        for i in range(sp.n):
            for j in range(sp.n):
                lhs = unispace.form_eval(sp, images[i], images[j]).idx
                if lhs != int(fr[sp.gram[i][j]]):
                    return False
        return True

    def key(self) -> bytes:
        return repr((self.mat, self.frob)).encode()

    def __repr__(self):
        kind = "linear" if self.frob == 0 else f"frob^{self.frob}"
        return f"SemilinearMap({self.space!r}, {kind})"


def act(g: SemilinearMap, x: Vector) -> Vector:
    """Apply g to x (right action)."""
    return g.act(x)


def commutator(g: SemilinearMap, h: SemilinearMap) -> SemilinearMap:
    return g.inverse() * h.inverse() * g * h


# ---------------------------------------------------------------------------
# vector domains
# ---------------------------------------------------------------------------

_LOOKUP_ARRAY_CAP = 2**24


class Domain:
    """An ordered finite set of vectors closed under the groups of interest."""

    def __init__(self, space, vecs: np.ndarray, kind: str):
        self.space = space
        self.vecs = np.ascontiguousarray(vecs, dtype=np.int16)
        self.kind = kind
        self.size = len(self.vecs)
        q2, n = space.spec.q2, space.n
        self._weights = np.array(
            [q2 ** (n - 1 - i) for i in range(n)], dtype=np.int64
        )
        codes = self.vecs.astype(np.int64) @ self._weights
        self._codes = codes
        total = q2**n
        if total <= _LOOKUP_ARRAY_CAP:
            table = np.full(total, -1, dtype=np.int32)
            table[codes] = np.arange(self.size, dtype=np.int32)
            self._table = table
            self._dict = None
        else:
            self._table = None
            self._dict = {int(c): i for i, c in enumerate(codes)}

    def spans_space(self) -> bool:
        head = [tuple(map(int, r)) for r in self.vecs[: 4 * self.space.n]]
        red, _ = linalg.rref(self.space.spec, head)
        if len(red) == self.space.n:
            return True
        red, _ = linalg.rref(
            self.space.spec, [tuple(map(int, r)) for r in self.vecs]
        )
        return len(red) == self.space.n

    def index_of_idxs(self, idxs) -> int:
        code = int(sum(int(c) * int(w) for c, w in zip(idxs, self._weights)))
        if self._table is not None:
            if code >= len(self._table):
                return -1
            return int(self._table[code])
        return self._dict.get(code, -1)

    def index_of(self, x: Vector) -> int:
        return self.index_of_idxs(x.idxs)

    def vector(self, i: int) -> Vector:
        return Vector(self.space, tuple(int(c) for c in self.vecs[i]))

    def perm_of(self, g: SemilinearMap) -> np.ndarray:
        """The permutation induced by g, or raise if the domain moves."""
        spec = self.space.spec
        n = self.space.n
        X = self.vecs
        if g.frob:
            X = spec.frob[g.frob][X]
        add, mul = spec.add, spec.mul
        codes = np.zeros(self.size, dtype=np.int64)
        for j in range(n):
            acc = np.zeros(self.size, dtype=np.int16)
            for k in range(n):
                mkj = g.mat[k][j]
                if mkj:
                    acc = add[acc, mul[X[:, k], mkj]]
            codes += acc.astype(np.int64) * self._weights[j]
        if self._table is not None:
            perm = self._table[codes]
        else:
            d = self._dict
            perm = np.fromiter(
                (d.get(int(c), -1) for c in codes), dtype=np.int32, count=self.size
            )
        if (perm < 0).any():
            raise DomainNotPreservedError(
                f"map does not preserve the {self.kind} domain "
                f"(check the form / field of its matrix)"
            )
        return perm.astype(np.int32)


def norm_one_domain_for(
    space: UnitarySpace, budget: int = unispace.DEFAULT_ENUM_BUDGET
) -> Domain:
    if getattr(space, "_domain_cache", None) is None:
        space._domain_cache = {}
    dom = space._domain_cache.get("norm1")
    if dom is None:
        dom = Domain(space, unispace.norm_one_array(space, budget), "norm1")
        space._domain_cache["norm1"] = dom
    return dom


def nonzero_domain_for(
    space: UnitarySpace, budget: int = unispace.DEFAULT_ENUM_BUDGET
) -> Domain:
    if getattr(space, "_domain_cache", None) is None:
        space._domain_cache = {}
    dom = space._domain_cache.get("nonzero")
    if dom is None:
        q2 = space.spec.q2
        if q2**space.n > budget:
            raise CapacityError(
                f"nonzero-vector domain needs {q2**space.n} rows, over {budget}"
            )
        rows = unispace.all_vector_codes(space)[1:]
        dom = Domain(space, rows, "nonzero")
        space._domain_cache["nonzero"] = dom
    return dom


def subfield_domain_for(space: UnitarySpace) -> Domain:
    """Nonzero vectors with all coordinates in the subfield GF(q)."""
    if getattr(space, "_domain_cache", None) is None:
        space._domain_cache = {}
    dom = space._domain_cache.get("subfield")
    if dom is None:
        spec = space.spec
        sub = [i for i in range(spec.q2) if spec.in_base[i]]
        import itertools

        rows = [
            row
            for row in itertools.product(sub, repeat=space.n)
            if any(row)
        ]
        dom = Domain(space, np.array(rows, dtype=np.int16), "subfield")
        space._domain_cache["subfield"] = dom
    return dom


# ---------------------------------------------------------------------------
# stabilizer chain
# ---------------------------------------------------------------------------


class _Elem:
    __slots__ = ("perm", "inv", "shadow", "shadow_inv")

    def __init__(self, perm, shadow: SemilinearMap):
        self.perm = perm
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm), dtype=perm.dtype)
        self.inv = inv
        self.shadow = shadow
        self.shadow_inv = shadow.inverse()


class _Level:
    __slots__ = ("base", "gens", "orbit")

    def __init__(self, base: int):
        self.base = base
        self.gens: list[_Elem] = []        # strong gens first assigned here
        self.orbit = {base: None}          # point -> (elem, parent) or None


def _compose(p, q):
    """(p then q)[i] = q[p[i]]."""
    return q[p]


class Chain:
    """Base and strong generating set over a fixed permutation degree.

    The group at level i is generated by all strong generators assigned to
    levels >= i.  The product of fundamental orbit lengths is a lower bound
    for the order of the generated group, with equality exactly when the
    chain is complete.
    """

    def __init__(self, degree: int, identity_shadow: SemilinearMap,
                 seed: int = 0, base_hint=()):
        self.degree = degree
        self.levels: list[_Level] = []
        self.base_hint = list(base_hint)
        self.rng = random.Random(seed)
        self._identity = np.arange(degree, dtype=np.int32)
        self.identity_shadow = identity_shadow
        self.complete = False

    # -- basic structure ---------------------------------------------------

    def base(self) -> list[int]:
        return [lv.base for lv in self.levels]

    def order(self) -> BigCount:
        n = 1
        for lv in self.levels:
            n *= len(lv.orbit)
        return n

    def acting_gens(self, i: int) -> list[_Elem]:
        out = []
        for lv in self.levels[i:]:
            out.extend(lv.gens)
        return out

    def strong_gens(self) -> list[tuple[int, _Elem]]:
        return [(i, e) for i, lv in enumerate(self.levels) for e in lv.gens]

    def _rebuild_orbit(self, i: int):
        lv = self.levels[i]
        gens = self.acting_gens(i)
        orbit = {lv.base: None}
        frontier = [lv.base]
        while frontier:
            nxt = []
            for pt in frontier:
                for e in gens:
                    img = int(e.perm[pt])
                    if img not in orbit:
                        orbit[img] = (e, pt)
                        nxt.append(img)
            frontier = nxt
        lv.orbit = orbit

    # -- sifting -----------------------------------------------------------

    def sift(self, perm, start: int = 0, shadow: SemilinearMap | None = None):
        """Reduce perm through the chain; returns (residue, level, shadow).

        When a shadow is supplied it is carried through the same products,
        so the residue's shadow is exact.
        """
        p = perm
        sh = shadow
        for i in range(start, len(self.levels)):
            lv = self.levels[i]
            beta = int(p[lv.base])
            if beta not in lv.orbit:
                return p, i, sh
            while beta != lv.base:
                e, parent = lv.orbit[beta]
                p = _compose(p, e.inv)
                if sh is not None:
                    sh = sh * e.shadow_inv
                beta = parent
        return p, len(self.levels), sh

    def is_identity_perm(self, perm) -> bool:
        return bool(np.array_equal(perm, self._identity))

    def is_member_perm(self, perm) -> bool:
        res, _, _ = self.sift(perm)
        return self.is_identity_perm(res)

    # -- construction ------------------------------------------------------

    def _choose_base(self, residue) -> int:
        used = set(self.base())
        for h in self.base_hint:
            if h not in used and residue[h] != h:
                return int(h)
        moved = np.nonzero(residue != self._identity)[0]
        # deterministic greedy: smallest point on a longest cycle
        best_pt, best_len = int(moved[0]), 0
        seen = set()
        for start in map(int, moved):
            if start in seen:
                continue
            length = 0
            pt = start
            while pt not in seen:
                seen.add(pt)
                pt = int(residue[pt])
                length += 1
            if length > best_len:
                best_pt, best_len = start, length
        return best_pt

    def add_element(self, perm, shadow: SemilinearMap) -> int | None:
        """Sift and, if the residue is new, install it; returns its level."""
        res, lvl, res_sh = self.sift(perm, 0, shadow)
        if self.is_identity_perm(res):
            return None
        if lvl == len(self.levels):
            self.levels.append(_Level(self._choose_base(res)))
        self.levels[lvl].gens.append(_Elem(res, res_sh))
        for i in range(lvl, -1, -1):
            self._rebuild_orbit(i)
        self.complete = False
        return lvl

    def random_fill(self, quiet_rounds: int = 12, max_rounds: int = 4000):
        """Product-replacement sampling; add residues until progress stops."""
        gens = [(e.perm, e.shadow) for _, e in self.strong_gens()]
        if not gens:
            return
        slots = [gens[i % len(gens)] for i in range(max(8, len(gens)))]
        acc = (self._identity, self.identity_shadow)

        def stir():
            nonlocal acc
            i = self.rng.randrange(len(slots))
            j = self.rng.randrange(len(slots))
            pj, sj = slots[j]
            if self.rng.randrange(2):
                elem = _Elem(pj, sj)
                pj, sj = elem.inv, elem.shadow_inv
            pi, si = slots[i]
            slots[i] = (_compose(pi, pj), si * sj)
            pa, sa = acc
            acc = (_compose(pa, slots[i][0]), sa * slots[i][1])
            return acc

        for _ in range(3 * len(slots)):
            stir()
        quiet = 0
        rounds = 0
        while quiet < quiet_rounds and rounds < max_rounds:
            rounds += 1
            p, s = stir()
            if self.add_element(p, s) is None:
                quiet += 1
            else:
                quiet = 0

    def _check_level(self, i: int):
        """Sift every Schreier generator of level i; None when all pass.

        Depth-first walk over the Schreier tree carrying the transversal
        element for the current point, so memory stays at tree depth even
        on large orbits.
        """
        lv = self.levels[i]
        gens = self.acting_gens(i)
        children: dict[int, list] = {}
        for pt, edge in lv.orbit.items():
            if edge is not None:
                children.setdefault(edge[1], []).append((pt, edge[0]))
        dfs = [(lv.base, self._identity, self.identity_shadow)]
        while dfs:
            pt, u, ush = dfs.pop()
            for s in gens:
                img = int(s.perm[pt])
                edge = lv.orbit.get(img)
                if edge is not None and edge[0] is s and edge[1] == pt:
                    continue  # tree edge: this Schreier generator is trivial
                t = _compose(u, s.perm)
                res, _, _ = self.sift(t, i)
                if not self.is_identity_perm(res):
                    res2, _, res_sh = self.sift(t, i, ush * s.shadow)
                    return res2, res_sh
            for child, e in children.get(pt, ()):
                dfs.append((child, _compose(u, e.perm), ush * e.shadow))
        return None

    def deterministic_closure(self, max_steps: int = 10**6):
        """Schreier-generator closure check with repair; certifies the chain."""
        i = len(self.levels) - 1
        steps = 0
        while i >= 0:
            steps += 1
            if steps > max_steps:
                raise RuntimeError("stabilizer chain failed to close")
            bad = self._check_level(i)
            if bad is None:
                i -= 1
                continue
            res, res_sh = bad
            lvl = self.add_element(res, res_sh)
            if lvl is None:
                raise RuntimeError("closure residue sifted away unexpectedly")
            i = lvl
        self.complete = True

    def complete_to_order(self, target: BigCount, max_rounds: int = 200):
        """Grow by random sampling until the orbit product hits target.

        Sound because the orbit product never exceeds the order of the
        generated group; reaching a rigorously known target certifies the
        chain without a closure sweep.
        """
        rounds = 0
        while self.order() < target:
            rounds += 1
            if rounds > max_rounds:
                self.deterministic_closure()
                if self.order() != target:
                    raise RuntimeError(
                        f"chain closed at order {self.order()}, expected {target}"
                    )
                return
            self.random_fill(quiet_rounds=6)
        if self.order() != target:
            raise RuntimeError(
                f"orbit product {self.order()} overshot the target {target}"
            )
        self.complete = True

    # -- enumeration ---------------------------------------------------------

    def _children_map(self, i: int) -> dict[int, list]:
        lv = self.levels[i]
        children: dict[int, list] = {}
        for pt, edge in lv.orbit.items():
            if edge is not None:
                children.setdefault(edge[1], []).append((pt, edge[0]))
        return children

    def transversal_perms(self, i: int) -> dict[int, np.ndarray]:
        """Full transversal u_beta with base^(u_beta) = beta."""
        lv = self.levels[i]
        children = self._children_map(i)
        out = {lv.base: self._identity}
        stack = [lv.base]
        while stack:
            pt = stack.pop()
            for cand, e in children.get(pt, ()):
                out[cand] = _compose(out[pt], e.perm)
                stack.append(cand)
        return out

    def iter_perms(self, limit: int | None = None):
        """All group elements as permutations, in deterministic order."""
        if not self.complete:
            raise RuntimeError("element enumeration requires a completed chain")
        if limit is not None and self.order() > limit:
            raise CapacityError(
                f"refusing to enumerate {self.order()} elements (limit {limit})"
            )
        transversals = [self.transversal_perms(i) for i in range(len(self.levels))]

        def rec(i):
            if i == len(self.levels):
                yield self._identity
                return
            tr = transversals[i]
            for beta in sorted(tr):
                u = tr[beta]
                for s in rec(i + 1):
                    yield _compose(s, u)

        yield from rec(0)

    def iter_shadows(self, limit: int | None = None):
        """All group elements as (perm, shadow), deterministic order."""
        if not self.complete:
            raise RuntimeError("element enumeration requires a completed chain")
        if limit is not None and self.order() > limit:
            raise CapacityError(
                f"refusing to enumerate {self.order()} elements (limit {limit})"
            )
        levels = list(range(len(self.levels)))
        trs = [self._transversal_with_shadows(i) for i in levels]

        def rec(i):
            if i == len(self.levels):
                yield self._identity, self.identity_shadow
                return
            for beta in sorted(trs[i]):
                u, ush = trs[i][beta]
                for s, ssh in rec(i + 1):
                    yield _compose(s, u), ssh * ush

        yield from rec(0)

    def _transversal_with_shadows(self, i: int):
        lv = self.levels[i]
        children = self._children_map(i)
        out = {lv.base: (self._identity, self.identity_shadow)}
        stack = [lv.base]
        while stack:
            pt = stack.pop()
            u, ush = out[pt]
            for cand, e in children.get(pt, ()):
                out[cand] = (_compose(u, e.perm), ush * e.shadow)
                stack.append(cand)
        return out

    def random_element(self, rng: random.Random):
        """Uniform random (perm, shadow); requires a complete chain."""
        p = self._identity
        sh = self.identity_shadow
        for i in range(len(self.levels)):
            lv = self.levels[i]
            beta = rng.choice(sorted(lv.orbit))
            path = []
            pt = beta
            while pt != lv.base:
                e, parent = lv.orbit[pt]
                path.append(e)
                pt = parent
            for e in reversed(path):
                p = _compose(p, e.perm)
                sh = sh * e.shadow
        return p, sh


# ---------------------------------------------------------------------------
# group handles
# ---------------------------------------------------------------------------


def _seed_from(seed_base: int, label: str, gens) -> int:
    import hashlib

    h = hashlib.sha256()
    h.update(str(seed_base).encode())
    h.update(label.encode())
    for g in gens:
        h.update(g.key())
    return int.from_bytes(h.digest()[:8], "big")


class GroupHandle:
    """A matrix/semilinear group with a certified permutation chain."""

    def __init__(self, space, domain: Domain, gens, chain: Chain, label: str,
                 stab_of: Vector | None = None, provenance: str = "built"):
        self.space = space
        self.domain = domain
        self.gens = tuple(gens)
        self.chain = chain
        self.label = label
        self.stab_of = stab_of
        self.provenance = provenance

    @classmethod
    def build(cls, space, gens, *, domain: Domain | None = None,
              label: str = "G", base_hint_vectors=None, seed: int = 0,
              stab_of: Vector | None = None, target_order: BigCount | None = None,
              check_form: bool = False, provenance: str = "built"):
        """Make a handle: permutation image, chain, deterministic closure.

        `target_order` switches the chain to known-order completion; use it
        only when the target is rigorously derived (orbit-stabilizer), not
        merely expected.
        """
        gens = tuple(g for g in gens if not g.is_identity())
        if domain is None:
            domain = norm_one_domain_for(space)
        if check_form:
            for g in gens:
                if not g.preserves_form():
                    raise ValueError(f"generator does not preserve the form: {g!r}")
        if base_hint_vectors is None and not space.odd:
            v = space.e(1) + space.f(1).scale(space.lam)
            base_hint_vectors = [v]
        hints = []
        for bv in base_hint_vectors or []:
            i = domain.index_of(bv)
            if i >= 0:
                hints.append(i)
        if target_order is None and gens:
            cached = load_chain(space, domain, gens)
            if cached is not None:
                return cls(space, domain, gens, cached, label,
                           stab_of=stab_of, provenance=provenance + " (cached)")
        chain = Chain(domain.size, SemilinearMap.identity(space),
                      seed=_seed_from(seed, label, gens), base_hint=hints)
        for g in gens:
            chain.add_element(domain.perm_of(g), g)
        if target_order is not None:
            chain.complete_to_order(target_order)
        else:
            chain.random_fill()
            chain.deterministic_closure()
        handle = cls(space, domain, gens, chain, label,
                     stab_of=stab_of, provenance=provenance)
        if target_order is None and gens:
            save_chain(handle)
        return handle

    # -- core queries --------------------------------------------------------

    def order(self) -> BigCount:
        return self.chain.order()

    def perm_image(self) -> list[np.ndarray]:
        """The permutations induced by the declared generators."""
        return [self.domain.perm_of(g) for g in self.gens]

    def membership(self, g: SemilinearMap) -> bool:
        """Exact membership: sift to identity at both perm and matrix level."""
        try:
            perm = self.domain.perm_of(g)
        except DomainNotPreservedError:
            return False
        res, _, res_sh = self.chain.sift(perm, 0, g)
        if not self.chain.is_identity_perm(res):
            return False
        return res_sh.is_identity()

    def contains(self, other: "GroupHandle") -> bool:
        return all(self.membership(g) for g in other.gens)

    def orbit_vectors(self, x: Vector) -> list[Vector]:
        """Orbit of any vector under the generators (vector-level BFS)."""
        start = tuple(x.idxs)
        seen = {start}
        order = [start]
        k = 0
        while k < len(order):
            cur = order[k]
            k += 1
            for g in self.gens:
                img = g.act_idxs(cur)
                if img not in seen:
                    seen.add(img)
                    order.append(img)
        return [Vector(self.space, t) for t in order]

    def orbit(self, x: Vector) -> list[Vector]:
        i = self.domain.index_of(x)
        if i < 0:
            raise ValueError("vector lies outside the permutation domain; "
                             "use orbit_vectors for arbitrary vectors")
        return self.orbit_vectors(x)

    # -- stabilizers -----------------------------------------------------------

    def _schreier_stabilizer(self, start_key, act_fn, label, stab_of=None):
        """Stabilizer of a point of any action via Schreier generators.

        `act_fn(g, key) -> key` drives a BFS orbit from start_key; Schreier
        generators are filtered through a chain grown to the exact target
        order |G| / |orbit| (orbit-stabilizer), which certifies the result.
        """
        trans = {start_key: SemilinearMap.identity(self.space)}
        order = [start_key]
        k = 0
        while k < len(order):
            cur = order[k]
            k += 1
            for g in self.gens:
                img = act_fn(g, cur)
                if img not in trans:
                    trans[img] = trans[cur] * g
                    order.append(img)
        orbit_len = len(order)
        total = self.order()
        if total % orbit_len:
            raise AssertionError("orbit length does not divide the group order")
        target = total // orbit_len

        sub = GroupHandle.build(
            self.space, [], domain=self.domain, label=label,
            stab_of=stab_of, provenance=f"stabilizer in {self.label}",
        )
        if target == 1:
            return sub
        chain = sub.chain
        new_gens = []
        done = False
        for cur in order:
            if done:
                break
            t = trans[cur]
            for g in self.gens:
                img = act_fn(g, cur)
                s = t * g * trans[img].inverse()
                if s.is_identity():
                    continue
                lvl = chain.add_element(self.domain.perm_of(s), s)
                if lvl is not None:
                    new_gens.append(s)
                    chain.random_fill(quiet_rounds=4)
                    if chain.order() == target:
                        done = True
                        break
        if chain.order() != target:
            # Schreier generators generate the stabilizer; close and check.
            chain.deterministic_closure()
            if chain.order() != target:
                raise AssertionError(
                    f"stabilizer chain closed at {chain.order()}, "
                    f"expected {target}"
                )
        chain.complete = True
        sub.gens = tuple(new_gens)
        return sub

    def stabilizer(self, x: Vector, label: str | None = None) -> "GroupHandle":
        """Point stabilizer G_x; x need not lie in the permutation domain."""
        label = label or f"{self.label}_stab"
        ch = self.chain
        if ch.complete and ch.levels and self.domain.index_of(x) == ch.levels[0].base:
            # stabilizer of the first base point: the chain suffix, verbatim
            chain = Chain(ch.degree, ch.identity_shadow)
            for lv in ch.levels[1:]:
                nlv = _Level(lv.base)
                nlv.gens = list(lv.gens)
                nlv.orbit = dict(lv.orbit)
                chain.levels.append(nlv)
            chain.complete = True
            target = self.order() // len(ch.levels[0].orbit)
            if chain.order() != target:
                raise AssertionError("chain suffix disagrees with orbit-stabilizer")
            gens = tuple(e.shadow for lv in ch.levels[1:] for e in lv.gens)
            return GroupHandle(self.space, self.domain, gens, chain, label,
                               stab_of=x, provenance=f"stabilizer in {self.label}")
        return self._schreier_stabilizer(
            tuple(x.idxs), lambda g, key: g.act_idxs(key), label, stab_of=x
        )

    def subspace_stabilizer(self, s: Subspace, label: str | None = None):
        """Setwise stabilizer of a subspace (action on canonical echelon keys)."""
        label = label or f"{self.label}_stabspace"

        def act_key(g, key):
            rows = [g.act_idxs(r) for r in key]
            red, _ = linalg.rref(self.space.spec, rows)
            return red

        return self._schreier_stabilizer(s.rows, act_key, label)

    # -- derived structure -------------------------------------------------------

    def derived_subgroup(self, label: str | None = None) -> "GroupHandle":
        """Commutator subgroup: normal closure of generator commutators."""
        import itertools

        label = label or f"{self.label}'"
        comms = []
        for g, h in itertools.combinations(self.gens, 2):
            c = commutator(g, h)
            if not c.is_identity():
                comms.append(c)
        sub = GroupHandle.build(
            self.space, comms, domain=self.domain, label=label,
            provenance=f"derived of {self.label}",
        )
        gens = list(sub.gens)
        while True:
            new = []
            for g in self.gens:
                gi = g.inverse()
                for d in gens:
                    c = gi * d * g
                    if not sub.membership(c):
                        new.append(c)
            if not new:
                break
            gens.extend(new)
            sub = GroupHandle.build(
                self.space, gens, domain=self.domain, label=label,
                provenance=f"derived of {self.label}",
            )
        return sub

    def derived_core(self, label: str | None = None) -> "GroupHandle":
        """Perfect residual: iterate derived subgroups until stable."""
        cur = self
        while True:
            d = cur.derived_subgroup(label=label or f"{self.label}^(inf)")
            if d.order() == cur.order():
                return cur
            cur = d
            if cur.order() == 1:
                return cur

    # -- intersections -------------------------------------------------------

    def intersection(self, other: "GroupHandle",
                     budget: int = INTERSECTION_BUDGET,
                     label: str | None = None) -> "GroupHandle":
        """Exact intersection by enumerating the smaller group.

        Audit path; prefer point-stabilizer formulations where available.
        """
        label = label or f"({self.label} & {other.label})"
        if self.domain is not other.domain:
            raise ValueError("intersection requires handles on one domain")
        a, b = (self, other) if self.order() <= other.order() else (other, self)
        if b.contains(a):
            return a
        if a.contains(b):
            return b
        if a.order() > budget:
            raise CapacityError(
                f"intersection backtrack over {a.order()} elements exceeds "
                f"budget {budget}; use a stabilizer formulation"
            )
        members = []
        for perm, sh in a.chain.iter_shadows():
            if b.chain.is_member_perm(perm):
                members.append(sh)
        sub = GroupHandle.build(
            self.space, [], domain=self.domain, label=label,
            provenance=f"intersection of {a.label}, {b.label}",
        )
        kept = []
        for sh in members:
            if sh.is_identity():
                continue
            if sub.chain.add_element(self.domain.perm_of(sh), sh) is not None:
                kept.append(sh)
        sub.gens = tuple(kept)
        # The added elements generate exactly the intersection; a closure
        # pass certifies the chain, and the census pins the order.
        sub.chain.deterministic_closure()
        if sub.chain.order() != len(members):
            raise AssertionError("intersection chain disagrees with census")
        return sub

    # -- derived handles -----------------------------------------------------

    def conjugated(self, by: SemilinearMap, label: str | None = None):
        inv = by.inverse()
        gens = [inv * g * by for g in self.gens]
        stab = act(by, self.stab_of) if self.stab_of is not None else None
        return GroupHandle.build(
            self.space, gens, domain=self.domain,
            label=label or f"{self.label}^x", stab_of=stab,
            target_order=self.order(),
            provenance=f"conjugate of {self.label}",
        )

    def join(self, other: "GroupHandle", label: str | None = None):
        return GroupHandle.build(
            self.space, list(self.gens) + list(other.gens), domain=self.domain,
            label=label or f"<{self.label},{other.label}>",
            provenance="join",
        )

    def with_extra_gens(self, extra, label: str | None = None,
                        target_order: BigCount | None = None):
        return GroupHandle.build(
            self.space, list(self.gens) + list(extra), domain=self.domain,
            label=label or self.label, target_order=target_order,
            provenance=self.provenance,
        )

    def elements_smaps(self, limit: int = 10**6):
        """All elements as semilinear maps (small groups only)."""
        return [sh for _, sh in self.chain.iter_shadows(limit)]

    def random_element(self, rng: random.Random) -> SemilinearMap:
        _, sh = self.chain.random_element(rng)
        return sh

    def base_signature(self, perm) -> tuple:
        return tuple(int(perm[lv.base]) for lv in self.chain.levels)

    def __repr__(self):
        done = self.chain.order() if self.chain.complete else "?"
        return f"GroupHandle({self.label}, order={done})"


# ---------------------------------------------------------------------------
# spec-level operation wrappers
# ---------------------------------------------------------------------------


def perm_image(G: GroupHandle) -> list[np.ndarray]:
    return G.perm_image()


def bsgs_order(G: GroupHandle) -> BigCount:
    return G.order()


def orbit(G: GroupHandle, x: Vector) -> list[Vector]:
    return G.orbit(x)


def stabilizer(G: GroupHandle, x: Vector) -> GroupHandle:
    return G.stabilizer(x)


def subspace_stabilizer(G: GroupHandle, s: Subspace) -> GroupHandle:
    return G.subspace_stabilizer(s)


def membership(G: GroupHandle, g: SemilinearMap) -> bool:
    return G.membership(g)


def derived_core(G: GroupHandle) -> GroupHandle:
    return G.derived_core()


def intersection(G: GroupHandle, H: GroupHandle,
                 budget: int = INTERSECTION_BUDGET) -> GroupHandle:
    return G.intersection(H, budget)


# ---------------------------------------------------------------------------
# chain cache
# ---------------------------------------------------------------------------

_chain_cache_dir: str | None = None


def set_chain_cache_dir(path: str | None):
    """Install a directory for chain cache files (None disables caching).

    The UNIFACT_CACHE_DIR environment variable overrides this setting.
    """
    global _chain_cache_dir
    _chain_cache_dir = path


def chain_cache_dir() -> str | None:
    import os

    return os.environ.get("UNIFACT_CACHE_DIR") or _chain_cache_dir


def _handle_cache_key(space, domain: Domain, gens) -> str:
    import hashlib

    h = hashlib.sha256()
    h.update(f"{space.spec.p}.{space.spec.f}.{space.n}.{domain.kind}".encode())
    for g in gens:
        h.update(g.key())
    return h.hexdigest()[:32]


def _smap_to_json(g: SemilinearMap) -> dict:
    spec = g.space.spec
    return {
        "mat": [[list(spec.coeffs_of(c)) for c in row] for row in g.mat],
        "frob": g.frob,
    }


def _smap_from_json(space, d) -> SemilinearMap:
    spec = space.spec
    mat = tuple(
        tuple(spec.idx_of(cs) for cs in row) for row in d["mat"]
    )
    return SemilinearMap(space, mat, d["frob"])


def save_chain(handle: GroupHandle) -> str | None:
    """Write the handle's verified chain to the cache; returns the path."""
    import json
    import os

    cdir = chain_cache_dir()
    if cdir is None or not handle.chain.complete:
        return None
    os.makedirs(cdir, exist_ok=True)
    key = _handle_cache_key(handle.space, handle.domain, handle.gens)
    payload = {
        "space": [handle.space.spec.p, handle.space.spec.f, handle.space.n],
        "domain": handle.domain.kind,
        "order": str(handle.chain.order()),
        "levels": [
            {
                "base": lv.base,
                "gens": [_smap_to_json(e.shadow) for e in lv.gens],
            }
            for lv in handle.chain.levels
        ],
    }
    path = os.path.join(cdir, f"chain-{key}.json")
    with open(path, "w") as fh:
        json.dump(payload, fh)
    return path


def load_chain(space, domain: Domain, gens) -> Chain | None:
    """Rebuild a cached chain; None on miss or corruption (with a warning)."""
    import json
    import os
    import warnings

    cdir = chain_cache_dir()
    if cdir is None:
        return None
    key = _handle_cache_key(space, domain, gens)
    path = os.path.join(cdir, f"chain-{key}.json")
    if not os.path.exists(path):
        return None
    try:
        with open(path) as fh:
            payload = json.load(fh)
        stored = [space.spec.p, space.spec.f, space.n]
        if payload["space"] != stored or payload["domain"] != domain.kind:
            return None
        chain = Chain(domain.size, SemilinearMap.identity(space))
        for lvd in payload["levels"]:
            lv = _Level(int(lvd["base"]))
            for gd in lvd["gens"]:
                sh = _smap_from_json(space, gd)
                lv.gens.append(_Elem(domain.perm_of(sh), sh))
            chain.levels.append(lv)
        for i in range(len(chain.levels) - 1, -1, -1):
            chain._rebuild_orbit(i)
        if chain.order() != int(payload["order"]):
            warnings.warn(f"chain cache {path} is corrupt; rebuilding")
            return None
        chain.complete = True
        return chain
    except (KeyError, ValueError, json.JSONDecodeError) as e:
        warnings.warn(f"chain cache {path} unreadable ({e}); rebuilding")
        return None


def purge_chain_cache() -> int:
    """Delete all cache files; returns the number removed."""
    import glob
    import os

    cdir = chain_cache_dir()
    if cdir is None or not os.path.isdir(cdir):
        return 0
    n = 0
    for f in glob.glob(os.path.join(cdir, "chain-*.json")):
        os.remove(f)
        n += 1
    return n
