"""Matrix bi-factorisations over free polynomial slot chains.

An object lives on a chain of polynomial slots R ⊗ R ⊗ ... ⊗ R; the outer
slots carry the left/right variable groups (a, b), internal slots are
junction variables x1, x2, ....  Maps between such chains are formal sums of
generator words built from a handful of primitives (multiplication, variable
substitution, divided transfer, division with remainder, coefficient
extraction), each of which commutes with the outer bimodule action.  That
invariant is what makes equality decidable here:

* any two operators agree iff they agree on all internal-slot monomials, and
* from a 2-slot source there are no internal slots, so comparing images of
  the rank generators is a complete, exact test.

Operators from sources with internal slots are compared structurally after
word normalization (substitution merging, multiplier merging and pushing)
and, failing that, pointwise on internal monomials up to a degree cutoff.
"""

from __future__ import annotations

from itertools import product as _iproduct

from .exactalg import Cyclo
from .polycalc import MultiPoly, PolyMatrix, Ring

DEFAULT_CUTOFF = 30

_RING_CACHE: dict = {}


def _slot_names(nslots: int, nvars: int, slot: int) -> tuple:
    if nslots == 1:
        base = "t"
    elif slot == 0:
        base = "a"
    elif slot == nslots - 1:
        base = "b"
    else:
        base = f"x{slot}"
    if nvars == 1:
        return (base,)
    if base[0] == "x":
        return tuple(f"{base}_{j}" for j in range(1, nvars + 1))
    return tuple(f"{base}{j}" for j in range(1, nvars + 1))


class SlotShape:
    """A chain of nslots polynomial slots, nvars variables per slot."""

    __slots__ = ("nslots", "nvars", "conductor")

    def __init__(self, nslots: int, nvars: int, conductor: int):
        if nslots < 1 or nvars < 1:
            raise ValueError("need at least one slot and one variable")
        object.__setattr__(self, "nslots", nslots)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "conductor", conductor)

    def __setattr__(self, *a):
        raise AttributeError("SlotShape is immutable")

    def _key(self):
        return (self.nslots, self.nvars, self.conductor)

    def __eq__(self, other):
        return isinstance(other, SlotShape) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"SlotShape({self.nslots}, nvars={self.nvars}, zeta_{self.conductor})"

    def slot_names(self, slot: int) -> tuple:
        return _slot_names(self.nslots, self.nvars, slot)

    def left_names(self) -> tuple:
        return self.slot_names(0)

    def right_names(self) -> tuple:
        return self.slot_names(self.nslots - 1)

    def internal_names(self) -> tuple:
        out = []
        for s in range(1, self.nslots - 1):
            out.extend(self.slot_names(s))
        return tuple(out)

    def ring(self) -> Ring:
        key = self._key()
        r = _RING_CACHE.get(key)
        if r is None:
            names = []
            for s in range(self.nslots):
                names.extend(self.slot_names(s))
            r = _RING_CACHE.setdefault(key, Ring(names, self.conductor))
        return r

    def glue(self, other: "SlotShape") -> "SlotShape":
        if self.nvars != other.nvars or self.conductor != other.conductor:
            raise ValueError("incompatible shapes for gluing")
        return SlotShape(self.nslots + other.nslots - 1, self.nvars, self.conductor)

    def drop_slot(self, slot: int) -> "SlotShape":
        if slot <= 0 or slot >= self.nslots - 1:
            raise ValueError("only internal slots can be dropped")
        return SlotShape(self.nslots - 1, self.nvars, self.conductor)

    def one(self) -> Cyclo:
        return Cyclo.one(self.conductor)


class FreeBimod:
    """Free module on `rank` copies of a slot chain."""

    __slots__ = ("shape", "rank")

    def __init__(self, shape: SlotShape, rank: int):
        if rank < 0:
            raise ValueError("negative rank")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "rank", rank)

    def __setattr__(self, *a):
        raise AttributeError("FreeBimod is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, FreeBimod)
            and self.shape == other.shape
            and self.rank == other.rank
        )

    def __hash__(self):
        return hash((self.shape, self.rank))

    def __repr__(self):
        return f"FreeBimod({self.shape}, rank={self.rank})"


# -- primitives -------------------------------------------------------------


def _embed_names(inner: SlotShape, ambient: SlotShape, offset: int) -> dict:
    out = {}
    for s in range(inner.nslots):
        for vi, va in zip(inner.slot_names(s), ambient.slot_names(offset + s)):
            out[vi] = va
    return out


class PMul:
    """Multiply by a fixed polynomial of the (unchanged) slot ring."""

    __slots__ = ("shape", "poly")

    def __init__(self, shape: SlotShape, poly: MultiPoly):
        if poly.ring != shape.ring():
            raise ValueError("multiplier not in the slot ring")
        self.shape = shape
        self.poly = poly

    src = property(lambda self: self.shape)
    dst = property(lambda self: self.shape)

    def apply(self, p: MultiPoly) -> MultiPoly:
        return p * self.poly

    def signature(self):
        return ("mul", self.shape, self.poly)

    def lift(self, left: int, right: int, asrc: SlotShape, adst: SlotShape) -> "PMul":
        return PMul(asrc, self.poly.rename(_embed_names(self.shape, asrc, left), asrc.ring()))

    def describe(self):
        return {"kind": "mul", "poly": str(self.poly)}


class PSubst:
    """Ring map var -> scalar * var between slot rings.

    Outer slots must map to the corresponding outer slots with scalar 1;
    internal variables may go anywhere with any scalar.  That keeps every
    substitution a bimodule map for the outer action.
    """

    __slots__ = ("src", "dst", "mapping")

    def __init__(self, src: SlotShape, dst: SlotShape, mapping: dict):
        sring = src.ring()
        one = Cyclo.one(src.conductor)
        norm = {}
        for v in sring.vars:
            if v not in mapping:
                raise ValueError(f"substitution must be total; missing {v!r}")
            c, w = mapping[v]
            cc = c if isinstance(c, Cyclo) else Cyclo.from_rat(src.conductor, c)
            dst.ring().index(w)
            norm[v] = (cc, w)
        for sv, dv in zip(src.left_names(), dst.left_names()):
            c, w = norm[sv]
            if w != dv or c != one:
                raise ValueError(f"outer-left variable {sv!r} must map to {dv!r} untwisted")
        for sv, dv in zip(src.right_names(), dst.right_names()):
            c, w = norm[sv]
            if w != dv or c != one:
                raise ValueError(f"outer-right variable {sv!r} must map to {dv!r} untwisted")
        self.src = src
        self.dst = dst
        self.mapping = norm

    def apply(self, p: MultiPoly) -> MultiPoly:
        return p.subst_scale(self.mapping, self.dst.ring())

    def is_identity(self) -> bool:
        if self.src != self.dst:
            return False
        one = Cyclo.one(self.src.conductor)
        return all(w == v and c == one for v, (c, w) in self.mapping.items())

    def merge(self, then: "PSubst") -> "PSubst":
        # self applied first, `then` second
        m = {}
        for v, (c, w) in self.mapping.items():
            c2, u = then.mapping[w]
            m[v] = (c * c2, u)
        return PSubst(self.src, then.dst, m)

    def signature(self):
        return ("subst", self.src, self.dst, frozenset(self.mapping.items()))

    def lift(self, left: int, right: int, asrc: SlotShape, adst: SlotShape) -> "PSubst":
        src_emb = _embed_names(self.src, asrc, left)
        dst_emb = _embed_names(self.dst, adst, left)
        m = {src_emb[v]: (c, dst_emb[w]) for v, (c, w) in self.mapping.items()}
        one = Cyclo.one(asrc.conductor)
        for s in range(left):
            for sv, dv in zip(asrc.slot_names(s), adst.slot_names(s)):
                m[sv] = (one, dv)
        for t in range(right):
            ss = left + self.src.nslots + t
            ds = left + self.dst.nslots + t
            for sv, dv in zip(asrc.slot_names(ss), adst.slot_names(ds)):
                m[sv] = (one, dv)
        return PSubst(asrc, adst, m)

    def describe(self):
        return {
            "kind": "subst",
            "map": {v: [str(c), w] for v, (c, w) in sorted(self.mapping.items())},
        }


class PTDiv:
    """Divided transfer: p ↦ (p − p[v1→v2]) / (v1 − v2), shape preserved."""

    __slots__ = ("shape", "v1", "v2")

    def __init__(self, shape: SlotShape, v1: str, v2: str):
        ring = shape.ring()
        ring.index(v1), ring.index(v2)
        self.shape = shape
        self.v1 = v1
        self.v2 = v2

    src = property(lambda self: self.shape)
    dst = property(lambda self: self.shape)

    def apply(self, p: MultiPoly) -> MultiPoly:
        return p.divided_difference(self.v1, self.v2)

    def signature(self):
        return ("tdiv", self.shape, self.v1, self.v2)

    def lift(self, left, right, asrc, adst):
        emb = _embed_names(self.shape, asrc, left)
        return PTDiv(asrc, emb[self.v1], emb[self.v2])

    def describe(self):
        return {"kind": "tdiv", "from": self.v1, "into": self.v2}


class PQuo:
    """Quotient of division with remainder by a divisor monic in one variable."""

    __slots__ = ("shape", "modulus", "var")

    def __init__(self, shape: SlotShape, modulus: MultiPoly, var: str):
        if modulus.ring != shape.ring():
            raise ValueError("modulus not in the slot ring")
        self.shape = shape
        self.modulus = modulus
        self.var = var

    src = property(lambda self: self.shape)
    dst = property(lambda self: self.shape)

    def apply(self, p: MultiPoly) -> MultiPoly:
        return p.divmod_in_var(self.modulus, self.var)[0]

    def signature(self):
        return ("quo", self.shape, self.modulus, self.var)

    def lift(self, left, right, asrc, adst):
        emb = _embed_names(self.shape, asrc, left)
        return PQuo(asrc, self.modulus.rename(emb, asrc.ring()), emb[self.var])

    def describe(self):
        return {"kind": "quo", "modulus": str(self.modulus), "var": self.var}


class PRem(PQuo):
    """Remainder of the same division."""

    __slots__ = ()

    def apply(self, p: MultiPoly) -> MultiPoly:
        return p.divmod_in_var(self.modulus, self.var)[1]

    def signature(self):
        return ("rem", self.shape, self.modulus, self.var)

    def lift(self, left, right, asrc, adst):
        emb = _embed_names(self.shape, asrc, left)
        return PRem(asrc, self.modulus.rename(emb, asrc.ring()), emb[self.var])

    def describe(self):
        return {"kind": "rem", "modulus": str(self.modulus), "var": self.var}


class PCoeff:
    """Extract the coefficient of var^k and drop that internal slot."""

    __slots__ = ("shape", "dst_shape", "var", "k", "slot")

    def __init__(self, shape: SlotShape, var: str, k: int):
        if shape.nvars != 1:
            raise ValueError("coefficient extraction implemented for one-variable slots")
        slot = None
        for s in range(1, shape.nslots - 1):
            if shape.slot_names(s)[0] == var:
                slot = s
        if slot is None:
            raise ValueError(f"{var!r} is not an internal slot variable")
        self.shape = shape
        self.dst_shape = shape.drop_slot(slot)
        self.var = var
        self.k = k
        self.slot = slot

    src = property(lambda self: self.shape)
    dst = property(lambda self: self.dst_shape)

    def _rename(self) -> dict:
        out = {}
        for s in range(self.shape.nslots):
            if s == self.slot:
                continue
            d = s if s < self.slot else s - 1
            for vi, va in zip(self.shape.slot_names(s), self.dst_shape.slot_names(d)):
                out[vi] = va
        return out

    def apply(self, p: MultiPoly) -> MultiPoly:
        part = p.coefficients_in(self.var).get(self.k)
        if part is None:
            return self.dst_shape.ring().zero()
        return part.rename(self._rename(), self.dst_shape.ring())

    def signature(self):
        return ("coeff", self.shape, self.var, self.k)

    def lift(self, left, right, asrc, adst):
        emb = _embed_names(self.shape, asrc, left)
        return PCoeff(asrc, emb[self.var], self.k)

    def describe(self):
        return {"kind": "coeff", "var": self.var, "power": self.k}


# -- words -------------------------------------------------------------------


class Word:
    """One generator word: scalar coefficient and a chain of primitives
    applied left to right."""

    __slots__ = ("coeff", "prims", "src", "dst")

    def __init__(self, coeff: Cyclo, prims: tuple, src: SlotShape, dst: SlotShape):
        self.coeff = coeff
        self.prims = prims
        self.src = src
        self.dst = dst

    @staticmethod
    def identity(shape: SlotShape) -> "Word":
        return Word(Cyclo.one(shape.conductor), (), shape, shape)

    @staticmethod
    def of(prim) -> "Word":
        return Word(Cyclo.one(prim.src.conductor), (prim,), prim.src, prim.dst)

    def apply(self, p: MultiPoly) -> MultiPoly:
        for prim in self.prims:
            p = prim.apply(p)
        return p * self.coeff

    def then(self, other: "Word") -> "Word":
        if self.dst != other.src:
            raise ValueError("word shapes do not chain")
        return Word(self.coeff * other.coeff, self.prims + other.prims, self.src, other.dst)

    def scaled(self, c: Cyclo) -> "Word":
        return Word(self.coeff * c, self.prims, self.src, self.dst)

    def normalized(self):
        """Merged/pushed normal form; None if the word is zero."""
        coeff = self.coeff
        if coeff.is_zero():
            return None
        stack: list = []

        def push(prim):
            nonlocal coeff
            if isinstance(prim, PMul):
                cv = prim.poly.constant_value()
                if cv is not None:
                    coeff = coeff * cv
                    return
                if stack and isinstance(stack[-1], PMul):
                    top = stack.pop()
                    merged = PMul(prim.shape, top.poly * prim.poly)
                    push(merged)
                else:
                    stack.append(prim)
            elif isinstance(prim, PSubst):
                if stack and isinstance(stack[-1], PMul):
                    m = stack.pop()
                    push(prim)
                    push(PMul(prim.dst, prim.apply(m.poly)))
                elif stack and isinstance(stack[-1], PSubst):
                    merged = stack.pop().merge(prim)
                    if not merged.is_identity():
                        stack.append(merged)
                elif not prim.is_identity():
                    stack.append(prim)
            else:
                stack.append(prim)

        for prim in self.prims:
            push(prim)
            if coeff.is_zero():
                return None
        return Word(coeff, tuple(stack), self.src, self.dst)

    def signature(self):
        return (self.src, self.dst, tuple(p.signature() for p in self.prims))

    def lift(self, left: int, right: int, ambient_nvars_check=None) -> "Word":
        asrc = SlotShape(left + self.src.nslots + right, self.src.nvars, self.src.conductor)
        adst = SlotShape(left + self.dst.nslots + right, self.dst.nvars, self.dst.conductor)
        prims = []
        cur_src, cur_dst = asrc, adst
        # each prim is lifted with the same contexts; shapes thread through
        for prim in self.prims:
            ps = SlotShape(left + prim.src.nslots + right, prim.src.nvars, prim.src.conductor)
            pd = SlotShape(left + prim.dst.nslots + right, prim.dst.nvars, prim.dst.conductor)
            prims.append(prim.lift(left, right, ps, pd))
        return Word(self.coeff, tuple(prims), asrc, adst)

    def describe(self):
        return {"coeff": str(self.coeff), "word": [p.describe() for p in self.prims]}

    def __repr__(self):
        inner = "∘".join(type(p).__name__[1:].lower() for p in reversed(self.prims)) or "id"
        return f"({self.coeff})*{inner}"


def w_mul(shape: SlotShape, poly: MultiPoly) -> Word:
    return Word.of(PMul(shape, poly))


def w_insert(src: SlotShape, position: int) -> Word:
    """r ⊗ s ↦ r ⊗ 1 ⊗ s: a new internal slot at `position`."""
    dst = SlotShape(src.nslots + 1, src.nvars, src.conductor)
    one = Cyclo.one(src.conductor)
    m = {}
    for s in range(src.nslots):
        d = s if s < position else s + 1
        for sv, dv in zip(src.slot_names(s), dst.slot_names(d)):
            m[sv] = (one, dv)
    return Word.of(PSubst(src, dst, m))


def w_collapse(src: SlotShape, pair_left: int, scalar=None, twist_on: str = "left") -> Word:
    """Merge slots pair_left, pair_left+1; the twisted side picks up `scalar`."""
    dst = SlotShape(src.nslots - 1, src.nvars, src.conductor)
    one = Cyclo.one(src.conductor)
    sc = one if scalar is None else scalar
    m = {}
    for s in range(src.nslots):
        d = s if s <= pair_left else s - 1
        if s == pair_left:
            c = sc if twist_on == "left" else one
        elif s == pair_left + 1:
            c = sc if twist_on == "right" else one
        else:
            c = one
        for sv, dv in zip(src.slot_names(s), dst.slot_names(d)):
            m[sv] = (c, dv)
    return Word.of(PSubst(src, dst, m))


def w_transfer(shape: SlotShape, var: str, into: str) -> Word:
    """Full transfer x ↦ target variable, keeping the slot chain."""
    one = Cyclo.one(shape.conductor)
    m = {v: (one, v) for v in shape.ring().vars}
    m[var] = (one, into)
    return Word.of(PSubst(shape, shape, m))


def w_tdiv(shape: SlotShape, var: str, into: str) -> Word:
    return Word.of(PTDiv(shape, var, into))


def w_quo(shape: SlotShape, modulus: MultiPoly, var: str) -> Word:
    return Word.of(PQuo(shape, modulus, var))


def w_rem(shape: SlotShape, modulus: MultiPoly, var: str) -> Word:
    return Word.of(PRem(shape, modulus, var))


def w_coeff(shape: SlotShape, var: str, k: int) -> Word:
    return Word.of(PCoeff(shape, var, k))


# -- operators ----------------------------------------------------------------


class Operator:
    """Matrix of formal word sums between free slot modules."""

    __slots__ = ("src", "dst", "entries")

    def __init__(self, src: FreeBimod, dst: FreeBimod, entries):
        self.src = src
        self.dst = dst
        self.entries = [[list(entries[i][j]) for j in range(src.rank)] for i in range(dst.rank)]

    @staticmethod
    def zero(src: FreeBimod, dst: FreeBimod) -> "Operator":
        return Operator(src, dst, [[[] for _ in range(src.rank)] for _ in range(dst.rank)])

    @staticmethod
    def identity(mod: FreeBimod) -> "Operator":
        op = Operator.zero(mod, mod)
        for i in range(mod.rank):
            op.entries[i][i].append(Word.identity(mod.shape))
        return op

    @staticmethod
    def single(src: FreeBimod, dst: FreeBimod, i: int, j: int, word: Word) -> "Operator":
        op = Operator.zero(src, dst)
        op.entries[i][j].append(word)
        return op

    @staticmethod
    def diagonal(mod_src: FreeBimod, mod_dst: FreeBimod, word: Word) -> "Operator":
        if mod_src.rank != mod_dst.rank:
            raise ValueError("diagonal needs equal ranks")
        op = Operator.zero(mod_src, mod_dst)
        for i in range(mod_src.rank):
            op.entries[i][i].append(word)
        return op

    @staticmethod
    def from_poly_matrix(src: FreeBimod, dst: FreeBimod, pm: PolyMatrix) -> "Operator":
        if pm.rows != dst.rank or pm.cols != src.rank:
            raise ValueError("matrix shape mismatch")
        if src.shape != dst.shape:
            raise ValueError("from_poly_matrix needs equal shapes")
        op = Operator.zero(src, dst)
        for i in range(dst.rank):
            for j in range(src.rank):
                p = pm[i, j]
                if not p.is_zero():
                    op.entries[i][j].append(w_mul(src.shape, p))
        return op

    def compose(self, first: "Operator") -> "Operator":
        """self ∘ first (apply `first`, then self)."""
        if first.dst != self.src:
            raise ValueError(f"cannot compose {first.dst} into {self.src}")
        out = Operator.zero(first.src, self.dst)
        for i in range(self.dst.rank):
            for j in range(first.src.rank):
                acc = out.entries[i][j]
                for k in range(self.src.rank):
                    left = self.entries[i][k]
                    if not left:
                        continue
                    for wf in first.entries[k][j]:
                        for ws in left:
                            acc.append(wf.then(ws))
        return out

    def __add__(self, other: "Operator") -> "Operator":
        if self.src != other.src or self.dst != other.dst:
            raise ValueError("operator shape mismatch in sum")
        out = Operator.zero(self.src, self.dst)
        for i in range(self.dst.rank):
            for j in range(self.src.rank):
                out.entries[i][j] = self.entries[i][j] + other.entries[i][j]
        return out

    def scale(self, c) -> "Operator":
        cc = c if isinstance(c, Cyclo) else Cyclo.from_rat(self.src.shape.conductor, c)
        out = Operator.zero(self.src, self.dst)
        for i in range(self.dst.rank):
            for j in range(self.src.rank):
                out.entries[i][j] = [w.scaled(cc) for w in self.entries[i][j]]
        return out

    def __neg__(self) -> "Operator":
        return self.scale(-1)

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-other)

    def normalized(self) -> "Operator":
        """Normalize every word, then merge words that differ only in a
        trailing multiplier by summing the multiplier polynomials."""
        out = Operator.zero(self.src, self.dst)
        for i in range(self.dst.rank):
            for j in range(self.src.rank):
                groups: dict = {}
                order: list = []
                for w in self.entries[i][j]:
                    nw = w.normalized()
                    if nw is None:
                        continue
                    if nw.prims and isinstance(nw.prims[-1], PMul):
                        prefix = nw.prims[:-1]
                        poly = nw.prims[-1].poly * nw.coeff
                    else:
                        prefix = nw.prims
                        poly = nw.dst.ring().const(nw.coeff)
                    key = (nw.src, nw.dst, tuple(p.signature() for p in prefix))
                    if key in groups:
                        prev = groups[key]
                        groups[key] = (prefix, prev[1] + poly, nw.src, nw.dst)
                    else:
                        groups[key] = (prefix, poly, nw.src, nw.dst)
                        order.append(key)
                ws = []
                for key in order:
                    prefix, poly, srcs, dsts = groups[key]
                    if poly.is_zero():
                        continue
                    cv = poly.constant_value()
                    if cv is not None:
                        ws.append(Word(cv, prefix, srcs, dsts))
                    else:
                        ws.append(
                            Word(
                                Cyclo.one(dsts.conductor),
                                prefix + (PMul(dsts, poly),),
                                srcs,
                                dsts,
                            )
                        )
                out.entries[i][j] = ws
        return out

    def is_structural_zero(self) -> bool:
        n = self.normalized()
        return all(not n.entries[i][j] for i in range(self.dst.rank) for j in range(self.src.rank))

    def apply(self, element) -> list:
        sring = self.src.shape.ring()
        out = [self.dst.shape.ring().zero() for _ in range(self.dst.rank)]
        for j, p in enumerate(element):
            if p.is_zero():
                continue
            if p.ring != sring:
                raise ValueError("element not in the source ring")
            for i in range(self.dst.rank):
                for w in self.entries[i][j]:
                    out[i] = out[i] + w.apply(p)
        return out

    def apply_basis(self, copy: int, exps: dict) -> list:
        ring = self.src.shape.ring()
        elem = [ring.zero()] * self.src.rank
        elem[copy] = ring.monomial(exps)
        return self.apply(elem)

    def generator_images(self) -> list:
        """Images of the copy generators (complete data for 2-slot sources)."""
        return [self.apply_basis(j, {}) for j in range(self.src.rank)]

    def generator_matrix(self) -> PolyMatrix:
        if self.src.shape.nslots > 2:
            raise ValueError("generator matrix is only faithful for 2-slot sources")
        cols = self.generator_images()
        ring = self.dst.shape.ring()
        return PolyMatrix(
            ring, [[cols[j][i] for j in range(self.src.rank)] for i in range(self.dst.rank)]
        )

    def pure_mul_matrix(self):
        """PolyMatrix of multipliers if every word is a plain multiplication."""
        if self.src.shape != self.dst.shape:
            return None
        ring = self.src.shape.ring()
        n = self.normalized()
        rows = []
        for i in range(self.dst.rank):
            row = []
            for j in range(self.src.rank):
                p = ring.zero()
                for w in n.entries[i][j]:
                    if len(w.prims) == 0:
                        p = p + ring.const(w.coeff)
                    elif len(w.prims) == 1 and isinstance(w.prims[0], PMul):
                        p = p + w.prims[0].poly * w.coeff
                    else:
                        return None
                row.append(p)
            rows.append(row)
        return PolyMatrix(ring, rows)

    def to_json(self):
        return {
            "src": {"slots": self.src.shape.nslots, "rank": self.src.rank},
            "dst": {"slots": self.dst.shape.nslots, "rank": self.dst.rank},
            "entries": [
                [[w.describe() for w in self.entries[i][j]] for j in range(self.src.rank)]
            for i in range(self.dst.rank)],
        }


def _internal_monomials(shape: SlotShape, cutoff: int):
    names = shape.internal_names()
    if not names:
        yield {}
        return
    def rec(i, remaining, acc):
        if i == len(names):
            yield dict(acc)
            return
        for k in range(remaining + 1):
            acc.append((names[i], k))
            yield from rec(i + 1, remaining - k, acc)
            acc.pop()
    yield from rec(0, cutoff, [])


def op_equal(A: Operator, B: Operator, cutoff: int = DEFAULT_CUTOFF):
    """Tiered operator equality: (equal, mode).

    Tiers: structural cancellation of the difference; pure-multiplier
    comparison (faithful on any chain); generator images (complete for
    sources without internal slots); pointwise on internal monomials up to
    `cutoff` total degree.  Verdicts from the first three tiers are exact;
    a False from the last carries the failing basis element in the mode.
    """
    if A.src != B.src or A.dst != B.dst:
        raise ValueError("operator shape mismatch")
    diff = (A - B).normalized()
    if all(
        not diff.entries[i][j] for i in range(diff.dst.rank) for j in range(diff.src.rank)
    ):
        return True, "exact-structural"
    pm = diff.pure_mul_matrix()
    if pm is not None:
        return pm.is_zero(), "exact-multiplier"
    zero_dst = [diff.dst.shape.ring().zero()] * diff.dst.rank
    if diff.src.shape.nslots <= 2:
        eq = all(diff.apply_basis(j, {}) == zero_dst for j in range(diff.src.rank))
        return eq, "exact-generator"
    for copy in range(diff.src.rank):
        for exps in _internal_monomials(diff.src.shape, cutoff):
            if diff.apply_basis(copy, exps) != zero_dst:
                return False, f"counterexample at copy {copy}, monomial {exps}"
    return True, "verified-to-cutoff"


def lift_left(op: Operator, right: FreeBimod) -> Operator:
    """op ⊗ id on a slot-glued product (right factor untouched)."""
    shift = right.shape.nslots - 1
    src = FreeBimod(op.src.shape.glue(right.shape), op.src.rank * right.rank)
    dst = FreeBimod(op.dst.shape.glue(right.shape), op.dst.rank * right.rank)
    out = Operator.zero(src, dst)
    for n in range(op.dst.rank):
        for m in range(op.src.rank):
            words = [w.lift(0, shift) for w in op.entries[n][m]]
            if not words:
                continue
            for q in range(right.rank):
                out.entries[n * right.rank + q][m * right.rank + q].extend(words)
    return out


def lift_right(op: Operator, left: FreeBimod) -> Operator:
    """id ⊗ op on a slot-glued product (left factor untouched)."""
    shift = left.shape.nslots - 1
    src = FreeBimod(left.shape.glue(op.src.shape), left.rank * op.src.rank)
    dst = FreeBimod(left.shape.glue(op.dst.shape), left.rank * op.dst.rank)
    out = Operator.zero(src, dst)
    for n in range(op.dst.rank):
        for m in range(op.src.rank):
            words = [w.lift(shift, 0) for w in op.entries[n][m]]
            if not words:
                continue
            for p in range(left.rank):
                out.entries[p * op.dst.rank + n][p * op.src.rank + m].extend(words)
    return out


def _block_operator(src: FreeBimod, dst: FreeBimod, blocks, col_mods, row_mods) -> Operator:
    """Stitch a 2x2 grid of Operators (or None) into one Operator."""
    out = Operator.zero(src, dst)
    roff = 0
    for bi, rm in enumerate(row_mods):
        coff = 0
        for bj, cm in enumerate(col_mods):
            blk = blocks[bi][bj]
            if blk is not None:
                if blk.src.rank != cm or blk.dst.rank != rm:
                    raise ValueError("block rank mismatch")
                for i in range(rm):
                    for j in range(cm):
                        out.entries[roff + i][coff + j].extend(blk.entries[i][j])
            coff += cm
        roff += rm
    return out


# -- objects and morphisms ------------------------------------------------------


class MBF:
    """Matrix bi-factorisation: two modules, two differentials, a potential."""

    __slots__ = ("m0", "m1", "d0", "d1", "w", "_tcache")

    def __init__(self, m0: FreeBimod, m1: FreeBimod, d0: Operator, d1: Operator, w: MultiPoly):
        if m0.shape != m1.shape:
            raise ValueError("component modules must share the slot shape")
        if d0.src != m0 or d0.dst != m1 or d1.src != m1 or d1.dst != m0:
            raise ValueError("differential endpoints inconsistent")
        if len(w.ring.vars) != m0.shape.nvars:
            raise ValueError("potential variable count mismatch")
        self.m0 = m0
        self.m1 = m1
        self.d0 = d0
        self.d1 = d1
        self.w = w
        self._tcache = {}

    @property
    def shape(self) -> SlotShape:
        return self.m0.shape

    def w_difference(self) -> MultiPoly:
        ring = self.shape.ring()
        left = {v: ring.var(n) for v, n in zip(self.w.ring.vars, self.shape.left_names())}
        right = {v: ring.var(n) for v, n in zip(self.w.ring.vars, self.shape.right_names())}
        return self.w.substitute(left) - self.w.substitute(right)

    def component(self, parity: int) -> FreeBimod:
        return self.m0 if parity % 2 == 0 else self.m1

    def differential_from(self, parity: int) -> Operator:
        return self.d0 if parity % 2 == 0 else self.d1

    def to_json(self):
        return {
            "slots": self.shape.nslots,
            "nvars": self.shape.nvars,
            "conductor": self.shape.conductor,
            "rank0": self.m0.rank,
            "rank1": self.m1.rank,
            "potential": str(self.w),
            "d0": self.d0.to_json()["entries"],
            "d1": self.d1.to_json()["entries"],
        }


def mbf_from_polys(shape: SlotShape, d0_entries, d1_entries, w: MultiPoly) -> MBF:
    ring = shape.ring()
    pm0 = PolyMatrix(ring, d0_entries)
    pm1 = PolyMatrix(ring, d1_entries)
    m0 = FreeBimod(shape, pm0.cols)
    m1 = FreeBimod(shape, pm0.rows)
    if pm1.rows != m0.rank or pm1.cols != m1.rank:
        raise ValueError("d0/d1 shapes inconsistent")
    return MBF(m0, m1, Operator.from_poly_matrix(m0, m1, pm0),
               Operator.from_poly_matrix(m1, m0, pm1), w)


class ValidationReport:
    __slots__ = ("ok", "mode", "violations")

    def __init__(self, ok, mode, violations):
        self.ok = ok
        self.mode = mode
        self.violations = violations

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "mode": self.mode, "violations": self.violations}

    def __repr__(self):
        return f"ValidationReport(ok={self.ok}, mode={self.mode!r})"


def validate_mbf(D: MBF, cutoff: int = DEFAULT_CUTOFF) -> ValidationReport:
    """Check d1∘d0 = (W(a)−W(b))·id on D0 and d0∘d1 likewise on D1."""
    wdiff = D.w_difference()
    target0 = Operator.diagonal(D.m0, D.m0, w_mul(D.shape, wdiff))
    target1 = Operator.diagonal(D.m1, D.m1, w_mul(D.shape, wdiff))
    violations = []
    modes = []
    for name, got, want in (
        ("d1*d0", D.d1.compose(D.d0), target0),
        ("d0*d1", D.d0.compose(D.d1), target1),
    ):
        eq, mode = op_equal(got, want, cutoff)
        modes.append(mode)
        if not eq:
            diff = (got - want).normalized()
            detail = None
            for i in range(diff.dst.rank):
                for j in range(diff.src.rank):
                    if diff.entries[i][j]:
                        pm = diff.pure_mul_matrix()
                        detail = {
                            "block": [i, j],
                            "difference": str(pm[i, j]) if pm is not None else "non-multiplier word",
                        }
                        break
                if detail:
                    break
            violations.append({"which": name, "mode": mode, "detail": detail})
    mode = "exact" if all(m.startswith("exact") for m in modes) else "verified-to-cutoff"
    return ValidationReport(not violations, mode, violations)


class Morphism:
    """Even or odd map of bi-factorisations, stored as the two parity legs."""

    __slots__ = ("src", "dst", "parity", "opE", "opO")

    def __init__(self, src: MBF, dst: MBF, parity: int, opE: Operator, opO: Operator):
        parity %= 2
        if opE.src != src.m0 or opO.src != src.m1:
            raise ValueError("morphism sources inconsistent")
        if opE.dst != dst.component(parity) or opO.dst != dst.component(1 + parity):
            raise ValueError("morphism targets inconsistent")
        self.src = src
        self.dst = dst
        self.parity = parity
        self.opE = opE
        self.opO = opO

    @staticmethod
    def identity(D: MBF) -> "Morphism":
        return Morphism(D, D, 0, Operator.identity(D.m0), Operator.identity(D.m1))

    @staticmethod
    def zero(src: MBF, dst: MBF, parity: int = 0) -> "Morphism":
        return Morphism(
            src, dst, parity,
            Operator.zero(src.m0, dst.component(parity)),
            Operator.zero(src.m1, dst.component(1 + parity)),
        )

    @staticmethod
    def from_poly_blocks(src: MBF, dst: MBF, parity: int, mat_even, mat_odd) -> "Morphism":
        ring = src.shape.ring()
        pe = PolyMatrix(ring, mat_even)
        po = PolyMatrix(ring, mat_odd)
        return Morphism(
            src, dst, parity,
            Operator.from_poly_matrix(src.m0, dst.component(parity), pe),
            Operator.from_poly_matrix(src.m1, dst.component(1 + parity), po),
        )

    def op_from(self, parity: int) -> Operator:
        return self.opE if parity % 2 == 0 else self.opO

    def compose(self, first: "Morphism") -> "Morphism":
        if first.dst is not self.src and (
            first.dst.m0 != self.src.m0 or first.dst.m1 != self.src.m1
        ):
            raise ValueError("morphism composition endpoint mismatch")
        par = (self.parity + first.parity) % 2
        opE = self.op_from(first.parity).compose(first.opE)
        opO = self.op_from(1 + first.parity).compose(first.opO)
        return Morphism(first.src, self.dst, par, opE, opO)

    def __add__(self, other: "Morphism") -> "Morphism":
        if self.parity != other.parity:
            raise ValueError("cannot add morphisms of different parity")
        return Morphism(self.src, self.dst, self.parity, self.opE + other.opE, self.opO + other.opO)

    def scale(self, c) -> "Morphism":
        return Morphism(self.src, self.dst, self.parity, self.opE.scale(c), self.opO.scale(c))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def delta(self) -> "Morphism":
        """D′∘φ − (−1)^{|φ|} φ∘D."""
        X, Y = self.src, self.dst
        if self.parity == 0:
            opE = Y.d0.compose(self.opE) - self.opO.compose(X.d0)
            opO = Y.d1.compose(self.opO) - self.opE.compose(X.d1)
        else:
            opE = Y.d1.compose(self.opE) + self.opO.compose(X.d0)
            opO = Y.d0.compose(self.opO) + self.opE.compose(X.d1)
        return Morphism(X, Y, 1 + self.parity, opE, opO)

    def is_closed(self, cutoff: int = DEFAULT_CUTOFF):
        z = Morphism.zero(self.src, self.dst, 1 + self.parity)
        return morphism_equal(self.delta(), z, cutoff)

    def to_json(self):
        return {
            "parity": "even" if self.parity == 0 else "odd",
            "from_even": self.opE.to_json()["entries"],
            "from_odd": self.opO.to_json()["entries"],
        }


def morphism_equal(f: Morphism, g: Morphism, cutoff: int = DEFAULT_CUTOFF):
    if f.parity != g.parity:
        return False, "parity mismatch"
    eq1, m1 = op_equal(f.opE, g.opE, cutoff)
    if not eq1:
        return False, m1
    eq2, m2 = op_equal(f.opO, g.opO, cutoff)
    if not eq2:
        return False, m2
    order = {"exact-structural": 0, "exact-generator": 1}
    worst = max((m1, m2), key=lambda m: order.get(m, 2))
    return True, worst


# -- tensor structure ----------------------------------------------------------


def _tensor_blocks(parity: int):
    return ((0, 0), (1, 1)) if parity % 2 == 0 else ((1, 0), (0, 1))


def _block_offset(X: MBF, Y: MBF, parity: int, i: int, j: int) -> int:
    off = 0
    for (bi, bj) in _tensor_blocks(parity):
        if (bi, bj) == (i, j):
            return off
        off += X.component(bi).rank * Y.component(bj).rank
    raise ValueError("block not in this parity part")


def tensor_obj(X: MBF, Y: MBF) -> MBF:
    """Slot-glued tensor product with the derivation-style sign pattern."""
    hit = X._tcache.get(id(Y))
    if hit is not None and hit[0] is Y:
        return hit[1]
    if X.w != Y.w:
        raise ValueError("potential mismatch")
    shape = X.shape.glue(Y.shape)
    r = lambda i, j: X.component(i).rank * Y.component(j).rank
    m0 = FreeBimod(shape, r(0, 0) + r(1, 1))
    m1 = FreeBimod(shape, r(1, 0) + r(0, 1))
    d0 = _block_operator(
        m0, m1,
        [[lift_left(X.d0, Y.m0), lift_right(Y.d1, X.m1).scale(-1)],
         [lift_right(Y.d0, X.m0), lift_left(X.d1, Y.m1)]],
        [r(0, 0), r(1, 1)], [r(1, 0), r(0, 1)],
    )
    d1 = _block_operator(
        m1, m0,
        [[lift_left(X.d1, Y.m0), lift_right(Y.d1, X.m0)],
         [lift_right(Y.d0, X.m1).scale(-1), lift_left(X.d0, Y.m1)]],
        [r(1, 0), r(0, 1)], [r(0, 0), r(1, 1)],
    )
    T = MBF(m0, m1, d0, d1, X.w)
    X._tcache[id(Y)] = (Y, T)
    return T


def tensor_mor(f: Morphism, g: Morphism) -> Morphism:
    """f ⊗ g with the sign (−1)^{|g|·i} on the X_i-source blocks."""
    X, Y, Xp, Yp = f.src, g.src, f.dst, g.dst
    src = tensor_obj(X, Y)
    dst = tensor_obj(Xp, Yp)
    par = (f.parity + g.parity) % 2
    ops = {}
    for sp in (0, 1):
        tp = (sp + par) % 2
        acc = Operator.zero(src.component(sp), dst.component(tp))
        for (i, j) in _tensor_blocks(sp):
            fi, gj = f.op_from(i), g.op_from(j)
            ip, jp = (i + f.parity) % 2, (j + g.parity) % 2
            piece = lift_left(fi, Yp.component(jp)).compose(lift_right(gj, X.component(i)))
            if g.parity and i:
                piece = piece.scale(-1)
            roff = _block_offset(Xp, Yp, tp, ip, jp)
            coff = _block_offset(X, Y, sp, i, j)
            for u in range(piece.dst.rank):
                for v in range(piece.src.rank):
                    acc.entries[roff + u][coff + v].extend(piece.entries[u][v])
        ops[sp] = acc
    return Morphism(src, dst, par, ops[0], ops[1])


def _triple_layout(X: MBF, Y: MBF, Z: MBF, parity: int, left_bracketed: bool):
    """Copy order of ((X⊗Y)⊗Z) or (X⊗(Y⊗Z)) as (i,j,k,ci,cj,ck) tuples."""
    out = []
    if left_bracketed:
        for (p, k) in _tensor_blocks(parity):
            for (i, j) in _tensor_blocks(p):
                for ci in range(X.component(i).rank):
                    for cj in range(Y.component(j).rank):
                        for ck in range(Z.component(k).rank):
                            out.append((i, j, k, ci, cj, ck))
    else:
        for (i, q) in _tensor_blocks(parity):
            for ci in range(X.component(i).rank):
                for (j, k) in _tensor_blocks(q):
                    for cj in range(Y.component(j).rank):
                        for ck in range(Z.component(k).rank):
                            out.append((i, j, k, ci, cj, ck))
    return out


def associator(X: MBF, Y: MBF, Z: MBF) -> Morphism:
    """(X⊗Y)⊗Z → X⊗(Y⊗Z): a pure copy permutation, no signs."""
    src = tensor_obj(tensor_obj(X, Y), Z)
    dst = tensor_obj(X, tensor_obj(Y, Z))
    ident = Word.identity(src.shape)
    ops = {}
    for parity in (0, 1):
        s_layout = _triple_layout(X, Y, Z, parity, True)
        t_pos = {t: n for n, t in enumerate(_triple_layout(X, Y, Z, parity, False))}
        op = Operator.zero(src.component(parity), dst.component(parity))
        for col, key in enumerate(s_layout):
            op.entries[t_pos[key]][col].append(ident)
        ops[parity] = op
    return Morphism(src, dst, 0, ops[0], ops[1])


def associator_inv(X: MBF, Y: MBF, Z: MBF) -> Morphism:
    src = tensor_obj(X, tensor_obj(Y, Z))
    dst = tensor_obj(tensor_obj(X, Y), Z)
    ident = Word.identity(src.shape)
    ops = {}
    for parity in (0, 1):
        s_layout = _triple_layout(X, Y, Z, parity, False)
        t_pos = {t: n for n, t in enumerate(_triple_layout(X, Y, Z, parity, True))}
        op = Operator.zero(src.component(parity), dst.component(parity))
        for col, key in enumerate(s_layout):
            op.entries[t_pos[key]][col].append(ident)
        ops[parity] = op
    return Morphism(src, dst, 0, ops[0], ops[1])


# -- the x^d defect family -------------------------------------------------------


def fermat_potential(d: int) -> MultiPoly:
    ring = Ring(("t",), d)
    return ring.var("t") ** d


def ps_object(d: int, S) -> MBF:
    """P_S = (R⊗R, R⊗R, p_{S^c}, p_S) for W = x^d."""
    S = sorted(set(i % d for i in S))
    if not S or len(S) == d:
        raise ValueError("S must be a proper nonempty residue set")
    shape = SlotShape(2, 1, d)
    ring = shape.ring()
    Sc = [i for i in range(d) if i not in S]
    return mbf_from_polys(shape, [[ring.p_S(Sc)]], [[ring.p_S(S)]], fermat_potential(d))


def twist_object(D: MBF, m: int, n: int) -> MBF:
    """Substitute a → η^{−m} a, b → η^{−n} b in the differentials (W = x^d)."""
    pm0 = D.d0.pure_mul_matrix()
    pm1 = D.d1.pure_mul_matrix()
    if pm0 is None or pm1 is None:
        raise ValueError("twisting needs multiplier-only differentials")
    shape = D.shape
    if shape.nvars != 1 or shape.nslots != 2:
        raise ValueError("twisting implemented for one-variable 2-slot objects")
    ring = shape.ring()
    eta = ring.root(1)
    tw = {"a": (eta ** (-m % shape.conductor), "a"), "b": (eta ** (-n % shape.conductor), "b")}
    sub = lambda p: p.subst_scale(tw, ring)
    return MBF(
        D.m0, D.m1,
        Operator.from_poly_matrix(D.m0, D.m1, pm0.map(sub)),
        Operator.from_poly_matrix(D.m1, D.m0, pm1.map(sub)),
        D.w,
    )


def twist_iso_ps(d: int, S, m: int, n: int):
    """(twisted P_S, iso to P_{S+(m−n)}, target object)."""
    S = sorted(set(i % d for i in S))
    T = twist_object(ps_object(d, S), m, n)
    target = ps_object(d, [i + m - n for i in S])
    eta = SlotShape(2, 1, d).ring().root(1)
    phi1 = eta ** ((-m * len(S)) % d)
    iso = Morphism.from_poly_blocks(
        T, target, 0,
        [[target.shape.ring().one()]],
        [[target.shape.ring().const(phi1)]],
    )
    return T, iso, target


# -- unit object and unit isomorphisms ---------------------------------------------


def tensor_prime(X: MBF, Y: MBF) -> MBF:
    """Same-ring tensor (no junction slot): Kronecker blocks, same signs."""
    if X.shape != Y.shape:
        raise ValueError("tensor_prime factors must share the slot shape")
    shape = X.shape

    def kron_left(op: Operator, rrank: int, s_mod, d_mod) -> Operator:
        out = Operator.zero(s_mod, d_mod)
        for n in range(op.dst.rank):
            for m_ in range(op.src.rank):
                for q in range(rrank):
                    out.entries[n * rrank + q][m_ * rrank + q].extend(op.entries[n][m_])
        return out

    def kron_right(op: Operator, lrank: int, s_mod, d_mod) -> Operator:
        out = Operator.zero(s_mod, d_mod)
        for n in range(op.dst.rank):
            for m_ in range(op.src.rank):
                for p in range(lrank):
                    out.entries[p * op.dst.rank + n][p * op.src.rank + m_].extend(
                        op.entries[n][m_]
                    )
        return out

    r = lambda i, j: X.component(i).rank * Y.component(j).rank
    m0 = FreeBimod(shape, r(0, 0) + r(1, 1))
    m1 = FreeBimod(shape, r(1, 0) + r(0, 1))
    mod = lambda i, j: FreeBimod(shape, r(i, j))
    d0 = _block_operator(
        m0, m1,
        [
            [kron_left(X.d0, Y.m0.rank, mod(0, 0), mod(1, 0)),
             kron_right(Y.d1, X.m1.rank, mod(1, 1), mod(1, 0)).scale(-1)],
            [kron_right(Y.d0, X.m0.rank, mod(0, 0), mod(0, 1)),
             kron_left(X.d1, Y.m1.rank, mod(1, 1), mod(0, 1))],
        ],
        [r(0, 0), r(1, 1)], [r(1, 0), r(0, 1)],
    )
    d1 = _block_operator(
        m1, m0,
        [
            [kron_left(X.d1, Y.m0.rank, mod(1, 0), mod(0, 0)),
             kron_right(Y.d1, X.m0.rank, mod(0, 1), mod(0, 0))],
            [kron_right(Y.d0, X.m1.rank, mod(1, 0), mod(1, 1)).scale(-1),
             kron_left(X.d0, Y.m1.rank, mod(0, 1), mod(1, 1))],
        ],
        [r(1, 0), r(0, 1)], [r(0, 0), r(1, 1)],
    )
    return MBF(m0, m1, d0, d1, X.w)


def unit_object(w: MultiPoly) -> MBF:
    """The identity defect for the potential w (any number of variables).

    One variable: rank-1 pair with the divided difference and a−b.  Several
    variables: the left-bracketed junction-free product of the per-variable
    difference-quotient factorisations.
    """
    if w.total_degree() < 2:
        raise ValueError("potential must have degree at least 2")
    N = len(w.ring.vars)
    shape = SlotShape(2, N, w.ring.conductor)
    ring = shape.ring()
    a_names, b_names = shape.left_names(), shape.right_names()
    factors = []
    for i in range(N):
        assign = {
            w.ring.vars[j]: ring.var(b_names[j] if j < i else a_names[j]) for j in range(N)
        }
        head = w.substitute(assign)
        delta_i = head.divided_difference(a_names[i], b_names[i])
        lin = ring.var(a_names[i]) - ring.var(b_names[i])
        factors.append(mbf_from_polys(shape, [[delta_i]], [[lin]], w))
    out = factors[0]
    for F in factors[1:]:
        out = tensor_prime(out, F)
    return out


def unit_for(D: MBF) -> MBF:
    return unit_object(D.w)


def unit_isos(D: MBF):
    """(λ_D: I⊗D → D, ρ_D: D⊗I → D), multiplication as untwisted collapse."""
    I = unit_for(D)
    ID = tensor_obj(I, D)
    DI = tensor_obj(D, I)
    cl = w_collapse(ID.shape, 0)
    cr = w_collapse(DI.shape, D.shape.nslots - 1)

    def proj(src_obj, src_parity, left_block_parities, word, dst_mod, unit_left):
        op = Operator.zero(src_obj.component(src_parity), dst_mod)
        i, j = left_block_parities
        off = _block_offset(*( (I, D) if unit_left else (D, I) ), src_parity, i, j)
        unit_copies = I.component(i if unit_left else j).rank
        for c in range(dst_mod.rank):
            if unit_left:
                # copies ordered (unit copy, D copy); unit generator is copy 0
                op.entries[c][off + 0 * dst_mod.rank + c].append(word)
            else:
                op.entries[c][off + c * unit_copies + 0].append(word)
        return op

    lam = Morphism(
        ID, D, 0,
        proj(ID, 0, (0, 0), cl, D.m0, True),
        proj(ID, 1, (0, 1), cl, D.m1, True),
    )
    rho = Morphism(
        DI, D, 0,
        proj(DI, 0, (0, 0), cr, D.m0, False),
        proj(DI, 1, (1, 0), cr, D.m1, False),
    )
    return lam, rho


def unit_isos_inverse(D: MBF):
    """(λ_D⁻¹, ρ_D⁻¹) via the divided-difference pattern; one variable only."""
    if D.shape.nvars != 1 or D.shape.nslots != 2:
        raise ValueError("inverse unit isomorphisms: one-variable 2-slot objects only")
    pm0 = D.d0.pure_mul_matrix()
    pm1 = D.d1.pure_mul_matrix()
    if pm0 is None or pm1 is None:
        raise ValueError("inverse unit isomorphisms need multiplier-only differentials")
    I = unit_for(D)
    ID = tensor_obj(I, D)
    DI = tensor_obj(D, I)
    ins = w_insert(D.shape, 1)
    ring3 = ID.shape.ring()
    lift = lambda p: p.rename({}, ring3)

    def dd_into_x(p):  # (p(a,b) − p(x1,b)) / (a − x1)
        return lift(p).divided_difference("a", "x1")

    def dd_from_b(p):  # (p(a,x1) − p(a,b)) / (x1 − b)
        return lift(p).rename({"b": "x1"}, ring3).divided_difference("x1", "b")

    def stack(top_mod, bot_mod, src_mod, corr, sign=1):
        # [insert; ±corr∘insert] into the two blocks of a tensor parity part
        dst = FreeBimod(ID.shape, top_mod.rank + bot_mod.rank)
        op = Operator.zero(src_mod, dst)
        for c in range(src_mod.rank):
            op.entries[c][c].append(ins)
        for i in range(bot_mod.rank):
            for j in range(src_mod.rank):
                p = corr[i][j]
                if not p.is_zero():
                    op.entries[top_mod.rank + i][j].append(
                        ins.then(w_mul(ID.shape, p)).scaled(
                            Cyclo.from_rat(ID.shape.conductor, sign))
                    )
        return op

    r0, r1 = D.m0.rank, D.m1.rank
    q0 = [[dd_into_x(pm0[i, j]) for j in range(r0)] for i in range(r1)]
    q1 = [[dd_into_x(pm1[i, j]) for j in range(r1)] for i in range(r0)]
    lam_inv = Morphism(
        D, ID, 0,
        stack(FreeBimod(ID.shape, r0), FreeBimod(ID.shape, r1), D.m0, q0),
        _swap_stack(ID, D.m1, r0, r1, q1, ins),
    )
    s0 = [[dd_from_b(pm0[i, j]) for j in range(r0)] for i in range(r1)]
    s1 = [[dd_from_b(pm1[i, j]) for j in range(r1)] for i in range(r0)]
    rho_inv = Morphism(
        D, DI, 0,
        stack(FreeBimod(DI.shape, r0), FreeBimod(DI.shape, r1), D.m0, s0),
        stack(FreeBimod(DI.shape, r1), FreeBimod(DI.shape, r0), D.m1, s1, sign=-1),
    )
    return lam_inv, rho_inv


def _swap_stack(ID, src_mod, r0, r1, corr, ins):
    # odd part of λ⁻¹: [corr∘insert; insert] into (I1 D0, I0 D1)
    dst = FreeBimod(ID.shape, r0 + r1)
    op = Operator.zero(src_mod, dst)
    for i in range(r0):
        for j in range(src_mod.rank):
            p = corr[i][j]
            if not p.is_zero():
                op.entries[i][j].append(ins.then(w_mul(ID.shape, p)))
    for c in range(src_mod.rank):
        op.entries[r0 + c][c].append(ins)
    return op


def homotopy_psi(D: MBF, side: str) -> Morphism:
    """The odd divided-transfer homotopy for λ (side='left') or ρ (side='right')."""
    if D.shape.nvars != 1 or D.shape.nslots != 2:
        raise ValueError("homotopy witnesses: one-variable 2-slot objects only")
    I = unit_for(D)
    r0, r1 = D.m0.rank, D.m1.rank
    if side == "left":
        ID = tensor_obj(I, D)
        td = w_tdiv(ID.shape, "x1", "a")
        opE = Operator.zero(ID.m0, ID.m1)
        for c in range(r0):  # I0 D0 → I1 D0
            opE.entries[c][c].append(td)
        opO = Operator.zero(ID.m1, ID.m0)
        for c in range(r1):  # I0 D1 → I1 D1
            opO.entries[r0 + c][r0 + c].append(td)
        return Morphism(ID, ID, 1, opE, opO)
    if side == "right":
        DI = tensor_obj(D, I)
        td = w_tdiv(DI.shape, "x1", "b")
        opE = Operator.zero(DI.m0, DI.m1)
        for c in range(r0):  # D0 I0 → D0 I1, sign −
            opE.entries[r1 + c][c].append(td.scaled(Cyclo.from_rat(DI.shape.conductor, -1)))
        opO = Operator.zero(DI.m1, DI.m0)
        for c in range(r1):  # D1 I0 → D1 I1
            opO.entries[r0 + c][c].append(td)
        return Morphism(DI, DI, 1, opE, opO)
    raise ValueError("side must be 'left' or 'right'")


def unit_coincidence_check(d: int):
    """Left and right unit maps agree on the unit object itself, certified by
    exact composites: λ_I∘λ_I⁻¹ = id and ρ_I∘λ_I⁻¹ = id."""
    I = unit_object(fermat_potential(d))
    lam, rho = unit_isos(I)
    lam_inv, _ = unit_isos_inverse(I)
    ident = Morphism.identity(I)
    ok1, mode1 = morphism_equal(lam.compose(lam_inv), ident)
    ok2, mode2 = morphism_equal(rho.compose(lam_inv), ident)
    return {
        "lam_after_laminv": {"ok": ok1, "mode": mode1},
        "rho_after_laminv": {"ok": ok2, "mode": mode2},
        "ok": ok1 and ok2,
    }


def mu_relation_check(w: MultiPoly):
    """Collapse-to-a-point relations of the unit: μ∘ι₀ = [∂W]∘μ and μ∘ι₁ = 0."""
    I = unit_object(w)
    if I.shape.nvars != 1:
        raise ValueError("one-variable potentials only")
    two = I.shape
    one_slot = SlotShape(1, 1, two.conductor)
    onesr = one_slot.ring()
    m = {"a": (Cyclo.one(two.conductor), "t"), "b": (Cyclo.one(two.conductor), "t")}
    mu_word = Word.of(PSubst(two, one_slot, m))
    src0 = FreeBimod(two, 1)
    tgt = FreeBimod(one_slot, 1)
    mu = Operator.single(src0, tgt, 0, 0, mu_word)
    dw = w.rename({w.ring.vars[0]: "t"}, onesr).derivative("t")
    mu_i0 = mu.compose(Operator.from_poly_matrix(src0, src0, PolyMatrix(two.ring(), [[I.d0.pure_mul_matrix()[0, 0]]])))
    want = Operator.single(src0, tgt, 0, 0, mu_word.then(w_mul(one_slot, dw)))
    ok0, mode0 = op_equal(mu_i0, want)
    mu_i1 = mu.compose(Operator.from_poly_matrix(src0, src0, PolyMatrix(two.ring(), [[I.d1.pure_mul_matrix()[0, 0]]])))
    ok1, mode1 = op_equal(mu_i1, Operator.zero(src0, tgt))
    return {"mu_iota0": {"ok": ok0, "mode": mode0}, "mu_iota1": {"ok": ok1, "mode": mode1}}


# -- coherence checks --------------------------------------------------------------


def triangle_check(X: MBF, Y: MBF, cutoff: int = DEFAULT_CUTOFF):
    """(id_X ⊗ λ_Y) ∘ α_{X,I,Y} = ρ_X ⊗ id_Y."""
    I = unit_for(X)
    lam_Y, _ = unit_isos(Y)
    _, rho_X = unit_isos(X)
    alpha = associator(X, I, Y)
    lhs = tensor_mor(Morphism.identity(X), lam_Y).compose(alpha)
    rhs = tensor_mor(rho_X, Morphism.identity(Y))
    eq, mode = morphism_equal(lhs, rhs, cutoff)
    return {"ok": eq, "mode": mode}


def pentagon_check(W: MBF, X: MBF, Y: MBF, Z: MBF, cutoff: int = DEFAULT_CUTOFF):
    lhs = associator(W, X, tensor_obj(Y, Z)).compose(associator(tensor_obj(W, X), Y, Z))
    rhs = (
        tensor_mor(Morphism.identity(W), associator(X, Y, Z))
        .compose(associator(W, tensor_obj(X, Y), Z))
        .compose(tensor_mor(associator(W, X, Y), Morphism.identity(Z)))
    )
    eq, mode = morphism_equal(lhs, rhs, cutoff)
    return {"ok": eq, "mode": mode}


def rxa_lemma_check(d: int, cutoff: int = DEFAULT_CUTOFF, phi: MultiPoly | None = None):
    """The three divided-transfer identities on a 3-slot chain."""
    shape = SlotShape(3, 1, d)
    ring = shape.ring()
    mod = FreeBimod(shape, 1)
    a, x = ring.var("a"), ring.var("x1")
    td = Operator.single(mod, mod, 0, 0, w_tdiv(shape, "x1", "a"))
    mul_ax = Operator.single(mod, mod, 0, 0, w_mul(shape, a - x))
    transfer = Operator.single(mod, mod, 0, 0, w_transfer(shape, "x1", "a"))
    ident = Operator.identity(mod)
    report = {}
    eq, mode = op_equal(td.compose(mul_ax), ident.scale(-1), cutoff)
    report["i"] = {"ok": eq, "mode": mode}
    eq, mode = op_equal(mul_ax.compose(td), transfer - ident, cutoff)
    report["ii"] = {"ok": eq, "mode": mode}
    if phi is None:
        phi = ring.p_S([1], "x1", "b") * ring.var("b") + ring.var("x1") ** 2
    else:
        phi = phi.rename({}, ring)
    mul_phi = Operator.single(mod, mod, 0, 0, w_mul(shape, phi))
    lhs = td.compose(mul_phi) - mul_phi.compose(td)
    dd_phi = phi.rename({"x1": "a", "a": "a"}, ring).divided_difference("a", "x1")
    rhs = Operator.single(mod, mod, 0, 0, w_transfer(shape, "x1", "a").then(w_mul(shape, dd_phi)))
    eq, mode = op_equal(lhs, rhs, cutoff)
    report["iii"] = {"ok": eq, "mode": mode}
    report["ok"] = all(report[k]["ok"] for k in ("i", "ii", "iii"))
    return report
