"""Sparse multivariate polynomials over Q(zeta_n), with the exact-division
and divided-difference machinery the bimodule calculus needs.

A Ring fixes an ordered variable tuple and a cyclotomic conductor; a MultiPoly
is a canonical sparse map {exponent tuple -> Cyclo} with no zero coefficients.
Term order everywhere is graded lexicographic in the ring's variable order.

Textual form: terms joined by ' + ' / ' - ', factors joined by '*', powers with
'^', e.g. '3/2*a^2*x1*b'.  The primitive root of the ring's conductor prints
as 'z' (so 'a - z*b' at conductor 3 means a - zeta_3 b).
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping

from ._rat import RAT_ONE, Rat, rat_str
from .exactalg import Cyclo

_ZERO_EXP_CACHE: dict[int, tuple] = {}


class NotDivisibleError(ValueError):
    """Exact division failed; carries the offending remainder (and partial quotient)."""

    def __init__(self, remainder, quotient=None):
        super().__init__(f"division left a non-zero remainder: {remainder}")
        self.remainder = remainder
        self.quotient = quotient


class RingMismatch(ValueError):
    pass


class Ring:
    """Polynomial ring Q(zeta_conductor)[vars], variables ordered as given."""

    __slots__ = ("vars", "conductor", "_index")

    def __init__(self, variables: Iterable[str], conductor: int = 1):
        vs = tuple(variables)
        if len(set(vs)) != len(vs):
            raise ValueError(f"duplicate variable names: {vs}")
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "conductor", conductor)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(vs)})

    def __setattr__(self, *a):
        raise AttributeError("Ring is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, Ring)
            and self.vars == other.vars
            and self.conductor == other.conductor
        )

    def __hash__(self):
        return hash((self.vars, self.conductor))

    def __repr__(self):
        return f"Ring({list(self.vars)}, zeta_{self.conductor})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"variable {name!r} not in ring {self.vars}") from None

    def _zero_exp(self) -> tuple:
        n = len(self.vars)
        e = _ZERO_EXP_CACHE.get(n)
        if e is None:
            e = _ZERO_EXP_CACHE.setdefault(n, (0,) * n)
        return e

    # -- element constructors ----------------------------------------------

    def coerce_scalar(self, c) -> Cyclo:
        if isinstance(c, Cyclo):
            if c.n != self.conductor:
                raise RingMismatch(
                    f"scalar conductor {c.n} vs ring conductor {self.conductor}"
                )
            return c
        return Cyclo.from_rat(self.conductor, c)

    def zero(self) -> "MultiPoly":
        return MultiPoly(self, {})

    def one(self) -> "MultiPoly":
        return self.const(1)

    def const(self, c) -> "MultiPoly":
        cc = self.coerce_scalar(c)
        return MultiPoly(self, {} if cc.is_zero() else {self._zero_exp(): cc})

    def var(self, name: str) -> "MultiPoly":
        e = [0] * len(self.vars)
        e[self.index(name)] = 1
        return MultiPoly(self, {tuple(e): Cyclo.one(self.conductor)})

    def monomial(self, exps: Mapping[str, int], coeff=1) -> "MultiPoly":
        e = [0] * len(self.vars)
        for name, k in exps.items():
            e[self.index(name)] = k
        c = self.coerce_scalar(coeff)
        return MultiPoly(self, {} if c.is_zero() else {tuple(e): c})

    def root(self, k: int = 1) -> Cyclo:
        return Cyclo.root(self.conductor, k)

    def parse(self, text: str) -> "MultiPoly":
        return _parse_poly(self, text)

    def p_S(self, residues: Iterable[int], v1: str = "a", v2: str = "b") -> "MultiPoly":
        """prod_{i in S} (v1 - zeta^i v2), the basic factor polynomials of x^d - y^d."""
        out = self.one()
        x, y = self.var(v1), self.var(v2)
        for i in residues:
            out = out * (x - y * self.root(i))
        return out


def _grlex_key(e: tuple) -> tuple:
    return (sum(e), e)


class MultiPoly:
    """Immutable sparse polynomial; {exponent tuple: non-zero Cyclo}."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(
            self, "terms", {e: c for e, c in terms.items() if not c.is_zero()}
        )

    def __setattr__(self, *a):
        raise AttributeError("MultiPoly is immutable")

    # -- basics --------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other: "MultiPoly"):
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Cyclo)) or type(other) is type(RAT_ONE):
            return self.ring.const(other)
        return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in o.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s.is_zero():
                    del out[e]
                else:
                    out[e] = s
        return MultiPoly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Cyclo)) or type(other) is type(RAT_ONE):
            c = self.ring.coerce_scalar(other)
            if c.is_zero():
                return self.ring.zero()
            return MultiPoly(self.ring, {e: k * c for e, k in self.terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.terms, o.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e)
                out[e] = ca * cb if s is None else s + ca * cb
        return MultiPoly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- structure -----------------------------------------------------------

    def total_degree(self) -> int:
        """Total degree (-1 for the zero polynomial)."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        i = self.ring.index(var)
        return max((e[i] for e in self.terms), default=-1)

    def homogeneous_degree(self):
        """The common total degree of all terms, or None if inhomogeneous/zero."""
        degs = {sum(e) for e in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def constant_value(self):
        """The value as a Cyclo if the poly is constant, else None."""
        if not self.terms:
            return Cyclo.zero(self.ring.conductor)
        if len(self.terms) == 1:
            ((e, c),) = self.terms.items()
            if not any(e):
                return c
        return None

    def leading_term(self):
        """(exponent, coeff) maximal in graded-lex order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def coefficients_in(self, var: str) -> dict:
        """View as a polynomial in `var`: {power: MultiPoly without var}."""
        i = self.ring.index(var)
        buckets: dict[int, dict] = {}
        for e, c in self.terms.items():
            k = e[i]
            rest = e[:i] + (0,) + e[i + 1 :]
            buckets.setdefault(k, {})[rest] = c
        return {k: MultiPoly(self.ring, d) for k, d in buckets.items()}

    # -- substitution ---------------------------------------------------------

    def subst_scale(self, mapping: Mapping[str, tuple], target: Ring) -> "MultiPoly":
        """Ring map sending each variable to scalar*target_variable.

        mapping: {src_var: (scalar, dst_var)}; unmapped source variables must
        not occur.  Scalars are Cyclo of the target conductor (or coercible).
        """
        cols = []
        for i, v in enumerate(self.ring.vars):
            if v in mapping:
                sc, dst = mapping[v]
                cols.append((i, target.coerce_scalar(sc), target.index(dst)))
            else:
                cols.append((i, None, None))
        out: dict = {}
        width = len(target.vars)
        for e, c in self.terms.items():
            ne = [0] * width
            coeff = c if c.n == target.conductor else c.lift(target.conductor)
            ok = True
            for i, sc, j in cols:
                k = e[i]
                if k == 0:
                    continue
                if sc is None:
                    raise KeyError(
                        f"variable {self.ring.vars[i]!r} occurs but is not mapped"
                    )
                ne[j] += k
                if not (sc - 1).is_zero():
                    coeff = coeff * sc**k
                if coeff.is_zero():
                    ok = False
                    break
            if not ok:
                continue
            key = tuple(ne)
            prev = out.get(key)
            out[key] = coeff if prev is None else prev + coeff
        return MultiPoly(target, out)

    def substitute(self, assignment: Mapping[str, "MultiPoly"]) -> "MultiPoly":
        """General substitution var -> polynomial (all in one target ring)."""
        target = None
        for p in assignment.values():
            target = p.ring
            break
        if target is None:
            raise ValueError("empty assignment")
        out = target.zero()
        for e, c in self.terms.items():
            term = target.const(c if c.n == target.conductor else c.lift(target.conductor))
            for i, k in enumerate(e):
                if k:
                    v = self.ring.vars[i]
                    if v not in assignment:
                        raise KeyError(f"variable {v!r} occurs but is not assigned")
                    term = term * assignment[v] ** k
            out = out + term
        return out

    def rename(self, name_map: Mapping[str, str], target: Ring) -> "MultiPoly":
        """Variable renaming into `target`; names absent there stay unmapped
        (so dropping a variable is fine as long as it does not occur)."""
        mapping = {}
        for v in self.ring.vars:
            w = name_map.get(v, v)
            if w in target._index:
                mapping[v] = (1, w)
        return self.subst_scale(mapping, target)

    def derivative(self, var: str) -> "MultiPoly":
        i = self.ring.index(var)
        out: dict = {}
        for e, c in self.terms.items():
            k = e[i]
            if k == 0:
                continue
            ne = e[:i] + (k - 1,) + e[i + 1 :]
            prev = out.get(ne)
            val = c * k
            out[ne] = val if prev is None else prev + val
        return MultiPoly(self.ring, out)

    # -- division -------------------------------------------------------------

    def divided_difference(self, v1: str, v2: str) -> "MultiPoly":
        """Exact quotient (p - p[v1 -> v2]) / (v1 - v2), by telescoping."""
        i1, i2 = self.ring.index(v1), self.ring.index(v2)
        out: dict = {}
        for e, c in self.terms.items():
            k = e[i1]
            if k == 0:
                continue
            for t in range(k):
                # v1^t * v2^(k-1-t) * rest
                ne = list(e)
                ne[i1] = t
                ne[i2] = e[i2] + (k - 1 - t)
                key = tuple(ne)
                prev = out.get(key)
                out[key] = c if prev is None else prev + c
        return MultiPoly(self.ring, out)

    def exact_divide(self, divisor: "MultiPoly") -> "MultiPoly":
        """Exact single-divisor division in graded-lex order.

        Raises NotDivisibleError carrying the remainder if division fails.
        """
        self._check(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        ed, cd = divisor.leading_term()
        quotient: dict = {}
        remainder: dict = {}
        work = dict(self.terms)
        while work:
            e = max(work, key=_grlex_key)
            c = work.pop(e)
            if all(x >= y for x, y in zip(e, ed)):
                q = tuple(x - y for x, y in zip(e, ed))
                f = c / cd
                quotient[q] = quotient.get(q, Cyclo.zero(c.n)) + f
                for e2, c2 in divisor.terms.items():
                    if e2 == ed:
                        continue
                    key = tuple(x + y for x, y in zip(q, e2))
                    prev = work.get(key)
                    val = (prev if prev is not None else Cyclo.zero(c.n)) - f * c2
                    if val.is_zero():
                        work.pop(key, None)
                    else:
                        work[key] = val
            else:
                remainder[e] = c
        rem = MultiPoly(self.ring, remainder)
        quo = MultiPoly(self.ring, quotient)
        if not rem.is_zero():
            raise NotDivisibleError(rem, quo)
        return quo

    def divmod_in_var(self, divisor: "MultiPoly", var: str):
        """Division with remainder by a divisor monic in `var`.

        Returns (q, r) with self = q*divisor + r and deg_var(r) < deg_var(divisor).
        """
        self._check(divisor)
        i = self.ring.index(var)
        n = divisor.degree_in(var)
        if n < 0:
            raise ZeroDivisionError("division by zero polynomial")
        lead_terms = {
            e[:i] + (0,) + e[i + 1 :]: c for e, c in divisor.terms.items() if e[i] == n
        }
        lead = MultiPoly(self.ring, lead_terms)
        lc = lead.constant_value()
        if lc is None or lc.is_zero():
            raise ValueError(f"divisor is not monic-with-unit-lead in {var!r}")
        inv_lc = lc.inverse()
        q = self.ring.zero()
        r = self
        while True:
            k = r.degree_in(var)
            if k < n:
                return q, r
            top = {
                e[:i] + (0,) + e[i + 1 :]: c for e, c in r.terms.items() if e[i] == k
            }
            factor = MultiPoly(self.ring, top) * inv_lc
            shift = self.ring.monomial({var: k - n})
            q = q + factor * shift
            r = r - factor * shift * divisor

    # -- printing ---------------------------------------------------------------

    def __repr__(self):
        return poly_to_str(self)

    __str__ = __repr__

    def to_json(self) -> str:
        return poly_to_str(self)


# -- textual form ----------------------------------------------------------------


def _coeff_to_str(c: Cyclo) -> tuple[str, bool]:
    """Render a coefficient; second value tells whether it needs parentheses."""
    r = c.is_rational()
    if r is not None:
        return rat_str(r), False
    parts = []
    for i, cf in enumerate(c.coeffs):
        if cf == 0:
            continue
        if i == 0:
            parts.append(rat_str(cf))
        else:
            z = "z" if i == 1 else f"z^{i}"
            if cf == 1:
                parts.append(z)
            elif cf == -1:
                parts.append(f"-{z}")
            else:
                parts.append(f"{rat_str(cf)}*{z}")
    s = parts[0]
    for p in parts[1:]:
        s += " - " + p[1:] if p.startswith("-") else " + " + p
    return s, len(parts) > 1


def poly_to_str(p: MultiPoly) -> str:
    if p.is_zero():
        return "0"
    chunks = []
    for e, c in p.sorted_terms():
        factors = []
        for v, k in zip(p.ring.vars, e):
            if k == 1:
                factors.append(v)
            elif k > 1:
                factors.append(f"{v}^{k}")
        cs, need_paren = _coeff_to_str(c)
        if not factors:
            body = f"({cs})" if need_paren else cs
        elif cs == "1":
            body = "*".join(factors)
        elif cs == "-1":
            body = "-" + "*".join(factors)
        else:
            head = f"({cs})" if need_paren else cs
            body = head + "*" + "*".join(factors)
        chunks.append(body)
    out = chunks[0]
    for ch in chunks[1:]:
        out += " - " + ch[1:] if ch.startswith("-") else " + " + ch
    return out


_TOKEN = re.compile(r"\s*(\d+/\d+|\d+|[A-Za-z_][A-Za-z_0-9]*|\^|\*|\+|\-|\(|\))")


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot tokenize {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, ring: Ring, tokens: list):
        self.ring = ring
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def parse_expr(self) -> MultiPoly:
        sign = 1
        while self.peek() in ("+", "-"):
            if self.next() == "-":
                sign = -sign
        acc = self.parse_term() * sign
        while self.peek() in ("+", "-"):
            sign = 1
            while self.peek() in ("+", "-"):
                if self.next() == "-":
                    sign = -sign
            acc = acc + self.parse_term() * sign
        return acc

    def parse_term(self) -> MultiPoly:
        acc = self.parse_factor()
        while self.peek() == "*":
            self.next()
            acc = acc * self.parse_factor()
        return acc

    def parse_factor(self) -> MultiPoly:
        t = self.next()
        if t is None:
            raise ValueError("unexpected end of input")
        if t == "(":
            inner = self.parse_expr()
            if self.next() != ")":
                raise ValueError("missing ')'")
            base = inner
        elif re.fullmatch(r"\d+/\d+|\d+", t):
            num = t.split("/")
            base = self.ring.const(
                Rat(int(num[0]), int(num[1])) if len(num) == 2 else Rat(int(num[0]))
            )
        elif t == "z":
            base = self.ring.const(self.ring.root())
        else:
            base = self.ring.var(t)
        if self.peek() == "^":
            self.next()
            k = self.next()
            if k is None or not k.isdigit():
                raise ValueError("expected integer exponent after '^'")
            base = base**int(k)
        return base


def _parse_poly(ring: Ring, text: str) -> MultiPoly:
    p = _Parser(ring, _tokenize(text))
    out = p.parse_expr()
    if p.peek() is not None:
        raise ValueError(f"trailing tokens at {p.toks[p.i:]}")
    return out


# -- matrices ---------------------------------------------------------------------


class PolyMatrix:
    """Dense matrix of MultiPoly entries over one ring."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring: Ring, entries):
        rows = [list(r) for r in entries]
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", len(rows[0]) if rows else 0)
        for r in rows:
            if len(r) != self.cols:
                raise ValueError("ragged matrix")
            for p in r:
                if p.ring != ring:
                    raise RingMismatch("entry ring differs from matrix ring")
        object.__setattr__(self, "entries", rows)

    def __setattr__(self, *a):
        raise AttributeError("PolyMatrix is immutable")

    @staticmethod
    def zero(ring: Ring, rows: int, cols: int) -> "PolyMatrix":
        z = ring.zero()
        return PolyMatrix(ring, [[z] * cols for _ in range(rows)])

    @staticmethod
    def identity(ring: Ring, n: int) -> "PolyMatrix":
        z, o = ring.zero(), ring.one()
        return PolyMatrix(ring, [[o if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def scalar(ring: Ring, n: int, p: MultiPoly) -> "PolyMatrix":
        z = ring.zero()
        return PolyMatrix(ring, [[p if i == j else z for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]

    def __eq__(self, other):
        return (
            isinstance(other, PolyMatrix)
            and self.ring == other.ring
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.ring, tuple(tuple(r) for r in self.entries)))

    def __add__(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")
        return PolyMatrix(
            self.ring,
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ],
        )

    def __neg__(self):
        return PolyMatrix(self.ring, [[-a for a in r] for r in self.entries])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PolyMatrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch in product")
            z = self.ring.zero()
            out = []
            for i in range(self.rows):
                row = []
                for j in range(other.cols):
                    acc = z
                    for k in range(self.cols):
                        a = self.entries[i][k]
                        b = other.entries[k][j]
                        if a.is_zero() or b.is_zero():
                            continue
                        acc = acc + a * b
                    row.append(acc)
                out.append(row)
            return PolyMatrix(self.ring, out)
        return PolyMatrix(self.ring, [[a * other for a in r] for r in self.entries])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(p.is_zero() for r in self.entries for p in r)

    def map(self, fn) -> "PolyMatrix":
        out = [[fn(p) for p in r] for r in self.entries]
        ring = out[0][0].ring if out and out[0] else self.ring
        return PolyMatrix(ring, out)

    def to_json(self):
        return [[poly_to_str(p) for p in r] for r in self.entries]

    def __repr__(self):
        return "[" + "; ".join(", ".join(str(p) for p in r) for r in self.entries) + "]"


def divided_difference(p: MultiPoly, v1: str, v2: str) -> MultiPoly:
    return p.divided_difference(v1, v2)


def exact_divide(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    return p.exact_divide(q)


def substitute(p: MultiPoly, assignment: Mapping[str, MultiPoly]) -> MultiPoly:
    return p.substitute(assignment)
