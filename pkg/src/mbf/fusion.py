"""Defect fusion for the potentials t^d.

Everything in this module lives over the family of rank-(1,1) defects
P_S = (p_{S^c}, p_S) with S a proper subset of residues mod d.  It provides

* the explicit junction morphisms between such defects (the group-like
  family ``lam``, the sign pair ``F_l``/``F_r``, and the six one-to-many
  junctions ``A[1]`` .. ``A[6]``), each built from slot words and checked
  to be delta-closed and of charge zero;
* extraction of the exact 2x2 fusing matrix from the one-to-many junction
  relations (`solve_fusing_2x2`), plus homotopy verification of the entries
  that do not hold on the nose (`verify_fusing_up_to_homotopy`);
* finite-rank contraction of a tensor product with a rank-(1,1) right
  factor (`reduce_tensor`), with inclusion/projection/homotopy data;
* decomposition of a finite-rank two-slot factorisation into P_S summands
  (`decompose_into_PS`).

Entry layout of the 8x2 junction relations
------------------------------------------
Both sides of the one-to-many relations are even morphisms from a
rank-(1,1) source K into the triple product T = P⊗(P⊗P).  Displayed as an
8x2 matrix, column 1 is the even source generator and column 2 the odd
one.  Rows 1-4 are the even copies of T and rows 5-8 the odd ones,
ordered by which tensor factors carry the odd index (even: none, XY, XZ,
YZ; odd: X, Y, Z, XYZ):

    display row : 1       2       3       4       5       6       7       8
    T copy      : X0Y0Z0  X1Y1Z0  X1Y0Z1  X0Y1Z1  X1Y0Z0  X0Y1Z0  X0Y0Z1  X1Y1Z1

Internally the nested pairwise tensor stores the even copies in the order
(X0Y0Z0, X0Y1Z1, X1Y1Z0, X1Y0Z1) and the odd ones in the order
(X1Y0Z0, X1Y1Z1, X0Y1Z0, X0Y0Z1); `_POS_TO_LEG` records the translation.
Since the sides are even, only (rows 1-4, col 1) and (rows 5-8, col 2) can
be nonzero.  The four positions (1,1), (5,2), (6,2), (7,2) determine the
fusing matrix exactly; the remaining four hold up to homotopy only (at
d = 4 every entry happens to hold on the nose).
"""

from __future__ import annotations

from ._rat import Rat
from .exactalg import Cyclo
from .polycalc import MultiPoly, NotDivisibleError, PolyMatrix
from .bifact import (
    DEFAULT_CUTOFF,
    MBF,
    Morphism,
    Operator,
    SlotShape,
    Word,
    associator,
    associator_inv,
    mbf_from_polys,
    morphism_equal,
    ps_object,
    tensor_mor,
    tensor_obj,
    validate_mbf,
    w_coeff,
    w_collapse,
    w_insert,
    w_mul,
    w_quo,
    w_rem,
)
from .graded import (
    GradedMBF,
    NotHomogeneous,
    charge_matrix_ps,
    graded_tensor,
    graded_validate,
    is_null_homotopic,
    morphism_charge,
)
from . import linalg


def _eta(d: int, k: int = 1) -> Cyclo:
    return Cyclo.root(d, k % d)


class PSObject:
    """Rank-(1,1) defect P_S for t^d: d0 = p_{S^c}, d1 = p_S, with grading."""

    __slots__ = ("d", "S", "underlying")

    def __init__(self, d: int, S):
        S = tuple(sorted({i % d for i in S}))
        if not S or len(S) == d:
            raise ValueError("S must be a proper nonempty set of residues mod d")
        self.d = d
        self.S = S
        c0, c1 = charge_matrix_ps(d, 0, len(S) - 1)
        label = "P{" + ",".join(map(str, S)) + "}"
        self.underlying = GradedMBF(ps_object(d, S), c0, c1, label)

    @property
    def mbf(self) -> MBF:
        return self.underlying.base

    def __repr__(self):
        return f"PSObject(d={self.d}, S={set(self.S)})"


def _closed_and_chargeless(phi: Morphism, gs: GradedMBF, gt: GradedMBF, name: str):
    ok, mode = phi.is_closed()
    if not ok or not mode.startswith("exact"):
        raise ValueError(f"{name}: not exactly delta-closed ({mode})")
    q = morphism_charge(phi, gs, gt)
    if q is NotHomogeneous or q != 0:
        raise ValueError(f"{name}: charge {q!r}, expected 0")


class Junctions:
    """Explicit defect-junction morphisms for W = t^d.

    ``lam(i, j)`` is the group-like junction P_i ⊗ P_j → P_{i+j}; for even
    d the pair ``F_l``/``F_r`` fuses the (d-1)-element defect with the
    half-set one; for d >= 4 the dict ``A`` holds the six one-to-many
    junctions used by the 2x2 fusing computation, keyed 1..6.  Every
    morphism is verified delta-closed (exactly) and of charge 0 on
    construction.
    """

    # (I, J, K) index sets of A[n]: a junction P_K -> P_I ⊗ P_J
    A_SETS = {
        1: ((0, 1), (0, 1), (1,)),
        2: ((0, 1), (0, 1), (0, 1, 2)),
        3: ((0, 1), (1,), (1, 2)),
        4: ((0, 1), (0, 1, 2), (1, 2)),
        5: ((1,), (0, 1), (1, 2)),
        6: ((0, 1, 2), (0, 1), (1, 2)),
    }

    def __init__(self, d: int, check: bool = True):
        if d < 3:
            raise ValueError("need d >= 3")
        self.d = d
        self.sh2 = SlotShape(2, 1, d)
        self.sh3 = SlotShape(3, 1, d)
        self.J = w_insert(self.sh2, 1)
        self.A: dict = {}
        self.A_endpoints: dict = {}
        self.F_l = None
        self.F_r = None
        self.P_A = None
        self.P_B = None
        self._check = check
        if d >= 4:
            self._build_a_collection()
        if d >= 4 and d % 2 == 0:
            self._build_f_pair()
        if check:
            self.check_all()

    # -- words ---------------------------------------------------------

    def m_word(self, j: int) -> Word:
        """Merge the middle slot rightward with twist eta^j per power."""
        return w_collapse(self.sh3, 1, _eta(self.d, j), "left")

    def m_prime_word(self, j: int) -> Word:
        """Merge the middle slot leftward with twist eta^{-j} per power."""
        return w_collapse(self.sh3, 0, _eta(self.d, -j), "right")

    def _bracket(self, poly: MultiPoly) -> Word:
        # [p]^ ∘ J: insert a middle slot, then multiply by p(a, x1, b)
        cv = poly.constant_value()
        if cv is not None:
            return self.J.scaled(cv)
        return self.J.then(w_mul(self.sh3, poly))

    # -- group-like junctions -------------------------------------------

    def lam(self, i: int, j: int, check: bool | None = None) -> Morphism:
        """P_i ⊗ P_j → P_{i+j}, acting by m_word(j) on the Y0 columns."""
        d = self.d
        gi = PSObject(d, [i]).underlying
        gj = PSObject(d, [j]).underlying
        gt = graded_tensor(gi, gj)
        gk = PSObject(d, [(i + j) % d]).underlying
        T, K = gt.base, gk.base
        m = self.m_word(j)
        mor = Morphism(
            T, K, 0,
            Operator.single(T.m0, K.m0, 0, 0, m),
            Operator.single(T.m1, K.m1, 0, 0, m),
        )
        if self._check if check is None else check:
            _closed_and_chargeless(mor, gt, gk, f"lam({i},{j})")
        return mor

    def graded_P(self, S) -> GradedMBF:
        return PSObject(self.d, S).underlying

    # -- the sign pair ---------------------------------------------------

    def _build_f_pair(self):
        d = self.d
        h = d // 2
        self.P_A = PSObject(d, [(h + 1 + t) % d for t in range(d - 1)])
        self.P_B = PSObject(d, range(h))
        TA, TB = self.P_A.mbf, self.P_B.mbf
        TL = tensor_obj(TA, TB)
        TR = tensor_obj(TB, TA)
        m, mp = self.m_word(h), self.m_prime_word(h)
        sign = Cyclo.from_rat(d, (-1) ** (h - 1))
        self.F_l = Morphism(
            TL, TB, 0,
            Operator.single(TL.m0, TB.m0, 0, 1, mp),
            Operator.single(TL.m1, TB.m1, 0, 0, mp.scaled(sign)),
        )
        self.F_r = Morphism(
            TR, TB, 0,
            Operator.single(TR.m0, TB.m0, 0, 1, m),
            Operator.single(TR.m1, TB.m1, 0, 1, m),
        )

    # -- the one-to-many collection --------------------------------------

    def _build_a_collection(self):
        d = self.d
        ring = self.sh3.ring()
        one = Cyclo.one(d)
        e = lambda k: _eta(d, k)

        def lin(ca, cx, cb):
            return (
                ring.monomial({"a": 1}, ca)
                + ring.monomial({"x1": 1}, cx)
                + ring.monomial({"b": 1}, cb)
            )

        # rows (1,1), (3,2), (4,2) of each 4x2 display, as multiplier polys
        rows = {
            1: (lin(one, -(e(1) + one), e(1)),
                ring.const(one),
                ring.const(-e(1))),
            2: (ring.const(one),
                lin(one, e(1) + one, -(e(2) + e(1) + one)),
                lin(e(2) + e(1) + one, -(e(2) + e(1)), -e(2))),
            3: (ring.const(one),
                ring.const(one),
                lin(e(1) + one, -e(1), -e(2))),
            4: (lin(e(-1) + e(-2), -(one + e(-1) + e(-2)), one),
                lin(e(-1) + e(-2), (one + e(-1)) * (e(1) + one).inverse(),
                    -(e(1) + one + e(-1))),
                ring.const(-one)),
            5: (ring.const(one),
                lin(one, e(1), -(e(2) + e(1))),
                ring.const(e(2))),
            6: (lin(one, -(e(2) + e(1) + one), e(2) + e(1)),
                ring.const(one),
                lin(-(e(3) + e(2) + e(1)), e(3), e(4) + e(3))),
        }
        full = set(range(d))
        for n, (iset, jset, kset) in self.A_SETS.items():
            r11, r32, r42 = rows[n]
            # the (2,1) row is forced by closedness and must divide exactly
            num = (r42 * ring.p_S(sorted(full - set(iset)), "a", "x1")
                   - r32 * ring.p_S(sorted(full - set(jset)), "x1", "b"))
            r21 = num.exact_divide(ring.p_S(sorted(kset), "a", "b"))
            gi = PSObject(d, iset).underlying
            gj = PSObject(d, jset).underlying
            gk = PSObject(d, kset).underlying
            gt = graded_tensor(gi, gj)
            K, T = gk.base, gt.base
            opE = Operator.zero(K.m0, T.m0)
            opO = Operator.zero(K.m1, T.m1)
            for op, row, poly in ((opE, 0, r11), (opE, 1, r21),
                                  (opO, 0, r32), (opO, 1, r42)):
                if not poly.is_zero():
                    op.entries[row][0].append(self._bracket(poly))
            self.A[n] = Morphism(K, T, 0, opE, opO)
            self.A_endpoints[n] = (gk, gt)

    def check_all(self):
        for n, mor in self.A.items():
            gk, gt = self.A_endpoints[n]
            _closed_and_chargeless(mor, gk, gt, f"A{n}")
        if self.F_l is not None:
            ga, gb = self.P_A.underlying, self.P_B.underlying
            _closed_and_chargeless(self.F_l, graded_tensor(ga, gb), gb, "F_l")
            _closed_and_chargeless(self.F_r, graded_tensor(gb, ga), gb, "F_r")


def junction_morphisms(d: int, check: bool = True) -> Junctions:
    return Junctions(d, check=check)


# -- proportionality of composite junctions ------------------------------------


def _probes(shape: SlotShape):
    yield {}
    for v in shape.internal_names():
        yield {v: 1}
        yield {v: 2}


def _poly_ratio(p: MultiPoly, q: MultiPoly):
    """Exact scalar c with p = c*q, or None."""
    eq, cq = q.leading_term()
    cp = p.terms.get(eq)
    if cp is None:
        return None
    c = cp * cq.inverse()
    return c if q * c == p else None


def proportionality_scalar(L: Morphism, R: Morphism, cutoff: int = DEFAULT_CUTOFF):
    """The exact scalar c with L = c*R, plus the equality mode.

    Raises ValueError if the sides are not proportional (checked with
    morphism_equal after the candidate is extracted from probe images).
    """
    if L.parity != R.parity:
        raise ValueError("parity mismatch")
    candidate = None
    for opL, opR in ((L.opE, R.opE), (L.opO, R.opO)):
        for j in range(opR.src.rank):
            for exps in _probes(opR.src.shape):
                imL = opL.apply_basis(j, exps)
                imR = opR.apply_basis(j, exps)
                for pL, pR in zip(imL, imR):
                    if pR.is_zero():
                        if not pL.is_zero():
                            raise ValueError("sides not proportional")
                        continue
                    c = _poly_ratio(pL, pR)
                    if c is None or (candidate is not None and c != candidate):
                        raise ValueError("sides not proportional")
                    candidate = c
    if candidate is None:
        raise ValueError("right side vanishes on all probes")
    eq, mode = morphism_equal(L, R.scale(candidate), cutoff)
    if not eq:
        raise ValueError(f"sides not proportional ({mode})")
    return candidate, mode


def verify_group_like(d: int, i: int, j: int, k: int,
                      cutoff: int = DEFAULT_CUTOFF) -> Cyclo:
    """Scalar relating the two bracketings of lam-composites; must be 1."""
    jn = Junctions(d, check=False)
    Pi, Pj, Pk = (ps_object(d, [t]) for t in (i, j, k))
    lam = lambda a, b: jn.lam(a, b, check=False)
    left = (lam(i, (j + k) % d)
            .compose(tensor_mor(Morphism.identity(Pi), lam(j, k)))
            .compose(associator(Pi, Pj, Pk)))
    right = lam((i + j) % d, k).compose(tensor_mor(lam(i, j), Morphism.identity(Pk)))
    c, _ = proportionality_scalar(left, right, cutoff)
    return c


def verify_sign(d: int, cutoff: int = DEFAULT_CUTOFF) -> Cyclo:
    """Scalar relating the two bracketings of the F pair: (-1)^{(d-2)/2}."""
    if d < 4 or d % 2:
        raise ValueError("need even d >= 4")
    jn = Junctions(d, check=False)
    A, B = jn.P_A.mbf, jn.P_B.mbf
    left = (jn.F_l
            .compose(tensor_mor(Morphism.identity(A), jn.F_r))
            .compose(associator(A, B, A)))
    right = jn.F_r.compose(tensor_mor(jn.F_l, Morphism.identity(A)))
    c, _ = proportionality_scalar(left, right, cutoff)
    return c


# -- the 2x2 fusing matrix ------------------------------------------------------


# display position -> (parity leg, internal copy row) per the layout in
# the module docstring; these four entries hold on the nose
DETERMINED = ((1, 1), (5, 2), (6, 2), (7, 2))
_POS_TO_LEG = {(1, 1): (0, 0), (5, 2): (1, 0), (6, 2): (1, 2), (7, 2): (1, 3)}
HOMOTOPY_POSITIONS = ((2, 1), (3, 1), (4, 1), (8, 2))


class FusingReport:
    """Exact 2x2 fusing matrix plus entry bookkeeping."""

    __slots__ = ("d", "F", "determined_entries", "homotopy_entries",
                 "ratio_exact", "ratio_numeric")

    def __init__(self, d, F, determined_entries, homotopy_entries,
                 ratio_exact, ratio_numeric):
        self.d = d
        self.F = F
        self.determined_entries = determined_entries
        self.homotopy_entries = homotopy_entries
        self.ratio_exact = ratio_exact
        self.ratio_numeric = ratio_numeric

    def to_json(self):
        return {
            "d": self.d,
            "F": [[str(c) for c in row] for row in self.F],
            "determined_entries": [list(p) for p in self.determined_entries],
            "homotopy_entries": [dict(e) for e in self.homotopy_entries],
            "ratio_exact": str(self.ratio_exact),
            "ratio_numeric": self.ratio_numeric,
        }

    def __repr__(self):
        return f"FusingReport(d={self.d}, ratio={self.ratio_numeric})"


def _fusing_composites(d: int, check: bool = True):
    """The four composite junctions of the 2x2 relations.

    Returns (jn, P, L1, L2, X, Y): both relations read L_i = f_i0*X + f_i2*Y
    as even morphisms P_{1,2} -> P ⊗ (P ⊗ P) with P = P_{0,1}.
    """
    jn = Junctions(d, check=check)
    P = ps_object(d, (0, 1))
    ident = Morphism.identity(P)
    assoc = associator(P, P, P)
    A = jn.A
    L1 = assoc.compose(tensor_mor(A[1], ident)).compose(A[5])
    L2 = assoc.compose(tensor_mor(A[2], ident)).compose(A[6])
    X = tensor_mor(ident, A[1]).compose(A[3])
    Y = tensor_mor(ident, A[2]).compose(A[4])
    return jn, P, L1, L2, X, Y


def _entry_polys(mor: Morphism):
    """Generator images of the two legs, as (leg, row) -> poly."""
    me = mor.opE.generator_matrix()
    mo = mor.opO.generator_matrix()
    return {0: [me[i, 0] for i in range(me.rows)],
            1: [mo[i, 0] for i in range(mo.rows)]}


def _solve_pair(d, polyL, polyX, polyY):
    """Exact (f0, f2) with polyL = f0*polyX + f2*polyY at every position."""
    z = Cyclo.zero(d)
    rows, rhs = [], []
    for pos in DETERMINED:
        leg, r = _POS_TO_LEG[pos]
        pL, pX, pY = polyL[leg][r], polyX[leg][r], polyY[leg][r]
        for e in sorted(set(pL.terms) | set(pX.terms) | set(pY.terms)):
            rows.append([pX.terms.get(e, z), pY.terms.get(e, z)])
            rhs.append(pL.terms.get(e, z))
    _, pivots = linalg.rref([list(r) for r in rows], d)
    if len(pivots) < 2:
        raise ValueError("fusing system underdetermined")
    sol = linalg.solve(rows, rhs, d)
    if sol is None:
        raise ValueError("fusing system inconsistent")
    return sol[0], sol[1]


def solve_fusing_2x2(d: int, cutoff: int = DEFAULT_CUTOFF) -> FusingReport:
    """Solve the on-the-nose entries of the 2x2 junction relations exactly."""
    if d < 4:
        raise ValueError("need d >= 4")
    _, _, L1, L2, X, Y = _fusing_composites(d)
    pX, pY = _entry_polys(X), _entry_polys(Y)
    f00, f02 = _solve_pair(d, _entry_polys(L1), pX, pY)
    f20, f22 = _solve_pair(d, _entry_polys(L2), pX, pY)
    F = [[f00, f02], [f20, f22]]
    ratio = f00 * f22 * (f02 * f20).inverse()
    z = ratio.to_complex(96)
    if abs(z.imag) > 1e-20:
        raise ValueError("fusing ratio should be real")
    return FusingReport(d, F, list(DETERMINED), [], ratio, float(z.real))


# -- finite-rank reduction of tensor products -----------------------------------


class ReducedTensor:
    """Contraction of a 3-slot tensor product to a finite-rank 2-slot object.

    incl : reduced -> original and proj : original -> reduced satisfy
    proj∘incl = id exactly; homotopy h (odd) satisfies
    delta(h) = incl∘proj - id, so the two objects are homotopy equivalent.
    """

    __slots__ = ("original", "reduced", "reduced_graded", "incl", "proj", "homotopy")

    def __init__(self, original, reduced, reduced_graded, incl, proj, homotopy):
        self.original = original
        self.reduced = reduced
        self.reduced_graded = reduced_graded
        self.incl = incl
        self.proj = proj
        self.homotopy = homotopy

    def validate(self, cutoff: int = DEFAULT_CUTOFF) -> dict:
        """Re-run every contraction invariant; all verdicts must be true."""
        out = {}
        rep = validate_mbf(self.reduced, cutoff)
        out["reduced_valid"] = bool(rep) and rep.mode == "exact"
        eq, mode = morphism_equal(self.proj.compose(self.incl),
                                  Morphism.identity(self.reduced), cutoff)
        out["proj_incl_identity"] = eq and mode.startswith("exact")
        ok_i, mode_i = self.incl.is_closed(cutoff)
        ok_p, mode_p = self.proj.is_closed(cutoff)
        out["incl_closed"] = ok_i and mode_i.startswith("exact")
        out["proj_closed"] = bool(ok_p)
        ip = self.incl.compose(self.proj) - Morphism.identity(self.original)
        dh = self.homotopy.delta()
        eq_h, _ = morphism_equal(dh, ip, cutoff)
        out["homotopy_witness"] = bool(eq_h)
        if self.reduced_graded is not None:
            out["grading_valid"] = graded_validate(self.reduced_graded)["ok"]
        out["ok"] = all(out.values())
        return out


def _as_graded(obj):
    if isinstance(obj, PSObject):
        return obj.underlying
    if isinstance(obj, GradedMBF):
        return obj
    raise TypeError("expected PSObject or GradedMBF")


def reduce_tensor(A, B, check: bool = True) -> ReducedTensor:
    """Contract A ⊗ B to finite rank; B must be rank (1,1).

    The middle slot is eliminated by division with remainder by the
    monic-in-x entry of B's d1, so the reduced generators are the A-copies
    times the x-powers below its degree.
    """
    gA, gB = _as_graded(A), _as_graded(B)
    Am, Bm = gA.base, gB.base
    if Am.shape.nslots != 2 or Bm.shape.nslots != 2:
        raise ValueError("factors must be 2-slot objects")
    if Bm.m0.rank != 1 or Bm.m1.rank != 1:
        raise ValueError("right factor must have rank (1,1)")
    d = Am.shape.conductor
    T = tensor_obj(Am, Bm)
    sh3, sh2 = T.shape, Am.shape
    r3, r2 = sh3.ring(), sh2.ring()
    to_mid = {"a": "x1", "b": "b"}
    dB1 = Bm.d1.pure_mul_matrix()
    dB0 = Bm.d0.pure_mul_matrix()
    if dB1 is None or dB0 is None:
        raise ValueError("differentials must be pure multiplications")
    q1 = dB1[0, 0].rename(to_mid, r3)
    g = q1.degree_in("x1")
    lead = q1.coefficients_in("x1").get(g)
    if g < 1 or lead is None or lead.constant_value() != Cyclo.one(d):
        raise ValueError("right d1 entry must be monic in its left variable")

    pmA0 = Am.d0.pure_mul_matrix()
    pmA1 = Am.d1.pure_mul_matrix()
    if pmA0 is None or pmA1 is None:
        raise ValueError("differentials must be pure multiplications")
    shift = {"a": "a", "b": "x1"}
    rA0, rA1 = Am.m0.rank, Am.m1.rank
    dA0 = [[pmA0[v, u].rename(shift, r3) for u in range(rA0)] for v in range(rA1)]
    dA1 = [[pmA1[v, u].rename(shift, r3) for u in range(rA1)] for v in range(rA0)]

    drop = {"a": "a", "b": "b"}
    xpow = [r3.monomial({"x1": j}) for j in range(g)]

    def red_block(dmat, rsrc, rdst):
        rows = [[r2.zero() for _ in range(rsrc * g)] for _ in range(rdst * g)]
        for u in range(rsrc):
            for v in range(rdst):
                p = dmat[v][u]
                if p.is_zero():
                    continue
                for j in range(g):
                    rem = (p * xpow[j]).divmod_in_var(q1, "x1")[1]
                    for m, cp in rem.coefficients_in("x1").items():
                        rows[v * g + m][u * g + j] = (
                            rows[v * g + m][u * g + j] + cp.rename(drop, r2))
        return rows

    reduced = mbf_from_polys(sh2, red_block(dA0, rA0, rA1),
                             red_block(dA1, rA1, rA0), Am.w)

    ins = w_insert(sh2, 1)

    def carry(word_poly):
        if word_poly.constant_value() is not None:
            return ins.scaled(word_poly.constant_value())
        return ins.then(w_mul(sh3, word_poly))

    # incl: reduced generator (u, j) |-> copy_u * x^j plus the quotient
    # correction on the complementary block; exact chain map
    incl_E = Operator.zero(reduced.m0, T.m0)
    incl_O = Operator.zero(reduced.m1, T.m1)
    for u in range(rA0):
        for j in range(g):
            col = u * g + j
            incl_E.entries[u][col].append(carry(xpow[j]))
            for v in range(rA1):
                quo = (dA0[v][u] * xpow[j]).divmod_in_var(q1, "x1")[0]
                if not quo.is_zero():
                    incl_E.entries[rA0 + v][col].append(carry(quo))
    for u in range(rA1):
        for j in range(g):
            col = u * g + j
            incl_O.entries[u][col].append(carry(xpow[j]))
            for v in range(rA0):
                quo = (dA1[v][u] * xpow[j]).divmod_in_var(q1, "x1")[0]
                if not quo.is_zero():
                    incl_O.entries[rA1 + v][col].append(carry(-quo))
    incl = Morphism(reduced, T, 0, incl_E, incl_O)

    # proj: remainder coefficients on the ⊗B0 blocks, zero on the rest
    proj_E = Operator.zero(T.m0, reduced.m0)
    proj_O = Operator.zero(T.m1, reduced.m1)
    for op, rk in ((proj_E, rA0), (proj_O, rA1)):
        for u in range(rk):
            for m in range(g):
                op.entries[u * g + m][u].append(
                    w_rem(sh3, q1, "x1").then(w_coeff(sh3, "x1", m)))
    proj = Morphism(T, reduced, 0, proj_E, proj_O)

    # odd homotopy: division quotients between the complementary blocks
    minus = -Cyclo.one(d)
    h0 = Operator.zero(T.m0, T.m1)
    h1 = Operator.zero(T.m1, T.m0)
    for u in range(rA0):
        h0.entries[rA1 + u][u].append(w_quo(sh3, q1, "x1").scaled(minus))
    for u in range(rA1):
        h1.entries[rA0 + u][u].append(w_quo(sh3, q1, "x1"))
    homotopy = Morphism(T, T, 1, h0, h1)

    cB = gB.charges(0)[0]
    ch0 = tuple(gA.charges(0)[u] + cB + j for u in range(rA0) for j in range(g))
    ch1 = tuple(gA.charges(1)[u] + cB + j for u in range(rA1) for j in range(g))
    label = f"red({gA.label}⊗{gB.label})" if gA.label and gB.label else ""
    reduced_graded = GradedMBF(reduced, ch0, ch1, label)

    out = ReducedTensor(T, reduced, reduced_graded, incl, proj, homotopy)
    if check:
        rep = validate_mbf(reduced)
        if not rep or rep.mode != "exact":
            raise ValueError(f"reduced object invalid: {rep.violations}")
        eq, mode = morphism_equal(proj.compose(incl), Morphism.identity(reduced))
        if not eq or not mode.startswith("exact"):
            raise ValueError("proj∘incl is not the identity")
        if not graded_validate(reduced_graded)["ok"]:
            raise ValueError("reduced grading invalid")
    return out


# -- decomposition into P_S summands --------------------------------------------


def _nested(pm: PolyMatrix):
    return [[pm[i, j] for j in range(pm.cols)] for i in range(pm.rows)]


def _is_unit(p: MultiPoly):
    c = p.constant_value()
    return c is not None and not c.is_zero()


def _divides_line(p: MultiPoly, mat, i: int, j: int) -> bool:
    for q in mat[i]:
        if q.is_zero() or q is p:
            continue
        try:
            q.exact_divide(p)
        except NotDivisibleError:
            return False
    for row in mat:
        q = row[j]
        if q.is_zero() or q is p:
            continue
        try:
            q.exact_divide(p)
        except NotDivisibleError:
            return False
    return True


def _find_pivot(mat, constants_only: bool):
    best = None
    for i, row in enumerate(mat):
        for j, p in enumerate(row):
            if p.is_zero():
                continue
            if _is_unit(p):
                return i, j
            if constants_only:
                continue
            deg = sum(p.leading_term()[0])
            if (best is None or deg < best[0]) and _divides_line(p, mat, i, j):
                best = (deg, i, j)
    return None if best is None else (best[1], best[2])


def _clear_pivot(M, P, i: int, j: int):
    """Zero row i and column j of M around pivot (i,j), updating partner P.

    Column op C_{j'} -= beta*C_j on M pairs with row op R_j += beta*R_{j'}
    on P; row op R_{i'} -= gamma*R_i pairs with column op C_i += gamma*C_{i'}.
    All quotients against the pivot are exact by pivot selection.
    """
    c = M[i][j]
    for jp in range(len(M[0])):
        if jp == j or M[i][jp].is_zero():
            continue
        beta = M[i][jp].exact_divide(c)
        for r in range(len(M)):
            M[r][jp] = M[r][jp] - beta * M[r][j]
        for k in range(len(P[0])):
            P[j][k] = P[j][k] + beta * P[jp][k]
    for ip in range(len(M)):
        if ip == i or M[ip][j].is_zero():
            continue
        gamma = M[ip][j].exact_divide(c)
        for cc in range(len(M[0])):
            M[ip][cc] = M[ip][cc] - gamma * M[i][cc]
        for k in range(len(P)):
            P[k][i] = P[k][i] + gamma * P[k][ip]


def _drop(mat, row: int, col: int):
    return [[p for j, p in enumerate(r) if j != col]
            for i, r in enumerate(mat) if i != row]


def _assert_split(P, j: int, i: int, what: str):
    for k, p in enumerate(P[j]):
        if k != i and not p.is_zero():
            raise ValueError(f"{what}: partner row not split after clearing")
    for row in (P[k] for k in range(len(P)) if k != j):
        if not row[i].is_zero():
            raise ValueError(f"{what}: partner column not split after clearing")


def decompose_into_PS(D, *, d: int | None = None):
    """Multiset of index sets S with D ≃ ⊕ P_S (plus contractible pieces).

    Accepts an MBF, a GradedMBF, or a ReducedTensor.  Invertible constant
    entries are stripped by exact elimination; surviving pivots must clear
    their row and column by exact division and then factor into distinct
    (a - eta^i b) terms, else a ValueError reports the offending block.
    """
    if isinstance(D, ReducedTensor):
        D = D.reduced
    if isinstance(D, GradedMBF):
        D = D.base
    if not isinstance(D, MBF):
        raise TypeError("expected an MBF, GradedMBF, or ReducedTensor")
    if D.shape.nslots != 2:
        raise ValueError("decomposition expects a 2-slot object")
    d = D.shape.conductor if d is None else d
    pm1, pm0 = D.d1.pure_mul_matrix(), D.d0.pure_mul_matrix()
    if pm1 is None or pm0 is None:
        raise ValueError("differentials must be pure multiplications")
    B, A = _nested(pm1), _nested(pm0)
    pivots = []
    while B and B[0]:
        hit = None
        for constants_only in (True, False):
            for M, P, tag in ((B, A, "d1"), (A, B, "d0")):
                found = _find_pivot(M, constants_only)
                if found is not None:
                    hit = (M, P, tag, found)
                    break
            if hit:
                break
        if hit is None:
            shown = [[str(p) for p in row] for row in B]
            raise ValueError(f"residual block not factorable: {shown}")
        M, P, tag, (i, j) = hit
        _clear_pivot(M, P, i, j)
        _assert_split(P, j, i, tag)
        pivot, partner = M[i][j], P[j][i]
        if not _is_unit(pivot):
            pivots.append(pivot if tag == "d1" else partner)
        if tag == "d1":
            B, A = _drop(B, i, j), _drop(A, j, i)
        else:
            A, B = _drop(A, i, j), _drop(B, j, i)
    ring = D.shape.ring()
    out = []
    for p in pivots:
        S = []
        rem = p
        for i in range(d):
            f = ring.var("a") - ring.var("b") * Cyclo.root(d, i)
            try:
                rem = rem.exact_divide(f)
                S.append(i)
            except NotDivisibleError:
                pass
        if rem.constant_value() is None:
            raise ValueError(f"block does not factor into defect lines: {p}")
        if not S or len(S) == d:
            raise ValueError(f"block is not a proper defect: {p}")
        out.append(tuple(S))
    return sorted(out, key=lambda s: (len(s), s))


def fuse(d: int, left, right, check: bool = True):
    """Reduce P_left ⊗ P_right and decompose: (ReducedTensor, multiset)."""
    rt = reduce_tensor(PSObject(d, left), PSObject(d, right), check=check)
    return rt, decompose_into_PS(rt)


# -- homotopy verification of the remaining fusing entries ----------------------


def _pure_mul_morphism(phi: Morphism, dst: MBF) -> Morphism:
    """Rewrite a 2-slot-source morphism as multiplier blocks (faithful)."""
    me = phi.opE.generator_matrix()
    mo = phi.opO.generator_matrix()
    return Morphism.from_poly_blocks(
        phi.src, dst, phi.parity,
        [[me[i, j] for j in range(me.cols)] for i in range(me.rows)],
        [[mo[i, j] for j in range(mo.cols)] for i in range(mo.rows)],
    )


def verify_fusing_up_to_homotopy(d: int, cutoff: int = DEFAULT_CUTOFF,
                                 perturb=None) -> FusingReport:
    """Check that the solved 2x2 matrix closes both relations up to homotopy.

    The defect (relation minus its exact right side) is transported through
    the contraction maps to a finite-rank endpoint, where the charge-sector
    witness search is complete, so a "no" verdict is a certificate.  With
    `perturb=(r, c)` the matrix entry at that position is shifted by 1
    first; any perturbation must produce at least one "no".
    """
    report = solve_fusing_2x2(d, cutoff)
    F = [row[:] for row in report.F]
    if perturb is not None:
        r, c = perturb
        F[r][c] = F[r][c] + Cyclo.one(d)
    _, P, L1, L2, X, Y = _fusing_composites(d, check=False)

    c0, c1 = charge_matrix_ps(d, 0, 1)
    gP = GradedMBF(P, c0, c1, "P{0,1}")
    r1 = reduce_tensor(gP, gP)
    r2 = reduce_tensor(r1.reduced_graded, gP)
    assoc_inv = associator_inv(P, P, P)
    transport = (r2.proj
                 .compose(tensor_mor(r1.proj, Morphism.identity(P)))
                 .compose(assoc_inv))
    gk = PSObject(d, (1, 2)).underlying

    entries = []
    for eqno, L, f0, f2 in ((1, L1, F[0][0], F[0][1]), (2, L2, F[1][0], F[1][1])):
        delta = L - X.scale(f0) - Y.scale(f2)
        theta = _pure_mul_morphism(transport.compose(delta), r2.reduced)
        ok, mode = theta.is_closed(cutoff)
        if not ok:
            raise ValueError(f"transported defect not closed ({mode})")
        witness = is_null_homotopic(theta, gk, r2.reduced_graded)
        status = "witness" if witness is not None else "no"
        for pos in HOMOTOPY_POSITIONS:
            entries.append({"pos": list(pos), "equation": eqno, "status": status})
    return FusingReport(d, F, report.determined_entries, entries,
                        report.ratio_exact, report.ratio_numeric)
