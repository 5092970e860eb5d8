"""R-charge structure for the x^d defect family.

Charges are exact rationals in units of q_x = 2/d (the charge of the chain
variable).  In these units the differentials carry charge d/2 and an even
morphism block entry a^m b^n from generator j to generator i carries
q_x * (m + n + c_target(i) - c_source(j)).

Hom spaces are computed sector by sector: homogeneity forces the total
degree of every block entry, so each charge sector is a finite linear
problem over the cyclotomic field, solved exactly (closedness nullspace
modulo the image of the odd ansatz).
"""

from __future__ import annotations

from ._rat import Rat, rat_str
from .exactalg import Cyclo
from .linalg import rref
from .bifact import MBF, Morphism, ps_object, unit_object, fermat_potential
from .polycalc import MultiPoly, PolyMatrix


class _NotHomogeneous:
    """Sentinel: the morphism mixes charge sectors."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotHomogeneous"

    def __bool__(self):
        return False


NotHomogeneous = _NotHomogeneous()


class GradedMBF:
    """A bi-factorisation with charge vectors for both parities."""

    __slots__ = ("base", "charges0", "charges1", "label")

    def __init__(self, base: MBF, charges0, charges1, label: str = ""):
        if len(charges0) != base.m0.rank or len(charges1) != base.m1.rank:
            raise ValueError("charge vector length does not match rank")
        self.base = base
        self.charges0 = tuple(Rat(c) for c in charges0)
        self.charges1 = tuple(Rat(c) for c in charges1)
        self.label = label

    @property
    def d(self) -> int:
        return self.base.shape.conductor

    def charges(self, parity: int):
        return self.charges0 if parity % 2 == 0 else self.charges1

    def __repr__(self):
        return f"GradedMBF({self.label or 'object'}, c0={self.charges0}, c1={self.charges1})"


def charge_matrix_ps(d: int, i: int, j: int):
    """Charge vectors of P_{{i,...,i+j}}: independent of the offset i."""
    if j < 0 or j > d - 2:
        raise ValueError("need 0 <= j <= d-2 for a proper consecutive set")
    return (Rat(-j, 2),), (Rat(j - d + 2, 2),)


def graded_ps(d: int, i: int, j: int) -> GradedMBF:
    S = [(i + t) % d for t in range(j + 1)]
    c0, c1 = charge_matrix_ps(d, i, j)
    label = "P{" + ",".join(str(s) for s in sorted(S)) + "}"
    return GradedMBF(ps_object(d, S), c0, c1, label)


def graded_unit(d: int) -> GradedMBF:
    g = graded_ps(d, 0, 0)
    return GradedMBF(g.base, g.charges0, g.charges1, "I")


def graded_tensor(gx: GradedMBF, gy: GradedMBF) -> GradedMBF:
    """Tensor object with generator charges added blockwise."""
    from .bifact import tensor_obj, _tensor_blocks

    T = tensor_obj(gx.base, gy.base)
    charges = {0: [], 1: []}
    for parity in (0, 1):
        for (i, j) in _tensor_blocks(parity):
            for cx in gx.charges(i):
                for cy in gy.charges(j):
                    charges[parity].append(cx + cy)
    label = f"({gx.label})({gy.label})" if gx.label and gy.label else ""
    return GradedMBF(T, charges[0], charges[1], label)


def _entry_charges(poly: MultiPoly, qshift: Rat):
    """Set of q_x-unit charges of the monomials of one block entry."""
    return {sum(e) + qshift for e in poly.terms}


def graded_validate(g: GradedMBF):
    """Every differential entry must carry charge d/2 in q_x units."""
    half = Rat(g.d, 2)
    violations = []
    for name, op, csrc, cdst in (
        ("d0", g.base.d0, g.charges0, g.charges1),
        ("d1", g.base.d1, g.charges1, g.charges0),
    ):
        pm = op.pure_mul_matrix()
        if pm is None:
            violations.append({"which": name, "reason": "non-multiplier entries"})
            continue
        for i in range(pm.rows):
            for j in range(pm.cols):
                p = pm[i, j]
                if p.is_zero():
                    continue
                bad = {c for c in _entry_charges(p, cdst[i] - csrc[j]) if c != half}
                if bad:
                    violations.append(
                        {"which": name, "block": [i, j], "charges": sorted(map(str, bad))}
                    )
    return {"ok": not violations, "violations": violations}


# -- charges of operators and morphisms --------------------------------------


def _word_charge_units(word):
    """Charge shift of one generator word in q_x units; None if inhomogeneous."""
    from .bifact import PMul, PSubst, PTDiv, PQuo, PRem, PCoeff

    total = Rat(0)
    for prim in word.prims:
        if isinstance(prim, PMul):
            h = prim.poly.homogeneous_degree()
            if h is None:
                return None
            total += h
        elif isinstance(prim, PSubst):
            pass
        elif isinstance(prim, PTDiv):
            total -= 1
        elif isinstance(prim, PRem):
            g = prim.modulus.homogeneous_degree()
            if g is None:
                return None
        elif isinstance(prim, PQuo):
            g = prim.modulus.homogeneous_degree()
            if g is None:
                return None
            total -= g
        elif isinstance(prim, PCoeff):
            total -= prim.k
        else:
            return None
    return total


def operator_charge_units(op, src_units, dst_units):
    """Common q_x-unit charge of all words of an operator, or the sentinel.

    Returns None for a structurally zero operator (any charge fits).
    """
    n = op.normalized()
    found = None
    for i in range(n.dst.rank):
        for j in range(n.src.rank):
            for w in n.entries[i][j]:
                wc = _word_charge_units(w)
                if wc is None:
                    return NotHomogeneous
                q = wc + dst_units[i] - src_units[j]
                if found is None:
                    found = q
                elif q != found:
                    return NotHomogeneous
    return found


def morphism_charge(phi: Morphism, source: GradedMBF, target: GradedMBF):
    """Exact R-charge of a homogeneous morphism (in actual units, q_x = 2/d).

    Zero morphisms report charge 0; mixed sectors give NotHomogeneous.
    """
    d = source.d
    qE = operator_charge_units(
        phi.opE, source.charges0, target.charges(phi.parity)
    )
    qO = operator_charge_units(
        phi.opO, source.charges1, target.charges(1 + phi.parity)
    )
    if qE is NotHomogeneous or qO is NotHomogeneous:
        return NotHomogeneous
    if qE is None and qO is None:
        return Rat(0)
    if qE is not None and qO is not None and qE != qO:
        return NotHomogeneous
    units = qE if qE is not None else qO
    return units * Rat(2, d)


def zero_charge_structure_check(d: int):
    """The associator and unit maps carry R-charge zero."""
    from .bifact import associator, unit_isos

    report = {"checks": [], "ok": True}

    def record(name, phi, gs, gt):
        q = morphism_charge(phi, gs, gt)
        ok = q == 0 if q is not NotHomogeneous else False
        report["checks"].append({"which": name, "charge": str(q), "ok": ok})
        if not ok:
            report["ok"] = False

    gD = graded_ps(d, 0, 1)
    gI = graded_unit(d)
    lam, rho = unit_isos(gD.base)
    record("lambda", lam, graded_tensor(gI, gD), gD)
    record("rho", rho, graded_tensor(gD, gI), gD)
    gs = [graded_ps(d, i, 0) for i in range(min(3, d))]
    a, b, c = gs[0], gs[1 % len(gs)], gs[2 % len(gs)]
    al = associator(a.base, b.base, c.base)
    record(
        "associator",
        al,
        graded_tensor(graded_tensor(a, b), c),
        graded_tensor(a, graded_tensor(b, c)),
    )

    # negative control: one entry of lambda scaled by a must be flagged
    from .bifact import Operator, Word, w_mul

    bad = Operator.zero(lam.opE.src, lam.opE.dst)
    for i in range(lam.opE.dst.rank):
        for j in range(lam.opE.src.rank):
            for w in lam.opE.entries[i][j]:
                if (i, j) == (0, 0):
                    w = w.then(w_mul(w.dst, w.dst.ring().parse("a")))
                bad.entries[i][j].append(w)
    marred = Morphism(lam.src, lam.dst, 0, bad, lam.opO)
    q = morphism_charge(marred, graded_tensor(gI, gD), gD)
    flagged = q is NotHomogeneous
    report["checks"].append(
        {"which": "negative-control", "charge": str(q), "ok": flagged}
    )
    if not flagged:
        report["ok"] = False
    return report


# -- hom spaces ---------------------------------------------------------------


def _is_nonneg_int(x) -> bool:
    return x == int(x) and x >= 0


class _Ansatz:
    """Finite monomial basis of one parity-leg pair at fixed charge."""

    def __init__(self, gs: GradedMBF, gt: GradedMBF, parity: int, units: Rat):
        self.gs = gs
        self.gt = gt
        self.parity = parity
        self.units = units
        self.ring = gs.base.shape.ring()
        self.vars = []  # (leg, i, j, m, n)
        for leg in (0, 1):
            csrc = gs.charges(leg)
            cdst = gt.charges(leg + parity)
            for i in range(len(cdst)):
                for j in range(len(csrc)):
                    deg = units - cdst[i] + csrc[j]
                    if not _is_nonneg_int(deg):
                        continue
                    deg = int(deg)
                    # a-power descending so canonical representatives prefer a^k
                    for m in range(deg, -1, -1):
                        self.vars.append((leg, i, j, m, deg - m))

    def __len__(self):
        return len(self.vars)

    def legs_for(self, coeffs) -> tuple:
        """Assemble the two PolyMatrix legs from a coefficient vector."""
        ring = self.ring
        shapes = []
        for leg in (0, 1):
            rows = len(self.gt.charges(leg + self.parity))
            cols = len(self.gs.charges(leg))
            shapes.append([[ring.zero() for _ in range(cols)] for _ in range(rows)])
        for c, (leg, i, j, m, n) in zip(coeffs, self.vars):
            if isinstance(c, Cyclo) and c.is_zero():
                continue
            mono = ring.monomial({"a": m, "b": n}, c)
            shapes[leg][i][j] = shapes[leg][i][j] + mono
        return (PolyMatrix(ring, shapes[0]), PolyMatrix(ring, shapes[1]))

    def unit_vector(self, k: int):
        d = self.gs.base.shape.conductor
        out = [Cyclo.zero(d)] * len(self.vars)
        out[k] = Cyclo.one(d)
        return self.legs_for(out)

    def morphism(self, coeffs) -> Morphism:
        legE, legO = self.legs_for(coeffs)
        from .bifact import Operator

        src, tgt = self.gs.base, self.gt.base
        return Morphism(
            src,
            tgt,
            self.parity,
            Operator.from_poly_matrix(src.m0, tgt.component(self.parity), legE),
            Operator.from_poly_matrix(src.m1, tgt.component(1 + self.parity), legO),
        )


def _delta_legs(gs: MBF, gt: MBF, parity: int, legE: PolyMatrix, legO: PolyMatrix):
    """delta on multiplier block matrices, as plain matrix algebra."""
    D0, D1 = gs.d0.pure_mul_matrix(), gs.d1.pure_mul_matrix()
    E0, E1 = gt.d0.pure_mul_matrix(), gt.d1.pure_mul_matrix()
    if parity == 0:
        return (E0 * legE - legO * D0, E1 * legO - legE * D1)
    return (E1 * legE + legO * D0, E0 * legO + legE * D1)


class _Vectorizer:
    """Maps (leg, block, monomial) coefficients into a growing coordinate list."""

    def __init__(self, conductor: int):
        self.index = {}
        self.conductor = conductor

    def vectorize(self, pair) -> dict:
        out = {}
        for leg, pm in enumerate(pair):
            for i in range(pm.rows):
                for j in range(pm.cols):
                    for e, c in pm[i, j].terms.items():
                        key = (leg, i, j, e)
                        col = self.index.setdefault(key, len(self.index))
                        out[col] = c
        return out

    def rows(self, sparse_rows) -> list:
        n = len(self.index)
        z = Cyclo.zero(self.conductor)
        out = []
        for sr in sparse_rows:
            row = [z] * n
            for col, c in sr.items():
                row[col] = c
            out.append(row)
        return out


def _closed_subspace(ansatz: _Ansatz):
    """Basis vectors (over the ansatz variables) of the delta kernel."""
    from .linalg import nullspace

    d = ansatz.gs.base.shape.conductor
    vec = _Vectorizer(d)
    sparse = []
    for k in range(len(ansatz)):
        legs = ansatz.unit_vector(k)
        img = _delta_legs(ansatz.gs.base, ansatz.gt.base, ansatz.parity, *legs)
        sparse.append(vec.vectorize(img))
    cols = vec.rows(sparse)  # one row per ansatz variable
    if not vec.index:
        return [
            [Cyclo.one(d) if t == k else Cyclo.zero(d) for t in range(len(ansatz))]
            for k in range(len(ansatz))
        ]
    # each coordinate of the stacked evaluation is one linear equation
    neq = len(vec.index)
    matrix = [[cols[k][e] for k in range(len(ansatz))] for e in range(neq)]
    return nullspace(matrix, d, ncols=len(ansatz))


def _image_vectors(ansatz_even: _Ansatz, gs, gt, units: Rat, parity: int):
    """delta of every odd-ansatz basis vector, in even-ansatz coordinates."""
    half = Rat(gs.d, 2)
    lower = _Ansatz(gs, gt, 1 - parity, units - half)
    coords = {
        (leg, i, j, m, n): t for t, (leg, i, j, m, n) in enumerate(ansatz_even.vars)
    }
    out = []
    d = gs.base.shape.conductor
    for k in range(len(lower)):
        legs = lower.unit_vector(k)
        imgE, imgO = _delta_legs(gs.base, gt.base, 1 - parity, *legs)
        vecv = [Cyclo.zero(d)] * len(ansatz_even)
        ok = True
        for leg, pm in enumerate((imgE, imgO)):
            for i in range(pm.rows):
                for j in range(pm.cols):
                    for e, c in pm[i, j].terms.items():
                        key = (leg, i, j, e[0], e[1])
                        t = coords.get(key)
                        if t is None:
                            ok = False
                        else:
                            vecv[t] = vecv[t] + c
        assert ok, "delta image left the charge sector"
        out.append(vecv)
    return out, lower


class HomSector:
    __slots__ = ("charge", "dim", "representatives")

    def __init__(self, charge, dim, representatives):
        self.charge = charge
        self.dim = dim
        self.representatives = representatives


class HomSpace:
    __slots__ = ("source", "target", "sectors")

    def __init__(self, source, target, sectors):
        self.source = source
        self.target = target
        self.sectors = sectors

    def total_dim(self) -> int:
        return sum(s.dim for s in self.sectors)

    def charges(self):
        return [s.charge for s in self.sectors]

    def to_json(self):
        return {
            "source": self.source,
            "target": self.target,
            "sectors": [
                {
                    "charge": rat_str(s.charge),
                    "dim": s.dim,
                    "basis": [
                        {
                            "even": rep.opE.pure_mul_matrix().to_json(),
                            "odd": rep.opO.pure_mul_matrix().to_json(),
                        }
                        for rep in s.representatives
                    ],
                }
                for s in self.sectors
            ],
        }


def _solve_sector(gs: GradedMBF, gt: GradedMBF, units: Rat, parity: int = 0):
    """(dim, representatives) of the charge-u cohomology, exact."""
    from .linalg import Echelon

    ansatz = _Ansatz(gs, gt, parity, units)
    if not len(ansatz):
        return 0, []
    closed = _closed_subspace(ansatz)
    if not closed:
        return 0, []
    image, _ = _image_vectors(ansatz, gs, gt, units, parity)
    ech = Echelon(gs.base.shape.conductor)
    for vecv in image:
        ech.insert(vecv)
    reps = [ansatz.morphism(vecv) for vecv in closed if ech.insert(vecv)]
    return len(reps), reps


def hom_space(gs: GradedMBF, gt: GradedMBF, charge="all", parity: int = 0) -> HomSpace:
    """Cohomology classes of morphisms gs -> gt, per exact charge sector.

    `charge` is an actual R-charge (rational) or "all", which scans every
    sector reachable with block entry degrees up to 2d.
    """
    d = gs.d
    qx = Rat(2, d)
    if charge == "all":
        units_candidates = set()
        for leg in (0, 1):
            csrc = gs.charges(leg)
            cdst = gt.charges(leg + parity)
            for ci in cdst:
                for cj in csrc:
                    for deg in range(0, 2 * d + 1):
                        units_candidates.add(deg + ci - cj)
        todo = sorted(units_candidates)
    else:
        todo = [Rat(charge) / qx]
    sectors = []
    for units in todo:
        dim, reps = _solve_sector(gs, gt, units, parity)
        if dim > 0 or charge != "all":
            sectors.append(HomSector(units * qx, dim, reps))
    return HomSpace(gs.label, gt.label, sectors)


def is_null_homotopic(phi: Morphism, gs: GradedMBF, gt: GradedMBF):
    """Exact witness psi with delta(psi) = phi, or None (a certified No).

    phi must be charge-homogeneous with multiplier-only blocks; homogeneity
    makes the forced-sector ansatz complete, so failure is a proof.
    """
    from .linalg import solve

    pmE = phi.opE.pure_mul_matrix()
    pmO = phi.opO.pure_mul_matrix()
    if pmE is None or pmO is None:
        raise ValueError("need multiplier-only blocks")
    if pmE.is_zero() and pmO.is_zero():
        return Morphism.zero(gs.base, gt.base, 1 + phi.parity)
    q = morphism_charge(phi, gs, gt)
    if q is NotHomogeneous:
        raise ValueError("morphism mixes charge sectors")
    d = gs.d
    units = q / Rat(2, d)
    half = Rat(d, 2)
    lower = _Ansatz(gs, gt, 1 + phi.parity, units - half)
    vec = _Vectorizer(gs.base.shape.conductor)
    sparse = []
    for k in range(len(lower)):
        legs = lower.unit_vector(k)
        img = _delta_legs(gs.base, gt.base, 1 + phi.parity, *legs)
        sparse.append(vec.vectorize(img))
    target_sparse = vec.vectorize((pmE, pmO))
    cols = vec.rows(sparse)
    neq = len(vec.index)
    matrix = [[cols[k][e] for k in range(len(lower))] for e in range(neq)]
    z = Cyclo.zero(gs.base.shape.conductor)
    rhs = [z] * neq
    for col, c in target_sparse.items():
        rhs[col] = c
    if not matrix or not matrix[0]:
        return None
    sol = solve(matrix, rhs, gs.base.shape.conductor)
    if sol is None:
        return None
    return lower.morphism(sol)
