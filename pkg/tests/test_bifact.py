"""Bi-factorisation layer: objects, delta, tensor structure, units, homotopies."""

import pytest
from hypothesis import given, settings, strategies as st

from mbf.bifact import (
    DEFAULT_CUTOFF,
    FreeBimod,
    MBF,
    Morphism,
    Operator,
    SlotShape,
    associator,
    associator_inv,
    fermat_potential,
    homotopy_psi,
    lift_left,
    lift_right,
    mbf_from_polys,
    morphism_equal,
    mu_relation_check,
    op_equal,
    pentagon_check,
    ps_object,
    rxa_lemma_check,
    tensor_mor,
    tensor_obj,
    triangle_check,
    twist_iso_ps,
    twist_object,
    unit_coincidence_check,
    unit_isos,
    unit_isos_inverse,
    unit_object,
    validate_mbf,
    w_mul,
)
from mbf.exactalg import Cyclo
from mbf.polycalc import Ring


def strs(pm):
    return [[str(p) for p in row] for row in pm.entries]


class TestValidate:
    def test_unit_cubic_exact(self):
        I = unit_object(fermat_potential(3))
        rep = validate_mbf(I)
        assert rep.ok and rep.mode == "exact"
        # the telescoping identity behind it
        ring = I.shape.ring()
        prod = I.d1.pure_mul_matrix() * I.d0.pure_mul_matrix()
        assert prod[0, 0] == ring.parse("a^3 - b^3")

    def test_ps_d4(self):
        assert validate_mbf(ps_object(4, [1])).ok

    @pytest.mark.parametrize("d", [2, 3, 5, 7])
    def test_ps_complement_product(self, d):
        P = ps_object(d, [0])
        ring = P.shape.ring()
        prod = P.d1.pure_mul_matrix() * P.d0.pure_mul_matrix()
        assert prod[0, 0] == ring.var("a") ** d - ring.var("b") ** d

    def test_corrupted_differential_reported(self):
        shape = SlotShape(2, 1, 3)
        ring = shape.ring()
        # drop the a*b term from the correct divided difference
        bad = mbf_from_polys(
            shape,
            [[ring.parse("a^2 + b^2")]],
            [[ring.parse("a - b")]],
            fermat_potential(3),
        )
        rep = validate_mbf(bad)
        assert not rep.ok
        v = rep.violations[0]
        assert v["detail"]["block"] == [0, 0]
        assert v["detail"]["difference"]  # nonzero difference polynomial

    def test_rank_mismatch_rejected(self):
        shape = SlotShape(2, 1, 3)
        ring = shape.ring()
        with pytest.raises(ValueError):
            mbf_from_polys(
                shape,
                [[ring.one()], [ring.one()]],
                [[ring.one()], [ring.one()]],
                fermat_potential(3),
            )


class TestDelta:
    def test_identity_closed(self):
        I = unit_object(fermat_potential(3))
        assert Morphism.identity(I).is_closed()[0]

    def test_odd_psi_pin(self):
        # psi = ([1], 0) odd on the cubic unit maps to ([a-b], [a-b])
        I = unit_object(fermat_potential(3))
        ring = I.shape.ring()
        psi = Morphism.from_poly_blocks(I, I, 1, [[ring.one()]], [[ring.zero()]])
        d = psi.delta()
        assert d.parity == 0
        assert strs(d.opE.pure_mul_matrix()) == [["a - b"]]
        assert strs(d.opO.pure_mul_matrix()) == [["a - b"]]

    @pytest.mark.parametrize("parity", [0, 1])
    @pytest.mark.parametrize("e,o", [("a^2", "b"), ("a*b + 1", "a - 2*b"), ("b^3", "0")])
    def test_delta_squared_zero(self, parity, e, o):
        D = ps_object(4, [0, 2])
        ring = D.shape.ring()
        phi = Morphism.from_poly_blocks(
            D, D, parity, [[ring.parse(e)]], [[ring.parse(o)]]
        )
        dd = phi.delta().delta()
        eq, _ = morphism_equal(dd, Morphism.zero(D, D, parity))
        assert eq

    @given(
        ce=st.integers(-4, 4),
        co=st.integers(-4, 4),
        ke=st.integers(0, 3),
        ko=st.integers(0, 3),
    )
    @settings(max_examples=25, deadline=None)
    def test_delta_squared_zero_random(self, ce, co, ke, ko):
        D = ps_object(3, [1])
        ring = D.shape.ring()
        phi = Morphism.from_poly_blocks(
            D,
            D,
            1,
            [[ring.var("a") ** ke * ce]],
            [[ring.var("b") ** ko * co]],
        )
        eq, _ = morphism_equal(phi.delta().delta(), Morphism.zero(D, D, 1))
        assert eq


class TestTensorObject:
    def test_p0_p1_entries(self):
        T = tensor_obj(ps_object(3, [0]), ps_object(3, [1]))
        assert T.m0.rank == 2 and T.m1.rank == 2
        assert T.shape.nslots == 3
        d0 = T.d0.pure_mul_matrix()
        assert strs(d0) == [
            ["a^2 + a*x1 + x1^2", "-x1 + z*b"],
            ["x1^2 + z*x1*b + (-1 - z)*b^2", "a - x1"],
        ]
        assert validate_mbf(T).ok

    def test_unit_tensor_block_layout(self):
        # I (x) D for rank-1 D: the standard four-block pattern
        d = 4
        D = ps_object(d, [1])
        I = unit_object(fermat_potential(d))
        T = tensor_obj(I, D)
        ring = T.shape.ring()
        iota0 = ring.parse("a^3 + a^2*x1 + a*x1^2 + x1^3")
        iota1 = ring.parse("a - x1")
        dd0 = D.d0.pure_mul_matrix()[0, 0].rename({"a": "x1", "b": "b"}, ring)
        dd1 = D.d1.pure_mul_matrix()[0, 0].rename({"a": "x1", "b": "b"}, ring)
        m0 = T.d0.pure_mul_matrix()
        m1 = T.d1.pure_mul_matrix()
        assert m0[0, 0] == iota0 and m0[0, 1] == -dd1
        assert m0[1, 0] == dd0 and m0[1, 1] == iota1
        assert m1[0, 0] == iota1 and m1[0, 1] == dd1
        assert m1[1, 0] == -dd0 and m1[1, 1] == iota0

    @pytest.mark.parametrize("d", [3, 4, 5, 6])
    def test_tensor_sweep_valid(self, d):
        Ps = [ps_object(d, [i]) for i in range(d)]
        for i in range(d):
            for j in range(d):
                rep = validate_mbf(tensor_obj(Ps[i], Ps[j]))
                assert rep.ok and rep.mode == "exact", (d, i, j)

    def test_triple_tensor_valid(self):
        P = ps_object(3, [0])
        Q = ps_object(3, [1])
        T = tensor_obj(tensor_obj(P, Q), P)
        assert T.shape.nslots == 4
        assert validate_mbf(T).ok

    def test_potential_mismatch(self):
        with pytest.raises(ValueError):
            tensor_obj(ps_object(3, [0]), ps_object(4, [0]))


class TestTensorMorphism:
    def test_id_tensor_id(self):
        P = ps_object(4, [0])
        Q = ps_object(4, [2])
        t = tensor_mor(Morphism.identity(P), Morphism.identity(Q))
        T = tensor_obj(P, Q)
        eq, mode = morphism_equal(t, Morphism.identity(T))
        assert eq and mode == "exact-structural"

    def test_functoriality(self):
        d = 5
        D = ps_object(d, [1])
        ring = D.shape.ring()
        phi = Morphism.from_poly_blocks(D, D, 0, [[ring.parse("a*b")]], [[ring.parse("a*b")]])
        psi = Morphism.from_poly_blocks(D, D, 0, [[ring.parse("a + b")]], [[ring.parse("a + b")]])
        E = ps_object(d, [3])
        ident = Morphism.identity(E)
        lhs = tensor_mor(phi.compose(psi), ident)
        rhs = tensor_mor(phi, ident).compose(tensor_mor(psi, ident))
        eq, _ = morphism_equal(lhs, rhs)
        assert eq

    def test_mixed_functoriality_with_signs(self):
        # odd (x) odd composition picks up Koszul signs; both routes agree
        d = 4
        D = ps_object(d, [0])
        ring = D.shape.ring()
        f = Morphism.from_poly_blocks(D, D, 1, [[ring.parse("a")]], [[ring.parse("b^2")]])
        g = Morphism.from_poly_blocks(D, D, 1, [[ring.parse("b")]], [[ring.parse("a + b")]])
        lhs = tensor_mor(f.compose(g), Morphism.identity(D))
        rhs = tensor_mor(f, Morphism.identity(D)).compose(
            tensor_mor(g, Morphism.identity(D))
        )
        eq, _ = morphism_equal(lhs, rhs)
        assert eq

    def test_tensor_of_closed_is_closed(self):
        d = 4
        D = ps_object(d, [0])
        ring = D.shape.ring()
        # closed even endomorphism: diagonal multiplication by a
        phi = Morphism.from_poly_blocks(D, D, 0, [[ring.var("a")]], [[ring.var("a")]])
        assert phi.is_closed()[0]
        E = ps_object(d, [1, 2])
        psi = Morphism.from_poly_blocks(E, E, 0, [[ring.parse("b^2")]], [[ring.parse("b^2")]])
        assert psi.is_closed()[0]
        t = tensor_mor(phi, psi)
        ok, _ = t.is_closed(cutoff=12)
        assert ok


class TestAssociator:
    def test_round_trip(self):
        P = ps_object(4, [0])
        Q = ps_object(4, [1])
        R = ps_object(4, [3])
        al = associator(P, Q, R)
        ali = associator_inv(P, Q, R)
        eq, mode = morphism_equal(al.compose(ali), Morphism.identity(al.dst))
        assert eq and mode == "exact-structural"
        eq, mode = morphism_equal(ali.compose(al), Morphism.identity(al.src))
        assert eq and mode == "exact-structural"

    def test_associator_closed(self):
        P = ps_object(3, [0])
        Q = ps_object(3, [2])
        al = associator(P, Q, P)
        ok, mode = al.is_closed()
        assert ok and mode == "exact-structural"

    def test_pentagon_singletons_d3(self):
        Ps = [ps_object(3, [i]) for i in range(3)]
        for i in range(3):
            r = pentagon_check(Ps[i], Ps[(i + 1) % 3], Ps[(i + 2) % 3], Ps[i])
            assert r["ok"] and r["mode"] == "exact-structural"

    def test_triangle_pairs(self):
        for d in (3, 6):
            for S1 in ([0], [0, 1]):
                for S2 in ([1],):
                    r = triangle_check(ps_object(d, S1), ps_object(d, S2))
                    assert r["ok"] and r["mode"] == "exact-structural"


class TestUnitObject:
    @pytest.mark.parametrize("d", [2, 3, 5, 8])
    def test_one_variable_is_p0(self, d):
        I = unit_object(fermat_potential(d))
        P0 = ps_object(d, [0])
        assert I.d0.pure_mul_matrix() == P0.d0.pure_mul_matrix()
        assert I.d1.pure_mul_matrix() == P0.d1.pure_mul_matrix()

    def test_two_variable_quadric_display(self):
        ring = Ring(("x", "y"), 2)
        w = ring.var("x") ** 2 + ring.var("y") ** 2
        I = unit_object(w)
        assert I.m0.rank == 2 and I.m1.rank == 2
        assert strs(I.d0.pure_mul_matrix()) == [
            ["a1 + b1", "-a2 + b2"],
            ["a2 + b2", "a1 - b1"],
        ]
        assert strs(I.d1.pure_mul_matrix()) == [
            ["a1 - b1", "a2 - b2"],
            ["-a2 - b2", "a1 + b1"],
        ]
        rep = validate_mbf(I)
        assert rep.ok and rep.mode == "exact"

    def test_two_variable_cubic(self):
        ring = Ring(("x", "y"), 3)
        w = ring.var("x") ** 3 + ring.var("y") ** 3
        rep = validate_mbf(unit_object(w))
        assert rep.ok and rep.mode == "exact"

    def test_three_variable_cubic(self):
        ring = Ring(("x", "y", "u"), 3)
        w = ring.var("x") ** 3 + ring.var("y") ** 3 + ring.var("u") ** 3
        I = unit_object(w)
        assert I.m0.rank == 4 and I.m1.rank == 4
        rep = validate_mbf(I)
        assert rep.ok and rep.mode == "exact"

    def test_low_degree_rejected(self):
        ring = Ring(("x",), 2)
        with pytest.raises(ValueError):
            unit_object(ring.var("x"))


class TestUnitIsos:
    def test_lambda_after_inverse_cubic(self):
        I = unit_object(fermat_potential(3))
        lam, _ = unit_isos(I)
        lam_inv, _ = unit_isos_inverse(I)
        eq, mode = morphism_equal(lam.compose(lam_inv), Morphism.identity(I))
        assert eq and mode == "exact-structural"

    def test_lambda_closed_p1_d4(self):
        lam, _ = unit_isos(ps_object(4, [1]))
        ok, mode = lam.is_closed()
        assert ok and mode == "exact-structural"

    def test_rho_closed_p01_d5(self):
        _, rho = unit_isos(ps_object(5, [0, 1]))
        ok, mode = rho.is_closed()
        assert ok and mode == "exact-structural"

    def test_lambda_inv_closed_p01_d4(self):
        lam_inv, _ = unit_isos_inverse(ps_object(4, [0, 1]))
        ok, mode = lam_inv.is_closed()
        assert ok and mode == "exact-structural"

    def test_round_trips_p2_d5(self):
        D = ps_object(5, [2])
        lam, rho = unit_isos(D)
        lam_inv, rho_inv = unit_isos_inverse(D)
        assert morphism_equal(lam.compose(lam_inv), Morphism.identity(D))[0]
        assert morphism_equal(rho.compose(rho_inv), Morphism.identity(D))[0]

    @pytest.mark.parametrize("d", [3, 4, 6, 8])
    def test_round_trips_family(self, d):
        for S in ([0], [1], [0, 1]):
            D = ps_object(d, S)
            lam, rho = unit_isos(D)
            lam_inv, rho_inv = unit_isos_inverse(D)
            eq, mode = morphism_equal(lam.compose(lam_inv), Morphism.identity(D))
            assert eq and mode == "exact-structural", (d, S)
            eq, mode = morphism_equal(rho.compose(rho_inv), Morphism.identity(D))
            assert eq and mode == "exact-structural", (d, S)

    def test_lambda_inv_second_block_pin(self):
        # for the cubic unit the correction block is multiplication by a+x+b
        I = unit_object(fermat_potential(3))
        lam_inv, _ = unit_isos_inverse(I)
        words = lam_inv.opE.normalized().entries[1][0]
        assert len(words) == 1
        d = words[0].describe()
        assert d["word"][-1] == {"kind": "mul", "poly": "a + x1 + b"}

    @pytest.mark.parametrize("d", [3, 5, 8])
    def test_left_right_coincide_on_unit(self, d):
        rep = unit_coincidence_check(d)
        assert rep["ok"]
        assert rep["rho_after_laminv"]["mode"] == "exact-structural"

    def test_two_variable_unit_isos_closed(self):
        ring = Ring(("x", "y"), 3)
        w = ring.var("x") ** 3 + ring.var("y") ** 3
        I = unit_object(w)
        lam, rho = unit_isos(I)
        assert lam.is_closed(cutoff=4)[0]
        assert rho.is_closed(cutoff=4)[0]


class TestHomotopies:
    @pytest.mark.parametrize(
        "d,S",
        [(3, [0]), (5, [1, 2])],
        ids=["unit-cubic", "p12-d5"],
    )
    def test_homotcond_left(self, d, S):
        D = ps_object(d, S)
        lam, _ = unit_isos(D)
        lam_inv, _ = unit_isos_inverse(D)
        psi = homotopy_psi(D, "left")
        lhs = lam_inv.compose(lam) - Morphism.identity(psi.src)
        eq, mode = morphism_equal(lhs, psi.delta(), cutoff=DEFAULT_CUTOFF)
        assert eq, mode

    def test_homotcond_right_p0_d4(self):
        D = ps_object(4, [0])
        _, rho = unit_isos(D)
        _, rho_inv = unit_isos_inverse(D)
        psi = homotopy_psi(D, "right")
        lhs = rho_inv.compose(rho) - Morphism.identity(psi.src)
        eq, mode = morphism_equal(lhs, psi.delta(), cutoff=DEFAULT_CUTOFF)
        assert eq, mode

    def test_psi_is_odd_and_sparse(self):
        psi = homotopy_psi(ps_object(3, [0]), "left")
        assert psi.parity == 1
        n = psi.opE.normalized()
        nonzero = [
            (i, j)
            for i in range(n.dst.rank)
            for j in range(n.src.rank)
            if n.entries[i][j]
        ]
        assert nonzero == [(0, 0)]


class TestRxa:
    @pytest.mark.parametrize("d", [3, 4, 6])
    def test_all_items(self, d):
        rep = rxa_lemma_check(d, cutoff=DEFAULT_CUTOFF)
        assert rep["ok"], rep

    def test_item_iii_with_ps_entry(self):
        # phi taken from the even differential of P_{{1}} at d=4
        shape = SlotShape(3, 1, 4)
        ring = shape.ring()
        phi = ring.p_S([0, 2, 3], "x1", "b")
        rep = rxa_lemma_check(4, cutoff=DEFAULT_CUTOFF, phi=phi)
        assert rep["iii"]["ok"]


class TestMuRelations:
    @pytest.mark.parametrize("d", range(2, 9))
    def test_collapse_relations(self, d):
        rep = mu_relation_check(fermat_potential(d))
        assert rep["mu_iota0"]["ok"] and rep["mu_iota0"]["mode"] == "exact-structural"
        assert rep["mu_iota1"]["ok"] and rep["mu_iota1"]["mode"] == "exact-structural"


class TestTwists:
    def test_twist_iso_d3(self):
        T, iso, target = twist_iso_ps(3, [1], 1, 0)
        assert validate_mbf(T).ok
        # target is P_{{2}}
        ring = target.shape.ring()
        assert target.d1.pure_mul_matrix()[0, 0] == ring.p_S([2])
        ok, mode = iso.is_closed()
        assert ok and mode == "exact-structural"
        # phi_1 = eta^{-1}
        eta = ring.root(1)
        assert iso.opO.pure_mul_matrix()[0, 0] == ring.const(eta ** 2)

    def test_equal_twist_is_scalar_iso(self):
        T, iso, target = twist_iso_ps(5, [0, 3], 2, 2)
        ring = target.shape.ring()
        assert target.d1.pure_mul_matrix()[0, 0] == ring.p_S([0, 3])
        assert iso.opE.pure_mul_matrix()[0, 0] == ring.one()
        phi1 = iso.opO.pure_mul_matrix()[0, 0].constant_value()
        assert phi1 is not None and not phi1.is_zero()
        assert iso.is_closed()[0]

    def test_twist_needs_multiplier_entries(self):
        I = unit_object(fermat_potential(3))
        lam, _ = unit_isos(I)
        with pytest.raises(ValueError):
            twist_object(tensor_obj(I, I), 1, 0)


class TestOperatorEquality:
    def test_detects_difference_exactly(self):
        D = ps_object(4, [0])
        ring = D.shape.ring()
        a = Operator.diagonal(D.m0, D.m0, w_mul(D.shape, ring.var("a")))
        b = Operator.diagonal(D.m0, D.m0, w_mul(D.shape, ring.var("b")))
        eq, mode = op_equal(a, b)
        assert not eq and mode in ("exact-multiplier", "exact-structural")

    def test_lift_shapes(self):
        D = ps_object(3, [0])
        L = lift_left(D.d0, D.m0)
        assert L.src.shape.nslots == 3 and L.src.rank == 1
        R = lift_right(D.d0, D.m1)
        assert R.dst.shape.nslots == 3

    def test_json_shapes(self):
        D = ps_object(3, [1])
        js = D.to_json()
        assert js["rank0"] == 1 and js["slots"] == 2
        assert isinstance(js["d0"][0][0], list)
        lam, _ = unit_isos(D)
        mj = lam.to_json()
        assert mj["parity"] == "even"
