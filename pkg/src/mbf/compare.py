"""Cross-checks between the exact defect algebra and its numeric CFT mirror.

Three comparisons, each deterministic and side-effect free:

* ``ratio_compare``: the gauge-invariant combination F00 F22/(F02 F20) of the
  2x2 fusing matrix.  The exact cyclotomic value is embedded numerically and
  held against the closed form -1/(1 + 2 cos(2 pi/d)) and against the product
  of quantum 6j and torus data.
* ``spectrum_compare``: R-charge multisets of defect-changing spectra.  One
  side is the cohomology of graded morphisms out of the unit defect, the other
  the total charges of chiral primary pairs.  Convention pinned here: the pair
  carrying [u+l, u+l, 0] on the left and [l, l, 0] on the right contributes
  the charge sum (u+l)/d + l/d = (u+2l)/d.
* ``fusion_rule_compare``: tensor-product decompositions of consecutive-index
  defects against coset fusion under the label dictionary
  [l, l+2m, 0] <-> P_{m, ..., m+l}.

Verdicts are plain dicts ready for JSON emission.  A mismatch is reported in
the ``pass`` field, never raised; only malformed input raises.  Numeric
comparisons are always exact-versus-numeric at an explicit tolerance recorded
in the output, and agreement is reported as evidence (pass/fail per check),
not as proof.
"""

from __future__ import annotations

import itertools
from typing import List, Tuple

from mpmath import mp

from ._rat import rat_str
from .bifact import Morphism, morphism_equal
from .cft import (
    DEFAULT_PREC,
    cft_fusing_examples,
    chiral_charge,
    defect_spectrum,
    fusing_ratio,
    mm_fuse,
    mm_normalize,
)
from .fusion import DEFAULT_CUTOFF, PSObject, fuse, solve_fusing_2x2
from .graded import hom_space


def ratio_compare(
    d: int,
    tol: float = 1e-10,
    cutoff: int = DEFAULT_CUTOFF,
    prec: int = DEFAULT_PREC,
) -> dict:
    """Gauge-invariant fusing ratio, three ways, compared at tolerance tol.

    The exact side comes out of the 2x2 fusing solve; the closed form is
    -1/(1 + 2 cos(2 pi/d)); the third value multiplies 6j symbols with torus
    signs.  The report never raises on disagreement.
    """
    if d < 4:
        raise ValueError("the 2x2 fusing example needs d >= 4")
    report = solve_fusing_2x2(d, cutoff)
    exact = report.ratio_exact
    with mp.workprec(prec):
        lg = exact.to_complex(prec)
        closed = -1 / (1 + 2 * mp.cospi(mp.mpf(2) / d))
        cft_ratio = fusing_ratio(cft_fusing_examples(d, "twoByTwo", prec=prec))
        lg_vs_closed = float(abs(lg - closed))
        cft_vs_closed = float(abs(cft_ratio - closed))
        lg_vs_cft = float(abs(lg - cft_ratio))
    ok = lg_vs_closed <= tol and cft_vs_closed <= tol
    return {
        "check": "fusing-ratio",
        "d": d,
        "tol": tol,
        "lg_exact": str(exact),
        "lg_numeric": float(mp.re(lg)),
        "closed_form": float(closed),
        "cft_numeric": float(cft_ratio),
        "lg_vs_closed": lg_vs_closed,
        "cft_vs_closed": cft_vs_closed,
        "lg_vs_cft": lg_vs_cft,
        "pass": ok,
    }


def spectrum_compare(d: int, u: int) -> dict:
    """Charge multisets of the spectrum from the unit defect to P_{0..u}.

    Both sides are computed, neither is hardcoded: the morphism side lists
    every cohomology sector charge with multiplicity, the coset side sums the
    chiral charges of each spectrum pair.
    """
    src = PSObject(d, (0,))
    tgt = PSObject(d, tuple(range(u + 1)))
    hs = hom_space(src.underlying, tgt.underlying)
    lg_charges = sorted(
        itertools.chain.from_iterable([s.charge] * s.dim for s in hs.sectors)
    )
    pairs = defect_spectrum(d, u, chiral_only=True)
    cft_charges = sorted(
        chiral_charge(d, x.l) + chiral_charge(d, y.l) for x, y in pairs
    )
    return {
        "check": "spectrum",
        "d": d,
        "u": u,
        "lg_charges": [rat_str(q) for q in lg_charges],
        "cft_charges": [rat_str(q) for q in cft_charges],
        "pass": lg_charges == cft_charges,
    }


def consecutive_sets(d: int) -> List[Tuple[int, ...]]:
    """All proper consecutive residue sets mod d, every size and start."""
    out = []
    for size in range(1, d):
        for start in range(d):
            out.append(tuple(sorted((start + i) % d for i in range(size))))
    return out


def _set_to_label(d: int, S: Tuple[int, ...]):
    # S = {m, ..., m+l} mod d corresponds to [l, l+2m, 0]; recover the start
    # from any rotation by finding the unique gap in the complement
    k = len(S)
    sset = set(S)
    starts = [i for i in S if (i - 1) % d not in sset]
    if len(starts) != 1 or any((starts[0] + j) % d not in sset for j in range(k)):
        raise ValueError(f"{set(S)} is not consecutive mod {d}")
    m = starts[0]
    return mm_normalize(d, k - 1, (k - 1 + 2 * m) % (2 * d), 0)


def _label_to_set(lab) -> Tuple[int, ...]:
    # [u, n, 0] with n = u + 2m corresponds to P over {m, ..., m+u}
    if lab.s != 0:
        raise ValueError(f"{lab} carries no consecutive-defect counterpart")
    m = ((lab.m - lab.l) // 2) % lab.d
    return tuple(sorted((m + i) % lab.d for i in range(lab.l + 1)))


def fusion_rule_compare(
    d: int, verify_homotopy: bool = False, cutoff: int | None = None
) -> dict:
    """Tensor decompositions against coset fusion for all consecutive pairs.

    Every reduction is built with its exact validity checks on (the retract
    identity in particular); verify_homotopy additionally confirms the
    homotopy witness for the other composite on each pair, pointwise up to
    the cutoff (default 2d, enough for the degrees that occur).
    """
    if not 3 <= d <= 8:
        raise ValueError("supported range is 3 <= d <= 8 (runtime grows fast)")
    if cutoff is None:
        cutoff = 2 * d
    sets = consecutive_sets(d)
    key = lambda s: (len(s), s)
    rows = []
    mismatches = witness_failures = 0
    for S1, S2 in itertools.product(sets, repeat=2):
        rt, lg_ms = fuse(d, S1, S2, check=True)
        product = mm_fuse(_set_to_label(d, S1), _set_to_label(d, S2))
        cft_ms = sorted((_label_to_set(lab) for lab in product), key=key)
        match = sorted(lg_ms, key=key) == cft_ms
        if not match:
            mismatches += 1
        row = {
            "left": list(S1),
            "right": list(S2),
            "lg": [list(s) for s in lg_ms],
            "cft": [list(s) for s in cft_ms],
            "match": match,
        }
        if verify_homotopy:
            gap = rt.incl.compose(rt.proj) - Morphism.identity(rt.original)
            eq, mode = morphism_equal(rt.homotopy.delta(), gap, cutoff)
            row["homotopy_witness"] = bool(eq)
            row["homotopy_mode"] = mode
            if not eq:
                witness_failures += 1
        rows.append(row)
    return {
        "check": "fusion-rules",
        "d": d,
        "pairs": len(rows),
        "mismatches": mismatches,
        "homotopy_checked": verify_homotopy,
        "homotopy_cutoff": cutoff if verify_homotopy else None,
        "witness_failures": witness_failures if verify_homotopy else None,
        "rows": rows,
        "pass": mismatches == 0 and witness_failures == 0,
    }
