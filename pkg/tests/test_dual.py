import random
from fractions import Fraction

import pytest

from ncjoin.dual import (
    DualSystem,
    FinPerm,
    QQi,
    Track,
    TrackSpec,
    classify_dual,
    correlation_series,
    delta_n_eval,
    finite_orbit_subsystem,
    format_perm,
    format_word,
    opposite_group_joining,
    ornstein_scan_dual,
    parse_combination,
    parse_pair_combination,
    parse_qqi,
    parse_word,
    sample_element,
    word_inverse,
    word_multiply,
)
from ncjoin.errors import InputFormatError


@pytest.fixture(scope="module")
def cycles23():
    return DualSystem("free", TrackSpec((
        Track("x", "cycle", 2), Track("y", "cycle", 3))))


# ---------------------------------------------------------------------------
# scalars


def test_qqi_arithmetic():
    a = parse_qqi("1/2+1/3i")
    b = parse_qqi("-2")
    assert (a * b) == QQi(Fraction(-1), Fraction(-2, 3))
    assert a.conjugate().im == Fraction(-1, 3)
    assert parse_qqi("i") * parse_qqi("i") == QQi(Fraction(-1))
    assert parse_qqi("-3/4").re == Fraction(-3, 4)
    assert a.abs2() == Fraction(1, 4) + Fraction(1, 9)
    with pytest.raises(InputFormatError):
        parse_qqi("one half")


# ---------------------------------------------------------------------------
# words


def test_word_cancellation(dual_shift):
    spec = dual_shift.spec
    x0 = parse_word(spec, "x0")
    assert word_multiply(spec, x0, word_inverse(x0)) == ()
    w = word_multiply(spec, parse_word(spec, "x0 x1"), parse_word(spec, "x1^-1 x5"))
    assert format_word(w) == "x0 x5"
    assert format_word(word_inverse(parse_word(spec, "x0 x1"))) == "x1^-1 x0^-1"


def test_word_reduction_idempotent(dual_mixed):
    rng = random.Random(5)
    spec = dual_mixed.spec
    for _ in range(200):
        w = sample_element(dual_mixed, rng)
        assert word_multiply(spec, w, ()) == w
        assert word_inverse(word_inverse(w)) == w
        assert word_multiply(spec, w, word_inverse(w)) == ()


def test_group_axioms_random_triples(dual_mixed, dual_finperm):
    for sysd in (dual_mixed, dual_finperm):
        rng = random.Random(99)
        for _ in range(1000):
            a = sample_element(sysd, rng)
            b = sample_element(sysd, rng)
            c = sample_element(sysd, rng)
            left = sysd.multiply(sysd.multiply(a, b), c)
            right = sysd.multiply(a, sysd.multiply(b, c))
            assert left == right
            assert sysd.multiply(a, sysd.inverse(a)) == sysd.identity()


def test_automorphism_property_random_pairs(dual_mixed, dual_finperm):
    for sysd in (dual_mixed, dual_finperm):
        rng = random.Random(42)
        for _ in range(1000):
            a = sample_element(sysd, rng)
            b = sample_element(sysd, rng)
            n = rng.randrange(-6, 7)
            lhs = sysd.apply_T(sysd.multiply(a, b), n)
            rhs = sysd.multiply(sysd.apply_T(a, n), sysd.apply_T(b, n))
            assert lhs == rhs
            assert sysd.apply_T(sysd.inverse(a), n) == sysd.inverse(sysd.apply_T(a, n))


def test_apply_T_examples(dual_shift, dual_finperm):
    spec3 = TrackSpec((Track("x", "cycle", 3),))
    sys3 = DualSystem("free", spec3)
    assert dual_shift.apply_T(parse_word(dual_shift.spec, "x0"), 5) == \
        parse_word(dual_shift.spec, "x5")
    w = parse_word(spec3, "x0 x1")
    assert sys3.apply_T(w, 3) == w
    t = FinPerm.from_cycles([[("x", 0), ("x", 1)]])
    assert format_perm(dual_finperm.apply_T(t, 2)) == "(x2 x3)"


def test_power_composition_exact(dual_mixed):
    rng = random.Random(17)
    for _ in range(200):
        g = sample_element(dual_mixed, rng)
        m, n = rng.randrange(-5, 6), rng.randrange(-5, 6)
        assert dual_mixed.apply_T(g, 0) == g
        assert dual_mixed.apply_T(dual_mixed.apply_T(g, m), n) == \
            dual_mixed.apply_T(g, m + n)


# ---------------------------------------------------------------------------
# orbits


def test_orbit_identity(dual_shift):
    cert = dual_shift.orbit_length(())
    assert cert.kind == "finite" and cert.period == 1


def test_orbit_lcm_example(cycles23):
    g = parse_word(cycles23.spec, "x0 y0")
    cert = cycles23.orbit_length(g)
    assert cert.kind == "finite" and cert.period == 6
    # explicit verification: no earlier return
    for j in range(1, 6):
        assert cycles23.apply_T(g, j) != g
    assert cycles23.apply_T(g, 6) == g


def test_orbit_infinite_certificate(dual_shift):
    cert = dual_shift.orbit_length(parse_word(dual_shift.spec, "x0"))
    assert cert.kind == "infinite"
    assert cert.escaping == ("x", 0)


def test_orbit_escape_monotone(dual_mixed, dual_finperm):
    rng = random.Random(8)
    for sysd in (dual_mixed, dual_finperm):
        for _ in range(300):
            g = sample_element(sysd, rng)
            cert = sysd.orbit_length(g)
            if cert.kind == "infinite":
                tid, idx = cert.escaping
                seen = []
                for n in range(1, 51):
                    moved = sysd.apply_T(g, n)
                    letters = dict()
                    if sysd.family == "free":
                        present = [l for l, _ in moved]
                    else:
                        present = list(moved.support)
                    match = [i for t, i in present if t == tid]
                    assert match, "escaping letter track vanished"
                    seen.append(min(m for m in match))
                assert all(b > a for a, b in zip(seen, seen[1:]))
            else:
                n = cert.period
                assert sysd.apply_T(g, n) == g
                for j in range(1, n):
                    assert sysd.apply_T(g, j) != g


def test_finperm_orbit_period_not_just_lcm(dual_finperm):
    # the full rotation of the cycle track commutes with the advance map
    full = FinPerm.from_cycles([[("y", 0), ("y", 1), ("y", 2)]])
    cert = dual_finperm.orbit_length(full)
    assert cert.kind == "finite" and cert.period == 1


# ---------------------------------------------------------------------------
# classification


def test_classify_corpus(dual_shift, dual_cycle2, dual_mixed, dual_finperm):
    cs = classify_dual(dual_shift)
    assert cs.ergodic and cs.strongly_mixing and cs.weakly_mixing and not cs.compact
    cc = classify_dual(dual_cycle2)
    assert cc.compact and not cc.ergodic
    cm = classify_dual(dual_mixed)
    assert not cm.ergodic and not cm.compact
    cf = classify_dual(dual_finperm)
    assert not cf.ergodic and not cf.compact


def test_classify_finite_group_not_ergodic():
    sysd = DualSystem("finperm", TrackSpec((Track("y", "cycle", 3),)))
    cls = classify_dual(sysd)
    assert cls.gamma_finite and cls.gamma_order == 6
    assert cls.compact and not cls.ergodic
    assert any("finite" in note for note in cls.notes)


def test_classify_trivial_finperm_group():
    sysd = DualSystem("finperm", TrackSpec((Track("y", "cycle", 1),)))
    cls = classify_dual(sysd)
    assert cls.gamma_order == 1
    assert cls.ergodic and cls.compact


def test_classification_coherence_with_sampled_orbits(
        dual_shift, dual_cycle2, dual_mixed, dual_finperm):
    for sysd in (dual_shift, dual_cycle2, dual_mixed, dual_finperm):
        cls = classify_dual(sysd)
        rng = random.Random(123)
        all_finite = True
        nontrivial_finite = False
        for _ in range(1000):
            g = sample_element(sysd, rng)
            cert = sysd.orbit_length(g)
            if cert.kind == "infinite":
                all_finite = False
            elif not sysd.is_identity(g):
                nontrivial_finite = True
        assert cls.compact == all_finite
        assert cls.ergodic == (not nontrivial_finite)


# ---------------------------------------------------------------------------
# finite orbit subsystem


def test_finite_orbit_subsystem_mixed(dual_mixed):
    fos = finite_orbit_subsystem(dual_mixed)
    assert not fos.trivial
    assert "cycle-track letters y" in fos.description
    assert fos.membership(parse_word(dual_mixed.spec, "y0 y1"))
    assert not fos.membership(parse_word(dual_mixed.spec, "y0 x0"))
    assert fos.restricted_classification.compact
    # multiplicative closure on samples
    rng = random.Random(31)
    members = [g for g in (sample_element(dual_mixed, rng) for _ in range(600))
               if fos.membership(g)]
    for a, b in zip(members, members[1:]):
        assert fos.membership(dual_mixed.multiply(a, b))
        assert fos.membership(dual_mixed.inverse(a))


def test_finite_orbit_subsystem_all_shift(dual_shift):
    fos = finite_orbit_subsystem(dual_shift)
    assert fos.trivial
    assert fos.restricted is None
    assert classify_dual(dual_shift).ergodic


# ---------------------------------------------------------------------------
# correlations


def test_correlation_series_shift_example(dual_shift):
    a = parse_combination(dual_shift, "x0")
    b = parse_combination(dual_shift, "x5^-1")
    s = correlation_series(dual_shift, a, b, range(0, 9))
    assert [v.re for v in s.centered] == [0, 0, 0, 0, 0, 1, 0, 0, 0]
    assert s.bound_satisfied()


def test_correlation_series_unit(dual_shift):
    one = parse_combination(dual_shift, "1")
    s = correlation_series(dual_shift, one, one, range(0, 5))
    assert all(v.is_zero for v in s.centered)
    assert all(v.re == 1 for v in s.raw)


def test_correlation_series_periodic_no_decay(dual_cycle2):
    spec3 = DualSystem("free", TrackSpec((Track("x", "cycle", 3),)))
    a = parse_combination(spec3, "x0")
    b = parse_combination(spec3, "x0^-1")
    s = correlation_series(spec3, a, b, range(0, 10))
    assert [v.re for v in s.raw] == [1 if n % 3 == 0 else 0 for n in range(10)]


def test_correlation_series_empty_support(dual_shift):
    with pytest.raises(InputFormatError):
        correlation_series(dual_shift, {}, {(): QQi(Fraction(1))}, range(3))


def test_correlation_ergodic_escape_bound(dual_shift):
    # centered correlations of nonidentity words vanish past the index span
    rng = random.Random(77)
    for _ in range(200):
        a = {sample_element(dual_shift, rng): QQi(Fraction(1))}
        b = {sample_element(dual_shift, rng): QQi(Fraction(1))}
        idxs = [i for w in (*a, *b) for (_, i), _ in w]
        span = (max(idxs) - min(idxs)) if idxs else 0
        s = correlation_series(dual_shift, a, b, range(span + 1, span + 10))
        ga, gb = next(iter(a)), next(iter(b))
        expect = QQi(Fraction(1)) if (ga == () and gb == ()) else QQi()
        for v in s.raw:
            assert v == expect


# ---------------------------------------------------------------------------
# graph values and the ratio scan


def test_delta_examples(dual_shift, dual_cycle2):
    c_diag = parse_pair_combination(dual_shift, "x0 | x0")
    assert delta_n_eval(dual_shift, c_diag, 0).value == QQi(Fraction(1))
    for n in range(1, 6):
        assert delta_n_eval(dual_shift, c_diag, n).value == QQi()
    one = parse_pair_combination(dual_shift, "1 | 1")
    for n in range(5):
        assert delta_n_eval(dual_shift, one, n).value == QQi(Fraction(1))


def test_ornstein_scan_shift_two_terms(dual_shift):
    c = parse_pair_combination(dual_shift, "x0 | x0; x1 | x1")
    scan = ornstein_scan_dual(dual_shift, [c], range(0, 12))
    rep = scan.reports[0]
    assert rep.escape_bound == 1
    assert rep.denominator == 2
    assert all(r == 1 for n, r in rep.ratios if n >= 2)
    assert rep.ratios[0] == (0, Fraction(2))
    assert scan.strongly_mixing


def test_ornstein_scan_cycle2_limsup(dual_cycle2):
    c = parse_pair_combination(dual_cycle2, "x0 | x0; x1 | x1")
    scan = ornstein_scan_dual(dual_cycle2, [c], range(0, 12))
    rep = scan.reports[0]
    assert rep.limsup_window == Fraction(2)
    assert [r for _, r in rep.ratios[:4]] == [Fraction(2), Fraction(1), Fraction(2), Fraction(1)]
    assert not scan.strongly_mixing


def test_ornstein_scan_unit_element(dual_shift, dual_cycle2):
    for sysd in (dual_shift, dual_cycle2):
        one = parse_pair_combination(sysd, "1 | 1")
        scan = ornstein_scan_dual(sysd, [one], range(0, 6))
        assert all(r == 1 for _, r in scan.reports[0].ratios)


def test_ornstein_scan_skips_degenerate(dual_shift):
    scan = ornstein_scan_dual(dual_shift, [{}], range(0, 3), labels=["empty"])
    assert scan.skipped == ["empty"]


# ---------------------------------------------------------------------------
# opposite-group joining


def test_opposite_joining_shift_trivial(dual_shift):
    oj = opposite_group_joining(dual_shift)
    assert oj.trivial
    assert oj.witness is None
    assert oj.evaluate((), ()) == 1


def test_opposite_joining_mixed_witness(dual_mixed):
    oj = opposite_group_joining(dual_mixed)
    assert not oj.trivial
    g, h = oj.witness
    assert oj.evaluate(g, h) == 1
    assert oj.product_value(g, h) == 0
    with pytest.raises(InputFormatError):
        oj.evaluate(g, parse_word(dual_mixed.spec, "x0"))


def test_opposite_joining_marginal_and_invariance(dual_mixed):
    oj = opposite_group_joining(dual_mixed)
    spec = dual_mixed.spec
    words = [(), parse_word(spec, "y0"), parse_word(spec, "y0 y1"),
             parse_word(spec, "y1^-1")]
    for g in words:
        # marginal in the first leg: h = identity picks the Haar state
        haar = Fraction(1) if g == () else Fraction(0)
        assert oj.evaluate(g, ()) == haar
        for h in words:
            lhs = oj.evaluate(dual_mixed.apply_T(g, 1), dual_mixed.apply_T(h, 1))
            assert lhs == oj.evaluate(g, h)


def test_opposite_joining_finperm(dual_finperm):
    oj = opposite_group_joining(dual_finperm)
    assert not oj.trivial
    g, h = oj.witness
    assert oj.evaluate(g, h) == 1
