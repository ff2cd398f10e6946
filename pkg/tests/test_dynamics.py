import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import BISTABLE, COND_A, P1, P1_EQ
from lgin.dynamics import (
    UNRESOLVED,
    BracketError,
    RegimeError,
    basin_grid,
    basin_labels,
    envelope,
    fold_search,
    gas_certificate,
    iterate,
    monotone_onset,
    separatrix,
)
from lgin.equilibria import Label, find_equilibria
from lgin.model import Box, DomainError, ModelParams, se_leq, step, trapping_box
from lgin.sweep import draw_params

ASYM_BISTABLE = ModelParams(6, 6, 3, 2.5, 0.01, 0.01)
pos = st.floats(min_value=1e-2, max_value=1e2, allow_nan=False, allow_infinity=False)
params_st = st.builds(ModelParams, pos, pos, pos, pos, pos, pos)


@pytest.fixture(scope="module")
def fold_params():
    return fold_search(BISTABLE, "c1", 0.3, 3.0)


class TestIterate:
    def test_p1_from_origin(self):
        t = iterate(P1, (0, 0), max_n=100_000, tol=1e-12)
        assert t.converged
        assert t.limit == pytest.approx((P1_EQ, P1_EQ), abs=1e-11)
        assert t.monotone_onset is not None
        assert t.cauchy_tail <= 1e-12

    def test_box_after_first_step(self):
        t = iterate(BISTABLE, (40.0, 0.0), max_n=500)
        box = trapping_box(BISTABLE)
        assert all(box.contains(pt) for pt in t.points[1:])

    def test_fixed_start(self):
        for p in [P1, BISTABLE, COND_A]:
            for e in find_equilibria(p).nonneg:
                t = iterate(p, e.point, max_n=50, tol=1e-12)
                assert t.points[1] == pytest.approx(e.point, abs=1e-12)
                assert t.limit == pytest.approx(e.point, abs=1e-12)

    def test_bistable_q2_start(self):
        e1 = find_equilibria(BISTABLE).nonneg[0].point
        t = iterate(BISTABLE, (e1.x / 2, e1.y + 3), tol=1e-12)
        assert t.limit == pytest.approx(e1, abs=1e-9)

    def test_nonconvergence_is_a_value(self):
        t = iterate(P1, (0, 0), max_n=3, tol=1e-12)
        assert not t.converged and t.limit is None

    def test_domain(self):
        with pytest.raises(DomainError):
            iterate(P1, (-1, 0))
        with pytest.raises(ValueError):
            iterate(P1, (0, 0), max_n=0)

    def test_monotone_onset_oracle(self):
        pts = [(0, 5), (2, 1), (1, 2), (1.5, 1.8), (1.6, 1.7), (1.65, 1.65)]
        # last x reversal is at diff index 1 (2 -> 1), last y reversal at diff index 1 (1 -> 2)
        assert monotone_onset(pts) == 2
        assert monotone_onset([(0, 0), (1, 1), (2, 2)]) == 0

    def test_converged_orbits_sample(self):
        rng = np.random.default_rng(21)
        for p in draw_params(rng, 100):
            start = rng.uniform(0, 2 * (1 + max(p.b1 + p.h1, p.b2 + p.h2)), 2)
            t = iterate(p, start, tol=1e-9, max_n=100_000)
            assert t.converged and t.monotone_onset is not None
            pts = find_equilibria(p).points()
            assert np.min(np.max(np.abs(pts - np.asarray(t.limit)), axis=1)) <= 1e-6


class TestEnvelope:
    def test_p1(self):
        env = envelope(P1, 50)
        gap = np.max(np.abs(env.upper_seq - env.lower_seq), axis=1)
        assert np.all(np.diff(gap) <= 0)
        assert env.lower_seq[-1] == pytest.approx((P1_EQ, P1_EQ), abs=1e-6)
        assert env.upper_seq[-1] == pytest.approx((P1_EQ, P1_EQ), abs=1e-6)

    def test_corners(self):
        env = envelope(BISTABLE, 1)
        assert tuple(env.lower_seq[0]) == (BISTABLE.h1, BISTABLE.h2 + BISTABLE.b2)
        assert tuple(env.upper_seq[0]) == (BISTABLE.h1 + BISTABLE.b1, BISTABLE.h2)

    @settings(max_examples=100, deadline=None)
    @given(params_st, st.floats(0, 200), st.floats(0, 200))
    def test_sandwich_and_monotone(self, p, x, y):
        n = 200
        env = envelope(p, n)
        lo, hi = env.lower_seq, env.upper_seq
        tol = 1e-12 * (1 + max(p.b1 + p.h1, p.b2 + p.h2))
        pt = step(p, (x, y))
        for k in range(n):
            assert se_leq(lo[k], pt, tol) and se_leq(pt, hi[k], tol)
            assert se_leq(lo[k], hi[k], tol)
            if k + 1 < n:
                assert se_leq(lo[k], lo[k + 1], tol) and se_leq(hi[k + 1], hi[k], tol)
            pt = step(p, pt)


class TestGas:
    def test_p1(self):
        assert gas_certificate(P1)

    def test_bistable(self):
        assert not gas_certificate(BISTABLE)

    def test_sufficient_conditions(self):
        assert gas_certificate(COND_A)
        rng = np.random.default_rng(22)
        for p in draw_params(rng, 300):
            if p.c1 * p.c2 <= 1:
                assert gas_certificate(p)


class TestBasins:
    def test_p1_all_one(self):
        g = basin_grid(P1, Box(0, 10, 0, 10), 20, 20)
        assert np.all(g.labels == 1)

    def test_bistable_increasing_boundary(self):
        g = basin_grid(ASYM_BISTABLE, Box(0, 7, 0, 7), 30, 30)
        assert set(np.unique(g.labels)) <= {1, 2, 3}
        assert {1, 3} <= set(np.unique(g.labels))
        # each column reads 3 ... 3 then 1 ... 1 from bottom to top
        first_one = []
        for i in range(g.labels.shape[1]):
            col = g.labels[:, i]
            col = col[col != 2]
            assert np.all(np.diff(col) <= 0)
            ones = np.flatnonzero(col == 1)
            first_one.append(ones[0] if len(ones) else len(col))
        assert np.all(np.diff(first_one) >= 0)

    def test_saddle_label_only_on_stable_manifold(self):
        # with symmetric parameters the diagonal is invariant and carries the saddle basin
        g = basin_grid(BISTABLE, Box(0, 6, 0, 6), 25, 25)
        XX, YY = np.meshgrid(g.xs, g.ys)
        assert np.all((g.labels == 2) == np.isclose(XX, YY, rtol=0, atol=1e-12))
        assert np.all(g.labels[YY > XX + 1e-9] == 1)
        assert np.all(g.labels[YY < XX - 1e-9] == 3)

    def test_fold_quadrants(self, fold_params):
        eqs = find_equilibria(fold_params)
        (x1, y1), (x2, y2) = eqs.points()
        g = basin_grid(fold_params, Box(0, 7.5, 0, 7.5), 30, 30, eqs=eqs)
        XX, YY = np.meshgrid(g.xs, g.ys)
        q2 = (XX <= x1) & (YY >= y1)
        q4 = (XX >= x2) & (YY <= y2)
        assert q2.any() and q4.any()
        assert np.all(g.labels[q2] == 1)
        assert np.all(g.labels[q4] == 2)

    def test_unresolved_is_reported(self):
        g = basin_grid(P1, Box(0, 5, 0, 5), 3, 3, max_n=2)
        assert np.all(g.labels == UNRESOLVED)

    def test_validation(self):
        with pytest.raises(ValueError):
            basin_grid(P1, Box(0, 1, 0, 1), 1, 5)
        with pytest.raises(ValueError):
            basin_grid(P1, Box(-1, 1, 0, 1), 3, 3)

    def test_order_coherence(self):
        rng = np.random.default_rng(23)
        for p in [ASYM_BISTABLE, BISTABLE] + draw_params(rng, 10):
            eqs = find_equilibria(p)
            pts = eqs.points()
            a = rng.uniform(0, 8, (200, 2))
            d = rng.uniform(0, 2, (200, 2))
            b = np.column_stack([a[:, 0] + d[:, 0], np.maximum(a[:, 1] - d[:, 1], 0)])
            la, lb = basin_labels(p, a, eqs), basin_labels(p, b, eqs)
            for i, j in zip(la, lb):
                if i > 0 and j > 0:
                    assert se_leq(pts[i - 1], pts[j - 1])


class TestSeparatrix:
    def test_bistable(self):
        sep = separatrix(BISTABLE, nx=101)
        eqs = find_equilibria(BISTABLE)
        saddle = eqs.nonneg[1].point
        xs, ys = sep.samples[:, 0], sep.samples[:, 1]
        assert np.all(np.diff(ys) > 0)
        assert sep.bracket_width <= 1e-8
        k = np.flatnonzero(xs == saddle.x)
        assert len(k) == 1 and abs(ys[k[0]] - saddle.y) <= 1e-5

    def test_two_sided(self):
        p = ASYM_BISTABLE
        eqs = find_equilibria(p)
        sep = separatrix(p, eqs, nx=21)
        delta = 2 * sep.bracket_width
        below = basin_labels(p, sep.samples - [0, delta], eqs)
        above = basin_labels(p, sep.samples + [0, delta], eqs)
        assert np.all(below == 3) and np.all(above == 1)
        saddle = eqs.nonneg[1].point
        xs, ys = sep.samples.T
        assert np.interp(saddle.x, xs, ys) == pytest.approx(saddle.y, abs=1e-5)
        assert np.all(np.diff(ys) > 0)

    def test_saddle_eigenvector_crosscheck(self):
        e2 = find_equilibria(ASYM_BISTABLE).nonneg[1]
        a, b, c, d = e2.jac
        lam2 = e2.eig.lambda2
        # stable eigenvector (b, lam2 - a) is tangent to the separatrix at the saddle
        slope = (lam2 - a) / b
        h = 1e-3
        sep = separatrix(ASYM_BISTABLE, xs=[e2.point.x - h, e2.point.x + h])
        fd = (sep.samples[-1, 1] - sep.samples[0, 1]) / (2 * h)
        assert fd == pytest.approx(slope, rel=1e-3)

    def test_leaves_through_the_axis(self):
        sep = separatrix(ASYM_BISTABLE, xs=np.linspace(0, 0.2, 41))
        assert sep.absent == (0.0,)
        assert sep.samples[0, 1] < 5e-3

    def test_regime_error(self):
        with pytest.raises(RegimeError):
            separatrix(P1)


class TestFold:
    def test_bracket_error(self):
        with pytest.raises(BracketError):
            fold_search(P1, "c1", 0.5, 1.5)

    def test_fold(self, fold_params):
        eqs = find_equilibria(fold_params)
        assert eqs.count == 2
        assert sorted(e.label.value for e in eqs.nonneg) == ["LAS", "Nonhyperbolic"]
        nh = [e for e in eqs.nonneg if e.label is Label.NONHYPERBOLIC][0]
        assert abs(nh.eig.lambda1 - 1) <= 1e-4
        assert nh.contact_order == 2
        assert 0.3 < fold_params.c1 < 3.0
        # just past the fold on either side the count is 1 and 3
        counts = {find_equilibria(fold_params.with_(c1=fold_params.c1 * (1 + s))).count for s in (-1e-4, 1e-4)}
        assert counts == {1, 3}
