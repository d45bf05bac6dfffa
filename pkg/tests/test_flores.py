from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdhomog.curves import FunctionalSample, make_grid, simulate_sample
from fdhomog.depth import make_depth, univariate_fm_depth
from fdhomog.exceptions import GridError
from fdhomog.flores import FloresTest, depth_in_augmented, flores_statistics, flores_test
from fdhomog.sim import builtin_model

GRID = make_grid(0, 1, 10)
METHODS = [("fm", {}), ("rp", {"direction_seed": 3}), ("fd2", {"pair_budget": 20})]


def constants(levels, grid=GRID):
    return FunctionalSample(grid, np.repeat(np.asarray(levels, float)[:, None], len(grid), axis=1))


@pytest.fixture(scope="module")
def samples():
    f = simulate_sample(builtin_model(3), 10, GRID, 5)
    g = simulate_sample(builtin_model(4), 8, GRID, 6)
    return f, g


def test_depth_in_augmented_examples():
    f = constants([1.0, 3.0])
    assert depth_in_augmented(np.full(10, 2.0), f) == pytest.approx(5 / 6, abs=1e-12)
    assert depth_in_augmented(np.full(10, 100.0), f) == pytest.approx(0.5, abs=1e-12)
    # already in f: a duplicate is appended
    assert depth_in_augmented(np.full(10, 1.0), f) == pytest.approx(univariate_fm_depth(1.0, [1, 1, 3]))


def test_depth_in_augmented_grid_check():
    with pytest.raises((GridError, ValueError)):
        depth_in_augmented(np.zeros(7), constants([1.0, 2.0]))


def _oracle(f, g, method, params):
    """P1-P4 by explicitly building every augmented reference sample."""
    depth = make_depth(method, **params)

    def aug(curve, ref):
        explicit = FunctionalSample(ref.grid, np.vstack([ref.values, curve]))
        return float(depth.fit(explicit).score_samples(curve[None, :])[0])

    dF_F = [aug(x, f) for x in f.values]
    dF_G = [aug(x, f) for x in g.values]
    dG_G = [aug(x, g) for x in g.values]
    i_gg = int(np.argmax(dG_G))
    i_fg = int(np.argmax(dF_G))
    p1_ff, p1_gg = max(dF_F), max(dG_G)
    p1 = dF_G[i_gg]
    p3 = dF_G[i_fg]
    return p1, p1_ff - p1, p3, abs(p3 - p1_ff) * abs(p3 - p1_gg), i_gg, i_fg


@pytest.mark.parametrize("method, params", METHODS)
def test_statistics_match_oracle(samples, method, params):
    f, g = samples
    got = flores_statistics(f, g, method, **params)
    want = _oracle(f, g, method, params)
    np.testing.assert_allclose([got.p1, got.p2, got.p3, got.p4], want[:4], rtol=0, atol=1e-12)
    assert (got.deepest_in_g, got.deepest_of_g_in_f) == want[4:]


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=3),
       st.lists(st.integers(-5, 5), min_size=1, max_size=3))
def test_constant_curves_hand_enumeration(fl, gl):
    f, g = constants(fl), constants(gl)
    got = flores_statistics(f, g, "fm")

    def d(x, ref):  # exact, so ties are real ties
        return 1 - abs(Fraction(1, 2) - Fraction(sum(r <= x for r in ref), len(ref)))

    dF_G = [d(x, fl + [x]) for x in gl]
    dG_G = [d(x, gl + [x]) for x in gl]
    dF_F = [d(x, fl + [x]) for x in fl]
    i_gg = max(range(len(gl)), key=lambda i: (dG_G[i], -i))
    i_fg = max(range(len(gl)), key=lambda i: (dF_G[i], -i))
    p3 = dF_G[i_fg]
    assert got.deepest_in_g == i_gg and got.deepest_of_g_in_f == i_fg
    assert got.p1 == pytest.approx(float(dF_G[i_gg]), abs=1e-12)
    assert got.p2 == pytest.approx(float(max(dF_F) - dF_G[i_gg]), abs=1e-12)
    assert got.p3 == pytest.approx(float(p3), abs=1e-12)
    assert got.p4 == pytest.approx(float(abs(p3 - max(dF_F)) * abs(p3 - max(dG_G))), abs=1e-12)


@pytest.mark.parametrize("method, params", METHODS)
def test_identity(samples, method, params):
    f, _ = samples
    s = flores_statistics(f, f, method, **params)
    assert s.p2 == 0.0 and s.p4 == 0.0
    assert 0 <= s.p1 <= 1 and 0 <= s.p3 <= 1


def test_permutation_invariance(samples):
    f, g = samples
    base = flores_statistics(f, g)
    perm = flores_statistics(f.subset(np.random.default_rng(0).permutation(f.n)), g)
    assert (perm.p1, perm.p2, perm.p3, perm.p4) == pytest.approx((base.p1, base.p2, base.p3, base.p4), abs=1e-12)


def test_identical_samples_never_reject(samples):
    f, _ = samples
    res = flores_test(f, f, num_boot=50)
    assert res.t0 == 0.0 and res.p_adjusted == 1.0 and not res.reject


def test_result_fields_and_determinism(samples):
    f, g = samples
    a = flores_test(f, g, num_boot=60, seed=4)
    b = flores_test(f, g, num_boot=60, seed=4)
    assert a == b
    assert a.method == "flores-fm" and a.null_scheme == "pooled"
    assert a.t1 is None and a.p1 is None and a.p0 == a.p_adjusted
    assert 0 <= a.p_adjusted <= 1 and a.reject == (a.p_adjusted < a.alpha)


def test_estimator(samples):
    f, g = samples
    est = FloresTest(num_boot=50, random_state=1).fit(f, g)
    assert est.p4_boot_.shape == (50,) and np.all(est.p4_boot_ >= 0)
    assert est.result_.t0 == est.stats_.p4
    with pytest.raises(ValueError):
        FloresTest(num_boot=10).fit(f, g)
    with pytest.raises(ValueError):
        FloresTest(alpha=0).fit(f, g)


def test_shift_detected():
    grid = make_grid(0, 1, 30)
    f = simulate_sample(builtin_model(0), 50, grid, 1)
    g = simulate_sample(builtin_model(1), 50, grid, 2)
    assert flores_test(f, g, num_boot=100, seed=0).reject
