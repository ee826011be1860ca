import math

import numpy as np
import pytest

from wicknls import field as fld
from wicknls import wick

from oracles import gaussian_even_moment, hermite_reference, rational_weight_sum

TWO_PI = 2.0 * np.pi


def standard_complex_gaussians(count, seed=0):
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    z = gen.standard_normal((count, 2))
    return z[:, 0] + 1j * z[:, 1]  # Var(g) = 2


class TestHermite:
    def test_h2(self):
        assert wick.hermite(2, 2.0, 1.0) == 3.0

    def test_h4(self):
        assert wick.hermite(4, 1.0, 1.0) == -2.0

    def test_degree_zero(self):
        assert wick.hermite(0, 7.3, 2.0) == 1.0

    @pytest.mark.parametrize("n", [1, 3, 6, 10])
    def test_matches_closed_form(self, n):
        for x in (-2.5, 0.3, 1.9):
            for sigma in (0.5, 1.0, 3.0):
                assert wick.hermite(n, x, sigma) == pytest.approx(
                    hermite_reference(n, x, sigma), rel=1e-10, abs=1e-10)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            wick.hermite(-1, 0.0)
        with pytest.raises(ValueError):
            wick.hermite(2, 0.0, 0.0)
        with pytest.raises(ValueError):
            wick.hermite(51, 0.0)

    def test_generating_function(self):
        # |t| <= 0.5: the degree-12 partial sum of sum H_n t^n / n! tracks
        # exp(t x - sigma t^2 / 2) to 1e-8 (tail term H_13 t^13/13! is below
        # that for these x, sigma)
        for x in (-1.5, 0.0, 1.5):
            for sigma in (0.5, 1.0):
                for t in (-0.5, 0.25, 0.5):
                    series = sum(wick.hermite(k, x, sigma) * t**k / math.factorial(k)
                                 for k in range(13))
                    assert abs(series - math.exp(t * x - 0.5 * sigma * t * t)) < 1e-8

    def test_orthogonality_monte_carlo(self):
        gen = np.random.Generator(np.random.Philox(key=np.array([3, 0], dtype=np.uint64)))
        x = gen.standard_normal(400_000)
        for m, n in ((1, 2), (2, 3), (1, 4)):
            prod = wick.hermite(m, x) * wick.hermite(n, x)
            assert abs(prod.mean()) <= 3.0 * prod.std() / math.sqrt(len(x))
        for n in (1, 2, 3, 4):
            sq = wick.hermite(n, x) ** 2
            stderr = sq.std() / math.sqrt(len(x))
            assert abs(sq.mean() - math.factorial(n)) <= 3.0 * stderr


class TestWickPowers:
    def test_square_values(self):
        assert wick.wick_abs_square(1 + 1j, 2.0) == 0.0
        assert wick.wick_abs_square(0.0, 2.0) == -2.0

    def test_fourth_values(self):
        # |g|^4 - 4 Var |g|^2 + 2 Var^2 at g = 1+i, Var 2: 4 - 16 + 8
        assert wick.wick_abs_fourth(1 + 1j, 2.0) == -4.0
        assert wick.wick_abs_fourth(0.0, 2.0) == 8.0

    def test_zero_mean_under_matching_variance(self):
        g = standard_complex_gaussians(1_000_000, seed=7)
        for values in (wick.wick_abs_square(g, 2.0), wick.wick_abs_fourth(g, 2.0)):
            stderr = values.std() / math.sqrt(len(values))
            assert abs(values.mean()) <= 3.0 * stderr

    def test_fourth_equals_chaos_expansion(self):
        # :|g|^4: = H4(x) + 2 H2(x) H2(y) + H4(y) for g = x + iy, Var 2
        xs, ys = np.meshgrid(np.linspace(-3, 3, 25), np.linspace(-3, 3, 25))
        lhs = wick.wick_abs_fourth(xs + 1j * ys, 2.0)
        rhs = (wick.hermite(4, xs) + 2.0 * wick.hermite(2, xs) * wick.hermite(2, ys)
               + wick.hermite(4, ys))
        assert np.max(np.abs(lhs - rhs)) < 1e-10


class TestRenormalizationConstant:
    def test_zero_band(self):
        assert wick.renormalization_constant(0, 1.0) == 1.0

    def test_first_band(self):
        assert wick.renormalization_constant(1, 1.0) == 2.0

    def test_matches_rational_sum(self):
        got = wick.renormalization_constant(10, 1.0)
        assert got == pytest.approx(float(rational_weight_sum(10, 2)), rel=1e-13)
        assert got == pytest.approx(2.96358564467035, rel=1e-10)

    def test_white_noise_weights(self):
        # alpha = 0 gives weight 1/2 on every mode including n = 0
        assert wick.renormalization_constant(4, 0.0) == pytest.approx(4.5)

    def test_log_growth_needs_exponent_one(self):
        # The alpha = 1 sum converges (to pi coth pi), so only the exponent-1
        # weight reproduces logarithmic growth in one dimension.
        a3 = wick.renormalization_constant(1000, 0.5)
        a5 = wick.renormalization_constant(100_000, 0.5)
        assert abs((a5 / math.log(1e5)) / (a3 / math.log(1e3)) - 1.0) < 0.10
        assert wick.renormalization_constant(100_000, 1.0) == pytest.approx(
            math.pi / math.tanh(math.pi), rel=1e-4)


class TestIntensityFluctuation:
    def test_zero_field(self):
        z = fld.TorusField.zeros(3)
        assert wick.intensity_fluctuation(z, 0, 1.0) == -1.0

    def test_definition(self):
        f = fld.TorusField.from_modes({0: 1.0, 1: 1.0})
        expect = 2.0 - wick.renormalization_constant(1, 1.0)
        assert wick.intensity_fluctuation(f, 1, 1.0) == pytest.approx(expect)

    def test_stabilizes_in_band(self):
        # tail effect on c_N shrinks fast: compare N = 20 vs N = 50 samplewise
        from wicknls.random_data import RandomDataSpec, sample

        spec = RandomDataSpec(alpha=1.0, max_mode=50, seed=13)
        diffs = [wick.intensity_fluctuation(sample(spec, k), 50, 1.0)
                 - wick.intensity_fluctuation(sample(spec, k), 20, 1.0)
                 for k in range(200)]
        assert np.std(diffs) < 0.1
        assert abs(np.mean(diffs)) < 0.05


class TestWickHamiltonian:
    def test_zero_field_constant_term(self):
        # only the constant 2 a^2 survives: (1/4) * 2 pi * 2 * 1 = pi
        z = fld.TorusField.zeros(2)
        assert wick.wick_hamiltonian(z, 0, 1.0, 1) == pytest.approx(math.pi)

    def test_plane_wave_kinetic_part(self):
        f = fld.TorusField.single_mode(1, 1.0, max_mode=2)
        a = wick.renormalization_constant(2, 1.0)
        # kinetic pi; quartic block: |u|^4 = 1 integrates to 2 pi, etc.
        quartic = 0.25 * (TWO_PI - 4.0 * a * TWO_PI + 2.0 * a * a * TWO_PI)
        assert wick.wick_hamiltonian(f, 2, 1.0, 1) == pytest.approx(math.pi + quartic)

    def test_sign_flips_quartic_block(self):
        f = fld.TorusField.from_modes({0: 0.5, 1: 0.25j})
        a_plus = wick.wick_hamiltonian(f, 1, 1.0, 1)
        a_minus = wick.wick_hamiltonian(f, 1, 1.0, -1)
        kinetic = 0.5 * TWO_PI * 0.25**2
        assert a_plus + a_minus == pytest.approx(2.0 * kinetic)


class TestHypercontractivity:
    def test_h2_q4_exact_ratio(self):
        # E[(x^2-1)^4] = 60, E[(x^2-1)^2] = 2: ratio 60^(1/4)/sqrt(2)
        r = wick.hypercontractivity_check(2, 1, 4.0, samples=2_000_000, seed=3)
        ratio = r.lhs / math.sqrt(r.rhs**2 / 9.0)  # rhs = 3 ||F||_2
        exact = 60.0**0.25 / math.sqrt(2.0)
        assert abs(ratio / exact - 1.0) < 0.02
        assert r.lhs <= 3.0 * 1.01  # bound (q-1)^{n/2} = 3 on the raw ratio
        assert r.passed

    def test_gaussian_moment_oracle(self):
        # cross-check the frozen 60 via double factorials
        moments = {k: gaussian_even_moment(k) for k in range(5)}
        e4 = moments[4] - 4 * moments[3] + 6 * moments[2] - 4 * moments[1] + 1
        assert e4 == 60

    def test_order_zero_equality(self):
        r = wick.hypercontractivity_check(0, 1, 4.0, samples=10_000, seed=1)
        assert r.lhs == pytest.approx(r.rhs)
        assert r.passed

    def test_q2_exact_equality(self):
        r = wick.hypercontractivity_check(2, 2, 2.0, samples=10_000, seed=1,
                                          terms=[(1.0, (1, 1))])
        assert r.lhs == r.rhs
        assert r.passed

    def test_validation(self):
        with pytest.raises(ValueError):
            wick.hypercontractivity_check(2, 1, 1.5, samples=10_000)
        with pytest.raises(ValueError):
            wick.hypercontractivity_check(2, 1, 4.0, samples=100)
        with pytest.raises(ValueError):
            wick.hypercontractivity_check(2, 1, 4.0, samples=10_000,
                                          terms=[(1.0, (1,))])
        with pytest.raises(ValueError):
            wick.hypercontractivity_check(2, 0, 4.0, samples=10_000)

    def test_report_record(self):
        r = wick.hypercontractivity_check(1, 1, 4.0, samples=10_000, seed=2)
        d = r.to_dict()
        assert set(d) == {"n", "d", "q", "samples", "seed", "lhs", "rhs",
                          "stderr", "pass"}

    def test_deterministic_given_seed(self):
        a = wick.hypercontractivity_check(2, 1, 4.0, samples=50_000, seed=9)
        b = wick.hypercontractivity_check(2, 1, 4.0, samples=50_000, seed=9)
        assert a == b
