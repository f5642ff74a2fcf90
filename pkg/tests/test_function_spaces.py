import math

import numpy as np
import pytest

from conftest import cplx
from dissipert.errors import (AnalyticClassViolation, DivergentTail,
                              KernelRangeError, OrderMismatch)
from dissipert.function_spaces import (
    Modulus, besov_seminorm, build_kernel_bank, bump_v, bump_w, custom_table,
    f_sub_a, f_sub_a_defa, freq_bump, holder_seminorm, log_family, lp_piece,
    lp_pieces, modulus_of_f, omega_star, phi_a, phi_a_convolve, phi_a_l1,
    random_band_limited, shifted_power, tone, tone_sum, vp_highpass,
    vp_lowpass)


# -- kernel bank ------------------------------------------------------------

@pytest.mark.parametrize("step", ["exp", "exp2"])
def test_bump_endpoints_vanish(step):
    assert bump_w(np.array([0.5, 2.0]), step) == pytest.approx([0.0, 0.0], abs=0)


@pytest.mark.parametrize("step", ["exp", "exp2"])
def test_partition_at_one(step):
    bank = build_kernel_bank(-6, 6, step)
    assert bank.partition_sum(np.array([1.0]))[0] == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("step", ["exp", "exp2"])
def test_functional_equation(step):
    w = lambda x: float(bump_w(np.array([x]), step)[0])
    assert w(4 / 3) + w(2 / 3) == pytest.approx(1.0, abs=1e-15)


def test_partition_of_unity_on_range():
    bank = build_kernel_bank(-5, 7)
    x = np.geomspace(2.0 ** -5, 2.0 ** 6, 4001)
    assert np.max(np.abs(bank.partition_sum(x) - 1)) < 1e-10


def test_vp_kernel_is_one_on_unit_interval():
    assert np.all(bump_v(np.linspace(-1, 1, 101)) == 1.0)


def test_bank_covers():
    bank = build_kernel_bank(-2, 3)
    assert bank.covers(0.5, 4.0)
    assert not bank.covers(0.01, 4.0)


# -- LP pieces ----------------------------------------------------------------

def test_piece_of_unit_tone_is_itself():
    bank = build_kernel_bank(-3, 3)
    f = tone(1.0)
    piece = lp_piece(f, 0, bank)
    assert piece.atoms == ((1.0, 1.0),)


def test_piece_disjoint_band_is_zero():
    bank = build_kernel_bank(-3, 3)
    assert lp_piece(freq_bump(0.0, 0.25), 0, bank).is_zero


def test_pieces_reconstruct_bump():
    f = freq_bump(0.6, 1.8)
    bank = build_kernel_bank(-3, 3)
    x = np.linspace(-20, 20, 401)
    total = sum(p.synthesize(x) for p in lp_pieces(f, bank).values())
    assert np.max(np.abs(total - f.synthesize(x))) < 1e-8 * f.sup_norm()


def test_reconstruction_random_band_limited(rng):
    f = random_band_limited(rng, 0.4, 3.0, count=3, tones=2)
    bank = build_kernel_bank(-4, 4)
    x = np.linspace(-30, 30, 301)
    total = sum(p.synthesize(x) for p in lp_pieces(f, bank).values())
    assert np.max(np.abs(total - f.synthesize(x))) < 1e-8 * f.sup_norm()


def test_vp_reproduction():
    f = freq_bump(0.2, 0.9)
    bank = build_kernel_bank(-4, 4)
    x = np.linspace(-10, 10, 101)
    low = vp_lowpass(f, 0, bank)
    assert np.max(np.abs(low.synthesize(x) - f.synthesize(x))) < 1e-12
    assert vp_highpass(f, 0, bank).is_zero


def test_vp_split_sums_to_f():
    f = freq_bump(0.3, 5.0)
    bank = build_kernel_bank(-4, 4)
    x = np.linspace(-10, 10, 101)
    parts = vp_lowpass(f, 1, bank).synthesize(x) + vp_highpass(f, 1, bank).synthesize(x)
    assert np.max(np.abs(parts - f.synthesize(x))) < 1e-12


# -- seminorms ----------------------------------------------------------------

@pytest.mark.parametrize("sigma", [0.7, 1.0, 3.0])
def test_besov_of_tone_in_range(sigma):
    bank = build_kernel_bank(-4, 5)
    val = besov_seminorm(tone(sigma), 1, np.inf, 1, bank)
    assert sigma / 2 <= val <= 2 * sigma


def test_besov_zero():
    bank = build_kernel_bank(-4, 5)
    assert besov_seminorm(tone(1.0, 0.0), 1, np.inf, 1, bank) == 0.0


def test_besov_dilation_covariance():
    bank = build_kernel_bank(-4, 6)
    a = besov_seminorm(tone(1.3), 1, np.inf, 1, bank)
    b = besov_seminorm(tone(2.6), 1, np.inf, 1, bank)
    assert b == pytest.approx(2 * a, rel=1e-14)


def test_besov_kernel_range_error():
    with pytest.raises(KernelRangeError):
        besov_seminorm(tone(100.0), 1, np.inf, 1, build_kernel_bank(-2, 2))


def test_besov_requires_analytic():
    with pytest.raises(AnalyticClassViolation):
        besov_seminorm(phi_a(1.0), 1, np.inf, 1, build_kernel_bank(-2, 2))


def test_holder_of_square_root_at_most_one():
    f = shifted_power(0.5)
    val = holder_seminorm(f, 0.5, 1)
    assert 0.5 < val <= 1 + 1e-9
    finer = holder_seminorm(shifted_power(0.5, n_points=2 ** 17), 0.5, 1)
    assert finer == pytest.approx(val, rel=1e-3)


def test_holder_constant_is_zero():
    assert holder_seminorm(tone(0.0), 0.5, 1) == pytest.approx(0.0, abs=1e-14)


def test_holder_tone_matches_scalar_maximization(oracles):
    val = holder_seminorm(tone(1.0), 0.5, 1)
    ref = oracles["holder_tone_half"]
    assert val <= ref + 1e-12
    assert val == pytest.approx(ref, rel=1e-3)


def test_holder_order_mismatch():
    with pytest.raises(OrderMismatch):
        holder_seminorm(tone(1.0), 1.5, 1)


def test_modulus_unit_chord():
    assert modulus_of_f(tone(1.0), 1, math.pi) == pytest.approx(2.0, abs=1e-12)


def test_modulus_constant():
    assert modulus_of_f(tone(0.0), 1, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_modulus_doubling():
    f = freq_bump(0.5, 2.0)
    assert modulus_of_f(f, 2, 0.6) <= 4 * modulus_of_f(f, 2, 0.3) * (1 + 1e-9)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.9])
def test_omega_star_first_order_closed_form(alpha):
    assert omega_star(Modulus.power(alpha), 1, 1.0) == pytest.approx(1 / (1 - alpha), rel=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.7])
def test_omega_star_second_order_closed_form(alpha):
    assert omega_star(Modulus.power(alpha), 2, 1.0) == pytest.approx(1 / (2 - alpha), rel=1e-10)


def test_omega_star_lipschitz_diverges():
    with pytest.raises(DivergentTail):
        omega_star(Modulus.power(1.0), 1, 1.0)


# -- phi_a and f_(a) ------------------------------------------------------------

def test_phi1_l1_below_three_and_matches_oracle(oracles):
    val = phi_a_l1(1.0)
    assert val <= 3
    assert val == pytest.approx(oracles["phi1_l1"], rel=1e-10)


def test_phi_scale_invariance():
    assert phi_a_l1(2.0) == pytest.approx(phi_a_l1(1.0), rel=1e-8)


def test_phi_a_symmetric():
    k = phi_a(1.5)
    x = np.array([0.3, 2.0, 7.5])
    assert np.allclose(k(x), k(-x))


def test_f_sub_a_vanishes_below_a():
    assert f_sub_a(freq_bump(0.0, 1.0), 2.0).is_zero


def test_f_sub_a_zero():
    assert f_sub_a(tone(3.0, 0.0), 1.0).is_zero


def test_f_sub_a_matches_oracle(oracles):
    g = f_sub_a(freq_bump(0.5, 3.0), 1.0)
    for x, ref in oracles["fsub_bump_0.5_3_a1"].items():
        assert complex(g.synthesize(np.array([float(x)]))[0]) == pytest.approx(cplx(ref), abs=1e-12)


def test_f_sub_a_sup_ratio():
    f = freq_bump(0.5, 3.0)
    ratio = f_sub_a(f, 1.0).sup_norm() / f.sup_norm()
    assert ratio <= 4
    assert ratio == pytest.approx(0.40, abs=0.01)


def test_f_sub_a_two_routes(rng):
    f = random_band_limited(rng, 0.3, 3.0, count=2, tones=1)
    x = np.linspace(-8, 8, 41)
    a = f_sub_a(f, 1.0)
    freq = a.synthesize(x)
    time = f_sub_a_defa(f, 1.0, x)
    assert np.max(np.abs(freq - time)) <= 1e-8 * max(1.0, np.max(np.abs(freq)))


def test_phi_convolve_multiplier():
    f = freq_bump(2.0, 3.0)
    g = phi_a_convolve(f, 1.0)
    xi = np.array([2.5])
    assert complex(g.spectrum(xi)[0]) == pytest.approx(complex(f.spectrum(xi)[0]) / 2.5)


# -- families and synthesis -------------------------------------------------------

def test_bump_synthesis_matches_oracle(oracles):
    f = freq_bump(0.5, 2.0)
    for x, ref in oracles["bump_0.5_2"].items():
        assert complex(f.synthesize(np.array([float(x)]))[0]) == pytest.approx(cplx(ref), abs=1e-13)


def test_bump_fft_samples_close_to_synthesis():
    f = freq_bump(0.5, 2.0)
    j = np.arange(f.n_points // 2 - 50, f.n_points // 2 + 50)
    direct = f.synthesize(f.time_grid[j])
    assert np.max(np.abs(f.time_values[j] - direct)) < 1e-8


def test_bump_normalized():
    f = freq_bump(0.5, 2.0)
    assert complex(f(np.array([0.0]))[0]) == pytest.approx(1.0, abs=1e-13)
    assert f.sup_norm() == pytest.approx(1.0, abs=1e-12)


def test_tone_sum_evaluation():
    f = tone_sum([(1.0, 2.0), (3.0, -1j)])
    x = np.array([0.4])
    assert complex(f(x)[0]) == pytest.approx(2 * np.exp(0.4j) - 1j * np.exp(1.2j))


def test_shifted_power_branch():
    f = shifted_power(0.5)
    assert complex(f(np.array([0.0]))[0]) == pytest.approx(np.exp(0.25j * np.pi))


def test_log_family_lipschitz_constant():
    assert log_family(2.0).params["lipschitz"] == 0.5
    with pytest.raises(ValueError):
        log_family(0.0)


def test_custom_table_interpolates():
    xi = np.linspace(0.5, 2.0, 40)
    vals = np.exp(-((xi - 1.2) ** 2) * 10)
    f = custom_table(xi, vals)
    assert complex(f.spectrum(np.array([1.2]))[0]) == pytest.approx(1.0, abs=1e-3)


def test_derivative_of_tone():
    d = tone(2.0).derivative(1)
    assert d.atoms[0][1] == pytest.approx(2j)


def test_csv_export(tmp_path):
    f = freq_bump(0.5, 2.0, half_width=16, n_points=256)
    path = tmp_path / "f.csv"
    f.to_csv(path)
    rows = path.read_text().strip().splitlines()
    assert len(rows) == 257
    x, re, im = (float(v) for v in rows[129].split(","))
    assert x == pytest.approx(f.time_grid[128])
    assert complex(re, im) == pytest.approx(f.time_values[128], abs=1e-15)
