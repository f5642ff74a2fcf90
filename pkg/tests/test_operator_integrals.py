import itertools

import numpy as np
import pytest

from conftest import cplx
from dissipert.dissipative_core import random_hermitian, random_strict
from dissipert.errors import ShapeError, Unsupported
from dissipert.function_spaces import freq_bump, random_band_limited, tone
from dissipert.functional_calculus import f_of_L_oracle, matrix_function
from dissipert.operator_integrals import (
    DividedDifference, dd_product, dd_recursive, divided_difference,
    evaluate_doi, evaluate_moi, fsub_values, rep_first_order, rep_order,
    rep_second_order, schur_doi_selfadjoint, second_duhamel)

square = lambda x: np.asarray(x) ** 2


def test_dd_square_pair():
    assert divided_difference(square, [1, 3]) == pytest.approx(4)


def test_dd_square_triple(rng):
    pts = rng.normal(size=3)
    assert divided_difference(square, pts) == pytest.approx(1)


def test_dd_confluent_tone():
    f = tone(2.0)
    assert divided_difference(f, [0.3, 0.3]) == pytest.approx(2j * np.exp(0.6j), abs=1e-12)


def test_dd_recursion_matches_product(rng):
    f = tone(1.7)
    pts = rng.uniform(-2, 2, 4)
    assert dd_recursive(f, pts) == pytest.approx(dd_product(f, pts), rel=1e-10)


def test_dd_symmetric(rng):
    f = freq_bump(0.3, 2.0)
    pts = rng.uniform(-2, 2, 3)
    ref = divided_difference(f, pts)
    for perm in itertools.permutations(pts):
        assert divided_difference(f, perm) == pytest.approx(ref, rel=1e-10)


def test_dd_cache_and_order_check():
    dd = DividedDifference(tone(1.0), 1)
    a = dd(0.1, 0.5)
    assert dd(0.5, 0.1) == a
    assert len(dd.cache) == 1
    with pytest.raises(ShapeError):
        dd(0.1)


def test_fsub_values_is_shifted_function():
    f = tone(3.0)
    z = np.array([0.2, -1.0])
    val = fsub_values(f, np.array([1.0]), z)
    assert np.allclose(val[0], (2 / 3) * np.exp(2j * z))


def test_rep_sparsity_below_band():
    rep = rep_first_order(freq_bump(0.0, 0.5), sigma=1.0)
    assert rep.size > 0
    s = rep.params[np.arange(rep.size), rep.fsub_slot]
    assert np.all(s <= 0.5 + 1e-12)


def test_rep_zero_function():
    assert rep_first_order(tone(1.0, 0.0)).size == 0


def test_rep_first_order_lattice():
    f = freq_bump(0.3, 0.9)
    rep = rep_first_order(f)
    x = np.linspace(-3, 3, 9)
    lat = rep.lattice([x, x])
    ref = np.array([[divided_difference(f, [a, b]) for b in x] for a in x])
    assert np.max(np.abs(lat - ref)) < 1e-6


def test_rep_second_order_confluent_origin(oracles):
    rep = rep_second_order(freq_bump(0.0, 1.0))
    val = rep.evaluate([[0, 0, 0]])[0]
    assert val == pytest.approx(cplx(oracles["bump_0_1_dd2_origin"]), abs=1e-9)


def test_rep_second_order_symmetry(rng):
    rep = rep_second_order(freq_bump(0.3, 1.5))
    pts = rng.uniform(-2, 2, (4, 3))
    a = rep.evaluate(pts)
    b = rep.evaluate(pts[:, ::-1])
    assert np.max(np.abs(a - b)) < 1e-9


def test_rep_third_order_matches_dd(rng):
    f = freq_bump(0.3, 1.2)
    rep = rep_order(f, 3, extent=3)
    pts = rng.uniform(-2, 2, (3, 4))
    vals = rep.evaluate(pts)
    ref = [divided_difference(f, p) for p in pts]
    assert np.max(np.abs(vals - ref)) < 1e-8


def test_rep_order_limit():
    with pytest.raises(Unsupported):
        rep_order(freq_bump(0.3, 1.2), 4)


def test_rep_bound_estimate_below_bernstein():
    f = freq_bump(0.3, 0.9)
    assert rep_first_order(f).bound_estimate <= 8 * 0.9 * f.sup_norm()


def test_rep_csv(tmp_path):
    rep = rep_first_order(freq_bump(0.3, 0.9))
    p = tmp_path / "rep.csv"
    rep.to_csv(p)
    lines = p.read_text().strip().splitlines()
    assert len(lines) == rep.size + 1
    assert lines[0].startswith("slots,fsub_slot")


def test_doi_matches_oracle_difference(rng):
    f = freq_bump(0.25, 4.0)
    L = random_strict(rng, 6)
    M = random_strict(rng, 6)
    rep = rep_first_order(f, extent=6)
    val = evaluate_doi(rep, L, L - M, M)
    ref = f_of_L_oracle(f, L).value - f_of_L_oracle(f, M).value
    assert np.linalg.norm(val - ref) < 1e-6 * np.linalg.norm(ref)


def test_doi_zero_q(rng):
    L = random_strict(rng, 3)
    rep = rep_first_order(freq_bump(0.3, 1.0))
    assert np.allclose(evaluate_doi(rep, L, np.zeros((3, 3)), L), 0)


def test_doi_lattice_and_terms_agree(rng):
    L = random_strict(rng, 3)
    M = random_strict(rng, 3)
    rep = rep_first_order(freq_bump(0.3, 1.0), extent=6)
    a = evaluate_doi(rep, L, L - M, M, method="lattice")
    b = evaluate_doi(rep, L, L - M, M, method="terms")
    assert np.max(np.abs(a - b)) < 1e-10


def test_moi_scalar_product_formula():
    f = freq_bump(0.3, 1.2)
    rep = rep_second_order(f, extent=4)
    l1, l2, l3, k1, k2 = 0.2 + 0.5j, -0.4 + 0.3j, 1.0 + 0.2j, 0.7, -1.3
    val = evaluate_moi(rep, [np.array([[l1]]), np.array([[l2]]), np.array([[l3]])],
                       [np.array([[k1]]), np.array([[k2]])])[0, 0]
    assert val == pytest.approx(divided_difference(f, [l1, l2, l3]) * k1 * k2, abs=1e-9)


def test_moi_zero_slot(rng):
    L = random_strict(rng, 3)
    rep = rep_second_order(freq_bump(0.3, 1.2))
    k = random_hermitian(rng, 3)
    assert np.allclose(evaluate_moi(rep, [L, L, L], [k, np.zeros((3, 3))]), 0)


def test_moi_first_order_is_doi(rng):
    L, M = random_strict(rng, 3), random_strict(rng, 3)
    q = random_hermitian(rng, 3)
    rep = rep_first_order(freq_bump(0.3, 1.2), extent=6)
    assert np.allclose(evaluate_moi(rep, [L, M], [q]), evaluate_doi(rep, L, q, M))


def test_triple_integral_second_difference(rng):
    f = freq_bump(0.25, 2.0)
    L = random_strict(rng, 4)
    K = 0.5 * random_hermitian(rng, 4)
    mats = [L, L + K, L + 2 * K]
    rep = rep_second_order(f, extent=6)
    val = 2 * evaluate_moi(rep, mats, [K, K])
    ref = sum(c * f_of_L_oracle(f, a).value for c, a in zip((1, -2, 1), mats))
    assert np.linalg.norm(val - ref) < 1e-5 * np.linalg.norm(ref)


def test_second_duhamel(rng):
    L = random_strict(rng, 3)
    K = 0.4 * random_hermitian(rng, 3)
    x = 1.3
    val = second_duhamel(L, K, x)
    e = lambda a: matrix_function(tone(x), a)
    ref = e(L + 2 * K) - 2 * e(L + K) + e(L)
    assert np.max(np.abs(val - ref)) < 1e-7


def test_schur_doi_square():
    A = np.diag([0.0, 1.0])
    Q = np.array([[1.0, 2.0], [3.0, 4.0]])
    val = schur_doi_selfadjoint(square, A, A, Q)
    assert np.allclose(val, np.array([[0.0, 1.0], [1.0, 2.0]]) * Q)


def test_schur_doi_identity_gives_derivative():
    f = tone(1.5)
    A = np.diag([0.2, -0.7])
    val = schur_doi_selfadjoint(f, A, A, np.eye(2))
    assert np.allclose(val, np.diag(1.5j * np.exp(1.5j * np.diag(A))))


def test_schur_doi_matches_difference(rng):
    f = random_band_limited(rng, 0.3, 2.0)
    A = random_hermitian(rng, 5)
    B = random_hermitian(rng, 5)
    val = schur_doi_selfadjoint(f, A, B, A - B)
    ref = matrix_function(f, A) - matrix_function(f, B)
    assert np.linalg.norm(val - ref) < 1e-8
