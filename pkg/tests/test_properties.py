import numpy as np
from hypothesis import given, strategies as st

from dissipert.dissipative_core import (cayley, classify, inverse_cayley,
                                        random_dissipative, random_hermitian,
                                        random_strict, resolvent)
from dissipert.function_spaces import (Modulus, build_kernel_bank, freq_bump,
                                       omega_star, tone)
from dissipert.operator_integrals import dd_product, dd_recursive, divided_difference
from dissipert.perturbation_lab import (PerturbationInstance, bound_check,
                                        schatten_report)

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 6)


@given(st.floats(1e-3, 1e3), st.sampled_from(["exp", "exp2"]))
def test_partition_of_unity(x, step):
    bank = build_kernel_bank(-14, 14, step)
    assert abs(bank.partition_sum(np.array([x, -x]))[0] - 1) < 1e-12


@given(seeds, st.integers(2, 4))
def test_divided_difference_symmetric(seed, m):
    rng = np.random.default_rng(seed)
    pts = list(rng.normal(size=m) + 1j * rng.uniform(0.1, 1, size=m))
    f = lambda z: np.exp(-1j * np.asarray(z))
    a = divided_difference(f, pts)
    b = divided_difference(f, list(rng.permutation(pts)))
    assert abs(a - b) < 1e-9 * max(1, abs(a))


@given(seeds, st.integers(2, 4))
def test_divided_difference_routes_agree(seed, m):
    rng = np.random.default_rng(seed)
    pts = list(3 * rng.normal(size=m) + 1j * rng.uniform(0.1, 1, size=m))
    f = lambda z: np.sin(np.asarray(z))
    assert abs(dd_recursive(f, pts) - dd_product(f, pts)) < 1e-8


@given(seeds, sizes, st.floats(0.1, 10))
def test_ex_ratio_at_most_one(seed, n, a):
    rng = np.random.default_rng(seed)
    bc = bound_check("ex", PerturbationInstance(random_strict(rng, n), random_strict(rng, n), tone(a)))
    assert bc.ratio <= 1 + 1e-10


@given(seeds, sizes, st.sampled_from([0.5, 1.0, 4.0]))
def test_sle_bound(seed, n, sigma):
    rng = np.random.default_rng(seed)
    L = random_strict(rng, n)
    M = L + random_hermitian(rng, n)
    bc = bound_check("sle", PerturbationInstance(L, M, freq_bump(sigma / 4, sigma)))
    assert bc.passed


@given(seeds, st.integers(2, 6), st.sampled_from(["strict", "mixed", "self_adjoint"]))
def test_cayley_round_trip(seed, n, kind):
    rng = np.random.default_rng(seed)
    L = random_dissipative(rng, n, kind)
    T = cayley(L)
    assert T.norm <= 1 + 1e-12
    back = inverse_cayley(T).entries
    assert np.linalg.norm(back - L) <= 1e-9 * max(1, np.linalg.norm(L))


@given(seeds, st.integers(2, 6), st.sampled_from(["strict", "mixed", "self_adjoint"]))
def test_ensemble_is_dissipative(seed, n, kind):
    rng = np.random.default_rng(seed)
    L = random_dissipative(rng, n, kind)
    h = (L - L.conj().T) / 2j
    assert np.linalg.eigvalsh(h).min() >= -1e-12
    classify(L)


@given(seeds, st.integers(2, 6), st.floats(0.05, 5), st.floats(-5, 5))
def test_resolvent_bound(seed, n, y, x):
    rng = np.random.default_rng(seed)
    L = random_dissipative(rng, n, "mixed")
    R = resolvent(L, x - 1j * y)
    assert np.linalg.norm(R, 2) <= (1 + 1e-9) / y


@given(seeds, st.integers(1, 6), st.integers(1, 6))
def test_schatten_monotone(seed, r, c):
    x = np.random.default_rng(seed).normal(size=(r, c))
    norms = schatten_report(x, ps=[0.5, 1, 2, 4, np.inf]).norms
    vals = [norms[p] for p in (0.5, 1, 2, 4, np.inf)]
    assert all(a >= b * (1 - 1e-12) for a, b in zip(vals, vals[1:]))


@given(st.floats(0.05, 0.95), st.integers(1, 3), st.floats(1e-3, 1e2))
def test_omega_star_lower_bound(alpha, m, x):
    w = Modulus.power(alpha)
    assert omega_star(w, m, x) >= w(x) * (1 - 2.0 ** -m) / m * (1 - 1e-9)


@given(st.floats(0.05, 0.95), st.integers(1, 3), st.floats(1e-3, 1e2))
def test_omega_star_monotone(alpha, m, x):
    w = Modulus.power(alpha)
    assert omega_star(w, m, 2 * x) >= omega_star(w, m, x)
