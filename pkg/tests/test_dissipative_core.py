import threading

import numpy as np
import pytest

from dissipert.dissipative_core import (
    EnsembleSpec, as_contraction, cayley, circle_density, classify, compress,
    dilation_spectral_atoms, duhamel_difference, format_matrix,
    inverse_cayley, parse_matrix, random_mixed, random_strict, random_unitary,
    read_matrix, resolvent, schaffer_dilation, semi_spectral_density,
    semigroup, split_sa_pure, trial_rng, write_matrix)
from dissipert.errors import (HalfPlaneViolation, NegativeTime, NotContraction,
                              NotDissipative, ShapeError, UnitEigenvalue)


def test_classify_scalars():
    assert classify([[1j]]).classification == "strict"
    assert classify([[0.0]]).classification == "self_adjoint"
    with pytest.raises(NotDissipative):
        classify([[-1j]])


def test_classify_mixed(rng):
    assert classify(random_mixed(rng, 4)).classification == "mixed"


def test_classify_rejects_non_square():
    with pytest.raises(ShapeError):
        classify(np.zeros((2, 3)))


def test_entries_read_only():
    L = classify([[1j, 0], [0, 2j]])
    with pytest.raises(ValueError):
        L.entries[0, 0] = 0


def test_eigendata_computed_once(rng):
    L = classify(random_strict(rng, 6))
    threads = [threading.Thread(target=lambda: L.eigendata) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert L.eig_computations == 1


def test_cayley_scalars():
    assert cayley([[1j]]).entries[0, 0] == pytest.approx(0)
    assert cayley([[2j]]).entries[0, 0] == pytest.approx(1 / 3)


def test_cayley_round_trip(rng):
    L = random_strict(rng, 5)
    T = cayley(L)
    assert T.norm < 1
    back = inverse_cayley(T).entries
    assert np.max(np.abs(back - L)) < 1e-10


def test_cayley_of_self_adjoint_is_unitary(rng):
    h = random_strict(rng, 4)
    h = (h + h.conj().T) / 2
    t = cayley(h).entries
    assert np.allclose(t.conj().T @ t, np.eye(4), atol=1e-12)


def test_inverse_cayley_scalars():
    assert inverse_cayley(np.array([[0.0]])).entries[0, 0] == pytest.approx(1j)
    assert inverse_cayley(np.array([[1 / 3]])).entries[0, 0] == pytest.approx(2j)
    with pytest.raises(UnitEigenvalue):
        inverse_cayley(np.array([[1.0]]))


def test_as_contraction_rejects_large():
    with pytest.raises(NotContraction):
        as_contraction(np.array([[2.0]]))


def test_resolvent_scalars():
    r = resolvent([[1j]], -1j)
    assert r[0, 0] == pytest.approx(1 / 2j)
    assert np.linalg.norm(resolvent([[0.0]], -1j), 2) == pytest.approx(1.0)
    with pytest.raises(HalfPlaneViolation):
        resolvent([[1j]], 1j)


def test_resolvent_bound(rng):
    r = resolvent(random_strict(rng, 6), -0.1j)
    assert np.linalg.norm(r, 2) <= 10 + 1e-9


def test_semigroup_examples():
    assert semigroup([[1j]], 1.0)[0, 0] == pytest.approx(np.exp(-1))
    assert np.allclose(semigroup(np.diag([1.0, 1j]), 0.0), np.eye(2))
    assert np.allclose(semigroup(np.diag([1.0, 1j]), 2.0), np.diag([np.exp(2j), np.exp(-2)]))
    with pytest.raises(NegativeTime):
        semigroup([[1j]], -1.0)


def test_semigroup_is_contraction(rng):
    L = random_strict(rng, 6)
    for t in (0.1, 1.0, 10.0):
        assert np.linalg.norm(semigroup(L, t), 2) <= 1 + 1e-12


def test_duhamel_scalar_witness():
    d = duhamel_difference(np.array([[1j]]), np.array([[2j]]), 1.0)
    assert d[0, 0] == pytest.approx(np.exp(-1) - np.exp(-2), abs=1e-12)


@pytest.mark.parametrize("order", ["LM", "ML"])
def test_duhamel_identity(rng, order):
    L = random_strict(rng, 5)
    M = random_strict(rng, 5)
    a = 1.7
    direct = semigroup(L, a) - semigroup(M, a)
    quad = duhamel_difference(L, M, a, order)
    assert np.linalg.norm(quad - direct) < 1e-8 * np.linalg.norm(direct)


def test_sot_derivative(rng):
    L = random_strict(rng, 4)
    M = random_strict(rng, 4)
    a, t = 2.0, 0.7
    g = lambda s: semigroup(L, s) @ semigroup(M, a - s)
    errs = []
    for h in (1e-2, 1e-3):
        fd = (g(t + h) - g(t - h)) / (2 * h)
        exact = 1j * semigroup(L, t) @ (L - M) @ semigroup(M, a - t)
        errs.append(np.linalg.norm(fd - exact))
    assert errs[1] < errs[0] / 50


def test_split_examples(rng):
    sp = split_sa_pure(np.diag([3.0, 1j]))
    assert np.allclose(sp.P_sa, np.diag([1, 0]))
    assert np.allclose(sp.L0, [[3.0]])
    assert np.allclose(sp.L1, [[1j]])
    assert np.allclose(split_sa_pure(random_strict(rng, 4)).P_sa, 0)
    h = random_strict(rng, 3)
    h = (h + h.conj().T) / 2
    assert np.allclose(split_sa_pure(h).P_p, 0)


def test_split_reduces_mixed(rng):
    L = random_mixed(rng, 5)
    sp = split_sa_pure(L)
    assert np.allclose(sp.P_sa @ L, L @ sp.P_sa, atol=1e-10)
    assert np.allclose(sp.P_sa + sp.P_p, np.eye(5), atol=1e-10)


def test_density_poisson_kernel():
    dens = semi_spectral_density([[1j]])
    g = dens.local(np.array([0.0, 2.0]))
    assert g[0].real.item() == pytest.approx(1 / np.pi, rel=1e-12)
    assert g[1].real.item() == pytest.approx(1 / (5 * np.pi), rel=1e-12)


def test_density_real_scalar_is_atom():
    dens = semi_spectral_density([[0.7]])
    assert len(dens.atoms) == 1
    pos, mass = dens.atoms[0]
    assert pos == pytest.approx(0.7)
    assert np.allclose(mass, [[1.0]])
    assert dens.basis.shape[1] == 0


def test_density_mass_closure(rng):
    dens = semi_spectral_density(random_strict(rng, 4))
    assert dens.mass_defect() < 1e-6
    assert dens.min_eigenvalue() > -1e-12


def test_density_mass_closure_mixed(rng):
    dens = semi_spectral_density(random_mixed(rng, 5))
    assert dens.mass_defect() < 1e-6


def test_density_reproduces_semigroup(rng):
    L = random_strict(rng, 4)
    dens = semi_spectral_density(L)
    val = dens.integrate(lambda x: np.exp(1j * x), tones=[(1.0, 1.0)])
    assert np.max(np.abs(val - semigroup(L, 1.0))) < 1e-8


def test_cayley_pullback_scalar():
    # L = [[i]]: T = 0 has the normalized Lebesgue density 1/(2 pi) on the circle,
    # and x = omega(e^{i theta}) pulls it back to the Poisson kernel
    theta = np.array([0.4, 1.3, 2.9])
    ct = circle_density(np.array([[0.0]]), theta)[:, 0, 0].real
    x = -1 / np.tan(theta / 2)
    dtheta_dx = 2 / (1 + x ** 2)
    g = semi_spectral_density([[1j]]).local(x)[:, 0, 0].real
    assert np.allclose(ct * dtheta_dx, g, rtol=1e-12)


def test_dilation_scalar_zero():
    U, c = schaffer_dilation(np.array([[0.0]]), 3)
    assert compress(U, 1, c, 0)[0, 0] == pytest.approx(1.0)
    assert compress(U, 1, c, 1)[0, 0] == pytest.approx(0.0)


def test_dilation_moments_exact():
    U, c = schaffer_dilation(np.array([[1 / 3]]), 4)
    assert np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-14)
    for k in range(5):
        assert abs(compress(U, 1, c, k)[0, 0] - (1 / 3) ** k) < 1e-12


def test_dilation_of_unitary(rng):
    V = random_unitary(rng, 3)
    U, c = schaffer_dilation(V, 3)
    for k in range(4):
        assert np.allclose(compress(U, 3, c, k), np.linalg.matrix_power(V, k), atol=1e-12)


def test_dilation_random_contraction(rng):
    T = cayley(random_strict(rng, 3)).entries
    U, c = schaffer_dilation(T, 5)
    atoms = dilation_spectral_atoms(U, 3, c)
    for k in range(6):
        tk = np.linalg.matrix_power(T, k)
        assert np.max(np.abs(compress(U, 3, c, k) - tk)) < 1e-12
        assert np.max(np.abs(sum(np.exp(1j * k * a) * m for a, m in atoms) - tk)) < 1e-10


def test_trial_rng_deterministic():
    a = trial_rng(7, 3).normal(size=4)
    b = trial_rng(7, 3).normal(size=4)
    c = trial_rng(7, 4).normal(size=4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_ensemble_generation():
    mats = EnsembleSpec(n=3, count=5, seed=2, kind="strict").generate()
    assert len(mats) == 5
    assert all(classify(m).classification == "strict" for m in mats)
    again = EnsembleSpec(n=3, count=5, seed=2, kind="strict").generate()
    assert all(np.array_equal(a, b) for a, b in zip(mats, again))


def test_matrix_file_round_trip(tmp_path, rng):
    a = random_strict(rng, 4)
    p = tmp_path / "m.txt"
    write_matrix(p, a)
    assert np.array_equal(read_matrix(p), a)
    text = format_matrix(a)
    assert text.splitlines()[0] == "4"
    assert len(text.splitlines()[1].split()) == 4


def test_matrix_file_errors():
    with pytest.raises(ShapeError):
        parse_matrix("")
    with pytest.raises(ShapeError):
        parse_matrix("2\n1,0 0,0\n")
    with pytest.raises(ShapeError):
        parse_matrix("2\n1,0 0,0\n0,0\n")
