"""Finite dissipative matrices and their basic constructions.

A matrix ``L`` is dissipative when ``Im L = (L - L*)/(2i)`` is positive
semidefinite.  For finite matrices dissipative already means maximal
dissipative, so no domain checks are needed.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy import special

from ._quad import gl_on_edges, panel_edges
from .errors import (HalfPlaneViolation, MassDefect, NegativeTime,
                     NotContraction, NotDissipative, ShapeError, SingularShift,
                     UnitEigenvalue, Unsupported)

TOL_PSD_REL = 1e-10
TOL_MASS = 1e-6
TOL_RT = 1e-10
TOL_CONTR = 1e-12
TOL_DIL = 1e-10
COND_LIMIT = 1e8
SPLIT_THRESHOLD = 1e-8


def _square(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermitian_part(a):
    return (a + a.conj().T) / 2


def imaginary_part(a):
    return (a - a.conj().T) / 2j


class Eigendata(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray
    inverse: np.ndarray
    condition: float


class DissipativeMatrix:
    """Dissipative matrix with cached classification and eigendata.

    Eigendata are computed on first access, exactly once even under
    concurrent access.
    """

    def __init__(self, entries, im_part, im_eigs, tol_psd, classification):
        self._entries = entries
        self._entries.setflags(write=False)
        self._im_part = im_part
        self._im_eigs = im_eigs
        self.tol_psd = tol_psd
        self.classification = classification
        self._lock = threading.Lock()
        self._eig = None
        self.eig_computations = 0

    @property
    def entries(self):
        return self._entries

    @property
    def im_part(self):
        return self._im_part

    @property
    def re_part(self):
        return hermitian_part(self._entries)

    @property
    def im_eigenvalues(self):
        return self._im_eigs

    @property
    def n(self):
        return self._entries.shape[0]

    @property
    def shape(self):
        return self._entries.shape

    @property
    def norm(self):
        return float(np.linalg.norm(self._entries, 2))

    def __array__(self, dtype=None, copy=None):
        return self._entries if dtype is None else self._entries.astype(dtype)

    def __repr__(self):
        return f"DissipativeMatrix(n={self.n}, {self.classification})"

    @property
    def eigendata(self) -> Eigendata:
        if self._eig is None:
            with self._lock:
                if self._eig is None:
                    self._eig = self._compute_eig()
        return self._eig

    def _compute_eig(self):
        self.eig_computations += 1
        w, v = np.linalg.eig(self._entries)
        cond = np.linalg.cond(v)
        if np.isfinite(cond):
            vinv = np.linalg.inv(v)
        else:
            vinv = np.full_like(v, np.nan)
        return Eigendata(w, v, vinv, float(cond))

    @property
    def eigenvalues(self):
        return self.eigendata.values


def classify(L, tol_psd=None) -> DissipativeMatrix:
    """Check dissipativity and classify as strict, self_adjoint or mixed."""
    if isinstance(L, DissipativeMatrix):
        return L
    a = _square(L).copy()
    norm = float(np.linalg.norm(a, 2)) if a.size else 0.0
    tol = TOL_PSD_REL * norm if tol_psd is None else float(tol_psd)
    im = imaginary_part(a)
    im_eigs = np.linalg.eigvalsh(im)
    if im_eigs.size and im_eigs[0] < -tol:
        raise NotDissipative(
            f"Im L has eigenvalue {im_eigs[0]:.3e} below -{tol:.1e}")
    if im_eigs.size == 0 or np.max(np.abs(im_eigs)) <= tol:
        kind = "self_adjoint"
    elif im_eigs[0] > tol:
        kind = "strict"
    else:
        kind = "mixed"
    return DissipativeMatrix(a, im, im_eigs, tol, kind)


@dataclass(frozen=True, eq=False)
class ContractionMatrix:
    entries: np.ndarray
    one_not_eigenvalue: bool = True

    @property
    def norm(self):
        return float(np.linalg.norm(self.entries, 2))

    @property
    def n(self):
        return self.entries.shape[0]


def as_contraction(T, tol=TOL_CONTR) -> ContractionMatrix:
    if isinstance(T, ContractionMatrix):
        return T
    t = _square(T)
    if np.linalg.norm(t, 2) > 1 + tol:
        raise NotContraction(f"norm {np.linalg.norm(t, 2):.15g} exceeds 1")
    smin = np.linalg.svd(np.eye(t.shape[0]) - t, compute_uv=False)
    return ContractionMatrix(t, bool(smin.size == 0 or smin[-1] > 1e-12))


def cayley(L) -> ContractionMatrix:
    """T = (L - iI)(L + iI)^{-1}."""
    L = classify(L)
    a = L.entries
    eye = np.eye(L.n)
    shift = a + 1j * eye
    s = np.linalg.svd(shift, compute_uv=False)
    if s.size and s[-1] < 1e-14 * max(1.0, s[0]):
        raise SingularShift("L + iI is numerically singular")
    # L commutes with (L + iI)^{-1}
    t = np.linalg.solve(shift, a - 1j * eye)
    smin = np.linalg.svd(eye - t, compute_uv=False) if L.n else np.array([1.0])
    return ContractionMatrix(t, bool(smin[-1] > 1e-12))


def inverse_cayley(T, tol_psd=None) -> DissipativeMatrix:
    """L = i(I + T)(I - T)^{-1}."""
    t = T.entries if isinstance(T, ContractionMatrix) else _square(T)
    eye = np.eye(t.shape[0])
    s = np.linalg.svd(eye - t, compute_uv=False)
    if s.size and s[-1] < 1e-12:
        raise UnitEigenvalue("1 is an eigenvalue of T")
    return classify(1j * np.linalg.solve(eye - t, eye + t), tol_psd)


def resolvent(L, lam: complex) -> np.ndarray:
    """(L - lam I)^{-1} for Im lam < 0, where its norm is at most 1/|Im lam|."""
    L = classify(L)
    if np.imag(lam) >= 0:
        raise HalfPlaneViolation("resolvent bound needs Im lambda < 0")
    return np.linalg.inv(L.entries - lam * np.eye(L.n))


def semigroup(L, t: float) -> np.ndarray:
    """exp(itL) by scaling and squaring."""
    if t < 0:
        raise NegativeTime("the contraction semigroup is defined for t >= 0")
    a = L.entries if isinstance(L, DissipativeMatrix) else _square(L)
    return sla.expm(1j * t * a)


def semigroup_stack(L, ts) -> np.ndarray:
    """exp(i t L) for an array of t >= 0, shape (len(ts), n, n)."""
    ts = np.asarray(ts, dtype=float)
    if ts.size and ts.min() < 0:
        raise NegativeTime("the contraction semigroup is defined for t >= 0")
    a = L.entries if isinstance(L, DissipativeMatrix) else _square(L)
    if ts.size == 0:
        return np.empty((0,) + a.shape, complex)
    return sla.expm(1j * ts[:, None, None] * a[None])


def duhamel_difference(L, M, a: float, order: str = "LM", panels=None):
    """i * integral_0^a exp(itL)(L - M)exp(i(a-t)M) dt by Gauss-Legendre.

    ``order="ML"`` uses the mirrored integrand exp(itM)(L - M)exp(i(a-t)L),
    which gives the same value.
    """
    la = np.asarray(L, dtype=complex)
    ma = np.asarray(M, dtype=complex)
    if order == "ML":
        first, second = ma, la
    else:
        first, second = la, ma
    scale = max(np.linalg.norm(la, 2), np.linalg.norm(ma, 2), 1.0)
    if panels is None:
        panels = max(2, int(np.ceil(a * scale / 2.0)))
    t, w = gl_on_edges(np.linspace(0.0, a, panels + 1), 16)
    e1 = semigroup_stack(first, t)
    e2 = semigroup_stack(second, a - t)
    integrand = e1 @ (la - ma)[None] @ e2
    return 1j * np.tensordot(w, integrand, axes=1)


# ---------------------------------------------------------------------------
# Self-adjoint / pure splitting
# ---------------------------------------------------------------------------

class Split(NamedTuple):
    P_sa: np.ndarray
    P_p: np.ndarray
    L0: np.ndarray
    L1: np.ndarray
    Q_sa: np.ndarray
    Q_p: np.ndarray


def _null_space(a, thr):
    if a.shape[1] == 0:
        return np.zeros((0, 0), complex)
    u, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > thr))
    return vh[rank:].conj().T


def split_sa_pure(L, threshold=SPLIT_THRESHOLD) -> Split:
    """Orthogonal decomposition into the self-adjoint and pure parts.

    Starts from ker Im L and keeps the vectors whose images under L and L*
    stay in the subspace, until the dimension stabilizes.
    """
    L = classify(L)
    a = L.entries
    n = L.n
    scale = max(1.0, L.norm)
    thr = threshold * scale
    w, v = np.linalg.eigh(L.im_part)
    q = v[:, np.abs(w) <= thr]
    while q.shape[1]:
        proj = np.eye(n) - q @ q.conj().T
        stacked = np.vstack([proj @ a @ q, proj @ a.conj().T @ q])
        c = _null_space(stacked, thr)
        if c.shape[1] == q.shape[1]:
            break
        q = q @ c
        q, _ = np.linalg.qr(q)
    if q.shape[1]:
        q, _ = np.linalg.qr(q)
    p_sa = q @ q.conj().T
    p_p = np.eye(n) - p_sa
    if q.shape[1] == n:
        q_p = np.zeros((n, 0), complex)
    elif q.shape[1] == 0:
        q_p = np.eye(n, dtype=complex)
    else:
        w2, v2 = np.linalg.eigh(hermitian_part(p_p))
        q_p = v2[:, w2 > 0.5]
    l0 = q.conj().T @ a @ q
    l1 = q_p.conj().T @ a @ q_p
    return Split(p_sa, p_p, hermitian_part(l0), l1, q, q_p)


# ---------------------------------------------------------------------------
# Semi-spectral density
# ---------------------------------------------------------------------------

def _tail_tone(kappa, mu, x0, side):
    """Exact tail integral of exp(i kappa x)/(x - mu) beyond +-x0 (kappa > 0)."""
    if side > 0:
        return np.exp(1j * kappa * mu) * special.exp1(-1j * kappa * (x0 - mu))
    return -np.exp(1j * kappa * mu) * special.exp1(1j * kappa * (x0 + mu))


@dataclass(eq=False)
class SemiSpectralDensity:
    """Density g(x) of the pure part on a quadrature grid plus real atoms.

    On the pure part g(x) = (1/pi)(L - x)^{-1} Im(L) (L* - x)^{-1}, written
    as the partial fractions (1/2 pi i) sum_k [P_k*/(conj(l_k) - x) - P_k/(l_k - x)]
    of the eigen-expansion of the resolvent.  Atoms carry the spectral
    measure of the self-adjoint part.
    """

    x_grid: np.ndarray
    weights: np.ndarray
    half_width: float
    atoms: list
    basis: np.ndarray
    poles: np.ndarray
    projectors: np.ndarray
    pure_block: np.ndarray
    direct: bool = False
    _tail_mass: np.ndarray = None
    _density: np.ndarray = None
    mass: np.ndarray = field(default=None)

    @property
    def n(self):
        return self.basis.shape[0]

    def local(self, x):
        """Density of the pure block (in its own coordinates) at points x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        m = self.pure_block.shape[0]
        if m == 0:
            return np.zeros((x.size, 0, 0), complex)
        if self.direct:
            a = self.pure_block
            im = imaginary_part(a)
            out = np.empty((x.size, m, m), complex)
            eye = np.eye(m)
            for j, xj in enumerate(x):
                r = np.linalg.solve(a - xj * eye, eye)
                out[j] = r @ im @ r.conj().T / np.pi
            return out
        lam = self.poles
        p = self.projectors
        c = 1.0 / (lam[None, :] - x[:, None])
        cb = 1.0 / (lam.conj()[None, :] - x[:, None])
        res = (np.einsum("jk,kab->jab", cb, p.conj().transpose(0, 2, 1))
               - np.einsum("jk,kab->jab", c, p))
        return res / (2j * np.pi)

    def embed(self, block):
        q = self.basis
        return q @ block @ q.conj().T

    @property
    def density(self):
        """Density samples on x_grid in the full space, shape (k, n, n)."""
        if self._density is None:
            q = self.basis
            loc = self.local(self.x_grid)
            self._density = np.einsum("ia,jab,kb->jik", q, loc, q.conj())
        return self._density

    def _weighted_resolvent_sums(self, values):
        """sum_j w_j values_j P/(lam - x_j) terms, in local coordinates."""
        w = self.weights * values
        lam = self.poles
        s = (w[:, None] / (lam[None, :] - self.x_grid[:, None])).sum(0)
        sb = (w[:, None] / (lam.conj()[None, :] - self.x_grid[:, None])).sum(0)
        return s, sb

    def integrate(self, f, tones=()):
        """integral f(x) dE(x) over the whole line, in the full space.

        ``f`` is sampled on x_grid; ``tones`` lists (kappa, coefficient) pairs
        already included in f whose tails beyond the grid are added exactly.
        """
        m = self.pure_block.shape[0]
        total = np.zeros((self.n, self.n), complex)
        if m:
            vals = np.asarray(f(self.x_grid), dtype=complex)
            if self.direct:
                loc = np.tensordot(self.weights * vals, self.local(self.x_grid), axes=1)
            else:
                s, sb = self._weighted_resolvent_sums(vals)
                for kappa, coef in tones:
                    if kappa == 0:
                        continue
                    for k, lam in enumerate(self.poles):
                        for side in (1, -1):
                            # s holds integrals of 1/(lam - x) = -1/(x - lam)
                            s[k] -= coef * _tail_tone(kappa, lam, self.half_width, side)
                            sb[k] -= coef * _tail_tone(kappa, np.conj(lam), self.half_width, side)
                p = self.projectors
                loc = (np.tensordot(sb, p.conj().transpose(0, 2, 1), axes=1)
                       - np.tensordot(s, p, axes=1)) / (2j * np.pi)
                const = sum(c for k, c in tones if k == 0)
                if const:
                    loc = loc + const * self._tail_mass
            total += self.embed(loc)
        for x0, proj in self.atoms:
            total += complex(f(np.array([x0]))[0]) * proj
        return total

    def total_mass(self):
        return self.integrate(lambda x: np.ones_like(x, dtype=complex),
                              tones=((0.0, 1.0),))

    def mass_defect(self):
        return float(np.linalg.norm(self.total_mass() - np.eye(self.n), 2))

    def min_eigenvalue(self):
        d = self.density
        if d.size == 0:
            return 0.0
        return float(np.min(np.linalg.eigvalsh(hermitian_part_stack(d))))


def hermitian_part_stack(a):
    return (a + np.conj(np.swapaxes(a, -1, -2))) / 2


def _density_edges(poles, half_width, max_panel):
    edges = [np.linspace(-half_width, half_width,
                         int(np.ceil(2 * half_width / max_panel)) + 1)]
    for lam in poles:
        c, d = lam.real, max(lam.imag, 1e-12)
        k = np.arange(-6, 40)
        r = d * 2.0 ** (k / 2.0)
        r = r[r < 2 * half_width]
        edges.append(c + r)
        edges.append(c - r)
        edges.append([c])
    e = np.concatenate(edges)
    e = e[(e >= -half_width) & (e <= half_width)]
    return np.unique(np.round(e, 14))


def semi_spectral_density(L, x_grid=None, half_width=None, max_panel=1.0,
                          tol_mass=TOL_MASS, max_extend=8) -> SemiSpectralDensity:
    """Semi-spectral density of L: absolutely continuous on the pure part, atoms on the self-adjoint part.

    ``x_grid`` may be an array of panel edges; by default the edges cover
    [-X, X] with X = max(|Re eig| + 10 r, 64), r the spectral radius of
    Im L, graded towards the real parts of the eigenvalues.  The part of the
    mass beyond X is integrated exactly after x = X/u, and X is doubled
    until the mass defect is below ``tol_mass``.
    """
    L = classify(L)
    sp = split_sa_pure(L)
    atoms = []
    if sp.Q_sa.shape[1]:
        mu, u = np.linalg.eigh(sp.L0)
        vec = sp.Q_sa @ u
        for k in range(mu.size):
            atoms.append((float(mu[k]), np.outer(vec[:, k], vec[:, k].conj())))
    l1 = sp.L1
    m = l1.shape[0]
    if m:
        lam, v = np.linalg.eig(l1)
        cond = np.linalg.cond(v)
        direct = not np.isfinite(cond) or cond > COND_LIMIT
        vinv = np.linalg.inv(v) if not direct else None
        proj = (np.einsum("ak,kb->kab", v, vinv) if not direct
                else np.zeros((0, m, m), complex))
        r = float(np.max(np.abs(np.linalg.eigvalsh(imaginary_part(l1)))))
        x0 = float(np.max(np.abs(lam.real))) + 10 * r
    else:
        lam = np.zeros(0, complex)
        proj = np.zeros((0, 0, 0), complex)
        direct = False
        x0 = 1.0
    if half_width is None:
        half_width = max(x0, 64.0)
    for attempt in range(max_extend + 1):
        if x_grid is not None:
            edges = np.asarray(x_grid, dtype=float)
            half_width = float(max(abs(edges[0]), abs(edges[-1])))
        else:
            edges = _density_edges(lam, half_width, max_panel)
        nodes, weights = gl_on_edges(edges, 16)
        dens = SemiSpectralDensity(nodes, weights, half_width, atoms, sp.Q_p,
                                   lam, proj, l1, direct)
        dens._tail_mass = _tail_mass(dens) if m else np.zeros((0, 0))
        if m == 0:
            return dens
        defect = dens.mass_defect()
        dens.mass = dens.total_mass()
        if defect < tol_mass:
            return dens
        if x_grid is not None:
            break
        half_width *= 2
    raise MassDefect(f"mass defect {defect:.3e} exceeds {tol_mass:.1e}")


def _tail_mass(dens):
    """Mass of the pure density outside [-X, X], by the substitution x = X/u."""
    x0 = dens.half_width
    u, w = gl_on_edges(np.linspace(0.0, 1.0, 9), 16)
    xs = x0 / u
    jac = w * x0 / u ** 2
    d = dens.local(xs) + dens.local(-xs)
    return np.tensordot(jac, d, axes=1)


def circle_density(T, theta) -> np.ndarray:
    """Density of the semi-spectral measure of a contraction w.r.t. d theta.

    (1/2 pi) [ (I - conj(z) T)^{-1} + (I - z T*)^{-1} - I ],  z = exp(i theta).
    """
    t = T.entries if isinstance(T, ContractionMatrix) else _square(T)
    eye = np.eye(t.shape[0])
    theta = np.atleast_1d(theta)
    out = np.empty((theta.size,) + t.shape, complex)
    for j, th in enumerate(theta):
        z = np.exp(1j * th)
        out[j] = (np.linalg.inv(eye - np.conj(z) * t)
                  + np.linalg.inv(eye - z * t.conj().T) - eye) / (2 * np.pi)
    return out


# ---------------------------------------------------------------------------
# Unitary dilation
# ---------------------------------------------------------------------------

def _defect(t):
    n = t.shape[0]
    w, v = np.linalg.eigh(np.eye(n) - t.conj().T @ t)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def schaffer_dilation(T, N: int):
    """Unitary on 2N+1 copies whose center-block compressions give T^k, 0 <= k <= N.

    Returns ``(U, center)`` where ``center`` is the index of the block that
    carries the original space.
    """
    t = T.entries if isinstance(T, ContractionMatrix) else _square(T)
    if N < 1:
        raise ValueError("N must be at least 1")
    if np.linalg.norm(t, 2) > 1 + TOL_CONTR:
        raise NotContraction("T is not a contraction")
    n = t.shape[0]
    nb = 2 * N + 1
    dt = _defect(t)
    dts = _defect(t.conj().T)
    blocks = [[None] * nb for _ in range(nb)]
    blocks[0][0] = t
    blocks[0][nb - 1] = dts
    blocks[1][0] = dt
    blocks[1][nb - 1] = -t.conj().T
    for k in range(1, nb - 1):
        blocks[k + 1][k] = np.eye(n)
    u = np.zeros((nb * n, nb * n), complex)
    for i in range(nb):
        for j in range(nb):
            if blocks[i][j] is not None:
                u[i * n:(i + 1) * n, j * n:(j + 1) * n] = blocks[i][j]
    # relabel blocks so the original space sits at the center
    order = [(b - N) % nb for b in range(nb)]
    perm = np.concatenate([np.arange(b * n, (b + 1) * n) for b in order])
    u = u[np.ix_(perm, perm)]
    return u, N


def compress(U, n, center, k):
    """Compression P U^k P of the k-th power to the center block."""
    uk = np.linalg.matrix_power(U, k)
    s = slice(center * n, (center + 1) * n)
    return uk[s, s]


def dilation_spectral_atoms(U, n, center):
    """Compressed spectral measure of the unitary U: list of (angle, n x n PSD)."""
    # U is normal, so its complex Schur form is diagonal
    tri, z = sla.schur(U, output="complex")
    vals = np.diag(tri)
    s = slice(center * n, (center + 1) * n)
    vec = z[s, :]
    return [(float(np.angle(vals[j])), np.outer(vec[:, j], vec[:, j].conj()))
            for j in range(vals.size)]


# ---------------------------------------------------------------------------
# Ensembles and matrix files
# ---------------------------------------------------------------------------

def trial_rng(seed, trial):
    """Generator deterministically derived from (master seed, trial index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def _gaussian(rng, n):
    return (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2 * n)


def random_hermitian(rng, n, scale=1.0):
    g = _gaussian(rng, n)
    return scale * (g + g.conj().T) / np.sqrt(2)


def random_strict(rng, n, im_floor=0.1):
    """H + i(G*G + eps I) with Gaussian H, G."""
    g = _gaussian(rng, n)
    return random_hermitian(rng, n) + 1j * (g.conj().T @ g + im_floor * np.eye(n))


def random_unitary(rng, n):
    q, r = np.linalg.qr(_gaussian(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_mixed(rng, n, im_floor=0.1, sa_dim=None):
    """U (L_sa + L_pure) U* with a nontrivial self-adjoint summand."""
    if n < 2:
        raise ValueError("mixed matrices need n >= 2")
    k = sa_dim if sa_dim is not None else max(1, n // 2)
    a = np.zeros((n, n), complex)
    a[:k, :k] = random_hermitian(rng, k)
    a[k:, k:] = random_strict(rng, n - k, im_floor)
    u = random_unitary(rng, n)
    return u @ a @ u.conj().T


def random_dissipative(rng, n, kind="strict", im_floor=0.1):
    if kind == "strict":
        return random_strict(rng, n, im_floor)
    if kind == "mixed":
        return random_mixed(rng, n, im_floor)
    if kind == "self_adjoint":
        return random_hermitian(rng, n).astype(complex)
    raise ValueError(f"unknown ensemble kind {kind!r}")


@dataclass(frozen=True)
class EnsembleSpec:
    n: int = 4
    count: int = 16
    seed: int = 0
    kind: str = "strict"
    im_floor: float = 0.1

    def generate(self):
        return [random_dissipative(trial_rng(self.seed, j), self.n, self.kind,
                                   self.im_floor) for j in range(self.count)]


def format_matrix(a) -> str:
    a = _square(a)
    lines = [str(a.shape[0])]
    for row in a:
        lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ShapeError("empty matrix file")
    try:
        n = int(lines[0].strip())
    except ValueError as exc:
        raise ShapeError(f"bad size line {lines[0]!r}") from exc
    if len(lines) != n + 1:
        raise ShapeError(f"expected {n} rows, found {len(lines) - 1}")
    a = np.empty((n, n), complex)
    for i, ln in enumerate(lines[1:]):
        cells = ln.split()
        if len(cells) != n:
            raise ShapeError(f"row {i + 1} has {len(cells)} entries, expected {n}")
        for j, cell in enumerate(cells):
            try:
                re, im = cell.split(",")
                a[i, j] = complex(float(re), float(im))
            except ValueError as exc:
                raise ShapeError(f"bad entry {cell!r} in row {i + 1}") from exc
    return a


def write_matrix(path, a):
    with open(path, "w") as fh:
        fh.write(format_matrix(a))


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return parse_matrix(fh.read())
