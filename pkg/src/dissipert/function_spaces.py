"""Scalar functions on the real line in a dual frequency/time representation.

A :class:`GridFunction` is built from its Fourier data

    (F f)(xi) = integral f(x) exp(-i x xi) dx,
    f(x) = (1/2pi) integral (F f)(xi) exp(i xi x) dxi,

given as a smooth density on a band, a list of point masses (tones) and,
optionally, an exact closure for evaluation.  A tone ``c * exp(i s x)`` is an
atom at ``s`` with coefficient ``c``; its Fourier transform is ``2 pi c delta_s``.
Time samples on a uniform grid are synthesized on demand.

The module also provides the Littlewood-Paley bank, Besov and Hoelder
seminorms, moduli of continuity, the kernels ``phi_a`` and the shifted
spectra ``f_(a)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize, special

from ._quad import gl_on_edges, panel_edges
from .errors import (AnalyticClassViolation, DivergentTail, KernelRangeError,
                     OrderMismatch, SynthesisError)

DEFAULT_HALF_WIDTH = 256.0
DEFAULT_POINTS = 2 ** 16
GL_ORDER = 16
_CHUNK = 2048


# ---------------------------------------------------------------------------
# Littlewood-Paley bank
# ---------------------------------------------------------------------------

def _psi_exp(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _psi_exp2(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos] ** 2)
    return out


_STEPS = {"exp": _psi_exp, "exp2": _psi_exp2}


def smooth_step(u, kind="exp"):
    """C-infinity step equal to 0 for u <= 0 and 1 for u >= 1."""
    psi = _STEPS[kind]
    a = psi(u)
    b = psi(1.0 - np.asarray(u, dtype=float))
    return a / (a + b)


def bump_w(x, kind="exp"):
    """The bump w: supported in [1/2, 2], with w(x) = 1 - w(x/2) on [1, 2]."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    rise = (x >= 0.5) & (x <= 1.0)
    fall = (x > 1.0) & (x <= 2.0)
    out[rise] = smooth_step(2.0 * x[rise] - 1.0, kind)
    out[fall] = 1.0 - smooth_step(x[fall] - 1.0, kind)
    return out


def bump_v(x, kind="exp"):
    """Low-pass multiplier: 1 on [-1, 1], w(|x|) outside."""
    ax = np.abs(np.asarray(x, dtype=float))
    return np.where(ax <= 1.0, 1.0, bump_w(ax, kind))


@dataclass(frozen=True)
class LPKernelBank:
    """Dyadic bank of multipliers ``w(x/2**n)`` for ``n_min <= n <= n_max``."""

    n_min: int
    n_max: int
    step: str = "exp"

    def w(self, x):
        return bump_w(x, self.step)

    def v(self, x):
        return bump_v(x, self.step)

    @property
    def base_bump(self):
        return self.w

    @property
    def n_range(self):
        return range(self.n_min, self.n_max + 1)

    def kernel(self, n):
        scale = 2.0 ** n
        return lambda x: bump_w(np.asarray(x, dtype=float) / scale, self.step)

    def vp_kernel(self, n):
        scale = 2.0 ** n
        return lambda x: bump_v(np.asarray(x, dtype=float) / scale, self.step)

    @property
    def kernels(self):
        return {n: self.kernel(n) for n in self.n_range}

    @property
    def vp_kernels(self):
        return {n: self.vp_kernel(n) for n in self.n_range}

    def partition_sum(self, x):
        x = np.asarray(x, dtype=float)
        return sum(self.kernel(n)(x) for n in self.n_range)

    def covers(self, lo, hi):
        return 2.0 ** self.n_min <= lo and hi <= 2.0 ** self.n_max


def build_kernel_bank(n_min: int, n_max: int, step: str = "exp") -> LPKernelBank:
    """Build a Littlewood-Paley bank.

    ``step="exp"`` uses psi(u) = exp(-1/u); ``"exp2"`` uses exp(-1/u**2) and
    gives a second admissible bank for independence checks.
    """
    if n_min > n_max:
        raise ValueError("n_min must not exceed n_max")
    if step not in _STEPS:
        raise ValueError(f"unknown smooth step {step!r}")
    return LPKernelBank(int(n_min), int(n_max), step)


# ---------------------------------------------------------------------------
# GridFunction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    """Scalar function carried by Fourier data on a band plus tones.

    Parameters
    ----------
    spectrum : callable or None
        Smooth part of the Fourier transform, evaluated on the band.
    band : (lo, hi)
        Interval containing the support of the smooth part.  ``hi`` may be
        ``inf`` when ``cutoff`` is given.
    atoms : sequence of (frequency, coefficient)
        Tones ``c exp(i s x)``.
    closure : callable or None
        Exact pointwise evaluation (used in preference to synthesis).
    closure_derivative : callable(k) -> callable, optional
        Derivatives of the closure.
    cutoff : float, optional
        Effective upper limit of integration for infinite bands.
    integrable : bool
        Whether the smooth part is integrable near ``band[0]``.
    analytic : bool
        False only for kernels such as ``phi_a`` with two-sided spectrum.
    """

    spectrum: Optional[Callable] = None
    band: tuple = (0.0, 0.0)
    atoms: tuple = ()
    closure: Optional[Callable] = None
    closure_derivative: Optional[Callable] = None
    cutoff: Optional[float] = None
    integrable: bool = True
    analytic: bool = True
    breakpoints: tuple = ()
    half_width: float = DEFAULT_HALF_WIDTH
    n_points: int = DEFAULT_POINTS
    panels_per_unit: float = 4.0
    name: str = "f"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = float(self.band[0]), float(self.band[1])
        object.__setattr__(self, "band", (lo, hi))
        atoms = tuple((float(s), complex(c)) for s, c in self.atoms if c != 0)
        object.__setattr__(self, "atoms", atoms)
        if self.analytic:
            if lo < 0 and self.spectrum is not None:
                raise AnalyticClassViolation(
                    f"band {self.band} leaves [0, inf)")
            if any(s < 0 for s, _ in atoms):
                raise AnalyticClassViolation("tone with negative frequency")
        if math.isinf(hi) and self.spectrum is not None and self.cutoff is None:
            raise ValueError("infinite band requires a cutoff")

    # -- basic properties ---------------------------------------------------

    @property
    def has_smooth(self):
        return self.spectrum is not None and self.quad_band[1] > self.quad_band[0]

    @property
    def quad_band(self):
        lo, hi = self.band
        if math.isinf(hi):
            hi = float(self.cutoff)
        return lo, hi

    @property
    def bounded(self):
        return self.integrable or not self.has_smooth

    @property
    def is_zero(self):
        return not self.has_smooth and not self.atoms and self.closure is None

    @property
    def support(self):
        """Smallest interval containing the smooth band and the tones."""
        pts = [s for s, _ in self.atoms]
        if self.has_smooth:
            pts += list(self.quad_band)
        if not pts:
            return None
        return min(pts), max(pts)

    @property
    def type_sigma(self):
        sup = self.support
        return 0.0 if sup is None else max(abs(sup[0]), abs(sup[1]))

    # -- frequency quadrature -----------------------------------------------

    def quadrature(self, extent=0.0):
        """Composite Gauss-Legendre nodes/weights on the band.

        ``extent`` is the largest |Re z| the rule must resolve; panels are
        narrowed so each panel carries at most a few oscillations.
        """
        if not self.has_smooth:
            return np.empty(0), np.empty(0)
        lo, hi = self.quad_band
        width = hi - lo
        panels = max(16, math.ceil(width * self.panels_per_unit),
                     math.ceil(width * float(extent) / 6.0))
        edges = panel_edges(lo, hi, panels, self.breakpoints)
        return gl_on_edges(edges, GL_ORDER)

    @cached_property
    def _base_rule(self):
        nodes, weights = self.quadrature(self.half_width)
        values = self.spectrum(nodes) if nodes.size else np.empty(0, complex)
        return nodes, np.asarray(values, dtype=complex), weights

    @property
    def freq_nodes(self):
        return self._base_rule[0]

    @property
    def freq_values(self):
        return self._base_rule[1]

    @property
    def freq_weights(self):
        return self._base_rule[2]

    def spectral_density(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.spectrum is None:
            return np.zeros(xi.shape, complex)
        lo, hi = self.band
        inside = (xi >= lo) & (xi <= hi)
        out = np.zeros(xi.shape, complex)
        if inside.any():
            out[inside] = self.spectrum(xi[inside])
        return out

    # -- pointwise evaluation -----------------------------------------------

    def __call__(self, z):
        z = np.asarray(z)
        if self.closure is not None:
            return np.asarray(self.closure(z.astype(complex)), dtype=complex)
        return self.synthesize(z)

    def synthesize(self, z):
        """Evaluate by quadrature of the inverse transform (ignores closure)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, complex)
        for s, c in self.atoms:
            out += c * np.exp(1j * s * z)
        if self.spectrum is None or not self.has_smooth:
            return out
        if not self.integrable:
            raise SynthesisError(
                f"{self.name}: non-integrable spectrum cannot be synthesized")
        extent = float(np.max(np.abs(z.real))) if z.size else 0.0
        if extent <= self.half_width:
            nodes, vals, wts = self._base_rule
        else:
            nodes, wts = self.quadrature(extent)
            vals = np.asarray(self.spectrum(nodes), dtype=complex)
        coef = vals * wts / (2 * np.pi)
        flat = z.ravel()
        res = np.empty(flat.shape, complex)
        for start in range(0, flat.size, _CHUNK):
            blk = flat[start:start + _CHUNK]
            res[start:start + _CHUNK] = np.exp(1j * np.multiply.outer(blk, nodes)) @ coef
        return out + res.reshape(z.shape)

    # -- time grid ------------------------------------------------------------

    @property
    def step(self):
        return 2.0 * self.half_width / self.n_points

    @cached_property
    def time_grid(self):
        n = self.n_points
        return (np.arange(n) - n // 2) * self.step

    @cached_property
    def time_values(self):
        return self.sample()

    def sample(self, shift=0.0):
        """Values ``f(x_j + shift)`` on the time grid.

        Closures and tones are evaluated directly; the smooth part uses the
        trapezoid rule on the frequency lattice ``k * 2pi/(N h)`` through one
        FFT, which is spectrally accurate for smooth band-limited spectra.
        """
        x = self.time_grid + shift
        if self.closure is not None:
            return np.asarray(self.closure(x.astype(complex)), dtype=complex)
        out = np.zeros(x.shape, complex)
        for s, c in self.atoms:
            out += c * np.exp(1j * s * x)
        if not self.has_smooth:
            return out
        if not self.integrable:
            raise SynthesisError(
                f"{self.name}: non-integrable spectrum cannot be synthesized")
        n = self.n_points
        dxi = np.pi / self.half_width
        lo, hi = self.quad_band
        k0 = math.ceil(lo / dxi)
        k1 = math.floor(hi / dxi)
        if k1 < k0:
            return out
        if k1 - k0 + 1 > n:
            raise SynthesisError("band too wide for the time grid")
        xi = np.arange(k0, k1 + 1) * dxi
        g = self.spectral_density(xi) * np.exp(1j * xi * shift)
        m = np.arange(g.size)
        buf = np.zeros(n, complex)
        buf[:g.size] = g * (-1.0) ** m
        vals = np.fft.ifft(buf) * n
        phase = np.exp(1j * k0 * dxi * self.time_grid)
        return out + dxi / (2 * np.pi) * phase * vals

    def analyze(self, xi=None):
        """Fourier transform of the time samples by the trapezoid rule.

        Returns the smooth-part spectrum at ``xi`` (default: ``freq_nodes``);
        tones must be removed beforehand, so callers use this on functions
        without atoms.
        """
        xi = self.freq_nodes if xi is None else np.asarray(xi, dtype=float)
        x = self.time_grid
        vals = self.time_values * self.step
        out = np.empty(xi.shape, complex)
        for start in range(0, xi.size, 64):
            blk = xi[start:start + 64]
            out[start:start + 64] = np.exp(-1j * np.multiply.outer(blk, x)) @ vals
        return out

    # -- norms ---------------------------------------------------------------

    def sup_norm(self, refine=True):
        """sup |f| on the time grid, polished by local maximization."""
        if self.is_zero:
            return 0.0
        vals = np.abs(self.time_values)
        j = int(np.argmax(vals))
        best = float(vals[j])
        if not refine or best == 0.0:
            return best
        x0 = self.time_grid[j]
        h = self.step
        res = optimize.minimize_scalar(
            lambda t: -abs(complex(self(np.array([t]))[0])),
            bounds=(x0 - h, x0 + h), method="bounded",
            options={"xatol": 1e-12 * max(1.0, abs(x0))})
        return max(best, -float(res.fun))

    def lp_norm(self, p):
        if p == np.inf:
            return self.sup_norm()
        vals = np.abs(self.time_values)
        return float((np.sum(vals ** p) * self.step) ** (1.0 / p))

    # -- derived functions ----------------------------------------------------

    def with_(self, **changes):
        return replace(self, **changes)

    def derivative(self, k=1):
        """k-th derivative; spectra are multiplied by (i xi)**k."""
        if k == 0:
            return self
        spec = self.spectrum
        if spec is not None:
            spec = _times_power(spec, k)
        atoms = tuple((s, c * (1j * s) ** k) for s, c in self.atoms)
        closure = None
        if self.closure is not None:
            if self.closure_derivative is None:
                if self.spectrum is None or not self.integrable:
                    raise SynthesisError(f"{self.name}: no derivative available")
            else:
                closure = self.closure_derivative(k)
        integrable = self.integrable or (self.band[0] == 0 and k >= 1)
        return replace(self, spectrum=spec, atoms=atoms, closure=closure,
                       closure_derivative=None, name=f"{self.name}^({k})",
                       integrable=integrable)

    def scaled(self, c):
        """The function c*f."""
        spec = self.spectrum
        if spec is not None:
            spec = _times_const(spec, c)
        closure = self.closure
        if closure is not None:
            closure = _times_const(closure, c)
        der = self.closure_derivative
        if der is not None:
            der = (lambda k, d=der: _times_const(d(k), c))
        return replace(self, spectrum=spec, closure=closure,
                       closure_derivative=der,
                       atoms=tuple((s, c * a) for s, a in self.atoms))

    def dilated(self, lam):
        """The function x -> f(lam x) for lam > 0."""
        spec = self.spectrum
        if spec is not None:
            spec = (lambda xi, sp=spec: sp(np.asarray(xi) / lam) / lam)
        closure = self.closure
        if closure is not None:
            closure = (lambda z, cl=closure: cl(lam * np.asarray(z)))
        band = (self.band[0] * lam, self.band[1] * lam)
        return replace(self, spectrum=spec, closure=closure,
                       closure_derivative=None, band=band,
                       cutoff=None if self.cutoff is None else self.cutoff * lam,
                       breakpoints=tuple(b * lam for b in self.breakpoints),
                       atoms=tuple((s * lam, c) for s, c in self.atoms))

    def to_csv(self, path):
        """Write (x, Re f, Im f) rows for the time grid."""
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "re", "im"])
            for x, v in zip(self.time_grid, self.time_values):
                wr.writerow([f"{x:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def _times_power(spec, k):
    return lambda xi: spec(xi) * (1j * np.asarray(xi)) ** k


def _times_const(fn, c):
    return lambda z: c * fn(z)


def _require_analytic(f):
    if not f.analytic or f.band[0] < 0:
        raise AnalyticClassViolation(f"{f.name} is not of analytic class")


def _multiplied(f, mult, lo, hi, breakpoints=(), name=None, keep_closure=False,
                atom_mult=None):
    """Restrict f to [lo, hi] in frequency and multiply by ``mult``."""
    blo, bhi = f.band
    nlo, nhi = max(blo, lo), min(bhi, hi)
    spec = None
    if f.spectrum is not None and nhi > nlo:
        base = f.spectrum
        spec = lambda xi: base(xi) * mult(xi)
    else:
        nlo, nhi = 0.0, 0.0
    am = mult if atom_mult is None else atom_mult
    atoms = []
    for s, c in f.atoms:
        factor = float(am(np.array([s]))[0])
        if factor != 0.0:
            atoms.append((s, c * factor))
    bps = tuple(b for b in tuple(f.breakpoints) + tuple(breakpoints)
                if nlo < b < nhi)
    integrable = f.integrable or nlo > 0
    inh = f.cutoff if math.isinf(nhi) else None
    return replace(f, spectrum=spec, band=(nlo, nhi), atoms=tuple(atoms),
                   closure=None, closure_derivative=None, cutoff=inh,
                   integrable=integrable, breakpoints=bps,
                   name=name or f.name)


# ---------------------------------------------------------------------------
# Littlewood-Paley pieces and seminorms
# ---------------------------------------------------------------------------

def lp_piece(f: GridFunction, n: int, bank: LPKernelBank) -> GridFunction:
    """The piece f * W_n, i.e. frequency multiplication by w(xi/2**n)."""
    _require_analytic(f)
    return _multiplied(f, bank.kernel(n), 2.0 ** (n - 1), 2.0 ** (n + 1),
                       breakpoints=(2.0 ** n,), name=f"{f.name}_{n}")


def vp_lowpass(f: GridFunction, n: int, bank: LPKernelBank) -> GridFunction:
    """f * V_n: multiplication by v(xi/2**n)."""
    _require_analytic(f)
    return _multiplied(f, bank.vp_kernel(n), 0.0, 2.0 ** (n + 1),
                       breakpoints=(2.0 ** n,), name=f"{f.name}*V_{n}")


def vp_highpass(f: GridFunction, n: int, bank: LPKernelBank) -> GridFunction:
    """f - f * V_n: multiplication by 1 - v(xi/2**n)."""
    _require_analytic(f)
    low = bank.vp_kernel(n)
    return _multiplied(f, lambda xi: 1.0 - low(xi), 2.0 ** n, np.inf,
                       breakpoints=(2.0 ** (n + 1),), name=f"{f.name}-f*V_{n}")


def lp_pieces(f: GridFunction, bank: LPKernelBank):
    return {n: lp_piece(f, n, bank) for n in bank.n_range}


def _check_bank_covers(f, bank):
    sup = f.support
    if sup is None:
        return
    lo, hi = sup
    if not bank.covers(lo, hi):
        raise KernelRangeError(
            f"support [{lo}, {hi}] exceeds bank range "
            f"[2^{bank.n_min}, 2^{bank.n_max}]")


def besov_seminorm(f: GridFunction, s: float, p: float, q: float,
                   bank: LPKernelBank) -> float:
    """l^q norm over n of 2**(n s) ||f_n||_{L^p}."""
    _require_analytic(f)
    if f.is_zero:
        return 0.0
    _check_bank_covers(f, bank)
    terms = []
    for n in bank.n_range:
        piece = lp_piece(f, n, bank)
        if piece.is_zero:
            continue
        terms.append(2.0 ** (n * s) * piece.lp_norm(p))
    terms = np.asarray(terms)
    if terms.size == 0:
        return 0.0
    if q == np.inf:
        return float(terms.max())
    return float(np.sum(terms ** q) ** (1.0 / q))


def _log_sweep(lo, hi, per_decade=64):
    if hi <= lo:
        return np.array([hi])
    count = max(2, math.ceil(per_decade * math.log10(hi / lo)) + 1)
    return np.logspace(math.log10(lo), math.log10(hi), count)


def _difference_sup(f, t, m):
    """sup over admissible grid points of |Delta_t^m f| (points stay in range)."""
    acc = np.zeros(f.n_points, complex)
    for j in range(m + 1):
        acc += (-1) ** (m - j) * math.comb(m, j) * f.sample(j * t)
    valid = f.time_grid + m * t <= f.half_width
    return float(np.max(np.abs(acc[valid]))) if valid.any() else 0.0


def holder_seminorm(f: GridFunction, alpha: float, m: int,
                    t_max: float | None = None, per_decade: int = 64) -> float:
    """sup over a log sweep of ||Delta_t^m f||_inf / t**alpha.

    This is a lower estimate of the true seminorm.
    """
    if m < 1 or not (m - 1 <= alpha < m):
        raise OrderMismatch(f"need m-1 <= alpha < m, got alpha={alpha}, m={m}")
    if f.is_zero:
        return 0.0
    t_max = f.half_width / m if t_max is None else t_max
    best = 0.0
    for t in _log_sweep(4 * f.step, t_max, per_decade):
        best = max(best, _difference_sup(f, t, m) / t ** alpha)
    return best


def modulus_of_f(f: GridFunction, m: int, x: float, per_decade: int = 64) -> float:
    """omega_{f,m}(x) = sup_{0 < h <= x} ||Delta_h^m f||_inf over an h sweep."""
    if f.is_zero:
        return 0.0
    lo = min(4 * f.step, x)
    return max(_difference_sup(f, h, m) for h in _log_sweep(lo, x, per_decade))


# ---------------------------------------------------------------------------
# Moduli of continuity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Modulus:
    """A modulus of continuity ``omega`` with doubling order ``order``."""

    func: Callable[[float], float]
    order: int = 1
    name: str = "omega"

    def __call__(self, x):
        return self.func(x)

    @classmethod
    def power(cls, alpha, order=None):
        order = max(1, math.ceil(alpha)) if order is None else order
        return cls(lambda t: np.asarray(t, dtype=float) ** alpha, order,
                   f"t^{alpha}")

    def doubling_ratio(self, x):
        return float(self(2 * x)) / float(self(x))


def omega_star(omega: Modulus | Callable, m: int, x: float,
               max_blocks: int = 400, tol: float = 1e-13) -> float:
    """omega_{*,m}(x) = x**m * integral_x^inf omega(t)/t**(m+1) dt.

    The integral is split into dyadic blocks [2^k x, 2^(k+1) x]; once the
    block ratio settles the remainder is summed as a geometric tail.
    """
    func = omega.func if isinstance(omega, Modulus) else omega
    g = lambda t: float(func(t)) / t ** (m + 1)
    blocks = []
    total = 0.0
    tail = None
    for k in range(max_blocks):
        a, b = x * 2.0 ** k, x * 2.0 ** (k + 1)
        val, _ = integrate.quad(g, a, b, epsabs=0.0, epsrel=1e-13, limit=200)
        blocks.append(val)
        total += val
        if val == 0.0:
            tail = 0.0
            break
        if k >= 6:
            r = [blocks[j + 1] / blocks[j] for j in range(k - 4, k)]
            rho = r[-1]
            if rho >= 0.999:
                raise DivergentTail("omega_* tail does not converge")
            if max(r) - min(r) <= 1e-6 * rho and rho < 1.0:
                tail = val * rho / (1.0 - rho)
                if tail <= tol * total:
                    break
                break
    if tail is None:
        rho = blocks[-1] / blocks[-2] if len(blocks) > 1 else 1.0
        if rho >= 0.999:
            raise DivergentTail("omega_* tail does not converge")
        tail = blocks[-1] * rho / (1.0 - rho)
    return float(x ** m * (total + tail))


# ---------------------------------------------------------------------------
# phi_a and f_(a)
# ---------------------------------------------------------------------------

def _phi1(x):
    """Inverse transform of min(1, 1/|xi|): (1/pi)(sin x / x - Ci|x|)."""
    x = np.abs(np.asarray(x, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        si, ci = special.sici(x)
        out = (np.sinc(x / np.pi) - ci) / np.pi
    return np.where(x == 0, np.inf, out)


def phi_a(a: float, half_width: float = DEFAULT_HALF_WIDTH,
          n_points: int = DEFAULT_POINTS) -> GridFunction:
    """Kernel with Fourier multiplier min(1, a/|xi|); even, not analytic class."""
    if a <= 0:
        raise ValueError("a must be positive")
    return GridFunction(
        closure=lambda z: (a * _phi1(a * np.real(z))).astype(complex),
        band=(-np.inf, np.inf), analytic=False, half_width=half_width,
        n_points=n_points, name=f"phi_{a}", params={"a": a})


def _phi1_zeros(count):
    """Zeros of phi_1 on (0, inf): one in each (k pi, (k+1) pi)."""
    lo = np.arange(count, dtype=float) * np.pi
    hi = lo + np.pi
    lo[0] = 1e-3
    flo = _phi1(lo)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = _phi1(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def phi_a_l1(a: float = 1.0, x_max: float = 1e5) -> float:
    """L1 norm of phi_a by quadrature between consecutive zeros.

    phi_a(x) = a phi_1(a x); the integration runs in the x variable of phi_a
    with the zeros of phi_1 rescaled, and the tail beyond ``x_max`` uses the
    asymptotics |phi_1(u)| ~ |cos u| / (pi u^2).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    zeros = _phi1_zeros(int(math.ceil(x_max / np.pi))) / a
    f = lambda x: np.abs(a * _phi1(a * x))
    head, _ = integrate.quad(f, 0.0, zeros[0], limit=200, epsabs=0, epsrel=1e-13)
    nodes, weights = gl_on_edges(zeros, 24)
    body = float(np.sum(weights * f(nodes)))
    tail = (2.0 / np.pi) / (np.pi * a * zeros[-1])
    return 2.0 * (head + body + tail)


def f_sub_a(f: GridFunction, a: float) -> GridFunction:
    """The shifted function f_(a) with F f_(a)(xi) = xi/(xi+a) F f(xi+a), xi >= 0."""
    _require_analytic(f)
    if a <= 0:
        raise ValueError("a must be positive")
    lo, hi = f.band
    spec = None
    nlo, nhi = 0.0, 0.0
    if f.spectrum is not None and f.has_smooth and f.quad_band[1] > a:
        base = f.spectrum
        spec = lambda xi: np.asarray(xi) / (np.asarray(xi) + a) * base(np.asarray(xi) + a)
        nlo, nhi = max(0.0, lo - a), hi - a
    atoms = tuple((s - a, c * (s - a) / s) for s, c in f.atoms if s > a)
    cutoff = None if f.cutoff is None else f.cutoff - a
    bps = tuple(b - a for b in f.breakpoints if b > a)
    return replace(f, spectrum=spec, band=(nlo, nhi), atoms=atoms, closure=None,
                   closure_derivative=None, cutoff=cutoff, integrable=True,
                   breakpoints=bps, name=f"{f.name}_({a:g})")


def phi_a_convolve(f: GridFunction, a: float) -> GridFunction:
    """phi_a * f, i.e. multiplication of the spectrum by min(1, a/xi)."""
    _require_analytic(f)
    mult = lambda xi: np.minimum(1.0, a / np.maximum(np.asarray(xi, float), 1e-300))
    return _multiplied(f, mult, 0.0, np.inf, breakpoints=(a,),
                       name=f"phi_{a:g}*{f.name}")


def f_sub_a_defa(f: GridFunction, a: float, x) -> np.ndarray:
    """Pointwise f_(a)(x) by the time-domain route exp(-iax) (f - phi_a*f)(x)."""
    _require_analytic(f)
    x = np.asarray(x, dtype=float)
    base = f.synthesize(x) if f.closure is None else f(x)
    return np.exp(-1j * a * x) * (base - phi_a_convolve(f, a).synthesize(x))


# ---------------------------------------------------------------------------
# Test-function families
# ---------------------------------------------------------------------------

def tone(sigma: float, coef: complex = 1.0, **grid) -> GridFunction:
    """e_sigma(x) = coef * exp(i sigma x)."""
    return GridFunction(atoms=((sigma, coef),), band=(sigma, sigma),
                        name=f"e_{sigma:g}", params={"sigma": sigma}, **grid)


def tone_sum(pairs: Sequence, **grid) -> GridFunction:
    pairs = tuple((float(s), complex(c)) for s, c in pairs)
    sig = [s for s, _ in pairs]
    return GridFunction(atoms=pairs, band=(min(sig), max(sig)), name="tones",
                        **grid)


def _bump(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (ui * (1.0 - ui)))
    return out


def freq_bump(lo: float, hi: float, amplitude: complex | None = None,
              normalize: bool = True, **grid) -> GridFunction:
    """Band-limited f whose spectrum is a smooth bump on [lo, hi].

    With ``normalize`` the amplitude makes f(0) = 1; since the spectrum is
    nonnegative, also sup |f| = 1.
    """
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    width = hi - lo
    if amplitude is None:
        amplitude = 1.0
        if normalize:
            mass, _ = integrate.quad(lambda t: float(_bump(np.array([t]))[0]),
                                     0, 1, epsabs=0, epsrel=1e-13)
            amplitude = 2 * np.pi / (mass * width)
    amp = complex(amplitude)
    spec = lambda xi: amp * _bump((np.asarray(xi) - lo) / width)
    return GridFunction(spectrum=spec, band=(lo, hi), name=f"bump[{lo:g},{hi:g}]",
                        params={"band": (lo, hi)}, **grid)


def random_band_limited(rng, lo: float, hi: float, count: int = 3,
                        tones: int = 0, **grid) -> GridFunction:
    """Random complex combination of bumps (and optional tones) inside [lo, hi]."""
    parts = []
    for _ in range(count):
        a, b = np.sort(rng.uniform(lo, hi, 2))
        if b - a < 0.1 * (hi - lo):
            mid = 0.5 * (a + b)
            a = max(lo, mid - 0.05 * (hi - lo))
            b = min(hi, mid + 0.05 * (hi - lo))
        c = complex(rng.normal(), rng.normal())
        parts.append((a, b, c))
    atoms = tuple((float(rng.uniform(lo, hi)),
                   complex(rng.normal(), rng.normal()) / 4) for _ in range(tones))
    bumps = [(a, b, c * 2 * np.pi / (0.0070 * (b - a))) for a, b, c in parts]

    def spec(xi):
        xi = np.asarray(xi, dtype=float)
        return sum(c * _bump((xi - a) / (b - a)) for a, b, c in bumps)

    bps = tuple(sorted({v for a, b, _ in bumps for v in (a, b)}))
    return GridFunction(spectrum=spec, band=(lo, hi), atoms=atoms,
                        breakpoints=bps, name="random_bl", **grid)


def shifted_power(beta: float, **grid) -> GridFunction:
    """f_beta(z) = (z + i)**beta, principal branch.

    For xi > 0 the transform is 2 pi exp(i pi beta/2) xi**(-beta-1) exp(-xi)
    / Gamma(-beta); it is not integrable at 0 (f is unbounded).
    """
    phase = np.exp(0.5j * np.pi * beta)
    g = special.gamma(-beta)
    spec = lambda xi: 2 * np.pi * phase * np.asarray(xi) ** (-beta - 1) * np.exp(-np.asarray(xi)) / g

    def deriv(k):
        coef = float(np.prod([beta - j for j in range(k)]))
        return lambda z: coef * (np.asarray(z, complex) + 1j) ** (beta - k)

    return GridFunction(
        spectrum=spec, band=(0.0, np.inf), cutoff=46.0, integrable=False,
        closure=lambda z: (np.asarray(z, complex) + 1j) ** beta,
        closure_derivative=deriv, name=f"(z+i)^{beta:g}",
        params={"beta": beta}, **grid)


def log_family(c: float = 1.0, **grid) -> GridFunction:
    """f(z) = log(z + i c); ||f'||_{H^inf} = 1/c, transform -2 pi exp(-c xi)/xi."""
    if c <= 0:
        raise ValueError("c must be positive")
    spec = lambda xi: -2 * np.pi * np.exp(-c * np.asarray(xi)) / np.asarray(xi)

    def deriv(k):
        coef = (-1) ** (k - 1) * math.factorial(k - 1)
        return lambda z: coef * (np.asarray(z, complex) + 1j * c) ** (-k)

    return GridFunction(
        spectrum=spec, band=(0.0, np.inf), cutoff=46.0 / c, integrable=False,
        closure=lambda z: np.log(np.asarray(z, complex) + 1j * c),
        closure_derivative=deriv, name=f"log(z+{c:g}i)",
        params={"c": c, "lipschitz": 1.0 / c}, **grid)


def custom_table(xi: Sequence[float], values: Sequence[complex], **grid) -> GridFunction:
    """Spectrum given by a table, interpolated with a cubic spline."""
    from scipy.interpolate import CubicSpline

    xi = np.asarray(xi, dtype=float)
    values = np.asarray(values, dtype=complex)
    if xi.ndim != 1 or xi.size < 2 or np.any(np.diff(xi) <= 0):
        raise ValueError("table frequencies must be strictly increasing")
    re = CubicSpline(xi, values.real)
    im = CubicSpline(xi, values.imag)
    spec = lambda t: re(np.asarray(t)) + 1j * im(np.asarray(t))
    return GridFunction(spectrum=spec, band=(xi[0], xi[-1]),
                        breakpoints=tuple(xi[1:-1]), name="table", **grid)
