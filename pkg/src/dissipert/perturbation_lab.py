"""Operator differences, derivatives, quasicommutators and the bound catalog.

Every inequality is turned into a :class:`BoundCheck`: a left-hand side
computed from matrices, a right-hand envelope and their ratio.  Pass/fail is
only asserted where the constant is explicit; the remaining bounds are
checked through their scaling exponents.
"""
from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from ._quad import gl_on_edges, panel_edges
from .dissipative_core import (DissipativeMatrix, classify, semigroup,
                               split_sa_pure)
from .errors import (NoConvergence, NotApplicable, ShapeError, SweepDegenerate,
                     TailWarning, Unsupported)
from .function_spaces import (GridFunction, Modulus, besov_seminorm,
                              build_kernel_bank, holder_seminorm, lp_piece,
                              omega_star, vp_highpass, vp_lowpass)
from .functional_calculus import f_of_L_oracle, matrix_function
from .operator_integrals import (MAX_ORDER, evaluate_doi, evaluate_moi,
                                 rep_first_order, rep_order,
                                 schur_doi_selfadjoint)

TOL_BOUND = 1e-9
TAIL_TOL = 1e-8
TOL_S2 = 1e-6


def _mat(a):
    return np.asarray(a.entries if isinstance(a, DissipativeMatrix) else a, dtype=complex)


def _norm(a):
    return float(np.linalg.norm(a, 2))


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class PerturbationInstance:
    """A pair L, M with a test function and optional extras.

    The path is L_t = L + t(M - L); higher differences use K = (M - L)/m.
    Sweeps move M along ``base + t * direction`` (default: base L,
    direction M - L).
    """

    L: np.ndarray
    M: np.ndarray
    f: GridFunction = None
    R: np.ndarray = None
    m: int = 1
    p: float = 2.0
    alpha: float = None
    base: np.ndarray = None
    direction: np.ndarray = None
    seed: int = None
    trial: int = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.L = _mat(self.L)
        self.M = _mat(self.M)
        if self.L.shape != self.M.shape:
            raise ShapeError("L and M must have the same shape")
        if self.R is not None:
            self.R = _mat(self.R) if not isinstance(self.R, np.ndarray) else self.R.astype(complex)
            if self.R.shape != self.L.shape:
                raise ShapeError("R must match L")
        for j in range(self.m + 1):
            classify(self.L + j * self.K)

    @property
    def n(self):
        return self.L.shape[0]

    @property
    def K(self):
        return (self.M - self.L) / self.m

    def path(self, t):
        return self.L + t * (self.M - self.L)

    def perturbed(self, t):
        base = self.L if self.base is None else self.base
        direction = (self.M - self.L) if self.direction is None else self.direction
        return PerturbationInstance(self.L, base + t * direction, self.f, self.R,
                                    self.m, self.p, self.alpha, self.base,
                                    self.direction, self.seed, self.trial,
                                    dict(self.meta, t=t))

    def digest(self):
        h = hashlib.sha256()
        for a in (self.L, self.M) + ((self.R,) if self.R is not None else ()):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# Differences
# ---------------------------------------------------------------------------

@dataclass
class DifferenceResult:
    value: np.ndarray
    mode: str
    term_norms: dict = field(default_factory=dict)
    tail_estimate: float = 0.0


def _oracle(g, L):
    return f_of_L_oracle(g, classify(L)).value


def _bank_for(f: GridFunction, low_floor=-40):
    sup = f.support
    lo, hi = sup
    n_max = max(math.ceil(math.log2(hi)) + 1, low_floor + 1) if hi > 0 else low_floor + 1
    if lo > 0:
        n_min = math.floor(math.log2(lo)) - 1
    else:
        n_min = low_floor
    return build_kernel_bank(n_min, n_max)


def lowpass_regularized(f: GridFunction, N: int, bank):
    """z -> (1/2pi) int F(xi) v(xi/2^N) (exp(i xi z) - 1) d xi plus tones.

    The constant subtracted cancels in every difference, and makes the
    integral converge for spectra with a non-integrable singularity at 0.
    """
    top = 2.0 ** (N + 1)
    v = bank.vp_kernel(N)
    lo = f.band[0]

    def value(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, complex)
        for s, c in f.atoms:
            if s < top:
                out += c * float(v(np.array([s]))[0]) * (np.exp(1j * s * z) - 1.0)
        if f.spectrum is None or lo >= top or not f.has_smooth:
            return out
        extent = float(np.max(np.abs(z.real))) if z.size else 0.0
        hi = min(top, f.quad_band[1])
        uniform = panel_edges(max(lo, 0.0), hi, max(8, math.ceil(hi * (extent + 1) / 4)),
                              [2.0 ** N] + list(f.breakpoints))
        eps = 0.0
        if lo == 0:
            eps = hi * 2.0 ** -80
            graded = hi * 2.0 ** -np.arange(80, 0, -1, dtype=float)
            edges = np.unique(np.concatenate([graded, uniform[uniform > 0]]))
        else:
            edges = uniform
        xi, w = gl_on_edges(edges, 16)
        g = w * np.asarray(f.spectrum(xi), dtype=complex) * v(xi) / (2 * np.pi)
        flat = z.ravel()
        res = (np.expm1(1j * np.multiply.outer(flat, xi)) @ g).reshape(z.shape)
        if eps > 0:
            # sliver [0, eps]: F ~ xi^-q and exp(i xi z) - 1 ~ i xi z
            f1 = complex(f.spectrum(np.array([eps]))[0])
            f2 = complex(f.spectrum(np.array([eps / 2]))[0])
            q = math.log2(abs(f2 / f1)) if f1 != 0 else 0.0
            if q < 2:
                res = res + 1j * z * f1 * eps ** 2 / (2 - q) / (2 * np.pi)
        return out + res

    return value


def operator_difference(f, L, M, mode="lp_series", bank=None, N=None,
                        tail_tol=TAIL_TOL) -> DifferenceResult:
    """f(L) - f(M) by the Littlewood-Paley series, the low/high split, or directly.

    ``lp_series`` sums f_n(L) - f_n(M) over the bank range, adding the
    low-pass remainder (z -> f*V(z) - f*V(0)) below the range; pieces above
    the range are reported as a tail.  ``vp_split`` uses one cut N.
    ``direct`` evaluates f on both matrices by the oracle.
    """
    la, ma = _mat(L), _mat(M)
    if la.shape != ma.shape:
        raise ShapeError("L and M must have the same shape")
    if mode == "direct":
        return DifferenceResult(_oracle(f, la) - _oracle(f, ma), "direct")
    if not isinstance(f, GridFunction):
        raise Unsupported("series modes need frequency data")
    if f.is_zero or f.support is None:
        return DifferenceResult(np.zeros_like(la), mode)
    if mode == "lp_series":
        bank = bank or _bank_for(f)
        total = np.zeros_like(la)
        norms = {}
        lo, hi = f.support
        if lo < 2.0 ** bank.n_min:
            low = lowpass_regularized(f, bank.n_min - 1, bank)
            term = _oracle(low, la) - _oracle(low, ma)
            norms["low"] = _norm(term)
            total += term
        for n in bank.n_range:
            piece = lp_piece(f, n, bank)
            if piece.is_zero:
                continue
            term = _oracle(piece, la) - _oracle(piece, ma)
            norms[n] = _norm(term)
            total += term
        tail = 0.0
        if hi > 2.0 ** bank.n_max:
            high = vp_highpass(f, bank.n_max, bank)
            if high.has_smooth or high.atoms:
                tail = _norm(_oracle(high, la) - _oracle(high, ma))
        if tail > tail_tol * max(1.0, _norm(total)):
            warnings.warn(f"LP series tail {tail:.2e} above tolerance", TailWarning)
        return DifferenceResult(total, "lp_series", norms, tail)
    if mode == "vp_split":
        bank = bank or build_kernel_bank(-60, 60)
        if N is None:
            sig = f.support[1]
            if math.isfinite(f.band[1]):
                N = math.ceil(math.log2(max(sig, 2.0 ** -40))) + 4
            else:
                N = max(-40, math.ceil(-math.log2(max(_norm(la - ma), 1e-300))))
        low = lowpass_regularized(f, N, bank)
        lowdiff = _oracle(low, la) - _oracle(low, ma)
        high = vp_highpass(f, N, bank)
        highdiff = np.zeros_like(la)
        if high.has_smooth or high.atoms:
            highdiff = _oracle(high, la) - _oracle(high, ma)
        return DifferenceResult(lowdiff + highdiff, "vp_split",
                                {"low": _norm(lowdiff), "high": _norm(highdiff)})
    raise ValueError(f"unknown mode {mode!r}")


def binomial_difference(f, L, K, m, evaluate=None):
    """sum_j (-1)^(m-j) C(m, j) f(L + jK)."""
    evaluate = evaluate or _oracle
    la, ka = _mat(L), _mat(K)
    total = np.zeros_like(la)
    for j in range(m + 1):
        total += (-1) ** (m - j) * math.comb(m, j) * evaluate(f, la + j * ka)
    return total


@dataclass
class HigherDifference:
    value: np.ndarray
    binomial: np.ndarray
    moi: np.ndarray
    deviation: float
    term_norms: dict


def higher_difference(f, L, M, m, route="both", bank=None) -> HigherDifference:
    """m-th difference along K = (M - L)/m by LP pieces and by the m-fold operator integral."""
    if m > MAX_ORDER:
        raise Unsupported(f"higher differences implemented up to order {MAX_ORDER}")
    if m < 1:
        raise ValueError("m must be at least 1")
    la, ma = _mat(L), _mat(M)
    ka = (ma - la) / m
    binom = moi = None
    norms = {}
    if route in ("both", "binomial"):
        if isinstance(f, GridFunction) and f.support is not None and f.bounded:
            bank = bank or _bank_for(f)
            binom = np.zeros_like(la)
            for n in bank.n_range:
                piece = lp_piece(f, n, bank)
                if piece.is_zero:
                    continue
                term = binomial_difference(piece, la, ka, m)
                norms[n] = _norm(term)
                binom += term
            if f.support[0] < 2.0 ** bank.n_min:
                low = vp_lowpass(f, bank.n_min - 1, bank)
                binom += binomial_difference(low, la, ka, m)
        else:
            binom = binomial_difference(f, la, ka, m)
    if route in ("both", "moi"):
        if not np.any(ka):
            moi = np.zeros_like(la)
        else:
            mats = [la + j * ka for j in range(m + 1)]
            extent = max(float(np.max(np.abs(np.linalg.eigvals(a).real))) for a in mats)
            rep = rep_order(f, m, extent=extent)
            moi = math.factorial(m) * evaluate_moi(rep, mats, [ka] * m)
    value = moi if binom is None else binom
    dev = 0.0
    if binom is not None and moi is not None:
        dev = _norm(binom - moi) / max(_norm(binom), 1e-300)
    return HigherDifference(value, binom, moi, dev, norms)


def operator_derivative(f, L, M, order=1, s=0.0):
    """d^m/dt^m f(L_t) at t = s: m! times the operator integral with all measures at L_s."""
    if order > MAX_ORDER:
        raise Unsupported(f"derivatives implemented up to order {MAX_ORDER}")
    la, ma = _mat(L), _mat(M)
    k = ma - la
    if not np.any(k):
        return np.zeros_like(la)
    ls = la + s * k
    extent = float(np.max(np.abs(np.linalg.eigvals(ls).real)))
    rep = rep_order(f, order, extent=extent)
    return math.factorial(order) * evaluate_moi(rep, [ls] * (order + 1), [k] * order)


def semigroup_derivative(a, L, M, s=0.0, panels=None):
    """d/dt exp(i a L_t) at s as i int_0^a exp(i xi L_s)(M - L) exp(i (a - xi) L_s) d xi."""
    from .dissipative_core import semigroup_stack

    la, ma = _mat(L), _mat(M)
    ls = la + s * (ma - la)
    if panels is None:
        panels = max(2, math.ceil(a * max(1.0, _norm(ls)) / 2))
    xi, w = gl_on_edges(np.linspace(0, a, panels + 1), 16)
    e1 = semigroup_stack(ls, xi)
    e2 = semigroup_stack(ls, a - xi)
    return 1j * np.tensordot(w, e1 @ (ma - la)[None] @ e2, axes=1)


def _mp_tone_function(pairs, a, dps):
    import mpmath as mp

    with mp.workdps(dps):
        A = mp.matrix(a.tolist())
        out = mp.zeros(a.shape[0], a.shape[1])
        for s, c in pairs:
            out += mp.mpc(c) * mp.expm(mp.mpc(0, s) * A)
        return out


def derivative_convergence(f, L, M, order=1, s=0.0, hs=(1e-2, 1e-3, 1e-4, 1e-5), dps=40):
    """Central finite differences of t -> f(L_t) against operator_derivative.

    For sums of tones the differences are formed in ``dps``-digit arithmetic
    so that rounding does not mask the O(h^2) truncation error.  Returns the
    list of errors and the fitted order of convergence.
    """
    import mpmath as mp

    la, ma = _mat(L), _mat(M)
    exact = operator_derivative(f, la, ma, order, s)
    tones = isinstance(f, GridFunction) and not f.has_smooth and f.closure is None
    errs = []
    for h in hs:
        if tones:
            with mp.workdps(dps):
                H = mp.mpf(h)
                ls = mp.matrix(la.tolist()) + mp.mpf(s) * mp.matrix((ma - la).tolist())
                kk = mp.matrix((ma - la).tolist())

                def F(t):
                    A = ls + t * kk
                    out = mp.zeros(la.shape[0], la.shape[1])
                    for sig, c in f.atoms:
                        out += mp.mpc(c) * mp.expm(mp.mpc(0, sig) * A)
                    return out

                if order == 1:
                    fd = (F(H) - F(-H)) / (2 * H)
                elif order == 2:
                    fd = (F(H) - 2 * F(0) + F(-H)) / H ** 2
                else:
                    fd = (F(2 * H) - 2 * F(H) + 2 * F(-H) - F(-2 * H)) / (2 * H ** 3)
                fd = np.array(fd.tolist(), dtype=complex)
        else:
            g = lambda t: _oracle(f, la + (s + t) * (ma - la))
            if order == 1:
                fd = (g(h) - g(-h)) / (2 * h)
            elif order == 2:
                fd = (g(h) - 2 * g(0) + g(-h)) / h ** 2
            else:
                fd = (g(2 * h) - 2 * g(h) + 2 * g(-h) - g(-2 * h)) / (2 * h ** 3)
        errs.append(_norm(fd - exact))
    errs = np.array(errs)
    logh = np.log(np.asarray(hs))
    good = errs > 0
    slope = float(np.polyfit(logh[good], np.log(errs[good]), 1)[0]) if good.sum() >= 2 else np.inf
    return errs, slope


# ---------------------------------------------------------------------------
# Hilbert-Schmidt regularization
# ---------------------------------------------------------------------------

def phi_n(n):
    """z -> log((z + i n)/(z + i)) / log n."""
    ln = math.log(n)
    return lambda z: (np.log(np.asarray(z, complex) + 1j * n)
                      - np.log(np.asarray(z, complex) + 1j)) / ln


@dataclass
class HSResult:
    value: np.ndarray
    schedule: list
    gaps: list
    gap: float
    raw: list


def hs_difference(f, L, M, tol_s2=TOL_S2, k_start=4, k_max=40) -> HSResult:
    """lim_n (phi_n f)(L) - (phi_n f)(M) along n = 2^k.

    The regularized difference is affine in 1/log n up to O(1/n), so
    consecutive values are Richardson-extrapolated in u = 1/log n; the Cauchy
    gap is the Hilbert-Schmidt distance between consecutive extrapolants,
    relative to the size of the limit.
    """
    la, ma = _mat(L), _mat(M)
    fn = f if callable(f) else None

    def reg(n):
        p = phi_n(n)
        g = lambda z: p(z) * fn(z)
        return _oracle(g, la) - _oracle(g, ma)

    schedule, raw, extrap, gaps = [], [], [], []
    prev = None
    for k in range(k_start, k_max + 1):
        n = 2.0 ** k
        d = reg(n)
        schedule.append(n)
        raw.append(d)
        if prev is not None:
            u0, u1 = 1 / math.log(n / 2), 1 / math.log(n)
            e = (u0 * d - u1 * prev) / (u0 - u1)
            if extrap:
                scale = max(np.linalg.norm(e), 1e-300)
                gap = float(np.linalg.norm(e - extrap[-1]) / scale)
                gaps.append(gap)
                if gap < tol_s2:
                    return HSResult(e, schedule, gaps, gap, raw)
            extrap.append(e)
        prev = d
    raise NoConvergence("phi_n schedule exhausted", gap=gaps[-1] if gaps else None)


# ---------------------------------------------------------------------------
# Quasicommutators
# ---------------------------------------------------------------------------

def quasicommutator(f, L, M, R, route="direct", bank=None):
    """f(L)R - Rf(M) by the oracle, the LP series or the double operator integral."""
    la, ma = _mat(L), _mat(M)
    r = np.asarray(R, dtype=complex)
    if la.shape != ma.shape or r.shape != la.shape:
        raise ShapeError("L, M and R must have matching shapes")
    if route == "direct":
        return _oracle(f, la) @ r - r @ _oracle(f, ma)
    if route == "lp_series":
        bank = bank or _bank_for(f)
        total = np.zeros_like(la)
        if f.support[0] < 2.0 ** bank.n_min:
            low = lowpass_regularized(f, bank.n_min - 1, bank)
            total += _oracle(low, la) @ r - r @ _oracle(low, ma)
        for n in bank.n_range:
            piece = lp_piece(f, n, bank)
            if piece.is_zero:
                continue
            total += _oracle(piece, la) @ r - r @ _oracle(piece, ma)
        return total
    if route == "doi":
        extent = max(float(np.max(np.abs(np.linalg.eigvals(a).real))) for a in (la, ma))
        rep = rep_first_order(f, extent=extent)
        return evaluate_doi(rep, la, la @ r - r @ ma, ma)
    raise ValueError(f"unknown route {route!r}")


# ---------------------------------------------------------------------------
# Schatten norms
# ---------------------------------------------------------------------------

@dataclass
class SchattenReport:
    singular_values: np.ndarray
    norms: dict
    weak: dict

    def norm(self, p):
        return schatten_norm(self.singular_values, p)


def schatten_norm(sv, p):
    sv = np.asarray(sv, dtype=float)
    if sv.size == 0:
        return 0.0
    if p == np.inf:
        return float(sv[0])
    top = sv[0]
    if top == 0:
        return 0.0
    return float(top * np.sum((sv / top) ** p) ** (1.0 / p))


def weak_quasinorm(sv, q):
    sv = np.asarray(sv, dtype=float)
    if sv.size == 0:
        return 0.0
    j = np.arange(sv.size)
    return float(np.max((1.0 + j) ** (1.0 / q) * sv))


def schatten_report(X, ps=(1, 2, np.inf), qs=()) -> SchattenReport:
    sv = np.linalg.svd(np.asarray(X, dtype=complex), compute_uv=False)
    sv = np.sort(np.clip(sv, 0, None))[::-1]
    return SchattenReport(sv, {p: schatten_norm(sv, p) for p in ps},
                          {q: weak_quasinorm(sv, q) for q in qs})


# ---------------------------------------------------------------------------
# Bound catalog
# ---------------------------------------------------------------------------

@dataclass
class BoundCheck:
    theorem_id: str
    lhs: float
    rhs: float
    ratio: float
    passed: object
    metadata: dict = field(default_factory=dict)


@lru_cache(maxsize=64)
def _holder_cached(key, alpha):
    f = _HOLDER_REGISTRY[key]
    m = math.floor(alpha) + 1
    return holder_seminorm(f, alpha, m)


_HOLDER_REGISTRY = {}


def holder_norm(f: GridFunction, alpha=None):
    """Hoelder-Zygmund seminorm |f|_{Lambda_alpha}, cached per function family."""
    alpha = _alpha_of(f) if alpha is None else alpha
    key = (f.name, tuple(sorted((k, str(v)) for k, v in f.params.items())), f.half_width, f.n_points)
    _HOLDER_REGISTRY.setdefault(key, f)
    return _holder_cached(key, float(alpha))


def _alpha_of(f):
    if f is None or "beta" not in f.params:
        raise NotApplicable("theorem needs a Hoelder family function (z+i)^beta")
    return float(f.params["beta"])


def _require_band_limited(f):
    if not isinstance(f, GridFunction) or not f.bounded or f.support is None \
            or not math.isfinite(f.support[1]) or f.closure is not None:
        raise NotApplicable("theorem needs a band-limited function")
    return f.support[1]


def _require_tone(inst):
    f = inst.f
    if isinstance(f, GridFunction) and not f.has_smooth and len(f.atoms) == 1 \
            and f.atoms[0][1] == 1:
        return f.atoms[0][0]
    if "a" in inst.meta:
        return float(inst.meta["a"])
    raise NotApplicable("theorem needs a single tone e_a")


def _sup(f):
    return f.sup_norm()


def _difference(inst):
    return _oracle(inst.f, inst.L) - _oracle(inst.f, inst.M)


def _m_difference(inst):
    return binomial_difference(inst.f, inst.L, inst.K, inst.m)


def _qc(inst):
    if inst.R is None:
        raise NotApplicable("theorem needs an operator R")
    return quasicommutator(inst.f, inst.L, inst.M, inst.R)


def _theorem_ex(inst):
    a = _require_tone(inst)
    lhs = _norm(semigroup(inst.L, a) - semigroup(inst.M, a))
    return lhs, a * _norm(inst.L - inst.M), True, {"a": a}


def _theorem_sle(inst):
    sigma = _require_band_limited(inst.f)
    lhs = _norm(_difference(inst))
    return lhs, 8 * sigma * _sup(inst.f) * _norm(inst.L - inst.M), True, {"sigma": sigma}


def _theorem_sle_sa(inst):
    sigma = _require_band_limited(inst.f)
    for a in (inst.L, inst.M):
        if np.linalg.norm(a - a.conj().T) > 1e-12 * max(1.0, _norm(a)):
            raise NotApplicable("self-adjoint specialization needs self-adjoint L, M")
    lhs = _norm(_difference(inst))
    return lhs, sigma * _sup(inst.f) * _norm(inst.L - inst.M), True, {"sigma": sigma}


def _theorem_OHd(inst):
    alpha = _alpha_of(inst.f)
    lhs = _norm(_difference(inst))
    rhs = holder_norm(inst.f) * _norm(inst.L - inst.M) ** alpha / (1 - alpha)
    return lhs, rhs, False, {"alpha": alpha}


def _theorem_amc(inst):
    alpha = _alpha_of(inst.f)
    lhs = _norm(_difference(inst))
    c = holder_norm(inst.f)
    rhs = omega_star(Modulus.power(alpha), 1, _norm(inst.L - inst.M)) * c
    return lhs, rhs, False, {"alpha": alpha}


def _theorem_nstar(inst):
    alpha = _alpha_of(inst.f)
    lhs = _norm(_difference(inst))
    rhs = holder_norm(inst.f) * _norm(inst.L - inst.M) ** alpha
    return lhs, rhs, False, {"alpha": alpha}


def _besov_norm(f, s):
    lo, hi = f.support
    bank = build_kernel_bank(math.floor(math.log2(lo)) - 1, math.ceil(math.log2(hi)) + 1)
    return besov_seminorm(f, s, np.inf, 1, bank)


def _theorem_Kn(inst):
    _require_band_limited(inst.f)
    lhs = _norm(_m_difference(inst))
    rhs = _besov_norm(inst.f, inst.m) * _norm(inst.K) ** inst.m
    return lhs, rhs, False, {"m": inst.m}


def _alpha_m(inst):
    alpha = inst.alpha if inst.alpha is not None else _alpha_of(inst.f)
    if not 0 < alpha < inst.m:
        raise NotApplicable("need 0 < alpha < m")
    return alpha


def _theorem_alfam(inst):
    alpha = _alpha_m(inst)
    lhs = _norm(_m_difference(inst))
    rhs = holder_norm(inst.f, alpha) * _norm(inst.K) ** alpha
    return lhs, rhs, False, {"alpha": alpha, "m": inst.m}


def _theorem_Lom(inst):
    alpha = _alpha_m(inst)
    lhs = _norm(_m_difference(inst))
    rhs = holder_norm(inst.f, alpha) * omega_star(Modulus.power(alpha, inst.m), inst.m,
                                                  _norm(inst.K))
    return lhs, rhs, False, {"alpha": alpha, "m": inst.m}


def _sv(a):
    return np.linalg.svd(a, compute_uv=False)


def _theorem_spm(inst):
    sigma = _require_band_limited(inst.f)
    if inst.p < inst.m:
        raise NotApplicable("need p >= m")
    lhs = schatten_norm(_sv(_m_difference(inst)), inst.p / inst.m)
    rhs = sigma ** inst.m * _sup(inst.f) * schatten_norm(_sv(inst.K), inst.p) ** inst.m
    return lhs, rhs, False, {"p": inst.p, "m": inst.m}


def _theorem_Spa(inst):
    alpha = _alpha_m(inst)
    lhs = schatten_norm(_sv(_m_difference(inst)), inst.p / alpha)
    rhs = holder_norm(inst.f, alpha) * schatten_norm(_sv(inst.K), inst.p) ** alpha
    return lhs, rhs, False, {"p": inst.p, "alpha": alpha}


def _theorem_Spbe(inst):
    alpha = _alpha_m(inst)
    lhs = weak_quasinorm(_sv(_m_difference(inst)), inst.m / alpha)
    rhs = holder_norm(inst.f, alpha) * schatten_norm(_sv(inst.K), inst.m) ** alpha
    return lhs, rhs, False, {"alpha": alpha}


def _theorem_SpBes(inst):
    _require_band_limited(inst.f)
    alpha = inst.alpha if inst.alpha is not None else float(inst.m)
    if not (inst.m - 1 <= alpha <= inst.m):
        raise NotApplicable("need m-1 <= alpha <= m")
    lhs = schatten_norm(_sv(_m_difference(inst)), inst.m / alpha)
    rhs = _besov_norm(inst.f, alpha) * schatten_norm(_sv(inst.K), inst.m) ** alpha
    return lhs, rhs, False, {"alpha": alpha}


def chs_partial_sums(inst):
    """Partial sums of both sides of the singular value domination, l = 0..n-1."""
    alpha = _alpha_m(inst)
    p = inst.p
    d = _sv(_m_difference(inst))
    k = _sv(inst.K)
    c = holder_norm(inst.f, alpha) ** (p / alpha)
    lhs = np.cumsum(d ** (p / alpha))
    rhs = c * np.cumsum(k ** p)
    return lhs, rhs


def _theorem_chsSp(inst):
    lhs, rhs = chs_partial_sums(inst)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(rhs > 0, lhs / rhs, np.inf)
    j = int(np.argmax(ratios))
    return float(lhs[j]), float(rhs[j]), False, {"ratios": ratios.tolist(), "l": j}


def _theorem_HSLi(inst):
    f = inst.f
    if f is None or "lipschitz" not in f.params:
        raise NotApplicable("theorem needs a Lipschitz family function log(z + ic)")
    res = hs_difference(f, inst.L, inst.M)
    lhs = float(np.linalg.norm(res.value))
    rhs = f.params["lipschitz"] * float(np.linalg.norm(inst.L - inst.M))
    return lhs, rhs, True, {"gap": res.gap, "n_final": res.schedule[-1]}


def _theorem_sigma(inst):
    sigma = _require_band_limited(inst.f)
    lhs = _norm(_qc(inst))
    comm = inst.L @ inst.R - inst.R @ inst.M
    return lhs, 8 * sigma * _sup(inst.f) * _norm(comm), True, {"sigma": sigma}


def _theorem_comH(inst):
    alpha = _alpha_of(inst.f)
    lhs = _norm(_qc(inst))
    comm = inst.L @ inst.R - inst.R @ inst.M
    rhs = holder_norm(inst.f) * _norm(comm) ** alpha * _norm(inst.R) ** (1 - alpha)
    return lhs, rhs, False, {"alpha": alpha}


def _theorem_modne(inst):
    alpha = _alpha_of(inst.f)
    lhs = _norm(_qc(inst))
    comm = inst.L @ inst.R - inst.R @ inst.M
    r = _norm(inst.R)
    rhs = holder_norm(inst.f) * r * omega_star(Modulus.power(alpha), 1, _norm(comm) / r)
    return lhs, rhs, False, {"alpha": alpha}


def _theorem_comSp(inst):
    alpha = _alpha_of(inst.f)
    lhs = schatten_norm(_sv(_qc(inst)), inst.p / alpha)
    comm = inst.L @ inst.R - inst.R @ inst.M
    rhs = (holder_norm(inst.f) * schatten_norm(_sv(comm), inst.p) ** alpha
           * _norm(inst.R) ** (1 - alpha))
    return lhs, rhs, False, {"alpha": alpha, "p": inst.p}


@dataclass(frozen=True)
class Theorem:
    theorem_id: str
    compute: Callable
    explicit: bool
    family: str
    envelope: str


THEOREMS = {
    "ex": Theorem("ex", _theorem_ex, True, "tone", "a||L-M||"),
    "sle": Theorem("sle", _theorem_sle, True, "band_limited", "8 sigma ||f||_inf ||L-M||"),
    "sle_sa": Theorem("sle_sa", _theorem_sle_sa, True, "band_limited",
                      "sigma ||f||_inf ||L-M|| (self-adjoint)"),
    "OHd": Theorem("OHd", _theorem_OHd, False, "holder", "(1-a)^-1 |f|_a ||L-M||^a"),
    "amc": Theorem("amc", _theorem_amc, False, "holder", "|f|_a omega_*(||L-M||)"),
    "n*": Theorem("n*", _theorem_nstar, False, "holder", "|f|_a omega(||L-M||)"),
    "Kn": Theorem("Kn", _theorem_Kn, False, "band_limited", "||f||_B^m ||K||^m"),
    "alfam": Theorem("alfam", _theorem_alfam, False, "holder", "|f|_a ||K||^a"),
    "Lom": Theorem("Lom", _theorem_Lom, False, "holder", "|f|_a omega_*m(||K||)"),
    "spm": Theorem("spm", _theorem_spm, False, "band_limited",
                   "sigma^m ||f||_inf ||K||_Sp^m"),
    "Spa": Theorem("Spa", _theorem_Spa, False, "holder", "|f|_a ||K||_Sp^a"),
    "Spbe": Theorem("Spbe", _theorem_Spbe, False, "holder", "|f|_a ||K||_Sm^a (weak)"),
    "SpBes": Theorem("SpBes", _theorem_SpBes, False, "band_limited",
                     "||f||_B^a ||K||_Sm^a"),
    "chsSp": Theorem("chsSp", _theorem_chsSp, False, "holder",
                     "|f|_a^(p/a) sum_j<=l s_j(K)^p"),
    "HSLi": Theorem("HSLi", _theorem_HSLi, True, "log", "||f'||_inf ||L-M||_S2"),
    "sigma": Theorem("sigma", _theorem_sigma, True, "band_limited",
                     "8 sigma ||f||_inf ||LR-RM||"),
    "comH": Theorem("comH", _theorem_comH, False, "holder",
                    "|f|_a ||LR-RM||^a ||R||^(1-a)"),
    "modne": Theorem("modne", _theorem_modne, False, "holder",
                     "|f|_a ||R|| omega_*(||LR-RM||/||R||)"),
    "comSp": Theorem("comSp", _theorem_comSp, False, "holder",
                     "|f|_a ||LR-RM||_Sp^a ||R||^(1-a)"),
}


def bound_check(theorem_id, instance: PerturbationInstance, tol_bound=TOL_BOUND) -> BoundCheck:
    """Evaluate one catalog inequality on an instance."""
    if theorem_id not in THEOREMS:
        raise NotApplicable(f"unknown theorem id {theorem_id!r}")
    th = THEOREMS[theorem_id]
    lhs, rhs, explicit, meta = th.compute(instance)
    if rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0 if lhs == 0 else np.inf
    passed = bool(ratio <= 1 + tol_bound) if explicit else None
    meta = dict(meta, digest=instance.digest(), seed=instance.seed, trial=instance.trial)
    return BoundCheck(theorem_id, float(lhs), float(rhs), float(ratio), passed, meta)


@dataclass
class SlopeFit:
    slope: float
    residual: float
    ts: np.ndarray
    lhs: np.ndarray
    ratios: np.ndarray


def scaling_exponent(theorem_id, instance: PerturbationInstance, t_sweep) -> SlopeFit:
    """Least-squares slope of log lhs against log t along M_t = base + t * direction."""
    ts = np.asarray(t_sweep, dtype=float)
    if ts.size < 8:
        raise SweepDegenerate("need at least 8 sweep points")
    values, ratios = [], []
    for t in ts:
        bc = bound_check(theorem_id, instance.perturbed(t))
        values.append(bc.lhs)
        ratios.append(bc.ratio)
    v = np.asarray(values)
    if not np.all(np.isfinite(v)) or np.any(v <= 1e-300):
        raise SweepDegenerate("left-hand side underflows along the sweep")
    x, y = np.log(ts), np.log(v)
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    resid = float(np.sqrt(res[0] / ts.size)) if res.size else 0.0
    return SlopeFit(float(coef[0]), resid, ts, v, np.asarray(ratios))


def diagonal_contribution(L, M):
    """Atom-pair part of the double operator integral with Q = L - M.

    Sums E_L({t}) (L - M) E_M({t}) over shared real eigenvalues t of the
    self-adjoint parts; it vanishes identically.
    """
    la, ma = _mat(L), _mat(M)
    sl, sm = split_sa_pure(la), split_sa_pure(ma)
    total = np.zeros_like(la)
    if sl.Q_sa.shape[1] == 0 or sm.Q_sa.shape[1] == 0:
        return total
    lam, ul = np.linalg.eigh(sl.L0)
    mu, um = np.linalg.eigh(sm.L0)
    vl = sl.Q_sa @ ul
    vm = sm.Q_sa @ um
    q = la - ma
    for i, a in enumerate(lam):
        for j, b in enumerate(mu):
            if abs(a - b) <= 1e-9 * max(1.0, abs(a)):
                pl = np.outer(vl[:, i], vl[:, i].conj())
                pm = np.outer(vm[:, j], vm[:, j].conj())
                total += pl @ q @ pm
    return total
