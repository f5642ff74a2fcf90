"""Divided differences and multiple operator integrals from explicit representations.

For analytic-class f with spectrum in [0, b] the divided difference of order m
has the separable representation

    D^m f(x_1..x_{m+1}) = i^m sum_j int_{xi >= 0} f_(s_j)(x_j) prod_{l != j} exp(i xi_l x_l) dxi,

with s_j = sum_{l != j} xi_l; since f_(s) = 0 for s >= b the integration runs
over a simplex.  A :class:`TensorRep` stores the quadrature of this formula as
a list of separable terms; operator integrals are then finite sums of products
of matrix functions, evaluated here in the eigenbases of the operators.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._quad import gl_on_edges, panel_edges
from .dissipative_core import COND_LIMIT, DissipativeMatrix, classify, semigroup_stack
from .errors import (AnalyticClassViolation, ConfluenceError, NotSelfAdjoint,
                     ShapeError, SynthesisError, Unsupported)
from .function_spaces import GridFunction, f_sub_a
from .functional_calculus import _derivative_fn, f_of_L_oracle, schur_parlett

DELTA_CONF = 1e-6
MAX_ORDER = 3


# ---------------------------------------------------------------------------
# Divided differences
# ---------------------------------------------------------------------------

def _values(f, x):
    return np.asarray(f(np.asarray(x, dtype=complex)), dtype=complex)


def dd_recursive(f, points):
    """Newton table: D(x1..xk) = (D(x1..x_{k-1}) - D(x2..xk)) / (x1 - xk)."""
    x = np.asarray(points, dtype=complex)
    table = _values(f, x)
    n = x.size
    for k in range(1, n):
        table = (table[:-1] - table[1:]) / (x[:n - k] - x[k:])
    return complex(table[0])


def dd_product(f, points):
    """sum_k f(x_k) prod_{j != k} (x_k - x_j)^{-1}."""
    x = np.asarray(points, dtype=complex)
    vals = _values(f, x)
    total = 0j
    for k in range(x.size):
        others = np.delete(x, k)
        total += vals[k] / np.prod(x[k] - others)
    return complex(total)


def dd_confluent(f, points, deriv=None):
    """Hermite divided difference: entry (0, m) of f applied to the Opitz matrix.

    The Opitz matrix is bidiagonal with the nodes on the diagonal and ones
    above it; clustered nodes are handled by the Taylor blocks of the
    Schur-Parlett recurrence, which uses derivatives of f.
    """
    x = np.asarray(points, dtype=complex)
    n = x.size
    j = np.diag(x) + np.diag(np.ones(n - 1), 1)
    deriv = deriv if deriv is not None else _derivative_fn(f)
    if deriv is None:
        raise ConfluenceError("confluent nodes need derivatives of f")
    fj = schur_parlett(j, f, deriv, delta=0.1)
    return complex(fj[0, n - 1])


def divided_difference(f, points, method="auto", deriv=None, delta_conf=DELTA_CONF):
    """Divided difference of order len(points)-1.

    ``method`` is ``"recursion"``, ``"product"``, ``"confluent"`` or
    ``"auto"``; the automatic choice uses the recursion for well separated
    nodes and the Hermite rule when two nodes are within ``delta_conf * scale``.
    """
    x = np.asarray(points, dtype=complex).ravel()
    if x.size == 0:
        raise ValueError("need at least one point")
    if x.size == 1:
        return complex(_values(f, x)[0])
    scale = max(1.0, float(np.max(np.abs(x))))
    gaps = np.abs(x[:, None] - x[None, :])[np.triu_indices(x.size, 1)]
    confluent = bool(np.any(gaps < delta_conf * scale))
    if method == "auto":
        method = "confluent" if confluent else "recursion"
    if method in ("recursion", "product") and confluent:
        method = "confluent"
    if method == "recursion":
        return dd_recursive(f, x)
    if method == "product":
        return dd_product(f, x)
    if method == "confluent":
        if deriv is None and _derivative_fn(f) is None:
            raise ConfluenceError("confluent nodes need derivatives of f")
        return dd_confluent(f, x, deriv)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class DividedDifference:
    """Cached evaluator of D^m f."""

    f: object
    order: int
    cache: dict = field(default_factory=dict)

    def __call__(self, *points):
        if len(points) != self.order + 1:
            raise ShapeError(f"order {self.order} needs {self.order + 1} points")
        key = tuple(sorted((complex(p).real, complex(p).imag) for p in points))
        if key not in self.cache:
            self.cache[key] = divided_difference(self.f, points)
        return self.cache[key]


# ---------------------------------------------------------------------------
# Scalar evaluation of f_(s)
# ---------------------------------------------------------------------------

def fsub_values(f: GridFunction, s, z, panels=None):
    """f_(s)(z) for arrays s (S,) and z (Z,), shape (S, Z).

    Uses f_(s)(z) = (1/2pi) int_{eta > s} (1 - s/eta) F(eta) exp(i (eta - s) z) d eta
    plus the shifted tones.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros((s.size, z.size), complex)
    for sig, c in f.atoms:
        live = s < sig
        if live.any():
            sl = s[live]
            out[live] += (c * (sig - sl) / sig)[:, None] * np.exp(
                1j * np.multiply.outer(sig - sl, z))
    if not f.has_smooth:
        return out
    lo, hi = f.quad_band
    extent = float(np.max(np.abs(z.real))) if z.size else 0.0
    if panels is None:
        panels = max(8, math.ceil((hi - lo) * max(f.panels_per_unit, (extent + 1) / 4.0)))
    x, w = leggauss(16)
    live = s < hi
    for idx in np.nonzero(live)[0]:
        a = max(s[idx], lo)
        edges = panel_edges(a, hi, panels, [b for b in f.breakpoints])
        eta, wt = gl_on_edges(edges, 16)
        g = (1.0 - s[idx] / eta) * np.asarray(f.spectrum(eta), dtype=complex) * wt
        out[idx] += np.exp(1j * np.multiply.outer(z, eta - s[idx])) @ g / (2 * np.pi)
    return out


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------

def _simplex_rule(dim, nodes):
    """Points u (Q, dim+1) on the standard simplex and weights (volume-normalized by du)."""
    if dim == 0:
        return np.ones((1, 1)), np.ones(1)
    x, w = leggauss(nodes)
    t = (x + 1) / 2
    wt = w / 2
    if dim == 1:
        return np.stack([t, 1 - t], axis=1), wt
    if dim == 2:
        a, b = np.meshgrid(t, t, indexing="ij")
        wa, wb = np.meshgrid(wt, wt, indexing="ij")
        u1 = a
        u2 = (1 - a) * b
        u3 = 1 - u1 - u2
        pts = np.stack([u1.ravel(), u2.ravel(), u3.ravel()], axis=1)
        return pts, (wa * wb * (1 - a)).ravel()
    raise Unsupported(f"simplex rule of dimension {dim} not implemented")


@dataclass(eq=False)
class TensorRep:
    """Quadrature representation of D^m f as a sum of separable terms.

    Terms are stored as arrays: ``weights`` (T,), ``fsub_slot`` (T,) giving
    the slot that carries f_(s), and ``params`` (T, m+1) holding the tone
    frequencies, with the f_(s) parameter in the ``fsub_slot`` column.
    """

    f: GridFunction
    order: int
    weights: np.ndarray
    fsub_slot: np.ndarray
    params: np.ndarray
    sigma: float
    extent: float

    @property
    def m(self):
        return self.order - 1

    @property
    def size(self):
        return self.weights.size

    @property
    def terms(self):
        """List of (weight, factors); factors are ('tone', xi) or ('fsub', a)."""
        out = []
        for t in range(self.size):
            j = self.fsub_slot[t]
            fac = tuple(("fsub", float(p)) if k == j else ("tone", float(p))
                        for k, p in enumerate(self.params[t]))
            out.append((complex(self.weights[t]), fac))
        return out

    @cached_property
    def fsub_sup_norms(self):
        """sup over the real line of |f_(s)| at each distinct parameter s."""
        vals = np.unique(self.params[np.arange(self.size), self.fsub_slot])
        grid = dict(half_width=self.f.half_width, n_points=2 ** 14)
        base = self.f.with_(**grid)
        return {float(s): f_sub_a(base, float(s)).sup_norm() if s > 0 else base.sup_norm()
                for s in vals}

    @property
    def bound_estimate(self):
        """sum |weight| * prod sup-norms (tones have unit sup norm on the line)."""
        if self.size == 0:
            return 0.0
        sups = self.fsub_sup_norms
        s = self.params[np.arange(self.size), self.fsub_slot]
        return float(np.sum(np.abs(self.weights) * np.array([sups[float(v)] for v in s])))

    def lattice(self, zs):
        """Evaluate the representation on the product lattice zs[0] x ... x zs[m]."""
        zs = [np.atleast_1d(np.asarray(z, dtype=complex)) for z in zs]
        if len(zs) != self.order:
            raise ShapeError(f"order {self.order} rep needs {self.order} axes")
        shape = tuple(z.size for z in zs)
        total = np.zeros(shape, complex)
        if self.size == 0:
            return total
        letters = "abcd"[: self.order]
        for j in range(self.order):
            sel = self.fsub_slot == j
            if not sel.any():
                continue
            w = self.weights[sel]
            p = self.params[sel]
            s_unique, inv = np.unique(p[:, j], return_inverse=True)
            fv = fsub_values(self.f, s_unique, zs[j])[inv]
            factors = []
            for k in range(self.order):
                if k == j:
                    factors.append(fv)
                else:
                    factors.append(np.exp(1j * np.multiply.outer(p[:, k], zs[k])))
            spec = "t," + ",".join("t" + letters[k] for k in range(self.order))
            total += np.einsum(spec + "->" + letters, w, *factors, optimize=True)
        return total

    def evaluate(self, points):
        """Pointwise values at points of shape (P, m+1)."""
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        out = np.empty(pts.shape[0], complex)
        for i, row in enumerate(pts):
            out[i] = self.lattice([[v] for v in row]).ravel()[0]
        return out

    def to_csv(self, path):
        """Audit dump: slot count, node parameters, weight and per-slot sup norms."""
        sups = self.fsub_sup_norms if self.size else {}
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["slots", "fsub_slot"] + [f"param{k}" for k in range(self.order)]
                        + ["weight_re", "weight_im"] + [f"sup{k}" for k in range(self.order)])
            for t in range(self.size):
                j = int(self.fsub_slot[t])
                p = self.params[t]
                sup = [1.0 if k != j else sups[float(p[j])] for k in range(self.order)]
                wr.writerow([self.order, j] + [f"{v:.17g}" for v in p]
                            + [f"{self.weights[t].real:.17g}", f"{self.weights[t].imag:.17g}"]
                            + [f"{v:.17g}" for v in sup])


def _check_rep_input(f, sigma):
    if not isinstance(f, GridFunction):
        raise SynthesisError("representations need frequency data")
    if not f.analytic or f.band[0] < 0:
        raise AnalyticClassViolation(f"{f.name} is not of analytic class")
    sup = f.support
    if sup is None:
        return 0.0
    if f.has_smooth and not f.integrable:
        raise SynthesisError(f"{f.name}: spectrum not integrable")
    top = sup[1]
    if sigma is None:
        sigma = top
    if top > sigma * (1 + 1e-12):
        raise AnalyticClassViolation(f"band top {top} exceeds sigma={sigma}")
    return float(sigma)


def rep_order(f: GridFunction, m: int, sigma=None, extent=8.0, refine=1) -> TensorRep:
    """Separable representation of D^m f for m <= 3.

    ``extent`` bounds |Re x| on the evaluation set and sets the resolution of
    the radial (s) and simplex quadratures; ``refine`` multiplies both.
    """
    if m < 1:
        raise ValueError("order m must be at least 1")
    if m > MAX_ORDER:
        raise Unsupported(f"representations implemented up to order {MAX_ORDER}")
    if f.is_zero:
        return TensorRep(f, m + 1, np.zeros(0, complex), np.zeros(0, int),
                         np.zeros((0, m + 1)), 0.0, extent)
    sigma = _check_rep_input(f, sigma)
    breaks = [s for s, _ in f.atoms] + list(f.quad_band if f.has_smooth else ())
    breaks += list(f.breakpoints)
    top = max(breaks) if breaks else 0.0
    panels = max(4, math.ceil(top * (extent + 1) / 3.0)) * refine
    edges = panel_edges(0.0, top, panels, breaks)
    s, ws = gl_on_edges(edges, 16)
    nu = (max(8, math.ceil(top * (extent + 1) / 2.0) + 6)) * refine
    u, wu = _simplex_rule(m - 1, nu)
    # radial times simplex: xi = s * u, jacobian s^(m-1)
    S = np.repeat(s, u.shape[0])
    W = np.repeat(ws * s ** (m - 1), u.shape[0]) * np.tile(wu, s.size)
    Ux = np.tile(u, (s.size, 1))
    xi = S[:, None] * Ux
    weights, slots, params = [], [], []
    for j in range(m + 1):
        p = np.empty((S.size, m + 1))
        others = [k for k in range(m + 1) if k != j]
        p[:, others] = xi
        p[:, j] = S
        weights.append((1j) ** m * W)
        slots.append(np.full(S.size, j))
        params.append(p)
    weights = np.concatenate(weights).astype(complex)
    keep = weights != 0
    return TensorRep(f, m + 1, weights[keep], np.concatenate(slots)[keep],
                     np.concatenate(params)[keep], sigma, float(extent))


def rep_first_order(f: GridFunction, sigma=None, extent=8.0, refine=1) -> TensorRep:
    """i int e^{i xi x} f_(xi)(y) d xi + i int f_(eta)(x) e^{i eta y} d eta over [0, sigma]."""
    return rep_order(f, 1, sigma, extent, refine)


def rep_second_order(f: GridFunction, sigma=None, extent=8.0, refine=1) -> TensorRep:
    """Three-term representation of D^2 f with prefactor -1."""
    return rep_order(f, 2, sigma, extent, refine)


# ---------------------------------------------------------------------------
# Operator integrals
# ---------------------------------------------------------------------------

def _eig(L):
    if isinstance(L, DissipativeMatrix):
        ed = L.eigendata
        return ed.values, ed.vectors, ed.inverse, ed.condition
    a = np.asarray(L, dtype=complex)
    w, v = np.linalg.eig(a)
    cond = float(np.linalg.cond(v))
    return w, v, np.linalg.inv(v) if np.isfinite(cond) else None, cond


def _ensure_extent(rep, zs):
    need = max(float(np.max(np.abs(np.real(z)))) for z in zs)
    if need > rep.extent:
        return rep_order(rep.f, rep.m, rep.sigma, extent=need)
    return rep


def evaluate_moi(rep: TensorRep, measures, Ks, method="lattice"):
    """sum_terms w * phi_1(L_1) K_1 phi_2(L_2) ... K_m phi_{m+1}(L_{m+1}).

    The lattice method evaluates the representation on the eigenvalue lattice
    of the operators and contracts with the perturbations written in the
    eigenbases; ``method="terms"`` sums matrix products term by term.
    """
    if len(measures) != rep.order or len(Ks) != rep.order - 1:
        raise ShapeError("need m+1 operators and m perturbations")
    mats = [np.asarray(L, dtype=complex) for L in measures]
    ks = [np.asarray(K, dtype=complex) for K in Ks]
    n = mats[0].shape[0]
    for a in mats + ks:
        if a.shape != (n, n):
            raise ShapeError("operator shapes differ")
    if rep.size == 0 or any(not np.any(k) for k in ks):
        return np.zeros((n, n), complex)
    eigs = [_eig(L) for L in measures]
    if method == "terms" or any(e[3] > COND_LIMIT for e in eigs):
        return _moi_terms(rep, measures, ks)
    rep = _ensure_extent(rep, [e[0] for e in eigs])
    phi = rep.lattice([e[0] for e in eigs])
    kt = [eigs[j][2] @ ks[j] @ eigs[j + 1][1] for j in range(len(ks))]
    if rep.order == 2:
        core = phi * kt[0]
    elif rep.order == 3:
        core = np.einsum("abc,ab,bc->ac", phi, kt[0], kt[1], optimize=True)
    else:
        core = np.einsum("abcd,ab,bc,cd->ad", phi, kt[0], kt[1], kt[2], optimize=True)
    return eigs[0][1] @ core @ eigs[-1][2]


def _slot_matrix(rep, L, kind, p):
    if kind == "tone":
        return semigroup_stack(L, [p])[0]
    g = f_sub_a(rep.f, p) if p > 0 else rep.f
    return f_of_L_oracle(g, classify(L) if not isinstance(L, DissipativeMatrix) else L).value


def _moi_terms(rep, measures, ks):
    """Term-by-term evaluation; each factor computed as a matrix function."""
    n = ks[0].shape[0]
    total = np.zeros((n, n), complex)
    cache = {}
    for w, factors in rep.terms:
        prod = None
        for j, (kind, p) in enumerate(factors):
            key = (j, kind, p)
            if key not in cache:
                cache[key] = _slot_matrix(rep, measures[j], kind, p)
            mat = cache[key]
            prod = mat if prod is None else prod @ ks[j - 1] @ mat
        total += w * prod
    return total


def evaluate_doi(rep: TensorRep, L, Q, M, method="lattice"):
    """Double operator integral with measures of L and M and middle factor Q."""
    return evaluate_moi(rep, [L, M], [Q], method)


def schur_doi_selfadjoint(f, A, B, Q, delta_conf=DELTA_CONF):
    """Schur product of U*QV with [D f(lambda_i, mu_j)] for self-adjoint A, B.

    Coincident eigenvalues use f', by central differences for plain callables.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    for name, X in (("A", A), ("B", B)):
        if np.linalg.norm(X - X.conj().T) > 1e-10 * max(1.0, np.linalg.norm(X)):
            raise NotSelfAdjoint(f"{name} is not self-adjoint")
    lam, u = np.linalg.eigh((A + A.conj().T) / 2)
    mu, v = np.linalg.eigh((B + B.conj().T) / 2)
    fl = _values(f, lam)
    fm = _values(f, mu)
    diff = lam[:, None] - mu[None, :]
    scale = max(1.0, float(np.max(np.abs(np.concatenate([lam, mu])))))
    close = np.abs(diff) <= delta_conf * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (fl[:, None] - fm[None, :]) / diff
    if close.any():
        der = _derivative_fn(f)
        mid = (lam[:, None] + mu[None, :])[close] / 2
        if der is None:
            # central difference for plain callables
            h = np.finfo(float).eps ** (1 / 3) * scale
            d[close] = (_values(f, mid + h) - _values(f, mid - h)) / (2 * h)
        else:
            d[close] = _values(der(1), mid)
    return u @ (d * (u.conj().T @ Q @ v)) @ v.conj().T


def second_duhamel(L, K, x, panels=None, order=16):
    """Double integral -2 int_0^x int_0^xi e^{i(x-xi)L} K e^{i(xi-eta)(L+K)} K e^{i eta(L+2K)}.

    Equals exp(ix(L+2K)) - 2 exp(ix(L+K)) + exp(ixL).
    """
    L = np.asarray(L, dtype=complex)
    K = np.asarray(K, dtype=complex)
    scale = max(np.linalg.norm(L, 2) + 2 * np.linalg.norm(K, 2), 1.0)
    if panels is None:
        panels = max(2, math.ceil(x * scale / 2.0))
    xi, wx = gl_on_edges(np.linspace(0, x, panels + 1), order)
    e_l = semigroup_stack(L, x - xi)
    total = np.zeros(L.shape, complex)
    for a, wa, el in zip(xi, wx, e_l):
        if a == 0:
            continue
        eta, we = gl_on_edges(np.linspace(0, a, panels + 1), order)
        mid = semigroup_stack(L + K, a - eta)
        right = semigroup_stack(L + 2 * K, eta)
        inner = np.tensordot(we, mid @ K[None] @ right, axes=1)
        total += wa * (el @ K @ inner)
    return -2 * total
