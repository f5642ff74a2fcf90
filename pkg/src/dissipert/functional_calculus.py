"""f(L) for analytic-class f and dissipative L, by independent routes.

* ``oracle_diag``: eigendecomposition V f(diag) V^{-1}, with a Schur-Parlett
  fallback for ill-conditioned or defective eigenvectors.
* ``fourier_synthesis``: (1/2pi) integral (F f)(xi) exp(i xi L) dxi plus tones.
* ``density_quadrature``: integral f dE_L against the semi-spectral density.
* ``cayley``: (f o omega)(T) evaluated by the oracle on T = cayley(L).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ._quad import gl_on_edges
from .dissipative_core import (COND_LIMIT, DissipativeMatrix, cayley, classify,
                               semi_spectral_density, semigroup_stack)
from .errors import DomainError, SynthesisError, Unsupported
from .function_spaces import GridFunction

EPS = np.finfo(float).eps
TOL_FC = 1e-6


@dataclass(frozen=True, eq=False)
class CalcResult:
    value: np.ndarray
    route: str
    error_estimate: float
    meta: dict = None


def _evaluate(f, z):
    z = np.asarray(z, dtype=complex)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(z), dtype=complex)
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape).astype(complex)
    if not np.all(np.isfinite(vals)):
        raise DomainError("f is not evaluable at an eigenvalue")
    return vals


def _derivative_fn(f):
    """Return k -> k-th derivative callable, or None when unavailable."""
    if isinstance(f, GridFunction):
        def der(k):
            g = f.derivative(k)
            return lambda z: g(z)
        return der
    if hasattr(f, "derivative"):
        return lambda k: f.derivative(k)
    return None


# ---------------------------------------------------------------------------
# Schur-Parlett
# ---------------------------------------------------------------------------

def _blocking(eigs, delta=0.1):
    """Davies-Higham clustering: eigenvalues closer than delta share a block."""
    n = eigs.size
    label = list(range(n))

    def find(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= delta:
                label[find(i)] = find(j)
    roots = [find(i) for i in range(n)]
    uniq = {r: k for k, r in enumerate(dict.fromkeys(roots))}
    return np.array([uniq[r] for r in roots])


def _swap_to_blocks(t, z, groups):
    """Reorder the Schur form so that equal group labels are contiguous."""
    n = t.shape[0]
    order = np.argsort(groups, kind="stable")
    t = t.copy()
    z = z.copy()
    current = list(groups)
    target = [groups[i] for i in order]
    # bubble the diagonal entries into place with Givens swaps
    for pos in range(n):
        want = target[pos]
        j = next(k for k in range(pos, n) if current[k] == want)
        for k in range(j - 1, pos - 1, -1):
            _swap_adjacent(t, z, k)
            current[k], current[k + 1] = current[k + 1], current[k]
    return t, z, np.array(current)


def _swap_adjacent(t, z, k):
    a, b, c = t[k, k], t[k, k + 1], t[k + 1, k + 1]
    if a == c:
        return
    x = np.array([b, c - a])
    g = np.linalg.norm(x)
    if g == 0:
        return
    cs, sn = x[0] / g, x[1] / g
    rot = np.array([[np.conj(cs), np.conj(sn)], [-sn, cs]])
    t[k:k + 2, :] = rot @ t[k:k + 2, :]
    t[:, k:k + 2] = t[:, k:k + 2] @ rot.conj().T
    z[:, k:k + 2] = z[:, k:k + 2] @ rot.conj().T
    t[k + 1, k] = 0.0


def _taylor_block(f, deriv, tb, max_terms=60):
    """f on a triangular block with clustered spectrum by Taylor expansion."""
    m = tb.shape[0]
    mu = np.mean(np.diag(tb))
    if m == 1:
        return np.array([[_evaluate(f, np.array([tb[0, 0]]))[0]]])
    if deriv is None:
        raise DomainError("clustered eigenvalues need derivatives of f")
    n_ = tb - mu * np.eye(m)
    out = _evaluate(f, np.array([mu]))[0] * np.eye(m, dtype=complex)
    power = np.eye(m, dtype=complex)
    for k in range(1, max_terms):
        power = power @ n_ / k
        dk = _evaluate(deriv(k), np.array([mu]))[0]
        term = dk * power
        out = out + term
        if np.linalg.norm(term) <= EPS * np.linalg.norm(out) and k >= m:
            break
    return out


def schur_parlett(a, f, deriv=None, delta=0.1):
    """f(A) by the blocked Schur-Parlett recurrence."""
    t, z = sla.schur(np.asarray(a, dtype=complex), output="complex")
    groups = _blocking(np.diag(t), delta)
    t, z, labels = _swap_to_blocks(t, z, groups)
    bounds = []
    start = 0
    for k in range(1, labels.size + 1):
        if k == labels.size or labels[k] != labels[start]:
            bounds.append((start, k))
            start = k
    n = t.shape[0]
    ft = np.zeros((n, n), complex)
    for (i0, i1) in bounds:
        ft[i0:i1, i0:i1] = _taylor_block(f, deriv, t[i0:i1, i0:i1])
    nb = len(bounds)
    for d in range(1, nb):
        for bi in range(nb - d):
            bj = bi + d
            (i0, i1), (j0, j1) = bounds[bi], bounds[bj]
            tii = t[i0:i1, i0:i1]
            tjj = t[j0:j1, j0:j1]
            rhs = ft[i0:i1, i0:i1] @ t[i0:i1, j0:j1] - t[i0:i1, j0:j1] @ ft[j0:j1, j0:j1]
            for bk in range(bi + 1, bj):
                k0, k1 = bounds[bk]
                rhs += (ft[i0:i1, k0:k1] @ t[k0:k1, j0:j1]
                        - t[i0:i1, k0:k1] @ ft[k0:k1, j0:j1])
            # tii X - X tjj = rhs
            ft[i0:i1, j0:j1] = sla.solve_sylvester(tii, -tjj, rhs)
    return z @ ft @ z.conj().T


# ---------------------------------------------------------------------------
# Routes
# ---------------------------------------------------------------------------

def f_of_L_oracle(f, L, deriv=None) -> CalcResult:
    """V f(Lambda) V^{-1}, or Schur-Parlett when the eigenvectors are poorly conditioned."""
    if not hasattr(L, "eigendata"):
        L = classify(L)
    if L.n == 0:
        return CalcResult(np.zeros((0, 0), complex), "oracle_diag", 0.0)
    ed = L.eigendata
    if np.isfinite(ed.condition) and ed.condition <= COND_LIMIT:
        vals = _evaluate(f, ed.values)
        value = (ed.vectors * vals) @ ed.inverse
        scale = max(1.0, float(np.max(np.abs(vals))))
        return CalcResult(value, "oracle_diag", ed.condition * EPS * scale,
                          {"method": "eig", "condition": ed.condition})
    deriv = deriv if deriv is not None else _derivative_fn(f)
    value = schur_parlett(L.entries, f, deriv)
    scale = max(1.0, float(np.linalg.norm(value, 2)))
    return CalcResult(value, "oracle_diag", 1e3 * L.n * EPS * scale,
                      {"method": "schur_parlett", "condition": ed.condition})


def _fourier_nodes(f: GridFunction, L, panels_factor=1):
    norm = float(np.linalg.norm(np.asarray(L), 2))
    nodes, weights = f.quadrature(extent=norm)
    if panels_factor > 1 and nodes.size:
        lo, hi = f.quad_band
        panels = nodes.size // 16 * panels_factor
        from ._quad import panel_edges
        nodes, weights = gl_on_edges(panel_edges(lo, hi, panels, f.breakpoints), 16)
    return nodes, weights


def _fourier_value(f, a, nodes, weights):
    out = np.zeros(a.shape, complex)
    for s, c in f.atoms:
        out += c * sla.expm(1j * s * a)
    if nodes.size:
        coef = weights * np.asarray(f.spectrum(nodes), dtype=complex) / (2 * np.pi)
        step = 256
        for i in range(0, nodes.size, step):
            e = semigroup_stack(a, nodes[i:i + step])
            out += np.tensordot(coef[i:i + step], e, axes=1)
    return out


def f_of_L_fourier(f: GridFunction, L) -> CalcResult:
    """(1/2pi) integral (F f)(xi) exp(i xi L) dxi (Gauss-Legendre) plus tones.

    The panel count is doubled once; the difference of the two rules is the
    error estimate.
    """
    if not isinstance(f, GridFunction):
        raise SynthesisError("the Fourier route needs frequency data")
    if f.has_smooth and not f.integrable:
        raise SynthesisError(f"{f.name}: frequency data not integrable")
    a = np.asarray(L, dtype=complex)
    nodes, weights = _fourier_nodes(f, a)
    value = _fourier_value(f, a, nodes, weights)
    err = 0.0
    if nodes.size:
        n2, w2 = _fourier_nodes(f, a, panels_factor=2)
        fine = _fourier_value(f, a, n2, w2)
        err = float(np.linalg.norm(fine - value, 2))
        value = fine
    return CalcResult(value, "fourier_synthesis", err + 10 * EPS * max(1.0, np.linalg.norm(value, 2)))


def f_of_L_density(f, L, density=None) -> CalcResult:
    """integral f(x) dE_L(x): density quadrature on the pure part, atoms elsewhere."""
    L = L if isinstance(L, DissipativeMatrix) else classify(L)
    tones = ()
    if isinstance(f, GridFunction):
        if not f.bounded:
            raise Unsupported(f"{f.name}: the density route needs bounded f")
        tones = f.atoms
        half = f.half_width if f.has_smooth else None
    else:
        half = None
    if density is None:
        density = semi_spectral_density(L, half_width=half)
    value = density.integrate(f, tones=tones)
    err = density.mass_defect() if density.mass is None else float(
        np.linalg.norm(density.mass - np.eye(L.n), 2))
    return CalcResult(value, "density_quadrature", err, {"grid": density.x_grid.size})


def omega(zeta):
    """Conformal map of the disc onto the upper half-plane, i(1+z)/(1-z)."""
    zeta = np.asarray(zeta, dtype=complex)
    return 1j * (1 + zeta) / (1 - zeta)


def f_of_L_cayley(f, L) -> CalcResult:
    """(f o omega)(T) with T the Cayley transform of L."""
    L = L if isinstance(L, DissipativeMatrix) else classify(L)
    t = cayley(L).entries
    g = lambda z: f(omega(z))
    der = None
    base = _derivative_fn(f)
    if base is not None:
        der = _composed_derivatives(f, base)
    res = f_of_L_oracle(g, classify_contraction_as_matrix(t), der)
    return CalcResult(res.value, "cayley", res.error_estimate, res.meta)


class _Plain:
    """Wraps an arbitrary square matrix for the oracle (no dissipativity check)."""

    def __init__(self, a):
        self.entries = a
        self.n = a.shape[0]
        w, v = np.linalg.eig(a)
        cond = float(np.linalg.cond(v))
        vinv = np.linalg.inv(v) if np.isfinite(cond) else np.full_like(v, np.nan)
        from .dissipative_core import Eigendata
        self.eigendata = Eigendata(w, v, vinv, cond)


def classify_contraction_as_matrix(t):
    return _Plain(np.asarray(t, dtype=complex))


def _composed_derivatives(f, base):
    """Derivatives of f o omega by Faa di Bruno on the Moebius map (orders <= 3)."""
    def der(k):
        if k > 3:
            raise DomainError("composed derivatives implemented to order 3")
        def g(z):
            z = np.asarray(z, dtype=complex)
            w = omega(z)
            d1 = 2j / (1 - z) ** 2
            d2 = 4j / (1 - z) ** 3
            d3 = 12j / (1 - z) ** 4
            f1, = (base(1)(w),)
            if k == 1:
                return f1 * d1
            f2 = base(2)(w)
            if k == 2:
                return f2 * d1 ** 2 + f1 * d2
            f3 = base(3)(w)
            return f3 * d1 ** 3 + 3 * f2 * d1 * d2 + f1 * d3
        return g
    return der


def f_of_L(f, L, route="oracle_diag", **kw) -> CalcResult:
    routes = {"oracle_diag": f_of_L_oracle, "fourier_synthesis": f_of_L_fourier,
              "density_quadrature": f_of_L_density, "cayley": f_of_L_cayley}
    if route not in routes:
        raise ValueError(f"unknown route {route!r}")
    return routes[route](f, L, **kw)


def compare_routes(f, L, routes=("oracle_diag", "fourier_synthesis",
                                  "density_quadrature", "cayley")):
    """Evaluate f(L) by several routes; returns results and pairwise relative deviations."""
    results = {}
    for r in routes:
        try:
            results[r] = f_of_L(f, L, r)
        except (SynthesisError, Unsupported):
            continue
    names = list(results)
    scale = max(1e-300, max(np.linalg.norm(v.value, 2) for v in results.values()))
    dev = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            dev[(a, b)] = float(np.linalg.norm(results[a].value - results[b].value, 2) / scale)
    return results, dev


def matrix_function(f, a):
    """Oracle evaluation for an arbitrary (not necessarily dissipative) matrix."""
    return f_of_L_oracle(f, _Plain(np.asarray(a, dtype=complex))).value
