"""Regenerate the frozen oracle values in values.json.

Every value here is computed by mpmath at high precision, independently of
the package numerics (no package code is imported).
"""
import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30
OUT = Path(__file__).with_name("values.json")


def bump(u):
    return mp.exp(-1 / (u * (1 - u))) if 0 < u < 1 else mp.mpf(0)


BUMP_MASS = mp.quad(bump, [0, 0.5, 1])


def bump_spectrum(lo, hi):
    w = hi - lo
    return lambda xi: 2 * mp.pi * bump((xi - lo) / w) / (BUMP_MASS * w)


def bump_value(lo, hi, x):
    F = bump_spectrum(lo, hi)
    return mp.quad(lambda xi: F(xi) * mp.expj(xi * x), [lo, (lo + hi) / 2, hi]) / (2 * mp.pi)


def fsub_value(lo, hi, a, x):
    F = bump_spectrum(lo, hi)
    g = lambda eta: (1 - a / eta) * F(eta) * mp.expj((eta - a) * x)
    return mp.quad(g, [max(lo, a), (max(lo, a) + hi) / 2, hi]) / (2 * mp.pi)


def phi1_l1():
    phi = lambda x: (mp.sin(x) / x - mp.ci(x)) / mp.pi
    zs = []
    for k in range(0, 2001):
        a = mp.mpf(k) * mp.pi + (mp.mpf("1e-3") if k == 0 else 0)
        b = (k + 1) * mp.pi
        if phi(a) * phi(b) < 0:
            zs.append(mp.findroot(phi, (a, b), solver="anderson"))
    total = mp.quad(lambda x: abs(phi(x)), [0, zs[0]])
    marks = {}
    for i in range(len(zs) - 1):
        total += abs(mp.quad(phi, [zs[i], zs[i + 1]]))
        if i + 2 in (1000, len(zs)):
            marks[i + 2] = (zs[i + 1], total + 2 / (mp.pi ** 2 * zs[i + 1]))
    (x1, v1), (x2, v2) = marks[1000], marks[len(zs)]
    # remaining error is O(1/X^2): one Richardson step
    r = (x1 / x2) ** 2
    return 2 * (v2 - r * (v1 - v2) / (1 - r))


def holder_tone():
    u = mp.findroot(lambda u: mp.tan(u) - 2 * u, 1.1656)
    t = 2 * u
    return 2 * mp.sin(t / 2) / mp.sqrt(t), t


def mp_expm(a):
    return mp.expm(a)


def main():
    vals = {}
    vals["bump_0.5_2"] = {str(x): [float(mp.re(v)), float(mp.im(v))]
                          for x in (0.7, -3.2, 11.0)
                          for v in [bump_value(0.5, 2.0, x)]}
    vals["fsub_bump_0.5_3_a1"] = {str(x): [float(mp.re(v)), float(mp.im(v))]
                                  for x in (0.0, 0.4, -2.5)
                                  for v in [fsub_value(0.5, 3.0, 1.0, x)]}
    F = bump_spectrum(0.0, 1.0)
    v = mp.quad(lambda xi: F(xi) * mp.exp(-xi), [0, 0.5, 1]) / (2 * mp.pi)
    vals["bump_0_1_at_i"] = [float(mp.re(v)), float(mp.im(v))]
    F2 = bump_spectrum(0.5, 2.0)
    v = mp.quad(lambda xi: F2(xi) * mp.exp(-xi), [0.5, 1.25, 2]) / (2 * mp.pi)
    vals["bump_0.5_2_at_i"] = [float(mp.re(v)), float(mp.im(v))]
    d2 = -mp.quad(lambda xi: xi ** 2 * F(xi), [0, 0.5, 1]) / (2 * mp.pi) / 2
    vals["bump_0_1_dd2_origin"] = [float(d2), 0.0]
    vals["phi1_l1"] = float(phi1_l1())
    h, t = holder_tone()
    vals["holder_tone_half"] = float(h)
    vals["holder_tone_argmax"] = float(t)
    # semigroup derivative of e_a at fixed 3x3 matrices by mpmath finite differences
    L = mp.matrix([[0.3 + 1.0j, 0.2, 0.0], [0.1, -0.5 + 0.6j, 0.3j], [0.0, 0.4, 1.1 + 0.8j]])
    K = mp.matrix([[0.2, 0.1 - 0.1j, 0.0], [0.1 + 0.1j, -0.3, 0.05], [0.0, 0.05, 0.4]])
    a = mp.mpf(2)
    with mp.workdps(60):
        h = mp.mpf("1e-20")
        D = (mp_expm(1j * a * (L + h * K)) - mp_expm(1j * a * (L - h * K))) / (2 * h)
    vals["semigroup_derivative"] = {
        "L": [[[float(mp.re(z)), float(mp.im(z))] for z in L.tolist()[i]] for i in range(3)],
        "K": [[[float(mp.re(z)), float(mp.im(z))] for z in K.tolist()[i]] for i in range(3)],
        "a": 2.0,
        "D": [[[float(mp.re(z)), float(mp.im(z))] for z in D.tolist()[i]] for i in range(3)],
    }
    OUT.write_text(json.dumps(vals, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
