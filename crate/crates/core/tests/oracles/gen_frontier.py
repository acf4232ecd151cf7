# Frontier reference values with mpmath: sup of U, V and of the elasticity.
from mpmath import mp, mpf, gamma, quad, exp, cos, sin, pi, inf, linspace

mp.dps = 30


def U(a, y):
    k = quad(lambda s: exp(-s ** (1 / a)) / ((s / y + cos(pi * a)) ** 2 + sin(pi * a) ** 2), [0, 1, 10, inf])
    return k / gamma(1 + a)


def V(a, y):
    k = quad(lambda u: u ** a * exp(-u) / ((u ** a / y) ** 2 + 2 * (u ** a / y) * cos(pi * a) + 1), [0, 1, 10, inf])
    return k / gamma(a + 1)


def b(a, u):
    return sin(u) / (sin(a * u) ** a * sin((1 - a) * u) ** (1 - a))


def elasticity(a, x):
    # Kanter: f = κ/(π x) ∫ w e^{-w} du, w = b^{-1/β} x^{-κ}; E = 1 + κ - κ J2/J1.
    be = 1 - a
    k = a / be
    w = lambda u: b(a, u) ** (-1 / be) * x ** (-k)
    pts = linspace(0, pi, 41)
    j1 = quad(lambda u: w(u) * exp(-w(u)), pts)
    j2 = quad(lambda u: w(u) ** 2 * exp(-w(u)), pts)
    return 1 + k - k * j2 / j1


def sup(g, t0, h=mpf("0.5")):
    # golden-section search for the maximum of g(e^t) on [t0 - h, t0 + h]
    a, b = t0 - h, t0 + h
    r = (mpf(5) ** 0.5 - 1) / 2
    c, d = b - r * (b - a), a + r * (b - a)
    gc, gd = g(exp(c)), g(exp(d))
    while b - a > mpf("1e-12"):
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - r * (b - a)
            gc = g(exp(c))
        else:
            a, c, gc = c, d, gd
            d = a + r * (b - a)
            gd = g(exp(d))
    return max(gc, gd)


def coarse(g, lo, hi, n):
    best = None
    for i in range(n + 1):
        t = lo + (hi - lo) * mpf(i) / n
        v = g(exp(t))
        if best is None or v > best[0]:
            best = (v, t)
    return best[1]


for a in ["0.55", "0.7", "0.8", "0.95"]:
    a = mpf(a)
    rt = a * sup(lambda y: U(a, y), coarse(lambda y: U(a, y), -2, 12, 56))
    rh = a * sup(lambda y: V(a, y), coarse(lambda y: V(a, y), -2, 12, 56))
    print(f"{float(a)} R_tilde={float(rt)!r} R_hat={float(rh)!r}", flush=True)

for a, lo, hi in [("0.6", 0, 6), ("0.8", -1, 4), ("0.95", -1, 1)]:
    a = mpf(a)
    g = lambda x: elasticity(a, x)
    t0 = coarse(g, lo, hi, 40)
    print(f"{float(a)} R={float(sup(g, t0) - 1)!r}", flush=True)
