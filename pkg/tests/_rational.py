"""Exact rational evaluation of the detection formulas, written out
independently of the package for cross-checking."""
from fractions import Fraction as F


def majority(n, t, eps, h, m):
    eps = F(eps)
    f = t * eps / (n - t)
    a = (1 - eps) ** h * eps ** m * t
    return a / (a + f ** h * (1 - f) ** m * (n - t))


def _joint(n, j, i, eps, f, h, m):
    # population left after the joint part and h + m individual parts
    out = (1 - eps) ** h * eps ** m * F(j, n)
    if h:
        out += h * (1 - eps) * f ** (h - 1) * (1 - f) ** m * F(i, n)
    if m:
        out += m * eps * f ** h * (1 - f) ** (m - 1) * F(i, n)
    return out + f ** h * (1 - f) ** m * F(n - j - (h + m) * i, n)


def hit(n, t, j, eps, h, m):
    eps = F(eps)
    i = t - j
    f = t * eps / (n - t)
    num = (1 - eps) ** (h + 1) * eps ** m * F(j, n) + (1 - eps) * f ** h * (1 - f) ** m * F(i, n)
    return num / _joint(n, j, i, eps, f, h + 1, m)


def miss(n, t, j, eps, h, m):
    eps = F(eps)
    i = t - j
    f = t * eps / (n - t)
    num = (1 - eps) ** h * eps ** (m + 1) * F(j, n) + eps * f ** h * (1 - f) ** m * F(i, n)
    return num / _joint(n, j, i, eps, f, h, m + 1)
