"""Straight-line twin-field rate evaluation used to freeze test anchors.

The phase-error bound is reported both raw and divided by the X-basis click
probability. Evaluates the formulas literally (five-fold q_ZZ sum, no table
factorisation, no expm1 rearrangement) in 40-digit arithmetic.

    python3 tf_oracle.py
"""
from functools import lru_cache

from mpmath import mp, mpf, binomial, factorial, cos, sin, sqrt, exp, log, power

mp.dps = 40

DET = {
    "cold": dict(rate=100, eff=mpf("0.85"), dead=mpf("1e-6")),
    "hot": dict(rate=200, eff=mpf("0.2"), dead=mpf("50e-6")),
}
F_REP = mpf(10) ** 8
S_STRONG = mpf("0.01")


def h2(x):
    if x <= 0 or x >= 1:
        return mpf(0)
    return -x * log(x, 2) - (1 - x) * log(1 - x, 2)


@lru_cache(maxsize=None)
def q_zz(na, nb, ea, eb, ta=mpf(0), tb=mpf(0)):
    total = mpf(0)
    for k in range(na + 1):
        for l in range(nb + 1):
            pre = (binomial(na, k) * binomial(nb, l) * ea**k * eb**l
                   * (1 - ea) ** (na - k) * (1 - eb) ** (nb - l)
                   / (2 ** (k + 1) * factorial(k) * factorial(l)))
            inner = mpf(0)
            for m in range(k + 1):
                for p in range(l + 1):
                    for q in range(max(0, m + p - l), min(k, m + p) + 1):
                        inner += (binomial(k, m) * binomial(l, p) * binomial(k, q)
                                  * binomial(l, m + p - q) * factorial(m + p)
                                  * factorial(k + l - m - p)
                                  * power(cos(ta), m + q) * power(cos(tb), m + p - q)
                                  * power(sin(ta), 2 * k - m - q)
                                  * power(sin(tb), 2 * l - m - 2 * p + q))
            total += pre * inner
    return total - (1 - ea) ** na * (1 - eb) ** nb


def rate(loss_a, loss_b, prof, trunc=5, tail=40, per_click=True):
    d = DET[prof]
    pdc = d["rate"] * mpf("3.5e-9")
    if loss_a < loss_b:
        loss_a, loss_b = loss_b, loss_a
    ea = power(10, -mpf(loss_a) / 10) * d["eff"]
    eb = power(10, -mpf(loss_b) / 10) * d["eff"]
    if ea < eb:
        sa, sb = S_STRONG, S_STRONG * ea / eb
    elif eb < ea:
        sa, sb = S_STRONG * eb / ea, S_STRONG
    else:
        sa = sb = S_STRONG
    ga, gb = sa * ea, sb * eb
    x = sqrt(ga * gb)
    pp = (mpf(1) / 2 * (1 - pdc) * (exp(-x) + exp(x)) * exp(-(ga + gb) / 2)
          - (1 - pdc) ** 2 * exp(-ga - gb))
    dead = 1 / (1 + d["dead"] * F_REP * pp)
    pxx = pp * dead
    ex = ((exp(-x) - (1 - pdc) * exp(-(ga + gb) / 2))
          / (exp(-x) + exp(x) - 2 * (1 - pdc) * exp(-(ga + gb) / 2)))
    aa, ab = sqrt(sa), sqrt(sb)

    def c(alpha, n):
        return alpha**n / sqrt(factorial(n))

    def pzz(na, nb):
        if na > 2 * trunc + 1 or nb > 2 * trunc + 1:
            return mpf(1)
        q = min(max(q_zz(na, nb, ea, eb), mpf(0)), mpf(1))
        return ((1 - pdc) * q + (1 - pdc) * pdc * (1 - ea) ** na * (1 - eb) ** nb) * dead

    ez = mpf(0)
    for j in (0, 1):
        s = mpf(0)
        for ma in range(tail):
            for mb in range(tail):
                s += c(aa, 2 * ma + j) * c(ab, 2 * mb + j) * sqrt(pzz(2 * ma + j, 2 * mb + j))
        ez += s * s
    if per_click:
        ez = ez / pxx if pxx > 0 else mpf(1) / 2
    r10 = pxx * (1 - h2(ex) - h2(min(mpf(1) / 2, ez)))
    return 2 * max(r10, 0) * F_REP, dict(pxx=pxx, ex=ex, ez=ez)


if __name__ == "__main__":
    print("q_zz(0,0) =", q_zz(0, 0, mpf("0.3"), mpf("0.7")))
    print("q_zz(1,0; eta=1) =", q_zz(1, 0, mpf(1), mpf("0.4")))
    for prof in ("cold", "hot"):
        for a, b in ((0, 0), (5, 5), (10, 10), (3, 12), (20, 27.5)):
            for per_click in (True, False):
                r, det = rate(a, b, prof, tail=12, per_click=per_click)
                tag = "per-click" if per_click else "raw"
                print(prof, tag, a, b, mp.nstr(r, 17), {k: mp.nstr(v, 17) for k, v in det.items()})
