# Independent high-precision evaluation of the constants ledger.
# Usage: python3 ledger.py  (prints rows frozen in tests/constants.rs)
from mpmath import mp, mpf, sqrt, coth, sinh, cosh, log, e, nsum, inf

mp.dps = 80


def cal_h(t):
    return mpf(1) if t == 0 else t * coth(t)


def cal_s(t):
    return mpf(1) if t == 0 else sinh(t) / t


def ledger(K, N, R):
    K, N, R = mpf(K), mpf(N), mpf(R)
    w = 2 * sqrt(K / N)
    dbl = lambda r: 2**N * mp.exp(4 * r * sqrt(N * K))
    eta = log(dbl(2 * R), 2) / N
    alpha = N * cal_h(w * R)
    mu = (18**3 * alpha**2 * 18**alpha * cosh(w * R)) ** (-N) * dbl(4 * R) ** (-4)
    M = 2 * alpha**2 * 18**alpha
    delta0 = 1 / (2 * dbl(2 * R) ** (4 / N) * cal_s(w * R))
    p0 = (1 - log(1 + (e - 1) * (1 - mu))) / log(M)
    c3 = 2 * dbl(2 * R) * (M ** (1 / p0) / mu) ** (1 / N)
    p1 = p0 / (N * eta)
    sigma = 1 / (1 - (1 + 1 / M) ** (-p1))
    ln_c2 = (log(3) + log(c3) + log(sigma)) / p1 - log(delta0)
    return dict(alpha=alpha, ln_mu=log(mu), ln_big_m=log(M), delta0=delta0,
                ln_p0=log(p0), ln_ln_c3=log(log(c3)), ln_ln_c2=log(ln_c2), eta=eta)


mp.dps = 400
for K, N, R in [(0, 2, 1), (1, 2, 1), (0.5, 3, 2), (2, 5, 2)]:
    d = ledger(K, N, R)
    print((K, N, R), {k: mp.nstr(v, 17) for k, v in d.items()})
