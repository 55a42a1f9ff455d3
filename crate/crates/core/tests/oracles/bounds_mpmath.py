"""High-precision reference values for the convergence-time bounds.

Inputs are taken as the exact binary64 values the Rust code receives.
Prints (N, gamma, ln_theorem1, ln_corollary2) rounded to the nearest f64.
"""
from mpmath import mp, mpf, log

mp.prec = 256

for n in (1, 2, 3):
    for g in (0.5, 0.1):
        gamma, eps, N = mpf(g), mpf(0.5), mpf(n)
        tail = log(log(1 / eps))
        t1 = 3 * log(N) + N**4 * log(1 / gamma) + tail
        c2 = log(N) + N * (N + 1) / 2 * log(1 / gamma) + tail
        print(f"({n}, {g}, {float(t1)!r}, {float(c2)!r}),")
