#!/usr/bin/env python3
"""Independent high-precision oracle for the frozen values in frozen_values.hpp.

Uses only mpmath and explicit index contraction over computational-basis
amplitudes; it shares no code with the C++ library. Run it to regenerate the
constants:  python3 tests/oracle/closed_forms.py
"""
import itertools
import mpmath as mp

mp.mp.dps = 40
N = 3


def bits(i):
    return [(i >> (N - 1 - q)) & 1 for q in range(N)]


def outer(amps):
    return [[amps[i] * mp.conj(amps[j]) for j in range(8)] for i in range(8)]


def marginal(rho, q):
    """Single-qubit reduced state by explicit summation over the other bits."""
    m = [[mp.mpf(0)] * 2 for _ in range(2)]
    for i in range(8):
        for j in range(8):
            bi, bj = bits(i), bits(j)
            if all(bi[k] == bj[k] for k in range(N) if k != q):
                m[bi[q]][bj[q]] += rho[i][j]
    return m


def eig2(m):
    a, d = mp.re(m[0][0]), mp.re(m[1][1])
    c = abs(m[0][1])
    mean, half = (a + d) / 2, mp.sqrt(((a - d) / 2) ** 2 + c ** 2)
    return [mean - half, mean + half]


def h(ps):
    return -sum(p * mp.log(p) for p in ps if p > 0)


def measures(amps):
    rho = outer(amps)
    diag = [mp.re(rho[i][i]) for i in range(8)]
    marg = [marginal(rho, q) for q in range(N)]
    s_rho = 0  # pure
    s_d = h(diag)
    s_pi = sum(h(eig2(m)) for m in marg)
    s_pid = sum(h([mp.re(m[0][0]), mp.re(m[1][1])]) for m in marg)
    # marginals of rho_d equal the diagonals of the marginals of rho
    C = s_d - s_rho
    CL = s_pid - s_pi
    T = s_pi - s_rho
    K = s_pid - s_d
    return dict(C=C, CL=CL, CG=C - CL, T=T, K=K, M1=C + K, M2=T + CL,
                marg=[eig2(m) for m in marg], margmat=marg)


s6 = 1 / mp.sqrt(6)
wwbar = [0, s6, s6, s6, s6, s6, s6, 0]
star = [mp.mpf(1) / 2 if i in (0, 4, 5, 7) else 0 for i in range(8)]

for name, amps in (("WWBAR", wwbar), ("STAR", star)):
    m = measures(amps)
    for key in ("C", "CG", "CL", "T", "K", "M1", "M2"):
        print(f"constexpr double {name}_{key} = {mp.nstr(m[key], 20)};")
    for q, ev in enumerate(m["marg"]):
        print(f"// {name} marginal {q} eigenvalues: {mp.nstr(ev[0], 20)}, {mp.nstr(ev[1], 20)}")
    for q, mm in enumerate(m["margmat"]):
        print(f"// {name} marginal {q}: [[{mp.nstr(mp.re(mm[0][0]),17)}, {mp.nstr(mp.re(mm[0][1]),17)}], "
              f"[{mp.nstr(mp.re(mm[1][0]),17)}, {mp.nstr(mp.re(mm[1][1]),17)}]]")

# dephase probability at (2.21e-5, 100)
x = mp.mpf("2.21e-5") * 100 ** 2
print("constexpr double DEPHASE_P_2_21E5_100 =", mp.nstr((1 - mp.e ** (-x)) / 2, 20), ";")
print("constexpr double S_5_6 =", mp.nstr(h([mp.mpf(5) / 6, mp.mpf(1) / 6]), 20), ";")
