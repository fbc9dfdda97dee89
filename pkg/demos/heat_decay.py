"""Off-diagonal decay of the heat Gabor matrix, closed form against quadrature."""
import math

from gabormat import Heat, LatticeIndex, LatticeParams, gabor_entry_oracle, heat_domination_bound, heat_entry_modulus

P = LatticeParams(1.0, 0.5)
rho, t = 1.0, 0.2
nu = LatticeIndex(0, 0)
print(f"heat rho={rho} t={t}, column nu=0")
print(f"{'lambda':>10} {'closed form':>14} {'oracle':>14} {'bound':>14}")
for m, n in [(0, 0), (1, 0), (0, 1), (2, 2), (4, -3), (6, 6)]:
    lam = LatticeIndex(m, n)
    cf = heat_entry_modulus(lam, nu, rho, t, 1, P)
    orc = gabor_entry_oracle(Heat(rho, t), lam, nu, P)
    bd = heat_domination_bound(lam, nu, rho, t, 1, P)
    print(f"{str((m, n)):>10} {cf:14.6e} {orc:14.6e} {bd:14.6e}")
print(f"domination rate pi/(2+4*pi*rho*t) = {math.pi / (2 + 4 * math.pi * rho * t):.6f}")
