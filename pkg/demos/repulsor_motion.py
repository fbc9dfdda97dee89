"""A Gaussian atom under the harmonic repulsor: its spectrogram peak follows the hyperbolic flow."""
import math

import numpy as np

from gabormat import GaussianWindow, Grid, LatticeIndex, LatticeParams, repulsor_apply_shifted_gaussian, stft_grid

P = LatticeParams(1.0, 0.5)
lam = LatticeIndex(1, 1)  # physical point (1, 0.5)
grid = Grid.symmetric(16, 4097, 1)
axis = np.linspace(-4, 4, 401)
for t in (0.0, 0.5, 1.0):
    f = repulsor_apply_shifted_gaussian(lam, t, P).sample(grid)
    sg = stft_grid(f, GaussianWindow(), axis, axis)
    x, xi = sg.peak()
    # flow of [[0,1],[1,0]]: (x, xi) -> (cosh t x + sinh t xi, sinh t x + cosh t xi)
    fx = math.cosh(t) * 1 + math.sinh(t) * 0.5
    fxi = math.sinh(t) * 1 + math.cosh(t) * 0.5
    print(f"t={t:.1f} peak=({x:+.2f}, {xi:+.2f}) flow=({fx:+.2f}, {fxi:+.2f}) energy={sg.energy():.4f}")
