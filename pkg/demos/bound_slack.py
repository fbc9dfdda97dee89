"""How tight the super-exponential Fourier envelope is as k grows."""
import math

import numpy as np

from gabormat import superexp_ft_bound, superexp_ft_oracle

w = np.array([1.0, 2.0, 4.0, 6.0, 8.0])
for k in (1, 2, 3):
    spec = superexp_ft_bound(k, 1.0)
    ratio = superexp_ft_oracle(k, 1.0, w) / spec.envelope(w)
    print(f"k={k} C={spec.C:.4f} eps={spec.eps:.4f} |f^|/envelope at {w.tolist()}: "
          + " ".join(f"{r:.2e}" for r in ratio))
    if k > 1:
        # oscillating saddles decay at the envelope rate times this factor
        print(f"     true rate factor sin(pi/(2(2k-1))) = {math.sin(math.pi / (2 * (2 * k - 1))):.4f}")
