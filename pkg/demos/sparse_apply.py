"""Apply the heat semigroup through a thresholded Gabor matrix and compare with the Fourier multiplier."""
from gabormat import (Heat, LatticeIndex, LatticeParams, SampledFunction, apply_via_gabor, build_sparse_matrix,
                      dual_window, heat_symbol, multiplier_apply)
from gabormat.core_tf import atom_values

P = LatticeParams(1.0, 0.5)
op = Heat(1.0, 0.1)
dual = dual_window(P, 8)
f = SampledFunction(dual.grid, atom_values(dual.grid, [1.0], [-0.5]) + 0.5 * atom_values(dual.grid, [-2.0], [1.0]))
ref = multiplier_apply(heat_symbol(op.rho, op.t), f)
print(f"dual window residual {dual.residual:.1e}")
for eps in (0.0, 1e-8, 1e-6, 1e-4, 1e-2):
    M = build_sparse_matrix(op, P, 6, eps, source="oracle")
    err = (apply_via_gabor(op, f, P, dual, M) - ref).norm() / ref.norm()
    print(f"eps={eps:7.0e} kept {M.kept_count:6d}/{M.total_considered} rel err {err:.2e}")
