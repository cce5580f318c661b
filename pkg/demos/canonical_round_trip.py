"""Build a metric from prescribed boundary constants and check it numerically."""

from liouville_neumann import boundary_constants, existence, field_from_params, synthesize
from liouville_neumann.verification import area, liouville_residual, neumann_residual

for K, c1, c2 in [(1, 3.0, 4.0), (0, -1.0, 0.5), (-1, -2.5, 1.0), (-1, 1.0, 1.0)]:
    if not existence(K, c1, c2):
        print(f"K={K:+d} c=({c1}, {c2}): no finite-area solution")
        continue
    p = synthesize(K, c1, c2)
    fld = field_from_params(p)
    got = boundary_constants(p)
    print(f"K={K:+d} c=({c1}, {c2}): {p.family} gamma={p.gamma:.4f} z0={p.z0:.4f}")
    print(f"    constants back: ({got.c1:.12f}, {got.c2:.12f})")
    print(f"    PDE residual {liouville_residual(fld).max:.2e}, "
          f"fitted c1 {neumann_residual(fld, 1).fitted_c:.9f}, area {area(fld).value:.9f}")
