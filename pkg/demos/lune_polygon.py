"""Trace the boundary polygon of a metric given by Schwarzian data and certify it."""

import math

from liouville_neumann import SchwarzianSpec
from liouville_neumann.polygons import PolygonalMetricSpec, alexandrov_partial_check, polygon_from_spec

specs = {
    "lune": SchwarzianSpec.from_poles([(0.0, 0.375, 0.0)]),
    "triangle": SchwarzianSpec.from_poles([(-1.0, 0.375, 0.1875), (1.0, 0.375, -0.1875)]),
    "overlapping": SchwarzianSpec.from_poles([(-1.0, -1.5, 0.0), (1.0, 0.25, 0.0)]),
}
for name, spec in specs.items():
    poly, dm = polygon_from_spec(PolygonalMetricSpec(spec))
    cert = alexandrov_partial_check(dm, poly, [p.q for p in spec.pole_list()])
    angles = ", ".join(f"{a / math.pi:.4f}" for a in poly.angles())
    print(f"{name}: {len(poly.arcs)} arcs, angles/pi [{angles}], closure {poly.closure_residual():.1e}")
    print(f"    curvature vs -c/2: {[round(k + c / 2, 10) for c, k in zip(poly.constants, poly.curvatures)]}")
    print(f"    certificate full={cert.full} flags={list(cert.flags)}")
