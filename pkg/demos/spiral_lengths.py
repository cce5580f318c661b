"""Boundary semicircle lengths near the origin: spiral maps versus canonical fields."""

import math

from liouville_neumann import CanonicalParams, SpiralForm, field_from_params, metric_from_dev
from liouville_neumann.verification import semicircle_length

radii = [10.0 ** -k for k in range(1, 7)]
fields = {
    "spiral K=+1": metric_from_dev(SpiralForm(K=1, gamma=-math.log(9) / (2 * math.pi))),
    "sphere cone gamma=0.5": field_from_params(CanonicalParams("Power", 1, 1.0, 1j, 0.5)),
    "sphere cone gamma=0.1": field_from_params(CanonicalParams("Power", 1, 1.0, 0j, 0.1)),
    "log field K=+1": field_from_params(CanonicalParams("Log", 1, 1.0, 0j)),
}
print("field".ljust(24) + "".join(f"r=1e-{k}".rjust(11) for k in range(1, 7)))
for name, fld in fields.items():
    print(name.ljust(24) + "".join(f"{semicircle_length(fld, r):11.4e}" for r in radii))
