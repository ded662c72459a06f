# Passage times and geodesics on an i.i.d. {1,2} lattice
#
# Draw one bond field, compute T(0, v) with its geodesic, and compare with the
# hop-constrained version and the geodesic length bound.
import numpy as np

from fpplab.experiments import box_for
from fpplab.passage import (geodesic_bound, passage_time, passage_time_hop_constrained,
                            write_geodesic)
from fpplab.weights import ModelSpec, generate_field

model = ModelSpec("iid-two-valued", a=1.0, b=2.0, p=0.5, indexing="bond")
v = (40, 0)
box = box_for(v)
fld = generate_field(model, box, 1)

res = passage_time(fld, (0, 0), v)
print("T(0,v) =", res.value, " edges =", res.edge_count, " touched boundary:", res.touched_boundary)
print("edge bound (b/a)|v| =", geodesic_bound(40, 1.0, 2.0))

# the hop constraint only binds once c1 drops below (vertex count)/|v|
for c1 in (1.05, 1.2, 1.5, 3.0):
    hat = passage_time_hop_constrained(fld, (0, 0), v, c1)
    print(f"c1={c1:4}: T_hat = {hat.value}  vertices = {hat.vertex_count}")

# site version counts both endpoints
site = generate_field(ModelSpec("iid-two-valued"), box, 1)
print("site T(0,0) = t(0) =", passage_time(site, (0, 0), (0, 0)).value)

write_geodesic("geodesic_demo.txt", res)
print("geodesic written, y-range", np.ptp([p[1] for p in res.geodesic]))
