"""
Invariants of the link: Weyl tensor, flows, sphere maps
=======================================================

Three independent fingerprints of geodesic linkage. The projective Weyl
tensor is identical for both members of a pair. A one-parameter flow of
geodesic-preserving maps differentiates to a compatible structure, with
Killing flows giving the zero structure. On the round sphere, every
invertible linear map of the ambient space induces a geodesic-preserving
map, visible as great circles landing on great circles.
"""

import numpy as np

from projeq import (
    LeviCivitaSpec,
    MetricPair,
    ProjectiveFlowSpec,
    beltrami_map_defect,
    bm_from_flow,
    bm_from_flow_field,
    bm_residual_stats,
    build_lc_pair,
    builtin_example,
    projective_weyl,
    weyl_pair_defect,
)

spec = LeviCivitaSpec.create(
    [1, 1, 1], ("1 + 0.3*tanh(x1)", "3", "6 + x3^2"),
    bounds=((-1.0, 1.0), (-1.0, 1.0), (0.5, 1.5)))
g, gbar, _ = build_lc_pair(spec)
pts = g.chart.sample(100, seed=0)

w_norm = max(float(np.max(np.abs(projective_weyl(g, x)))) for x in pts[:20])
defect = weyl_pair_defect(MetricPair(g, gbar), pts)
print(f"Weyl tensor size on g: {w_norm:.3e} (genuinely curved)")
print(f"difference between the two pair members: {defect['max']:.3e}")

# the sphere scenario ships a generator of geodesic-preserving maps
sphere = builtin_example("sphere_beltrami")
flow = ProjectiveFlowSpec(sphere.metric, sphere.vector_fields["projective_generator"])
L = bm_from_flow_field(flow)
stats = bm_residual_stats(sphere.metric, L, sphere.chart.sample(50, seed=0),
                          eps_sym_factor=1e-3)
print(f"\nstructure from the sphere flow: residual {stats['max']:.3e}")

# a rotation is Killing for a rotationally symmetric metric: zero structure
disc = builtin_example("example1")
killing = ProjectiveFlowSpec(disc.metric, disc.vector_fields["rotation"])
worst = max(float(np.max(np.abs(bm_from_flow(killing, x))))
            for x in disc.chart.sample(20, seed=1))
print(f"structure from a Killing flow:  max entry {worst:.3e}")

# great circles map to great circles under any invertible linear map
rng = np.random.default_rng(0)
a = rng.normal(size=(3, 3))
for k in range(3):
    normal = rng.normal(size=3)
    print(f"circle {k}: coplanarity defect {beltrami_map_defect(a, normal):.3e}")
