"""
Classifying quadratic integrals on surfaces
===========================================
"""

import numpy as np

from projeq import (
    builtin_example,
    classify_model,
    flatten_coordinates,
    integral_from_pair2d,
    liouville_build,
    LiouvilleData,
    MetricPair,
    principal_form,
    EnergyProportional,
)

# the first worked scenario: conformal factor x^2 + y^2 + 1, four integrals
bundle = builtin_example("example1", gamma=1.0)
print(f"{bundle.name}: integrals {sorted(bundle.integrals)}")

# each non-energy integral carries a holomorphic quadratic coefficient;
# the root structure of that quadratic decides the model
for name in ("F1", "F2", "F3"):
    pf = principal_form(bundle.integrals[name])
    mc = classify_model(pf)
    print(f"  {name}: {mc.tag:8s} roots {np.round(mc.roots, 6)} "
          f"fit residual {pf.residual:.2e}")

# the energy itself has no principal form; the fit refuses it
try:
    principal_form(bundle.integrals["H"])
except EnergyProportional as e:
    print(f"  H : rejected ({type(e).__name__})")

# flattening coordinates for the double-root model: w = log z
mc4 = classify_model(principal_form(bundle.integrals["F2"]))
z = complex(np.e)
print(f"\nflattening for {mc4.tag}: w({z:.3f}) = {flatten_coordinates(mc4, z):.6f}")

# a separable profile pair and its distinguished integral
data = LiouvilleData.create("x^2 + 2", "-y^2 - 1",
                            bounds=((-1.5, 1.5), (-1.5, 1.5)))
g, gbar, integral = liouville_build(data)
print("\nseparable pair at (1, 1):")
print("  g    =", g.matrix(np.array([1.0, 1.0])).diagonal())
print("  gbar =", gbar.matrix(np.array([1.0, 1.0])).diagonal())

rep = gbar.pd_report(samples=300)
print(f"  partner positive-definite: {rep['positive_definite']} "
      f"(min eigenvalue {rep['min_eigenvalue']:.3f})")

# the integral distilled from the pair agrees with the separable formula
recovered = integral_from_pair2d(MetricPair(g, gbar))
x, p = np.array([0.7, -0.4]), np.array([0.3, 1.1])
print(f"  I from the pair: {recovered.value(x, p):.12f}")
print(f"  I separable:     {integral.value(x, p):.12f}")
