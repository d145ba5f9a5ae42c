"""
Building a prior from published effect sizes
============================================

When there is no theory about where true effects sit inside the null
interval, a field's published effect sizes can stand in.  Effects outside
the interval are dropped, then a truncated normal and a kernel density
estimate are fitted to the rest.  Either one can drive the thick t-test.
"""

import numpy as np

from thicknull import SampleStats, ThickNull, fit_kde, fit_truncated_normal, thick_p

# Stand-in for a collection of standardized effects from a literature review.
rng = np.random.default_rng(5)
effects = rng.normal(0.03, 0.12, 400)
bounds = (-0.2, 0.2)
kept = effects[(effects > bounds[0]) & (effects < bounds[1])]
print(f"{kept.size} of {effects.size} effects fall inside {bounds}")

tn = fit_truncated_normal(kept, bounds)
kde = fit_kde(kept, bounds)
print(f"truncated normal: location {tn.location:.4f}, scale {tn.scale:.4f}")
print(f"kernel density:   bandwidth {kde.bandwidth:.4f}")

# A new study of 80 people reports a standardized mean difference of 0.31.
stats = SampleStats(n=80, mean=0.31, sd=1.0)
null = ThickNull.from_bounds(*bounds)
for name, prior in (("truncated normal", tn), ("kernel density", kde)):
    print(f"thick p with the {name} prior: {thick_p(stats, null, prior):.4f}")
