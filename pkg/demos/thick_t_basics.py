"""
Testing a thick null on one sample
==================================

A point null such as "the mean IQ is exactly 100" is almost always false,
and with enough data a t-test will say so.  A thick null replaces the point
with an interval of practically equivalent values, here 100 +/- 5.  This
script runs all six decision rules on a single sample and prints their
verdicts.
"""

import numpy as np

from thicknull import (
    ContinuousUniform,
    DiscreteUniform,
    NearestEdge,
    PointMass,
    SampleStats,
    ThickNull,
    decide_conventional,
    decide_distance,
    decide_interval,
    decide_mesp,
    decide_small_alpha,
    decide_thick,
    thick_p,
    thick_p_supremum,
)

# A sample of 20 scores whose mean sits 6 points above the reference value.
rng = np.random.default_rng(1)
scores = 106 + 10 * rng.standard_normal(20)
stats = SampleStats.from_sample(scores)
null = ThickNull(mu0=100.0, mpsd=5.0)
print(f"n = {stats.n}, mean = {stats.mean:.2f}, sd = {stats.sd:.2f}, null interval = {null.interval}")

# The point-null rules only look at the distance from 100; the distance rule
# only looks at whether the observed effect reaches 5.
for verdict in (
    decide_conventional(stats, null),
    decide_small_alpha(stats, null),
    decide_distance(stats, null),
    decide_mesp(stats, null),
    decide_interval(stats, null),
    decide_thick(stats, null, DiscreteUniform()),
):
    p = "  -" if verdict.p_value is None else f"{verdict.p_value:.4f}"
    print(f"{verdict.method.value:>16}: reject={verdict.reject!s:5}  p={p}")

# The thick p-value averages the tail probability over a prior on the null
# interval.  Different priors give different answers, bracketed by the point
# null at the centre and the supremum over the interval.
print()
for name, prior in (
    ("point mass at 100", PointMass()),
    ("integers 95..105", DiscreteUniform()),
    ("flat on [95, 105]", ContinuousUniform()),
    ("nearest edge", NearestEdge()),
):
    print(f"{name:>18}: thick p = {thick_p(stats, null, prior):.4f}")
print(f"{'supremum':>18}: thick p = {thick_p_supremum(stats, null):.4f}")
