"""Consistency and its failure in many-group comparisons.

With p groups of r replicates each, evidence rules calibrated to the
per-group sample size have signal thresholds below which they pick the
wrong model forever as p grows.  This demo prints the thresholds and then
watches the posterior probability of the true model along a grid of p,
once inside and once outside the fitted-covariance rule's safe region.
Run:

    python3 demos/anova_consistency.py
"""

from ml2bf import AnovaTruth, consistency_threshold, simulate_consistency

r = 5
print(f"inconsistency thresholds on tau^2 at r = {r}:")
for method in ("bic", "ml2", "fixed_normal"):
    print(f"  {method:12s} {consistency_threshold(method, r):.4f}")

for label, tau2 in (
    ("inside the fixed-normal danger zone", 0.8 * consistency_threshold("fixed_normal", r)),
    ("comfortably strong signal", 2.0 * consistency_threshold("fixed_normal", r)),
):
    print(f"\nsignal tau^2 = {tau2:.3f} ({label})")
    rows = simulate_consistency(
        AnovaTruth(tau2), r, p_grid=[100, 1000, 10000], replicates=200, seed=5
    )
    print(f"{'p':>7} {'method':>14} {'P(true model)':>14}")
    for row in rows:
        print(f"{row['p']:>7} {row['method']:>14} {row['avg_prob_true']:>14.3f}")
