"""How the Gaussian budget grows with dimension.

The budget per estimate is dimension-linear at fixed window length; the
default convention grows the window like log(d)^2 to control the transient
bias, so the measured log-log slope sits above 1 by the logarithmic factor.
Dividing the window factor back out exposes the plain linear growth.
"""

import math
import os
import tempfile

from rbm_mlmc import ExperimentPlan, complexity_fit, run_plan

with tempfile.TemporaryDirectory() as tmp:
    plan = ExperimentPlan(
        dims=(5, 10, 20, 40, 80),
        gammas=(0.05,),
        epsilon=0.05,
        beta=0.8,
        replications=2,
        master_seed=31,
        output=os.path.join(tmp, "complexity.csv"),
    )
    records = run_plan(plan)

fit = complexity_fit(records)
print(f"{'d':>4} {'mean seeds':>12} {'window':>8}")
for d, seeds in zip(fit.dims, fit.mean_seeds):
    print(f"{d:>4} {seeds:>12.0f} {0.5 * math.log(d) ** 2:>8.3f}")
print()
print(f"raw log-log slope: {fit.slope:.3f} (R^2 {fit.r_squared:.4f})")

# normalize out the log(d)^2 window factor: what remains is the d-linear core
normalized = [s / (0.5 * math.log(d) ** 2) for d, s in zip(fit.dims, fit.mean_seeds)]
xs = [math.log(d) for d in fit.dims]
ys = [math.log(v) for v in normalized]
n = len(xs)
xbar, ybar = sum(xs) / n, sum(ys) / n
slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sum(
    (x - xbar) ** 2 for x in xs)
print(f"slope after dividing out the window factor: {slope:.3f}")
print()
print("Path generation, reflection, and accounting all scale linearly in d;")
print("the raw slope above 1 is purely the log(d)^2 window growth.")
