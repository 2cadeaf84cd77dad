"""Sweep dimensions for two step-size bases and persist the records table.

Writes data/records_demo.csv, the demo input for the error/complexity figure
(rbm-mlmc-figures plot error_complexity --in data/records_demo.csv --out ...).
Rerunning is cheap and resumes: completed cells are skipped.
"""

import os

from rbm_mlmc import ExperimentPlan, run_plan

DATA_DIR = os.path.normpath(
    os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data"))

plan = ExperimentPlan(
    dims=(5, 10, 20, 40),
    gammas=(0.1, 0.05),
    epsilon=0.05,
    beta=0.8,
    replications=3,
    master_seed=1234,
    output=os.path.join(DATA_DIR, "records_demo.csv"),
)

records = run_plan(plan)
print(f"{len(records)} records -> {plan.output}")
print()
print(f"{'d':>4} {'gamma':>6} {'mean |err|':>11} {'mean seeds':>12}")
for d in plan.dims:
    for gamma in plan.gammas:
        cell = [r for r in records if r.d == d and r.gamma == gamma]
        err = sum(r.abs_error for r in cell) / len(cell)
        seeds = sum(r.total_seeds for r in cell) / len(cell)
        print(f"{d:>4} {gamma:>6} {err:>11.4f} {seeds:>12.0f}")
print()
print("From d=10 on, the 0.05 base delivers the same accuracy for a fraction")
print("of the Gaussian budget; at very small d the integer level count can")
print("flip the comparison. Accuracy itself is insensitive to the base,")
print("which is why 0.05 is the recommended default.")
