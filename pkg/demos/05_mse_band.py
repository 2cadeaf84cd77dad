"""Replication study: mean square error with a 95% confidence band.

Writes data/mse_demo.csv, the demo input for the MSE figure
(rbm-mlmc-figures plot mse_band --in data/mse_demo.csv --out ...). With the
default knobs the MSE sits well below the squared target error across
dimensions, i.e. the hyperparameter choices hold the precision flat as the
network grows.
"""

import os

from rbm_mlmc import ExperimentPlan, mse_study

DATA_DIR = os.path.normpath(
    os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data"))

plan = ExperimentPlan(
    dims=(5, 10, 15, 20),
    gammas=(0.05,),
    epsilon=0.05,
    beta=0.8,
    replications=30,  # smallest count that earns a normal-approximation band
    master_seed=5678,
    output=os.path.join(DATA_DIR, "mse_demo.csv.records.csv"),
)

summaries = mse_study(plan, summary_path=os.path.join(DATA_DIR, "mse_demo.csv"))
print(f"target error {plan.epsilon} -> bound on MSE {plan.epsilon ** 2}")
for s in summaries:
    print(f"  d={s.d:3d}: MSE {s.mse:.2e}  "
          f"band [{s.band_low:.2e}, {s.band_high:.2e}]  "
          f"({s.replications} replications)")
