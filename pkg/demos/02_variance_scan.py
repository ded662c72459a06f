# Sublinear variance diagnostics
#
# Var(T(0, v)) / |v| across |v| for the i.i.d. and {1,2}-Ising models.  The
# bound Var <= C|v|/log|v| predicts Var/|v| -> 0; at these sizes the decrease
# is slow, so we read it through bootstrap CIs.
import sys

from fpplab.experiments import ExperimentSpec, nonincreasing_within_ci, variance_scan
from fpplab.weights import ModelSpec

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 100
sizes = (16, 32, 64, 128)

models = {
    "iid bond": ModelSpec("iid-two-valued", a=1.0, b=2.0, p=0.5, indexing="bond"),
    "ising site b=0.2": ModelSpec("ising-ab-site", a=1.0, b=2.0, beta=0.2),
}
for name, model in models.items():
    res = variance_scan(ExperimentSpec(model, sizes, reps, seed=5))
    print(f"\n{name}  (valid={res.valid})")
    print("   |v|     Var   Var/|v|   95% CI            Var log|v|/|v|")
    for r in res.rows:
        lo, hi = r.ratio_ci()
        print(f"{r.v:6d} {r.variance:7.3f} {r.var_over_v:8.4f}  [{lo:.4f}, {hi:.4f}]  "
              f"{r.var_log_v_over_v:.4f}")
    print("nonincreasing within CI:", nonincreasing_within_ci(res.rows))
