# Greedy lattice animals and the random endpoint shift
from scipy import stats

from fpplab.animals import martin_integral, martin_ratio_experiment
from fpplab.experiments import ExperimentSpec, shift_invariance_test
from fpplab.weights import ModelSpec

# N(n)/n against the Martin integral for three weight laws
for name, dist in (("bernoulli(1/2)", [(0.0, 0.5), (1.0, 0.5)]),
                   ("{1,2}", [(1.0, 0.5), (2.0, 0.5)]),
                   ("exp(1)", stats.expon())):
    rows, _ = martin_ratio_experiment(dist, 2, [2, 4, 6, 8], 50, seed=1)
    print(f"{name:15s} integral={martin_integral(dist, 2):.4f}  ratios:",
          " ".join(f"{r.n}:{r.normalized:.3f}" for r in rows))

# f = T(0,v) and f~ = T(z, v+z) should have the same law
spec = ExperimentSpec(ModelSpec("iid-two-valued", indexing="bond"), (64,), 2, seed=2)
rep = shift_invariance_test(spec, 64, 200)
print(f"\nshift m={rep.m}: KS={rep.ks_statistic:.3f} p={rep.ks_pvalue:.3f}, "
      f"Var f={rep.var_f:.3f}, Var f~={rep.var_shifted:.3f}")
