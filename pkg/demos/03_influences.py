# Influences of a tiny passage time
#
# f = T(0,(2,2)) on the 3x3 box with site weights in {1,2}.  Everything below
# is exact over the 512 configurations.
import numpy as np

from fpplab.influence import (averaging_distribution, delta, efron_stein_sum, norms,
                              passage_function_table, talagrand_functional)

f = passage_function_table((3, 3))
rep = talagrand_functional(f)
print("Var f =", rep.variance)
print("sum ||D_i f||^2 (Efron-Stein) =", efron_stein_sum(f))
print("Talagrand sum =", rep.influence_sum, " log(1/min p) =", rep.log_factor)
print("empirical K =", rep.ratio)

print("\nper-site ||D_i f||_2 (the endpoints carry the most influence)")
l2 = np.array([norms(delta(f, i))[1] for i in range(9)]).reshape(3, 3)
print(np.round(l2, 4))

# averaging function law: near uniform on {0..m}, max mass ~ c/m
for m in (2, 4, 8, 16, 64, 256):
    law = averaging_distribution(m)
    print(f"m={m:4d}  m*max P(g=k) = {m * law.max():.4f}")
