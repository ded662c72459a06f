"""Small statistical helpers shared by the experiment drivers."""
import numpy as np
from scipy import stats

N_BOOT = 2000


def bootstrap_ci(data, statistic, rng, n_resamples=N_BOOT, level=0.95):
    """Percentile bootstrap interval for ``statistic(sample, axis=-1)``."""
    data = np.asarray(data, dtype=float)
    res = stats.bootstrap((data,), statistic, n_resamples=n_resamples, confidence_level=level,
                          method="percentile", random_state=rng, vectorized=True)
    lo, hi = float(res.confidence_interval.low), float(res.confidence_interval.high)
    point = float(statistic(data, axis=-1))
    # percentile intervals can exclude the point estimate for skewed statistics
    return min(lo, point), max(hi, point)


def unbiased_var(x, axis=-1):
    return np.var(x, axis=axis, ddof=1)


def binomial_ci(successes, trials, level=0.95):
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level)
    return float(ci.low), float(ci.high)
