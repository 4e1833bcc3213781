# Monte-Carlo Rademacher complexity of two-layer ReLU^3 classes
#
# For each sign vector we search for the parameters that correlate best with
# the signs under a path-norm budget Q.  The search only finds a lower
# estimate of the supremum, so it must stay under the theoretical upper
# bound, and it should decay like n^(-1/2).

from ssbe.theory_probe import (FunctionClass, empirical_rademacher, loglog_slope,
                               rademacher_bound)

ns = [64, 256, 1024]
for cls in FunctionClass:
    est = [empirical_rademacher(cls, 1.0, n, 2, trials=10, seed=0) for n in ns]
    print(cls.value)
    for e in est:
        print(f"  n={e.n:5d}  estimate {e.estimate:.4f}  bound {e.bound:.4f}")
    print("  log-log slope:", round(loglog_slope(ns, [e.estimate for e in est]), 3))

# The bound scales linearly in Q, and so does the estimate.
for Q in (0.5, 1.0, 2.0):
    e = empirical_rademacher(FunctionClass.F_Q, Q, 256, 2, trials=10, seed=0)
    print(f"Q={Q}: estimate {e.estimate:.4f}, bound {rademacher_bound('F_Q', Q, 256, 2):.4f}")
