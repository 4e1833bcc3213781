# Approximating a Barron pair with m random neurons
#
# A pair (f, g) built from a discrete distribution over ReLU^3 atoms is
# approximated by averaging m atoms drawn from that distribution.  The
# expected risk falls like 1/m: each quadrupling of m should cut it by ~4.

from ssbe.theory_probe import approximation_probe, random_barron_spec

spec = random_barron_spec(n_atoms=16, seed=0)
print("Barron norm of the pair:", round(spec.barron_norm(), 4))

prev = None
for m in (8, 32, 128, 512):
    rep = approximation_probe(spec, m, seed=1)
    ratio = "" if prev is None else f"  ratio {prev / rep.mean_risk:.2f}"
    print(f"m={m:4d}  mean risk {rep.mean_risk:.3e} +- {rep.std_error:.1e}  "
          f"variance ref {rep.variance_reference:.3e}  bound {rep.theorem_bound:.3e}"
          f"  path-norm event {rep.path_norm_event_fraction:.2f}{ratio}")
    prev = rep.mean_risk
