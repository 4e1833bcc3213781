# Why an L2 boundary penalty is not enough
#
# The exact Poisson solution on the unit disk is u = 1 - r^2.  Add harmonic
# perturbations v_i (angular frequency i) normalised to unit H1 norm.  The
# H1 distance to u never shrinks, yet the classical PINN objective goes to
# zero like 1/i: the residual is untouched and only the boundary term sees
# the perturbation.

from ssbe.counterexample import analytic_norms, failure_demo, quadrature_norms

print(" i   boundary L2^2   (closed form)   gradient^2   (closed form)")
for i in (1, 2, 5, 10):
    q, a = quadrature_norms(i), analytic_norms(i)
    print(f"{i:2d}   {q['bdry_l2_sq']:.10f}   {a['bdry_l2_sq']:.10f}   "
          f"{q['grad_sq']:.8f}   {a['grad_sq']:.8f}")

print()
print(" i   PINN objective   i * objective   relative H1 error")
for row in failure_demo(20):
    if row.i in (1, 2, 4, 8, 16, 20):
        print(f"{row.i:2d}   {row.pinn_objective:.3e}        {row.i * row.pinn_objective:.4f}"
              f"          {row.relative_h1_error:.6f}")

# The last column is constant while the objective decays: driving the PINN
# loss to zero does not control the H1 error.  Penalising tangential
# derivatives on the boundary (the H1 boundary term) sees these v_i at O(1).
