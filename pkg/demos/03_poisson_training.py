# PINN versus SSBE on the Poisson problem
#
# Both methods start from the same initialization and see the same samples.
# This short run (2000 Adam steps, about two minutes on one core) already
# shows the gap in H1 error.  The acceptance suite runs the full budget.

from ssbe.harness import ExperimentConfig, run_experiment

cfg = ExperimentConfig(
    name="demo_poisson",
    problem="poisson_disk",
    layer_sizes=[2, 30, 30, 30, 1],
    n_interior=2500,
    n_boundary_per_chart=50,
    total_steps=2000,
    eval_resolution=100,
)
report = run_experiment(cfg, write=False)

for method, res in report.results.items():
    print(f"{method:5s}  L2 {res.initial_l2:.3e} -> {res.final_l2:.3e}   "
          f"H1 {res.initial_h1:.3e} -> {res.final_h1:.3e}   ({res.wall_time:.0f} s)")

# The loss curve is logged every 100 steps.
for row in report.results["ssbe"].curve[::5]:
    print(row["step"], f"{row['loss_total']:.3e}", f"lr {row['lr']:.1e}")
