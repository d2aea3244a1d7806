# Compare the rational-subspace solver against conjugate gradients on the
# normal equation, iteration by iteration, on the same benchmark.
from sinereg import StoppingRule, multiplication_problem, run_compare

delta = 1e-3
problem = multiplication_problem(4096, truth_exponent=1, delta=delta)
rule = StoppingRule(tau=1.001, delta=delta)

result = run_compare(problem, gamma=1e-3, rule=rule)

print(f"stopping indices: rational {result.stopping_index_sine}, "
      f"polynomial {result.stopping_index_cgne}")
print(f"per-iteration dominance holds: {result.dominance_all}")
print()
print(f"{'m':>3} {'rational':>12} {'polynomial':>12}")
for m, (rs, rc) in enumerate(zip(result.residuals_sine, result.residuals_cgne)):
    marker = ""
    if m == result.stopping_index_sine:
        marker += "  <- rational stops"
    if m == result.stopping_index_cgne:
        marker += "  <- polynomial stops"
    print(f"{m:>3} {rs:>12.4e} {rc:>12.4e}{marker}")
