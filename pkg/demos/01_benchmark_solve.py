# Solve the multiplication-operator benchmark with the rational-subspace
# solver and check the regularized iterate against its closed form.
import numpy as np

from sinereg import StoppingRule, multiplication_problem, run_sine

# T f(t) = t f(t) on (0, 1), truth x(t) = t, data y = t^2 perturbed by the
# constant delta. The weighted norm of the perturbation is exactly delta.
n = 4096
gamma = 1e-3
delta = 1e-3
problem = multiplication_problem(n, truth_exponent=1, delta=delta)

rule = StoppingRule(tau=1.001, delta=delta)
report = run_sine(problem, gamma, rule)

print(f"stopping index:      {report.stopping_index}")
print(f"terminated by:       {report.terminated_by}")
print(f"residual history:    {[f'{r:.4e}' for r in report.residual_history]}")
print(f"threshold tau*delta: {rule.threshold:.4e}")
print(f"error vs truth:      {problem.error_norm(report.iterate):.4e}")

# The two-step iterate has a closed form: a small cubic correction plus a
# near-unit multiple of t.
t = problem.operator.diagonal
closed_form = -(21 / 5000) * t**3 + (1507 / 1500) * t
rel = problem.domain_space.norm(report.iterate - closed_form)
rel /= problem.domain_space.norm(closed_form)
print(f"closed-form match:   {rel:.3e} relative")

# Step sizes and conjugation coefficients of the two accepted steps
print(f"alphas: {np.round(report.alphas, 6)}")
print(f"betas:  {np.round(report.betas, 6)}")
