# Convergence-rate check: sweep the noise level, stop by the discrepancy
# principle, and fit the slope of log(error) against log(delta).
#
# For a truth t^(2 mu) the expected decay is delta^(2 mu / (2 mu + 1)):
# exponent 1/2 for mu = 1/2 (truth t) and 3/4 for mu = 3/2 (truth t^3).
import csv

from sinereg import RateCheckConfig, run_ratecheck

grid = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5)

for mu in (0.5, 1.5):
    result = run_ratecheck(RateCheckConfig(delta_grid=grid, mu=mu))
    print(f"mu = {mu} (truth t^{int(2 * mu)}), "
          f"expected slope >= {2 * mu / (2 * mu + 1):.3f}, "
          f"fitted slope = {result.slope:.3f}")
    for rec in result.records:
        print(f"  delta {rec.delta:8.1e}  stopped at m = {rec.stopping_index:2d}"
              f"  error {rec.error:.4e}")

    out = f"ratecheck_mu{mu}.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "stopping_index", "error"])
        writer.writerows(
            (r.delta, r.stopping_index, r.error) for r in result.records
        )
    print(f"  wrote {out} (plot error vs 1/delta on log-log axes)")
    print()
