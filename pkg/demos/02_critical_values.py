"""Critical values of the Brownian limit functionals.

For gamma = 0 the CUSUM limit is sup |W| on [0, 1], whose distribution is
known in closed form; the Monte Carlo values can be checked against it.
Run: python demos/02_critical_values.py
"""
from armamonitor import MCConfig, critical_value
from armamonitor.limits import empirical_quantile, simulate_functionals, sup_abs_bm_quantile

print("bundled table (R = 1e6, G = 1e4)")
print("gamma  alpha   CUSUM   Page")
for g in (0.0, 0.25, 0.49):
    for a in (0.05, 0.10):
        print(f"{g:5.2f}  {a:5.2f}  {critical_value(g, a, 'cusum'):6.3f}  "
              f"{critical_value(g, a, 'page'):6.3f}")

print("\nanalytic gamma = 0 values:",
      {a: round(sup_abs_bm_quantile(a), 4) for a in (0.01, 0.05, 0.10)})

# A quick fresh simulation: a coarser grid biases the supremum downwards.
for G in (100, 1000):
    cfg = MCConfig(G=G, R=20_000, seed=7)
    d = simulate_functionals([0.0], cfg, ["cusum"])
    q = empirical_quantile(next(iter(d.values())), 0.05)
    print(f"G={G:5d}, R=2e4: c(0.05) = {q:.3f}")
