"""Returns series switching from ARMA(2,2) to white noise at observation 235.

Monitors with the correct ARMA(2,2) fit and with a misspecified AR(4).
Run: python demos/06_ibm_table.py
"""
from armamonitor.harness import ibm_spec, run_experiment

for order in ((2, 2), (4, 0)):
    res = run_experiment(ibm_spec(order, replications=100))
    print(f"fitted ARMA{order}, {res.fit_failures} failed fits")
    for row in res.rows():
        print(f"  gamma={row['gamma']:4.2f} {row['scheme']:5s}: median {row['median']:.0f}, "
              f"95% upper {row['upper95']:.0f}, FRR {row['frr']:.2f}")
