"""Stopping times for the EEG-like variance break, as in the application table.

Uses 200 replications; the full table uses 2500 (``armamonitor table2``).
Run: python demos/05_eeg_table.py
"""
from armamonitor.harness import eeg_spec, run_experiment

for case in ("TP1", "TP2"):
    res = run_experiment(eeg_spec(case, replications=200))
    print(f"{case}: break at absolute time {res.spec.offset + res.spec.k_star}")
    print("  gamma  scheme   median  95% upper   FRR")
    for row in res.rows():
        print(f"  {row['gamma']:5.2f}  {row['scheme']:6s} {row['median']:8.1f} {row['upper95']:9.0f}"
              f"   {row['frr']:.3f}")
