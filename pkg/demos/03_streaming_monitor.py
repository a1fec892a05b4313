"""Monitor a live stream for a variance break, one observation at a time.

Run: python demos/03_streaming_monitor.py
"""
import numpy as np

from armamonitor import MonitorConfig, critical_value, fit, run_monitor
from armamonitor.arma import innovation_family, simulate_path
from armamonitor.harness import EEG_MODEL

rng = np.random.default_rng(2024)
n_train, n_stream, burn = 1004, 3000, 600

# One continuous path; 300 lags into monitoring the Laplace scale rises
# from 5.6 to 10.7.
z = innovation_family("laplace", 1.0).sample(rng, burn + n_train + n_stream)
sig = np.where(np.arange(z.size) < burn + n_train + 299, EEG_MODEL.sigma, 10.7 * np.sqrt(2))
y = simulate_path(EEG_MODEL, n_train + n_stream, innovations=sig * z, burn_in=burn)
fitted = fit(y[:n_train], 4, 0)
print(f"fitted phi = {np.round(fitted.model.phi, 3)}, sigma = {fitted.model.sigma:.2f}")

for scheme in ("page", "cusum"):
    for gamma in (0.0, 0.25):
        cfg = MonitorConfig(gamma, 0.05, scheme, "general", fitted.m,
                            critical_value(gamma, 0.05, scheme))
        # any iterable works; a generator mimics a feed
        rep = run_monitor(fitted, (v for v in y[n_train:]), cfg)
        print(f"{scheme:5s} gamma={gamma:4.2f}: {rep.status.value} at lag {rep.stop_index}"
              f" (detector {rep.detector_value_at_stop:.0f} vs boundary {rep.boundary_value_at_stop:.0f})")

# A stream without a break runs into the horizon.
cfg = MonitorConfig(0.0, 0.05, "page", "general", fitted.m, critical_value(0.0, 0.05, "page"),
                    horizon=2000)
calm = simulate_path(EEG_MODEL, n_train + 2000, rng=rng, family="laplace")
print("no break:", run_monitor(fit(calm[:n_train], 4, 0), iter(calm[n_train:]), cfg).status.value)
