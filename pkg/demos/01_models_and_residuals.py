"""ARMA models, their expansions, and training-window fits.

Run: python demos/01_models_and_residuals.py
"""
import numpy as np

from armamonitor import ArmaModel, fit, psi_expansion, residuals, select_order, simulate_path
from armamonitor.arma import ma_infinity
from armamonitor.harness import EEG_MODEL, IBM_ARMA22

# The EEG-like design: AR(4) around -207 with Laplace innovations (b = 5.6,
# so sigma = 5.6 * sqrt(2)).
print(EEG_MODEL)
print("AR root moduli:", np.round(np.abs(EEG_MODEL.ar_roots()), 3))

# 1000 training values plus 4 presample values, as in the application.
y = simulate_path(EEG_MODEL, 1004, rng=1, family="laplace")
res = fit(y, 4, 0)
print("\nAR(4) fit on simulated EEG-like data")
for name, est, se in zip(["mu", "phi1", "phi2", "phi3", "phi4"],
                         [res.model.mu, *res.model.phi], res.standard_errors):
    print(f"  {name:5s} {est:9.3f}  ({se:.3f})")
print(f"  sigma^2 {res.sigma_sq_hat:.1f}   eta^2 {res.eta_sq_hat:.0f}   AIC {res.aic:.1f}")

# Residuals under the fitted model should look like white noise.
e = res.residuals - res.residuals.mean()
print("  lag-1 autocorrelation of residuals:", round(float(e[1:] @ e[:-1] / (e @ e)), 4))

# The IBM design compares ARMA(2,2) with AR(4). Both have similar MA(infinity)
# weights, which is why they monitor alike.
ar4 = ArmaModel.create(phi=(0.26, -0.12, -0.10, 0.16))
print("\nMA(infinity) weights, first 8 lags")
print("  ARMA(2,2):", np.round(ma_infinity(IBM_ARMA22, 7), 3))
print("  AR(4):    ", np.round(ma_infinity(ar4, 7), 3))

psi = psi_expansion(IBM_ARMA22)
print(f"  1/theta(z) truncated at L={psi.truncation_length}, tail bound {psi.tail_bound:.1e}")

# Order selection by AIC on one simulated IBM-like training window.
z = simulate_path(IBM_ARMA22, 204, rng=3)
print("\nAIC choice over p<=4, q<=2:", select_order(z, 4, 2))
e = residuals(IBM_ARMA22, z)
print("true-model residual variance:", round(float(e.var()), 7), "(sigma^2 = 8.5e-05)")
