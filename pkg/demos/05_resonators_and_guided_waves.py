"""Two desk-scale dispersion models: resonant mass and a guided layer.

A rigid shell holding spring-mounted masses has a frequency-dependent
effective mass that turns negative above the internal resonance — the
mechanism behind locally resonant band gaps.  A soft layer embedded in a
stiffer half-space guides shear waves; the dispersion roots predicted by
the transcendental relation are recovered independently by scanning the
response of a driven periodic depth cell.
"""

import numpy as np

from gammasolve import (
    effective_mass,
    love_dispersion,
    love_resonance_scan,
    peak_estimate,
    resonance_frequency,
    resonator_density,
)

# --- effective mass of the spring-mass shell -------------------------------
m0, K, n, m = 1.0, 1.0, 1, 1.0
w0 = resonance_frequency(K, m)
print(f"internal resonance sqrt(2K/m) = {w0:.6f}")
print(f"{'omega':>8s} {'Re M':>10s}")
for w in (0.0, 0.5, 1.0, 1.3, 1.5, 2.0):
    M = effective_mass(w, m0, K, n, m)
    tag = "  <- negative" if np.real(M) < 0 else ""
    print(f"{w:8.2f} {np.real(M):10.4f}{tag}")

lossy = effective_mass(1.0, m0, K - 0.1j, n, m)
print(f"lossy spring K = 1 - 0.1i: M = {lossy:.6f} (Im M > 0, passive)")

D = resonator_density(1.0, m0, [(1.0, 1, 1.0), (2.0, 1, 1.0), (3.0, 1, 1.0)],
                      cell_volume=2.0)
print("anisotropic dynamic density diag:", np.round(np.diag(D).real, 4))

# --- guided shear waves ------------------------------------------------------
pars = dict(layer_mu=1.0, layer_rho=1.0, half_thickness=1.0,
            substrate_mu=4.0, substrate_rho=1.0)
omega = 5.0
roots = love_dispersion(omega, **pars)
print(f"\nguided-mode wavenumbers at omega = {omega}: {np.round(roots, 8)}")

k1s = np.linspace(4.4, 5.0, 25)
print("direct scan of a driven depth cell (response peaks at the root):")
print(f"{'points':>8s} {'peak k1':>10s} {'rel err':>10s}")
for points in (96, 144, 192):
    responses = love_resonance_scan(omega, k1s, points=points, **pars)
    peak = peak_estimate(k1s, responses)
    err = abs(peak - roots[-1]) / roots[-1]
    print(f"{points:8d} {peak:10.5f} {err:10.2e}")
