"""Closed-form resonator models and guided-wave dispersion utilities.

Two desk-scale reference models: (i) the frequency-dependent effective mass
of a rigid shell containing spring-mounted internal masses, which feeds
anisotropic dynamic densities for the acoustic family; and (ii) the
dispersion relation and direct resonance scan for shear waves guided by a
soft layer embedded in a stiffer medium.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .fields import Field, Grid
from .materials import build_love
from .projectors import gamma_surface
from .solver import Problem, solve

__all__ = [
    "effective_mass",
    "resonance_frequency",
    "resonator_density",
    "love_dispersion",
    "love_resonance_scan",
    "peak_estimate",
]


def effective_mass(omega, m0, stiffness, count, mass):
    """Dynamic effective mass M(omega) = M0 + 2*K*n*m / (2*K - m*omega^2)
    of a shell of rest mass M0 holding n internal masses m, each attached
    by a pair of springs of stiffness K.

    Vectorized over omega.  At omega = 0 this is exactly M0 + n*m (the
    masses move rigidly with the shell); it grows on the way up to the
    internal resonance sqrt(2K/m) and flips sign across it; a lossy spring
    (negative imaginary K under the e^{-i omega t} convention) gives M a
    positive imaginary part.
    """
    omega = np.asarray(omega)
    return m0 + 2.0 * stiffness * count * mass / (2.0 * stiffness - mass * omega**2)


def resonance_frequency(stiffness, mass):
    """Internal resonance sqrt(2K/m) of the spring-mass unit."""
    return float(np.sqrt(2.0 * stiffness / mass))


def resonator_density(omega, m0, springs, cell_volume):
    """Per-axis diagonal dynamic density for a cell of volume V holding a
    shell resonator: entry j is M_j(omega)/V with M_j from the springs
    (stiffness, count, mass) acting along axis j.

    ``springs`` is either a single (K, n, m) triple (isotropic) applied to
    all three axes or a sequence of per-axis triples.
    """
    if np.ndim(springs[0]) == 0:
        springs = [tuple(springs)] * 3
    entries = [
        effective_mass(omega, m0, K, n, m) / cell_volume for (K, n, m) in springs
    ]
    return np.diag(entries).astype(np.complex128)


# ---------------------------------------------------------------------------
# Guided shear waves in a soft layer
# ---------------------------------------------------------------------------


def _love_function(k1, omega, mu1, rho1, h, mu2, rho2):
    q1 = np.sqrt(omega**2 * rho1 / mu1 - k1**2)
    q2 = np.sqrt(k1**2 - omega**2 * rho2 / mu2)
    return mu1 * q1 * np.sin(q1 * h) - mu2 * q2 * np.cos(q1 * h)


def love_dispersion(omega, layer_mu, layer_rho, half_thickness, substrate_mu,
                    substrate_rho, samples=2000):
    """Guided-mode wavenumbers of a layer of half-thickness h embedded in
    (or equivalently, by midplane symmetry, sitting with a free surface on)
    a faster substrate.

    Roots k1 of mu1*q1*sin(q1*h) = mu2*q2hat*cos(q1*h) with
    q1 = sqrt(omega^2 rho1/mu1 - k1^2), q2hat = sqrt(k1^2 - omega^2 rho2/mu2),
    bracketed between the substrate and layer wavenumbers.  Returns the
    roots in increasing order (the fundamental mode is the largest).
    """
    lo = omega * np.sqrt(substrate_rho / substrate_mu)
    hi = omega * np.sqrt(layer_rho / layer_mu)
    if hi <= lo:
        raise ValueError("layer must be slower than the substrate for guiding")
    eps = 1e-9 * (hi - lo)
    ks = np.linspace(lo + eps, hi - eps, samples)
    vals = _love_function(
        ks, omega, layer_mu, layer_rho, half_thickness, substrate_mu, substrate_rho
    )
    roots = []
    for a, b, fa, fb in zip(ks[:-1], ks[1:], vals[:-1], vals[1:]):
        if np.isfinite(fa) and np.isfinite(fb) and fa * fb < 0:
            roots.append(
                brentq(
                    _love_function, a, b,
                    args=(omega, layer_mu, layer_rho, half_thickness,
                          substrate_mu, substrate_rho),
                    xtol=1e-13,
                )
            )
    return np.asarray(roots)


def love_resonance_scan(
    omega,
    k1_values,
    layer_mu,
    layer_rho,
    half_thickness,
    substrate_mu,
    substrate_rho,
    points=192,
    domain_length=12.0,
    loss=1e-6,
    source_width=None,
    tol=1e-6,
    max_iter=6000,
):
    """Response amplitude of the embedded layer versus propagation
    wavenumber.

    A 1-D periodic depth cell holds the layer (thickness 2h, centered) in
    substrate material; a fixed Gaussian displacement source at the layer
    center drives the canonical solve at each k1, and the recorded response
    |E|/|s| peaks where k1 crosses a guided-mode wavenumber.  A small loss
    (1 - i*loss) on the shear moduli keeps the resonance finite.
    """
    grid = Grid((points,), (domain_length,))
    x = grid.coordinates()[:, 0]
    center = domain_length / 2.0
    in_layer = np.abs(x - center) < half_thickness
    damp = 1.0 - 1j * loss
    mu = np.where(in_layer, layer_mu, substrate_mu) * damp
    rho = np.where(in_layer, layer_rho, substrate_rho).astype(np.complex128)
    if source_width is None:
        source_width = domain_length / 64.0
    bump = np.exp(-((x - center) ** 2) / (2.0 * source_width**2))
    gamma = gamma_surface(0.0)
    responses = np.zeros(len(k1_values))
    for idx, k1 in enumerate(k1_values):
        L = build_love(grid, omega, float(k1), mu, rho)
        svals = np.zeros((grid.npoints, 2), dtype=np.complex128)
        svals[:, 1] = bump
        source = Field(grid, L.layout, svals)
        res = solve(
            Problem(grid=grid, L=L, gamma=gamma, source=source, tol=tol,
                    max_iter=max_iter)
        )
        snorm = float(np.linalg.norm(source.values))
        responses[idx] = float(np.linalg.norm(res.E.values)) / snorm
    return responses


def peak_estimate(k1_values, responses):
    """Peak location from a sampled response curve: the argmax sample,
    parabolically refined on log-responses when it is interior."""
    k1_values = np.asarray(k1_values, dtype=float)
    responses = np.asarray(responses, dtype=float)
    i = int(np.argmax(responses))
    if i == 0 or i == len(responses) - 1:
        return float(k1_values[i])
    y0, y1, y2 = np.log(responses[i - 1 : i + 2])
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(k1_values[i])
    delta = 0.5 * (y0 - y2) / denom
    delta = float(np.clip(delta, -1.0, 1.0))
    h = k1_values[i + 1] - k1_values[i]
    return float(k1_values[i] + delta * h)
