"""Solvers for the canonical projected problem Gamma1 (L E - s) = 0.

The solve alternates pointwise material maps in real space with projector
symbols in Fourier space: the Krylov path applies the operator
A = Gamma1 L Gamma1 + Gamma2 matrix-free inside restarted GMRES (with
right-hand side Gamma1 s the solution of A x = b solves the canonical
problem and automatically lies in range(Gamma1)); the fixed-point path
iterates E <- E + (1/c) Gamma1 (s - L E) against a reference constant c;
and a brute-force dense assembly of A is provided as an oracle for small
grids.  A separate resolvent path solves (z - D^dagger B D) psi = f for
scalar-potential families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft
import scipy.sparse.linalg

from . import fields
from .fields import Block, BlockLayout, Field, scalar_layout
from .materials import canonical_material, build_material, default_projector
from .projectors import projector_symbols

__all__ = [
    "Problem",
    "SolveResult",
    "solve",
    "assemble_problem",
    "dense_operator",
    "solve_dense",
    "operator_norm_estimate",
    "solve_resolvent",
    "ResonanceError",
    "NonConvergenceError",
    "residual_functional",
]


class ResonanceError(RuntimeError):
    """The resolvent was evaluated too close to the operator spectrum."""


class NonConvergenceError(RuntimeError):
    pass


@dataclass
class Problem:
    """A canonical projected problem on a periodic grid.

    Attributes
    ----------
    grid : Grid
    L : LField
        Material map (either orientation; the canonical direct form is
        derived on demand).
    gamma : Projector
    source : Field
    shift : array_like or None
        Constant wavevector shift (Bloch phase) applied to the projector.
    tol : float
        Target relative residual |Gamma1 (L E - s)| / |Gamma1 s|.
    max_iter : int
        Cap on inner Krylov (or fixed-point) iterations.
    method : {"krylov", "fixed_point"}
    reference : complex or None
        Reference constant for the fixed-point scheme (estimated if None).
    restart : int or None
        Krylov restart length (None picks min(40, n); raise it for stiff
        penalized problems where restarting stalls).
    seed : int
        Seed for randomized estimates.
    """

    grid: object
    L: object
    gamma: object
    source: object
    shift: object = None
    tol: float = 1e-8
    max_iter: int = 2000
    method: str = "krylov"
    reference: object = None
    restart: object = None
    seed: int = 42


@dataclass
class SolveResult:
    E: object
    J: object
    residual: float
    iterations: int
    converged: bool
    method: str
    residual_history: list = dc_field(default_factory=list)


def assemble_problem(spec, grid, source, **opts):
    """Build a Problem from a MaterialSpec, grid and source field."""
    L = build_material(spec, grid)
    k1 = spec.params.get("k1", 0.0)
    gamma = default_projector(spec.physics, grid, k1=k1)
    return Problem(grid=grid, L=L, gamma=gamma, source=source, **opts)


def _fftn(vals, grid):
    shaped = vals.reshape(*grid.dims, vals.shape[-1])
    out = scipy.fft.fftn(
        shaped, axes=tuple(range(grid.ndim)), norm="ortho",
        workers=fields.get_fft_workers(),
    )
    return out.reshape(vals.shape)


def _ifftn(vals, grid):
    shaped = vals.reshape(*grid.dims, vals.shape[-1])
    out = scipy.fft.ifftn(
        shaped, axes=tuple(range(grid.ndim)), norm="ortho",
        workers=fields.get_fft_workers(),
    )
    return out.reshape(vals.shape)


def _project(G, vals):
    return np.einsum("pij,pj->pi", G, vals)


class _CanonicalOperator:
    """Matrix-free A = Gamma1 L Gamma1 + Gamma2 on flattened Fourier data."""

    def __init__(self, problem):
        self.grid = problem.grid
        self.Lc = canonical_material(problem.L)
        if self.Lc.ncomp != problem.gamma.ncomp:
            raise ValueError("material and projector component counts differ")
        self.G = projector_symbols(problem.gamma, problem.grid, problem.shift)
        self.ncomp = self.Lc.ncomp
        self.n = problem.grid.npoints * self.ncomp
        self.applications = 0

    def project(self, vals):
        return _project(self.G, vals)

    def material(self, vals_hat):
        real = _ifftn(vals_hat, self.grid)
        mapped = self.Lc.apply(real)
        return _fftn(mapped, self.grid)

    def apply_hat(self, x):
        self.applications += 1
        gx = self.project(x)
        lg = self.material(gx)
        return self.project(lg) + (x - gx)

    def apply_hat_adjoint(self, x):
        gx = self.project(x)
        real = _ifftn(gx, self.grid)
        mapped = self.Lc.apply_adjoint(real)
        lg = _fftn(mapped, self.grid)
        return self.project(lg) + (x - gx)

    def matvec(self, flat):
        return self.apply_hat(flat.reshape(-1, self.ncomp)).ravel()

    def residual(self, e_hat, s_hat, b_norm):
        r = self.project(self.material(e_hat) - s_hat)
        return float(np.linalg.norm(r) / b_norm)


def solve(problem):
    """Solve Gamma1 (L E - s) = 0, Gamma1 E = E for E (and J = L E - s).

    Returns a SolveResult with real-space E and J fields; E is projected
    onto range(Gamma1) exactly.  With a source whose projection vanishes
    the zero field is returned as converged.
    """
    op = _CanonicalOperator(problem)
    s = problem.source
    if s.layout.ncomp != op.ncomp:
        raise ValueError("source layout does not match material")
    s_hat = s.to_fourier().values
    b = op.project(s_hat)
    b_norm = float(np.linalg.norm(b))
    layout = problem.L.layout
    if b_norm == 0.0:
        E = Field.zeros(problem.grid, layout)
        J = Field(problem.grid, layout, -s.to_real().values)
        return SolveResult(E, J, 0.0, 0, True, problem.method)

    history = []
    if problem.method == "krylov":
        linop = scipy.sparse.linalg.LinearOperator(
            (op.n, op.n), matvec=op.matvec, dtype=np.complex128
        )
        restart = min(40, op.n) if problem.restart is None else min(
            problem.restart, op.n
        )
        maxiter = max(1, math.ceil(problem.max_iter / restart))
        x, info = scipy.sparse.linalg.gmres(
            linop,
            b.ravel(),
            rtol=0.25 * problem.tol,
            atol=0.0,
            restart=restart,
            maxiter=maxiter,
            callback=lambda pr: history.append(float(pr)),
            callback_type="pr_norm",
        )
        e_hat = op.project(x.reshape(-1, op.ncomp))
        iterations = len(history)
    elif problem.method == "fixed_point":
        c = problem.reference
        if c is None:
            M = canonical_material(problem.L).values
            Mm = M if M.ndim == 3 else M[None]
            herm = np.conj(np.swapaxes(Mm, -1, -2)) @ Mm
            c = float(np.sqrt(np.max(np.linalg.eigvalsh(herm))))
        e_hat = np.zeros_like(b)
        iterations = 0
        for iterations in range(1, problem.max_iter + 1):
            r = op.project(s_hat - op.material(e_hat))
            e_hat = e_hat + r / c
            rel = float(np.linalg.norm(op.project(op.material(e_hat) - s_hat)) / b_norm)
            history.append(rel)
            if rel <= problem.tol:
                break
            if not np.isfinite(rel) or rel > 1e8:
                break  # diverging; the scheme needs a definite material map
    else:
        raise ValueError(f"unknown method {problem.method!r}")

    residual = op.residual(e_hat, s_hat, b_norm)
    converged = residual <= problem.tol
    E = Field(problem.grid, layout, e_hat, "fourier").to_real()
    J = Field(problem.grid, layout, op.Lc.apply(E.values) - s.to_real().values)
    return SolveResult(E, J, residual, iterations, converged, problem.method, history)


def dense_operator(problem, limit=4096):
    """Assemble A = Gamma1 L Gamma1 + Gamma2 as a dense matrix in the
    Fourier basis by applying it to unit vectors (brute-force oracle)."""
    op = _CanonicalOperator(problem)
    if op.n > limit:
        raise ValueError(f"dense assembly of size {op.n} exceeds limit {limit}")
    A = np.zeros((op.n, op.n), dtype=np.complex128)
    e = np.zeros(op.n, dtype=np.complex128)
    for j in range(op.n):
        e[j] = 1.0
        A[:, j] = op.matvec(e)
        e[j] = 0.0
    return A


def solve_dense(problem, limit=4096):
    """Direct dense solve of the canonical problem (oracle for small grids)."""
    op = _CanonicalOperator(problem)
    A = dense_operator(problem, limit)
    s = problem.source
    s_hat = s.to_fourier().values
    b = op.project(s_hat)
    b_norm = float(np.linalg.norm(b))
    layout = problem.L.layout
    if b_norm == 0.0:
        E = Field.zeros(problem.grid, layout)
        J = Field(problem.grid, layout, -s.to_real().values)
        return SolveResult(E, J, 0.0, 0, True, "dense")
    x = np.linalg.solve(A, b.ravel())
    e_hat = op.project(x.reshape(-1, op.ncomp))
    residual = op.residual(e_hat, s_hat, b_norm)
    E = Field(problem.grid, layout, e_hat, "fourier").to_real()
    J = Field(problem.grid, layout, op.Lc.apply(E.values) - s.to_real().values)
    return SolveResult(E, J, residual, 1, residual <= problem.tol, "dense")


def operator_norm_estimate(problem, iters=50):
    """Power-iteration estimate of the spectral norm of
    A = Gamma1 L Gamma1 + Gamma2 (for a homogeneous material c I this is
    max(|c|, 1) and the estimate is exact)."""
    op = _CanonicalOperator(problem)
    rng = np.random.default_rng(problem.seed)
    x = rng.standard_normal((problem.grid.npoints, op.ncomp)) + 1j * rng.standard_normal(
        (problem.grid.npoints, op.ncomp)
    )
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(iters):
        y = op.apply_hat(x)
        sigma = float(np.linalg.norm(y))
        if sigma == 0.0:
            return 0.0
        x = op.apply_hat_adjoint(y)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return sigma
        x /= nx
    return float(np.sqrt(np.linalg.norm(op.apply_hat_adjoint(op.apply_hat(x)))))


# ---------------------------------------------------------------------------
# Resolvent path: (z - D^dagger B D) psi = f on scalar potentials
# ---------------------------------------------------------------------------


def _resolvent_symbol(z, B, grid):
    """Per-mode scalar z - k^T B_v k - b_s for a constant coefficient pair."""
    nd = grid.ndim
    K = grid.wavevectors()
    Bv = B.values[:nd, :nd]
    bs = B.values[nd, nd]
    quad = np.einsum("pi,ij,pj->p", K, Bv, K)
    return z - quad - bs


def solve_resolvent(grid, z, B, f, tol=1e-10, max_iter=2000):
    """Solve (z - D^dagger B D) psi = f for a scalar potential psi, where
    D c = (grad c, c) and B is a material on the (vector, scalar) layout
    (second-order coefficient matrix in the vector block, zero-order
    coefficient in the scalar slot).

    Constant B uses the exact per-mode inverse; varying B uses GMRES on the
    scalar unknowns.  Raises ResonanceError if z is (numerically) in the
    spectrum: per-mode denominators below 1e-12 of their scale, or a
    Krylov solve that fails to reach tol.
    """
    nd = grid.ndim
    if f.layout != scalar_layout():
        raise ValueError("resolvent source must be a single scalar block")
    f_hat = f.to_fourier().values[:, 0]
    if B.layout != BlockLayout((Block("vector", nd), Block("scalar"))):
        raise ValueError("B must live on a (vector(ndim), scalar) layout")

    if B.is_constant:
        denom = _resolvent_symbol(z, B, grid)
        scale = max(abs(z), float(np.max(np.abs(denom))))
        if float(np.min(np.abs(denom))) <= 1e-12 * scale:
            raise ResonanceError(
                f"resolvent evaluated at z={z} within 1e-12 of the spectrum"
            )
        psi_hat = f_hat / denom
        out = Field(grid, scalar_layout(), psi_hat[:, None], "fourier")
        return out.to_real() if f.representation == "real" else out

    K = grid.wavevectors()

    def matvec(flat):
        psi_hat = flat
        d_hat = np.empty((grid.npoints, nd + 1), dtype=np.complex128)
        d_hat[:, :nd] = 1j * K * psi_hat[:, None]
        d_hat[:, nd] = psi_hat
        w = _fftn(B.apply(_ifftn(d_hat, grid)), grid)
        contracted = np.sum(-1j * K * w[:, :nd], axis=1) + w[:, nd]
        return z * psi_hat - contracted

    linop = scipy.sparse.linalg.LinearOperator(
        (grid.npoints, grid.npoints), matvec=matvec, dtype=np.complex128
    )
    restart = min(40, grid.npoints)
    x, info = scipy.sparse.linalg.gmres(
        linop,
        f_hat,
        rtol=0.25 * tol,
        atol=0.0,
        restart=restart,
        maxiter=max(1, math.ceil(max_iter / restart)),
    )
    rel = float(np.linalg.norm(matvec(x) - f_hat) / np.linalg.norm(f_hat))
    if rel > tol:
        raise ResonanceError(
            f"resolvent solve stalled at relative residual {rel:.3e} "
            f"(z may be near the spectrum)"
        )
    out = Field(grid, scalar_layout(), x[:, None], "fourier")
    return out.to_real() if f.representation == "real" else out


# ---------------------------------------------------------------------------
# Variational residual for stationary-state candidates
# ---------------------------------------------------------------------------


def residual_functional(psi, material, source=None):
    """Quadratic misfit of a stationary-state candidate.

    For a quantum-style material diag(-A, E - V) (V real) and a scalar
    candidate psi, returns

        W = || div(A grad psi) + (Re E - V) psi - s ||^2 + (Im E)^2 * vol,

    which vanishes exactly at a true real eigenpair with s = 0 and is
    bounded below by (Im E)^2 * vol in general.
    """
    grid = psi.grid
    nd = grid.ndim
    vals = material.values
    energy = material.omega
    psi_r = psi.to_real()
    g = fields.gradient(psi_r)
    if material.is_constant:
        A = -vals[:nd, :nd]
        Ag = g.values @ A.T
        coeff = np.full(grid.npoints, vals[nd, nd])
    else:
        A = -vals[:, :nd, :nd]
        Ag = np.einsum("pij,pj->pi", A, g.values)
        coeff = vals[:, nd, nd]
    flux = Field(grid, fields.vector_layout(nd), Ag)
    p = fields.divergence(flux).values[:, 0]
    # coeff = E - V, so for real V its real part is Re E - V
    p = p + coeff.real * psi_r.values[:, 0]
    if source is not None:
        p = p - source.to_real().values[:, 0]
    W = float(np.sum(np.abs(p) ** 2) * grid.cell_volume)
    W += complex(energy).imag ** 2 * grid.volume
    return W
