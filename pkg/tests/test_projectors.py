"""Projector symbol algebra: idempotency, Hermiticity, fixed subspaces."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from gammasolve.fields import Block, BlockLayout, Field, Grid, gradient, random_field
from gammasolve.projectors import (
    apply_projector,
    clear_symbol_cache,
    gamma_brinkman,
    gamma_elastic,
    gamma_from_D,
    gamma_helmholtz,
    gamma_maxwell,
    gamma_schrodinger,
    gamma_surface,
    gamma_thermoacoustic,
    gradient_D,
    helmholtz_D,
    maxwell_D,
    projector_symbols,
    sym_gradient_D,
)

RNG = np.random.default_rng(1234)

FAMILIES = [
    (gamma_helmholtz(3), 3),
    (gamma_helmholtz(2), 2),
    (gamma_schrodinger(4), 4),
    (gamma_elastic(3), 3),
    (gamma_elastic(2), 2),
    (gamma_maxwell(), 3),
    (gamma_brinkman(3), 3),
    (gamma_thermoacoustic(), 3),
    (gamma_surface(0.8), 1),
    (gamma_surface(0.8, gamma_elastic(3)), 1),
]


def _random_k(ndim, n=200, scale=4.0):
    return RNG.normal(scale=scale, size=(n, ndim))


@pytest.mark.parametrize("proj,ndim", FAMILIES, ids=lambda v: getattr(v, "name", v))
def test_idempotent_and_hermitian(proj, ndim):
    K = _random_k(ndim)
    G = proj.symbols(K)
    Gh = np.conj(np.swapaxes(G, -1, -2))
    assert np.max(np.abs(G @ G - G)) < 1e-12
    assert np.max(np.abs(G - Gh)) < 1e-12


@pytest.mark.parametrize(
    "dop,proj,ndim",
    [
        (helmholtz_D(3), gamma_helmholtz(3), 3),
        (helmholtz_D(2), gamma_helmholtz(2), 2),
        (gradient_D(3), gamma_elastic(3), 3),
        (gradient_D(2), gamma_elastic(2), 2),
        (maxwell_D(), gamma_maxwell(), 3),
    ],
)
def test_gamma_from_D_matches_closed_forms(dop, proj, ndim):
    K = _random_k(ndim, n=300)
    assert np.max(np.abs(gamma_from_D(dop).symbols(K) - proj.symbols(K))) < 1e-12


@pytest.mark.parametrize(
    "dop,ndim",
    [
        (helmholtz_D(3), 3),
        (gradient_D(3), 3),
        (maxwell_D(), 3),
    ],
)
def test_projector_fixes_range_of_D(dop, ndim):
    K = _random_k(ndim, n=100)
    D = dop.matrices(K)
    G = gamma_from_D(dop).symbols(K)
    assert np.max(np.abs(G @ D - D)) < 1e-11


def test_helmholtz_closed_form_value():
    # frozen at k = (1, 2, 2): k^2 = 9, denominator 10
    G = gamma_helmholtz(3).symbol(np.array([1.0, 2.0, 2.0]))
    k = np.array([1.0, 2.0, 2.0])
    expected = np.zeros((4, 4), complex)
    expected[:3, :3] = np.outer(k, k)
    expected[:3, 3] = 1j * k
    expected[3, :3] = -1j * k
    expected[3, 3] = 1.0
    expected /= 10.0
    assert_allclose(G, expected, atol=1e-15)


def test_zero_wavevector_behavior():
    k0 = np.zeros(3)
    # scalar-gradient pair: only the scalar survives at k = 0
    G = gamma_helmholtz(3).symbol(k0)
    expected = np.zeros((4, 4))
    expected[3, 3] = 1.0
    assert_allclose(G, expected, atol=1e-15)
    # curl pair: the first vector block survives
    Gm = gamma_maxwell().symbol(k0)
    em = np.zeros((6, 6))
    em[:3, :3] = np.eye(3)
    assert_allclose(Gm, em, atol=1e-15)
    # stress pair: the packed-symmetric block survives
    Gb = gamma_brinkman(3).symbol(k0)
    eb = np.zeros((9, 9))
    eb[:6, :6] = np.eye(6)
    assert_allclose(Gb, eb, atol=1e-13)
    # vector-gradient pair: the vector block survives
    Ge = gamma_elastic(3).symbol(k0)
    ee = np.zeros((12, 12))
    ee[9:, 9:] = np.eye(3)
    assert_allclose(Ge, ee, atol=1e-15)


def test_elastic_acts_per_column():
    k = np.array([0.3, -1.2, 2.0])
    G = gamma_elastic(3).symbol(k)
    Z = gamma_helmholtz(3).symbol(k)
    for c in range(3):
        rows = [i * 3 + c for i in range(3)] + [9 + c]
        assert_allclose(G[np.ix_(rows, rows)], Z, atol=1e-14)
    # no coupling across columns
    rows0 = [0, 3, 6, 9]
    rows1 = [1, 4, 7, 10]
    assert np.max(np.abs(G[np.ix_(rows0, rows1)])) == 0.0


def test_brinkman_annihilates_gradient_pairs_and_fixes_stress_pairs():
    K = _random_k(3, n=50)
    G = gamma_brinkman(3).symbols(K)
    D = sym_gradient_D(3).matrices(K)
    # pairs (i sym(k x a) packed, a) are annihilated
    pairs = np.concatenate([D, np.broadcast_to(np.eye(3), (50, 3, 3))], axis=1)
    assert np.max(np.abs(G @ pairs)) < 1e-12
    # complementary rank: trace = 9 - 3
    assert_allclose(np.trace(G, axis1=1, axis2=2), 6.0, atol=1e-12)


def test_maxwell_blocks_structure():
    k = np.array([0.5, -0.7, 1.1])
    G = gamma_maxwell().symbol(k)
    k2 = k @ k
    M = (np.eye(3) + np.outer(k, k)) / (1.0 + k2)
    eta = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    assert_allclose(G[:3, :3], M, atol=1e-14)
    assert_allclose(G[:3, 3:], M @ (1j * eta), atol=1e-14)
    assert_allclose(G[3:, 3:], (1j * eta) @ M @ (1j * eta), atol=1e-14)


def test_thermoacoustic_is_block_diagonal():
    k = np.array([1.0, -0.4, 0.2])
    G = gamma_thermoacoustic().symbol(k)
    assert_allclose(G[:12, :12], gamma_elastic(3).symbol(k), atol=1e-14)
    assert_allclose(G[12:, 12:], gamma_helmholtz(3).symbol(k), atol=1e-14)
    assert np.max(np.abs(G[:12, 12:])) == 0.0


def test_surface_embedding_uses_fixed_k1():
    base = gamma_elastic(3)
    proj = gamma_surface(0.8, base)
    K = np.array([[1.7]])
    embedded = base.symbol(np.array([0.8, 0.0, 1.7]))
    assert_allclose(proj.symbols(K)[0], embedded, atol=1e-15)
    # the scalar-pair surface projector ignores k1 (depth wavenumber only)
    a = gamma_surface(0.0).symbol(np.array([2.0]))
    b = gamma_surface(5.0).symbol(np.array([2.0]))
    assert_allclose(a, b, atol=1e-15)


def test_gamma_from_D_cutoff_drops_rank_deficiency():
    # gradient_D at any k has full column rank d (the identity rows);
    # a synthetic zero column must be dropped, not blown up
    from gammasolve.projectors import DOperator

    layout = BlockLayout((Block("vector", 2),))

    def fn(K):
        n = K.shape[0]
        D = np.zeros((n, 2, 2), complex)
        D[:, 0, 0] = 1.0
        return D

    dop = DOperator("degenerate", layout, 2, fn)
    G = gamma_from_D(dop).symbols(np.zeros((3, 2)))
    expected = np.zeros((2, 2))
    expected[0, 0] = 1.0
    assert_allclose(G, np.broadcast_to(expected, (3, 2, 2)), atol=1e-14)


def test_projector_symbols_shift_and_cache():
    clear_symbol_cache()
    g = Grid((4, 4, 4), (2.0 * np.pi,) * 3)
    proj = gamma_helmholtz(3)
    G0 = projector_symbols(proj, g)
    G0_again = projector_symbols(proj, g)
    assert G0 is G0_again  # cached object identity
    shift = np.array([0.3, 0.0, -0.1])
    Gs = projector_symbols(proj, g, shift)
    K = g.wavevectors()
    assert_allclose(Gs, proj.symbols(K + shift), atol=1e-15)
    with pytest.raises(ValueError):
        projector_symbols(proj, g, np.array([0.1, 0.2]))


def test_apply_projector_field_roundtrip():
    g = Grid((8, 8), (2.0 * np.pi, 2.0 * np.pi))
    layout = BlockLayout((Block("vector", 2), Block("scalar")))
    f = random_field(g, layout, seed=11)
    proj = gamma_helmholtz(2)
    p1 = apply_projector(f, proj, which=1)
    p2 = apply_projector(f, proj, which=2)
    assert p1.representation == "real"
    assert_allclose(p1.values + p2.values, f.values, atol=1e-12)
    # idempotency through the field path
    assert_allclose(apply_projector(p1, proj).values, p1.values, atol=1e-12)
    with pytest.raises(ValueError):
        apply_projector(f, proj, which=3)
    with pytest.raises(ValueError):
        apply_projector(f, gamma_maxwell())


def test_apply_projector_fixes_gradient_pairs():
    g = Grid((12, 12), (2.0 * np.pi, 2.0 * np.pi))
    x = g.coordinates()
    phi = (np.exp(1j * x[:, 0]) + 0.5 * np.exp(1j * (x[:, 0] + 2 * x[:, 1])))[:, None]
    from gammasolve.fields import scalar_layout

    pot = Field(g, scalar_layout(), phi)
    grad = gradient(pot)
    layout = BlockLayout((Block("vector", 2), Block("scalar")))
    pair = Field(g, layout, np.concatenate([grad.values, pot.values], axis=1))
    fixed = apply_projector(pair, gamma_helmholtz(2))
    assert_allclose(fixed.values, pair.values, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.tuples(
        st.floats(-20, 20, allow_nan=False),
        st.floats(-20, 20, allow_nan=False),
        st.floats(-20, 20, allow_nan=False),
    )
)
def test_helmholtz_idempotent_any_wavevector(ktuple):
    G = gamma_helmholtz(3).symbol(np.asarray(ktuple))
    assert np.max(np.abs(G @ G - G)) < 1e-12
    assert np.max(np.abs(G - np.conj(G.T))) < 1e-12
