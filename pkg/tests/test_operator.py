"""Discretized nonlocal operator: quotients, principal-value sums, exterior
integrals, energy, gradient, and the Luxemburg-type seminorm."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from fglap import (
    DiscreteFunction,
    Grid,
    GridError,
    OperatorParams,
    apply_operator,
    energy,
    energy_gradient,
    gagliardo_seminorm,
    make_piecewise_power,
    make_power,
    make_power_log,
    pair_samples,
    s_quotient,
    scale_young,
)
from conftest import kink_safe


def linear_family():
    """Square growth scaled so its density is the identity."""
    return scale_young(make_power(2.0), 0.5)


def dense_linear_matrix_1d(grid, s):
    """Independent assembly of the linear-density operator on an interval:
    explicit kernel weights plus the closed-form exterior coefficient."""
    x = grid.nodes[:, 0]
    a, b = grid.bounds[0]
    h = grid.h
    N = grid.node_count
    M = np.zeros((N, N))
    for i in range(N):
        diag = ((x[i] - a) ** (-2 * s) + (b - x[i]) ** (-2 * s)) / (2 * s)
        for j in range(N):
            if i == j:
                continue
            k = abs(x[i] - x[j]) ** (-1 - 2 * s) * h
            M[i, j] = -k
            diag += k
        M[i, i] = diag
    return M


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


def test_grid_cell_centers_tile_the_domain():
    g = Grid.build([0.0, 2.0], 8)
    assert g.h == pytest.approx(0.25)
    assert g.node_count == 8
    assert g.node_weight * g.node_count == pytest.approx(g.measure)
    assert np.all(g.boundary_distance() > 0)


def test_grid_2d_square_cells_required():
    g = Grid.build([[0.0, 1.0], [0.0, 2.0]], (4, 8))
    assert g.dim == 2
    assert g.node_count == 32
    with pytest.raises(GridError):
        Grid.build([[0.0, 1.0], [0.0, 1.0]], (4, 8))


def test_grid_validation():
    with pytest.raises(GridError):
        Grid.build([1.0, 0.0], 4)
    with pytest.raises(GridError):
        Grid.build([0.0, 1.0], 1)  # single node
    with pytest.raises(GridError):
        DiscreteFunction(Grid.build([0.0, 1.0], 4), np.ones(3))


def test_value_at_lattice_and_exterior():
    g = Grid.build([0.0, 1.0], 4)
    u = DiscreteFunction(g, np.array([1.0, 2.0, 3.0, 4.0]))
    assert u.value_at([0.125]) == 1.0
    assert u.value_at([0.875]) == 4.0
    assert u.value_at([-0.3]) == 0.0
    assert u.value_at([1.7]) == 0.0
    with pytest.raises(GridError):
        u.value_at([0.2])  # interior point off the lattice


# ---------------------------------------------------------------------------
# quotient
# ---------------------------------------------------------------------------


def test_quotient_constant_and_linear():
    g = Grid.build([0.0, 1.0], 16)
    c = DiscreteFunction(g, np.full(16, 5.0))
    assert s_quotient(c, g.nodes[2], g.nodes[9], 0.5) == 0.0
    lin = DiscreteFunction(g, g.nodes[:, 0])
    x, y = g.nodes[3], g.nodes[11]
    d = abs(float(x[0] - y[0]))
    expect = np.sign(float(x[0] - y[0])) * d ** (1 - 0.5)
    assert s_quotient(lin, x, y, 0.5) == pytest.approx(expect)


def test_quotient_coincident_points_rejected():
    g = Grid.build([0.0, 1.0], 8)
    u = DiscreteFunction(g, np.ones(8))
    with pytest.raises(ValueError):
        s_quotient(u, g.nodes[1], g.nodes[1], 0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 31), st.integers(0, 31))
def test_quotient_antisymmetry(i, j):
    g = Grid.build([0.0, 1.0], 32)
    rng = np.random.default_rng(0)
    u = DiscreteFunction(g, rng.standard_normal(32))
    if i == j:
        return
    x, y = g.nodes[i], g.nodes[j]
    assert abs(s_quotient(u, x, y, 0.4) + s_quotient(u, y, x, 0.4)) < 1e-14


# ---------------------------------------------------------------------------
# operator
# ---------------------------------------------------------------------------


def test_operator_of_zero_vanishes(families):
    g = Grid.build([0.0, 1.0], 16)
    u = DiscreteFunction(g, np.zeros(16))
    for yf in families.values():
        assert np.all(apply_operator(u, yf, OperatorParams(s=0.5)) == 0.0)


def test_operator_odd_symmetry():
    # odd data on a symmetric domain: operator values are odd too
    g = Grid.build([-1.0, 1.0], 32)
    x = g.nodes[:, 0]
    u = DiscreteFunction(g, x * np.exp(-(x**2)))
    G = make_piecewise_power(2.5, 3.0)
    A = apply_operator(u, G, OperatorParams(s=0.4))
    assert np.max(np.abs(A + A[::-1])) < 1e-10 * np.max(np.abs(A))


def test_linear_three_way_agreement():
    # operator, energy and gradient against one independent dense assembly
    s = 0.5
    G = linear_family()
    g = Grid.build([0.0, 1.0], 64)
    params = OperatorParams(s=s)
    M = dense_linear_matrix_1d(g, s)
    rng = np.random.default_rng(1)
    u = DiscreteFunction(g, rng.standard_normal(64))
    A = apply_operator(u, G, params)
    assert np.max(np.abs(A - M @ u.values)) <= 1e-10 * np.max(np.abs(A))
    E = energy(u, G, params)
    quad_form = g.h * u.values @ M @ u.values
    assert abs(E - quad_form) <= 1e-10 * abs(quad_form)
    grad = energy_gradient(u, G, params)
    assert np.max(np.abs(grad - 2 * g.h * M @ u.values)) <= 1e-10 * np.max(np.abs(grad))


def test_linear_agreement_2d():
    s = 0.5
    G = linear_family()
    g = Grid.build([[0.0, 1.0], [0.0, 1.0]], (6, 6))
    params = OperatorParams(s=s)
    (a1, b1), (a2, b2) = g.bounds

    def exterior_coefficient(p):
        corners = np.array([[a1, a2], [b1, a2], [b1, b2], [a1, b2]])
        angs = np.sort(np.arctan2(corners[:, 1] - p[1], corners[:, 0] - p[0]))

        def rexit(th):
            c, sn = np.cos(th), np.sin(th)
            r = np.inf
            for lo, hi, comp, d in ((a1, b1, 0, c), (a2, b2, 1, sn)):
                if d > 0:
                    r = min(r, (hi - p[comp]) / d)
                elif d < 0:
                    r = min(r, (lo - p[comp]) / d)
            return r

        edges = np.concatenate([angs, [angs[0] + 2 * np.pi]])
        total = 0.0
        for k in range(4):
            total += quad(lambda th: rexit(th) ** (-2 * s), edges[k], edges[k + 1], limit=200)[0]
        return total / (2 * s)

    N = g.node_count
    h = g.h
    M = np.zeros((N, N))
    for i in range(N):
        diag = exterior_coefficient(g.nodes[i])
        for j in range(N):
            if i == j:
                continue
            d = np.linalg.norm(g.nodes[i] - g.nodes[j])
            k = d ** (-2 - 2 * s) * h * h
            M[i, j] = -k
            diag += k
        M[i, i] = diag
    rng = np.random.default_rng(2)
    u = DiscreteFunction(g, rng.standard_normal(N))
    A = apply_operator(u, G, params)
    assert np.max(np.abs(A - M @ u.values)) <= 1e-6 * np.max(np.abs(A))
    E = energy(u, G, params)
    quad_form = h * h * u.values @ M @ u.values
    assert abs(E - quad_form) <= 1e-6 * abs(quad_form)


def test_translation_covariance_and_reflection(families):
    params = OperatorParams(s=0.45)
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(24)
    yf = families["piecewise2_3"]
    a1 = apply_operator(DiscreteFunction(Grid.build([0.0, 1.0], 24), vals), yf, params)
    a2 = apply_operator(DiscreteFunction(Grid.build([5.0, 6.0], 24), vals), yf, params)
    assert np.allclose(a1, a2, rtol=0, atol=1e-12 * np.max(np.abs(a1)))
    a3 = apply_operator(
        DiscreteFunction(Grid.build([0.0, 1.0], 24), vals[::-1].copy()), yf, params
    )
    assert np.allclose(a3, a1[::-1], rtol=0, atol=1e-12 * np.max(np.abs(a1)))


def test_truncation_radius_interface():
    g = Grid.build([0.0, 1.0], 8)
    u = DiscreteFunction(g, np.ones(8))
    G = make_power(2.0)
    with pytest.raises(ValueError):
        apply_operator(u, G, OperatorParams(s=0.5, truncation_radius=1.0))
    ok = apply_operator(u, G, OperatorParams(s=0.5, truncation_radius=4.0))
    full = apply_operator(u, G, OperatorParams(s=0.5))
    assert np.allclose(ok, full)


# ---------------------------------------------------------------------------
# energy and gradient
# ---------------------------------------------------------------------------


def test_energy_zero_iff_zero(families):
    g = Grid.build([0.0, 1.0], 16)
    params = OperatorParams(s=0.5)
    for yf in families.values():
        assert energy(DiscreteFunction(g, np.zeros(16)), yf, params) == 0.0
        assert energy(DiscreteFunction(g, np.ones(16)), yf, params) > 0.0


def test_energy_scaling_sandwich(families):
    g = Grid.build([0.0, 1.0], 24)
    params = OperatorParams(s=0.4)
    rng = np.random.default_rng(5)
    u = DiscreteFunction(g, rng.standard_normal(24))
    for name, yf in families.items():
        E = energy(u, yf, params)
        for alpha in (0.5, 2.0):
            scaled = energy(u.scaled(alpha), yf, params)
            lo = min(alpha**yf.p_minus, alpha**yf.p_plus) * E
            hi = max(alpha**yf.p_minus, alpha**yf.p_plus) * E
            assert lo * (1 - 1e-9) <= scaled <= hi * (1 + 1e-9), name


def test_gradient_matches_central_differences(families):
    grid = Grid.build([0.0, 1.0], 32)
    params = OperatorParams(s=0.5)
    rng = np.random.default_rng(0)
    base = rng.standard_normal(32)
    eps = 1e-6 * (1 + np.max(np.abs(base)))
    for name, yf in families.items():
        kern_scales = np.concatenate(
            [np.logspace(-2, 2, 9), [1.0]]
        )  # representative quotient/exterior scales
        vals = kink_safe(base, kern_scales, eps=10 * eps)
        u = DiscreteFunction(grid, vals)
        grad = energy_gradient(u, yf, params)
        fd = np.zeros(32)
        for k in range(32):
            up = vals.copy()
            um = vals.copy()
            up[k] += eps
            um[k] -= eps
            fd[k] = (
                energy(DiscreteFunction(grid, up), yf, params)
                - energy(DiscreteFunction(grid, um), yf, params)
            ) / (2 * eps)
        rel = np.max(np.abs(grad - fd) / (np.abs(fd) + 1e-300))
        assert rel < 1e-5, (name, rel)


def test_directional_derivative_two_paths(families):
    # chain rule through pair quotients versus the assembled nodal gradient
    grid = Grid.build([0.0, 1.0], 24)
    params = OperatorParams(s=0.45)
    rng = np.random.default_rng(7)
    u = rng.standard_normal(24)
    v = rng.standard_normal(24)
    from fglap.operator import get_kernel, _hat_table

    yf = families["power3.5"]
    kern = get_kernel(grid, params)
    quot_u = (u[:, None] - u[None, :]) * kern.qs
    quot_v = (v[:, None] - v[None, :]) * kern.qs
    with np.errstate(divide="ignore"):
        wfull = grid.node_weight * kern.wop / np.where(kern.qs > 0, kern.qs, 1.0)
    np.fill_diagonal(wfull, 0.0)
    pairing = float(np.sum(yf.slope_odd(quot_u) * quot_v * wfull))
    hat = _hat_table(yf)
    args = np.abs(u)[:, None] * kern.ray_scale
    ext = (2.0 * grid.node_weight / params.s) * float(
        np.sum(
            kern.ray_w
            * kern.ray_scale
            * hat.derivative(args)
            * (np.sign(u) * v)[:, None]
        )
    )
    pairing += ext
    grad = energy_gradient(DiscreteFunction(grid, u), yf, params)
    assert pairing == pytest.approx(float(np.dot(grad, v)), rel=1e-8)


def test_energy_convex_along_segments(families):
    grid = Grid.build([0.0, 1.0], 24)
    params = OperatorParams(s=0.4)
    rng = np.random.default_rng(9)
    u = rng.standard_normal(24)
    v = rng.standard_normal(24)
    for name, yf in families.items():
        thetas = np.linspace(-1, 1, 15)
        vals = np.array(
            [energy(DiscreteFunction(grid, u + t * v), yf, params) for t in thetas]
        )
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        assert np.min(second) >= -1e-10, name


def test_energy_refinement_cauchy(families):
    params = OperatorParams(s=0.4)
    yf = families["piecewise2_3"]
    energies = []
    for n in (32, 64, 128, 256):
        grid = Grid.build([0.0, 1.0], n)
        x = grid.nodes[:, 0]
        core = (x - 0.2) * (0.8 - x)
        vals = np.where(core > 0, np.exp(-0.05 / np.maximum(core, 1e-300)), 0.0)
        energies.append(energy(DiscreteFunction(grid, vals), yf, params))
    diffs = np.abs(np.diff(energies))
    assert diffs[0] > diffs[1] > diffs[2]


# ---------------------------------------------------------------------------
# seminorm
# ---------------------------------------------------------------------------


def test_seminorm_zero_and_homogeneity(families):
    grid = Grid.build([0.0, 1.0], 32)
    params = OperatorParams(s=0.5)
    yf = families["piecewise2_3"]
    assert gagliardo_seminorm(DiscreteFunction(grid, np.zeros(32)), yf, params) == 0.0
    rng = np.random.default_rng(11)
    u = DiscreteFunction(grid, rng.standard_normal(32))
    base = gagliardo_seminorm(u, yf, params)
    assert gagliardo_seminorm(u.scaled(3.0), yf, params) == pytest.approx(
        3.0 * base, rel=1e-9
    )


def test_seminorm_unit_energy(families):
    grid = Grid.build([0.0, 1.0], 32)
    params = OperatorParams(s=0.5)
    rng = np.random.default_rng(13)
    u = DiscreteFunction(grid, rng.standard_normal(32))
    for yf in families.values():
        lam = gagliardo_seminorm(u, yf, params)
        assert energy(u.scaled(1.0 / lam), yf, params) == pytest.approx(1.0, abs=1e-9)


def test_modular_controls_seminorm(families):
    # when the energy is at least one, the seminorm is controlled by its
    # p_minus-th root
    grid = Grid.build([0.0, 1.0], 64)
    params = OperatorParams(s=0.5)
    rng = np.random.default_rng(15)
    for name, yf in families.items():
        u = DiscreteFunction(grid, rng.standard_normal(64))
        M = energy(u, yf, params)
        scale = 1.0
        while M < 1.0:
            scale *= 2.0
            M = energy(u.scaled(scale), yf, params)
        sem = gagliardo_seminorm(u.scaled(scale), yf, params)
        assert sem <= M ** (1.0 / yf.p_minus) * (1 + 1e-9), name


def test_gradient_matches_central_differences_2d(families):
    grid = Grid.build([[0.0, 1.0], [0.0, 1.0]], (5, 5))
    params = OperatorParams(s=0.5)
    rng = np.random.default_rng(21)
    base = rng.standard_normal(grid.node_count)
    eps = 1e-6 * (1 + np.max(np.abs(base)))
    for name in ("power2", "piecewise2_3"):
        yf = families[name]
        vals = kink_safe(base, np.logspace(-2, 2, 9), eps=10 * eps)
        u = DiscreteFunction(grid, vals)
        grad = energy_gradient(u, yf, params)
        fd = np.zeros(grid.node_count)
        for k in range(grid.node_count):
            up = vals.copy()
            um = vals.copy()
            up[k] += eps
            um[k] -= eps
            fd[k] = (
                energy(DiscreteFunction(grid, up), yf, params)
                - energy(DiscreteFunction(grid, um), yf, params)
            ) / (2 * eps)
        rel = np.max(np.abs(grad - fd) / (np.abs(fd) + 1e-300))
        assert rel < 1e-5, (name, rel)


def test_seminorm_homogeneity_2d(families):
    grid = Grid.build([[0.0, 1.0], [0.0, 1.0]], (5, 5))
    params = OperatorParams(s=0.5)
    rng = np.random.default_rng(22)
    u = DiscreteFunction(grid, rng.standard_normal(grid.node_count))
    yf = families["piecewise2_3"]
    base = gagliardo_seminorm(u, yf, params)
    assert gagliardo_seminorm(u.scaled(2.0), yf, params) == pytest.approx(
        2.0 * base, rel=1e-9
    )


def test_pair_samples_weights():
    grid = Grid.build([0.0, 1.0], 8)
    params = OperatorParams(s=0.5)
    u = DiscreteFunction(grid, np.arange(8.0))
    samples = pair_samples(u, params)
    assert samples.values.shape == (8 * 7 // 2,)
    assert np.all(samples.weights > 0)
