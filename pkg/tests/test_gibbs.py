"""Exact spin-model laws: quadrature accuracy against independent oracles."""

import math

import numpy as np
import pytest

from leeyang.errors import BudgetExceededError
from leeyang.gibbs import (DiscretizedDistribution, ModelSpec, circle_grid,
                           distribution_from_atoms, kolmogorov_distance,
                           observable_distribution, periodized_gaussian,
                           rademacher, transfer_chain_distribution,
                           xy_edge_weight)
from leeyang.graphs import build_graph, path_graph, single_edge_graph
from leeyang.zeros import EntireMGF, mgf_eval


def bessel_i0_series(x: float) -> float:
    """Power-series oracle for the modified Bessel function of order 0."""
    total, term, k = 1.0, 1.0, 0
    while term > 1e-18 * total:
        k += 1
        term *= (x * x / 4.0) / (k * k)
        total += term
    return total


def poisson_dual_gaussian(theta: float, J: float, kmax: int = 40) -> float:
    """Periodized Gaussian via its Fourier series (Poisson summation oracle)."""
    coeff = math.sqrt(2 * math.pi / J) / (2 * math.pi)
    return coeff * sum(math.exp(-k * k / (2 * J)) * math.cos(k * theta)
                       for k in range(-kmax, kmax + 1))


# ---------------------------------------------------------------------------
# periodized Gaussian
# ---------------------------------------------------------------------------

def test_periodized_gaussian_strong_coupling_single_term():
    assert abs(periodized_gaussian(0.0, 50.0) - 1.0) < 1e-12


def test_periodized_gaussian_weak_coupling_flat():
    vals = [periodized_gaussian(t, 0.01) for t in (-3.0, -1.0, 0.0, 0.4, 2.2, math.pi)]
    for t, v in zip((-3.0, -1.0, 0.0, 0.4, 2.2, math.pi), vals):
        assert abs(v - poisson_dual_gaussian(t, 0.01)) < 1e-10
    assert max(vals) - min(vals) < 1e-6
    assert abs(vals[0] - 3.98942) < 1e-4


def test_periodized_gaussian_periodicity():
    for theta in (0.3, -2.0, 1.9):
        a = periodized_gaussian(theta, 1.0)
        b = periodized_gaussian(theta + 2 * math.pi, 1.0)
        assert abs(a - b) <= 4 * np.finfo(float).eps * a


def test_periodized_gaussian_rejects_bad_inputs():
    with pytest.raises(ValueError):
        periodized_gaussian(0.1, 0.0)
    with pytest.raises(ValueError):
        periodized_gaussian(0.1, -1.0)
    with pytest.raises(ValueError):
        periodized_gaussian(0.1, 1.0, tol=2.0)


# ---------------------------------------------------------------------------
# XY edge weight
# ---------------------------------------------------------------------------

def test_xy_edge_weight_values():
    assert abs(xy_edge_weight(0.0, 2.0) - math.e**2) < 1e-12
    assert abs(xy_edge_weight(math.pi, 2.0) - math.e**-2) < 1e-14


def test_xy_edge_weight_integral_is_bessel():
    N = 512
    quad = float(np.sum(xy_edge_weight(circle_grid(N), 1.0))) * 2 * math.pi / N
    assert abs(quad - 2 * math.pi * bessel_i0_series(1.0)) < 1e-10


# ---------------------------------------------------------------------------
# DiscretizedDistribution invariants
# ---------------------------------------------------------------------------

def test_distribution_validates_mass():
    with pytest.raises(ValueError, match="sum"):
        DiscretizedDistribution(np.array([0.0, 1.0]), np.array([0.5, 0.6]))
    with pytest.raises(ValueError, match="positive"):
        DiscretizedDistribution(np.array([0.0, 1.0]), np.array([1.5, -0.5]))


def test_symmetrized_flag_checked():
    with pytest.raises(ValueError, match="closed"):
        DiscretizedDistribution(np.array([-1.0, 2.0]), np.array([0.5, 0.5]),
                                symmetrized=True)


def test_csv_json_roundtrip():
    d = rademacher(1.5)
    d2 = DiscretizedDistribution.from_csv(d.to_csv(), symmetrized=True)
    assert np.allclose(d2.xs, d.xs) and np.allclose(d2.ws, d.ws)
    d3 = DiscretizedDistribution.from_json(d.to_json())
    assert np.allclose(d3.xs, d.xs) and d3.symmetrized


def test_kolmogorov_distance_exact():
    p = rademacher(1.0)
    q = DiscretizedDistribution(np.array([-1.0, 1.0]), np.array([0.3, 0.7]))
    assert abs(kolmogorov_distance(p, q) - 0.2) < 1e-15
    assert kolmogorov_distance(p, p) == 0.0


# ---------------------------------------------------------------------------
# observable_distribution
# ---------------------------------------------------------------------------

def test_single_vertex_uniform_angle_mgf_is_bessel():
    g = build_graph(["a"], [], {}, {"a": 1.0})
    d = observable_distribution(ModelSpec("xy", g), 256)
    f = EntireMGF(d)
    assert abs(mgf_eval(f, 1.0) - bessel_i0_series(1.0)) < 1e-10


def test_all_zero_weights_point_mass():
    g = single_edge_graph(J=1.0, lam=(0.0, 0.0))
    d = observable_distribution(ModelSpec("villain", g), 64)
    assert len(d.xs) == 1
    assert d.xs[0] == 0.0 and abs(d.ws[0] - 1.0) < 1e-15


def test_villain_edge_spectral_refinement():
    g = single_edge_graph(J=2.0)
    m = ModelSpec("villain", g)
    f1 = EntireMGF(observable_distribution(m, 128))
    f2 = EntireMGF(observable_distribution(m, 256))
    assert abs(mgf_eval(f1, 1.0) - mgf_eval(f2, 1.0)) < 1e-10


def test_mgf_stable_under_grid_doubling_shipped_models():
    models = [
        ModelSpec("villain", single_edge_graph(J=1.0)),
        ModelSpec("xy", single_edge_graph(J=0.5), inverse_temperature=2.0),
        ModelSpec("villain", path_graph(3, J=2.0, lam=0.5)),
    ]
    zs = [0.5, -1.3, 2.0, 1.0 + 1.0j, 2.0j]
    for m in models:
        f1 = EntireMGF(observable_distribution(m, 64))
        f2 = EntireMGF(observable_distribution(m, 128))
        for z in zs:
            assert abs(mgf_eval(f1, z) - mgf_eval(f2, z)) < 1e-8


def test_budget_rejection_names_cost():
    g = path_graph(4)
    with pytest.raises(BudgetExceededError, match=r"128\^4"):
        observable_distribution(ModelSpec("xy", g), 128, budget=10**6)


def test_pinned_vertex_must_exist():
    g = single_edge_graph()
    with pytest.raises(ValueError, match="not in the graph"):
        ModelSpec("villain", g, boundary={"zz": 0.1})


def test_output_symmetric_and_normalized():
    for kind in ("xy", "villain"):
        d = observable_distribution(ModelSpec(kind, path_graph(3, J=1.5, lam=1.0)), 64)
        assert abs(d.ws.sum() - 1.0) < 1e-12
        assert d.symmetrized and d.is_symmetric(1e-12)


def test_pinned_boundary_distribution():
    # pin one endpoint; the free endpoint still integrates; symmetrization applies
    g = single_edge_graph(J=1.0)
    m = ModelSpec("villain", g, boundary={"y": 0.0})
    d = observable_distribution(m, 64)
    assert abs(d.ws.sum() - 1.0) < 1e-12
    assert d.is_symmetric(1e-12)
    raw = observable_distribution(m, 64, symmetrize=False)
    assert not raw.symmetrized


def test_odd_grid_rejected():
    with pytest.raises(ValueError, match="even"):
        observable_distribution(ModelSpec("xy", single_edge_graph()), 63)


# ---------------------------------------------------------------------------
# transfer_chain_distribution
# ---------------------------------------------------------------------------

def test_chain_n1_matches_tensor_quadrature():
    d_tensor = observable_distribution(
        ModelSpec("xy", single_edge_graph(J=1.0), inverse_temperature=2.0), 128)
    d_chain = transfer_chain_distribution(1, 2.0, (1.0, 1.0), 128)
    ft, fc = EntireMGF(d_tensor), EntireMGF(d_chain)
    for z in (0.5, 1.0 + 1.0j):
        assert abs(mgf_eval(ft, z) - mgf_eval(fc, z)) < 1e-10


def test_chain_zero_weights_point_mass():
    d = transfer_chain_distribution(5, 1.0, (0.0, 0.0), 64)
    assert len(d.xs) == 1 and d.xs[0] == 0.0


def test_chain_self_refinement():
    f1 = EntireMGF(transfer_chain_distribution(3, 2.0, (1.0, 1.0), 128))
    f2 = EntireMGF(transfer_chain_distribution(3, 2.0, (1.0, 1.0), 256))
    assert abs(mgf_eval(f1, 1.0) - mgf_eval(f2, 1.0)) < 1e-9


def test_chain_converges_to_villain_edge():
    """Endpoint law of the strongly coupled chain approaches the single-edge law."""
    d_v = observable_distribution(ModelSpec("villain", single_edge_graph(J=1.0)), 256)
    fv = EntireMGF(d_v)
    gaps = []
    for n in (16, 64, 256):
        fc = EntireMGF(transfer_chain_distribution(n, float(n), (1.0, 1.0), 256))
        gaps.append(max(abs(mgf_eval(fv, z) - mgf_eval(fc, z)) for z in (1.0, 2.0j, 1.0 + 1.0j)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-3


def test_chain_rejects_bad_length():
    with pytest.raises(ValueError):
        transfer_chain_distribution(0, 1.0)


def test_distribution_from_atoms_coalesces():
    d = distribution_from_atoms([(1.0, 0.25), (1.0 + 1e-14, 0.25), (-1.0, 0.5)],
                                symmetrize=True)
    assert len(d.xs) == 2
    assert d.is_symmetric()


def test_vertex_listing_order_is_immaterial():
    lam = {"b": 1.0, "c": 0.5, "d": 0.25}
    g1 = build_graph(["b", "c", "d"], [("b", "c"), ("c", "d")], {}, lam)
    g2 = build_graph(["d", "c", "b"], [("b", "c"), ("c", "d")], {}, lam)
    f1 = EntireMGF(observable_distribution(ModelSpec("xy", g1, 1.3), 32))
    f2 = EntireMGF(observable_distribution(ModelSpec("xy", g2, 1.3), 32))
    for z in (0.7, 1.0 + 0.5j, 2.0j):
        assert abs(mgf_eval(f1, z) - mgf_eval(f2, z)) < 1e-14


def test_triangle_matches_brute_force_tensor_sum():
    import itertools
    N = 16
    verts = ["q", "p", "r"]
    edges = [("p", "r"), ("p", "q"), ("q", "r")]
    J = {("p", "r"): 0.8, ("p", "q"): 1.2, ("q", "r"): 0.6}
    lam = {"p": 1.0, "q": 0.7, "r": 0.4}
    model = ModelSpec("xy", build_graph(verts, edges, J, lam), 1.1)
    f = EntireMGF(observable_distribution(model, N))
    grid = circle_grid(N)
    z = 0.9 + 0.3j
    num_p, num_m, den = 0.0, 0.0, 0.0
    for iq, ip, ir in itertools.product(range(N), repeat=3):
        th = {"q": grid[iq], "p": grid[ip], "r": grid[ir]}
        w = 1.0
        for (u, v), je in J.items():
            w *= math.exp(1.1 * je * math.cos(th[u] - th[v]))
        s = sum(lam[v] * math.cos(th[v]) for v in verts)
        num_p += w * np.exp(z * s)
        num_m += w * np.exp(-z * s)
        den += w
    brute_even = 0.5 * (num_p + num_m) / den  # symmetrized output
    assert abs(mgf_eval(f, z) - brute_even) < 1e-13


def test_observable_distribution_bit_stable():
    m = ModelSpec("villain", path_graph(3, J=1.0, lam=1.0))
    d1 = observable_distribution(m, 64)
    d2 = observable_distribution(m, 64)
    assert np.array_equal(d1.xs, d2.xs)
    assert np.array_equal(d1.ws, d2.ws)


def test_model_spec_json_roundtrip():
    m = ModelSpec("villain", path_graph(3, J=2.0, lam=0.5),
                  inverse_temperature=1.5, boundary={"v0": 0.25})
    m2 = ModelSpec.from_json(m.to_json())
    assert m2.kind == m.kind
    assert m2.inverse_temperature == m.inverse_temperature
    assert m2.boundary == m.boundary
    assert m2.graph.edges == m.graph.edges
