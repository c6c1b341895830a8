import numpy as np
import pytest

import disagree_kit as dk
from disagree_kit.spectral import truncation_length, two_step_pinv_diagonal
from helpers import (hitting_times_to, path_graph, random_connected_graph,
                     transition_matrix, triangle)


def test_triangle_eigenvalues():
    s = dk.decompose(triangle())
    assert np.allclose(s.eigenvalues, [1.0, -0.5, -0.5], atol=1e-12)
    assert s.gap_bound == pytest.approx(0.5, abs=1e-12)


def test_decompose_rejects_bipartite():
    with pytest.raises(dk.DomainError):
        dk.decompose(path_graph(5))


def test_decompose_invariants():
    for seed in range(3):
        g = random_connected_graph(25, 0.25, seed=seed, weighted=True)
        s = dk.decompose(g)
        assert abs(s.eigenvalues[0] - 1.0) < 1e-8
        gram = s.eigenvectors.T @ s.eigenvectors
        assert np.max(np.abs(gram - np.eye(g.n))) < 1e-8
        psi1 = s.eigenvectors[:, 0]
        ref = np.sqrt(g.stationary())
        assert min(np.max(np.abs(psi1 - ref)), np.max(np.abs(psi1 + ref))) < 1e-8
        assert s.eigenvalues[-1] > -1.0


def test_psfw_g2_spectrum_crosscheck():
    s = dk.decompose(dk.generate_psfw(2))
    expected = np.sort(dk.psfw_spectrum(2).to_array())
    assert np.max(np.abs(np.sort(s.eigenvalues) - expected)) < 1e-10


def test_exact_disagreement_triangle():
    g = triangle()
    res = dk.exact_disagreement(g)
    assert res.delta == pytest.approx(8.0 / 9.0, abs=1e-12)
    # brute-force pseudoinverse oracle
    s_mat = dk.spectral.normalized_adjacency_dense(g)
    pinv = np.linalg.pinv(np.eye(3) - s_mat @ s_mat, hermitian=True)
    assert res.delta == pytest.approx(
        float(g.stationary() @ np.diag(pinv)), abs=1e-10)
    assert np.allclose(res.contributions.sum(), res.delta, atol=1e-10)
    assert (res.ldag_diag >= 0).all()


def test_exact_disagreement_path5_bypass_table():
    g = path_graph(5)
    s = dk.decompose(g, allow_bipartite=True)
    res = dk.exact_disagreement(g, s, allow_bipartite_pseudoinverse=True)
    assert np.allclose(res.pi, [0.125, 0.25, 0.25, 0.25, 0.125], atol=1e-9)
    assert np.allclose(res.ldag_diag, [1.25, 1.0, 0.5, 1.0, 1.25], atol=1e-9)
    assert np.allclose(res.contributions,
                       [0.15625, 0.25, 0.125, 0.25, 0.15625], atol=1e-9)
    assert res.delta == pytest.approx(0.9375, abs=1e-9)
    # partial mean hitting time of the center node via the same bypass
    h3 = dk.partial_mean_hitting_time(g, 2, s, two_step=True,
                                      allow_bipartite_pseudoinverse=True)
    assert h3 == pytest.approx(2.0, abs=1e-9)


def test_exact_disagreement_zachary(zachary_path):
    g = dk.load_edge_list(zachary_path)
    assert (g.n, g.m) == (34, 78)
    assert dk.exact_disagreement(g).delta == pytest.approx(1.287, abs=1e-3)


def test_exact_json_schema():
    res = dk.exact_disagreement(triangle())
    payload = res.to_json()
    assert payload["method"] == "exact"
    assert payload["delta"] == pytest.approx(8.0 / 9.0)
    assert {"node", "pi", "ldag", "contribution"} == set(payload["per_node"][0])


def test_hitting_time_two_step_triangle():
    g = triangle()
    s = dk.decompose(g)
    assert dk.exact_hitting_time_two_step(s, g, 1, 1) == 0.0
    p2 = transition_matrix(g)
    p2 = p2 @ p2
    for i in range(3):
        for j in range(3):
            oracle = hitting_times_to(p2, j)[i]
            assert dk.exact_hitting_time_two_step(s, g, i, j) == pytest.approx(
                oracle, abs=1e-9)


def test_delta_from_pairwise_hitting_times():
    # disagreement as the stationary-squared-weighted mean hitting time
    for seed in range(20):
        g = random_connected_graph(8 + (seed % 5) * 8, 0.35, seed=900 + seed,
                                   weighted=seed % 4 == 0)
        s = dk.decompose(g)
        pi = g.stationary()
        delta = dk.exact_disagreement(g, s).delta
        total = 0.0
        for i in range(g.n):
            total += pi[i] ** 2 * sum(
                pi[j] * dk.exact_hitting_time_two_step(s, g, j, i)
                for j in range(g.n))
        assert total == pytest.approx(delta, rel=1e-9)


def test_delta_as_squared_weighted_partial_hitting():
    for seed in range(5):
        g = random_connected_graph(15, 0.35, seed=70 + seed)
        s = dk.decompose(g)
        pi = g.stationary()
        delta = dk.exact_disagreement(g, s).delta
        alt = sum(pi[i] ** 2 * dk.partial_mean_hitting_time(g, i, s,
                                                            two_step=True)
                  for i in range(g.n))
        assert alt == pytest.approx(delta, abs=1e-10 * max(1.0, delta))


def test_kemeny_two_step():
    assert dk.exact_kemeny_two_step(dk.decompose(triangle())) == pytest.approx(
        8.0 / 3.0, abs=1e-12)
    single = dk.decompose(dk.WeightedGraph.from_edges(1, []))
    assert dk.exact_kemeny_two_step(single) == 0.0


def test_pseudoinverse_identity_check_triangle():
    report = dk.pseudoinverse_identity_check(triangle(), eps=1e-8)
    assert report.direct_vs_transform < 1e-8
    assert report.direct_vs_series < 1e-8
    assert report.diagonal_min >= 0.0


def test_pseudoinverse_identity_check_random():
    report = dk.pseudoinverse_identity_check(
        random_connected_graph(30, 0.3, seed=3), eps=1e-5)
    assert report.direct_vs_transform < 1e-7
    assert report.direct_vs_series < 1e-6


def test_truncation_length_bounds():
    # tail control of the truncated even-power series
    for seed, eps in ((0, 0.1), (1, 0.01), (2, 0.1), (3, 0.01)):
        g = random_connected_graph(20 + 10 * (seed % 3), 0.3, seed=200 + seed)
        s = dk.decompose(g)
        ell = truncation_length(eps, s.gap_bound)
        ldag = two_step_pinv_diagonal(s)
        p_mat = transition_matrix(g)
        pi = g.stationary()
        power = np.eye(g.n)
        partial = np.zeros(g.n)
        p2 = p_mat @ p_mat
        for _ in range(ell):
            partial += np.diag(power) - pi
            power = power @ p2
        assert np.max(np.abs(ldag - partial)) <= eps / 2
        # aggregate: |delta - truncated delta| <= eps/2
        delta = dk.exact_disagreement(g, s).delta
        assert abs(delta - float(pi @ partial)) <= eps / 2


def test_degeneracy_rotation_invariance():
    g = dk.generate_psfw(2)
    s = dk.decompose(g)
    rng = np.random.default_rng(0)
    vals, vecs = s.eigenvalues.copy(), s.eigenvectors.copy()
    # rotate inside each repeated-eigenvalue block
    start = 0
    for end in range(1, len(vals) + 1):
        if end == len(vals) or abs(vals[end] - vals[start]) > 1e-9:
            if end - start > 1:
                q, _ = np.linalg.qr(rng.standard_normal((end - start,
                                                         end - start)))
                vecs[:, start:end] = vecs[:, start:end] @ q
            start = end
    rotated = dk.SpectralSummary(vals, vecs, s.gap_bound)
    assert dk.exact_disagreement(g, rotated).delta == pytest.approx(
        dk.exact_disagreement(g, s).delta, abs=1e-9)
    assert dk.exact_kemeny_two_step(rotated) == pytest.approx(
        dk.exact_kemeny_two_step(s), abs=1e-9)
    for node in (0, g.n - 1):
        assert dk.partial_mean_hitting_time(g, node, rotated) == pytest.approx(
            dk.partial_mean_hitting_time(g, node, s), abs=1e-9)


def test_near_unit_eigenvalue_warning():
    # two triangles bridged by a vanishing weight: lambda_2 -> 1
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0),
             (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 1e-14)]
    g = dk.WeightedGraph.from_edges(6, edges)
    with pytest.warns(dk.errors.NearBipartiteWarning):
        dk.decompose(g)
