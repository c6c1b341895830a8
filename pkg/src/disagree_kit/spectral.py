"""Dense exact computation of disagreement, hitting times, and Kemeny constants.

Everything here works from the full symmetric eigendecomposition of the
normalized adjacency matrix S = D^{-1/2} A D^{-1/2} and serves as the
ground-truth oracle for the sampling estimators.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NearBipartiteWarning, ResourceError
from .graph import DENSE_NODE_CAP, WeightedGraph, two_step_graph, validate

#: eigenvalues with lambda^2 beyond 1 - _UNIT_EIGEN_TOL are treated as
#: members of the +-1 eigenspaces by the bipartite-bypass pseudoinverse.
_UNIT_EIGEN_TOL = 1e-9


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalues (descending) and orthonormal eigenvectors of S.

    ``eigenvectors[:, k]`` is the unit eigenvector for ``eigenvalues[k]``;
    ``gap_bound`` is max(|lambda_2|, |lambda_N|), the contraction factor
    of the two-step walk on the complement of the stationary direction.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap_bound: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


def normalized_adjacency_dense(g: WeightedGraph) -> np.ndarray:
    inv_sqrt_d = 1.0 / np.sqrt(g.degrees)
    return g.adjacency_dense() * np.outer(inv_sqrt_d, inv_sqrt_d)


def decompose(g: WeightedGraph, *, allow_bipartite: bool = False,
              cap: int = DENSE_NODE_CAP,
              lambda1_tol: float = 1e-8) -> SpectralSummary:
    """Full eigendecomposition of the normalized adjacency matrix.

    Bipartite inputs are rejected (their spectrum contains -1, which
    makes 1/(1 - lambda^2) singular) unless ``allow_bipartite`` is set
    for the pseudoinverse-bypass mode.
    """
    if g.n > cap:
        raise ResourceError(f"dense eigendecomposition capped at {cap} nodes")
    if g.n == 1:
        return SpectralSummary(np.ones(1), np.ones((1, 1)), 0.0)
    check = validate(g)
    if not check.connected:
        raise DomainError("decompose requires a connected graph")
    if check.bipartite and not allow_bipartite:
        raise DomainError("decompose requires a non-bipartite graph "
                          "(use allow_bipartite to override)")
    vals, vecs = np.linalg.eigh(normalized_adjacency_dense(g))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    if abs(vals[0] - 1.0) > lambda1_tol:
        raise DomainError(
            f"leading eigenvalue {vals[0]!r} deviates from 1 beyond "
            f"{lambda1_tol}; the graph data is inconsistent")
    if not allow_bipartite and np.max(np.abs(vals[1:])) > 1.0 - 1e-12:
        worst = vals[1:][np.argmax(np.abs(vals[1:]))]
        warnings.warn(
            f"near-bipartite spectrum: eigenvalue {worst!r} makes "
            "1/(1-lambda^2) blow up", NearBipartiteWarning, stacklevel=2)
    gap = float(max(abs(vals[1]), abs(vals[-1])))
    return SpectralSummary(vals, vecs, gap)


@dataclass(frozen=True)
class DisagreementExact:
    """Exact disagreement with its per-node decomposition.

    ``ldag_diag[i]`` is the i-th diagonal entry of the pseudoinverse of
    the two-step normalized Laplacian; ``contributions = pi * ldag_diag``
    sums to ``delta``.
    """

    delta: float
    pi: np.ndarray
    ldag_diag: np.ndarray
    contributions: np.ndarray

    def to_json(self) -> dict:
        return {
            "method": "exact",
            "delta": self.delta,
            "per_node": [
                {"node": i, "pi": float(p), "ldag": float(l),
                 "contribution": float(c)}
                for i, (p, l, c) in enumerate(
                    zip(self.pi, self.ldag_diag, self.contributions))
            ],
        }


def two_step_pinv_diagonal(s: SpectralSummary, *,
                           allow_bipartite_pseudoinverse: bool = False
                           ) -> np.ndarray:
    """Diagonal of pinv(I - S^2) from the eigendecomposition of S.

    The bypass mode drops every eigenvalue with lambda^2 = 1 (both the
    +1 and -1 eigenspaces) instead of only the leading one, which is the
    natural reading of the pseudoinverse on bipartite graphs.
    """
    lam = s.eigenvalues
    if allow_bipartite_pseudoinverse:
        mask = lam * lam < 1.0 - _UNIT_EIGEN_TOL
    else:
        mask = np.ones(len(lam), dtype=bool)
        mask[0] = False
    denom = 1.0 - lam[mask] ** 2
    psi = s.eigenvectors[:, mask]
    return (psi * psi) @ (1.0 / denom)


def exact_disagreement(g: WeightedGraph,
                       s: SpectralSummary | None = None, *,
                       allow_bipartite_pseudoinverse: bool = False
                       ) -> DisagreementExact:
    """Disagreement delta = sum_i pi_i * sum_{k>=2} psi_ki^2/(1-lambda_k^2)."""
    if s is None:
        s = decompose(g, allow_bipartite=allow_bipartite_pseudoinverse)
    if s.n != g.n:
        raise DomainError("spectral summary does not belong to this graph")
    if g.n == 1:
        pi = np.ones(1)
        return DisagreementExact(0.0, pi, np.zeros(1), np.zeros(1))
    pi = g.stationary()
    ldag = two_step_pinv_diagonal(
        s, allow_bipartite_pseudoinverse=allow_bipartite_pseudoinverse)
    contrib = pi * ldag
    return DisagreementExact(float(contrib.sum()), pi, ldag, contrib)


def exact_hitting_time_two_step(s: SpectralSummary, g: WeightedGraph,
                                i: int, j: int) -> float:
    """Hitting time from i to j of the two-step walk, spectrally.

    H_ij = d_sum * sum_{k>=2} (psi_kj^2/d_j - psi_ki psi_kj/sqrt(d_i d_j))
    / (1 - lambda_k^2); zero when i == j.
    """
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise DomainError("node index out of range")
    if i == j:
        return 0.0
    lam = s.eigenvalues[1:]
    psi_i = s.eigenvectors[i, 1:]
    psi_j = s.eigenvectors[j, 1:]
    di, dj = g.degrees[i], g.degrees[j]
    terms = (psi_j * psi_j / dj - psi_i * psi_j / np.sqrt(di * dj))
    return float(g.d_sum * np.sum(terms / (1.0 - lam * lam)))


def exact_kemeny_two_step(s: SpectralSummary) -> float:
    """Kemeny constant of the two-step walk: sum_{k>=2} 1/(1-lambda_k^2)."""
    if s.n == 1:
        return 0.0
    lam = s.eigenvalues[1:]
    return float(np.sum(1.0 / (1.0 - lam * lam)))


def exact_kemeny_one_step(s: SpectralSummary) -> float:
    """Kemeny constant of the base walk: sum_{k>=2} 1/(1-lambda_k)."""
    if s.n == 1:
        return 0.0
    lam = s.eigenvalues[1:]
    return float(np.sum(1.0 / (1.0 - lam)))


@dataclass(frozen=True)
class PseudoinverseCheck:
    """Agreement report for three routes to pinv of the two-step Laplacian."""

    direct_vs_transform: float
    direct_vs_series: float
    series_terms: int
    diagonal_min: float


def pseudoinverse_identity_check(g: WeightedGraph, *, eps: float = 1e-5,
                                 cap: int = 200) -> PseudoinverseCheck:
    """Cross-check pinv(I - S^2) three independent ways (test-scale only).

    Route 1 eigendecomposes the normalized Laplacian of the explicitly
    materialized two-step graph; route 2 transforms the pseudoinverse of
    its combinatorial Laplacian; route 3 sums the even-power series
    S^{2i} - psi_1 psi_1^T truncated at the length that caps the tail of
    a geometric series with ratio gap_bound^2 below eps/2.
    """
    if g.n > cap:
        raise ResourceError(f"pseudoinverse check capped at {cap} nodes")
    gp = two_step_graph(g)

    sqrt_d = np.sqrt(g.degrees)
    proj = np.eye(g.n) - np.outer(sqrt_d, sqrt_d) / g.d_sum

    s2 = normalized_adjacency_dense(gp)
    direct = np.linalg.pinv(np.eye(g.n) - s2, hermitian=True)

    lap = np.diag(gp.degrees) - gp.adjacency_dense()
    lap_pinv = np.linalg.pinv(lap, hermitian=True)
    transform = proj @ (sqrt_d[:, None] * lap_pinv * sqrt_d[None, :]) @ proj

    s = decompose(g)
    ell = truncation_length(eps, s.gap_bound)
    s2_base = normalized_adjacency_dense(g)
    s2_base = s2_base @ s2_base
    power = np.eye(g.n)
    series = np.zeros((g.n, g.n))
    for _ in range(ell):
        series += power - np.outer(sqrt_d, sqrt_d) / g.d_sum
        power = power @ s2_base

    return PseudoinverseCheck(
        direct_vs_transform=float(np.max(np.abs(direct - transform))),
        direct_vs_series=float(np.max(np.abs(direct - series))),
        series_terms=ell,
        diagonal_min=float(np.min(np.diag(direct))),
    )


def truncation_length(epsilon: float, lam: float) -> int:
    """Series length keeping the geometric tail below epsilon/2.

    ceil(log(2/(epsilon*(1-lam))) / (2*log(1/lam))), clamped to >= 1.
    """
    if not 0.0 < lam < 1.0:
        raise DomainError(f"spectral bound must lie in (0, 1), got {lam}")
    if epsilon <= 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    arg = 2.0 / (epsilon * (1.0 - lam))
    if arg <= 1.0:
        warnings.warn("loose tolerance makes the derived truncation length "
                      "nonpositive; clamping to 1", stacklevel=2)
        return 1
    return max(1, int(np.ceil(np.log(arg) / (2.0 * np.log(1.0 / lam)))))
