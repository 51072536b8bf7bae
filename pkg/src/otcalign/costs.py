"""Vertex cost matrices used by the coupling solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MissingAttributes
from .networks import Network, degree_vector

RULES = {
    "zero_one_identity",
    "attribute_zero_one",
    "degree_squared",
    "standardized_degree_squared",
    "euclidean",
    "squared_euclidean",
    "custom",
}


@dataclass
class CostMatrix:
    """Nonnegative |U| x |V| cost with a tag recording which rule built it."""

    values: np.ndarray
    rule: str = "custom"

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown cost rule {self.rule!r}")
        V = np.asarray(self.values, dtype=float)
        if V.ndim != 2:
            raise DimensionMismatch("cost matrix must be two-dimensional")
        if not np.isfinite(V).all() or (V < 0).any():
            raise ValueError("cost entries must be finite and nonnegative")
        V = np.ascontiguousarray(V)
        V.setflags(write=False)
        self.values = V

    @property
    def shape(self):
        return self.values.shape


def as_cost_matrix(cost) -> CostMatrix:
    """Coerce a raw array to a CostMatrix tagged as custom."""
    if isinstance(cost, CostMatrix):
        return cost
    return CostMatrix(values=np.asarray(cost, dtype=float), rule="custom")


def cost_zero_one_identity(n: int) -> CostMatrix:
    """c(u, v) = 1 if u != v else 0, for networks sharing one vertex set."""
    return CostMatrix(values=1.0 - np.eye(n), rule="zero_one_identity")


def cost_attribute(attrs1, attrs2) -> CostMatrix:
    """Zero-one cost on discrete vertex attributes: 0 iff the labels agree."""
    if attrs1 is None or attrs2 is None:
        raise MissingAttributes("both networks need discrete vertex attributes")
    a = np.asarray(attrs1)
    b = np.asarray(attrs2)
    vals = (a[:, None] != b[None, :]).astype(float)
    return CostMatrix(values=vals, rule="attribute_zero_one")


def cost_degree(
    g1: Network,
    g2: Network,
    standardized: bool = False,
    degree_mode: str = "out",
) -> CostMatrix:
    """Squared difference of weighted degrees, optionally standardized.

    Standardization divides each degree by its own network's total degree,
    which makes the cost invariant to a global rescaling of either network's
    weights. Out-degrees are used for directed networks.
    """
    d1 = degree_vector(g1, degree_mode)
    d2 = degree_vector(g2, degree_mode)
    if standardized:
        d1 = d1 / d1.sum()
        d2 = d2 / d2.sum()
        rule = "standardized_degree_squared"
    else:
        rule = "degree_squared"
    vals = (d1[:, None] - d2[None, :]) ** 2
    return CostMatrix(values=vals, rule=rule)


def cost_embedding(emb1, emb2, squared: bool = False) -> CostMatrix:
    """Pairwise (squared) Euclidean distances between vertex embeddings."""
    a = np.asarray(emb1, dtype=float)
    b = np.asarray(emb2, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"embedding dimensions disagree: {a.shape} vs {b.shape}"
        )
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
    d2 = np.clip(d2, 0.0, None)
    if squared:
        return CostMatrix(values=d2, rule="squared_euclidean")
    return CostMatrix(values=np.sqrt(d2), rule="euclidean")
