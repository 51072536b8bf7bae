"""Network file format and benchmark-collection ingestion.

The canonical on-disk format is a JSON document
{"n": int, "directed": bool, "edges": [[u, v, w], ...],
 "attributes": {"labels": [...], "embedding": [[...], ...]}}
with undirected edges listed once. Round trips are lossless. Benchmark
collections use the plain-text layout of the TU archives: an edge file, a
graph-indicator file, a graph-labels file, and an optional node-labels
file, all with 1-based ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .errors import (
    CrossGraphEdge,
    IndexOutOfRange,
    InvariantViolation,
    MissingFile,
    ParseError,
)
from .networks import Network, build_network


def network_to_doc(net: Network) -> dict:
    """JSON-ready document for a network; undirected edges appear once."""
    edges = []
    for u, v in sorted(net.edges):
        if not net.directed and v < u:
            continue
        edges.append([int(u), int(v), float(net.weights[u, v])])
    doc = {"n": int(net.n), "directed": bool(net.directed), "edges": edges}
    attrs = {}
    if net.labels is not None:
        attrs["labels"] = [x.item() if hasattr(x, "item") else x for x in net.labels]
    if net.embedding is not None:
        attrs["embedding"] = [[float(x) for x in row] for row in net.embedding]
    if attrs:
        doc["attributes"] = attrs
    return doc


def doc_to_network(doc: dict) -> Network:
    """Parse and validate a network document."""
    if not isinstance(doc, dict):
        raise ParseError("network document must be a JSON object")
    for key in ("n", "directed", "edges"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ParseError(f"field 'n' must be a positive integer, got {n!r}")
    if not isinstance(doc["directed"], bool):
        raise ParseError("field 'directed' must be a boolean")
    edges = []
    for k, item in enumerate(doc["edges"]):
        if not isinstance(item, (list, tuple)) or len(item) != 3:
            raise ParseError(f"edge entry {k} must be [u, v, w]")
        u, v, w = item
        if not isinstance(u, int) or not isinstance(v, int):
            raise ParseError(f"edge entry {k} has non-integer endpoints")
        if not isinstance(w, (int, float)):
            raise ParseError(f"edge entry {k} has a non-numeric weight")
        if w <= 0:
            raise InvariantViolation(f"edge ({u}, {v}) has non-positive weight {w}")
        edges.append((u, v, float(w)))
    attrs = doc.get("attributes") or {}
    attributes = {}
    if "labels" in attrs:
        labels = attrs["labels"]
        if len(labels) != n:
            raise ParseError("attributes.labels must have one entry per vertex")
        attributes["labels"] = np.asarray(labels)
    if "embedding" in attrs:
        emb = attrs["embedding"]
        if len(emb) != n or (emb and len({len(r) for r in emb}) != 1):
            raise ParseError("attributes.embedding must be an n x d table")
        attributes["embedding"] = np.asarray(emb, dtype=float)
    try:
        return build_network(n, edges, directed_flag=doc["directed"], attributes=attributes)
    except IndexOutOfRange as exc:
        raise InvariantViolation(str(exc)) from exc


def parse_network_file(path) -> Network:
    p = Path(path)
    if not p.exists():
        raise MissingFile(str(p))
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: line {exc.lineno}: {exc.msg}") from exc
    return doc_to_network(doc)


def write_network_file(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_doc(net), indent=2) + "\n")


@dataclass
class TUDataset:
    """Attributed graph collection with one class label per graph."""

    name: str
    networks: List[Network]
    graph_labels: List[int]


def _read_lines(directory: Path, filename: str, required: bool) -> Optional[List[str]]:
    path = directory / filename
    if not path.exists():
        if required:
            raise MissingFile(str(path))
        return None
    return [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]


def parse_tu_dataset(directory, name: str) -> TUDataset:
    """Parse the TU text layout into unit-weight undirected networks.

    Edge endpoints are global 1-based node ids; both orientations may be
    listed and are collapsed. Node labels, when present, become discrete
    vertex attributes.
    """
    d = Path(directory)
    edge_lines = _read_lines(d, f"{name}_A.txt", required=True)
    indicator_lines = _read_lines(d, f"{name}_graph_indicator.txt", required=True)
    label_lines = _read_lines(d, f"{name}_graph_labels.txt", required=True)
    node_label_lines = _read_lines(d, f"{name}_node_labels.txt", required=False)

    node_graph = []
    for k, ln in enumerate(indicator_lines):
        try:
            node_graph.append(int(ln) - 1)
        except ValueError as exc:
            raise ParseError(f"{name}_graph_indicator.txt line {k + 1}: {ln!r}") from exc
    total_nodes = len(node_graph)
    num_graphs = max(node_graph) + 1 if node_graph else 0
    if len(label_lines) != num_graphs:
        raise ParseError(
            f"{name}_graph_labels.txt has {len(label_lines)} labels for {num_graphs} graphs"
        )
    graph_labels = [int(x) for x in label_lines]

    node_labels = None
    if node_label_lines is not None:
        if len(node_label_lines) != total_nodes:
            raise ParseError(f"{name}_node_labels.txt must have one line per node")
        node_labels = [int(x.split(",")[-1]) for x in node_label_lines]

    # local index of each node within its graph
    counts = [0] * num_graphs
    local = []
    for g in node_graph:
        local.append(counts[g])
        counts[g] += 1

    edge_sets = [set() for _ in range(num_graphs)]
    for k, ln in enumerate(edge_lines):
        parts = ln.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(f"{name}_A.txt line {k + 1}: expected two node ids")
        a, b = int(parts[0]) - 1, int(parts[1]) - 1
        if not (0 <= a < total_nodes and 0 <= b < total_nodes):
            raise IndexOutOfRange(f"{name}_A.txt line {k + 1}: node id outside range")
        if node_graph[a] != node_graph[b]:
            raise CrossGraphEdge(
                f"{name}_A.txt line {k + 1}: edge joins graphs "
                f"{node_graph[a] + 1} and {node_graph[b] + 1}"
            )
        g = node_graph[a]
        i, j = local[a], local[b]
        if i == j:
            edge_sets[g].add((i, j))
        else:
            edge_sets[g].add((min(i, j), max(i, j)))

    networks = []
    for g in range(num_graphs):
        attributes = {}
        if node_labels is not None:
            labs = [node_labels[k] for k in range(total_nodes) if node_graph[k] == g]
            attributes["labels"] = np.asarray(labs)
        networks.append(
            build_network(
                counts[g],
                [(u, v, 1.0) for u, v in sorted(edge_sets[g])],
                directed_flag=False,
                attributes=attributes,
            )
        )
    return TUDataset(name=name, networks=networks, graph_labels=graph_labels)
