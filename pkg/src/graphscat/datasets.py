"""Dataset ingestion, text-format persistence, and synthetic block-model data.

A dataset directory holds edges.tsv (edge-list format), features.csv (one
comma-separated float row per node), labels.csv (one class id per line) and
splits.json (train/val/test index arrays). Everything is plain line-oriented
text and round-trips exactly.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BadClassIds, InfeasibleSpec, IsolatedNodeWarning, MissingFile, RowCountMismatch
from .graph import Graph, build_graph, read_edge_list, write_edge_list
from .theory import homophily
from .train import SplitMasks


@dataclass
class Dataset:
    name: str
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    splits: SplitMasks

    @property
    def n_classes(self) -> int:
        return int(np.max(self.labels)) + 1


def describe(ds: Dataset) -> str:
    return (f"{ds.name}: n={ds.graph.n} edges={ds.graph.num_edges} "
            f"d={ds.features.shape[1]} classes={ds.n_classes} "
            f"homophily={homophily(ds.graph, ds.labels):.3f}")


@dataclass
class SBMSpec:
    """Stochastic block model with per-block Gaussian feature clouds."""

    block_sizes: tuple[int, ...]
    p_in: float
    p_out: float
    feature_dim: int = 8
    feature_means: np.ndarray | None = None   # (blocks, feature_dim)
    noise_scale: float = 1.0
    seed: int = 0
    split_ratios: tuple[float, float, float] = (5.0, 1.0, 1.0)

    def __post_init__(self):
        self.block_sizes = tuple(int(b) for b in self.block_sizes)
        if len(self.block_sizes) < 2:
            raise ValueError("need at least 2 blocks")
        if not (0.0 <= self.p_in <= 1.0 and 0.0 <= self.p_out <= 1.0):
            raise ValueError("edge probabilities must lie in [0, 1]")
        if self.feature_means is None:
            # block i leans +1 on its own slice of dimensions, -1 elsewhere
            B, d = len(self.block_sizes), self.feature_dim
            means = -np.ones((B, d))
            for i in range(B):
                means[i, (np.arange(d) * B) // d == i] = 1.0
            self.feature_means = means
        else:
            self.feature_means = np.asarray(self.feature_means, dtype=np.float64)
            if self.feature_means.shape != (len(self.block_sizes), self.feature_dim):
                raise ValueError("feature_means must be (blocks, feature_dim)")


def _sample_sbm_edges(spec: SBMSpec, rng: np.random.Generator) -> list[tuple[int, int]]:
    sizes = spec.block_sizes
    starts = np.cumsum((0,) + sizes)
    edges = []
    B = len(sizes)
    for i in range(B):
        for j in range(i, B):
            p = spec.p_in if i == j else spec.p_out
            ni, nj = sizes[i], sizes[j]
            draw = rng.random((ni, nj)) < p
            if i == j:
                draw = np.triu(draw, k=1)
            ui, uj = np.nonzero(draw)
            edges.extend(zip((starts[i] + ui).tolist(), (starts[j] + uj).tolist()))
    return edges


def stratified_splits(labels: np.ndarray, ratios, rng: np.random.Generator) -> SplitMasks:
    """Per-class shuffled split at the given train:val:test ratios."""
    ratios = np.asarray(ratios, dtype=np.float64)
    fracs = ratios / ratios.sum()
    train, val, test = [], [], []
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        m = idx.size
        n_tr = max(1, int(round(m * fracs[0])))
        n_va = int(round(m * fracs[1]))
        n_tr = min(n_tr, m - 1)                      # keep at least one test node
        n_va = min(n_va, m - n_tr - 1) if m - n_tr > 1 else 0
        train.extend(idx[:n_tr].tolist())
        val.extend(idx[n_tr:n_tr + n_va].tolist())
        test.extend(idx[n_tr + n_va:].tolist())
    return SplitMasks(train=np.sort(train), val=np.sort(val), test=np.sort(test))


def generate_sbm(spec: SBMSpec, max_resamples: int = 100) -> Dataset:
    """Deterministic SBM dataset; resamples the graph until no node is isolated."""
    rng = np.random.default_rng(spec.seed)
    n = sum(spec.block_sizes)
    labels = np.repeat(np.arange(len(spec.block_sizes)), spec.block_sizes)
    for _ in range(max_resamples):
        edges = _sample_sbm_edges(spec, rng)
        if not edges:
            continue
        with warnings.catch_warnings():
            # isolated draws are expected here; rejection handles them
            warnings.simplefilter("ignore", IsolatedNodeWarning)
            g = build_graph(edges, n=n)
        if not g.has_isolated_nodes:
            break
    else:
        raise InfeasibleSpec(
            f"could not avoid isolated nodes in {max_resamples} resamples")
    features = spec.feature_means[labels] + spec.noise_scale * rng.standard_normal(
        (n, spec.feature_dim))
    splits = stratified_splits(labels, spec.split_ratios, rng)
    return Dataset(name=f"sbm-{'x'.join(map(str, spec.block_sizes))}-seed{spec.seed}",
                   graph=g, features=features, labels=labels, splits=splits)


def save_dataset(ds: Dataset, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    write_edge_list(ds.graph, os.path.join(out_dir, "edges.tsv"))
    with open(os.path.join(out_dir, "features.csv"), "w", encoding="utf-8") as fh:
        for row in ds.features:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    with open(os.path.join(out_dir, "labels.csv"), "w", encoding="utf-8") as fh:
        for y in ds.labels:
            fh.write(f"{int(y)}\n")
    with open(os.path.join(out_dir, "splits.json"), "w", encoding="utf-8") as fh:
        json.dump({"train": ds.splits.train.tolist(),
                   "val": ds.splits.val.tolist(),
                   "test": ds.splits.test.tolist()}, fh)
        fh.write("\n")


def load_dataset(data_dir, name: str | None = None) -> Dataset:
    """Validated dataset from a directory of the four text files."""
    paths = {key: os.path.join(data_dir, fname) for key, fname in
             (("edges", "edges.tsv"), ("features", "features.csv"),
              ("labels", "labels.csv"), ("splits", "splits.json"))}
    for key, p in paths.items():
        if not os.path.exists(p):
            raise MissingFile(f"missing {os.path.basename(p)} in {data_dir}")

    features = []
    with open(paths["features"], "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                features.append([float(x) for x in line.split(",")])
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or not np.all(np.isfinite(features)):
        raise RowCountMismatch("features.csv must be rectangular finite rows")
    n = features.shape[0]

    labels = []
    with open(paths["labels"], "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                labels.append(int(line))
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape[0] != n:
        raise RowCountMismatch(
            f"labels.csv has {labels.shape[0]} rows, features.csv has {n}")
    if labels.min(initial=0) < 0 or set(np.unique(labels)) != set(range(int(labels.max()) + 1)):
        raise BadClassIds("class ids must be dense integers starting at 0")

    g = read_edge_list(paths["edges"], n=n)
    if g.n != n:
        raise RowCountMismatch(f"graph has {g.n} nodes, features have {n}")

    with open(paths["splits"], "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        splits = SplitMasks(train=np.asarray(raw["train"], dtype=np.int64),
                            val=np.asarray(raw["val"], dtype=np.int64),
                            test=np.asarray(raw["test"], dtype=np.int64))
    except KeyError as exc:
        raise MissingFile(f"splits.json lacks key {exc}") from None
    return Dataset(name=name or os.path.basename(os.path.normpath(data_dir)),
                   graph=g, features=features, labels=labels, splits=splits)
