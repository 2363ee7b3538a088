"""Readers and writers for expression data and result tables.

Floats are written with 17 significant digits so that values round-trip
exactly; missing values are written as ``NA``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .discovery import PermutationSummary, SubgraphHit
from .graph import Graph
from .inference import TwoSampleData
from .simulate import RocCurve

NA = "NA"


def fmt(x) -> str:
    if x is None:
        return NA
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return NA
    return format(x, ".17g")


def parse_float(s: str) -> float:
    return float("nan") if s == NA else float(s)


def _writer(fh, delimiter):
    return csv.writer(fh, delimiter=delimiter, lineterminator="\n")


def _read_rows(path, delimiter, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        got = next(reader, None)
        if got is None or [h.strip() for h in got] != list(header):
            raise ValueError(f"{path}: expected header {list(header)}, got {got}")
        return [row for row in reader if row]


@dataclass(frozen=True)
class ExpressionDataset:
    sample_ids: tuple[str, ...]
    node_ids: tuple[str, ...]
    values: np.ndarray
    labels: tuple[int, ...]

    def __post_init__(self):
        if self.values.shape != (len(self.sample_ids), len(self.node_ids)):
            raise ValueError("expression matrix shape does not match sample/node ids")
        if set(self.labels) != {1, 2}:
            raise ValueError("both groups 1 and 2 need at least one sample")

    def two_sample(self, node_ids) -> TwoSampleData:
        """Group-1 and group-2 observations restricted to ``node_ids`` (in that order)."""
        col = {v: i for i, v in enumerate(self.node_ids)}
        cols = [col[v] for v in node_ids]
        labels = np.asarray(self.labels)
        X = self.values[:, cols]
        return TwoSampleData(X[labels == 1], X[labels == 2], tuple(node_ids))


def read_expression_tsv(path) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
    """Samples x nodes matrix with a ``sample_id`` header column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if not header or header[0].strip() != "sample_id":
            raise ValueError(f"{path}: first header field must be 'sample_id'")
        node_ids = tuple(h.strip() for h in header[1:])
        if len(set(node_ids)) != len(node_ids):
            raise ValueError(f"{path}: duplicate node ids in header")
        samples, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            samples.append(row[0].strip())
            rows.append([float(v) for v in row[1:]])
    values = np.asarray(rows, dtype=float).reshape(len(samples), len(node_ids))
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: non-finite expression values")
    return tuple(samples), node_ids, values


def write_expression_tsv(path, sample_ids, node_ids, values) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh, "\t")
        w.writerow(["sample_id", *node_ids])
        for s, row in zip(sample_ids, np.asarray(values)):
            w.writerow([s, *(fmt(v) for v in row)])


def read_labels_tsv(path) -> dict[str, int]:
    out = {}
    for row in _read_rows(path, "\t", ["sample_id", "group"]):
        group = int(row[1])
        if group not in (1, 2):
            raise ValueError(f"{path}: group must be 1 or 2, got {group}")
        out[row[0].strip()] = group
    return out


def write_labels_tsv(path, labels: dict) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh, "\t")
        w.writerow(["sample_id", "group"])
        for s, g in labels.items():
            w.writerow([s, g])


def load_dataset(expr_path, labels_path) -> ExpressionDataset:
    samples, nodes, values = read_expression_tsv(expr_path)
    labels = read_labels_tsv(labels_path)
    missing = [s for s in samples if s not in labels]
    if missing:
        raise ValueError(f"samples without a group label: {missing[:5]}")
    return ExpressionDataset(samples, nodes, values, tuple(labels[s] for s in samples))


HITS_HEADER = ["nodes", "statistic", "pvalue", "min_eig"]


def write_hits_tsv(path, hits: list[SubgraphHit], graph: Graph) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh, "\t")
        w.writerow(HITS_HEADER)
        for h in hits:
            ids = ",".join(graph.node_ids[v] for v in h.nodes)
            w.writerow([ids, fmt(h.statistic), fmt(h.pvalue), fmt(h.min_projected_cov_eigenvalue)])


def read_hits_tsv(path) -> list[tuple[tuple[str, ...], float, float, float]]:
    return [
        (tuple(row[0].split(",")), parse_float(row[1]), parse_float(row[2]), parse_float(row[3]))
        for row in _read_rows(path, "\t", HITS_HEADER)
    ]


PERM_HEADER = ["perm_index", "n_hits"]


def write_permutation_tsv(path, summary: PermutationSummary | None) -> None:
    """Hit counts per permutation; ``None`` writes the header only."""
    counts = () if summary is None else summary.hits_per_permutation
    with open(path, "w", newline="") as fh:
        w = _writer(fh, "\t")
        w.writerow(PERM_HEADER)
        for i, n in enumerate(counts):
            w.writerow([i, n])


def read_permutation_tsv(path) -> list[int]:
    return [int(row[1]) for row in _read_rows(path, "\t", PERM_HEADER)]


ROC_HEADER = ["method", "fpr", "tpr"]
ROC_SUMMARY_HEADER = ["method", "auc", "n_null", "n_alt", "seed"]


def write_roc_csv(path, rocs: dict[str, RocCurve]) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh, ",")
        w.writerow(ROC_HEADER)
        for method, roc in rocs.items():
            for fpr, tpr in roc.points:
                w.writerow([method, fmt(fpr), fmt(tpr)])


def read_roc_csv(path) -> dict[str, np.ndarray]:
    out: dict[str, list] = {}
    for method, fpr, tpr in _read_rows(path, ",", ROC_HEADER):
        out.setdefault(method, []).append((float(fpr), float(tpr)))
    return {m: np.asarray(pts) for m, pts in out.items()}


def write_roc_summary_csv(path, rocs: dict[str, RocCurve], n_null: int, n_alt: int, seed: int) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh, ",")
        w.writerow(ROC_SUMMARY_HEADER)
        for method, roc in rocs.items():
            w.writerow([method, fmt(roc.auc), n_null, n_alt, seed])


def read_roc_summary_csv(path) -> list[dict]:
    return [
        dict(method=r[0], auc=float(r[1]), n_null=int(r[2]), n_alt=int(r[3]), seed=int(r[4]))
        for r in _read_rows(path, ",", ROC_SUMMARY_HEADER)
    ]


TEST_HEADER = [
    "component_id",
    "n_nodes",
    "k",
    "stat_graph",
    "p_graph",
    "stat_full",
    "p_full",
    "p_graph_bh",
    "rejected",
    "status",
]


def write_table(path, header, rows, delimiter="\t") -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh, delimiter)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(row[h]) if not isinstance(row[h], str) else row[h] for h in header])


def read_table(path, header, delimiter="\t") -> list[dict]:
    return [dict(zip(header, row)) for row in _read_rows(path, delimiter, header)]


POWER_HEADER = [
    "alpha",
    "k",
    "n1",
    "n2",
    "delta2_k",
    "power_k",
    "l",
    "delta2_kl",
    "shift_increase",
]
