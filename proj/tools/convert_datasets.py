#!/usr/bin/env python3
"""Convert public graph benchmark files into the simpgcn dataset layout.

Each converted dataset is a directory holding graph.txt, features.txt and
labels.txt, plus train.txt/val.txt/test.txt when the source ships a fixed split.

Supported inputs:
  planetoid  ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index}
  linqs      <name>.content and <name>.cites
  geom       out1_node_feature_label.txt and out1_graph_edges.txt
  pgl-sdist  a pgl source tarball, which bundles citeseer and pubmed in
             planetoid form and cora in linqs form
"""

import argparse
import pickle
import sys
import tarfile
import tempfile
import warnings
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def fmt(v):
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def undirected_edges(pairs, n):
    edges = set()
    loops = 0
    for i, j in pairs:
        if i == j:
            loops += 1
            continue
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for {n} nodes")
        edges.add((min(i, j), max(i, j)))
    return sorted(edges), loops


def write_dataset(out, features, labels, num_classes, edges, split=None):
    out.mkdir(parents=True, exist_ok=True)
    n, d = features.shape
    with open(out / "graph.txt", "w") as f:
        f.write(f"{n} {len(edges)}\n")
        f.writelines(f"{i} {j}\n" for i, j in edges)
    dense = features.toarray() if sp.issparse(features) else np.asarray(features)
    with open(out / "features.txt", "w") as f:
        f.write(f"{n} {d}\n")
        for row in dense:
            f.write(" ".join(fmt(v) for v in row) + "\n")
    with open(out / "labels.txt", "w") as f:
        f.write(f"{n} {num_classes}\n")
        f.writelines(f"{int(y)}\n" for y in labels)
    for stale in ("train.txt", "val.txt", "test.txt"):
        (out / stale).unlink(missing_ok=True)
    if split is not None:
        for part, nodes in zip(("train", "val", "test"), split):
            with open(out / f"{part}.txt", "w") as f:
                f.writelines(f"{int(v)}\n" for v in nodes)
    print(f"{out}: {n} nodes, {len(edges)} edges, {d} features, {num_classes} classes"
          + (f", split {tuple(len(s) for s in split)}" if split is not None else ""))


def convert_planetoid(src, name, out):
    def load(part):
        with open(src / f"ind.{name}.{part}", "rb") as f:
            return pickle.load(f, encoding="latin1")

    x, y, tx, ty, allx, ally, graph = (load(p) for p in ("x", "y", "tx", "ty", "allx", "ally", "graph"))
    test_index = [int(line) for line in (src / f"ind.{name}.test.index").read_text().split()]
    test_range = np.sort(test_index)

    # Some test ids have no features in the source; they become zero rows.
    full_test = np.arange(test_range.min(), test_range.max() + 1)
    if len(full_test) != len(test_range):
        tx_ext = sp.lil_matrix((len(full_test), tx.shape[1]))
        tx_ext[test_range - test_range.min(), :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full_test), ty.shape[1]))
        ty_ext[test_range - test_range.min(), :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_index, :] = features[test_range, :]
    onehot = np.vstack((ally, ty))
    onehot[test_index, :] = onehot[test_range, :]
    labels = onehot.argmax(axis=1)

    n = features.shape[0]
    pairs = [(int(i), int(j)) for i, nbrs in graph.items() for j in nbrs]
    edges, loops = undirected_edges(pairs, n)
    if loops:
        print(f"{name}: dropped {loops} self-loops", file=sys.stderr)
    split = (range(len(y)), range(len(y), min(len(y) + 500, allx.shape[0])), test_range)
    write_dataset(out, features.tocsr(), labels, onehot.shape[1], edges, split)


def convert_linqs(src, name, out):
    ids, rows, classes = [], [], []
    for line in (src / f"{name}.content").read_text().splitlines():
        if not line.strip():
            continue
        parts = line.split()
        ids.append(parts[0])
        rows.append([float(v) for v in parts[1:-1]])
        classes.append(parts[-1])
    index = {pid: k for k, pid in enumerate(ids)}
    names = sorted(set(classes))
    labels = [names.index(c) for c in classes]
    pairs = []
    for line in (src / f"{name}.cites").read_text().splitlines():
        if line.strip():
            a, b = line.split()
            pairs.append((index[a], index[b]))
    edges, _ = undirected_edges(pairs, len(ids))
    write_dataset(out, np.array(rows), labels, len(names), edges)


def convert_geom(src, out):
    lines = (src / "out1_node_feature_label.txt").read_text().splitlines()[1:]
    entries = []
    for line in lines:
        node, feats, label = line.split("\t")
        entries.append((int(node), [float(v) for v in feats.split(",")], int(label)))
    entries.sort()
    n = len(entries)
    if [e[0] for e in entries] != list(range(n)):
        raise ValueError("node ids are not contiguous")
    pairs = []
    for line in (src / "out1_graph_edges.txt").read_text().splitlines()[1:]:
        a, b = line.split("\t")
        pairs.append((int(a), int(b)))
    edges, _ = undirected_edges(pairs, n)
    labels = [e[2] for e in entries]
    write_dataset(out, np.array([e[1] for e in entries]), labels, max(labels) + 1, edges)


def convert_pgl_sdist(tarball, root):
    with tempfile.TemporaryDirectory() as tmp, tarfile.open(tarball) as tar:
        members = [m for m in tar.getmembers()
                   if "/pgl/data/" in m.name and m.name.split("/")[-2] in ("cora", "citeseer", "pubmed")]
        tar.extractall(tmp, members=members)
        data = next(Path(tmp).glob("*/pgl/data"))
        convert_linqs(data / "cora", "cora", root / "cora")
        convert_planetoid(data / "citeseer", "citeseer", root / "citeseer")
        convert_planetoid(data / "pubmed", "pubmed", root / "pubmed")


def main():
    warnings.filterwarnings("ignore", category=DeprecationWarning)
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("format", choices=["planetoid", "linqs", "geom", "pgl-sdist"])
    p.add_argument("source", type=Path, help="source directory, or the tarball for pgl-sdist")
    p.add_argument("out", type=Path, help="dataset directory, or the data root for pgl-sdist")
    p.add_argument("--name", help="dataset name used in planetoid and linqs file names")
    a = p.parse_args()
    if a.format in ("planetoid", "linqs") and not a.name:
        p.error(f"--name is required for {a.format}")
    if a.format == "planetoid":
        convert_planetoid(a.source, a.name, a.out)
    elif a.format == "linqs":
        convert_linqs(a.source, a.name, a.out)
    elif a.format == "geom":
        convert_geom(a.source, a.out)
    else:
        convert_pgl_sdist(a.source, a.out)


if __name__ == "__main__":
    main()
