"""Converter round trips: tiny inputs in each source format must load in the CLI."""

import pickle
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
import scipy.sparse as sp

TOOLS = Path(__file__).resolve().parent.parent / "tools"
CLI = sys.argv.pop(1)


def convert(*args):
    subprocess.run([sys.executable, str(TOOLS / "convert_datasets.py"), *map(str, args)],
                   check=True, capture_output=True)


def loads(path):
    return subprocess.run([CLI, "smoothness", "--dataset", str(path)], capture_output=True).returncode == 0


def lines(path):
    return path.read_text().splitlines()


class Convert(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_linqs(self):
        src = self.root / "src"
        src.mkdir()
        (src / "toy.content").write_text("p10\t1\t0\tB\np20\t0\t1\tA\np30\t1\t1\tB\n")
        (src / "toy.cites").write_text("p10\tp20\np20\tp10\np30\tp20\n")
        convert("linqs", src, self.root / "toy", "--name", "toy")
        self.assertEqual(lines(self.root / "toy" / "graph.txt"), ["3 2", "0 1", "1 2"])
        self.assertEqual(lines(self.root / "toy" / "labels.txt"), ["3 2", "1", "0", "1"])
        self.assertEqual(lines(self.root / "toy" / "features.txt")[1:], ["1 0", "0 1", "1 1"])
        self.assertFalse((self.root / "toy" / "train.txt").exists())
        self.assertTrue(loads(self.root / "toy"))

    def test_geom(self):
        src = self.root / "src"
        src.mkdir()
        (src / "out1_node_feature_label.txt").write_text(
            "node_id\tfeature\tlabel\n1\t0,1.5\t0\n0\t1,0\t1\n2\t1,1\t1\n")
        (src / "out1_graph_edges.txt").write_text("node_id\tnode_id\n0\t1\n1\t1\n2\t0\n")
        convert("geom", src, self.root / "g")
        self.assertEqual(lines(self.root / "g" / "graph.txt"), ["3 2", "0 1", "0 2"])
        self.assertEqual(lines(self.root / "g" / "features.txt")[1:], ["1 0", "0 1.5", "1 1"])
        self.assertTrue(loads(self.root / "g"))

    def test_planetoid_reorders_test_rows_and_fills_gaps(self):
        src = self.root / "src"
        src.mkdir()
        # 2 train, 4 other labelled, test ids 8 and 6 (id 7 missing from the source).
        allx = sp.csr_matrix(np.eye(6, 3))
        ally = np.eye(6, 2)[[0, 1, 0, 1, 0, 1]]
        parts = {
            "x": allx[:2], "y": ally[:2], "allx": allx, "ally": ally,
            "tx": sp.csr_matrix([[8.0, 0, 0], [6.0, 0, 0]]),
            "ty": np.array([[0.0, 1.0], [1.0, 0.0]]),
            "graph": {0: [1, 6], 1: [0, 1], 6: [8], 7: [], 8: [6], 2: [], 3: [], 4: [], 5: []},
        }
        for name, obj in parts.items():
            with open(src / f"ind.toy.{name}", "wb") as f:
                pickle.dump(obj, f)
        (src / "ind.toy.test.index").write_text("8\n6\n")
        out = self.root / "p"
        convert("planetoid", src, out, "--name", "toy")
        feats = lines(out / "features.txt")
        self.assertEqual(feats[0], "9 3")
        self.assertEqual(feats[1 + 6], "6 0 0")
        self.assertEqual(feats[1 + 7], "0 0 0")
        self.assertEqual(feats[1 + 8], "8 0 0")
        self.assertEqual(lines(out / "labels.txt")[1 + 6:], ["0", "0", "1"])
        self.assertEqual(lines(out / "graph.txt"), ["9 3", "0 1", "0 6", "6 8"])
        self.assertEqual(lines(out / "train.txt"), ["0", "1"])
        self.assertEqual(lines(out / "val.txt"), ["2", "3", "4", "5"])
        self.assertEqual(lines(out / "test.txt"), ["6", "8"])
        self.assertTrue(loads(out))


if __name__ == "__main__":
    unittest.main()
