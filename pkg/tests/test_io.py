import numpy as np
import pandas as pd
import pytest

from cli._io import (
    append_jsonl,
    new_run_dir,
    read_edge_list,
    read_embedding,
    read_json,
    read_labels,
    read_truth,
    write_edge_list,
    write_embedding,
    write_json,
    write_labels,
)
from core.errors import PreconditionError
from core.graph_models import AdjacencySample
from core.schemas import MisclusterReport


def test_append_jsonl_appends_objects(tmp_path):
    target = tmp_path / "events.jsonl"
    append_jsonl(target, {"a": 1})
    append_jsonl(target, {"b": 2})
    lines = target.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert lines[0] == '{"a":1}'


def test_new_run_dir_unique(tmp_path):
    first = new_run_dir(tmp_path)
    second = new_run_dir(tmp_path)
    assert first != second
    assert first.is_dir() and second.is_dir()
    assert first.parent == tmp_path / "runs"
    assert (tmp_path / "runs" / "latest").resolve() == second.resolve()


def test_edge_list_round_trip(tmp_path):
    sample = AdjacencySample.from_edges(6, np.array([[0, 1], [4, 2], [3, 5]]), seed=42)
    path = tmp_path / "graph.edges"
    write_edge_list(path, sample)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "# n=6 seed=42"
    loaded = read_edge_list(path)
    assert loaded == sample
    assert loaded.seed == 42


def test_edge_list_header_seed_override(tmp_path):
    sample = AdjacencySample.from_edges(3, np.array([[0, 1]]), seed=99)
    path = tmp_path / "graph.edges"
    write_edge_list(path, sample, seed=7)
    assert read_edge_list(path).seed == 7


def test_edge_list_accepts_comments_and_one_indexing(tmp_path):
    path = tmp_path / "graph.txt"
    path.write_text("# exported by hand\n1 2\n\n3 4  # trailing columns are ignored\n", encoding="utf-8")
    sample = read_edge_list(path, one_indexed=True)
    assert sample.n == 4
    assert sample.edge_array().tolist() == [[0, 1], [2, 3]]
    assert sample.seed is None


def test_edge_list_rejects_malformed_lines(tmp_path):
    path = tmp_path / "graph.txt"
    path.write_text("0 1\n2\n", encoding="utf-8")
    with pytest.raises(PreconditionError, match=":2: expected 'i j'"):
        read_edge_list(path)
    path.write_text("0 a\n", encoding="utf-8")
    with pytest.raises(PreconditionError, match="integers"):
        read_edge_list(path)


def test_edge_list_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_edge_list(tmp_path / "absent.edges")


def test_embedding_csv_layout(tmp_path):
    Xhat = np.array([[0.1, 0.2], [0.5, 1.0 / 3.0]])
    path = tmp_path / "emb.csv"
    eigen_path = write_embedding(path, Xhat, np.array([5.0, 2.0]))
    assert path.read_text(encoding="utf-8").splitlines()[0] == "vertex,x1,x2,eigval_rank"
    assert pd.read_csv(path)["eigval_rank"].tolist() == [2, 1]
    assert eigen_path.name == "emb.eigenvalues.csv"
    assert eigen_path.read_text(encoding="utf-8").splitlines()[0] == "rank,value"
    assert np.array_equal(read_embedding(path), Xhat)


def test_read_embedding_requires_coordinate_columns(tmp_path):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"vertex": [0], "value": [1.0]}).to_csv(path, index=False)
    with pytest.raises(PreconditionError, match="vertex,x1"):
        read_embedding(path)


def test_labels_files(tmp_path):
    path = tmp_path / "labels.csv"
    write_labels(path, [1, 0, 1], [0, 1, 0])
    assert path.read_text(encoding="utf-8").splitlines()[0] == "vertex,label_true,label_hat"
    assert read_labels(path).tolist() == [1, 0, 1]
    assert read_truth(path).tolist() == [0, 1, 0]


def test_truth_with_missing_labels_is_rejected(tmp_path):
    path = tmp_path / "labels.csv"
    write_labels(path, [1, 0, 1])
    with pytest.raises(PreconditionError, match="missing labels"):
        read_truth(path)


def test_json_reports_are_sorted_and_indented(tmp_path):
    path = tmp_path / "report.json"
    write_json(path, MisclusterReport(count=1, permutation=[1, 0], confusion=[[0, 2], [3, 1]]))
    text = path.read_text(encoding="utf-8")
    assert text.index('"confusion"') < text.index('"count"') < text.index('"permutation"')
    assert read_json(path)["count"] == 1
