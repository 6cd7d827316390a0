import csv
import io
import subprocess

import numpy as np
import pytest

import cogspeech


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    return cogspeech.generate_fixtures(str(tmp_path_factory.mktemp("fx")), n_ad=3, n_nonad=3)


def test_registry():
    names = cogspeech.feature_names()
    assert len(names) == 509
    groups = cogspeech.feature_groups()
    assert len(groups) == 509
    assert len(set(groups)) == 3
    assert len(cogspeech.registry_hash()) == 16


def test_parse_chat_and_errors():
    utts = cogspeech.parse_chat("*PAR:\t&-um the boy falls . \x151000_2500\x15\n")
    assert utts[0]["words"] == ["the", "boy", "falls"]
    assert utts[0]["fillers"] == 1
    assert utts[0]["start_ms"] == 1000
    with pytest.raises(cogspeech.ParseError):
        cogspeech.parse_chat("*PAR:\tthe boy . \x15" "9_x\x15\n")
    assert issubclass(cogspeech.VersionError, cogspeech.DataError)


def test_extract_masks_missing_audio(corpus):
    sid = corpus["ids"][0]
    base = f"{corpus['corpus_dir']}/{sid}"
    with open(base + ".cha") as f:
        chat = f.read()
    with open(base + ".trees") as f:
        trees = f.read()
    full = cogspeech.extract(chat, trees, base + ".wav", corpus["config_path"], sid)
    assert sum(v is None for v in full["values"].values()) == 0
    text_only = cogspeech.extract(chat, trees, None, corpus["config_path"], sid)
    assert sum(v is None for v in text_only["values"].values()) == 189


def test_cli_matrix_cv_and_report(corpus, tmp_path, cli):
    matrix = tmp_path / "m.csv"
    subprocess.run([cli, "extract", corpus["corpus_dir"], "-o", str(matrix), "--config", corpus["config_path"]], check=True)
    data = cogspeech.read_matrix(str(matrix))
    assert data["X"].shape == (6, 509)
    assert np.isfinite(data["X"]).all()

    with open(str(matrix) + ".transcripts.csv", newline="") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == cogspeech.TRANSCRIPT_COLUMNS
    assert len(rows) == 7

    rep = cogspeech.cross_validate(str(matrix), model="nb", seeds=[0])
    assert 0.0 <= rep["mean"]["accuracy"] <= 1.0
    header = next(csv.reader(io.StringIO(rep["csv"])))
    assert tuple(header) == cogspeech.REPORT_COLUMNS
    assert cogspeech.validate_report(rep["csv"]) == []
    rows = list(csv.reader(io.StringIO(rep["csv"])))
    target = next(r for r in rows if r[0] == "metric" and r[9] == "accuracy")
    target[10] = str(float(target[10]) + 0.25)
    out = io.StringIO()
    csv.writer(out, lineterminator="\n").writerows(rows)
    assert cogspeech.validate_report(out.getvalue())


def test_tsne_separates_blobs():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0, 1, (20, 5)), rng.normal(15, 1, (20, 5))])
    Y, kl = cogspeech.tsne(X, perplexity=5.0, iterations=400, seed=1)
    assert Y.shape == (40, 2)
    assert kl[-1] <= kl[300]
    left = Y[:20].mean(axis=0)
    right = Y[20:].mean(axis=0)
    assert np.linalg.norm(left - right) > 1.0
    with pytest.raises(cogspeech.ConfigError):
        cogspeech.tsne(X[:5], perplexity=30.0)
