import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodclass.corpus import (
    NGRAM_SEP,
    LabelDictionary,
    RawRecord,
    TokenizerConfig,
    load_csv,
    make_folds,
    split,
    split_indices,
    tokenize,
    tokenize_records,
    word_ngrams,
)
from prodclass.errors import ConfigError, DataError


def _write(tmp_path, name, data: bytes):
    p = tmp_path / name
    p.write_bytes(data)
    return p


# load_csv ----------------------------------------------------------------

def test_load_three_rows_in_order(tmp_path):
    p = _write(tmp_path, "a.csv", b"name,category\nRosii 1kg,veg\nLapte,milk\nPaine,bread\n")
    recs, diag = load_csv(p)
    assert [r.text for r in recs] == ["Rosii 1kg", "Lapte", "Paine"]
    assert [r.label for r in recs] == ["veg", "milk", "bread"]
    assert diag.skipped == 0 and diag.rows_read == 3


def test_empty_name_is_skipped_and_counted(tmp_path):
    p = _write(tmp_path, "a.csv", b"name,category\n,veg\nLapte,milk\n")
    recs, diag = load_csv(p)
    assert len(recs) == 1 and diag.skipped == 1 and diag.skipped_lines == [2]


def test_crlf_matches_lf(tmp_path):
    body = 'name,category\n"Vin, rosu",wine\nBere 0.5l,beer\n"multi\nline",x\n'
    lf = _write(tmp_path, "lf.csv", body.encode())
    crlf = _write(tmp_path, "crlf.csv", body.replace("\n", "\r\n").encode())
    a, _ = load_csv(lf)
    b, _ = load_csv(crlf)
    # the embedded newline inside quotes is data and stays as written
    assert [(r.text, r.label) for r in a[:2]] == [(r.text, r.label) for r in b[:2]]
    assert len(a) == len(b) == 3


def test_missing_file_and_column(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_csv(tmp_path / "nope.csv")
    p = _write(tmp_path, "a.csv", b"title,category\nx,y\n")
    with pytest.raises(DataError, match="missing column 'name'"):
        load_csv(p)


def test_malformed_quoting_names_line(tmp_path):
    p = _write(tmp_path, "a.csv", b'name,category\nok,a\n"bad"x,b\n')
    with pytest.raises(DataError, match="line 3"):
        load_csv(p)


def test_custom_columns(tmp_path):
    p = _write(tmp_path, "a.csv", "id,produs,clasa\n1,Brânză,lactate\n".encode())
    recs, _ = load_csv(p, text_column="produs", label_column="clasa")
    assert recs == [RawRecord("Brânză", "lactate")]


# tokenize ----------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("Rosii Cherry 500g", ["rosii", "cherry", "500g"]),
    ("", []),
    ("lapte-UHT 1,5%", ["lapte", "uht", "1", "5"]),
    ("a_b", ["a", "b"]),
    ("Brânză  de\tvaci", ["brânză", "de", "vaci"]),
])
def test_tokenize_examples(text, expected):
    assert tokenize(text) == expected


def test_diacritic_folding_is_opt_in():
    assert tokenize("Brânză") == ["brânză"]
    assert tokenize("Brânză", TokenizerConfig(fold_diacritics=True)) == ["branza"]


@given(st.text(max_size=60))
def test_tokenize_idempotent(text):
    toks = tokenize(text)
    assert tokenize(" ".join(toks)) == toks
    assert all(toks) and all(NGRAM_SEP not in t for t in toks)


# word_ngrams -------------------------------------------------------------

def test_ngram_examples():
    J = NGRAM_SEP.join
    assert word_ngrams(["a", "b", "c"], 3) == ["a", "b", "c", J("ab"), J("bc"), J("abc")]
    assert word_ngrams(["a"], 3) == ["a"]
    assert word_ngrams(["a", "b"], 1) == ["a", "b"]
    with pytest.raises(ConfigError):
        word_ngrams(["a"], 0)


@given(st.lists(st.sampled_from("abcde"), max_size=8), st.integers(1, 3))
def test_ngram_count_matches_enumeration(tokens, m):
    out = word_ngrams(tokens, m)
    L = len(tokens)
    assert len(out) == sum(L - n + 1 for n in range(1, min(m, L) + 1))
    brute = [NGRAM_SEP.join(tokens[i:j]) for n in range(1, m + 1) for i in range(L) for j in [i + n] if j <= L]
    assert out == brute


# labels / tokenized records ----------------------------------------------

def test_label_dictionary():
    recs = [RawRecord("x", "b"), RawRecord("y", "a"), RawRecord("z", "b")]
    lab = LabelDictionary.from_records(recs)
    assert lab.labels == ["a", "b"] and lab.index("b") == 1 and lab.label(0) == "a"
    with pytest.raises(DataError):
        LabelDictionary(["only"])
    with pytest.raises(DataError):
        lab.index("zzz")


def test_empty_token_records_are_rejected():
    recs = [RawRecord("%%", "a"), RawRecord("lapte", "b")]
    docs, rejected = tokenize_records(recs, LabelDictionary(["a", "b"]))
    assert [d.tokens for d in docs] == [("lapte",)] and rejected == [recs[0]]


# split -------------------------------------------------------------------

def test_stratified_split_counts():
    labels = [0] * 50 + [1] * 50
    tr, te = split_indices(labels, 0.2, seed=3)
    assert len(tr) == 80 and len(te) == 20
    assert np.bincount(np.array(labels)[te]).tolist() == [10, 10]


def test_split_deterministic_and_minimal():
    labels = list(range(5)) * 4
    assert all(np.array_equal(a, b) for a, b in zip(split_indices(labels, 0.3, 7), split_indices(labels, 0.3, 7)))
    tr, te = split_indices([0, 1], 0.5, 0, stratified=False)
    assert len(tr) == len(te) == 1


def test_split_rejects_singleton_class():
    with pytest.raises(DataError, match="'1'"):
        split_indices([0, 0, 1], 0.5)


def test_split_on_records():
    recs = [RawRecord(f"p{i}", "ab"[i % 2]) for i in range(10)]
    train, test = split(recs, 0.2, seed=1)
    assert sorted(r.text for r in train + test) == sorted(r.text for r in recs)
    assert {r.label for r in test} == {"a", "b"}


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=10, max_size=80), st.floats(0.1, 0.9), st.integers(0, 10**6))
def test_split_partition_property(labels, frac, seed):
    labels = np.array(labels)
    counts = np.bincount(labels)
    if counts[counts > 0].min() < 2:
        labels = np.concatenate([labels, labels])
    tr, te = split_indices(labels, frac, seed)
    assert len(np.intersect1d(tr, te)) == 0 and len(tr) + len(te) == len(labels)
    for c in np.unique(labels):
        n_c = int((labels == c).sum())
        n_te = int((labels[te] == c).sum())
        assert abs(n_te - frac * n_c) <= 1.0


# folds -------------------------------------------------------------------

def test_fold_sizes_25_by_10():
    plan = make_folds(list(range(25)), k=10, seed=0, stratified=False)
    assert sorted(plan.fold_sizes().tolist()) == [2] * 5 + [3] * 5


def test_leave_one_out_and_determinism():
    labels = [0, 1] * 4
    plan = make_folds(labels, k=8, seed=1)
    assert sorted(plan.assignment.tolist()) == list(range(8))
    assert np.array_equal(plan.assignment, make_folds(labels, k=8, seed=1).assignment)


def test_fold_errors():
    with pytest.raises(DataError):
        make_folds([0, 1, 0], k=4)
    with pytest.raises(ConfigError):
        make_folds([0, 1, 0], k=1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=10, max_size=120), st.integers(2, 10), st.integers(0, 10**6))
def test_fold_invariants(labels, k, seed):
    labels = np.array(labels)
    plan = make_folds(labels, k=k, seed=seed)
    sizes = plan.fold_sizes()
    assert sizes.max() - sizes.min() <= 1 and sizes.sum() == len(labels)
    for c in np.unique(labels):
        per = np.bincount(plan.assignment[labels == c], minlength=k)
        assert per.max() - per.min() <= 1
    seen = np.concatenate([te for _, te in plan.folds()])
    assert sorted(seen.tolist()) == list(range(len(labels)))
