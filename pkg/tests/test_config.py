import pytest

from prodclass.config import PipelineConfig, apply_overrides
from prodclass.errors import ConfigError


def write(tmp_path, text):
    p = tmp_path / "c.yaml"
    p.write_text(text, encoding="utf-8")
    return p


def test_yaml_roundtrip_and_overrides(tmp_path):
    p = write(tmp_path, "data: {path: x.csv}\nclassifier: {algorithm: knn, hyperparameters: {k: 3}}\n")
    cfg = PipelineConfig.from_yaml(p, ["classifier.hyperparameters.k=5", "cv.k=4", "seed=7"])
    assert cfg.classifier.hyperparameters == {"k": 5}
    assert cfg.cv.k == 4 and cfg.seed == 7 and cfg.data.path == "x.csv"
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg


def test_all_errors_reported_with_paths(tmp_path):
    p = write(tmp_path, "data: {path: x.csv, bogus: 1}\nsplit: {test_fraction: 1.5}\n"
                        "classifier: {algorithm: knn, hyperparameters: {nope: 1}}\ncv: {k: one}\n")
    with pytest.raises(ConfigError) as e:
        PipelineConfig.from_yaml(p)
    msg = str(e.value)
    assert "data.bogus" in msg and "cv.k" in msg


def test_semantic_errors():
    with pytest.raises(ConfigError) as e:
        PipelineConfig.from_dict({"data": {"path": "x"}, "split": {"test_fraction": 1.5},
                                  "classifier": {"algorithm": "knn", "hyperparameters": {"nope": 1}},
                                  "vectorization": {"kind": "tfidf", "params": {"dim": 3}}})
    msg = str(e.value)
    for key in ("split.test_fraction", "classifier.hyperparameters", "vectorization.params"):
        assert key in msg
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"data": {"path": "x"}, "classifier": {"algorithm": "magic"}})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({})


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        PipelineConfig.from_yaml(tmp_path / "none.yaml")
    with pytest.raises(ConfigError):
        PipelineConfig.from_yaml(write(tmp_path, "a: [1,\n"))
    with pytest.raises(ConfigError):
        PipelineConfig.from_yaml(write(tmp_path, "- 1\n- 2\n"))


def test_override_parsing():
    out = apply_overrides({"a": {"b": 1}}, ["a.b=2.5", "c.d=true", "e=hello"])
    assert out == {"a": {"b": 2.5}, "c": {"d": True}, "e": "hello"}
    with pytest.raises(ConfigError):
        apply_overrides({}, ["novalue"])
