"""Command-line entry point: ``prodclass {train,cv,grid,predict,gen-corpus,inspect}``.

Exit codes: 0 success, 1 invalid configuration, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import zipfile

from .archive import json_default, read_meta
from .config import PipelineConfig, apply_overrides
from .errors import DataError, ProdclassError
from .generate import CorpusSpec, generate_corpus


def _pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML pipeline config")
    p.add_argument("--data", help="CSV dataset (overrides data.path)")
    p.add_argument("--vectorization", help="vectorization kind (overrides vectorization.kind)")
    p.add_argument("--classifier", help="classifier algorithm (overrides classifier.algorithm)")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", help="output directory")
    p.add_argument("--workers", type=int, help="maximum worker processes")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config field, e.g. classifier.hyperparameters.k=3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prodclass", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("train", "fit on a split and evaluate on the held-out part"),
                           ("cv", "k-fold cross-validation"),
                           ("grid", "grid search with cross-validation")):
        _pipeline_args(sub.add_parser(name, help=helptext))
    p = sub.add_parser("predict", help="label a CSV with a saved model archive")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--text-column")
    p = sub.add_parser("gen-corpus", help="write a synthetic labeled product corpus")
    p.add_argument("--output", required=True)
    d = CorpusSpec()
    p.add_argument("--classes", type=int, default=d.classes)
    p.add_argument("--size", type=int, default=d.size)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--noise-rate", type=float, default=d.noise_rate)
    p.add_argument("--imbalance", type=float, default=d.imbalance)
    p = sub.add_parser("inspect", help="print archive metadata")
    p.add_argument("archive")
    return parser


def config_from_args(args) -> PipelineConfig:
    overrides = []
    for flag, key in (("data", "data.path"), ("vectorization", "vectorization.kind"),
                      ("classifier", "classifier.algorithm"), ("seed", "seed"), ("output", "output_dir"),
                      ("workers", "workers")):
        value = getattr(args, flag)
        if value is not None:
            overrides.append(f"{key}={value}")
    overrides += args.set
    if args.config:
        return PipelineConfig.from_yaml(args.config, overrides)
    return PipelineConfig.from_dict(apply_overrides({}, overrides))


def _summarize_meta(meta: dict) -> dict:
    vec = dict(meta["vectorizer"])
    for key in ("terms", "words"):
        if key in vec:
            vec[f"n_{key}"] = len(vec.pop(key))
    model = dict(meta["model"])
    if len(model.get("history", [])) > 10:
        h = model.pop("history")
        model["history_head"], model["history_tail"] = h[:3], h[-3:]
    return {**meta, "vectorizer": vec, "model": model}


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    from . import pipeline

    if args.command in ("train", "cv", "grid"):
        config = config_from_args(args)
        if args.command == "train":
            _, report = pipeline.run_train(config)
            print(report.to_text(), end="")
        elif args.command == "cv":
            result = pipeline.run_cv(config)
            print(json.dumps(result.summary(), indent=2))
        else:
            best, _ = pipeline.run_grid(config)
            print(json.dumps(best.to_dict(), indent=2, default=json_default))
    elif args.command == "predict":
        path = pipeline.run_predict(args.model, args.input, args.output, args.text_column)
        print(f"wrote {path}")
    elif args.command == "gen-corpus":
        spec = CorpusSpec(args.classes, args.size, args.seed, args.noise_rate, args.imbalance).validate()
        print(f"wrote {generate_corpus(spec, args.output)}")
    elif args.command == "inspect":
        try:
            meta = read_meta(args.archive)
        except (OSError, KeyError, ValueError, zipfile.BadZipFile) as exc:
            raise DataError(f"cannot read archive {args.archive}: {exc}") from None
        print(json.dumps(_summarize_meta(meta), indent=2, ensure_ascii=False, default=json_default))
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except ProdclassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
