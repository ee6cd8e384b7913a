"""Command-line interface.

    lstmcrf train TRAIN.tsv --model out.model [--dim 100 --lr 0.05 ...]
    lstmcrf predict INPUT.tsv --model out.model [--output PRED.tsv]
    lstmcrf evaluate TEST.tsv --model out.model
    lstmcrf score GOLD.tsv PRED.tsv
    lstmcrf tune TRAIN.tsv --trials 10 [--tune-seed 0] [--model best.model]
    lstmcrf gradcheck

Failures exit non-zero after printing one line ``error: <Kind>: <message>``
to stderr.
"""

import argparse
import json
import logging
import sys

from . import __version__
from .archive import load_model, save_model
from .corpus import format_column_file, read_column_file
from .exceptions import ConfigError, LstmCrfError
from .gradcheck import run_suite
from .metrics import score_datasets
from .training import TrainConfig, train, tune

GRADCHECK_TOL = 1e-4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message.replace("\n", " "))


def _add_config_flags(p):
    d = TrainConfig.__dataclass_fields__
    p.add_argument("--dim", type=int, default=None,
                   help="embedding size (default 100, or the embeddings file's size)")
    p.add_argument("--lr", type=float, default=d["learning_rate"].default)
    p.add_argument("--dropout", type=float, default=d["dropout_rate"].default)
    p.add_argument("--hidden", type=int, default=d["hidden_size"].default)
    p.add_argument("--epochs", type=int, default=d["max_epochs"].default)
    p.add_argument("--dev-fraction", type=float, default=d["dev_fraction"].default)
    p.add_argument("--seed", type=int, default=d["seed"].default)
    p.add_argument("--cell", choices=("lstm", "rnn"), default="lstm")
    p.add_argument("--output-layer", choices=("crf", "softmax"), default="crf")
    p.add_argument("--embeddings", default=None, help="pretrained embeddings text file")
    p.add_argument("--clip-norm", type=float, default=d["clip_norm"].default,
                   help="global gradient-norm clip, 0 disables")
    p.add_argument("--constrain-transitions", action="store_true",
                   help="forbid IOB-illegal CRF transitions")
    p.add_argument("--init", choices=("glorot", "unit"), default="glorot")
    p.add_argument("--split", choices=("random", "contiguous"), default="random")
    p.add_argument("--no-range-check", action="store_true",
                   help="allow values outside the default search ranges")


def _config(args):
    dim = args.dim
    if dim is None and not args.embeddings:
        dim = 100
    return TrainConfig(
        embedding_dim=dim, learning_rate=args.lr, dropout_rate=args.dropout,
        hidden_size=args.hidden, max_epochs=args.epochs, dev_fraction=args.dev_fraction,
        seed=args.seed, cell=args.cell, output_layer=args.output_layer,
        embeddings_path=args.embeddings, clip_norm=args.clip_norm or None,
        constraint_mask=args.constrain_transitions, init=args.init, split=args.split,
        strict=not args.no_range_check)


def build_parser():
    parser = _Parser(prog="lstmcrf", description="Bidirectional LSTM-CRF concept tagger")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model with best-dev-epoch retention")
    p.add_argument("train_file")
    p.add_argument("--model", required=True, help="output archive path")
    p.add_argument("--log", help="write the run log as JSON lines")
    _add_config_flags(p)

    p = sub.add_parser("predict", help="tag a column file")
    p.add_argument("input_file")
    p.add_argument("--model", required=True)
    p.add_argument("--output", help="output path (default stdout)")

    p = sub.add_parser("evaluate", help="predict on a labeled file and score it")
    p.add_argument("labeled_file")
    p.add_argument("--model", required=True)
    p.add_argument("--json", action="store_true", help="print the report as JSON")

    p = sub.add_parser("score", help="score a predicted column file against gold")
    p.add_argument("gold_file")
    p.add_argument("pred_file")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("tune", help="random search over lr, dropout and embedding size")
    p.add_argument("train_file")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--tune-seed", type=int, default=0)
    p.add_argument("--table", help="write the trial table as JSON")
    p.add_argument("--model", help="retrain the best config and save it here")
    _add_config_flags(p)

    p = sub.add_parser("gradcheck", help="finite-difference check on a small random model")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--length", type=int, default=5)
    return parser


def _report(report, as_json, out):
    if as_json:
        out.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
    else:
        out.write(report.format_table() + "\n")
        out.write(report.summary_line() + "\n")


def _predict_dataset(model, data):
    X = [list(s.tokens) for s in data.sentences]
    return X, model.predict(X) if X else []


def cmd_train(args, out):
    config = _config(args)
    tagger, log = train(config, args.train_file)
    out.write("config " + json.dumps(tagger.config_.to_dict(), sort_keys=True) + "\n")
    stats = tagger.embeddings_.stats()
    out.write("embeddings " + " ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}"
                                       for k, v in stats.items()) + "\n")
    for rec in log.to_records():
        mark = " *" if rec["best"] else ""
        out.write(f"epoch {rec['epoch']} nll={rec['train_nll']:.4f} dev_f1={rec['dev_f1']:.2f}"
                  f" time={rec['wall_time']:.2f}s{mark}\n")
    out.write(f"best_epoch {log.best_epoch} dev_f1={log.best_dev_f1:.2f}\n")
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"config": tagger.config_.to_dict(), "embeddings": stats},
                                sort_keys=True) + "\n")
            for rec in log.to_records():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    save_model(tagger, args.model)
    return 0


def cmd_predict(args, out):
    model = load_model(args.model)
    data = read_column_file(args.input_file)
    X, tags = _predict_dataset(model, data)
    text = format_column_file(X, tags)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def cmd_evaluate(args, out):
    from .corpus import Dataset

    model = load_model(args.model)
    gold = read_column_file(args.labeled_file)
    if not gold.labeled:
        raise ConfigError(f"{args.labeled_file} has no tags")
    X, tags = _predict_dataset(model, gold)
    pred = Dataset.from_lists(X, tags)
    _report(score_datasets(gold, pred), args.json, out)
    return 0


def cmd_score(args, out):
    gold = read_column_file(args.gold_file)
    pred = read_column_file(args.pred_file)
    _report(score_datasets(gold, pred), args.json, out)
    return 0


def cmd_tune(args, out):
    base = _config(args)
    best, table = tune(base, args.train_file, trials=args.trials, seed=args.tune_seed)
    for row in table:
        f1 = "-" if row["dev_f1"] is None else f"{row['dev_f1']:.2f}"
        out.write(f"trial {row['trial']} dim={row['embedding_dim']} lr={row['learning_rate']:.4f}"
                  f" dropout={row['dropout_rate']:.4f} dev_f1={f1} {row['status']}\n")
    if args.table:
        with open(args.table, "w", encoding="utf-8") as fh:
            json.dump(table, fh, indent=2, sort_keys=True)
    if best is None:
        raise ConfigError("every trial failed")
    out.write("best " + json.dumps(best.to_dict(), sort_keys=True) + "\n")
    if args.model:
        tagger, _ = train(best, args.train_file, split_seed=base.seed)
        save_model(tagger, args.model)
    return 0


def cmd_gradcheck(args, out):
    ok = True
    for r in run_suite(seed=args.seed, T=args.length, output_layers=("crf", "softmax")):
        status = "ok" if r["max_rel_error"] < GRADCHECK_TOL else "FAIL"
        ok &= status == "ok"
        out.write(f"{r['cell']:<5} {r['output_layer']:<8} max_rel_error={r['max_rel_error']:.3e} {status}\n")
        for name, err in r["per_param"].items():
            out.write(f"    {name:<18} {err:.3e}\n")
    return 0 if ok else 1


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "evaluate": cmd_evaluate,
            "score": cmd_score, "tune": cmd_tune, "gradcheck": cmd_gradcheck}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=err)
        return COMMANDS[args.command](args, out)
    except LstmCrfError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2 if isinstance(exc, ConfigError) else 1
    except OSError as exc:
        err.write(f"error: {type(exc).__name__}: {exc.strerror or exc}: {exc.filename}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
