"""Command-line interface.

Commands: train, eval, extract, gradcheck, gates, compare-ops. Data tables
go to stdout as TSV; the resolved configuration and human-oriented notes
go to stderr, so stdout stays stable and pipeline-friendly. Every command
is deterministic given its flags.
"""

import argparse
import sys

import numpy as np

from . import dataio, extraction, layers, ops, training

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def _echo_config(args):
    items = sorted(vars(args).items())
    line = " ".join(f"{k.replace('_', '-')}={v}" for k, v in items if k != "func")
    print(f"# config {line}", file=sys.stderr)


def _label_column(value):
    try:
        return int(value)
    except ValueError:
        return value


def _add_data_flags(parser, require_data=True):
    parser.add_argument("--data", required=require_data, help="delimited text dataset")
    parser.add_argument("--label-col", default="class", type=_label_column,
                        help="label column name or zero-based index (default: class)")
    parser.add_argument("--delimiter", default=",")
    parser.add_argument("--no-header", action="store_true",
                        help="file has no header row (label column must be an index)")


def _load_dataset(args):
    has_header = False if args.no_header else None
    data = dataio.load_csv(args.data, args.label_col, delimiter=args.delimiter,
                           has_header=has_header)
    if data.rejected_rows:
        print(f"# rejected {data.rejected_rows} unparseable rows", file=sys.stderr)
    return data


def cmd_train(args):
    data = _load_dataset(args)
    config = training.TrainConfig(learning_rate=args.lr, l1_coefficient=args.l1,
                                  epsilon=args.epsilon, epochs=args.epochs,
                                  seed=args.seed, hidden_width=args.hidden,
                                  logic_depth=args.depth, rmsprop=args.rmsprop)
    train_set, val_set = dataio.split(data, dataio.SplitSpec(args.split, args.seed))
    normalizer = dataio.fit_normalizer(train_set)
    rng = np.random.default_rng([2, args.seed])
    if args.baseline_dnn:
        arch = "dnn"
        network = layers.build_dnn(normalizer, data.n_classes, hidden_width=args.hidden,
                                   rng=rng, class_names=data.class_names,
                                   feature_names=data.feature_names)
    else:
        arch = "fuzzy"
        network = layers.build_fuzzy_network(normalizer, data.n_classes,
                                             hidden_width=args.hidden,
                                             logic_depth=args.depth, rng=rng,
                                             epsilon=args.epsilon,
                                             class_names=data.class_names,
                                             feature_names=data.feature_names)
    def epoch_line(epoch, loss):
        print(f"{epoch}\t{loss!r}")

    training.train(network, train_set, config, on_epoch=epoch_line)
    train_err = training.evaluate(network, train_set).misclassification_rate
    val_err = training.evaluate(network, val_set).misclassification_rate
    saved_config = config.to_dict()
    saved_config["train_fraction"] = args.split
    layers.save_model(network, args.model_out, arch=arch, config=saved_config)
    print(f"train_error\t{train_err!r}")
    print(f"validation_error\t{val_err!r}")
    print(f"model\t{args.model_out}")
    return EXIT_OK


def cmd_eval(args):
    network, _ = layers.load_model(args.model)
    data = dataio.remap_labels(_load_dataset(args), network.class_names)
    report = training.evaluate(network, data)
    print(f"error\t{report.misclassification_rate!r}")
    print(f"rows\t{report.total}")
    for t in range(len(network.class_names)):
        for p in range(len(network.class_names)):
            print(f"confusion\t{t}\t{p}\t{report.confusion[t, p]}")
    return EXIT_OK


def cmd_extract(args):
    network, _ = layers.load_model(args.model)
    snapped = extraction.snap_network(network)
    logic = extraction.build_expressions(snapped)
    for i, name in enumerate(network.class_names):
        print(f"# class c{i} = {name}", file=sys.stderr)
    sys.stdout.write(extraction.render_listing(logic, flatten=args.flatten,
                                               sexpr=args.ast))
    if args.data:
        data = dataio.remap_labels(_load_dataset(args), network.class_names)
        report = extraction.eval_snapped(snapped, data)
        print(f"snapped_error\t{report.misclassification_rate!r}")
    return EXIT_OK


def cmd_gradcheck(args):
    network, features, label = training.build_reference_network(seed=args.seed)
    report = training.grad_check(network, features, label, tolerance=args.tolerance)
    print(f"checked\t{len(report.entries)}")
    print(f"max_error\t{report.max_error!r}")
    for entry in report.failures():
        print(f"fail\t{entry.layer_index}\t{entry.param_name}\t{entry.flat_index}"
              f"\t{entry.analytic!r}\t{entry.numeric!r}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_gates(args):
    seeds = range(args.seeds)
    total = 0
    converged = 0
    print("gate\tseed\tconverged\tepochs")
    for gate in ops.GATES:
        gate_converged = 0
        for seed in seeds:
            run, _ = training.train_gate(gate, seed, max_epochs=args.epochs,
                                         pair_op=args.op, learning_rate=args.lr)
            print(f"{run.gate}\t{run.seed}\t{int(run.converged)}\t{run.epochs_used}")
            total += 1
            converged += int(run.converged)
            gate_converged += int(run.converged)
        print(f"# {gate}: {gate_converged}/{args.seeds} converged", file=sys.stderr)
    rate = converged / total if total else 0.0
    print(f"# overall convergence {rate:.3f}", file=sys.stderr)
    return EXIT_OK if rate >= 0.95 else EXIT_CHECK_FAILED


def _parse_pattern(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"pattern must be x,y,target; got {text!r}")
    return tuple(float(p) for p in parts)


def _parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be lo:hi:steps; got {text!r}")
    lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if steps < 1:
        raise ValueError("grid needs at least one step")
    return np.linspace(lo, hi, steps)


def cmd_compare_ops(args):
    pattern = _parse_pattern(args.pattern)
    grid = _parse_grid(args.grid)
    columns = training.compare_operators(pattern, grid)
    sys.stdout.write(training.compare_operators_tsv(columns))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="fuzzynet",
                                     description="Train fuzzy-logic networks and "
                                                 "extract boolean expressions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write it to disk")
    _add_data_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--l1", type=float, default=0.0001)
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--hidden", type=int, default=16)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--split", type=float, default=0.7, help="train fraction")
    p.add_argument("--model-out", default="model.flmodel")
    p.add_argument("--baseline-dnn", action="store_true")
    p.add_argument("--rmsprop", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model")
    p.add_argument("--model", required=True)
    _add_data_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("extract", help="print snapped boolean expressions")
    p.add_argument("--model", required=True)
    p.add_argument("--flatten", action="store_true",
                   help="substitute intermediate definitions down to inputs")
    p.add_argument("--ast", action="store_true", help="machine-readable dump")
    _add_data_flags(p, require_data=False)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("gradcheck", help="finite-difference check of all gradients")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("gates", help="gate-learning convergence experiment")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--op", choices=sorted(ops.TRAINABLE_PAIR_OPS), default=ops.OP_EQ2)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--lr", type=float, default=0.1,
                   help="step size for the tiny gate networks")
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("compare-ops", help="operator outputs and loss slopes over alpha")
    p.add_argument("--pattern", required=True, help="x,y,target")
    p.add_argument("--grid", default="-1:1:81", help="lo:hi:steps")
    p.set_defaults(func=cmd_compare_ops)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _echo_config(args)
    try:
        return args.func(args)
    except (dataio.DataError, layers.LayerError, layers.ModelFormatError,
            extraction.ExtractionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
