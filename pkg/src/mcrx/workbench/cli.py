"""Command-line entry point: ``mcrx <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""
import argparse
import json
import logging
import os
import sys

from ..channel import ChannelProfile
from ..errors import ConfigError, FormatError, NumericalFailure
from ..neuralnet import count_params, load_checkpoint, registry, save_checkpoint
from ..neuralnet.model import build_layers
from ..neuralnet.registry import MODEL_NAMES, PUBLISHED_PARAM_COUNTS
from .config import default_config, load_config
from .dataset import gen_dataset, read_dataset, write_dataset
from .report import csv_text, emit_csv, emit_svg
from .sweeps import (
    checkpoint_name,
    experiment_channel,
    neural_ber,
    run_classical_sweep,
    run_neural_sweep,
    run_transfer_experiment,
    train_point,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("mcrx")


def resolve_config(args):
    cfg = load_config(args.config) if args.config else default_config(args.waveform or "GFDM")
    if args.config and args.waveform:
        raise ConfigError("--waveform cannot be combined with --config")
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.profile:
        try:
            changes["channel"] = ChannelProfile.from_name(args.profile, cfg.channel.n_taps)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return cfg.replace(**changes) if changes else cfg


def _out_dir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_gen(args, cfg):
    h = experiment_channel(cfg)
    ds = gen_dataset(cfg, args.ebno, args.role, h, n_symbols=args.symbols)
    path = args.out or f"{cfg.waveform.kind.value.lower()}_{args.role}_{args.ebno:+.2f}dB.mcrx"
    write_dataset(ds, path)
    print(f"wrote {len(ds)} records (N={ds.N}) to {path}")


def cmd_baseline(args, cfg):
    records = run_classical_sweep(cfg)
    out = _out_dir(args)
    emit_csv(records, os.path.join(out, "baseline.csv"))
    emit_svg(records, os.path.join(out, "baseline.svg"), f"{cfg.waveform.kind.value} classical receivers")
    sys.stdout.write(csv_text(records))


def cmd_train(args, cfg):
    name = args.model or "conv2d-2p1"
    model, history = train_point(cfg, name, args.ebno, experiment_channel(cfg))
    path = args.out or checkpoint_name(name, args.ebno)
    save_checkpoint(model, path)
    last = history[-1] if history else None
    print(f"trained {name} for {len(history)} epochs"
          + (f" (final val loss {last.val_loss:.6g})" if last else "") + f"; checkpoint {path}")


def cmd_eval(args, cfg):
    if not args.checkpoint or not args.dataset:
        raise ConfigError("eval needs --checkpoint and --dataset")
    model = load_checkpoint(args.checkpoint)
    ds = read_dataset(args.dataset)
    if model.spec.name != (args.model or model.spec.name):
        raise ConfigError(f"checkpoint holds {model.spec.name}, not {args.model}")
    label = model.spec.meta.get("waveform", cfg.waveform.kind.value)
    record = neural_ber(model, ds, model.spec.name, label)
    text = csv_text([record])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_sweep(args, cfg):
    out = _out_dir(args)
    records = run_classical_sweep(cfg) if args.with_baselines else []
    for name in (args.model or "conv2d-2p1").split(","):
        records += run_neural_sweep(cfg, name.strip(), os.path.join(out, "checkpoints"),
                                    shared_model=args.shared_model, pivot_db=args.pivot)
    emit_csv(records, os.path.join(out, "sweep.csv"))
    emit_svg(records, os.path.join(out, "sweep.svg"), f"{cfg.waveform.kind.value} receivers")
    sys.stdout.write(csv_text(records))


def cmd_transfer(args, cfg):
    name = args.model or "conv2d-2p1"
    report = run_transfer_experiment(cfg, name, checkpoint=args.checkpoint, ebno_db=args.ebno,
                                     same_channel=args.same_channel, epochs=args.epochs)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def explain_params(name, spec):
    analytic = count_params(spec)
    published = PUBLISHED_PARAM_COUNTS.get((name, spec.meta["waveform"]))
    lines = [f"{name} {spec.meta['waveform']}: {analytic} trainable parameters"]
    for layer_spec, layer in zip(spec.layers, build_layers(spec)):
        if layer.n_params:
            lines.append(f"  {layer_spec.kind.value:<7} {str(layer.in_shape):>14} -> "
                         f"{str(layer.out_shape):<14} {layer.n_params}")
    if published is not None:
        delta = analytic - published
        lines.append(f"  published reference count: {published} (difference {delta:+d}); "
                     "the reference layer sizes are not fully specified, so the canonical "
                     "architecture is not reconciled with it")
    return "\n".join(lines)


def cmd_params(args, cfg):
    names = [args.model] if args.model else list(MODEL_NAMES)
    for name in names:
        spec = registry(name, cfg.waveform, dropout=cfg.train.dropout)
        if args.explain:
            print(explain_params(name, spec))
        else:
            print(f"{name}\t{cfg.waveform.kind.value}\t{count_params(spec)}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file (section.key = value)")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--model", help="registry model name (comma list for sweep)")
    common.add_argument("--profile", help="channel power-delay profile: uniform or epa")
    common.add_argument("--waveform", choices=("OFDM", "GFDM"),
                        help="default reproduction settings to use when no --config is given")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mcrx", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a dataset file")
    p.add_argument("--ebno", type=float, required=True)
    p.add_argument("--role", choices=("train", "test"), default="train")
    p.add_argument("--symbols", type=int, help="number of blocks (default from config)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("baseline", parents=[common], help="classical receiver sweep -> CSV/SVG")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("train", parents=[common], help="train one model at one Eb/No")
    p.add_argument("--ebno", type=float, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint on a dataset file")
    p.add_argument("--checkpoint")
    p.add_argument("--dataset")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[common], help="neural receiver sweep -> CSV/SVG")
    p.add_argument("--shared-model", action="store_true",
                   help="train one model at --pivot instead of one per Eb/No")
    p.add_argument("--pivot", type=float, default=12.0)
    p.add_argument("--with-baselines", action="store_true", help="include classical receivers")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("transfer", parents=[common], help="channel-redraw fine-tuning report")
    p.add_argument("--ebno", type=float, default=12.0)
    p.add_argument("--checkpoint", help="base model (trained first when omitted)")
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--same-channel", action="store_true", help="control run without redraw")
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("params", parents=[common], help="trainable parameter counts")
    p.add_argument("--explain", action="store_true",
                   help="per-layer breakdown and comparison with published counts")
    p.set_defaults(func=cmd_params)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        args.func(args, cfg)
    except (ConfigError, KeyError) as exc:
        print(f"mcrx: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"mcrx: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FormatError, OSError) as exc:
        print(f"mcrx: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
