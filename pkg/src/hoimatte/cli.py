"""Command-line entry point: ``hoimatte <subcommand> ...``.

Exit codes: 0 success, 2 usage error, 3 missing artifact, 4 invariant
violation.
"""
import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import training as T
from .complementary import deviation_to_uint8
from .config import ABLATIONS, STAGES, Config, ConfigError, apply_overrides, desk_preset, flat_items, load_config
from .corpus import SPLITS, CorpusError, LabelAccessError, load_split, write_corpus
from .metrics import BG_COLORS, export_composite, to_uint8
from .refine import PatchOverlapError

log = logging.getLogger("hoimatte")

EXIT_OK, EXIT_USAGE, EXIT_MISSING, EXIT_INVARIANT = 0, 2, 3, 4
GT = "GT"


class UsageError(Exception):
    pass


def config_epilog():
    lines = ["config keys (dotted, with defaults; override with --set key=value):"]
    for key, value in flat_items(Config()):
        if isinstance(value, tuple):
            value = list(value)
        lines.append(f"  {key} = {json.dumps(value)}")
    return "\n".join(lines)


def resolve_config(args):
    cfg = Config()
    if getattr(args, "preset", "default") == "desk":
        cfg = desk_preset(cfg)
    if args.config:
        if not Path(args.config).is_file():
            raise FileNotFoundError(f"config file not found: {args.config}")
        cfg = load_config(args.config, cfg)
    cfg = apply_overrides(cfg, args.set or [])
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _sizes(cfg, n=None):
    s = cfg.splits
    sizes = {
        "pretrain": s.pretrain,
        "labeled-train": s.labeled_train,
        "labeled-test": s.labeled_test,
        "unlabeled-train": s.unlabeled_train,
        "unlabeled-test": s.unlabeled_test,
    }
    if n is not None:
        sizes = {k: n for k in sizes}
    return sizes


# --------------------------------------------------------------------------
# subcommands


def cmd_synth(args):
    cfg = resolve_config(args)
    synth = cfg.synth
    if args.object_prob is not None:
        synth = dataclasses.replace(synth, object_probability=args.object_prob)
    try:
        manifest = write_corpus(args.out, _sizes(cfg, args.n), seed=cfg.seed, synth=synth, force=args.force)
    except FileExistsError as exc:
        raise UsageError(f"{exc} (use --force)") from exc
    for split in SPLITS:
        e = manifest["splits"][split]
        print(f"{split:16s} n={e['count']:<5d} interactive={e['interactive']:<5d} sha256={e['checksum']}")
    return EXIT_OK


def cmd_train(args):
    cfg = resolve_config(args)
    if args.epochs is not None:
        cfg = dataclasses.replace(cfg, epochs=dataclasses.replace(cfg.epochs, **{args.stage: args.epochs}))
    path = T.run_stage(
        cfg, args.stage, args.run, args.corpus, ablation=args.ablation, resume=args.resume,
        source=args.source,
    )
    print(path)
    return EXIT_OK


def _load_data(args):
    data = load_split(args.corpus, args.split, limit=args.limit)
    return data


def _mattes(args, data):
    """Mattes for the requested pipeline plus per-image patch centres."""
    if args.pipeline == GT:
        return np.array(data.alpha, copy=True), [[] for _ in range(len(data))]
    if not args.checkpoint:
        raise UsageError("--checkpoint is required unless --pipeline GT")
    if not Path(args.checkpoint).is_file():
        raise FileNotFoundError(f"checkpoint not found: {args.checkpoint}")
    system, state, _ = T.load_checkpoint(args.checkpoint)
    top_k = args.top_k if args.top_k is not None else state["stage_config"]["top_k"]
    return T.infer(system, data, args.pipeline, top_k)


def cmd_eval(args):
    data = _load_data(args)
    mattes, centers = _mattes(args, data)
    report = T.evaluate_mattes(mattes, data, centers)
    report["pipeline"] = args.pipeline
    report["split"] = args.split
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.split}_{args.pipeline.replace('+', '_')}"
    T.write_report(report, out / f"{stem}.json", out / f"{stem}.csv")
    print(json.dumps({"count": report["count"], **report["overall"]}, indent=1, sort_keys=True))
    return EXIT_OK


def _save_png(path, img):
    Image.fromarray(to_uint8(img)).save(path)


def cmd_infer(args):
    data = _load_data(args)
    mattes, centers = _mattes(args, data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "mattes.npy", mattes.astype(np.float32))
    for i, m in enumerate(mattes):
        _save_png(out / f"matte_{i:04d}.png", m)
    with open(out / "patch_centers.json", "w") as fh:
        json.dump({"seeds": data.seeds, "centers": centers}, fh, indent=1)
    print(f"wrote {len(mattes)} mattes to {out}")
    return EXIT_OK


def cmd_export(args):
    data = _load_data(args)
    mattes, _ = _mattes(args, data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    indices = args.indices if args.indices else list(range(len(data)))
    for i in indices:
        if not 0 <= i < len(data):
            raise UsageError(f"sample index {i} out of range for {args.split} ({len(data)} samples)")
    comps = np.stack([export_composite(data.rgb[i], mattes[i], args.bg) for i in indices])
    np.save(out / "composites.npy", comps)
    for j, i in enumerate(indices):
        _save_png(out / f"composite_{i:04d}_{args.bg}.png", comps[j])
    if args.pipeline != GT:
        # deviation maps for the branch the pipeline uses
        import torch

        system, _, _ = T.load_checkpoint(args.checkpoint)
        branch = 1 if args.pipeline.startswith("S") else 2
        with torch.no_grad():
            for i in indices:
                x = T._inputs(data, np.array([i]))
                a = T._predict(system, branch, x)
                dev = system.cl(branch, x["rgb"], a)[0, 0]
                Image.fromarray(deviation_to_uint8(dev)).save(out / f"deviation_{i:04d}.png")
    print(f"exported {len(indices)} composites to {out}")
    return EXIT_OK


def cmd_report(args):
    manifest = T.read_run_manifest(args.run)
    if not manifest["stages"]:
        raise FileNotFoundError(f"no finished stages recorded in {args.run}")
    summary = {}
    for key, entry in sorted(manifest["stages"].items()):
        last = entry["losses"][-1] if entry["losses"] else {}
        summary[key] = {
            "checkpoint": entry["checkpoint"],
            "epochs": entry["epochs"],
            "effective_lambda_cs": entry["effective_lambda_cs"],
            "effective_lambda_dc": entry["effective_lambda_dc"],
            "final_losses": last,
        }
    print(json.dumps(summary, indent=1, sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser():
    epilog = config_epilog()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (nested sections or dotted keys)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    common.add_argument("--seed", type=int, help="shorthand for --set seed=N")
    common.add_argument("--preset", choices=("default", "desk"), default="default",
                        help="desk halves every stage's epoch count")
    common.add_argument("-v", "--verbose", action="store_true")

    fmt = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(prog="hoimatte", description="Human-object matting pipeline.",
                                epilog=epilog, formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common], epilog=epilog, formatter_class=fmt)

    s = add("synth", "generate the synthetic corpus")
    s.add_argument("out")
    s.add_argument("--n", type=int, help="samples per split (overrides the configured sizes)")
    s.add_argument("--object-prob", type=float, help="probability that a scene has a held object")
    s.add_argument("--force", action="store_true", help="overwrite a nonempty output directory")
    s.set_defaults(func=cmd_synth)

    t = add("train", "run one training stage")
    t.add_argument("--run", required=True, help="run directory (checkpoints, logs, manifest)")
    t.add_argument("--corpus", required=True)
    t.add_argument("--stage", required=True, choices=STAGES)
    t.add_argument("--epochs", type=int, help="epoch count for this stage")
    t.add_argument("--ablation", choices=ABLATIONS)
    t.add_argument("--resume", action="store_true")
    t.add_argument("--source", help="explicit predecessor checkpoint")
    t.set_defaults(func=cmd_train)

    pipelines = list(T.PIPELINES) + [GT]

    def data_args(q, default_split):
        q.add_argument("--corpus", required=True)
        q.add_argument("--split", choices=SPLITS, default=default_split)
        q.add_argument("--limit", type=int, help="use only the first N samples")
        q.add_argument("--checkpoint")
        q.add_argument("--pipeline", choices=pipelines, default="S",
                       help="GT uses the ground-truth matte (no checkpoint needed)")
        q.add_argument("--top-k", type=int, help="patches per image for +RN pipelines")
        q.add_argument("--out", required=True)

    e = add("eval", "evaluate a checkpoint on a labeled split")
    data_args(e, "labeled-test")
    e.set_defaults(func=cmd_eval)

    i = add("infer", "predict mattes for a split")
    data_args(i, "labeled-test")
    i.set_defaults(func=cmd_infer)

    x = add("export", "composite predictions over a solid background")
    data_args(x, "labeled-test")
    x.add_argument("--bg", default="green", help=f"background colour: {', '.join(sorted(BG_COLORS))}")
    x.add_argument("--indices", type=int, nargs="+", help="sample indices (default: all)")
    x.set_defaults(func=cmd_export)

    r = add("report", "summarise the stages recorded in a run directory")
    r.add_argument("--run", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "export" and args.bg not in BG_COLORS:
        parser.error(f"--bg must be one of {sorted(BG_COLORS)}, got {args.bg!r}")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, CorpusError) as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (T.StageOrderError, T.RunLockedError, LabelAccessError, PatchOverlapError, AssertionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
