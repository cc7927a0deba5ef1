"""Command line entry point: ``freqfed <subcommand>``.

gen-data   write the synthetic multi-domain corpus and its manifest
augment    five-panel synthesis preview for a source/target image pair
train      federated training driven by a YAML config
evaluate   per-image and aggregate metrics CSV for a checkpoint
report     join evaluation CSVs into a method x domain x metric table
"""

import argparse
import csv
import logging
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import data
from .augment import MixVariant, comparison_panels
from .bank import build_bank
from .config import ConfigError, dump_config, load_config
from .federation import ClientState, run_federation, write_round_log
from .metrics import METRIC_DIRECTIONS, read_evaluation_csv, write_evaluation_csv
from .experiment import evaluate_samples
from .model import CheckpointError, init_params, load_checkpoint, num_params, save_checkpoint

log = logging.getLogger("freqfed")


class CommandError(Exception):
    pass


def _config(args):
    overrides = list(args.set or [])
    if getattr(args, "seed", None) is not None:
        overrides.append(("seed", args.seed))
    if getattr(args, "out", None) is not None and args.command in ("train", "evaluate"):
        overrides.append(("output_dir", str(args.out)))
    if args.command in ("train", "evaluate") and not Path(args.config).is_file():
        raise CommandError(f"config file {args.config} does not exist")
    return load_config(args.config, overrides)


def load_samples(path):
    """Samples from a gen-data directory (manifest) or an images/ + masks/ directory."""
    path = Path(path)
    if path.is_file():
        return data.read_manifest(path)
    if (path / data.MANIFEST_NAME).is_file():
        return data.read_manifest(path / data.MANIFEST_NAME)
    if (path / "images").is_dir():
        return data.load_external_dataset(path)
    raise CommandError(f"{path}: no {data.MANIFEST_NAME} and no images/ + masks/ pair")


def by_domain(samples):
    groups = defaultdict(list)
    for s in samples:
        groups[s.domain].append(s)
    return groups


def cmd_gen_data(args):
    cfg = _config(args)
    out = Path(args.out or cfg.dataset)
    domains = data.preset_domains(cfg.preset, cfg.seed)
    corpus = {d.domain_id: data.generate_domain(d, cfg.per_domain, cfg.size, cfg.size) for d in domains}
    try:
        manifest = data.write_dataset(out, corpus)
    except OSError as exc:
        raise CommandError(f"cannot write dataset under {out}: {exc}") from exc
    print(f"wrote {sum(map(len, corpus.values()))} samples in {len(corpus)} domains; manifest {manifest}")
    return 0


def cmd_augment(args):
    try:
        src = data.read_image(args.source)
        tgt = data.read_image(args.target)
    except (OSError, data.NetpbmError) as exc:
        raise CommandError(f"cannot read input image: {exc}") from exc
    if src.shape != tgt.shape:
        raise CommandError(f"source {src.shape} and target {tgt.shape} differ in shape")
    lam = args.lam if args.lam is not None else 1.0 - np.random.default_rng(args.seed).random()
    panels = comparison_panels(src, tgt, lam, args.beta, args.alpha, args.variant)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, img in panels.items():
        data.write_image(out / f"{name}.ppm", img)
    print(f"lambda={lam:.6f}; wrote {', '.join(f'{n}.ppm' for n in panels)} to {out}")
    return 0


def training_clients(cfg, samples):
    groups = by_domain(samples)
    missing = [d for d in cfg.clients if d not in groups]
    if missing:
        raise CommandError(f"dataset has no samples for client domains {missing}")
    clients = []
    for dom in cfg.clients:
        train, _ = data.split(groups[dom], cfg.train_fraction, cfg.seed)
        clients.append(ClientState(dom, [s.image for s in train], [s.mask for s in train]))
    return clients


def cmd_train(args):
    cfg = _config(args)
    samples = load_samples(cfg.dataset)
    clients = training_clients(cfg, samples)
    fed = cfg.federation()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(cfg, out / "config.resolved.yaml")

    channels = clients[0].images[0].shape[0]
    init = init_params(channels, cfg.seed)
    bank = None
    if fed.augment and fed.rounds > 0:
        bank = build_bank({c.client_id: c.images for c in clients}, fed.beta)
        bank.save(out / "bank.fdgb")
    params, records = run_federation(fed, clients, init=init, bank=bank)
    save_checkpoint(out / "checkpoint.fdgm", params)
    write_round_log(out / "rounds.csv", records, [c.client_id for c in clients])
    print(f"trained {fed.rounds} rounds on clients {cfg.clients}; outputs in {out}")
    return 0


def cmd_evaluate(args):
    cfg = _config(args)
    ckpt = Path(args.checkpoint or Path(cfg.output_dir) / "checkpoint.fdgm")
    try:
        params = load_checkpoint(ckpt)
    except (OSError, CheckpointError) as exc:
        raise CommandError(f"cannot load checkpoint {ckpt}: {exc}") from exc
    samples = load_samples(args.dataset or cfg.dataset)
    if args.domains is not None:
        wanted = set(args.domains)
    elif args.dataset is not None:
        wanted = None  # an explicitly named dataset is scored in full
    else:
        wanted = {cfg.held_out} if args.split == "all" else set(cfg.clients)
    selected = []
    for dom, group in sorted(by_domain(samples).items()):
        if wanted is not None and dom not in wanted:
            continue
        if args.split != "all":
            train, test = data.split(group, cfg.train_fraction, cfg.seed)
            group = train if args.split == "train" else test
        selected.extend(group)
    if not selected:
        raise CommandError("no samples selected for evaluation")
    channels = selected[0].image.shape[0]
    if params.shape[0] != num_params(channels):
        raise CommandError(
            f"checkpoint has {params.shape[0]} weights, {channels}-channel images need {num_params(channels)}"
        )
    reports = evaluate_samples(params, selected)
    out = Path(args.csv or Path(cfg.output_dir) / f"eval_{args.split}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    agg = write_evaluation_csv(out, [s.sample_id for s in selected], reports)
    hd = "n/a" if agg.hd is None else f"{agg.hd:.3f}"
    print(f"{len(selected)} images: IoU {agg.iou:.4f} DSC {agg.dsc:.4f} HD {hd} "
          f"({agg.n_hd_skipped} empty-mask rows); wrote {out}")
    return 0


def cmd_report(args):
    table = {}
    domains, methods = [], []
    for method, domain, path in args.input:
        _, agg = read_evaluation_csv(path)
        table[domain, method] = agg
        if domain not in domains:
            domains.append(domain)
        if method not in methods:
            methods.append(method)
    metrics = [name for name, _ in METRIC_DIRECTIONS]
    rows = []
    for domain in domains:
        for method in methods:
            agg = table.get((domain, method))
            if agg is not None:
                rows.append([domain, method] + [agg[m] for m in metrics])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["domain", "method"] + metrics)
            w.writerows(rows)
    print(format_table(rows, metrics))
    return 0


def format_table(rows, metrics):
    """Plain-text table; the best value per domain and metric is starred."""
    best = {}
    for i, (name, higher) in enumerate(METRIC_DIRECTIONS):
        for domain in {r[0] for r in rows}:
            vals = [r[2 + i] for r in rows if r[0] == domain and r[2 + i] is not None]
            if vals:
                best[domain, name] = max(vals) if higher else min(vals)
    head = f"{'domain':<12}{'method':<16}" + "".join(
        f"{m.upper() + ('v' if not up else '^'):>11}" for m, up in METRIC_DIRECTIONS
    )
    lines = [head, "-" * len(head)]
    for r in rows:
        cells = []
        for name, v in zip(metrics, r[2:]):
            txt = "n/a" if v is None else f"{v:.4f}"
            if v is not None and best.get((r[0], name)) == v:
                txt = "*" + txt
            cells.append(f"{txt:>11}")
        lines.append(f"{str(r[0]):<12}{str(r[1]):<16}" + "".join(cells))
    return "\n".join(lines)


def build_parser():
    ap = argparse.ArgumentParser(prog="freqfed", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required, help="YAML experiment config")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("gen-data", help="write the synthetic corpus")
    common(p, False)
    p.add_argument("--out", default=None, help="dataset directory (default: config 'dataset')")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("augment", help="five-panel synthesis preview")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lam", type=float, default=None, help="mixing weight in (0, 1]; drawn from --seed if omitted")
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--variant", default=MixVariant.LITERAL.value, choices=[v.value for v in MixVariant])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="run the federation")
    common(p, True)
    p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="metrics CSV for a checkpoint")
    common(p, True)
    p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--dataset", default=None, help="manifest dir or images/ + masks/ dir")
    p.add_argument("--domains", type=int, nargs="+", default=None)
    p.add_argument("--split", choices=["all", "train", "test"], default="all")
    p.add_argument("--csv", default=None, help="CSV path (default: <output_dir>/eval_<split>.csv)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="comparison table from evaluation CSVs")
    p.add_argument("--input", nargs=3, action="append", required=True, metavar=("METHOD", "DOMAIN", "CSV"))
    p.add_argument("--out", default=None, help="write the joined table as CSV")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CommandError, ConfigError, data.NetpbmError, data.MissingMask, data.ShapeMismatch) as exc:
        print(f"freqfed {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"freqfed {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
