"""Leave-one-domain-out comparison of augmentation settings.

Trains one federation per (configuration, seed) on the client domains and
scores the global model on every sample of the held-out domain. Run as
``python -m freqfed.experiment --help``.
"""

import argparse
import csv
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import data
from .federation import ClientState, FederationConfig, run_federation
from .metrics import aggregate_report, binarize, evaluate_pair, METRIC_DIRECTIONS
from .model import num_params, predict

log = logging.getLogger(__name__)

# label -> federation overrides; mirrors the rows of a method comparison table
CONFIGURATIONS = {
    "baseline": {"augment": False},
    "dft": {"augment": True, "threshold_mode": "none"},
    "dft-st": {"augment": True, "threshold_mode": "soft"},
    "dft-ht": {"augment": True, "threshold_mode": "hard"},
}
NON_INFERIORITY_MARGIN = 0.02


def make_corpus(preset, seed, per_domain=data.DEFAULT_PER_DOMAIN, size=data.DEFAULT_SIZE):
    return {
        d.domain_id: data.generate_domain(d, per_domain, size, size)
        for d in data.preset_domains(preset, seed)
    }


def build_clients(corpus, client_domains, train_fraction, seed):
    """One client per domain holding that domain's train split; also returns the test splits."""
    clients, tests = [], {}
    for dom in client_domains:
        train, test = data.split(corpus[dom], train_fraction, seed)
        clients.append(ClientState(dom, [s.image for s in train], [s.mask for s in train]))
        tests[dom] = test
    return clients, tests


def evaluate_samples(params, samples):
    return [evaluate_pair(binarize(predict(params, s.image)), s.mask) for s in samples]


def constant_predictor(channels):
    """All-zero weights: probability 0.5 everywhere."""
    return np.zeros(num_params(channels))


@dataclass
class LodoResult:
    preset: str
    held_out: int
    variant: str
    seeds: list
    reports: dict = field(default_factory=dict)  # (label, seed) -> aggregate MetricsReport
    constant: dict = field(default_factory=dict)  # seed -> aggregate MetricsReport
    runtime: float = 0.0

    def mean(self, label, metric="iou"):
        return float(np.mean([getattr(self.reports[label, s], metric) for s in self.seeds]))

    def constant_mean(self, metric="iou"):
        return float(np.mean([getattr(self.constant[s], metric) for s in self.seeds]))

    @property
    def labels(self):
        return list(dict.fromkeys(label for label, _ in self.reports))


def run_lodo(
    preset="default",
    seeds=(1, 2, 3, 4, 5),
    configurations=CONFIGURATIONS,
    held_out=3,
    client_domains=(0, 1, 2),
    rounds=20,
    variant="preserve-outside-mask",
    mu=0.0,
    per_domain=data.DEFAULT_PER_DOMAIN,
    size=data.DEFAULT_SIZE,
    train_fraction=0.9,
):
    start = time.perf_counter()
    result = LodoResult(preset, held_out, variant, list(seeds))
    for seed in seeds:
        corpus = make_corpus(preset, seed, per_domain, size)
        target = corpus[held_out]
        channels = target[0].image.shape[0]
        result.constant[seed] = aggregate_report(evaluate_samples(constant_predictor(channels), target))
        for label, overrides in configurations.items():
            clients, _ = build_clients(corpus, client_domains, train_fraction, seed)
            cfg = replace(
                FederationConfig(rounds=rounds, seed=seed, mix_variant=variant, mu=mu), **overrides
            )
            params, _ = run_federation(cfg, clients)
            rep = aggregate_report(evaluate_samples(params, target))
            result.reports[label, seed] = rep
            log.info("seed %d %-9s held-out IoU %.4f", seed, label, rep.iou)
    result.runtime = time.perf_counter() - start
    return result


def claim_holds(result, augmented=("dft-st", "dft-ht"), others=("baseline", "dft")):
    """Do the thresholded settings beat every other setting on mean held-out IoU?"""
    best_other = max(result.mean(label) for label in others if label in result.labels)
    return all(result.mean(label) > best_other for label in augmented)


def summary_lines(result):
    lines = [
        f"preset={result.preset} held_out={result.held_out} variant={result.variant} "
        f"seeds={result.seeds} runtime={result.runtime:.1f}s",
        f"constant-0.5 predictor: mean IoU {result.constant_mean():.4f}",
    ]
    for label in result.labels:
        per_seed = " ".join(f"{result.reports[label, s].iou:.4f}" for s in result.seeds)
        lines.append(f"{label:<9} mean IoU {result.mean(label):.4f}  [{per_seed}]")
    if {"dft-st", "dft-ht"} <= set(result.labels):
        verdict = "holds" if claim_holds(result) else "does not hold"
        lines.append(f"thresholded settings better than all others on this corpus: {verdict}")
    return lines


def write_results_csv(path, result):
    metrics = [name for name, _ in METRIC_DIRECTIONS]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["configuration", "seed"] + metrics)
        for s in result.seeds:
            w.writerow(["constant", s] + [getattr(result.constant[s], m) for m in metrics])
        for (label, s), rep in result.reports.items():
            w.writerow([label, s] + [getattr(rep, m) for m in metrics])


def main(argv=None):
    ap = argparse.ArgumentParser(prog="python -m freqfed.experiment", description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="default", choices=sorted(data.PRESETS))
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3, 4, 5])
    ap.add_argument("--rounds", type=int, default=20)
    ap.add_argument("--variant", default="preserve-outside-mask", choices=["literal", "preserve-outside-mask"])
    ap.add_argument("--mu", type=float, default=0.0)
    ap.add_argument("--held-out", type=int, default=3)
    ap.add_argument("--out", type=Path, default=None, help="directory for results.csv and summary.txt")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    clients = tuple(d for d in range(len(data.PRESETS[args.preset])) if d != args.held_out)
    result = run_lodo(args.preset, args.seeds, held_out=args.held_out, client_domains=clients,
                      rounds=args.rounds, variant=args.variant, mu=args.mu)
    lines = summary_lines(result)
    print("\n".join(lines))
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        write_results_csv(args.out / "results.csv", result)
        (args.out / "summary.txt").write_text("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
