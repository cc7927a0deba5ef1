"""Simulated K-client federation: broadcast, augment + two local passes, aggregate.

Every client trains on its synthesized set first and its original set second,
starting from the broadcast global model. FedProx adds a proximal pull toward
that broadcast model; with ``mu == 0`` the code path is plain FedAvg.
"""

import csv
import hashlib
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .augment import AugmentParams, MixVariant, generate_augmented, make_low_freq_mask, sample_lambda
from .bank import build_bank
from .model import featurize, init_params, loss_and_grad, sgd_step
from .threshold import ThresholdSpec

log = logging.getLogger(__name__)

THRESHOLD_MODES = ("none", "soft", "hard")
WEIGHT_SCHEMES = ("size", "uniform")


class FederationError(RuntimeError):
    def __init__(self, msg, round_index, client, records):
        super().__init__(msg)
        self.round_index = round_index
        self.client = client
        self.records = records


@dataclass
class FederationConfig:
    rounds: int = 20
    local_lr: float = 0.5
    mu: float = 0.0
    augment: bool = True
    beta: float = 0.1
    alpha: float = 0.05
    threshold_mode: str = "hard"
    mix_variant: str = "literal"
    aggregation: str | list = "size"
    seed: int = 0
    aug_per_image: int = 1
    fixed_lambda: float | None = None
    workers: int = 1

    def validate(self):
        errors = []
        if self.rounds < 0:
            errors.append(f"rounds must be >= 0, got {self.rounds}")
        if not self.local_lr > 0:
            errors.append(f"local_lr must be > 0, got {self.local_lr}")
        if self.mu < 0:
            errors.append(f"mu must be >= 0, got {self.mu}")
        elif self.local_lr * self.mu >= 2:
            # the proximal part of each step multiplies (theta - center) by 1 - lr*mu
            errors.append(f"local_lr * mu must be < 2 for a stable proximal step, got {self.local_lr * self.mu:g}")
        if not 0 < self.beta <= 1:
            errors.append(f"beta must lie in (0, 1], got {self.beta}")
        if not 0 <= self.alpha <= 0.05:
            errors.append(f"alpha must lie in [0, 0.05], got {self.alpha}")
        if self.threshold_mode not in THRESHOLD_MODES:
            errors.append(f"threshold_mode must be one of {THRESHOLD_MODES}")
        if self.mix_variant not in {v.value for v in MixVariant}:
            errors.append(f"mix_variant must be one of {[v.value for v in MixVariant]}")
        if isinstance(self.aggregation, str):
            if self.aggregation not in WEIGHT_SCHEMES:
                errors.append(f"aggregation must be one of {WEIGHT_SCHEMES} or a weight list")
        else:
            try:
                check_weights(self.aggregation)
            except ValueError as exc:
                errors.append(str(exc))
        if self.aug_per_image < 1:
            errors.append(f"aug_per_image must be >= 1, got {self.aug_per_image}")
        if self.fixed_lambda is not None and not 0 < self.fixed_lambda <= 1:
            errors.append(f"fixed_lambda must lie in (0, 1], got {self.fixed_lambda}")
        if self.workers < 1:
            errors.append(f"workers must be >= 1, got {self.workers}")
        return errors

    def threshold_spec(self):
        if self.threshold_mode == "none":
            return None
        return ThresholdSpec(self.threshold_mode, self.alpha)


@dataclass
class ClientState:
    client_id: int
    images: list
    masks: list
    params: np.ndarray | None = None
    log: list = field(default_factory=list)
    _feats: list | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.images:
            raise ValueError(f"client {self.client_id} has an empty dataset")
        if len(self.images) != len(self.masks):
            raise ValueError(f"client {self.client_id}: {len(self.images)} images, {len(self.masks)} masks")

    @property
    def size(self):
        return len(self.images)

    @property
    def features(self):
        if self._feats is None:
            self._feats = [featurize(img) for img in self.images]
        return self._feats


@dataclass
class RoundRecord:
    round_index: int
    client_losses: list
    checksum: str
    wall_time: float


def check_weights(weights):
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("aggregation weights must be a non-empty vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("aggregation weights must be finite and non-negative")
    if abs(math.fsum(w) - 1.0) > 1e-12:
        raise ValueError(f"aggregation weights sum to {math.fsum(w)!r}, not 1")
    return w


def resolve_weights(cfg, clients):
    if isinstance(cfg.aggregation, str):
        if cfg.aggregation == "uniform":
            return np.full(len(clients), 1.0 / len(clients))
        sizes = np.array([c.size for c in clients], dtype=np.float64)
        return sizes / sizes.sum()
    w = check_weights(cfg.aggregation)
    if w.size != len(clients):
        raise ValueError(f"{w.size} aggregation weights for {len(clients)} clients")
    return w


def aggregate(params_list, weights):
    """Weighted sum of client parameter vectors.

    Each coordinate is a correctly rounded sum (``math.fsum``), so the result
    does not depend on client order; coordinates on which all clients agree
    are returned unchanged.
    """
    P = np.asarray(params_list, dtype=np.float64)
    w = check_weights(weights)
    if P.ndim != 2:
        raise ValueError("params_list must be a sequence of equal-length vectors")
    if P.shape[0] != w.size:
        raise ValueError(f"{P.shape[0]} parameter vectors for {w.size} weights")
    terms = w[:, None] * P
    out = np.array([math.fsum(terms[:, i]) for i in range(P.shape[1])])
    agree = np.all(P == P[0], axis=0)
    out[agree] = P[0, agree]
    return out


def checksum(params):
    return hashlib.sha256(np.ascontiguousarray(params, dtype="<f8").tobytes()).hexdigest()[:16]


def round_rng(seed, round_index, client_id):
    return np.random.default_rng([int(seed), int(round_index), int(client_id)])


def _sgd_pass(theta, feats_list, masks, cfg, prox_center):
    for feats, mask in zip(feats_list, masks):
        if cfg.mu > 0:
            _, g = loss_and_grad(theta, mask=mask, feats=feats, prox_center=prox_center, mu=cfg.mu)
        else:
            _, g = loss_and_grad(theta, mask=mask, feats=feats)
        theta = sgd_step(theta, g, cfg.local_lr)
    return theta


def _mean_loss(theta, feats_list, masks):
    return math.fsum(loss_and_grad(theta, mask=m, feats=f)[0] for f, m in zip(feats_list, masks)) / len(masks)


def synthesize(client, bank, cfg, rng):
    """Augmented copies of the client's images (``aug_per_image`` each)."""
    thr = cfg.threshold_spec()
    images, masks = [], []
    mask_cache = {}
    for _ in range(cfg.aug_per_image):
        for img, seg in zip(client.images, client.masks):
            entry = bank.draw_foreign(client.client_id, rng)
            lam = cfg.fixed_lambda if cfg.fixed_lambda is not None else sample_lambda(rng)
            key = img.shape[-2:]
            if key not in mask_cache:
                mask_cache[key] = make_low_freq_mask(*key, cfg.beta)
            params = AugmentParams(lam, thr, mask_cache[key], cfg.mix_variant)
            images.append(generate_augmented(img, entry.masked_amplitude, params))
            masks.append(seg)
    return images, masks


def local_round(client, global_params, bank, cfg, rng):
    """One client's update from the broadcast model.

    Returns the new local parameters and ``(loss_augmented, loss_original)``,
    both evaluated with those parameters (the first is None when augmentation
    is off).
    """
    global_params = np.asarray(global_params, dtype=np.float64)
    theta = global_params.copy()
    prox = global_params if cfg.mu > 0 else None
    loss_aug = None
    if cfg.augment:
        aug_images, aug_masks = synthesize(client, bank, cfg, rng)
        aug_feats = [featurize(img) for img in aug_images]
        theta = _sgd_pass(theta, aug_feats, aug_masks, cfg, prox)
    theta = _sgd_pass(theta, client.features, client.masks, cfg, prox)
    if cfg.augment:
        loss_aug = _mean_loss(theta, aug_feats, aug_masks)
    loss_orig = _mean_loss(theta, client.features, client.masks)
    return theta, (loss_aug, loss_orig)


def run_federation(cfg, clients, init=None, bank=None):
    """Run ``cfg.rounds`` rounds; returns the final global params and the round log."""
    errors = cfg.validate()
    if errors:
        raise ValueError("invalid federation config: " + "; ".join(errors))
    if not clients:
        raise ValueError("need at least one client")
    ids = [c.client_id for c in clients]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate client ids: {ids}")
    weights = resolve_weights(cfg, clients)
    channels = clients[0].images[0].shape[0]
    theta = init_params(channels, cfg.seed) if init is None else np.array(init, dtype=np.float64)
    if cfg.augment and bank is None and cfg.rounds > 0:
        bank = build_bank({c.client_id: c.images for c in clients}, cfg.beta)

    records = []
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for t in range(cfg.rounds):
            start = time.perf_counter()

            def work(client, t=t, theta=theta):
                return local_round(client, theta, bank, cfg, round_rng(cfg.seed, t, client.client_id))

            results = []
            jobs = pool.map(work, clients) if pool else map(work, clients)
            for client in clients:
                try:
                    results.append(next(jobs))
                except Exception as exc:
                    raise FederationError(
                        f"client {client.client_id} failed in round {t}: {exc}", t, client.client_id, records
                    ) from exc
            for client, (params, losses) in zip(clients, results):
                client.params = params
                client.log.append(losses)
            theta = aggregate([p for p, _ in results], weights)
            records.append(
                RoundRecord(t, [losses for _, losses in results], checksum(theta), time.perf_counter() - start)
            )
            log.debug("round %d checksum %s", t, records[-1].checksum)
    finally:
        if pool:
            pool.shutdown()
    return theta, records


ROUND_LOG_FIELDS = ["round", "client", "loss_augmented", "loss_original", "agg_checksum"]


def write_round_log(path, records, client_ids):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROUND_LOG_FIELDS)
        for rec in records:
            for cid, (la, lo) in zip(client_ids, rec.client_losses):
                w.writerow([rec.round_index, cid, "" if la is None else repr(la), repr(lo), rec.checksum])


def read_round_log(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
