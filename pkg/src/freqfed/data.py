"""Synthetic multi-domain segmentation corpus, netpbm I/O and splitting.

Each domain has its own background colour, brightness and smooth texture, and
its own foreground colour; foregrounds are 1-3 rotated ellipses.
"""

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class NetpbmError(ValueError):
    pass


class MalformedHeader(NetpbmError):
    pass


class TruncatedPayload(NetpbmError):
    pass


class MissingMask(FileNotFoundError):
    pass


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DomainSpec:
    domain_id: int
    base_color: tuple = (0.5, 0.35, 0.3)
    brightness: float = 0.0
    texture_amp: float = 0.05
    blob_count: tuple = (1, 3)
    radius_range: tuple = (5.0, 12.0)
    fg_color: tuple = (0.85, 0.3, 0.25)
    noise_sigma: float = 0.02
    seed: int = 0

    def validate(self):
        lo, hi = self.blob_count
        if not 1 <= lo <= hi:
            raise ValueError(f"blob_count must satisfy 1 <= lo <= hi, got {self.blob_count}")
        rlo, rhi = self.radius_range
        if not 0 < rlo <= rhi:
            raise ValueError(f"radius_range must satisfy 0 < lo <= hi, got {self.radius_range}")
        if len(self.base_color) != len(self.fg_color):
            raise ValueError("base_color and fg_color need the same channel count")
        if self.noise_sigma < 0 or self.texture_amp < 0:
            raise ValueError("noise_sigma and texture_amp must be non-negative")
        for name, color in (("base_color", self.base_color), ("fg_color", self.fg_color)):
            if any(not 0.0 <= v <= 1.0 for v in color):
                raise ValueError(f"{name} components must lie in [0, 1]")
        if any(not 0.0 <= v + self.brightness <= 1.0 for v in self.base_color):
            raise ValueError("base_color + brightness leaves [0, 1]")

    @property
    def channels(self):
        return len(self.base_color)

    @property
    def background_mean(self):
        return float(np.mean(self.base_color)) + self.brightness


@dataclass
class Sample:
    image: np.ndarray
    mask: np.ndarray
    domain: int
    sample_id: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.image.shape[1:] != self.mask.shape:
            raise ShapeMismatch(
                f"{self.sample_id}: image {self.image.shape} vs mask {self.mask.shape}"
            )


# Background means 0.24 / 0.39 / 0.52 / 0.65: pairwise gaps >= 0.12.
DEFAULT_DOMAINS = (
    DomainSpec(0, base_color=(0.40, 0.22, 0.20), brightness=-0.03, fg_color=(0.80, 0.30, 0.24),
               texture_amp=0.04, noise_sigma=0.02, seed=101),
    DomainSpec(1, base_color=(0.52, 0.36, 0.30), brightness=0.0, fg_color=(0.88, 0.42, 0.33),
               texture_amp=0.06, noise_sigma=0.03, seed=202),
    DomainSpec(2, base_color=(0.62, 0.46, 0.42), brightness=0.02, fg_color=(0.93, 0.50, 0.40),
               texture_amp=0.05, noise_sigma=0.02, seed=303),
    DomainSpec(3, base_color=(0.74, 0.60, 0.56), brightness=0.02, fg_color=(0.97, 0.62, 0.50),
               texture_amp=0.07, noise_sigma=0.025, seed=404),
)

def _cast_domains():
    # one scene seen through four per-channel camera gains
    scene_bg = np.array([0.55, 0.40, 0.35])
    scene_fg = np.array([0.78, 0.42, 0.35])
    gains = ((0.62, 0.60, 0.66), (0.85, 0.92, 1.02), (1.22, 1.15, 1.08), (1.38, 1.45, 1.45))
    return tuple(
        DomainSpec(
            k,
            base_color=tuple(float(v) for v in np.clip(scene_bg * g, 0, 1)),
            fg_color=tuple(float(v) for v in np.clip(scene_fg * g, 0, 1)),
            texture_amp=0.05,
            noise_sigma=0.06,
            seed=101 * (k + 1),
        )
        for k, g in enumerate(np.asarray(gains))
    )


CAST_DOMAINS = _cast_domains()
PRESETS = {"default": DEFAULT_DOMAINS, "cast": CAST_DOMAINS}
DEFAULT_SIZE = 64
DEFAULT_PER_DOMAIN = 60


def preset_domains(name="default", seed_offset=0):
    """Domain specs of a named preset, with every seed shifted by ``seed_offset``."""
    try:
        domains = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return tuple(replace(d, seed=d.seed + seed_offset) for d in domains)


def default_domains(seed_offset=0):
    return preset_domains("default", seed_offset)


def ellipse_mask(H, W, cy, cx, ry, rx, theta):
    """Pixels whose centres fall inside the rotated ellipse."""
    hh, ww = np.mgrid[0:H, 0:W].astype(np.float64)
    dy, dx = hh - cy, ww - cx
    c, s = np.cos(theta), np.sin(theta)
    u = (dy * c + dx * s) / ry
    v = (-dy * s + dx * c) / rx
    return u * u + v * v <= 1.0


def _texture(rng, H, W):
    hh, ww = np.mgrid[0:H, 0:W].astype(np.float64)
    tex = np.zeros((H, W))
    for _ in range(3):
        fy, fx = rng.integers(0, 3, size=2)
        if fy == 0 and fx == 0:
            fx = 1
        phi = rng.uniform(0, 2 * np.pi)
        tex += np.cos(2 * np.pi * (fy * hh / H + fx * ww / W) + phi)
    return tex / 3.0


def _render(spec, rng, H, W, clamp):
    lo, hi = spec.blob_count
    n_blobs = int(rng.integers(lo, hi + 1))
    mask = np.zeros((H, W), dtype=bool)
    blobs = []
    for _ in range(n_blobs):
        ry, rx = rng.uniform(*spec.radius_range, size=2)
        margin = min(max(ry, rx), min(H, W) / 2 - 1)
        cy = rng.uniform(margin, H - 1 - margin)
        cx = rng.uniform(margin, W - 1 - margin)
        theta = rng.uniform(0, np.pi)
        blobs.append((cy, cx, ry, rx, theta))
        mask |= ellipse_mask(H, W, cy, cx, ry, rx, theta)
    tex = _texture(rng, H, W)
    noise = rng.standard_normal((spec.channels, H, W))

    base = np.asarray(spec.base_color)[:, None, None] + spec.brightness
    bg = base + spec.texture_amp * tex[None]
    fg = np.asarray(spec.fg_color)[:, None, None] + 0.5 * spec.texture_amp * tex[None]
    img = np.where(mask[None], fg, bg) + spec.noise_sigma * noise
    if clamp:
        img = np.clip(img, 0.0, 1.0)
    return img, mask.astype(np.uint8), blobs


def generate_domain(spec, n, H=DEFAULT_SIZE, W=DEFAULT_SIZE, clamp=True):
    """``n`` samples from one domain; a pure function of its arguments."""
    spec.validate()
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng([spec.seed, spec.domain_id])
    out = []
    for i in range(n):
        img, mask, blobs = _render(spec, rng, H, W, clamp)
        out.append(Sample(img, mask, spec.domain_id, f"d{spec.domain_id}_{i:04d}", {"blobs": blobs}))
    return out


def split(samples, train_fraction=0.9, seed=0):
    """Seeded shuffle, then the first ``train_fraction`` go to train."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    samples = list(samples)
    n = len(samples)
    n_train = int(round(n * train_fraction))
    if n >= 2:
        n_train = min(max(n_train, 1), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    return [samples[i] for i in order[:n_train]], [samples[i] for i in order[n_train:]]


# --- netpbm ---------------------------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _parse_header(data):
    pos = 0
    tokens = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise MalformedHeader("header ends early")
        tokens.append(m.group(1))
        pos = m.end()
    if pos >= len(data) or data[pos : pos + 1] not in b" \t\r\n":
        raise MalformedHeader("missing whitespace after maxval")
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise MalformedHeader(f"unsupported magic {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MalformedHeader(f"non-integer header field: {exc}") from None
    if width < 1 or height < 1 or not 0 < maxval < 256:
        raise MalformedHeader(f"bad dimensions or maxval: {width}x{height} max {maxval}")
    return magic, width, height, maxval, pos + 1


def read_netpbm(path):
    """(channels, H, W) uint8 array and maxval from a binary P5/P6 file."""
    data = Path(path).read_bytes()
    magic, width, height, maxval, off = _parse_header(data)
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    payload = data[off : off + need]
    if len(payload) < need:
        raise TruncatedPayload(f"{path}: expected {need} bytes, found {len(payload)}")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return np.ascontiguousarray(arr.transpose(2, 0, 1)), maxval


def _write_netpbm(path, arr8):
    channels, H, W = arr8.shape
    magic = {3: b"P6", 1: b"P5"}.get(channels)
    if magic is None:
        raise ValueError(f"netpbm supports 1 or 3 channels, got {channels}")
    header = magic + f"\n{W} {H}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + np.ascontiguousarray(arr8.transpose(1, 2, 0)).tobytes())


def quantize(img):
    return np.round(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def write_image(path, img):
    """P6 for 3-channel images, P5 for single-channel ones."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[None]
    _write_netpbm(path, quantize(img))


def read_image(path):
    arr, maxval = read_netpbm(path)
    return arr.astype(np.float64) / maxval


def write_mask(path, mask):
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be H x W, got {mask.shape}")
    _write_netpbm(path, np.where(mask > 0, 255, 0).astype(np.uint8)[None])


def read_mask(path):
    arr, maxval = read_netpbm(path)
    if arr.shape[0] != 1:
        arr = arr.max(axis=0, keepdims=True)
    return (arr[0].astype(np.int32) * 2 > maxval).astype(np.uint8)


# --- datasets on disk ---------------------------------------------------

MANIFEST_NAME = "manifest.tsv"


def write_dataset(root, samples_by_domain):
    """Write ``domain_<k>/{images,masks}`` plus a manifest; returns the manifest path."""
    root = Path(root)
    lines = ["# id\tdomain\timage\tmask"]
    for domain, samples in samples_by_domain.items():
        ddir = root / f"domain_{domain}"
        (ddir / "images").mkdir(parents=True, exist_ok=True)
        (ddir / "masks").mkdir(parents=True, exist_ok=True)
        for s in samples:
            ip = ddir / "images" / f"{s.sample_id}.ppm"
            mp = ddir / "masks" / f"{s.sample_id}.pgm"
            write_image(ip, s.image)
            write_mask(mp, s.mask)
            lines.append(
                f"{s.sample_id}\t{s.domain}\t{ip.relative_to(root).as_posix()}\t"
                f"{mp.relative_to(root).as_posix()}"
            )
    manifest = root / MANIFEST_NAME
    tmp = manifest.with_suffix(".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(manifest)
    return manifest


def read_manifest(path):
    path = Path(path)
    root = path.parent
    samples = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields")
        sid, domain, ip, mp = parts
        samples.append(Sample(read_image(root / ip), read_mask(root / mp), int(domain), sid))
    return samples


IMAGE_SUFFIXES = (".ppm", ".pgm", ".pnm")


def load_external_dataset(root, domain=-1):
    """Pair ``images/<stem>.*`` with ``masks/<stem>.*`` under ``root``."""
    root = Path(root)
    idir, mdir = root / "images", root / "masks"
    if not idir.is_dir() or not mdir.is_dir():
        raise FileNotFoundError(f"{root} needs images/ and masks/ subdirectories")
    images = {p.stem: p for p in sorted(idir.iterdir()) if p.suffix.lower() in IMAGE_SUFFIXES}
    masks = {p.stem: p for p in sorted(mdir.iterdir()) if p.suffix.lower() in IMAGE_SUFFIXES}
    orphans = sorted(set(masks) - set(images))
    if orphans:
        log.warning("masks without images ignored: %s", ", ".join(orphans))
    samples = []
    for stem, ip in images.items():
        if stem not in masks:
            raise MissingMask(f"no mask for image {stem!r}")
        img = read_image(ip)
        mask = read_mask(masks[stem])
        if img.shape[1:] != mask.shape:
            raise ShapeMismatch(f"{stem}: image {img.shape[1:]} vs mask {mask.shape}")
        samples.append(Sample(img, mask, domain, stem))
    return samples
