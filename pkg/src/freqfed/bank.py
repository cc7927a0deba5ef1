"""Server-side store of phase-free, low-frequency amplitude patches.

Snapshot layout (little-endian)::

    b"FDGB" | version u16 | entry count u32
    per entry: client u16 | C u16 | H u16 | W u16 | beta f64 | C*H*W f64 amplitudes
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .augment import make_low_freq_mask
from .spectral import forward_dft

MAGIC = b"FDGB"
VERSION = 1
_HEADER = struct.Struct("<4sHI")
_ENTRY = struct.Struct("<HHHHd")


class NoForeignEntries(LookupError):
    pass


class UnregisteredClient(KeyError):
    pass


class BankFormatError(ValueError):
    pass


@dataclass(frozen=True)
class AmplitudeBankEntry:
    origin_client: int
    masked_amplitude: np.ndarray
    mask_beta: float

    @property
    def shape(self):
        return self.masked_amplitude.shape


class AmplitudeBank:
    """Entries grouped by contributing client; draws are cross-client only."""

    def __init__(self, clients=()):
        self._clients = set()
        self._entries = []
        for c in clients:
            self.register(c)

    def register(self, client):
        client = int(client)
        if not 0 <= client <= 0xFFFF:
            raise ValueError(f"client id must fit in u16, got {client}")
        self._clients.add(client)

    @property
    def clients(self):
        return sorted(self._clients)

    @property
    def entries(self):
        return tuple(self._entries)

    def __len__(self):
        return len(self._entries)

    def contribute(self, client, img, mask):
        """Add the masked amplitude of ``img``; its phase is discarded here."""
        if int(client) not in self._clients:
            raise UnregisteredClient(client)
        amp = forward_dft(img).amplitude * mask.bits
        entry = AmplitudeBankEntry(int(client), amp, float(mask.beta))
        self._entries.append(entry)
        return entry

    def add_entry(self, entry):
        if entry.origin_client not in self._clients:
            raise UnregisteredClient(entry.origin_client)
        self._entries.append(entry)

    def foreign_entries(self, client):
        return [e for e in self._entries if e.origin_client != client]

    def draw_foreign(self, client, rng):
        """Uniformly random entry contributed by any client other than ``client``."""
        pool = self.foreign_entries(client)
        if not pool:
            raise NoForeignEntries(f"no entries from clients other than {client}")
        return pool[int(rng.integers(len(pool)))]

    def save(self, path):
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, len(self._entries)))
            for e in self._entries:
                C, H, W = e.masked_amplitude.shape
                fh.write(_ENTRY.pack(e.origin_client, C, H, W, e.mask_beta))
                fh.write(np.ascontiguousarray(e.masked_amplitude, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path):
        data = Path(path).read_bytes()
        if len(data) < _HEADER.size:
            raise BankFormatError("truncated bank header")
        magic, version, count = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise BankFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise BankFormatError(f"unsupported bank version {version}")
        bank = cls()
        off = _HEADER.size
        for _ in range(count):
            if off + _ENTRY.size > len(data):
                raise BankFormatError("truncated entry header")
            client, C, H, W, beta = _ENTRY.unpack_from(data, off)
            off += _ENTRY.size
            nbytes = 8 * C * H * W
            if off + nbytes > len(data):
                raise BankFormatError("truncated amplitude payload")
            amp = np.frombuffer(data, dtype="<f8", count=C * H * W, offset=off)
            off += nbytes
            bank.register(client)
            bank._entries.append(
                AmplitudeBankEntry(client, amp.astype(np.float64).reshape(C, H, W), beta)
            )
        if off != len(data):
            raise BankFormatError(f"{len(data) - off} trailing bytes after last entry")
        return bank


def build_bank(images_by_client, beta):
    """Bank with one entry per image, for a ``{client_id: images}`` mapping."""
    bank = AmplitudeBank(images_by_client)
    for client, images in images_by_client.items():
        for img in images:
            bank.contribute(client, img, make_low_freq_mask(img.shape[-2], img.shape[-1], beta))
    return bank
