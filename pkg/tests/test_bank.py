import dataclasses

import numpy as np
import pytest

import oracles
from freqfed.augment import full_mask, make_low_freq_mask
from freqfed.bank import (
    AmplitudeBank,
    AmplitudeBankEntry,
    BankFormatError,
    NoForeignEntries,
    UnregisteredClient,
    build_bank,
)
from freqfed.data import DEFAULT_DOMAINS, generate_domain


def test_full_band_constant_image():
    bank = AmplitudeBank([0])
    e = bank.contribute(0, np.ones((3, 4, 4)), full_mask(4, 4))
    assert np.allclose(e.masked_amplitude[:, 0, 0], 16)
    assert np.allclose(e.masked_amplitude.reshape(3, -1)[:, 1:], 0)


def test_band_limited_entry(rng):
    bank = AmplitudeBank([2])
    e = bank.contribute(2, rng.random((1, 8, 8)) + 0.1, make_low_freq_mask(8, 8, 0.25))
    band = {(u, v) for u in oracles.band_indices(8, 0.25) for v in oracles.band_indices(8, 0.25)}
    nz = {(int(u), int(v)) for u, v in zip(*np.nonzero(e.masked_amplitude[0]))}
    assert nz <= band and len(band) == 9
    outside = np.ones((8, 8), bool)
    for u, v in band:
        outside[u, v] = False
    assert np.all(e.masked_amplitude[0][outside] == 0.0)


def test_entry_has_no_phase_field():
    assert {f.name for f in dataclasses.fields(AmplitudeBankEntry)} == {
        "origin_client", "masked_amplitude", "mask_beta"
    }


def test_unregistered_client(rng):
    bank = AmplitudeBank([0])
    with pytest.raises(UnregisteredClient):
        bank.contribute(1, rng.random((1, 4, 4)), full_mask(4, 4))


def _bank(rng, clients=(0, 1, 2), per=3):
    return build_bank({c: [rng.random((3, 8, 8)) for _ in range(per)] for c in clients}, 0.25)


def test_draw_excludes_own_client(rng):
    bank = _bank(rng)
    draw_rng = np.random.default_rng(1)
    assert {bank.draw_foreign(0, draw_rng).origin_client for _ in range(500)} == {1, 2}


def test_single_client_bank_has_no_foreign(rng):
    with pytest.raises(NoForeignEntries):
        _bank(rng, clients=(4,)).draw_foreign(4, np.random.default_rng(0))


def test_draw_uniform_over_two_foreign_clients(rng):
    bank = _bank(rng, per=2)
    draw_rng = np.random.default_rng(2024)
    origins = np.array([bank.draw_foreign(0, draw_rng).origin_client for _ in range(10_000)])
    assert abs(np.mean(origins == 1) - 0.5) <= 0.02


def test_draw_deterministic_under_seed(rng):
    bank = _bank(rng)
    a = [id(bank.draw_foreign(1, np.random.default_rng(9))) for _ in range(3)]
    assert len(set(a)) == 1


def test_snapshot_round_trip_bit_exact(rng, tmp_path):
    bank = _bank(rng)
    bank.register(7)
    bank.add_entry(AmplitudeBankEntry(7, rng.standard_normal((1, 5, 3)), 0.4))
    path = tmp_path / "bank.fdgb"
    bank.save(path)
    loaded = AmplitudeBank.load(path)
    assert len(loaded) == len(bank)
    for a, b in zip(bank.entries, loaded.entries):
        assert a.origin_client == b.origin_client and a.mask_beta == b.mask_beta
        assert a.masked_amplitude.tobytes() == b.masked_amplitude.tobytes()
    path2 = tmp_path / "again.fdgb"
    loaded.save(path2)
    assert path.read_bytes() == path2.read_bytes()


def test_snapshot_header_layout(rng, tmp_path):
    bank = AmplitudeBank([3])
    bank.contribute(3, rng.random((2, 4, 6)), full_mask(4, 6))
    path = tmp_path / "b.fdgb"
    bank.save(path)
    raw = path.read_bytes()
    assert raw[:4] == b"FDGB"
    assert int.from_bytes(raw[4:6], "little") == 1
    assert int.from_bytes(raw[6:10], "little") == 1
    assert [int.from_bytes(raw[i : i + 2], "little") for i in range(10, 18, 2)] == [3, 2, 4, 6]
    assert np.frombuffer(raw[18:26], "<f8")[0] == 1.0
    assert len(raw) == 26 + 8 * 2 * 4 * 6


@pytest.mark.parametrize("mutate", [
    lambda b: b[:3],
    lambda b: b"XXXX" + b[4:],
    lambda b: b[:-1],
    lambda b: b + b"\0",
    lambda b: b[:4] + (9).to_bytes(2, "little") + b[6:],
])
def test_corrupt_snapshots_rejected(rng, tmp_path, mutate):
    path = tmp_path / "b.fdgb"
    _bank(rng).save(path)
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(BankFormatError):
        AmplitudeBank.load(path)


def test_reconstruction_from_bank_is_unrecognisable():
    # diagnostic from the privacy argument: amplitude-only, band-limited patches
    # should not reproduce the image they came from
    samples = generate_domain(DEFAULT_DOMAINS[1], 5, 64, 64)
    bank = build_bank({0: [s.image for s in samples]}, 0.1)
    for s, e in zip(samples, bank.entries):
        recon = np.fft.ifft2(e.masked_amplitude).real
        r = np.corrcoef(recon.ravel(), s.image.ravel())[0, 1]
        assert r < 0.9
