import numpy as np
import pytest

from mppsim.exceptions import ParameterError
from mppsim.utils.prefix_hash import (
    INIT_CONSTANT,
    StandInPrefixHash,
    hash_init,
    hash_update,
    hash_update_array,
    mark_index,
    rotate_left_64,
)
from mppsim.utils.seeding import MAX_SEED, derive_seed, rng_for


class TestStandInHash:
    def test_init_mixes_seed(self):
        assert hash_init(0) == INIT_CONSTANT
        assert hash_init(1) == INIT_CONSTANT ^ 1

    def test_pinned_vectors(self):
        root = hash_init(0)
        assert hash_update(root, 0) == 0x8929777656A1A195
        assert hash_update(root, 1) == 0x62009BD2950222CB

    def test_rejects_non_bits(self):
        with pytest.raises(ParameterError):
            hash_update(hash_init(0), 2)

    def test_rotation_is_64_bit(self):
        assert rotate_left_64(1 << 63, 1) == 1
        assert rotate_left_64(0x1, 29) == 1 << 29

    def test_mark_index_in_range(self):
        state = hash_init(0)
        for bit in (1, 0, 1, 1, 0):
            state = hash_update(state, bit)
            assert 0 <= mark_index(state, 256) < 256

    def test_array_matches_scalar(self):
        states = np.array([hash_init(0), hash_init(7), hash_init(2**63)], dtype=np.uint64)
        bits = np.array([0, 1, 1], dtype=np.uint64)
        out = hash_update_array(states, bits)
        expected = [hash_update(int(s), int(b)) for s, b in zip(states, bits)]
        assert [int(v) for v in out] == expected

    def test_protocol_wrapper(self):
        hasher = StandInPrefixHash()
        assert hasher.update(hasher.init(5), 1) == hash_update(hash_init(5), 1)


class TestSeeding:
    def test_derive_is_deterministic(self):
        assert derive_seed(7, 3, 1) == derive_seed(7, 3, 1)

    def test_labels_separate_streams(self):
        seeds = {derive_seed(7), derive_seed(7, 0), derive_seed(7, 1), derive_seed(8, 1), derive_seed(7, 1, 0)}
        assert len(seeds) == 5

    def test_rng_for_reproducible(self):
        a = rng_for(3, 9).random(5)
        b = rng_for(3, 9).random(5)
        np.testing.assert_array_equal(a, b)

    def test_seed_outside_64_bits_rejected(self):
        with pytest.raises(ParameterError):
            derive_seed(2**64 + 5, 1)
        with pytest.raises(ParameterError):
            derive_seed(-1)
        assert derive_seed(MAX_SEED, 1) != derive_seed(5, 1)


@pytest.mark.slow
class TestHashAcceptance:
    def test_mark_index_uniform_over_random_states(self):
        draws, slots = 1_000_000, 256
        rng = rng_for(11, 0)
        states = np.arange(draws, dtype=np.uint64) ^ np.uint64(INIT_CONSTANT)
        for _ in range(4):
            states = hash_update_array(states, rng.integers(0, 2, draws, dtype=np.uint64))
        indices = states % np.uint64(slots)
        assert [mark_index(int(s), slots) for s in states[:10]] == [int(i) for i in indices[:10]]

        counts = np.bincount(indices.astype(np.int64), minlength=slots)
        p = 1.0 / slots
        sigma = np.sqrt(draws * p * (1.0 - p))
        assert counts.size == slots
        assert np.max(np.abs(counts - draws * p)) <= 5.0 * sigma
