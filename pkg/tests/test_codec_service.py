import logging
from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from mppsim.exceptions import ParameterError
from mppsim.schemas.codec import CodecParams, Message, Packet
from mppsim.services.codec_service import (
    append_checksum,
    brute_force_decode,
    decode_all,
    decode_first,
    encode,
    forced_zero_depths,
    hallucination_rate,
    independence_estimate,
    packet_density,
    random_marks,
    search_marks,
)
from mppsim.utils.prefix_hash import hash_init, hash_update
from mppsim.utils.seeding import rng_for

logger = logging.getLogger(__name__)


def random_message(rng: np.random.Generator, k: int) -> Message:
    return Message(value=int.from_bytes(rng.bytes(8), "big") >> (64 - k), length=k)


def random_packet(rng: np.random.Generator, n: int, density: float) -> Packet:
    return Packet(marks=random_marks(n, density, rng))


def prefix_slots(bits, params: CodecParams) -> list[int]:
    """Slot marked by each codeword prefix, in prefix order."""
    state = hash_init(params.hash_seed)
    slots = []
    for bit in bits:
        state = hash_update(state, bit)
        slots.append(state % params.packet_slots)
    return slots


class TestMessage:
    def test_bits_are_msb_first(self):
        message = Message.from_bits("1011")
        assert message.value == 0b1011
        assert message.bits == (1, 0, 1, 1)

    def test_hex_round_trip_with_padding(self):
        message = Message.from_bits("101")
        assert message.to_hex() == "a"
        assert Message.from_hex("a", 3) == message

    def test_hex_rejects_nonzero_pad(self):
        with pytest.raises(ValueError):
            Message.from_hex("b", 3)

    def test_ascii(self):
        message = Message.from_ascii("Hello1!\n")
        assert message.length == 64
        assert message.to_ascii() == "Hello1!\n"
        assert message.is_ascii()

    def test_ascii_needs_eight_characters(self):
        with pytest.raises(ValueError):
            Message.from_ascii("Hello")

    def test_value_must_fit(self):
        with pytest.raises(ValidationError):
            Message(value=16, length=4)

    def test_lexicographic_order(self):
        assert Message.from_bits("0011") < Message.from_bits("0100")
        assert sorted([Message.from_bits("11"), Message.from_bits("01")])[0] == Message.from_bits("01")


class TestPacket:
    def test_hex_round_trip(self):
        packet = Packet.from_indices(10, [0, 3, 9])
        assert packet.to_hex() == "904"
        assert Packet.from_hex("904", 10) == packet

    def test_hex_wrong_length(self):
        with pytest.raises(ValueError):
            Packet.from_hex("ff", 10)

    def test_union(self):
        combined = Packet.from_indices(8, [1]) | Packet.from_indices(8, [6])
        assert combined.indices == {1, 6}

    def test_union_needs_equal_length(self):
        with pytest.raises(ValueError):
            Packet.empty(8) | Packet.empty(9)

    def test_marks_are_binary(self):
        with pytest.raises(ValidationError):
            Packet(marks=b"\x00\x02")

    def test_density(self):
        assert packet_density(Packet.from_indices(4, [0, 2])) == 0.5


class TestEncode:
    def test_append_checksum(self):
        params = CodecParams(message_bits=4, checksum_bits=2, packet_slots=24)
        assert append_checksum(Message.from_bits("1011"), params).bits == (1, 0, 1, 1, 0, 0)

    def test_popcount_bounded_by_codeword(self, rng):
        params = CodecParams()
        for _ in range(20):
            packet = encode(random_message(rng, 64), params)
            assert packet.n == 256
            assert 1 <= packet.popcount <= params.codeword_bits

    def test_deterministic(self):
        message = Message.from_hex("0000000000000000", 64)
        assert encode(message, CodecParams()) == encode(message, CodecParams())

    def test_hash_seed_changes_packet(self):
        message = Message.from_ascii("Hello1!\n")
        assert encode(message, CodecParams(hash_seed=1)) != encode(message, CodecParams(hash_seed=2))

    def test_rejects_oversized_codeword(self):
        params = CodecParams(message_bits=16, checksum_bits=8, packet_slots=20)
        with pytest.raises(ParameterError):
            encode(Message(value=0, length=16), params)

    def test_rejects_wrong_length(self, desk_params):
        with pytest.raises(ParameterError):
            encode(Message(value=0, length=8), desk_params)


class TestDecode:
    def test_round_trip_64_bit(self, rng):
        params = CodecParams()
        for _ in range(200):
            message = random_message(rng, 64)
            assert decode_first(encode(message, params), params) == message

    def test_empty_packet(self):
        report = decode_all(Packet.empty(256), CodecParams())
        assert report.messages == []
        assert report.node_expansions == 2
        assert not report.truncated

    def test_full_packet_decodes_everything(self, tiny_params):
        report = decode_all(Packet.full(64), tiny_params)
        assert len(report.messages) == 1 << 10
        assert report.node_expansions == 2 * (2**10 - 1) + 5 * 2**10
        assert not report.truncated

    def test_limit_truncates_in_order(self, tiny_params):
        report = decode_all(Packet.full(64), tiny_params, limit=5)
        assert [m.value for m in report.messages] == [0, 1, 2, 3, 4]
        assert report.truncated

    def test_limit_must_be_positive(self, tiny_params):
        with pytest.raises(ParameterError):
            decode_all(Packet.full(64), tiny_params, limit=0)

    def test_wrong_packet_length(self, desk_params):
        with pytest.raises(ParameterError):
            decode_all(Packet.empty(64), desk_params)

    def test_superposition_matches_oracle(self, desk_params, rng):
        for _ in range(20):
            messages = {random_message(rng, 16) for _ in range(3)}
            packet = Packet.empty(256)
            for message in messages:
                packet = packet | encode(message, desk_params)
            decoded = decode_all(packet, desk_params).messages
            assert messages <= set(decoded)
            assert decoded == brute_force_decode(packet, desk_params)

    def test_marks_only_add_decodes(self, tiny_params, rng):
        for _ in range(100):
            packet = random_packet(rng, 64, 0.5)
            extra = random_packet(rng, 64, 0.2)
            before = set(decode_all(packet, tiny_params).messages)
            after = set(decode_all(packet | extra, tiny_params).messages)
            assert before <= after

    def test_erasing_any_mark_kills_the_message(self, desk_params, rng):
        for _ in range(20):
            message = random_message(rng, 16)
            packet = encode(message, desk_params)
            for index in packet.indices:
                damaged = packet.with_slot(index, 0)
                assert message not in decode_all(damaged, desk_params).messages

    def test_dense_output_strictly_ascending(self, rng):
        params = CodecParams(message_bits=12, checksum_bits=2, packet_slots=64)
        for _ in range(30):
            packet = random_packet(rng, 64, 0.7)
            decoded = decode_all(packet, params).messages
            assert all(a < b for a, b in zip(decoded, decoded[1:]))
            assert decoded == brute_force_decode(packet, params)

    def test_decode_first_is_smallest(self, tiny_params, rng):
        packet = random_packet(rng, 64, 0.8)
        everything = decode_all(packet, tiny_params).messages
        assert everything
        assert decode_first(packet, tiny_params) == everything[0]


class TestAsciiOnly:
    def test_forced_depths(self):
        params = CodecParams(message_bits=16, checksum_bits=2, packet_slots=64)
        forced = forced_zero_depths(params, ascii_only=True)
        assert [i for i, f in enumerate(forced) if f] == [0, 8, 16, 17]

    def test_needs_whole_bytes(self):
        with pytest.raises(ParameterError):
            forced_zero_depths(CodecParams(message_bits=12, checksum_bits=2, packet_slots=64), ascii_only=True)

    def test_ascii_message_survives(self):
        params = CodecParams()
        message = Message.from_ascii("Hello8!\n")
        assert decode_all(encode(message, params), params, ascii_only=True).messages == [message]

    def test_top_bit_messages_pruned(self):
        params = CodecParams()
        message = Message.from_hex("8000000000000000", 64)
        packet = encode(message, params)
        assert decode_all(packet, params).messages == [message]
        assert decode_all(packet, params, ascii_only=True).messages == []


class TestSearchMarks:
    def test_accepts_raw_buffers(self, desk_params):
        message = Message(value=0xBEEF, length=16)
        marks = encode(message, desk_params).marks
        values, expansions, truncated = search_marks(bytearray(marks), desk_params, 10)
        assert 0xBEEF in values
        assert expansions > 0
        assert not truncated


class TestBruteForce:
    def test_rejects_large_k(self):
        with pytest.raises(ParameterError):
            brute_force_decode(Packet.empty(256), CodecParams())

    def test_empty_and_full(self, tiny_params):
        assert brute_force_decode(Packet.empty(64), tiny_params) == []
        assert len(brute_force_decode(Packet.full(64), tiny_params)) == 1 << 10


class TestHallucination:
    def test_random_marks_are_nested_across_densities(self):
        sparse = random_marks(256, 0.2, rng_for(1, 0))
        dense = random_marks(256, 0.6, rng_for(1, 0))
        assert all(d >= s for s, d in zip(sparse, dense))

    def test_extreme_densities(self, tiny_params):
        assert hallucination_rate(0.0, tiny_params, trials=5, rng_seed=0) == 0.0
        assert hallucination_rate(1.0, tiny_params, trials=2, rng_seed=0) == 1024.0

    def test_reproducible(self, tiny_params):
        first = hallucination_rate(0.6, tiny_params, trials=50, rng_seed=3)
        assert hallucination_rate(0.6, tiny_params, trials=50, rng_seed=3) == first

    def test_independence_estimate(self, tiny_params):
        assert independence_estimate(1.0, tiny_params) == 1024.0
        assert independence_estimate(0.5, tiny_params) == pytest.approx(2**10 * 0.5**15)

    @pytest.mark.parametrize("density", [-0.1, 1.5])
    def test_density_range(self, tiny_params, density):
        with pytest.raises(ParameterError):
            hallucination_rate(density, tiny_params, trials=1, rng_seed=0)


@pytest.mark.slow
class TestCodecAcceptance:
    def test_round_trip_ten_thousand(self, rng):
        params = CodecParams()
        for _ in range(10_000):
            message = random_message(rng, 64)
            assert decode_first(encode(message, params), params) == message

    def test_superposition_thousand_trials(self, desk_params, rng):
        recovered = 0
        for trial in range(1000):
            messages = {random_message(rng, 16) for _ in range(3)}
            packet = Packet.empty(256)
            for message in messages:
                packet = packet | encode(message, desk_params)
            decoded = decode_all(packet, desk_params).messages
            recovered += messages <= set(decoded)
            if trial < 100:
                assert decoded == brute_force_decode(packet, desk_params)
        assert recovered >= 990

    def test_marks_only_add_decodes_thousand_pairs(self, tiny_params, rng):
        for _ in range(1000):
            packet = random_packet(rng, 64, 0.5)
            extra = random_packet(rng, 64, 0.2)
            before = set(decode_all(packet, tiny_params).messages)
            assert before <= set(decode_all(packet | extra, tiny_params).messages)

    def test_erasure_over_hundred_messages(self, rng):
        params = CodecParams()
        shared = 0
        for _ in range(100):
            message = random_message(rng, 64)
            packet = encode(message, params)
            slots = Counter(prefix_slots(append_checksum(message, params).bits, params))
            assert set(slots) == set(packet.indices)
            for index, uses in slots.items():
                if uses > 1:
                    shared += 1
                    continue
                assert message not in decode_all(packet.with_slot(index, 0), params).messages
        logger.info("erasure check skipped %d slots set by more than one prefix", shared)

    def test_dense_output_ascending_thousand_packets(self, rng):
        params = CodecParams(message_bits=12, checksum_bits=2, packet_slots=64)
        for trial in range(1000):
            packet = random_packet(rng, 64, 0.5)
            decoded = decode_all(packet, params).messages
            assert all(a < b for a, b in zip(decoded, decoded[1:]))
            if trial < 100:
                assert decoded == brute_force_decode(packet, params)
