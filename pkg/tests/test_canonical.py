"""Canonical encoding: determinism, round trips, tamper evidence."""

import hashlib

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vaxledger import canonical

values = st.recursive(
    st.none()
    | st.booleans()
    | st.integers()
    | st.text(max_size=40)
    | st.binary(max_size=40),
    lambda children: st.lists(children, max_size=5)
    | st.dictionaries(st.text(max_size=10), children, max_size=5),
    max_leaves=20,
)


@given(values)
def test_round_trip(value):
    assert canonical.decode(canonical.encode(value)) == value


@given(values)
def test_encoding_is_deterministic(value):
    assert canonical.encode(value) == canonical.encode(value)


def test_dict_key_order_is_irrelevant():
    a = {"x": 1, "y": 2, "z": [3, b"4"]}
    b = {"z": [3, b"4"], "y": 2, "x": 1}
    assert canonical.encode(a) == canonical.encode(b)


def test_type_confusion_is_impossible():
    # values that print alike must not encode alike
    lookalikes = [1, "1", b"1", True, [1], {"1": None}, None, "", b""]
    encodings = [canonical.encode(v) for v in lookalikes]
    assert len(set(encodings)) == len(encodings)


def test_nested_structures_encode_with_explicit_lengths():
    assert canonical.encode([[1], 2]) != canonical.encode([1, 2])
    assert canonical.encode(["ab", "c"]) != canonical.encode(["a", "bc"])


def test_non_string_dict_keys_rejected():
    with pytest.raises(TypeError):
        canonical.encode({1: "x"})


def test_unsupported_type_rejected():
    with pytest.raises(TypeError):
        canonical.encode(object())
    with pytest.raises(TypeError):
        canonical.encode(1.5)


@pytest.mark.parametrize("mutilate", [
    lambda raw: raw[:-1],                      # truncated
    lambda raw: raw + b"x",                    # trailing garbage
    lambda raw: b"Z" + raw[1:],                # unknown tag
])
def test_decode_rejects_malformed(mutilate):
    raw = canonical.encode({"k": [1, "two"]})
    with pytest.raises(canonical.DecodeError):
        canonical.decode(mutilate(raw))


def test_decode_rejects_unsorted_dict():
    good = canonical.encode({"a": 1, "b": 2})
    # manually swap the two key-value pairs: D <count> "b" 2 "a" 1
    swapped = good[:5] + canonical.encode("b")[0:] + canonical.encode(2) \
        + canonical.encode("a") + canonical.encode(1)
    with pytest.raises(canonical.DecodeError):
        canonical.decode(swapped)


def test_digest_matches_sha256_of_encoding():
    value = {"k": [1, b"\x00", "s"]}
    expected = hashlib.sha256(canonical.encode(value)).hexdigest()
    assert canonical.digest(value) == expected


@given(st.binary(min_size=32, max_size=32))
def test_leading_zero_bits_against_bit_string_oracle(raw):
    digest = raw.hex()
    bits = bin(int(digest, 16))[2:].zfill(len(digest) * 4)
    expected = len(bits) - len(bits.lstrip("0"))
    assert canonical.leading_zero_bits(digest) == expected
