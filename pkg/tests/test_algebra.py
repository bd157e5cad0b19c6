import random

import pytest

from lcws import algebra as alg
from lcws.algebra import G0Element, GTElement, Scalar
from lcws.errors import DecodeError

G = alg.generator()
E_GG = alg.pair(G, G)

# canonical encoding of the suite generator; must never change
GENERATOR_HEX = (
    "034ecbcfdaed2441bed7d03f3a6e63e08c73f507d35ccf8ada817b61c18f301ee1"
    "f278b7c8ca2ab9d4224015b2a9a2fed055a2e00aca7e62976914ce45e5d0dda5"
)


def test_suite_parameters_consistent():
    assert alg.FIELD_PRIME % 4 == 3
    assert alg.FIELD_PRIME + 1 == alg.COFACTOR * alg.ORDER
    assert alg.SUITE_MANIFEST["scalar_bytes"] == alg.SCALAR_BYTES == 20
    assert alg.SUITE_MANIFEST["g0_bytes"] == alg.G0_BYTES == 65
    assert alg.SUITE_MANIFEST["gt_bytes"] == alg.GT_BYTES == 128


def test_pair_small_exponents():
    assert alg.pair(G ** 2, G ** 3) == E_GG ** 6


def test_pair_identity_argument():
    assert alg.pair(G, G0Element.identity()).is_identity()
    assert alg.pair(G0Element.identity(), G).is_identity()
    assert alg.pair(G, G ** 0).is_identity()


def test_pair_nondegenerate():
    assert not E_GG.is_identity()


def test_bilinearity_and_symmetry_random():
    rng = random.Random(101)
    for _ in range(100):
        a = alg.random_nonzero_scalar(rng)
        b = alg.random_nonzero_scalar(rng)
        u = G ** alg.random_nonzero_scalar(rng)
        v = G ** alg.random_nonzero_scalar(rng)
        lhs = alg.pair(u ** a, v ** b)
        assert lhs == alg.pair(u, v) ** (a * b)
        assert lhs == alg.pair(v ** b, u ** a)


def test_group_exponent_laws():
    rng = random.Random(7)
    a = alg.random_scalar(rng)
    b = alg.random_scalar(rng)
    assert G ** (a + b) == (G ** a) * (G ** b)
    # chained multiplications agree with one exponentiation
    acc = G0Element.identity()
    for _ in range(13):
        acc = acc * G
    assert acc == G ** 13


def test_scalar_field_laws():
    rng = random.Random(8)
    a = alg.random_nonzero_scalar(rng)
    b = alg.random_nonzero_scalar(rng)
    assert (a * b) * a.inverse() == b
    assert a * a.inverse() == Scalar(1)
    assert (a - a).is_zero()
    with pytest.raises(ZeroDivisionError):
        Scalar(0).inverse()


def test_hash_deterministic_and_domain_separated():
    h1 = alg.hash_to_g0(alg.TAG_MESSAGE, b"payload")
    h2 = alg.hash_to_g0(alg.TAG_MESSAGE, b"payload")
    assert h1 == h2
    assert alg.hash_to_g0(alg.TAG_MESSAGE, b"m") != alg.hash_to_g0(alg.TAG_ATTRIBUTE, b"m")


def test_hash_output_obeys_group_law():
    h = alg.hash_to_g0(alg.TAG_ATTRIBUTE, b"temperature")
    assert h ** 2 == h * h
    # hashed points land in the prime-order subgroup
    assert (h ** alg.ORDER).is_identity()


def test_kdf_deterministic_and_involutive():
    k = E_GG ** 42
    assert alg.kdf_mask(k, 64) == alg.kdf_mask(k, 64)
    payload = bytes(range(48))
    mask = alg.kdf_mask(k, len(payload))
    assert alg.xor_bytes(alg.xor_bytes(payload, mask), mask) == payload
    with pytest.raises(ValueError):
        alg.kdf_mask(k, 0)


def test_kdf_distinct_keys_distinct_streams():
    rng = random.Random(55)
    prefixes = set()
    for _ in range(100):
        k = E_GG ** alg.random_nonzero_scalar(rng)
        prefixes.add(alg.kdf_mask(k, 32))
    assert len(prefixes) == 100


def test_serialize_round_trips():
    rng = random.Random(9)
    for _ in range(5):
        s = alg.random_scalar(rng)
        assert Scalar.deserialize(s.serialize()) == s
        p = G ** alg.random_nonzero_scalar(rng)
        assert G0Element.deserialize(p.serialize()) == p
        t = E_GG ** alg.random_nonzero_scalar(rng)
        assert GTElement.deserialize(t.serialize()) == t
    assert G0Element.deserialize(G0Element.identity().serialize()).is_identity()


def test_generator_encoding_is_frozen():
    assert G.serialize().hex() == GENERATOR_HEX
    assert alg.generator() == G


def test_decode_rejects_bad_input():
    with pytest.raises(DecodeError):
        Scalar.deserialize(b"\x00" * 19)                      # truncated
    with pytest.raises(DecodeError):
        Scalar.deserialize(alg.ORDER.to_bytes(20, "big"))     # out of range
    good = (G ** 5).serialize()
    with pytest.raises(DecodeError):
        G0Element.deserialize(good[:-1])
    with pytest.raises(DecodeError):
        G0Element.deserialize(b"\x05" + good[1:])             # bad prefix
    with pytest.raises(DecodeError):
        G0Element.deserialize(b"\x00" + b"\x01" * 64)         # junk identity
    bad_x = bytearray(good)
    bad_x[-1] ^= 1
    # flipping an x bit leaves the curve or at best the prime-order subgroup
    with pytest.raises(DecodeError):
        G0Element.deserialize(bytes(bad_x))
    t = (E_GG ** 3).serialize()
    with pytest.raises(DecodeError):
        GTElement.deserialize(t[:-1])
    corrupted = bytearray(t)
    corrupted[10] ^= 0xFF
    with pytest.raises(DecodeError):
        GTElement.deserialize(bytes(corrupted))


def test_gt_inverse_and_division():
    rng = random.Random(12)
    x = E_GG ** alg.random_nonzero_scalar(rng)
    assert (x * x.inverse()).is_identity()
    y = E_GG ** alg.random_nonzero_scalar(rng)
    assert (x / y) * y == x
