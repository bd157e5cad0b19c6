"""Pairing-enabled group arithmetic.

Fixed suite: the 512-bit supersingular curve y^2 = x^3 + x over F_q with
q = 3 mod 4 and #E(F_q) = q + 1 = cofactor * order (the classic "type A"
parameter set, 160-bit prime-order subgroup).  The pairing is the Tate
pairing composed with the distortion map (x, y) -> (-x, i*y) into
E(F_q^2), which makes the exposed map symmetric: pair(u, v) == pair(v, u)
for all source-group elements.  Scalars live in Z mod `ORDER`.

Everything here is a pure function of its inputs; elements are immutable
and hashable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

from .errors import DecodeError

SUITE_ID = "ss512-tate-v1"

# Base field prime, subgroup order and cofactor satisfy q + 1 = COFACTOR * ORDER,
# q = 3 (mod 4), ORDER = 2^159 + 2^107 + 1.
FIELD_PRIME = int(
    "8780710799663312522437781984754049815806883199414208211028653399266475630880"
    "2229570786251794226622214231558587695823174592777133673174813249251299982247"
    "91"
)
ORDER = 730750818665451621361119245571504901405976559617
COFACTOR = (FIELD_PRIME + 1) // ORDER

SCALAR_BYTES = 20
G0_BYTES = 65          # 1 prefix byte + 64-byte x coordinate
GT_BYTES = 128         # two 64-byte base-field coordinates
_FQ_BYTES = 64

SUITE_MANIFEST = {
    "suite": SUITE_ID,
    "scalar_bytes": SCALAR_BYTES,
    "g0_bytes": G0_BYTES,
    "gt_bytes": GT_BYTES,
    "order": ORDER,
}

_Q = FIELD_PRIME
_SQRT_EXP = (_Q + 1) // 4          # valid square roots since q = 3 (mod 4)
_LEGENDRE_EXP = (_Q - 1) // 2

TAG_MESSAGE = b"Hv"
TAG_ATTRIBUTE = b"Hatt"
_TAG_GENERATOR = b"gen"

_H2C_PREFIX = b"lcws-h2c-v1"
_KDF_PREFIX = b"lcws-kdf-v1"


def _naf(k: int) -> list:
    """Non-adjacent form, least significant digit first."""
    digits = []
    while k:
        if k & 1:
            d = 2 - (k & 3)
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    return digits


_NAF_ORDER_MSB = list(reversed(_naf(ORDER)))[1:]
_NAF_COFACTOR_MSB = list(reversed(_naf(COFACTOR)))[1:]


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scalar:
    """Residue modulo the group order; exponent domain for both groups."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value < ORDER:
            object.__setattr__(self, "value", self.value % ORDER)

    def __add__(self, other: "Scalar") -> "Scalar":
        return Scalar((self.value + other.value) % ORDER)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return Scalar((self.value - other.value) % ORDER)

    def __mul__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.value * other.value % ORDER)

    def __neg__(self) -> "Scalar":
        return Scalar(-self.value % ORDER)

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise ZeroDivisionError("zero scalar has no inverse")
        return Scalar(pow(self.value, -1, ORDER))

    def __truediv__(self, other: "Scalar") -> "Scalar":
        return self * other.inverse()

    def is_zero(self) -> bool:
        return self.value == 0

    def serialize(self) -> bytes:
        return self.value.to_bytes(SCALAR_BYTES, "big")

    @classmethod
    def deserialize(cls, data: bytes) -> "Scalar":
        if len(data) != SCALAR_BYTES:
            raise DecodeError(f"scalar must be {SCALAR_BYTES} bytes, got {len(data)}")
        v = int.from_bytes(data, "big")
        if v >= ORDER:
            raise DecodeError("scalar out of range")
        return cls(v)


def random_scalar(rng) -> Scalar:
    return Scalar(rng.randrange(ORDER))


def random_nonzero_scalar(rng) -> Scalar:
    return Scalar(rng.randrange(1, ORDER))


# ---------------------------------------------------------------------------
# curve arithmetic (internal, affine/Jacobian tuples over F_q)
# ---------------------------------------------------------------------------
# Affine points are (x, y) tuples; None is the identity.  Jacobian triples
# (X, Y, Z) satisfy x = X/Z^2, y = Y/Z^3.

def _on_curve(x: int, y: int) -> bool:
    return (y * y - (x * x * x + x)) % _Q == 0


def _affine_neg(p):
    if p is None:
        return None
    return (p[0], (_Q - p[1]) % _Q)


def _jac_double(p):
    if p is None:
        return None
    X, Y, Z = p
    if Y == 0:
        return None
    Y2 = Y * Y % _Q
    S = 4 * X * Y2 % _Q
    Z2 = Z * Z % _Q
    M = (3 * X * X + Z2 * Z2) % _Q
    X3 = (M * M - 2 * S) % _Q
    Y3 = (M * (S - X3) - 8 * Y2 * Y2) % _Q
    return (X3, Y3, 2 * Y * Z % _Q)


def _jac_add_affine(p, a):
    """Mixed addition of a Jacobian point and an affine point."""
    if a is None:
        return p
    if p is None:
        return (a[0], a[1], 1)
    X1, Y1, Z1 = p
    x2, y2 = a
    Z1Z1 = Z1 * Z1 % _Q
    U2 = x2 * Z1Z1 % _Q
    S2 = y2 * Z1 % _Q * Z1Z1 % _Q
    if U2 == X1:
        if S2 == Y1:
            return _jac_double(p)
        return None
    H = (U2 - X1) % _Q
    HH = H * H % _Q
    I = 4 * HH % _Q
    J = H * I % _Q
    rr = 2 * (S2 - Y1) % _Q
    V = X1 * I % _Q
    X3 = (rr * rr - J - 2 * V) % _Q
    Y3 = (rr * (V - X3) - 2 * Y1 * J) % _Q
    Z3 = ((Z1 + H) * (Z1 + H) - Z1Z1 - HH) % _Q
    return (X3, Y3, Z3)


def _jac_to_affine(p):
    if p is None:
        return None
    X, Y, Z = p
    zi = pow(Z, -1, _Q)
    zi2 = zi * zi % _Q
    return (X * zi2 % _Q, Y * zi2 % _Q * zi % _Q)


def _affine_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % _Q == 0:
            return None
        lam = (3 * x1 * x1 + 1) * pow(2 * y1, -1, _Q) % _Q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, _Q) % _Q
    x3 = (lam * lam - x1 - x2) % _Q
    return (x3, (lam * (x1 - x3) - y1) % _Q)


def _affine_mul_naf(p, naf_digits_msb):
    if p is None:
        return None
    neg = _affine_neg(p)
    acc = (p[0], p[1], 1)
    for d in naf_digits_msb:
        acc = _jac_double(acc)
        if d == 1:
            acc = _jac_add_affine(acc, p)
        elif d == -1:
            acc = _jac_add_affine(acc, neg)
    return _jac_to_affine(acc)


def _affine_mul(p, k: int):
    k %= ORDER
    if p is None or k == 0:
        return None
    if k == 1:
        return p
    return _affine_mul_naf(p, list(reversed(_naf(k)))[1:])


# Fixed-base comb exponentiation: exponents are at most 160 bits, split
# into 4 rows of 40; the per-base table holds every subset product of the
# row base points.  Table construction costs about one plain exponentiation,
# so caching is pure win for bases that recur (generators, key elements).

_COMB_TEETH = 4
_COMB_SPAN = 40


@lru_cache(maxsize=512)
def _comb_table(point):
    rows = [point]
    acc = (point[0], point[1], 1)
    for _ in range(_COMB_TEETH - 1):
        for _ in range(_COMB_SPAN):
            acc = _jac_double(acc)
        rows.append(_jac_to_affine(acc))
    table = [None] * (1 << _COMB_TEETH)
    for b in range(1, 1 << _COMB_TEETH):
        low = b & -b
        rest = b ^ low
        row = rows[low.bit_length() - 1]
        table[b] = row if rest == 0 else _affine_add(table[rest], row)
    return tuple(table)


def _comb_pow(p, k: int):
    k %= ORDER
    if p is None or k == 0:
        return None
    table = _comb_table(p)
    acc = None
    for i in range(_COMB_SPAN - 1, -1, -1):
        if acc is not None:
            acc = _jac_double(acc)
        b = 0
        for j in range(_COMB_TEETH):
            if (k >> (_COMB_SPAN * j + i)) & 1:
                b |= 1 << j
        if b:
            entry = table[b]
            if entry is not None:
                if acc is None:
                    acc = (entry[0], entry[1], 1)
                else:
                    acc = _jac_add_affine(acc, entry)
    return _jac_to_affine(acc)


# ---------------------------------------------------------------------------
# F_q^2 arithmetic (internal): elements (a, b) represent a + b*i, i^2 = -1
# ---------------------------------------------------------------------------

_FQ2_ONE = (1, 0)


def _fq2_mul(u, v):
    a, b = u
    c, d = v
    ac = a * c % _Q
    bd = b * d % _Q
    return ((ac - bd) % _Q, ((a + b) * (c + d) - ac - bd) % _Q)


def _fq2_sqr(u):
    a, b = u
    return ((a + b) * (a - b) % _Q, 2 * a * b % _Q)


def _fq2_conj(u):
    a, b = u
    return (a, (_Q - b) % _Q)


def _fq2_inv(u):
    a, b = u
    n = pow(a * a + b * b, -1, _Q)
    return (a * n % _Q, (_Q - b) * n % _Q)


def _fq2_pow_unitary(u, k: int):
    """Exponentiation where the inverse is the conjugate (norm-1 inputs only)."""
    if k == 0:
        return _FQ2_ONE
    inv = _fq2_conj(u)
    acc = _FQ2_ONE
    for d in reversed(_naf(k)):
        acc = _fq2_sqr(acc)
        if d == 1:
            acc = _fq2_mul(acc, u)
        elif d == -1:
            acc = _fq2_mul(acc, inv)
    return acc


def _fq2_pow_naf(u, naf_digits_after_leading):
    """Unitary exponentiation; digit list excludes the leading 1 and the
    accumulator starts at the base, matching `_affine_mul_naf`."""
    inv = _fq2_conj(u)
    acc = u
    for d in naf_digits_after_leading:
        acc = _fq2_sqr(acc)
        if d == 1:
            acc = _fq2_mul(acc, u)
        elif d == -1:
            acc = _fq2_mul(acc, inv)
    return acc


# ---------------------------------------------------------------------------
# pairing core
# ---------------------------------------------------------------------------

def _miller(p, q):
    """f_{ORDER, p} evaluated at the distorted image of q.

    The distortion map sends (xq, yq) to (-xq, i*yq), so line values have
    an F_q real part and a constant-shape imaginary part.  Vertical-line
    factors lie in F_q and vanish under the final exponentiation, so they
    are skipped throughout.
    """
    xq, yq = q
    xq_d = (_Q - xq) % _Q                     # x coordinate of the image
    f = _FQ2_ONE
    X, Y, Z = p[0], p[1], 1
    px, py = p
    npx, npy = px, _Q - py
    for d in _NAF_ORDER_MSB:
        # tangent line at the running point, then double
        Z2 = Z * Z % _Q
        Z3 = Z2 * Z % _Q
        W = (3 * X * X + Z2 * Z2) % _Q
        l_re = (W * ((xq_d * Z2 - X) % _Q) + 2 * Y * Y) % _Q
        l_im = _Q - (2 * Y % _Q) * Z3 % _Q * yq % _Q
        f = _fq2_mul(_fq2_sqr(f), (l_re, l_im % _Q))
        Y2 = Y * Y % _Q
        S = 4 * X * Y2 % _Q
        Xn = (W * W - 2 * S) % _Q
        Y, Z = (W * (S - Xn) - 8 * Y2 * Y2) % _Q, 2 * Y * Z % _Q
        X = Xn
        if d:
            ax, ay = (px, py) if d == 1 else (npx, npy)
            Z1Z1 = Z * Z % _Q
            U2 = ax * Z1Z1 % _Q
            S2 = ay * Z % _Q * Z1Z1 % _Q
            if U2 == X and (S2 + Y) % _Q == 0:
                # running point is the negative of the addend: the secant
                # degenerates to a vertical line (an F_q factor); the sum is
                # the identity.  Only reachable on the final NAF digit.
                X, Y, Z = 0, 1, 0
                continue
            H = (U2 - X) % _Q
            rr = (S2 - Y) % _Q
            l_re = (rr * ((xq_d - ax) % _Q) + ay * H % _Q * Z) % _Q
            l_im = _Q - yq * H % _Q * Z % _Q
            f = _fq2_mul(f, (l_re, l_im % _Q))
            HH = H * H % _Q
            I = 4 * HH % _Q
            J = H * I % _Q
            r2 = 2 * rr % _Q
            V = X * I % _Q
            X3 = (r2 * r2 - J - 2 * V) % _Q
            Y3 = (r2 * (V - X3) - 2 * Y * J) % _Q
            Z3n = ((Z + H) * (Z + H) - Z1Z1 - HH) % _Q
            X, Y, Z = X3, Y3, Z3n
    return f


def _final_exponentiation(f):
    # f^((q^2-1)/ORDER) = (conj(f)/f)^COFACTOR; the first factor lands in
    # the norm-1 subgroup where conjugation inverts.
    g = _fq2_mul(_fq2_conj(f), _fq2_inv(f))
    return _fq2_pow_naf(g, _NAF_COFACTOR_MSB)


# ---------------------------------------------------------------------------
# public element types
# ---------------------------------------------------------------------------

class G0Element:
    """Element of the prime-order source-group subgroup (multiplicative API)."""

    __slots__ = ("_p",)

    def __init__(self, point: Optional[Tuple[int, int]]):
        self._p = point

    def __mul__(self, other: "G0Element") -> "G0Element":
        return G0Element(_affine_add(self._p, other._p))

    def __pow__(self, k) -> "G0Element":
        e = k.value if isinstance(k, Scalar) else int(k)
        return G0Element(_comb_pow(self._p, e))

    def inverse(self) -> "G0Element":
        return G0Element(_affine_neg(self._p))

    def __truediv__(self, other: "G0Element") -> "G0Element":
        return self * other.inverse()

    def is_identity(self) -> bool:
        return self._p is None

    def __eq__(self, other) -> bool:
        return isinstance(other, G0Element) and self._p == other._p

    def __hash__(self):
        return hash(("g0", self._p))

    def __repr__(self):
        if self._p is None:
            return "G0Element(identity)"
        return f"G0Element(x={self._p[0]:#x})"

    def serialize(self) -> bytes:
        if self._p is None:
            return b"\x00" * G0_BYTES
        x, y = self._p
        prefix = 0x03 if y & 1 else 0x02
        return bytes([prefix]) + x.to_bytes(_FQ_BYTES, "big")

    @classmethod
    def deserialize(cls, data: bytes) -> "G0Element":
        if len(data) != G0_BYTES:
            raise DecodeError(f"group element must be {G0_BYTES} bytes, got {len(data)}")
        prefix = data[0]
        if prefix == 0x00:
            if any(data[1:]):
                raise DecodeError("non-canonical identity encoding")
            return cls(None)
        if prefix not in (0x02, 0x03):
            raise DecodeError(f"bad point prefix {prefix:#x}")
        x = int.from_bytes(data[1:], "big")
        if x >= _Q:
            raise DecodeError("x coordinate out of range")
        rhs = (x * x * x + x) % _Q
        y = pow(rhs, _SQRT_EXP, _Q)
        if y * y % _Q != rhs:
            raise DecodeError("x is not on the curve")
        if (y & 1) != (prefix == 0x03):
            y = _Q - y
        point = (x, y)
        if _affine_mul(point, ORDER - 1) != _affine_neg(point):
            raise DecodeError("point not in the prime-order subgroup")
        return cls(point)

    @classmethod
    def identity(cls) -> "G0Element":
        return cls(None)


class GTElement:
    """Element of the order-`ORDER` subgroup of F_q^2 (the pairing target)."""

    __slots__ = ("_v",)

    def __init__(self, value: Tuple[int, int]):
        self._v = value

    def __mul__(self, other: "GTElement") -> "GTElement":
        return GTElement(_fq2_mul(self._v, other._v))

    def __pow__(self, k) -> "GTElement":
        e = k.value if isinstance(k, Scalar) else int(k)
        e %= ORDER
        return GTElement(_fq2_pow_unitary(self._v, e))

    def inverse(self) -> "GTElement":
        # subgroup elements have norm 1, so conjugation inverts
        return GTElement(_fq2_conj(self._v))

    def __truediv__(self, other: "GTElement") -> "GTElement":
        return self * other.inverse()

    def is_identity(self) -> bool:
        return self._v == _FQ2_ONE

    def __eq__(self, other) -> bool:
        return isinstance(other, GTElement) and self._v == other._v

    def __hash__(self):
        return hash(("gt", self._v))

    def __repr__(self):
        return f"GTElement({self._v[0]:#x}, {self._v[1]:#x})"

    def serialize(self) -> bytes:
        a, b = self._v
        return a.to_bytes(_FQ_BYTES, "big") + b.to_bytes(_FQ_BYTES, "big")

    @classmethod
    def deserialize(cls, data: bytes) -> "GTElement":
        if len(data) != GT_BYTES:
            raise DecodeError(f"target element must be {GT_BYTES} bytes, got {len(data)}")
        a = int.from_bytes(data[:_FQ_BYTES], "big")
        b = int.from_bytes(data[_FQ_BYTES:], "big")
        if a >= _Q or b >= _Q:
            raise DecodeError("coordinate out of range")
        v = (a, b)
        if (a * a + b * b) % _Q != 1:
            raise DecodeError("element not in the unit-norm subgroup")
        if _fq2_pow_unitary(v, ORDER) != _FQ2_ONE:
            raise DecodeError("element not in the pairing target subgroup")
        return cls(v)

    @classmethod
    def one(cls) -> "GTElement":
        return cls(_FQ2_ONE)


def pair(u: G0Element, v: G0Element) -> GTElement:
    """Symmetric bilinear map into the target group."""
    if u._p is None or v._p is None:
        return GTElement.one()
    return GTElement(_final_exponentiation(_miller(u._p, v._p)))


# ---------------------------------------------------------------------------
# hashing and key derivation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _hash_to_point(domain_tag: bytes, msg: bytes) -> Tuple[int, int]:
    """Deterministic try-and-increment map onto the prime-order subgroup."""
    framed = _H2C_PREFIX + len(domain_tag).to_bytes(1, "big") + domain_tag + msg
    for counter in range(256):
        digest = hashlib.sha512(framed + bytes([counter])).digest()
        x = int.from_bytes(digest, "big") % _Q
        rhs = (x * x * x + x) % _Q
        y = pow(rhs, _SQRT_EXP, _Q)
        if y * y % _Q != rhs:
            continue
        if y & 1:
            y = _Q - y
        cleared = _affine_mul_naf((x, y), _NAF_COFACTOR_MSB)
        if cleared is not None:
            return cleared
    raise RuntimeError("hash-to-group failed to find a curve point")  # pragma: no cover


def hash_to_g0(domain_tag: bytes, msg: bytes) -> G0Element:
    """Hash bytes into the source group under a domain separation tag."""
    return G0Element(_hash_to_point(bytes(domain_tag), bytes(msg)))


def kdf_mask(k_gt: GTElement, out_len: int) -> bytes:
    """Deterministic keystream of `out_len` bytes derived from a target element."""
    if out_len <= 0:
        raise ValueError("mask length must be positive")
    return hashlib.shake_256(_KDF_PREFIX + k_gt.serialize()).digest(out_len)


def generator() -> G0Element:
    """The fixed public generator of the source group."""
    return hash_to_g0(_TAG_GENERATOR, SUITE_ID.encode("ascii"))


def xor_bytes(a: bytes, b: bytes) -> bytes:
    """XOR of two equal-length byte strings."""
    if len(a) != len(b):
        raise ValueError("xor operands must have equal length")
    n = len(a)
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(n, "big")
