"""Two-layer encryption with order-independent removal.

Plain ElGamal is not commutative: encrypting under A then B forces the
layers off in last-on-first-off order.  The variant here instead extends
an existing ciphertext (c1, c2) under a second public key y_b to a
triple

    (c1, g^k_b, c2 * y_b^k_b)

which carries both layers side by side.  Either private key can then
strip its own layer first:

* strip_b removes the second layer, leaving the original-style pair
  (c1, c3 * (c2^x_b)^-1) decryptable by A,
* strip_a removes the first layer, leaving (c2, c3 * (c1^x_a)^-1)
  decryptable by B,

and both orders recover the same message element.
"""

from __future__ import annotations

import enum
import random
from typing import NamedTuple

from .elgamal import Ciphertext2, KeyPair, PublicKey, decrypt
from .group import ParamsMismatchError, ensure_element, mod_inv, mod_mul, random_scalar


class Ciphertext3(NamedTuple):
    """A twice-encrypted triple (g^k_a, g^k_b, m * y_a^k_a * y_b^k_b)."""

    c1: int
    c2: int
    c3: int


class StripOrder(enum.Enum):
    """Which layer :func:`decrypt_full` removes first."""

    B_FIRST = "b-first"
    A_FIRST = "a-first"


def reencrypt(
    key_b: PublicKey | KeyPair,
    ciphertext: Ciphertext2,
    rng: random.Random | None = None,
    *,
    nonce: int | None = None,
) -> Ciphertext3:
    """Add a second encryption layer under ``key_b``.

    The input pair is kept as (c1, blinded message); the new layer
    contributes its own nonce commitment g^k_b and folds y_b^k_b into
    the blinded component.  No private key is needed.

    Args:
        key_b: second-layer key; only the public part is used.
        ciphertext: an existing single-layer encryption.
        rng: randomness source for the layer nonce.
        nonce: fixed k_b for reproducible tests only.

    Raises:
        NotInSubgroupError: a ciphertext component is outside the subgroup.
    """
    params = key_b.params
    c1 = ensure_element(ciphertext.c1, params, "c1")
    c2 = ensure_element(ciphertext.c2, params, "c2")
    k_b = random_scalar(params, rng) if nonce is None else nonce % params.q
    return Ciphertext3(
        c1,
        pow(params.g, k_b, params.p),
        mod_mul(c2, pow(key_b.y, k_b, params.p), params),
    )


def strip_b(key_b: KeyPair, ciphertext: Ciphertext3) -> Ciphertext2:
    """Remove the second layer, leaving a pair decryptable by key A."""
    params = key_b.params
    c1 = ensure_element(ciphertext.c1, params, "c1")
    c2 = ensure_element(ciphertext.c2, params, "c2")
    c3 = ensure_element(ciphertext.c3, params, "c3")
    shared = pow(c2, key_b.x, params.p)
    return Ciphertext2(c1, mod_mul(c3, mod_inv(shared, params), params))


def strip_a(key_a: KeyPair, ciphertext: Ciphertext3) -> Ciphertext2:
    """Remove the first layer, leaving a pair decryptable by key B."""
    params = key_a.params
    c1 = ensure_element(ciphertext.c1, params, "c1")
    c2 = ensure_element(ciphertext.c2, params, "c2")
    c3 = ensure_element(ciphertext.c3, params, "c3")
    shared = pow(c1, key_a.x, params.p)
    return Ciphertext2(c2, mod_mul(c3, mod_inv(shared, params), params))


def decrypt_full(
    key_a: KeyPair,
    key_b: KeyPair,
    ciphertext: Ciphertext3,
    order: StripOrder = StripOrder.B_FIRST,
) -> int:
    """Strip both layers in the given order and return the message element.

    Raises:
        ParamsMismatchError: the two keys belong to different groups.
    """
    if key_a.params != key_b.params:
        raise ParamsMismatchError("keys A and B use different group parameters")
    if order is StripOrder.B_FIRST:
        return decrypt(key_a, strip_b(key_b, ciphertext))
    if order is StripOrder.A_FIRST:
        return decrypt(key_b, strip_a(key_a, ciphertext))
    raise ValueError(f"unknown strip order {order!r}")
