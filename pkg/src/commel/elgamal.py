"""ElGamal encryption over the prime-order subgroup.

Standard multiplicative ElGamal: a key pair is (x, y = g^x), a message
element m encrypts to the pair (g^k, m * y^k) for a fresh uniform nonce
k, and decryption computes c2 * (c1^x)^-1.  Ciphertexts can also be
re-randomized without the private key, which yields a fresh, unlinkable
encryption of the same element.

Key material can be serialized to a small line-based text format; public
and private key files share the layout and differ only in the ROLE line
and the presence of X.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .group import (
    GroupParams,
    ensure_element,
    mod_inv,
    mod_mul,
    random_scalar,
    validate_params,
)

KEY_HEADER = "commel-key-v1"


class Ciphertext2(NamedTuple):
    """An ElGamal ciphertext pair (g^k, m * y^k)."""

    c1: int
    c2: int


@dataclass(frozen=True)
class PublicKey:
    """Group parameters plus the public element y = g^x."""

    params: GroupParams
    y: int


@dataclass(frozen=True)
class KeyPair:
    """A private scalar x with its public element y = g^x."""

    params: GroupParams
    x: int
    y: int

    @property
    def public_key(self) -> PublicKey:
        return PublicKey(self.params, self.y)


def keygen(params: GroupParams, rng: random.Random | None = None) -> KeyPair:
    """Draw a uniform private scalar and derive the public element.

    Raises:
        ValueError: ``params`` fails validation.
    """
    if not validate_params(params):
        raise ValueError("invalid group parameters")
    x = random_scalar(params, rng)
    y = pow(params.g, x, params.p)
    return KeyPair(params=params, x=x, y=y)


def encrypt(
    key: PublicKey | KeyPair,
    message: int,
    rng: random.Random | None = None,
    *,
    nonce: int | None = None,
) -> Ciphertext2:
    """Encrypt a subgroup element under ``key``.

    Args:
        key: recipient key; only the public part is used.
        message: element of the subgroup (encode payloads first).
        rng: randomness source for the nonce; defaults to the OS CSPRNG.
        nonce: fixed nonce k, for tests that need a reproducible
            ciphertext.  Never fix the nonce outside tests.

    Raises:
        NotInSubgroupError: ``message`` is not a subgroup element.
    """
    params = key.params
    ensure_element(message, params, "message")
    k = random_scalar(params, rng) if nonce is None else nonce % params.q
    c1 = pow(params.g, k, params.p)
    c2 = mod_mul(message, pow(key.y, k, params.p), params)
    return Ciphertext2(c1, c2)


def decrypt(key: KeyPair, ciphertext: Ciphertext2) -> int:
    """Recover the message element: c2 * (c1^x)^-1 mod p.

    Raises:
        NotInSubgroupError: a ciphertext component is outside the subgroup.
    """
    params = key.params
    c1 = ensure_element(ciphertext.c1, params, "c1")
    c2 = ensure_element(ciphertext.c2, params, "c2")
    shared = pow(c1, key.x, params.p)
    return mod_mul(c2, mod_inv(shared, params), params)


def rerandomize(
    key: PublicKey | KeyPair,
    ciphertext: Ciphertext2,
    rng: random.Random | None = None,
    *,
    nonce: int | None = None,
) -> Ciphertext2:
    """Refresh a ciphertext without decrypting it.

    Multiplies in an encryption of the identity under the same key:
    (c1 * g^r, c2 * y^r) decrypts to the same element, and for uniform r
    the result is distributed exactly like a fresh encryption, so the
    output cannot be linked to the input without the private key.
    """
    params = key.params
    c1 = ensure_element(ciphertext.c1, params, "c1")
    c2 = ensure_element(ciphertext.c2, params, "c2")
    r = random_scalar(params, rng) if nonce is None else nonce % params.q
    return Ciphertext2(
        mod_mul(c1, pow(params.g, r, params.p), params),
        mod_mul(c2, pow(key.y, r, params.p), params),
    )


def format_public_key(key: PublicKey) -> str:
    return _format_key(key.params, key.y, x=None)


def format_private_key(key: KeyPair) -> str:
    return _format_key(key.params, key.y, x=key.x)


def _format_key(params: GroupParams, y: int, x: int | None) -> str:
    role = "private" if x is not None else "public"
    lines = [
        KEY_HEADER,
        f"ROLE={role}",
        f"P={params.p:x}",
        f"Q={params.q:x}",
        f"G={params.g:x}",
        f"GAMMA={params.gamma}",
        f"Y={y:x}",
    ]
    if x is not None:
        lines.append(f"X={x:x}")
    return "\n".join(lines) + "\n"


def _parse_field(line: str, key: str, base: int = 16) -> int:
    prefix = key + "="
    if not line.startswith(prefix):
        raise ValueError(f"expected '{key}=' line, got {line!r}")
    digits = line[len(prefix) :]
    allowed = "0123456789abcdef" if base == 16 else "0123456789"
    if not digits or any(c not in allowed for c in digits):
        raise ValueError(f"malformed {key} value {digits!r}")
    return int(digits, base)


def parse_key(text: str) -> PublicKey | KeyPair:
    """Parse a key file; the ROLE line decides which type comes back."""
    if not text.endswith("\n"):
        raise ValueError("key file must end with a newline")
    lines = text.split("\n")[:-1]
    if len(lines) < 7:
        raise ValueError("key file is truncated")
    if lines[0] != KEY_HEADER:
        raise ValueError(f"bad header {lines[0]!r}, expected {KEY_HEADER!r}")
    if lines[1] == "ROLE=public":
        want = 7
    elif lines[1] == "ROLE=private":
        want = 8
    else:
        raise ValueError(f"bad role line {lines[1]!r}")
    if len(lines) != want:
        raise ValueError(f"key file must have exactly {want} lines, got {len(lines)}")
    params = GroupParams(
        p=_parse_field(lines[2], "P"),
        q=_parse_field(lines[3], "Q"),
        g=_parse_field(lines[4], "G"),
        gamma=_parse_field(lines[5], "GAMMA", base=10),
    )
    y = _parse_field(lines[6], "Y")
    if want == 7:
        return PublicKey(params, y)
    return KeyPair(params, x=_parse_field(lines[7], "X"), y=y)


def save_key(key: PublicKey | KeyPair, path: str | Path) -> None:
    text = format_private_key(key) if isinstance(key, KeyPair) else format_public_key(key)
    Path(path).write_text(text, newline="\n")


def load_key(path: str | Path) -> PublicKey | KeyPair:
    return parse_key(Path(path).read_text())
