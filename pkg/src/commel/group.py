"""Prime-order subgroup parameters and arithmetic.

Everything downstream works inside the multiplicative subgroup of order q
of the integers modulo p, where p = gamma * q + 1 and both p and q are
prime.  This module owns:

* generation and validation of those parameters,
* the reversible encoding of application payloads into the subgroup
  (gamma = 2 only, via the residue-or-negation map),
* uniform scalar sampling and the modular arithmetic helpers.

Group elements and scalars are plain Python integers; the parameter set
they belong to is always passed explicitly.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass
from pathlib import Path

_SYSTEM_RNG = random.SystemRandom()

PARAMS_HEADER = "commel-params-v1"

DEFAULT_MR_ROUNDS = 64

# Trial-division primes used to discard most candidates before Miller-Rabin.
_SMALL_PRIMES: list[int] = []


def _init_small_primes(limit: int = 1000) -> None:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(sieve[i * i :: i]))
    _SMALL_PRIMES.extend(i for i in range(2, limit + 1) if sieve[i])


_init_small_primes()


class NotInSubgroupError(ValueError):
    """A value that must lie in the order-q subgroup does not."""


class ParamGenerationError(RuntimeError):
    """Parameter search exhausted its attempt cap."""


class ParamsMismatchError(ValueError):
    """Two keys that must share group parameters do not."""


@dataclass(frozen=True)
class GroupParams:
    """Public parameters (p, q, g, gamma) of the prime-order subgroup.

    Invariants (checked by :func:`validate_params`): p and q are prime,
    p = gamma * q + 1, and g is a generator of the order-q subgroup
    (g != 1, g^q = 1 mod p).
    """

    p: int
    q: int
    g: int
    gamma: int


@dataclass(frozen=True)
class ParamGenConfig:
    """Knobs for :func:`generate_params`.

    ``bits`` is the target bit length of the modulus p.  Values below 16
    are allowed structurally (down to 4) so the failure path can be
    exercised, but 16 is the supported floor.
    """

    bits: int
    gamma: int = 2
    mr_rounds: int = DEFAULT_MR_ROUNDS
    max_attempts: int = 1_000_000

    def __post_init__(self) -> None:
        if self.bits < 4:
            raise ValueError("bit length must be at least 4")
        if self.gamma < 2:
            raise ValueError("cofactor gamma must be at least 2")
        if self.mr_rounds < 1:
            raise ValueError("at least one Miller-Rabin round is required")
        if self.max_attempts < 1:
            raise ValueError("attempt cap must be positive")


def is_probable_prime(n: int, rounds: int = DEFAULT_MR_ROUNDS, rng: random.Random | None = None) -> bool:
    """Miller-Rabin primality test with random bases.

    A composite survives one round with probability at most 1/4, so the
    default of 64 rounds leaves a false-positive chance below 2^-128.
    """
    rng = rng or _SYSTEM_RNG
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    # Write n - 1 as 2^r * d with d odd.
    d = n - 1
    r = 0
    while d % 2 == 0:
        r += 1
        d //= 2
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def _survives_sieve(n: int) -> bool:
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    return True


def generate_params(cfg: ParamGenConfig, rng: random.Random | None = None) -> GroupParams:
    """Generate subgroup parameters with a ``cfg.bits``-bit prime modulus.

    Draws uniform candidates q until both q and p = gamma * q + 1 are
    prime, then derives a generator as g = h^gamma mod p for uniform h,
    retrying while g = 1.

    Raises:
        ParamGenerationError: no parameter set was found within
            ``cfg.max_attempts`` candidate draws (the requested size or
            cofactor is infeasible, or the cap is too tight).
    """
    rng = rng or _SYSTEM_RNG
    gamma = cfg.gamma
    # q range that makes p = gamma*q + 1 exactly cfg.bits long.
    q_lo = (1 << (cfg.bits - 1)) // gamma + 1
    q_hi = ((1 << cfg.bits) - 2) // gamma
    if q_lo > q_hi:
        raise ParamGenerationError(f"no {cfg.bits}-bit modulus exists for gamma={gamma}")
    for _ in range(cfg.max_attempts):
        q = rng.randrange(q_lo, q_hi + 1)
        p = gamma * q + 1
        if not (_survives_sieve(q) and _survives_sieve(p)):
            continue
        if not is_probable_prime(q, cfg.mr_rounds, rng):
            continue
        if not is_probable_prime(p, cfg.mr_rounds, rng):
            continue
        while True:
            h = rng.randrange(2, p - 1)
            g = pow(h, gamma, p)
            if g != 1:
                break
        params = GroupParams(p=p, q=q, g=g, gamma=gamma)
        assert p.bit_length() == cfg.bits
        return params
    raise ParamGenerationError(
        f"no valid parameters found in {cfg.max_attempts} attempts "
        f"(bits={cfg.bits}, gamma={gamma})"
    )


@functools.lru_cache(maxsize=64)
def _validate_cached(params: GroupParams, rounds: int) -> bool:
    p, q, g, gamma = params.p, params.q, params.g, params.gamma
    if not all(isinstance(v, int) for v in (p, q, g, gamma)):
        return False
    if p < 7 or q < 2 or gamma < 2:
        return False
    if p != gamma * q + 1:
        return False
    if not 2 <= g <= p - 1:
        return False
    if g == 1 or pow(g, q, p) != 1:
        return False
    if not is_probable_prime(p, rounds):
        return False
    if not is_probable_prime(q, rounds):
        return False
    return True


def validate_params(params: GroupParams, rounds: int = DEFAULT_MR_ROUNDS) -> bool:
    """True iff ``params`` satisfies every structural invariant.

    Never raises; malformed input simply yields False.  Results are
    cached per parameter value, so revalidating the same group is free.
    """
    try:
        return _validate_cached(params, rounds)
    except (TypeError, ValueError):
        return False


def is_element(value: int, params: GroupParams) -> bool:
    """Membership test for the order-q subgroup."""
    return 1 <= value <= params.p - 1 and pow(value, params.q, params.p) == 1


def ensure_element(value: int, params: GroupParams, what: str = "value") -> int:
    """Return ``value`` if it lies in the subgroup, else raise."""
    if not is_element(value, params):
        raise NotInSubgroupError(f"{what} {value} is not in the order-{params.q} subgroup")
    return value


def _require_encodable(params: GroupParams) -> None:
    if params.gamma != 2 or params.p % 4 != 3:
        raise ValueError(
            "message encoding needs safe-prime parameters (gamma=2, p = 3 mod 4)"
        )


def encode_message(payload: int, params: GroupParams) -> int:
    """Map an integer payload in [1, q] to a subgroup element, reversibly.

    With gamma = 2 the subgroup is exactly the quadratic residues mod p,
    and since p = 3 (mod 4) exactly one of {payload, p - payload} is a
    residue.  That one is returned; :func:`decode_message` inverts the map.
    """
    _require_encodable(params)
    if not 1 <= payload <= params.q:
        raise ValueError(f"payload must be in [1, {params.q}], got {payload}")
    if pow(payload, params.q, params.p) == 1:
        return payload
    return params.p - payload


def decode_message(element: int, params: GroupParams) -> int:
    """Inverse of :func:`encode_message`: recover the payload in [1, q]."""
    _require_encodable(params)
    ensure_element(element, params, "element")
    return min(element, params.p - element)


def random_scalar(params: GroupParams, rng: random.Random | None = None) -> int:
    """Uniform scalar in [0, q-1] via rejection sampling on bit strings."""
    rng = rng or _SYSTEM_RNG
    nbits = params.q.bit_length()
    while True:
        value = rng.getrandbits(nbits)
        if value < params.q:
            return value


def mod_exp(base: int, exponent: int, params: GroupParams) -> int:
    """base^exponent mod p."""
    return pow(base, exponent, params.p)


def mod_mul(a: int, b: int, params: GroupParams) -> int:
    """a * b mod p."""
    return (a * b) % params.p


def mod_inv(a: int, params: GroupParams) -> int:
    """Multiplicative inverse of a mod p; zero has none."""
    if a % params.p == 0:
        raise ValueError("0 has no modular inverse")
    return pow(a, -1, params.p)


def format_params(params: GroupParams) -> str:
    """Render the parameter file format (header line, then P/Q/G/GAMMA)."""
    return (
        f"{PARAMS_HEADER}\n"
        f"P={params.p:x}\n"
        f"Q={params.q:x}\n"
        f"G={params.g:x}\n"
        f"GAMMA={params.gamma}\n"
    )


def _parse_field(line: str, key: str, base: int) -> int:
    prefix = key + "="
    if not line.startswith(prefix):
        raise ValueError(f"expected '{key}=' line, got {line!r}")
    digits = line[len(prefix) :]
    allowed = "0123456789abcdef" if base == 16 else "0123456789"
    if not digits or any(c not in allowed for c in digits):
        raise ValueError(f"malformed {key} value {digits!r}")
    return int(digits, base)


def parse_params(text: str) -> GroupParams:
    """Parse the parameter file format produced by :func:`format_params`."""
    if not text.endswith("\n"):
        raise ValueError("parameter file must end with a newline")
    lines = text.split("\n")[:-1]
    if len(lines) != 5:
        raise ValueError(f"parameter file must have exactly 5 lines, got {len(lines)}")
    if lines[0] != PARAMS_HEADER:
        raise ValueError(f"bad header {lines[0]!r}, expected {PARAMS_HEADER!r}")
    return GroupParams(
        p=_parse_field(lines[1], "P", 16),
        q=_parse_field(lines[2], "Q", 16),
        g=_parse_field(lines[3], "G", 16),
        gamma=_parse_field(lines[4], "GAMMA", 10),
    )


def save_params(params: GroupParams, path: str | Path) -> None:
    Path(path).write_text(format_params(params), newline="\n")


def load_params(path: str | Path) -> GroupParams:
    return parse_params(Path(path).read_text())
