"""Brute-force cross-checks used by the test suite and `commel selftest`.

Everything here is deliberately dumb and desk-scale: enumerate the whole
subgroup, walk the generator powers to take discrete logs, transcribe
the layered-decryption formulas step by step.  None of it shares
arithmetic helpers with the main modules, so a bug there cannot confirm
itself here; inversions use Fermat's little theorem (a^(P-2) mod P)
where the main code asks Python for pow(a, -1, p).

The chi-square check is a sanity proxy only.  Uniform-looking first
components are a necessary consequence of correct nonce handling, not
evidence of indistinguishability in the cryptographic sense.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

from scipy.stats import chi2

from .group import GroupParams

MAX_ENUMERABLE_Q = 1 << 20


def enumerate_subgroup(params: GroupParams) -> list[int]:
    """All Q subgroup elements {g^0 … g^(Q-1)}, ascending.

    Raises:
        ValueError: Q exceeds the enumeration guard, or the powers do
            not form a Q-element set (the parameters are broken).
    """
    if params.q > MAX_ENUMERABLE_Q:
        raise ValueError(f"subgroup of order {params.q} is too large to enumerate")
    elements = set()
    current = 1
    for _ in range(params.q):
        elements.add(current)
        current = (current * params.g) % params.p
    if len(elements) != params.q:
        raise ValueError(
            f"generator produced {len(elements)} distinct powers, expected {params.q}"
        )
    return sorted(elements)


def brute_force_dlog(target: int, params: GroupParams) -> int:
    """The unique x with g^x = target, found by walking all powers.

    Raises:
        ValueError: guard exceeded, or target is not a subgroup element.
    """
    if params.q > MAX_ENUMERABLE_Q:
        raise ValueError(f"subgroup of order {params.q} is too large to search")
    current = 1
    for exponent in range(params.q):
        if current == target:
            return exponent
        current = (current * params.g) % params.p
    raise ValueError(f"{target} is not in the order-{params.q} subgroup")


class ChiSquareResult(NamedTuple):
    statistic: float
    critical_value: float
    df: int
    passed: bool


def chi_square_uniform(
    samples: Sequence[int], params: GroupParams, alpha: float = 0.001
) -> ChiSquareResult:
    """Pearson chi-square of ``samples`` against uniform over the subgroup.

    Bins are the Q subgroup elements; the result passes iff the
    statistic stays below the chi-square critical value at significance
    ``alpha`` with Q-1 degrees of freedom.

    Raises:
        ValueError: fewer than 10*Q samples (expected counts too small
            for the statistic to mean anything), or a sample outside
            the subgroup.
    """
    elements = enumerate_subgroup(params)
    if len(samples) < 10 * params.q:
        raise ValueError(
            f"need at least {10 * params.q} samples for Q={params.q}, got {len(samples)}"
        )
    counts = dict.fromkeys(elements, 0)
    for sample in samples:
        if sample not in counts:
            raise ValueError(f"sample {sample} is not in the subgroup")
        counts[sample] += 1
    expected = len(samples) / params.q
    statistic = sum((count - expected) ** 2 / expected for count in counts.values())
    df = params.q - 1
    critical = float(chi2.ppf(1.0 - alpha, df))
    return ChiSquareResult(statistic, critical, df, statistic < critical)


class PipelineResult(NamedTuple):
    """Every intermediate of one full encrypt/re-encrypt/decrypt chain."""

    public_a: int
    public_b: int
    pair: tuple[int, int]
    refreshed: tuple[int, int]
    triple: tuple[int, int, int]
    via_b_first: int
    via_a_first: int


def reference_pipeline(
    m: int, x_a: int, x_b: int, k_a: int, k_b: int, r: int, params: GroupParams
) -> PipelineResult:
    """Direct transcription of the layered scheme, formula by formula.

    Runs: encrypt m under key A with nonce k_a, re-randomize with r
    (r=0 is the identity refresh), add layer B with nonce k_b, then
    strip the layers in both orders.  The two recovered values are
    returned so callers can check they both equal m.
    """
    p, g = params.p, params.g

    def inv(value: int) -> int:
        # Fermat, not pow(value, -1, p): keep the math independent of
        # the main modules.
        return pow(value, p - 2, p)

    y_a = pow(g, x_a, p)
    y_b = pow(g, x_b, p)

    # First layer: (g^k_a, m * y_a^k_a)
    e1 = pow(g, k_a, p)
    e2 = (m * pow(y_a, k_a, p)) % p

    # Re-randomization by r under y_a.
    f1 = (e1 * pow(g, r, p)) % p
    f2 = (e2 * pow(y_a, r, p)) % p

    # Second layer: (f1, g^k_b, f2 * y_b^k_b)
    t1 = f1
    t2 = pow(g, k_b, p)
    t3 = (f2 * pow(y_b, k_b, p)) % p

    # B first: strip layer b, then layer a.
    b_pair = (t1, (t3 * inv(pow(t2, x_b, p))) % p)
    via_b_first = (b_pair[1] * inv(pow(b_pair[0], x_a, p))) % p

    # A first: strip layer a, then layer b.
    a_pair = (t2, (t3 * inv(pow(t1, x_a, p))) % p)
    via_a_first = (a_pair[1] * inv(pow(a_pair[0], x_b, p))) % p

    return PipelineResult(
        public_a=y_a,
        public_b=y_b,
        pair=(e1, e2),
        refreshed=(f1, f2),
        triple=(t1, t2, t3),
        via_b_first=via_b_first,
        via_a_first=via_a_first,
    )
