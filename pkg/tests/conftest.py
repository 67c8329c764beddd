"""Shared fixtures: the hand-checkable small group and two frozen
safe-prime groups.

The big groups were generated once with this package's own generator
(seeds 0xC0FFEE and 0xFEEDFACE) and re-verified with sympy's
independent primality test before being frozen here; a conftest-level
test re-checks the invariants cheaply on every run.  Generating fresh
1024-bit parameters per session would add tens of seconds for no extra
coverage; the generator itself is exercised separately.
"""

from __future__ import annotations

import random

import pytest

from commel.elgamal import KeyPair
from commel.group import GroupParams

SMALL_PARAMS = GroupParams(p=23, q=11, g=4, gamma=2)

# All 11 elements of the small subgroup, ascending.
SMALL_SUBGROUP = [1, 2, 3, 4, 6, 8, 9, 12, 13, 16, 18]

P512 = int(
    "b1186b18a74fdafc9a2e6c0bb955004fcdd07c2d834ab1813a79e71d0f39147f"
    "8c4c2c6f7615c70b6a278a805661f8c48b055bf2bd755ce434bea146faf0238f",
    16,
)
G512 = int(
    "4067f7dc70f42e9e2efc2af2d78a63e9f581692875429be0b3b0d7a05d35e541"
    "e700f844b8e10a1fc43eaf97467f8bd1118c136c62892900ee3596cf6a022933",
    16,
)
PARAMS512 = GroupParams(p=P512, q=(P512 - 1) // 2, g=G512, gamma=2)

P1024 = int(
    "c2fc56a21f6b090681ae2a9b5a5f75a1d6b4b660c6b179db4b9dcb25cebfc4df"
    "61d9dacf11de4fbc8519cf39972c91d290c996b1d812380648dd1f436ec33f63"
    "b568913ab0327000d6f5476f0906a610ee7a1f468f190e7cddf50c2529db37b4"
    "2e6905dc56f410c24b9dce7d91cfaf92326a8fc22e1d7223573db6bba03e0ae7",
    16,
)
G1024 = int(
    "8b99896e09ea09774a9a7bef529a655dcf95b6d043cc0345c6243c6ace6db2d5"
    "a5b245567e7ea53f2c1832a569c6ecc80c91314109f840bf6c64512875dd5bbf"
    "b8fc0527dfeb6d4bb7b60d84a5a74be9ab1f680a666c24a45f9536c69b8123f8"
    "50a83455b40e5dcf36ffda3e642161db35fc41aa8d1da812df8ba028fdc024aa",
    16,
)
PARAMS1024 = GroupParams(p=P1024, q=(P1024 - 1) // 2, g=G1024, gamma=2)


def make_keypair(params: GroupParams, x: int) -> KeyPair:
    return KeyPair(params, x=x, y=pow(params.g, x, params.p))


@pytest.fixture
def small_params() -> GroupParams:
    return SMALL_PARAMS


@pytest.fixture
def params512() -> GroupParams:
    return PARAMS512


@pytest.fixture
def params1024() -> GroupParams:
    return PARAMS1024


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xDEADBEEF)
