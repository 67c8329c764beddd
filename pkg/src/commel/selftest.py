"""Built-in sanity battery backing `commel selftest`.

Runs the brute-force oracles from :mod:`commel.oracle` against the main
modules on a small hand-checkable group (P=23, Q=11, g=4), including the
full exhaustive sweep of the layered scheme over every plaintext, key
and nonce combination.  Results come back as delimited rows; with a
report directory they are also written to ``selftest.csv`` next to two
rendered figures:

* ``uniformity_bins.png``: observed first-component bin counts for
  11,000 encryptions against the uniform expectation,
* ``ot_first_component.png``: how often each subgroup element shows up
  as the transmitted first component per choice index, swept over every
  re-randomization scalar (a flat all-ones grid is the pass state).
"""

from __future__ import annotations

import csv
import random
from pathlib import Path
from typing import NamedTuple

from .elgamal import KeyPair, encrypt, decrypt
from .group import GroupParams, encode_message, mod_exp
from .layered import Ciphertext3, StripOrder, decrypt_full, reencrypt
from .oracle import (
    brute_force_dlog,
    chi_square_uniform,
    enumerate_subgroup,
    reference_pipeline,
)
from .ot import ReceiverSession, SenderSession, receiver_choose, run_m_of_n, sender_offer

# Small demonstration group: 23 = 2*11 + 1, generator 4 of the
# order-11 quadratic-residue subgroup.
DEMO_PARAMS = GroupParams(p=23, q=11, g=4, gamma=2)

CSV_FIELDS = ("check", "cases", "passed", "detail")


class CheckResult(NamedTuple):
    check: str
    cases: int
    passed: bool
    detail: str


def _keypair(params: GroupParams, x: int) -> KeyPair:
    return KeyPair(params, x=x, y=mod_exp(params.g, x, params))


def _check_subgroup() -> CheckResult:
    params = DEMO_PARAMS
    elements = enumerate_subgroup(params)
    direct = sorted({mod_exp(params.g, e, params) for e in range(params.q)})
    ok = elements == direct and len(elements) == params.q
    return CheckResult("subgroup-enumeration", params.q, ok, f"elements={elements}")


def _check_dlog() -> CheckResult:
    params = DEMO_PARAMS
    failures = sum(
        1
        for x in range(params.q)
        if brute_force_dlog(mod_exp(params.g, x, params), params) != x
    )
    return CheckResult("dlog-roundtrip", params.q, failures == 0, f"failures={failures}")


def _check_elgamal_roundtrip() -> CheckResult:
    params = DEMO_PARAMS
    elements = enumerate_subgroup(params)
    failures = 0
    cases = 0
    for m in elements:
        for x in range(params.q):
            key = _keypair(params, x)
            for k in range(params.q):
                cases += 1
                if decrypt(key, encrypt(key.public_key, m, nonce=k)) != m:
                    failures += 1
    return CheckResult("elgamal-roundtrip", cases, failures == 0, f"failures={failures}")


def _check_layered_agreement() -> CheckResult:
    # Full sweep: every plaintext x key pair x nonce pair, checked
    # against the independent formula transcription, both strip orders.
    params = DEMO_PARAMS
    elements = enumerate_subgroup(params)
    failures = 0
    cases = 0
    for m in elements:
        for x_a in range(params.q):
            key_a = _keypair(params, x_a)
            for x_b in range(params.q):
                key_b = _keypair(params, x_b)
                for k_a in range(params.q):
                    pair = encrypt(key_a.public_key, m, nonce=k_a)
                    for k_b in range(params.q):
                        cases += 1
                        triple = reencrypt(key_b.public_key, pair, nonce=k_b)
                        want = reference_pipeline(m, x_a, x_b, k_a, k_b, 0, params)
                        if (
                            triple != Ciphertext3(*want.triple)
                            or decrypt_full(key_a, key_b, triple, StripOrder.B_FIRST) != m
                            or decrypt_full(key_a, key_b, triple, StripOrder.A_FIRST) != m
                            or want.via_b_first != m
                            or want.via_a_first != m
                        ):
                            failures += 1
    return CheckResult("layered-agreement", cases, failures == 0, f"failures={failures}")


def _check_uniformity(rng: random.Random) -> tuple[CheckResult, dict[int, int]]:
    params = DEMO_PARAMS
    key = _keypair(params, x=3)
    message = encode_message(2, params)
    samples = [encrypt(key.public_key, message, rng).c1 for _ in range(11_000)]
    counts = {element: 0 for element in enumerate_subgroup(params)}
    for sample in samples:
        counts[sample] += 1
    result = chi_square_uniform(samples, params)
    detail = f"statistic={result.statistic:.2f} critical={result.critical_value:.2f}"
    return (
        CheckResult("encrypt-uniformity", len(samples), result.passed, detail),
        counts,
    )


def _check_ot_uniformity(rng: random.Random) -> tuple[CheckResult, list[list[int]]]:
    # For every choice index, sweep all Q re-randomization scalars; the
    # transmitted first component must hit each subgroup element once.
    params = DEMO_PARAMS
    elements = enumerate_subgroup(params)
    position = {element: i for i, element in enumerate(elements)}
    payloads = [2, 5, 7]
    sender = SenderSession(params)
    offer = sender_offer(sender, payloads, rng)
    grid = [[0] * len(elements) for _ in payloads]
    for index in range(len(payloads)):
        for r in range(params.q):
            receiver = ReceiverSession(params)
            choice = receiver_choose(receiver, offer, index, rng, rerandomize_nonce=r)
            grid[index][position[choice.chosen.c1]] += 1
    ok = all(count == 1 for row in grid for count in row)
    cases = len(payloads) * params.q
    return CheckResult("ot-first-component-uniformity", cases, ok, f"grid={grid}"), grid


def _check_ot_end_to_end(rng: random.Random) -> CheckResult:
    params = DEMO_PARAMS
    payloads = [2, 5, 7, 9, 11]
    got = run_m_of_n(payloads, list(range(len(payloads))), params, rng=rng)
    ok = got == payloads
    return CheckResult("ot-end-to-end", len(payloads), ok, f"recovered={got}")


def _render_figures(
    report_dir: Path, counts: dict[int, int], grid: list[list[int]]
) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    elements = sorted(counts)
    expected = sum(counts.values()) / len(counts)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar([str(e) for e in elements], [counts[e] for e in elements], color="#4878a8")
    ax.axhline(expected, color="#c44e52", linestyle="--", label=f"uniform = {expected:.0f}")
    ax.set_xlabel("first component value")
    ax.set_ylabel("observed count")
    ax.set_title("Encryption first components vs uniform")
    ax.legend()
    fig.tight_layout()
    path = report_dir / "uniformity_bins.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7, 3))
    image = ax.imshow(grid, cmap="viridis", aspect="auto", vmin=0)
    ax.set_xticks(range(len(elements)), [str(e) for e in elements])
    ax.set_yticks(range(len(grid)), [f"i={i}" for i in range(len(grid))])
    ax.set_xlabel("transmitted first component")
    ax.set_ylabel("choice index")
    ax.set_title("Choice first component per re-randomization scalar")
    fig.colorbar(image, ax=ax, label="hits")
    fig.tight_layout()
    path = report_dir / "ot_first_component.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


def run_selftest(
    rng: random.Random | None = None, report_dir: str | Path | None = None
) -> tuple[list[CheckResult], bool]:
    """Run the whole battery; optionally write the CSV + figures.

    Returns the row list and an overall verdict.  The exhaustive layered
    sweep dominates the runtime (a few seconds).
    """
    rng = rng or random.SystemRandom()
    results = [
        _check_subgroup(),
        _check_dlog(),
        _check_elgamal_roundtrip(),
        _check_layered_agreement(),
    ]
    uniformity, counts = _check_uniformity(rng)
    results.append(uniformity)
    ot_uniformity, grid = _check_ot_uniformity(rng)
    results.append(ot_uniformity)
    results.append(_check_ot_end_to_end(rng))

    if report_dir is not None:
        report = Path(report_dir)
        report.mkdir(parents=True, exist_ok=True)
        with open(report / "selftest.csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_FIELDS)
            for row in results:
                writer.writerow([row.check, row.cases, str(row.passed).lower(), row.detail])
        _render_figures(report, counts, grid)

    return results, all(row.passed for row in results)
