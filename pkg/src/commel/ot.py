"""1-out-of-n oblivious transfer built on the layered cipher.

The sender holds n payloads, the receiver wants item i; after four steps
the receiver knows payload i and nothing else, and the sender does not
learn i.  Message flow:

1. Offer: the sender makes a fresh keypair A, encrypts every payload
   under it, and sends all n ciphertexts plus its public key.
2. Choice: the receiver re-randomizes the one ciphertext it wants (see
   below), makes a fresh keypair B, adds a second layer under B, and
   sends the resulting triple back.
3. Strip: the sender removes its own layer from the triple, blind to
   which item it is handling, and returns the remaining pair.
4. Finish: the receiver removes layer B and decodes the payload.

Re-randomization in step 2 is not optional.  Adding the second layer
copies the chosen ciphertext's first component through unchanged, so
without a refresh the sender could match it against the offer and read
off the choice index.  The receiver therefore refreshes the chosen
ciphertext under the sender's public key first; the sender sees a
component distributed independently of i.

Both parties use fresh keypairs per session, so separate sessions are
unlinkable.  m-out-of-n retrieval is plain repetition: one independent
session per wanted index (duplicates included).
"""

from __future__ import annotations

import random
import secrets
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Protocol, Sequence

from .elgamal import (
    Ciphertext2,
    KeyPair,
    PublicKey,
    decrypt,
    encrypt,
    keygen,
    rerandomize,
)
from .group import (
    GroupParams,
    ParamsMismatchError,
    decode_message,
    encode_message,
    ensure_element,
    validate_params,
)
from .layered import Ciphertext3, reencrypt, strip_a

SESSION_ID_LEN = 16


class SessionStateError(RuntimeError):
    """A protocol message arrived out of order, twice, or for the wrong session."""


@dataclass(frozen=True)
class OtOffer:
    """Step 1: all n payloads encrypted under the sender's session key."""

    session_id: bytes
    params: GroupParams
    sender_pub: int
    items: tuple[Ciphertext2, ...]


@dataclass(frozen=True)
class OtChoice:
    """Step 2: the chosen item, refreshed and wrapped in the receiver's layer."""

    session_id: bytes
    receiver_pub: int
    chosen: Ciphertext3


@dataclass(frozen=True)
class OtStrip:
    """Step 3: the chosen triple with the sender's layer removed."""

    session_id: bytes
    stripped: Ciphertext2


@dataclass(frozen=True)
class OtError:
    """Failure report; carried on the wire as its own frame type."""

    session_id: bytes
    text: str


class SenderState(Enum):
    NEW = "new"
    OFFERED = "offered"
    STRIPPED = "stripped"


class ReceiverState(Enum):
    AWAITING_OFFER = "awaiting-offer"
    CHOSEN = "chosen"
    DONE = "done"


class SenderSession:
    """Sender-side state machine: NEW -> OFFERED -> STRIPPED.

    Transitions only move forward; feeding a message to a session in the
    wrong state raises :class:`SessionStateError` and leaves the state
    unchanged.
    """

    def __init__(self, params: GroupParams, session_id: bytes | None = None) -> None:
        if not validate_params(params):
            raise ValueError("invalid group parameters")
        if session_id is None:
            session_id = secrets.token_bytes(SESSION_ID_LEN)
        if len(session_id) != SESSION_ID_LEN:
            raise ValueError(f"session id must be {SESSION_ID_LEN} bytes")
        self.params = params
        self.session_id = session_id
        self.state = SenderState.NEW
        self.keypair: KeyPair | None = None
        self.payloads: tuple[int, ...] | None = None


class ReceiverSession:
    """Receiver-side state machine: AWAITING_OFFER -> CHOSEN -> DONE.

    Pass ``params`` to pin the group the offer must use; otherwise the
    offer's own (validated) parameters are accepted.
    """

    def __init__(self, params: GroupParams | None = None) -> None:
        self.expected_params = params
        self.state = ReceiverState.AWAITING_OFFER
        self.session_id: bytes | None = None
        self.params: GroupParams | None = None
        self.keypair: KeyPair | None = None
        self.index: int | None = None


def sender_offer(
    session: SenderSession,
    payloads: Sequence[int],
    rng: random.Random | None = None,
) -> OtOffer:
    """Encrypt every payload under a fresh session keypair (step 1).

    Each item gets an independent nonce, so equal payloads still yield
    unlinkable ciphertexts.

    Raises:
        ValueError: empty payload list, or a payload outside [1, Q].
        SessionStateError: the session has already offered.
    """
    if session.state is not SenderState.NEW:
        raise SessionStateError(f"cannot offer in state {session.state.name}")
    if not payloads:
        raise ValueError("need at least one payload to offer")
    params = session.params
    keypair = keygen(params, rng)
    items = tuple(
        encrypt(keypair.public_key, encode_message(payload, params), rng)
        for payload in payloads
    )
    session.keypair = keypair
    session.payloads = tuple(payloads)
    session.state = SenderState.OFFERED
    return OtOffer(session.session_id, params, keypair.y, items)


def receiver_choose(
    session: ReceiverSession,
    offer: OtOffer,
    index: int,
    rng: random.Random | None = None,
    *,
    rerandomize_nonce: int | None = None,
    reencrypt_nonce: int | None = None,
) -> OtChoice:
    """Pick item ``index`` and wrap it for the sender (step 2).

    The chosen ciphertext is first re-randomized under the sender's
    public key, then extended with a second layer under a fresh receiver
    keypair.  The nonce overrides exist for tests that enumerate the
    randomness; leave them unset otherwise.

    Raises:
        IndexError: ``index`` outside [0, n).
        ValueError: malformed offer (bad parameters, empty item list,
            bad session id length).
        ParamsMismatchError: the offer's group differs from the one the
            session was pinned to.
        NotInSubgroupError: an offered component fails the membership check.
        SessionStateError: the session already consumed an offer.
    """
    if session.state is not ReceiverState.AWAITING_OFFER:
        raise SessionStateError(f"cannot choose in state {session.state.name}")
    params = offer.params
    if not validate_params(params):
        raise ValueError("offer carries invalid group parameters")
    if session.expected_params is not None and params != session.expected_params:
        raise ParamsMismatchError("offer group differs from the pinned parameters")
    if len(offer.session_id) != SESSION_ID_LEN:
        raise ValueError(f"session id must be {SESSION_ID_LEN} bytes")
    if not offer.items:
        raise ValueError("offer contains no items")
    if not 0 <= index < len(offer.items):
        raise IndexError(f"choice index {index} out of range for {len(offer.items)} items")
    ensure_element(offer.sender_pub, params, "sender_pub")
    for pos, item in enumerate(offer.items):
        ensure_element(item.c1, params, f"items[{pos}].c1")
        ensure_element(item.c2, params, f"items[{pos}].c2")

    sender_key = PublicKey(params, offer.sender_pub)
    refreshed = rerandomize(sender_key, offer.items[index], rng, nonce=rerandomize_nonce)
    keypair = keygen(params, rng)
    chosen = reencrypt(keypair.public_key, refreshed, rng, nonce=reencrypt_nonce)

    session.params = params
    session.session_id = offer.session_id
    session.keypair = keypair
    session.index = index
    session.state = ReceiverState.CHOSEN
    return OtChoice(offer.session_id, keypair.y, chosen)


def sender_strip(session: SenderSession, choice: OtChoice) -> OtStrip:
    """Remove the sender's layer from the choice, blindly (step 3).

    Raises:
        SessionStateError: session not in OFFERED state (replay or
            out-of-order message), or session id mismatch.
        NotInSubgroupError: a choice component fails the membership check.
    """
    if session.state is not SenderState.OFFERED:
        raise SessionStateError(f"cannot strip in state {session.state.name}")
    if choice.session_id != session.session_id:
        raise SessionStateError("choice addresses an unknown session")
    assert session.keypair is not None
    ensure_element(choice.receiver_pub, session.params, "receiver_pub")
    stripped = strip_a(session.keypair, choice.chosen)
    session.state = SenderState.STRIPPED
    return OtStrip(session.session_id, stripped)


def receiver_finish(session: ReceiverSession, strip: OtStrip) -> int:
    """Remove the receiver's layer and decode the payload (step 4).

    Raises:
        SessionStateError: session not in CHOSEN state or id mismatch.
        NotInSubgroupError: a stripped component fails the membership check.
    """
    if session.state is not ReceiverState.CHOSEN:
        raise SessionStateError(f"cannot finish in state {session.state.name}")
    if strip.session_id != session.session_id:
        raise SessionStateError("strip addresses an unknown session")
    assert session.keypair is not None and session.params is not None
    element = decrypt(session.keypair, strip.stripped)
    payload = decode_message(element, session.params)
    session.state = ReceiverState.DONE
    return payload


class MessageChannel(Protocol):
    """Duplex, in-order delivery of whole protocol messages."""

    def send(self, message: object) -> None: ...

    def recv(self) -> object: ...


def run_m_of_n(
    payloads: Sequence[int],
    choices: Sequence[int],
    params: GroupParams,
    transport: Callable[[], tuple[MessageChannel, MessageChannel]] | None = None,
    rng: random.Random | None = None,
) -> list[int]:
    """Retrieve m payloads by running m independent 1-of-n sessions.

    Args:
        payloads: the sender's list (same list every session).
        choices: wanted indices, duplicates allowed; one session each.
        params: group both parties use.
        transport: factory yielding a connected (sender side, receiver
            side) channel pair per session; None passes messages directly.
        rng: randomness source shared by both roles (tests only).

    Returns:
        The recovered payloads, in choice order.  A session failure
        propagates as its exception; completed sessions are unaffected
        because nothing is shared between them.
    """
    results: list[int] = []
    for index in choices:
        sender = SenderSession(params)
        receiver = ReceiverSession(params)
        if transport is None:
            offer = sender_offer(sender, payloads, rng)
            choice = receiver_choose(receiver, offer, index, rng)
            strip = sender_strip(sender, choice)
            results.append(receiver_finish(receiver, strip))
        else:
            side_s, side_r = transport()
            side_s.send(sender_offer(sender, payloads, rng))
            choice_msg = receiver_choose(receiver, side_r.recv(), index, rng)
            side_r.send(choice_msg)
            side_s.send(sender_strip(sender, side_s.recv()))
            results.append(receiver_finish(receiver, side_r.recv()))
    return results
