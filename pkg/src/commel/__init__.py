"""Layered ElGamal encryption whose two decryption layers come off in
either order, plus a 1-out-of-n oblivious transfer protocol built on it.

The usual entry points:

* :mod:`commel.group`: parameters, payload encoding, arithmetic.
* :mod:`commel.elgamal`: keypairs, encrypt/decrypt, re-randomization.
* :mod:`commel.layered`: the second layer and order-independent removal.
* :mod:`commel.ot`: the oblivious transfer state machines.
* :mod:`commel.transport` / :mod:`commel.wire`: sockets and bytes.

No integrity protection anywhere: these are malleable ciphertexts by
design, and decrypting with a wrong key yields a wrong payload rather
than an error.
"""

from .elgamal import (
    Ciphertext2,
    KeyPair,
    PublicKey,
    decrypt,
    encrypt,
    keygen,
    load_key,
    parse_key,
    rerandomize,
    save_key,
)
from .group import (
    GroupParams,
    NotInSubgroupError,
    ParamGenConfig,
    ParamGenerationError,
    ParamsMismatchError,
    decode_message,
    encode_message,
    generate_params,
    load_params,
    parse_params,
    random_scalar,
    save_params,
    validate_params,
)
from .layered import Ciphertext3, StripOrder, decrypt_full, reencrypt, strip_a, strip_b
from .ot import (
    OtChoice,
    OtError,
    OtOffer,
    OtStrip,
    ReceiverSession,
    ReceiverState,
    SenderSession,
    SenderState,
    SessionStateError,
    receiver_choose,
    receiver_finish,
    run_m_of_n,
    sender_offer,
    sender_strip,
)
from .transport import ProtocolError, choose_ot, memory_pair, serve_ot
from .wire import WireFormatError

__version__ = "0.1.0"

__all__ = [
    "Ciphertext2",
    "Ciphertext3",
    "GroupParams",
    "KeyPair",
    "NotInSubgroupError",
    "OtChoice",
    "OtError",
    "OtOffer",
    "OtStrip",
    "ParamGenConfig",
    "ParamGenerationError",
    "ParamsMismatchError",
    "ProtocolError",
    "PublicKey",
    "ReceiverSession",
    "ReceiverState",
    "SenderSession",
    "SenderState",
    "SessionStateError",
    "StripOrder",
    "WireFormatError",
    "choose_ot",
    "decode_message",
    "decrypt",
    "decrypt_full",
    "encode_message",
    "encrypt",
    "generate_params",
    "keygen",
    "load_key",
    "load_params",
    "memory_pair",
    "parse_key",
    "parse_params",
    "random_scalar",
    "receiver_choose",
    "receiver_finish",
    "reencrypt",
    "rerandomize",
    "run_m_of_n",
    "save_key",
    "save_params",
    "sender_offer",
    "sender_strip",
    "serve_ot",
    "strip_a",
    "strip_b",
    "validate_params",
]
