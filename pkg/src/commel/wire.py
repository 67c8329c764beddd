"""Bit-exact serialization of protocol messages, independent of transport.

Frame layout (all integers big-endian):

    magic   4 bytes  43 4D 45 4C ("CMEL")
    version 1 byte   0x01
    type    1 byte   0x01 Offer / 0x02 Choice / 0x03 Strip / 0x7F Error
    length  4 bytes  payload length, checked against a cap before any
                     payload allocation
    payload

Payloads start with the raw 16-byte session id.  Big integers travel as
WireInts: a 4-byte length followed by the minimal big-endian magnitude
(zero is length 0; a leading zero byte is rejected), so every value has
exactly one encoding and round trips byte-exactly.  Lists are a 4-byte
count followed by the elements.

Decoding never trusts a length field further than the bytes actually
present, and raises :class:`WireFormatError` for every malformed input.
"""

from __future__ import annotations

import struct

from .elgamal import Ciphertext2
from .group import GroupParams
from .layered import Ciphertext3
from .ot import SESSION_ID_LEN, OtChoice, OtError, OtOffer, OtStrip

MAGIC = b"CMEL"
VERSION = 0x01

MSG_OFFER = 0x01
MSG_CHOICE = 0x02
MSG_STRIP = 0x03
MSG_ERROR = 0x7F
_KNOWN_TYPES = frozenset({MSG_OFFER, MSG_CHOICE, MSG_STRIP, MSG_ERROR})

FRAME_HEADER_LEN = 10
MAX_PAYLOAD_LEN = 16 * 1024 * 1024

_U32 = struct.Struct(">I")

ProtocolMessage = OtOffer | OtChoice | OtStrip | OtError


class WireFormatError(ValueError):
    """Input bytes do not form a valid frame or field."""


def encode_int(value: int) -> bytes:
    """Encode a non-negative integer in canonical WireInt form."""
    if value < 0:
        raise WireFormatError("wire integers are non-negative")
    if value == 0:
        return _U32.pack(0)
    magnitude = value.to_bytes((value.bit_length() + 7) // 8, "big")
    return _U32.pack(len(magnitude)) + magnitude


def _read_u32(data: bytes, offset: int) -> tuple[int, int]:
    if offset + 4 > len(data):
        raise WireFormatError("truncated length field")
    return _U32.unpack_from(data, offset)[0], offset + 4


def _read_int(data: bytes, offset: int) -> tuple[int, int]:
    length, offset = _read_u32(data, offset)
    if offset + length > len(data):
        raise WireFormatError("integer magnitude runs past the end of the payload")
    if length > 0 and data[offset] == 0:
        raise WireFormatError("non-minimal integer encoding (leading zero byte)")
    return int.from_bytes(data[offset : offset + length], "big"), offset + length


def decode_int(data: bytes) -> int:
    """Decode one WireInt occupying the whole buffer."""
    value, offset = _read_int(data, 0)
    if offset != len(data):
        raise WireFormatError(f"{len(data) - offset} trailing bytes after integer")
    return value


def decode_ints(data: bytes) -> list[int]:
    """Decode a back-to-back concatenation of WireInts, exactly consumed."""
    values = []
    offset = 0
    while offset < len(data):
        value, offset = _read_int(data, offset)
        values.append(value)
    return values


def encode_frame(msg_type: int, payload: bytes) -> bytes:
    if msg_type not in _KNOWN_TYPES:
        raise WireFormatError(f"unknown message type 0x{msg_type:02x}")
    if len(payload) > MAX_PAYLOAD_LEN:
        raise WireFormatError(f"payload of {len(payload)} bytes exceeds the frame cap")
    return MAGIC + bytes((VERSION, msg_type)) + _U32.pack(len(payload)) + payload


def decode_frame_header(header: bytes, max_len: int = MAX_PAYLOAD_LEN) -> tuple[int, int]:
    """Validate a 10-byte frame header; return (msg_type, payload_len).

    Meant for stream transports that must vet the announced length
    before reading (or allocating) the payload.
    """
    if len(header) != FRAME_HEADER_LEN:
        raise WireFormatError(f"frame header must be {FRAME_HEADER_LEN} bytes")
    if header[:4] != MAGIC:
        raise WireFormatError(f"bad magic {header[:4]!r}")
    if header[4] != VERSION:
        raise WireFormatError(f"unsupported version 0x{header[4]:02x}")
    msg_type = header[5]
    if msg_type not in _KNOWN_TYPES:
        raise WireFormatError(f"unknown message type 0x{msg_type:02x}")
    payload_len = _U32.unpack_from(header, 6)[0]
    if payload_len > max_len:
        raise WireFormatError(f"announced payload of {payload_len} bytes exceeds the frame cap")
    return msg_type, payload_len


def decode_frame(data: bytes, max_len: int = MAX_PAYLOAD_LEN) -> tuple[int, bytes]:
    """Split one complete frame into (msg_type, payload)."""
    if len(data) < FRAME_HEADER_LEN:
        raise WireFormatError("frame shorter than its header")
    msg_type, payload_len = decode_frame_header(data[:FRAME_HEADER_LEN], max_len)
    if len(data) - FRAME_HEADER_LEN != payload_len:
        raise WireFormatError(
            f"header announces {payload_len} payload bytes, "
            f"got {len(data) - FRAME_HEADER_LEN}"
        )
    return msg_type, data[FRAME_HEADER_LEN:]


def _encode_offer(message: OtOffer) -> bytes:
    if not message.items:
        raise WireFormatError("an offer must carry at least one item")
    parts = [
        message.session_id,
        encode_int(message.params.p),
        encode_int(message.params.q),
        encode_int(message.params.g),
        encode_int(message.params.gamma),
        encode_int(message.sender_pub),
        _U32.pack(len(message.items)),
    ]
    for item in message.items:
        parts.append(encode_int(item.c1))
        parts.append(encode_int(item.c2))
    return b"".join(parts)


def _encode_choice(message: OtChoice) -> bytes:
    return b"".join(
        (
            message.session_id,
            encode_int(message.receiver_pub),
            encode_int(message.chosen.c1),
            encode_int(message.chosen.c2),
            encode_int(message.chosen.c3),
        )
    )


def _encode_strip(message: OtStrip) -> bytes:
    return b"".join(
        (
            message.session_id,
            encode_int(message.stripped.c1),
            encode_int(message.stripped.c2),
        )
    )


def _encode_error(message: OtError) -> bytes:
    text = message.text.encode("utf-8")
    return message.session_id + _U32.pack(len(text)) + text


def encode_message(message: ProtocolMessage) -> bytes:
    """Serialize a protocol message as one complete frame."""
    if isinstance(message, OtOffer):
        msg_type, encoder = MSG_OFFER, _encode_offer
    elif isinstance(message, OtChoice):
        msg_type, encoder = MSG_CHOICE, _encode_choice
    elif isinstance(message, OtStrip):
        msg_type, encoder = MSG_STRIP, _encode_strip
    elif isinstance(message, OtError):
        msg_type, encoder = MSG_ERROR, _encode_error
    else:
        raise WireFormatError(f"cannot encode {type(message).__name__}")
    if len(message.session_id) != SESSION_ID_LEN:
        raise WireFormatError(f"session id must be {SESSION_ID_LEN} bytes")
    return encode_frame(msg_type, encoder(message))


def _read_session_id(payload: bytes) -> tuple[bytes, int]:
    if len(payload) < SESSION_ID_LEN:
        raise WireFormatError("payload shorter than the session id")
    return payload[:SESSION_ID_LEN], SESSION_ID_LEN


def _decode_offer(payload: bytes) -> OtOffer:
    session_id, offset = _read_session_id(payload)
    p, offset = _read_int(payload, offset)
    q, offset = _read_int(payload, offset)
    g, offset = _read_int(payload, offset)
    gamma, offset = _read_int(payload, offset)
    sender_pub, offset = _read_int(payload, offset)
    count, offset = _read_u32(payload, offset)
    if count < 1:
        raise WireFormatError("an offer must carry at least one item")
    # Two empty WireInts is the smallest possible item; reject absurd
    # counts before building any list.
    if count * 8 > len(payload) - offset:
        raise WireFormatError(f"item count {count} exceeds the remaining payload")
    items = []
    for _ in range(count):
        c1, offset = _read_int(payload, offset)
        c2, offset = _read_int(payload, offset)
        items.append(Ciphertext2(c1, c2))
    if offset != len(payload):
        raise WireFormatError(f"{len(payload) - offset} trailing bytes in offer")
    params = GroupParams(p=p, q=q, g=g, gamma=gamma)
    return OtOffer(session_id, params, sender_pub, tuple(items))


def _decode_choice(payload: bytes) -> OtChoice:
    session_id, offset = _read_session_id(payload)
    receiver_pub, offset = _read_int(payload, offset)
    c1, offset = _read_int(payload, offset)
    c2, offset = _read_int(payload, offset)
    c3, offset = _read_int(payload, offset)
    if offset != len(payload):
        raise WireFormatError(f"{len(payload) - offset} trailing bytes in choice")
    return OtChoice(session_id, receiver_pub, Ciphertext3(c1, c2, c3))


def _decode_strip(payload: bytes) -> OtStrip:
    session_id, offset = _read_session_id(payload)
    c1, offset = _read_int(payload, offset)
    c2, offset = _read_int(payload, offset)
    if offset != len(payload):
        raise WireFormatError(f"{len(payload) - offset} trailing bytes in strip")
    return OtStrip(session_id, Ciphertext2(c1, c2))


def _decode_error(payload: bytes) -> OtError:
    session_id, offset = _read_session_id(payload)
    length, offset = _read_u32(payload, offset)
    if offset + length != len(payload):
        raise WireFormatError("error text length disagrees with the payload")
    try:
        text = payload[offset:].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise WireFormatError(f"error text is not valid UTF-8: {exc}") from None
    return OtError(session_id, text)


_DECODERS = {
    MSG_OFFER: _decode_offer,
    MSG_CHOICE: _decode_choice,
    MSG_STRIP: _decode_strip,
    MSG_ERROR: _decode_error,
}


def decode_message(data: bytes, max_len: int = MAX_PAYLOAD_LEN) -> ProtocolMessage:
    """Parse one complete frame back into its protocol message."""
    msg_type, payload = decode_frame(data, max_len)
    return _DECODERS[msg_type](payload)


def decode_payload(msg_type: int, payload: bytes) -> ProtocolMessage:
    """Parse an already-deframed payload (stream transports)."""
    decoder = _DECODERS.get(msg_type)
    if decoder is None:
        raise WireFormatError(f"unknown message type 0x{msg_type:02x}")
    return decoder(payload)
