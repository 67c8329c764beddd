"""Transports that move wire frames between the two protocol roles.

Two interchangeable channel flavors, both speaking the byte format from
:mod:`commel.wire` end to end:

* :func:`memory_pair` builds a queue-backed duplex pair for tests; the
  bytes are real, only the network is skipped.
* :class:`SocketChannel` frames messages over a connected stream socket.

On top of those sit the runnable roles: :func:`serve_ot` starts a
threaded TCP server that runs one sender session per connection, and
:func:`choose_ot` runs the receiver side against an address and returns
the recovered payload.  Protocol violations are answered with an error
frame; they never take down the server or leak another session's state.
"""

from __future__ import annotations

import logging
import queue
import random
import socket
import socketserver
import threading
from pathlib import Path

from .group import GroupParams, load_params
from .ot import (
    OtChoice,
    OtError,
    OtOffer,
    OtStrip,
    ReceiverSession,
    SenderSession,
    SessionStateError,
    receiver_choose,
    receiver_finish,
    sender_offer,
    sender_strip,
)
from .wire import (
    FRAME_HEADER_LEN,
    ProtocolMessage,
    WireFormatError,
    decode_frame_header,
    decode_message,
    decode_payload,
    encode_message,
)

logger = logging.getLogger("commel.transport")

DEFAULT_TIMEOUT = 30.0

# Cap on junk frames answered after a session completes, so a looping
# client cannot hold a handler thread forever.
_MAX_TRAILING_FRAMES = 100


class ProtocolError(RuntimeError):
    """The peer broke the protocol or reported an error frame."""


class ChannelClosed(ProtocolError):
    """The peer closed the channel at a frame boundary."""


class MemoryChannel:
    """One end of an in-process duplex pair carrying encoded frames."""

    def __init__(
        self,
        inbox: "queue.Queue[bytes | None]",
        outbox: "queue.Queue[bytes | None]",
        timeout: float = DEFAULT_TIMEOUT,
    ) -> None:
        self._inbox = inbox
        self._outbox = outbox
        self._timeout = timeout

    def send(self, message: ProtocolMessage) -> None:
        self._outbox.put(encode_message(message))

    def recv(self) -> ProtocolMessage:
        try:
            data = self._inbox.get(timeout=self._timeout)
        except queue.Empty:
            raise ProtocolError("timed out waiting for a frame") from None
        if data is None:
            raise ChannelClosed("peer closed the channel")
        return decode_message(data)

    def close(self) -> None:
        self._outbox.put(None)


def memory_pair(timeout: float = DEFAULT_TIMEOUT) -> tuple[MemoryChannel, MemoryChannel]:
    """Connected channel pair; frames written on one end appear on the other."""
    a_to_b: "queue.Queue[bytes | None]" = queue.Queue()
    b_to_a: "queue.Queue[bytes | None]" = queue.Queue()
    return (
        MemoryChannel(inbox=b_to_a, outbox=a_to_b, timeout=timeout),
        MemoryChannel(inbox=a_to_b, outbox=b_to_a, timeout=timeout),
    )


class SocketChannel:
    """Frames protocol messages over a connected stream socket."""

    def __init__(self, sock: socket.socket, timeout: float = DEFAULT_TIMEOUT) -> None:
        self._sock = sock
        sock.settimeout(timeout)

    def send(self, message: ProtocolMessage) -> None:
        self._sock.sendall(encode_message(message))

    def _read_exact(self, count: int, *, at_boundary: bool) -> bytes:
        chunks = []
        remaining = count
        while remaining:
            try:
                chunk = self._sock.recv(min(remaining, 65536))
            except socket.timeout:
                raise ProtocolError("timed out waiting for a frame") from None
            if not chunk:
                if at_boundary and remaining == count:
                    raise ChannelClosed("peer closed the connection")
                raise ProtocolError("connection closed mid-frame")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def recv(self) -> ProtocolMessage:
        header = self._read_exact(FRAME_HEADER_LEN, at_boundary=True)
        msg_type, payload_len = decode_frame_header(header)
        payload = self._read_exact(payload_len, at_boundary=False) if payload_len else b""
        return decode_payload(msg_type, payload)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def load_payloads(path: str | Path) -> list[int]:
    """Read the payload file format: one decimal per line, LF separated."""
    text = Path(path).read_text()
    payloads = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if not stripped.isdigit():
            raise ValueError(f"payload file line {lineno}: {stripped!r} is not a decimal")
        payloads.append(int(stripped))
    if not payloads:
        raise ValueError("payload file contains no payloads")
    return payloads


class _SessionHandler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        server: OtServer = self.server  # type: ignore[assignment]
        channel = SocketChannel(self.request, timeout=server.session_timeout)
        session = SenderSession(server.params)
        sid = session.session_id.hex()
        try:
            channel.send(sender_offer(session, server.payloads, server.rng))
            message = channel.recv()
            if not isinstance(message, OtChoice):
                raise SessionStateError(
                    f"expected a choice frame, got {type(message).__name__}"
                )
            channel.send(sender_strip(session, message))
            logger.info(
                "session %s: served 1 of %d items and stripped", sid, len(server.payloads)
            )
        except (WireFormatError, SessionStateError, ValueError) as exc:
            logger.info("session %s: rejected (%s)", sid, exc)
            self._report(channel, session, str(exc))
            return
        except ProtocolError as exc:
            logger.info("session %s: aborted (%s)", sid, exc)
            return
        self._drain(channel, session, sid)

    def _report(self, channel: SocketChannel, session: SenderSession, text: str) -> None:
        try:
            channel.send(OtError(session.session_id, text))
        except OSError:
            pass

    def _drain(self, channel: SocketChannel, session: SenderSession, sid: str) -> None:
        # The session is complete; anything else on this connection is a
        # replay or an out-of-order message and gets an error frame.
        for _ in range(_MAX_TRAILING_FRAMES):
            try:
                message = channel.recv()
            except ChannelClosed:
                return
            except (ProtocolError, WireFormatError) as exc:
                logger.info("session %s: trailing garbage (%s)", sid, exc)
                self._report(channel, session, str(exc))
                return
            logger.info(
                "session %s: rejected trailing %s frame", sid, type(message).__name__
            )
            self._report(channel, session, "session already completed")


class OtServer(socketserver.ThreadingTCPServer):
    """Threaded sender: one independent OT session per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(
        self,
        address: tuple[str, int],
        payloads: list[int],
        params: GroupParams,
        rng: random.Random | None = None,
        session_timeout: float = DEFAULT_TIMEOUT,
        max_sessions: int | None = None,
    ) -> None:
        super().__init__(address, _SessionHandler)
        self.payloads = list(payloads)
        self.params = params
        self.rng = rng
        self.session_timeout = session_timeout
        self.max_sessions = max_sessions
        self._session_count = 0
        self._count_lock = threading.Lock()
        self._thread: threading.Thread | None = None

    def finish_request(self, request, client_address) -> None:
        super().finish_request(request, client_address)
        if self.max_sessions is None:
            return
        with self._count_lock:
            self._session_count += 1
            done = self._session_count >= self.max_sessions
        if done:
            # Runs on the handler thread; serve_forever lives elsewhere,
            # so a blocking shutdown here is safe.
            self.shutdown()

    @property
    def address(self) -> tuple[str, int]:
        host, port = self.server_address[:2]
        return str(host), int(port)

    def start(self) -> "OtServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def wait(self) -> None:
        """Block until the serving thread exits (max_sessions reached)."""
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "OtServer":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.stop()


def serve_ot(
    address: tuple[str, int],
    payload_file: str | Path,
    params_file: str | Path,
    rng: random.Random | None = None,
    max_sessions: int | None = None,
) -> OtServer:
    """Start a sender server from its two input files; returns it running.

    With ``max_sessions`` set the server stops accepting after that many
    connections have been handled (scripted runs); otherwise it serves
    until stopped.

    Raises:
        ValueError: malformed payload or parameter file.
        OSError: the address cannot be bound.
    """
    payloads = load_payloads(payload_file)
    params = load_params(params_file)
    server = OtServer(address, payloads, params, rng, max_sessions=max_sessions)
    server.start()
    logger.info("serving %d payloads on %s:%d", len(payloads), *server.address)
    return server


def choose_ot(
    address: tuple[str, int],
    index: int,
    rng: random.Random | None = None,
    params: GroupParams | None = None,
) -> int:
    """Run the receiver role against a server; return the payload.

    ``index`` is validated locally: a negative value fails before the
    connection opens, and one past the offer's item count fails after
    the offer arrives but before anything is sent.

    Raises:
        IndexError: index out of range.
        ProtocolError: the server reported an error frame or broke the
            framing.
        OSError: connection failure.
    """
    if index < 0:
        raise IndexError(f"choice index {index} out of range")
    session = ReceiverSession(params)
    sock = socket.create_connection(address, timeout=DEFAULT_TIMEOUT)
    channel = SocketChannel(sock)
    try:
        offer = channel.recv()
        if isinstance(offer, OtError):
            raise ProtocolError(f"server error: {offer.text}")
        if not isinstance(offer, OtOffer):
            raise ProtocolError(f"expected an offer frame, got {type(offer).__name__}")
        channel.send(receiver_choose(session, offer, index, rng))
        strip = channel.recv()
        if isinstance(strip, OtError):
            raise ProtocolError(f"server error: {strip.text}")
        if not isinstance(strip, OtStrip):
            raise ProtocolError(f"expected a strip frame, got {type(strip).__name__}")
        return receiver_finish(session, strip)
    finally:
        channel.close()
