"""Command-line surface: every library operation as a subcommand.

Ciphertexts travel between commands as hex on stdout/stdin, encoded as
back-to-back length-prefixed integers (two for a single-layer pair,
three for a layered triple), so commands compose in shell pipelines.
With ``--seed`` every command draws its randomness from a deterministic
generator, which makes pipelines byte-reproducible; without it the OS
CSPRNG is used.

A warning that applies to the whole tool: ciphertexts carry no
integrity protection or authentication whatsoever.  Decrypting with the
wrong key, or decrypting bytes an attacker modified, quietly yields a
valid-looking wrong payload with exit code 0.  Anything that needs
tamper detection must layer it on top.

Exit codes: 0 success, 1 validation or protocol error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from pathlib import Path

from .elgamal import (
    Ciphertext2,
    KeyPair,
    PublicKey,
    decrypt,
    encrypt,
    format_private_key,
    format_public_key,
    keygen,
    load_key,
)
from .group import (
    ParamGenConfig,
    ParamGenerationError,
    decode_message,
    encode_message,
    format_params,
    generate_params,
    load_params,
    validate_params,
)
from .layered import Ciphertext3, StripOrder, decrypt_full, reencrypt
from .ot import SessionStateError
from .selftest import CSV_FIELDS, run_selftest
from .transport import ProtocolError, choose_ot, serve_ot
from .wire import decode_ints, encode_int


def _rng(args: argparse.Namespace) -> random.Random | None:
    if args.seed is None:
        return None
    return random.Random(int(args.seed, 16))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, newline="\n")


def _load_private(path: str) -> KeyPair:
    key = load_key(path)
    if not isinstance(key, KeyPair):
        raise ValueError(f"{path} is a public key; this operation needs the private key")
    return key


def _stdin_ints() -> list[int]:
    text = sys.stdin.read()
    try:
        data = bytes.fromhex("".join(text.split()))
    except ValueError:
        raise ValueError("stdin is not a hex string") from None
    return decode_ints(data)


def _ints_hex(values: list[int]) -> str:
    return b"".join(encode_int(v) for v in values).hex() + "\n"


def _cmd_params_gen(args: argparse.Namespace) -> int:
    config = ParamGenConfig(bits=args.bits, gamma=args.gamma)
    params = generate_params(config, _rng(args))
    _emit(format_params(params), args.out)
    return 0


def _cmd_params_check(args: argparse.Namespace) -> int:
    params = load_params(args.params)
    if validate_params(params):
        print("ok")
        return 0
    print("invalid")
    return 1


def _cmd_keygen(args: argparse.Namespace) -> int:
    params = load_params(args.params)
    key = keygen(params, _rng(args))
    _emit(format_private_key(key), args.out)
    if args.pub_out is not None:
        _emit(format_public_key(key.public_key), args.pub_out)
    return 0


def _cmd_encrypt(args: argparse.Namespace) -> int:
    key = load_key(args.key)
    element = encode_message(args.payload, key.params)
    pair = encrypt(key, element, _rng(args))
    _emit(_ints_hex([pair.c1, pair.c2]), args.out)
    return 0


def _cmd_reencrypt(args: argparse.Namespace) -> int:
    key = load_key(args.key)
    values = _stdin_ints()
    if len(values) != 2:
        raise ValueError(f"expected a 2-integer ciphertext on stdin, got {len(values)}")
    triple = reencrypt(key, Ciphertext2(*values), _rng(args))
    _emit(_ints_hex([triple.c1, triple.c2, triple.c3]), args.out)
    return 0


def _cmd_decrypt(args: argparse.Namespace) -> int:
    keys = [_load_private(path) for path in args.key]
    values = _stdin_ints()
    if len(values) == 2:
        if len(keys) != 1:
            raise ValueError("a 2-integer ciphertext takes exactly one --key")
        element = decrypt(keys[0], Ciphertext2(*values))
        params = keys[0].params
    elif len(values) == 3:
        if len(keys) != 2:
            raise ValueError(
                "a 3-integer ciphertext takes two --key flags "
                "(first the original key, then the re-encryption key)"
            )
        order = StripOrder.A_FIRST if args.order == "ab" else StripOrder.B_FIRST
        element = decrypt_full(keys[0], keys[1], Ciphertext3(*values), order)
        params = keys[0].params
    else:
        raise ValueError(f"expected 2 or 3 integers on stdin, got {len(values)}")
    _emit(f"{decode_message(element, params)}\n", args.out)
    return 0


def _cmd_ot_serve(args: argparse.Namespace) -> int:
    server = serve_ot(
        (args.host, args.port),
        args.payloads,
        args.params,
        _rng(args),
        max_sessions=args.sessions,
    )
    host, port = server.address
    print(f"listening {host} {port}", flush=True)
    try:
        server.wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def _cmd_ot_choose(args: argparse.Namespace) -> int:
    payload = choose_ot((args.host, args.port), args.index, _rng(args))
    print(payload)
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    rows, ok = run_selftest(_rng(args), args.report)
    writer = csv.writer(sys.stdout)
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([row.check, row.cases, str(row.passed).lower(), row.detail])
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commel",
        description=(
            "Layered encryption with order-independent decryption, and "
            "1-out-of-n oblivious transfer built on it. Ciphertexts have "
            "no integrity protection; see the package docs."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    params = sub.add_parser("params", help="generate or check group parameters")
    params_sub = params.add_subparsers(dest="subcommand", required=True)
    gen = params_sub.add_parser("gen", help="generate fresh parameters")
    gen.add_argument("--bits", type=int, required=True, help="modulus bit length")
    gen.add_argument("--gamma", type=int, default=2, help="cofactor (default 2)")
    gen.add_argument("--seed", help="hex seed for deterministic randomness")
    gen.add_argument("--out", help="write the parameter file here instead of stdout")
    gen.set_defaults(func=_cmd_params_gen)
    check = params_sub.add_parser("check", help="validate a parameter file")
    check.add_argument("--params", required=True, help="parameter file to check")
    check.set_defaults(func=_cmd_params_check)

    kg = sub.add_parser("keygen", help="generate a keypair for a parameter set")
    kg.add_argument("--params", required=True, help="parameter file")
    kg.add_argument("--seed", help="hex seed for deterministic randomness")
    kg.add_argument("--out", help="write the private key here instead of stdout")
    kg.add_argument("--pub-out", help="also write the public key here")
    kg.set_defaults(func=_cmd_keygen)

    enc = sub.add_parser("encrypt", help="encrypt a decimal payload")
    enc.add_argument("payload", type=int, help="payload in [1, Q]")
    enc.add_argument("--key", required=True, help="recipient key file (public is enough)")
    enc.add_argument("--seed", help="hex seed for deterministic randomness")
    enc.add_argument("--out", help="write the hex ciphertext here instead of stdout")
    enc.set_defaults(func=_cmd_encrypt)

    renc = sub.add_parser(
        "reencrypt", help="add a second layer to a ciphertext read from stdin"
    )
    renc.add_argument("--key", required=True, help="second-layer key file (public is enough)")
    renc.add_argument("--seed", help="hex seed for deterministic randomness")
    renc.add_argument("--out", help="write the hex triple here instead of stdout")
    renc.set_defaults(func=_cmd_reencrypt)

    dec = sub.add_parser("decrypt", help="decrypt a ciphertext read from stdin")
    dec.add_argument(
        "--key",
        action="append",
        required=True,
        help="private key file; pass twice for a layered triple "
        "(original key first, re-encryption key second)",
    )
    dec.add_argument(
        "--order",
        choices=("ab", "ba"),
        default="ba",
        help="layer removal order for triples: ab strips the original "
        "key's layer first, ba the re-encryption key's (default ba)",
    )
    dec.add_argument("--out", help="write the decimal payload here instead of stdout")
    dec.set_defaults(func=_cmd_decrypt)

    ot = sub.add_parser("ot", help="run the oblivious transfer roles")
    ot_sub = ot.add_subparsers(dest="subcommand", required=True)
    serve = ot_sub.add_parser("serve", help="serve payloads, one session per connection")
    serve.add_argument("--params", required=True, help="parameter file")
    serve.add_argument("--payloads", required=True, help="payload file, one decimal per line")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0, help="0 picks a free port")
    serve.add_argument("--sessions", type=int, help="stop after this many sessions")
    serve.add_argument("--seed", help="hex seed for deterministic randomness")
    serve.set_defaults(func=_cmd_ot_serve)
    choose = ot_sub.add_parser("choose", help="retrieve one payload from a server")
    choose.add_argument("--host", default="127.0.0.1")
    choose.add_argument("--port", type=int, required=True)
    choose.add_argument("--index", type=int, required=True, help="0-based payload index")
    choose.add_argument("--seed", help="hex seed for deterministic randomness")
    choose.set_defaults(func=_cmd_ot_choose)

    st = sub.add_parser("selftest", help="run the built-in oracle battery")
    st.add_argument("--report", help="directory for selftest.csv and rendered figures")
    st.add_argument("--seed", help="hex seed for deterministic randomness")
    st.set_defaults(func=_cmd_selftest)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, IndexError, SessionStateError, ProtocolError, ParamGenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
