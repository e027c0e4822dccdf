"""Challenge and response byte formats (little-endian, CRC-32 trailer)."""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Optional

from ..exceptions import (
    BadMagicError,
    BadVersionError,
    FormatError,
    IntegrityError,
    InvalidInputError,
    TruncatedError,
)
from ..icgen import AddressList, ICProgram, decode_program, serialize

CHALLENGE_MAGIC = b"PACH"
RESPONSE_MAGIC = b"PARS"
VERSION = 1

# magic, version, nonce, tuple count, total bytes
_CH_HEADER = struct.Struct("<4sBQHI")
_TUPLE = struct.Struct("<QH")
_RS_HEADER = struct.Struct("<4sBB")
_CRC = struct.Struct("<I")


@dataclass(frozen=True)
class Challenge:
    program: ICProgram
    addresses: AddressList
    nonce: int

    @property
    def N(self) -> int:
        return self.addresses.total_bytes


@dataclass(frozen=True)
class Response:
    hash: int
    width: int = 64  # bits

    def __post_init__(self):
        if self.width % 8 or not 0 < self.width <= 255 * 8:
            raise InvalidInputError(f"hash width must be a positive multiple of 8, got {self.width}")
        if self.hash < 0 or self.hash >> self.width:
            raise InvalidInputError(f"hash does not fit in {self.width} bits")


def _check_crc(buf: bytes, end: int, what: str) -> None:
    if len(buf) < end + _CRC.size:
        raise TruncatedError(f"{what} CRC truncated", len(buf))
    (crc,) = _CRC.unpack_from(buf, end)
    if crc != zlib.crc32(buf[:end]):
        raise IntegrityError(f"{what} CRC mismatch", end)
    if len(buf) != end + _CRC.size:
        raise FormatError(f"trailing bytes after {what}", end + _CRC.size)


def encode_challenge(ch: Challenge) -> bytes:
    tuples = ch.addresses.tuples
    if len(tuples) > 0xFFFF:
        raise InvalidInputError(f"{len(tuples)} address tuples exceed the u16 count field")
    out = bytearray(_CH_HEADER.pack(CHALLENGE_MAGIC, VERSION, ch.nonce, len(tuples), ch.addresses.total_bytes))
    for base, words in tuples:
        out += _TUPLE.pack(base, words)
    out += serialize(ch.program)
    out += _CRC.pack(zlib.crc32(out))
    return bytes(out)


def decode_challenge(buf: bytes, bounds: Optional[tuple[int, int]] = None) -> Challenge:
    """Parse a challenge. ``bounds`` is the receiver's memory range; when omitted
    it is taken as the span of the tuples."""
    if len(buf) < _CH_HEADER.size:
        raise TruncatedError("challenge header truncated", len(buf))
    magic, version, nonce, count, total = _CH_HEADER.unpack_from(buf)
    if magic != CHALLENGE_MAGIC:
        raise BadMagicError(f"bad challenge magic {magic!r}", 0)
    if version != VERSION:
        raise BadVersionError(f"unsupported challenge version {version}", 4)
    pos = _CH_HEADER.size
    if len(buf) < pos + count * _TUPLE.size:
        raise TruncatedError("address tuples truncated", len(buf))
    tuples = tuple(_TUPLE.unpack_from(buf, pos + i * _TUPLE.size) for i in range(count))
    pos += count * _TUPLE.size
    program, end = decode_program(buf, pos)
    _check_crc(buf, end, "challenge")
    if not tuples:
        raise FormatError("challenge lists no addresses", _CH_HEADER.size)
    ws = program.word_size
    if bounds is None:
        bounds = (min(b for b, _ in tuples), max(b + w * ws for b, w in tuples))
    try:
        addresses = AddressList(tuples, total, bounds, ws)
    except InvalidInputError as exc:
        raise FormatError(str(exc), _CH_HEADER.size) from None
    return Challenge(program, addresses, nonce)


def encode_response(rs: Response) -> bytes:
    nbytes = rs.width // 8
    out = _RS_HEADER.pack(RESPONSE_MAGIC, VERSION, nbytes) + rs.hash.to_bytes(nbytes, "little")
    return out + _CRC.pack(zlib.crc32(out))


def decode_response(buf: bytes) -> Response:
    if len(buf) < _RS_HEADER.size:
        raise TruncatedError("response header truncated", len(buf))
    magic, version, nbytes = _RS_HEADER.unpack_from(buf)
    if magic != RESPONSE_MAGIC:
        raise BadMagicError(f"bad response magic {magic!r}", 0)
    if version != VERSION:
        raise BadVersionError(f"unsupported response version {version}", 4)
    if nbytes == 0:
        raise FormatError("empty hash", 5)
    end = _RS_HEADER.size + nbytes
    if len(buf) < end:
        raise TruncatedError("hash bytes truncated", len(buf))
    _check_crc(buf, end, "response")
    return Response(int.from_bytes(buf[_RS_HEADER.size:end], "little"), 8 * nbytes)
