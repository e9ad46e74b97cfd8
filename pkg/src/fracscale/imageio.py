"""8-bit grayscale/RGB image codecs (binary PGM/PPM, PNG) and tensor conversion."""
from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .tensor import ShapeError


class ImageError(Exception):
    """Base class for image decoding/encoding failures."""


class UnsupportedFormatError(ImageError):
    pass


class UnsupportedBitDepthError(ImageError):
    pass


class TruncatedFileError(ImageError):
    pass


class ImageIOFailure(ImageError, OSError):
    """The file could not be opened, read or written."""


@dataclass(frozen=True)
class Image:
    width: int
    height: int
    channels: int  # 1 (gray) or 3 (RGB)
    samples: bytes  # row-major, channels interleaved

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        if len(self.samples) != self.width * self.height * self.channels:
            raise ValueError(
                f"expected {self.width * self.height * self.channels} samples, got {len(self.samples)}"
            )

    def as_array(self) -> np.ndarray:
        """``uint8`` view of shape (H, W) or (H, W, 3)."""
        a = np.frombuffer(self.samples, dtype=np.uint8)
        if self.channels == 1:
            return a.reshape(self.height, self.width)
        return a.reshape(self.height, self.width, 3)

    @classmethod
    def from_array(cls, a) -> Image:
        a = np.asarray(a)
        if a.dtype != np.uint8:
            raise TypeError(f"expected uint8 samples, got {a.dtype}")
        if a.ndim == 3 and a.shape[2] == 1:
            a = a[:, :, 0]
        if a.ndim == 2:
            return cls(a.shape[1], a.shape[0], 1, a.tobytes())
        if a.ndim == 3 and a.shape[2] == 3:
            return cls(a.shape[1], a.shape[0], 3, a.tobytes())
        raise ShapeError(f"cannot build an image from array of shape {a.shape}")


# --- PNM --------------------------------------------------------------------

def _pnm_header(data: bytes) -> tuple[bytes, list[int], int]:
    """Magic, (width, height, maxval) and the payload offset."""
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            if pos >= len(data):
                raise TruncatedFileError("PNM header ends early")
            raise UnsupportedFormatError(f"malformed PNM header at byte {pos}")
        fields.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise TruncatedFileError("PNM header not terminated")
    return data[:2], fields, pos + 1


def _decode_pnm(data: bytes) -> Image:
    magic, (width, height, maxval), offset = _pnm_header(data)
    if maxval != 255:
        raise UnsupportedBitDepthError(f"only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise UnsupportedFormatError(f"bad PNM dimensions {width}x{height}")
    channels = 3 if magic == b"P6" else 1
    size = width * height * channels
    payload = data[offset:offset + size]
    if len(payload) < size:
        raise TruncatedFileError(f"expected {size} payload bytes, found {len(payload)}")
    return Image(width, height, channels, bytes(payload))


def _encode_pnm(img: Image, rgb: bool) -> bytes:
    samples = img.samples
    if rgb and img.channels == 1:
        samples = np.repeat(np.frombuffer(samples, dtype=np.uint8), 3).tobytes()
    if not rgb and img.channels == 3:
        raise ShapeError("cannot write an RGB image as PGM")
    magic = b"P6" if rgb else b"P5"
    return magic + f"\n{img.width} {img.height}\n255\n".encode("ascii") + samples


# --- PNG --------------------------------------------------------------------

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_PNG_CHANNELS = {0: 1, 2: 3}


def _png_chunks(data: bytes):
    pos = len(PNG_SIGNATURE)
    while True:
        if pos + 8 > len(data):
            raise TruncatedFileError("PNG ends before IEND")
        length, ctype = struct.unpack(">I4s", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + length]
        crc = data[pos + 8 + length:pos + 12 + length]
        if len(body) < length or len(crc) < 4:
            raise TruncatedFileError(f"PNG chunk {ctype!r} is truncated")
        if struct.unpack(">I", crc)[0] != zlib.crc32(body, zlib.crc32(ctype)):
            raise UnsupportedFormatError(f"PNG chunk {ctype!r} fails its CRC")
        yield ctype, body
        if ctype == b"IEND":
            return
        pos += 12 + length


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def _unfilter(raw: bytes, width: int, height: int, bpp: int) -> bytearray:
    stride = width * bpp
    if len(raw) < height * (stride + 1):
        raise TruncatedFileError("PNG image data shorter than declared size")
    out = bytearray(height * stride)
    prev = bytearray(stride)
    for y in range(height):
        ftype = raw[y * (stride + 1)]
        line = bytearray(raw[y * (stride + 1) + 1:(y + 1) * (stride + 1)])
        if ftype == 1:
            for i in range(bpp, stride):
                line[i] = (line[i] + line[i - bpp]) & 0xFF
        elif ftype == 2:
            line = bytearray((u + v) & 0xFF for u, v in zip(line, prev))
        elif ftype == 3:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                upleft = prev[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + _paeth(left, prev[i], upleft)) & 0xFF
        elif ftype != 0:
            raise UnsupportedFormatError(f"unknown PNG filter type {ftype}")
        out[y * stride:(y + 1) * stride] = line
        prev = line
    return out


def _decode_png(data: bytes) -> Image:
    header = None
    idat = []
    for ctype, body in _png_chunks(data):
        if ctype == b"IHDR":
            header = struct.unpack(">IIBBBBB", body)
        elif ctype == b"IDAT":
            idat.append(body)
    if header is None:
        raise UnsupportedFormatError("PNG has no IHDR chunk")
    width, height, depth, color, compression, filt, interlace = header
    if depth != 8:
        raise UnsupportedBitDepthError(f"only 8-bit PNG is supported, got {depth}-bit")
    if color not in _PNG_CHANNELS:
        raise UnsupportedFormatError(f"unsupported PNG color type {color}")
    if compression or filt or interlace:
        raise UnsupportedFormatError("interlaced or non-standard PNG is not supported")
    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as e:
        raise TruncatedFileError(f"corrupt PNG image data: {e}") from None
    channels = _PNG_CHANNELS[color]
    pixels = _unfilter(raw, width, height, channels)
    return Image(width, height, channels, bytes(pixels))


def _chunk(ctype: bytes, body: bytes) -> bytes:
    return struct.pack(">I", len(body)) + ctype + body + struct.pack(">I", zlib.crc32(body, zlib.crc32(ctype)))


def _encode_png(img: Image) -> bytes:
    color = 0 if img.channels == 1 else 2
    ihdr = struct.pack(">IIBBBBB", img.width, img.height, 8, color, 0, 0, 0)
    stride = img.width * img.channels
    rows = np.frombuffer(img.samples, dtype=np.uint8).reshape(img.height, stride)
    filtered = np.concatenate([np.zeros((img.height, 1), np.uint8), rows], axis=1)
    return (PNG_SIGNATURE + _chunk(b"IHDR", ihdr)
            + _chunk(b"IDAT", zlib.compress(filtered.tobytes(), 6)) + _chunk(b"IEND", b""))


# --- public API -------------------------------------------------------------

def decode_image(data: bytes) -> Image:
    if data.startswith(PNG_SIGNATURE):
        return _decode_png(data)
    if data[:2] in (b"P5", b"P6"):
        return _decode_pnm(data)
    if len(data) < 2:
        raise TruncatedFileError("file too short to identify")
    raise UnsupportedFormatError("not a PNG or binary PGM/PPM file")


def read_image(path) -> Image:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        raise ImageIOFailure(f"cannot read {path}: {e}") from e
    return decode_image(data)


FORMATS = ("png", "ppm", "pgm", "pnm")


def format_for_path(path) -> str:
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    if ext not in FORMATS:
        raise UnsupportedFormatError(f"cannot infer image format from extension {ext!r}")
    return ext


def encode_image(img: Image, format: str) -> bytes:
    """``ppm`` always writes P6 (gray promoted to RGB), ``pgm`` writes P5,
    ``pnm`` picks whichever matches the image."""
    if format == "png":
        return _encode_png(img)
    if format == "ppm":
        return _encode_pnm(img, rgb=True)
    if format == "pgm":
        return _encode_pnm(img, rgb=False)
    if format == "pnm":
        return _encode_pnm(img, rgb=img.channels == 3)
    raise UnsupportedFormatError(f"unknown image format {format!r}")


def write_image(img: Image, path, format: str | None = None) -> None:
    data = encode_image(img, format or format_for_path(path))
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as e:
        raise ImageIOFailure(f"cannot write {path}: {e}") from e


def to_tensor(img: Image) -> np.ndarray:
    """Float64 array of shape (H, W) or (H, W, 3) with values in [0, 255]."""
    return img.as_array().astype(np.float64)


def from_tensor(t) -> Image:
    """Clamp to [0, 255], round half up and pack into an image."""
    a = np.asarray(t, dtype=np.float64)
    if not (a.ndim == 2 or (a.ndim == 3 and a.shape[2] in (1, 3))):
        raise ShapeError(f"expected (H, W), (H, W, 1) or (H, W, 3), got {a.shape}")
    q = np.floor(np.clip(a, 0.0, 255.0) + 0.5)
    return Image.from_array(q.astype(np.uint8))
