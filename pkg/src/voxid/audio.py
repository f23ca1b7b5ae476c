"""PCM WAV loading, framing and Hamming windowing."""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from voxid.errors import (
    ClipTooShort,
    MissingFile,
    NotRiffWave,
    TruncatedData,
    UnsupportedBitDepth,
    UnsupportedEncoding,
)

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_EXTENSIBLE = 0xFFFE
# KSDATAFORMAT_SUBTYPE_PCM
_PCM_SUBTYPE = b"\x01\x00\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int
    source_path: str | None = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float).ravel()
        if samples.size and (samples.min() < -1.0 or samples.max() > 1.0):
            raise ValueError("samples must lie in [-1, 1]")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError("sample_rate must be a positive integer")
        object.__setattr__(self, "samples", _frozen(samples))
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FrameSequence:
    frames: np.ndarray  # (n_frames, frame_len), read-only strided view
    frame_len: int
    hop_len: int
    sample_rate: int

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)


def _read_chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + size]
        yield cid, size, body
        pos += 8 + size + (size & 1)


def load_wav(path) -> AudioClip:
    """Read an uncompressed integer-PCM RIFF/WAVE file.

    Multi-channel audio is averaged to mono, then scaled by the bit-depth
    maximum (2**(bits-1)); 8-bit data is unsigned and re-centered first.
    The header sample rate is returned as is.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(f"{path}: no such file")
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotRiffWave(f"{path}: not a RIFF/WAVE file")

    fmt = None
    pcm = None
    for cid, size, body in _read_chunks(data):
        if cid == b"fmt ":
            if len(body) < 16:
                raise TruncatedData(f"{path}: fmt chunk is {len(body)} bytes")
            fmt = struct.unpack_from("<HHIIHH", body)
            if fmt[0] == WAVE_FORMAT_EXTENSIBLE and (len(body) < 40 or body[24:40] != _PCM_SUBTYPE):
                raise UnsupportedEncoding(f"{path}: extensible format with non-PCM subtype")
        elif cid == b"data":
            if len(body) < size:
                raise TruncatedData(f"{path}: data chunk declares {size} bytes, holds {len(body)}")
            pcm = body
            break
    if fmt is None:
        raise NotRiffWave(f"{path}: missing fmt chunk")
    if pcm is None:
        raise TruncatedData(f"{path}: missing data chunk")

    tag, channels, rate, _, block_align, bits = fmt
    if tag not in (WAVE_FORMAT_PCM, WAVE_FORMAT_EXTENSIBLE):
        raise UnsupportedEncoding(f"{path}: format tag {tag:#06x} is not integer PCM")
    if bits not in (8, 16, 24, 32):
        raise UnsupportedBitDepth(f"{path}: {bits}-bit samples are not supported")
    if channels < 1:
        raise NotRiffWave(f"{path}: zero channels")
    width = bits // 8
    frame_bytes = width * channels
    n_frames = len(pcm) // frame_bytes
    raw = pcm[: n_frames * frame_bytes]

    if bits == 8:
        ints = np.frombuffer(raw, dtype=np.uint8).astype(np.int64) - 128
    elif bits == 16:
        ints = np.frombuffer(raw, dtype="<i2").astype(np.int64)
    elif bits == 32:
        ints = np.frombuffer(raw, dtype="<i4").astype(np.int64)
    else:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int64)
        ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)

    mono = ints.reshape(n_frames, channels).mean(axis=1)
    return AudioClip(mono / float(1 << (bits - 1)), rate, source_path=path)


def ms_to_samples(ms: float, sample_rate: int) -> int:
    # half-up rounding: 30 ms at 22050 Hz is 662 samples, 10 ms is 221
    return int(math.floor(ms * sample_rate / 1000.0 + 0.5))


def frame_signal(clip: AudioClip, frame_ms: float = 30.0, hop_ms: float = 10.0) -> FrameSequence:
    """Cut ``clip`` into overlapping frames; a trailing partial frame is dropped."""
    if not frame_ms >= hop_ms > 0:
        raise ValueError("need frame_ms >= hop_ms > 0")
    frame_len = ms_to_samples(frame_ms, clip.sample_rate)
    hop_len = max(1, ms_to_samples(hop_ms, clip.sample_rate))
    n = len(clip.samples)
    if frame_len < 1 or n < frame_len:
        raise ClipTooShort(f"{n} samples cannot fill one {frame_len}-sample frame")
    frames = np.lib.stride_tricks.sliding_window_view(clip.samples, frame_len)[::hop_len]
    return FrameSequence(frames, frame_len, hop_len, clip.sample_rate)


def hamming(length: int) -> np.ndarray:
    i = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * i / (length - 1))


def apply_window(frame) -> np.ndarray:
    """Multiply a frame (or a stack of frames) by the Hamming window."""
    frame = np.asarray(frame, dtype=float)
    return frame * hamming(frame.shape[-1])
