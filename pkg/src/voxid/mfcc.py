"""Mel-frequency cepstral coefficients.

Windowed frame -> radix-2 FFT power spectrum -> triangular mel filterbank
-> natural-log energies -> DCT-II cepstrum with c0 dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from voxid.audio import AudioClip, apply_window, frame_signal, ms_to_samples
from voxid.errors import (
    BadCoeffCount,
    DegenerateBank,
    FrameTooLong,
    InvalidConfig,
    LengthMismatch,
    NegativeFrequency,
    NegativeMel,
    NonPowerOfTwo,
    SampleRateMismatch,
)


def hz_to_mel(f):
    """2595 * log10(1 + f/700); accepts scalars or arrays."""
    arr = np.asarray(f, dtype=float)
    if np.any(arr < 0):
        raise NegativeFrequency(f"frequency must be >= 0, got {f}")
    out = 2595.0 * np.log10(1.0 + arr / 700.0)
    return float(out) if out.ndim == 0 else out


def mel_to_hz(m):
    arr = np.asarray(m, dtype=float)
    if np.any(arr < 0):
        raise NegativeMel(f"mel value must be >= 0, got {m}")
    out = 700.0 * (10.0 ** (arr / 2595.0) - 1.0)
    return float(out) if out.ndim == 0 else out


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft(x) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT along the last axis."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    if not _is_pow2(n):
        raise NonPowerOfTwo(f"FFT length {n} is not a power of two")
    lead = x.shape[:-1]
    out = x[..., _bit_reverse(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = out.reshape(lead + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        out = np.concatenate([even + odd, even - odd], axis=-1).reshape(lead + (n,))
        size *= 2
    return out


def power_spectrum(windowed_frame, fft_size: int) -> np.ndarray:
    """|X[k]|^2 for k = 0..fft_size/2 of the zero-padded frame(s)."""
    frame = np.asarray(windowed_frame, dtype=float)
    if not _is_pow2(fft_size):
        raise NonPowerOfTwo(f"fft_size {fft_size} is not a power of two")
    if frame.shape[-1] > fft_size:
        raise FrameTooLong(f"frame of {frame.shape[-1]} samples exceeds fft_size {fft_size}")
    padded = np.zeros(frame.shape[:-1] + (fft_size,))
    padded[..., : frame.shape[-1]] = frame
    spec = fft(padded)[..., : fft_size // 2 + 1]
    return spec.real**2 + spec.imag**2


@dataclass(frozen=True)
class MfccConfig:
    sample_rate: int = 22050
    fft_size: int = 1024
    num_filters: int = 20
    f_low: float = 0.0
    f_high: float | None = None
    num_coeffs: int = 19
    log_floor: float = 1e-10
    frame_ms: float = 30.0
    hop_ms: float = 10.0

    def __post_init__(self):
        if self.f_high is None:
            object.__setattr__(self, "f_high", self.sample_rate / 2.0)
        if self.sample_rate <= 0:
            raise InvalidConfig("sample_rate must be positive")
        if not _is_pow2(self.fft_size):
            raise InvalidConfig(f"fft_size {self.fft_size} is not a power of two")
        if not 0 <= self.f_low < self.f_high <= self.sample_rate / 2.0:
            raise InvalidConfig("need 0 <= f_low < f_high <= sample_rate/2")
        if self.num_filters < 2:
            raise InvalidConfig("need at least two filters")
        if not 1 <= self.num_coeffs <= self.num_filters - 1:
            raise InvalidConfig("num_coeffs must lie in 1..num_filters-1")
        if not self.log_floor > 0:
            raise InvalidConfig("log_floor must be positive")
        if not self.frame_ms >= self.hop_ms > 0:
            raise InvalidConfig("need frame_ms >= hop_ms > 0")
        if self.frame_len > self.fft_size:
            raise InvalidConfig(f"{self.frame_len}-sample frames exceed fft_size {self.fft_size}")

    @property
    def frame_len(self) -> int:
        return ms_to_samples(self.frame_ms, self.sample_rate)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, values: dict) -> "MfccConfig":
        casts = {"sample_rate": int, "fft_size": int, "num_filters": int, "num_coeffs": int}
        kwargs = {}
        for key, raw in values.items():
            if key not in cls.__dataclass_fields__:
                raise InvalidConfig(f"unknown MFCC setting {key!r}")
            kwargs[key] = casts.get(key, float)(raw)
        return cls(**kwargs)


@dataclass(frozen=True)
class MelFilterBank:
    """Triangular filters on FFT bins.

    ``weights`` is dense (num_filters x bin_count); filter k is nonzero
    strictly between ``edge_bins[k]`` and ``edge_bins[k + 2]`` and equals
    1.0 at ``edge_bins[k + 1]``.
    """

    weights: np.ndarray
    edge_bins: np.ndarray
    edge_hz: np.ndarray
    config: MfccConfig = field(repr=False)

    @property
    def bin_count(self) -> int:
        return self.weights.shape[1]

    @property
    def num_filters(self) -> int:
        return self.weights.shape[0]

    @property
    def center_hz(self) -> np.ndarray:
        return self.edge_hz[1:-1]

    def support(self, k: int) -> tuple[int, int]:
        """Bin range [lo, hi] of filter k, triangle feet included."""
        return int(self.edge_bins[k]), int(self.edge_bins[k + 2])


def build_filterbank(config: MfccConfig) -> MelFilterBank:
    K = config.num_filters
    mels = np.linspace(hz_to_mel(config.f_low), hz_to_mel(config.f_high), K + 2)
    edge_hz = mel_to_hz(mels)
    edge_bins = np.floor(edge_hz * config.fft_size / config.sample_rate + 0.5).astype(int)
    if np.any(np.diff(edge_bins) == 0):
        dup = int(np.flatnonzero(np.diff(edge_bins) == 0)[0])
        raise DegenerateBank(
            f"filter edges {dup} and {dup + 1} share FFT bin {edge_bins[dup]}; "
            f"raise fft_size or lower num_filters"
        )
    bins = np.arange(config.fft_size // 2 + 1)
    weights = np.zeros((K, len(bins)))
    for k in range(K):
        lo, mid, hi = edge_bins[k : k + 3]
        rise = (bins - lo) / (mid - lo)
        fall = (hi - bins) / (hi - mid)
        weights[k] = np.clip(np.minimum(rise, fall), 0.0, None)
    weights.setflags(write=False)
    return MelFilterBank(weights, edge_bins, edge_hz, config)


def apply_filterbank(spectrum, bank: MelFilterBank, log_floor: float = 1e-10) -> np.ndarray:
    """Natural-log filterbank energies, floored at ``log_floor`` before the log."""
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape[-1] != bank.bin_count:
        raise LengthMismatch(f"spectrum has {spectrum.shape[-1]} bins, filterbank expects {bank.bin_count}")
    energies = spectrum @ bank.weights.T
    return np.log(np.maximum(energies, log_floor))


def cepstral_basis(num_filters: int, orders) -> np.ndarray:
    """cos(n (k - 1/2) pi / K) with rows k = 1..K and one column per order n."""
    K = num_filters
    k = np.arange(1, K + 1)[:, None]
    n = np.asarray(orders, dtype=np.int64)[None, :]
    # phase n(2k-1) pi / 2K reduced exactly in integers, so odd multiples
    # of pi/2 (all of column n = K) give exact zeros
    m = (n * (2 * k - 1)) % (4 * K)
    out = np.cos(np.pi * m / (2 * K))
    out[m % (2 * K) == K] = 0.0
    return out


@dataclass(frozen=True)
class AcousticVector:
    coeffs: np.ndarray

    def __len__(self):
        return len(self.coeffs)


def cepstra(log_energies, num_coeffs: int) -> np.ndarray:
    """Cepstral coefficients 1..num_coeffs of each row of ``log_energies``."""
    log_energies = np.asarray(log_energies, dtype=float)
    K = log_energies.shape[-1]
    if not 1 <= num_coeffs <= K - 1:
        raise BadCoeffCount(f"num_coeffs must lie in 1..{K - 1}, got {num_coeffs}")
    return log_energies @ cepstral_basis(K, np.arange(1, num_coeffs + 1))


def dct_cepstrum(log_energies, num_coeffs: int) -> AcousticVector:
    """c_n = sum_k log_energy_k cos(n (k - 1/2) pi / K), n = 1..num_coeffs.

    c0 (the frame mean) is never produced; c_K vanishes identically, so at
    most K - 1 coefficients carry information.
    """
    log_energies = np.asarray(log_energies, dtype=float)
    if log_energies.ndim != 1:
        raise LengthMismatch("dct_cepstrum takes one frame of log energies")
    return AcousticVector(cepstra(log_energies, num_coeffs))


def mfcc_matrix(clip: AudioClip, config: MfccConfig | None = None,
                frame_ms: float | None = None, hop_ms: float | None = None,
                bank: MelFilterBank | None = None) -> np.ndarray:
    """Acoustic vectors of ``clip`` as an (n_frames, num_coeffs) array."""
    config = config or MfccConfig()
    if clip.sample_rate != config.sample_rate:
        where = f"{clip.source_path}: " if clip.source_path else ""
        raise SampleRateMismatch(f"{where}clip is {clip.sample_rate} Hz, pipeline expects {config.sample_rate} Hz")
    frames = frame_signal(
        clip,
        config.frame_ms if frame_ms is None else frame_ms,
        config.hop_ms if hop_ms is None else hop_ms,
    )
    bank = bank or build_filterbank(config)
    spectra = power_spectrum(apply_window(frames.frames), config.fft_size)
    log_e = apply_filterbank(spectra, bank, config.log_floor)
    return cepstra(log_e, config.num_coeffs)


def mfcc_pipeline(clip: AudioClip, config: MfccConfig | None = None,
                  frame_ms: float | None = None, hop_ms: float | None = None) -> list[AcousticVector]:
    """One AcousticVector per frame, in frame order."""
    return [AcousticVector(row) for row in mfcc_matrix(clip, config, frame_ms, hop_ms)]
