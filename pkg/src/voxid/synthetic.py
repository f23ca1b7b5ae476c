"""Seeded synthetic data: a multi-speaker one-word corpus and bench problems.

Speakers are source-filter voices: a glottal harmonic series at the
speaker's pitch, shaped by three formant resonances that glide between two
speaker-specific vowel targets, preceded by a short fricative onset.
Utterances of one speaker differ in pitch, formant positions, duration,
loudness and additive noise.
"""

from __future__ import annotations

import csv
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from voxid.audio import AudioClip


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: int
    name: str
    pitch_hz: float
    vowel_a: tuple[float, float, float]  # formant targets at word onset
    vowel_b: tuple[float, float, float]  # ... and at word end
    bandwidths: tuple[float, float, float]
    tilt: float  # spectral slope exponent of the harmonic source
    fricative_hz: float


def make_profiles(n_speakers: int = 8, seed: int = 0) -> list[SpeakerProfile]:
    rng = np.random.default_rng([seed, 7919])
    pitches = np.linspace(95.0, 235.0, n_speakers)[rng.permutation(n_speakers)]
    profiles = []
    for k in range(n_speakers):
        f1a, f1b = rng.uniform(320, 780, 2)
        f2a, f2b = rng.uniform(950, 2250, 2)
        f3a, f3b = rng.uniform(2350, 3300, 2)
        profiles.append(
            SpeakerProfile(
                speaker_id=k + 1,
                name=f"speaker-{k + 1}",
                pitch_hz=float(pitches[k] * rng.uniform(0.97, 1.03)),
                vowel_a=(f1a, f2a, f3a),
                vowel_b=(f1b, f2b, f3b),
                bandwidths=tuple(rng.uniform([60, 80, 110], [110, 150, 220])),
                tilt=float(rng.uniform(0.6, 1.4)),
                fricative_hz=float(rng.uniform(3500, 7000)),
            )
        )
    return profiles


def synthesize(profile: SpeakerProfile, rng: np.random.Generator, sample_rate: int = 22050) -> np.ndarray:
    """One utterance of ``profile`` with per-take variation, peak <= 0.9."""
    dur = 0.5 * rng.uniform(0.9, 1.1)
    n = int(dur * sample_rate)
    t = np.arange(n) / sample_rate
    frac = t / dur

    f0 = profile.pitch_hz * rng.uniform(0.94, 1.06)
    # gentle declination plus a little vibrato
    f0_t = f0 * (1.05 - 0.1 * frac) * (1 + 0.01 * np.sin(2 * np.pi * rng.uniform(4, 6) * t))
    phase = 2 * np.pi * np.cumsum(f0_t) / sample_rate

    shift = rng.uniform(0.96, 1.04, 3)
    fa = np.array(profile.vowel_a) * shift
    fb = np.array(profile.vowel_b) * shift
    glide = np.clip((frac - 0.3) / 0.4, 0.0, 1.0)
    formants = fa[:, None] + (fb - fa)[:, None] * glide[None, :]  # (3, n)
    bw = np.array(profile.bandwidths)[:, None]

    n_harm = int((sample_rate / 2 - 200) // (f0 * 1.1))
    voiced = np.zeros(n)
    for h in range(1, n_harm + 1):
        fh = h * f0_t
        gain = np.sum(1.0 / (1.0 + ((fh[None, :] - formants) / bw) ** 2), axis=0)
        voiced += gain * np.sin(h * phase) / h**profile.tilt

    env = np.minimum(1.0, frac / 0.08) * np.minimum(1.0, (1.0 - frac) / 0.15)
    voiced *= np.clip(env, 0.0, 1.0)

    # fricative onset: noise through a crude band-pass around fricative_hz
    noise = rng.standard_normal(n)
    spec = np.fft.rfft(noise)
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spec *= np.exp(-0.5 * ((freqs - profile.fricative_hz) / 900.0) ** 2)
    fric = np.fft.irfft(spec, n) * np.clip(1.0 - frac / 0.18, 0.0, 1.0)

    sig = voiced / (np.max(np.abs(voiced)) + 1e-12) + 0.35 * fric / (np.max(np.abs(fric)) + 1e-12)
    sig += 10 ** (-25 / 20) * np.std(sig) * rng.standard_normal(n)
    return 0.9 * rng.uniform(0.5, 1.0) * sig / np.max(np.abs(sig))


@dataclass(frozen=True)
class CorpusItem:
    path: str
    label: int
    name: str
    split: str


def corpus_clips(n_speakers: int = 8, n_utterances: int = 20, seed: int = 0, sample_rate: int = 22050):
    """Yield (profile, take index, AudioClip) in speaker-major order."""
    for profile in make_profiles(n_speakers, seed):
        for take in range(n_utterances):
            rng = np.random.default_rng([seed, profile.speaker_id, take])
            yield profile, take, AudioClip(synthesize(profile, rng, sample_rate), sample_rate)


def write_wav16(path, samples, sample_rate: int) -> None:
    pcm = np.clip(np.round(np.asarray(samples) * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())


def split_takes(n_utterances: int, train_frac: float, rng: np.random.Generator) -> set[int]:
    k = min(max(int(np.floor(train_frac * n_utterances + 0.5)), 1), n_utterances)
    return set(rng.permutation(n_utterances)[:k].tolist())


def write_corpus(out_dir, n_speakers: int = 8, n_utterances: int = 20, seed: int = 0,
                 sample_rate: int = 22050, train_frac: float = 0.5) -> list[CorpusItem]:
    """Write WAVs under ``out_dir`` plus ``manifest.csv`` (path,label,name,split)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    items = []
    train_sets = {}
    for profile, take, clip in corpus_clips(n_speakers, n_utterances, seed, sample_rate):
        if profile.speaker_id not in train_sets:
            train_sets[profile.speaker_id] = split_takes(
                n_utterances, train_frac, np.random.default_rng([seed, profile.speaker_id, 104729])
            )
        spk_dir = out / f"spk{profile.speaker_id:02d}"
        spk_dir.mkdir(exist_ok=True)
        wav = spk_dir / f"utt{take:02d}.wav"
        write_wav16(wav, clip.samples, sample_rate)
        split = "train" if take in train_sets[profile.speaker_id] else "test"
        items.append(CorpusItem(str(wav.relative_to(out)), profile.speaker_id, profile.name, split))
    with open(out / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "label", "name", "split"])
        for it in items:
            writer.writerow([it.path, it.label, it.name, it.split])
    return items


def two_cluster_problem(n: int, dim: int = 2, seed: int = 0, separation: float = 4.0,
                        label_noise: float = 0.1) -> tuple[np.ndarray, np.ndarray]:
    """Two unit-variance Gaussian clusters at +/- separation/2 on the first
    axis, with a ``label_noise`` fraction of labels flipped."""
    rng = np.random.default_rng([seed, n])
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    X = rng.standard_normal((n, dim))
    X[:, 0] += 0.5 * separation * y
    flip = rng.random(n) < label_noise
    return X, np.where(flip, -y, y)
