"""PCM clips, WAV files, and phase-vocoder time scaling.

The controller itself only needs clip durations; PCM enters the picture
when sessions render actual speech (demo assets, UI playback).  Scaling by
pace a shortens a clip to duration/a while preserving pitch.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

__all__ = [
    "AudioClip",
    "AudioError",
    "load_wav",
    "save_wav",
    "synthesize_tone",
    "time_scale",
]

SAMPLE_RATES = (16000, 22050, 44100, 48000)
WINDOW = 2048
HOP = 512


class AudioError(ValueError):
    """Raised for malformed clips or out-of-range scaling."""


@dataclass(frozen=True)
class AudioClip:
    """Mono PCM, float samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or len(s) == 0:
            raise AudioError("samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(s)):
            raise AudioError("samples must be finite")
        if np.max(np.abs(s)) > 1.0 + 1e-6:
            raise AudioError("samples must lie in [-1, 1]")
        if self.sample_rate not in SAMPLE_RATES:
            raise AudioError(f"unsupported sample rate {self.sample_rate}")
        object.__setattr__(self, "samples", s)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def load_wav(path: str | Path) -> AudioClip:
    """Read a 16-bit, 32-bit, or float32 WAV; stereo is averaged to mono."""
    try:
        rate, data = wavfile.read(str(path))
    except (OSError, ValueError) as e:
        raise AudioError(f"cannot read {path}: {e}") from e
    if data.ndim == 2:
        data = data.mean(axis=1)
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        samples = data / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = np.asarray(data, dtype=float)
    else:
        raise AudioError(f"{path}: unsupported sample format {data.dtype}")
    return AudioClip(np.clip(samples, -1.0, 1.0), int(rate))


def save_wav(path: str | Path, clip: AudioClip, dtype: str = "int16") -> None:
    if dtype == "int16":
        data = np.round(np.clip(clip.samples, -1.0, 1.0) * 32767.0).astype(np.int16)
    elif dtype == "float32":
        data = clip.samples.astype(np.float32)
    else:
        raise AudioError(f"unsupported output format {dtype}")
    wavfile.write(str(path), clip.sample_rate, data)


def synthesize_tone(duration_s: float, sample_rate: int = 44100,
                    freq: float = 440.0, amplitude: float = 0.4) -> AudioClip:
    """Sine placeholder for a missing clip, faded 5 ms at both ends."""
    if duration_s <= 0.0:
        raise AudioError(f"duration must be positive, got {duration_s}")
    n = max(int(round(duration_s * sample_rate)), 1)
    t = np.arange(n) / sample_rate
    samples = amplitude * np.sin(2.0 * np.pi * freq * t)
    fade = min(int(0.005 * sample_rate), n // 2)
    if fade > 0:
        ramp = np.linspace(0.0, 1.0, fade)
        samples[:fade] *= ramp
        samples[-fade:] *= ramp[::-1]
    return AudioClip(samples, sample_rate)


def time_scale(clip: AudioClip, a: float) -> AudioClip:
    """Phase-vocoder scaling: output duration = input duration / a.

    STFT with a 2048-sample Hann window at hop 512; synthesis frames land
    at hop/a with phases advanced by the per-bin instantaneous frequency,
    then weighted overlap-add.  Output length is exactly round(n / a).
    """
    if not 0.6 <= a <= 1.4:
        raise AudioError(f"pace {a} outside [0.6, 1.4]")
    x = clip.samples
    n_out = int(round(len(x) / a))
    if len(x) < WINDOW:
        return AudioClip(_resample_short(x, n_out), clip.sample_rate)
    win = np.hanning(WINDOW)
    n_frames = 1 + (len(x) - WINDOW) // HOP
    offsets = np.arange(n_frames) * HOP
    frames = x[offsets[:, None] + np.arange(WINDOW)] * win
    spectra = np.fft.rfft(frames, axis=1)
    mags = np.abs(spectra)
    phases = np.angle(spectra)

    omega = 2.0 * np.pi * np.arange(WINDOW // 2 + 1) / WINDOW  # rad per sample
    syn_pos = np.round(offsets / a).astype(int)
    syn_phases = np.empty_like(phases)
    syn_phases[0] = phases[0]
    for k in range(1, n_frames):
        dphi = phases[k] - phases[k - 1] - omega * HOP
        dphi -= 2.0 * np.pi * np.round(dphi / (2.0 * np.pi))
        inst = omega + dphi / HOP
        syn_phases[k] = syn_phases[k - 1] + inst * (syn_pos[k] - syn_pos[k - 1])

    out_len = syn_pos[-1] + WINDOW
    y = np.zeros(out_len)
    norm = np.zeros(out_len)
    chunks = np.fft.irfft(mags * np.exp(1j * syn_phases), n=WINDOW, axis=1) * win
    for k in range(n_frames):
        y[syn_pos[k]:syn_pos[k] + WINDOW] += chunks[k]
        norm[syn_pos[k]:syn_pos[k] + WINDOW] += win ** 2
    y = np.where(norm > 1e-6, y / np.maximum(norm, 1e-6), y)

    if len(y) >= n_out:
        y = y[:n_out]
    else:
        y = np.concatenate([y, np.zeros(n_out - len(y))])
    return AudioClip(np.clip(y, -1.0, 1.0), clip.sample_rate)


def _resample_short(x: np.ndarray, n_out: int) -> np.ndarray:
    """Sub-window clips fall back to linear resampling."""
    if n_out <= 1 or len(x) == 1:
        return np.full(max(n_out, 1), float(x[0]))
    src = np.linspace(0.0, len(x) - 1.0, n_out)
    return np.interp(src, np.arange(len(x)), x)
