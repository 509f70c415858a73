"""Audio signal primitives: radix-2 FFT, log spectra, mel filterbank, STFT.

All functions are pure. The FFT inner loop is a numba kernel; with the JIT
disabled a vectorised numpy implementation of the same algorithm is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._jit import JIT_ENABLED, njit
from .errors import InvalidArgument

SAMPLE_RATE = 48_000
FPS = 60
FRAME_SAMPLES = SAMPLE_RATE // FPS  # 800
LOG_FLOOR = 1e-6
GOLDEN_HEADER = "dsp-golden-v1"


@dataclass(frozen=True)
class AudioFrame:
    """One game frame of stereo samples, 800 per channel, all in [-1, 1]."""

    left: np.ndarray
    right: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        left = np.asarray(self.left, dtype=np.float64)
        right = np.asarray(self.right, dtype=np.float64)
        if left.shape != (FRAME_SAMPLES,) or right.shape != (FRAME_SAMPLES,):
            raise InvalidArgument(
                f"AudioFrame channels must have {FRAME_SAMPLES} samples, "
                f"got {left.shape} and {right.shape}"
            )
        if np.any(np.abs(left) > 1.0) or np.any(np.abs(right) > 1.0):
            raise InvalidArgument("AudioFrame samples must lie in [-1, 1]")
        if self.frame_index < 0:
            raise InvalidArgument("frame_index must be nonnegative")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def silent(cls, frame_index: int = 0) -> "AudioFrame":
        z = np.zeros(FRAME_SAMPLES)
        return cls(z, z.copy(), frame_index)

    def stereo(self) -> np.ndarray:
        return np.stack([self.left, self.right])


@dataclass(frozen=True)
class ComplexSpectrum:
    bins: np.ndarray  # complex128, power-of-two length

    def __len__(self):
        return len(self.bins)


@dataclass(frozen=True)
class MelFilterBank:
    n_mels: int
    n_fft: int
    sample_rate: float
    weights: np.ndarray  # (n_mels, n_fft // 2 + 1)
    centers_hz: np.ndarray  # (n_mels,)


@dataclass(frozen=True)
class MelSpectrogram:
    values: np.ndarray  # (n_mels, T) natural-log mel energies
    hop_samples: int
    window_samples: int

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


# -- FFT kernels --------------------------------------------------------------


@njit
def _fft_rows_kernel(x):
    """In-place iterative radix-2 DIT FFT over the rows of a complex matrix."""
    m, n = x.shape
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            for r in range(m):
                tmp = x[r, i]
                x[r, i] = x[r, j]
                x[r, j] = tmp
    size = 2
    while size <= n:
        half = size // 2
        ang = -2.0 * np.pi / size
        for k in range(half):
            w = complex(np.cos(ang * k), np.sin(ang * k))
            for start in range(0, n, size):
                for r in range(m):
                    a = x[r, start + k]
                    b = x[r, start + k + half] * w
                    x[r, start + k] = a + b
                    x[r, start + k + half] = a - b
        size *= 2
    return x


_BITREV_CACHE: dict[int, np.ndarray] = {}


def _bitrev(n: int) -> np.ndarray:
    perm = _BITREV_CACHE.get(n)
    if perm is None:
        bits = n.bit_length() - 1
        idx = np.arange(n)
        perm = np.zeros(n, dtype=np.int64)
        for b in range(bits):
            perm |= ((idx >> b) & 1) << (bits - 1 - b)
        _BITREV_CACHE[n] = perm
    return perm


def _fft_rows_numpy(x: np.ndarray) -> np.ndarray:
    m, n = x.shape
    x = x[:, _bitrev(n)]
    size = 2
    while size <= n:
        half = size // 2
        k = np.arange(half)
        ang = -2.0 * np.pi / size * k
        w = np.cos(ang) + 1j * np.sin(ang)
        x = x.reshape(m, n // size, size)
        a = x[:, :, :half]
        b = x[:, :, half:] * w
        x = np.concatenate([a + b, a - b], axis=2).reshape(m, n)
        size *= 2
    return x


def fft_rows(rows: np.ndarray, padded_len: int) -> np.ndarray:
    """FFT of every row of ``rows`` after zero-padding to ``padded_len``."""
    rows = np.atleast_2d(np.asarray(rows))
    if not is_power_of_two(padded_len):
        raise InvalidArgument(f"padded_len must be a power of two, got {padded_len}")
    if padded_len < rows.shape[1]:
        raise InvalidArgument(
            f"padded_len {padded_len} is shorter than the signal ({rows.shape[1]})"
        )
    x = np.zeros((rows.shape[0], padded_len), dtype=np.complex128)
    x[:, : rows.shape[1]] = rows
    if JIT_ENABLED:
        return _fft_rows_kernel(x)
    return _fft_rows_numpy(x)


def fft(signal, padded_len: int) -> ComplexSpectrum:
    signal = np.asarray(signal)
    if signal.ndim != 1:
        raise InvalidArgument("fft expects a 1-D signal")
    return ComplexSpectrum(fft_rows(signal[None, :], padded_len)[0])


def ifft(spectrum: ComplexSpectrum) -> np.ndarray:
    """Inverse transform via the conjugation identity; returns complex samples."""
    bins = np.asarray(spectrum.bins, dtype=np.complex128)
    n = len(bins)
    return np.conj(fft_rows(np.conj(bins)[None, :], n)[0]) / n


def naive_dft(signal) -> np.ndarray:
    """O(n^2) reference DFT, used as an independent oracle in tests."""
    x = np.asarray(signal, dtype=np.complex128)
    n = len(x)
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        acc = 0j
        for t in range(n):
            acc += x[t] * complex(math.cos(-2 * math.pi * k * t / n), math.sin(-2 * math.pi * k * t / n))
        out[k] = acc
    return out


# -- spectra ------------------------------------------------------------------


def log_magnitude(spectrum: ComplexSpectrum, keep: int) -> np.ndarray:
    n = len(spectrum.bins)
    if keep < 1 or keep > n // 2:
        raise InvalidArgument(f"keep must be in [1, {n // 2}], got {keep}")
    return np.log(np.abs(spectrum.bins[:keep]) + LOG_FLOOR)


def downsample(signal, factor: int) -> np.ndarray:
    if factor < 1:
        raise InvalidArgument(f"downsample factor must be >= 1, got {factor}")
    return np.asarray(signal)[::factor].copy()


def hz_to_mel(f):
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise InvalidArgument("frequency must be nonnegative")
    m = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(m) if m.ndim == 0 else m


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    if np.any(m < 0):
        raise InvalidArgument("mel value must be nonnegative")
    f = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return float(f) if f.ndim == 0 else f


def build_mel_filterbank(n_mels: int = 80, n_fft: int = 2048, sample_rate: float = SAMPLE_RATE) -> MelFilterBank:
    """Triangular filters with centers evenly spaced in mel between 0 and Nyquist.

    Weights are evaluated on the continuous frequency axis, so a filter
    narrower than one FFT bin still touches its neighbours rather than
    vanishing.
    """
    if n_fft < 2 or n_fft % 2:
        raise InvalidArgument(f"n_fft must be even, got {n_fft}")
    if sample_rate <= 0:
        raise InvalidArgument("sample_rate must be positive")
    n_bins = n_fft // 2 + 1
    if n_mels < 1 or n_mels + 2 > n_bins:
        raise InvalidArgument(f"{n_mels} mel filters do not fit in {n_bins} FFT bins")
    edges_hz = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    bin_hz = np.arange(n_bins) * sample_rate / n_fft
    lo, mid, hi = edges_hz[:-2, None], edges_hz[1:-1, None], edges_hz[2:, None]
    rising = (bin_hz[None, :] - lo) / (mid - lo)
    falling = (hi - bin_hz[None, :]) / (hi - mid)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    return MelFilterBank(n_mels, n_fft, float(sample_rate), weights, edges_hz[1:-1].copy())


_HANN_CACHE: dict[int, np.ndarray] = {}


def hann(n: int) -> np.ndarray:
    w = _HANN_CACHE.get(n)
    if w is None:
        w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
        _HANN_CACHE[n] = w
    return w


def stft_frames(signal, window_samples: int, hop_samples: int) -> np.ndarray:
    signal = np.asarray(signal, dtype=np.float64)
    if window_samples < 1 or hop_samples < 1:
        raise InvalidArgument("window and hop must be positive")
    if len(signal) < window_samples:
        raise InvalidArgument(
            f"signal of {len(signal)} samples is shorter than the {window_samples}-sample window"
        )
    n_frames = (len(signal) - window_samples) // hop_samples + 1
    idx = np.arange(window_samples)[None, :] + hop_samples * np.arange(n_frames)[:, None]
    return signal[idx] * hann(window_samples)


def stft_mel(signal, bank: MelFilterBank, window_samples: int, hop_samples: int) -> MelSpectrogram:
    """Log mel power spectrogram; each window is zero-padded to ``bank.n_fft``."""
    if not is_power_of_two(bank.n_fft) or bank.n_fft < window_samples:
        raise InvalidArgument(
            f"filterbank n_fft={bank.n_fft} must be a power of two >= window ({window_samples})"
        )
    frames = stft_frames(signal, window_samples, hop_samples)
    spec = fft_rows(frames, bank.n_fft)[:, : bank.n_fft // 2 + 1]
    power = spec.real**2 + spec.imag**2
    values = np.log(bank.weights @ power.T + LOG_FLOOR)
    return MelSpectrogram(values, hop_samples, window_samples)


# -- golden vectors -----------------------------------------------------------


def write_golden(path, values) -> None:
    values = np.ascontiguousarray(values, dtype="<f8").ravel()
    with open(path, "wb") as fh:
        fh.write(f"{GOLDEN_HEADER} {len(values)}\n".encode("ascii"))
        fh.write(values.tobytes())


def read_golden(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    header, _, body = raw.partition(b"\n")
    tag, _, count = header.decode("ascii").partition(" ")
    if tag != GOLDEN_HEADER:
        raise InvalidArgument(f"{path}: not a {GOLDEN_HEADER} file")
    values = np.frombuffer(body, dtype="<f8")
    if len(values) != int(count):
        raise InvalidArgument(f"{path}: header says {count} values, found {len(values)}")
    return values.astype(np.float64)
