"""The three audio encoders: 1D-CNN on raw samples, FCN on log-FFT, 2D-CNN on log-mel.

Each encoder splits into a fixed preprocessing step (numpy, no parameters)
and a learned module. Rollout buffers store preprocessed inputs so the
learned part can be re-run with gradients during PPO updates.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import dsp
from .dsp import FRAME_SAMPLES, AudioFrame, MelFilterBank
from .errors import ConfigError, ShapeError, StateError
from .tensor import core
from .tensor.core import Tensor
from .tensor.layers import Conv1d, Conv2d, Linear, Module

# Log-domain inputs are shifted so the ln(1e-6) floor maps to 0, then scaled.
LOG_SHIFT = -np.log(dsp.LOG_FLOOR)
LOG_SCALE = 10.0

RING_FRAMES = 4
FFT_LEN = 1024
FFT_KEEP = 512
MEL_WINDOW = 1200  # 25 ms at 48 kHz
MEL_HOP = 480  # 10 ms
MEL_NFFT = 2048
N_MELS = 80


class EncoderKind(str, enum.Enum):
    ONEDCNN = "onedcnn"
    FFTFCN = "fftfcn"
    MELSPEC = "melspec"


FEATURE_SHAPES = {
    EncoderKind.ONEDCNN: (32, 5),
    EncoderKind.FFTFCN: (256,),
    EncoderKind.MELSPEC: (32, 40, 1),
}


@dataclass
class LayerConf:
    channels: int
    kernel: tuple = ()
    stride: tuple = ()
    padding: tuple = ()


def _default_layers(kind: EncoderKind) -> dict:
    if kind == EncoderKind.ONEDCNN:
        return {"conv1": LayerConf(16, (16,), (4,), (0,)), "conv2": LayerConf(32, (6,), (4,), (0,))}
    if kind == EncoderKind.FFTFCN:
        return {"fc1": LayerConf(256), "fc2": LayerConf(256)}
    return {
        "conv1": LayerConf(16, (3, 3), (2, 2), (1, 1)),
        "conv2": LayerConf(32, (3, 3), (1, 3), (1, 0)),
    }


@dataclass
class EncoderConfig:
    kind: EncoderKind = EncoderKind.MELSPEC
    layers: dict = field(default_factory=dict)
    downsample: int = 0  # 0 -> kind default (8 for onedcnn, 4 for fftfcn)

    def __post_init__(self):
        try:
            self.kind = EncoderKind(self.kind)
        except ValueError:
            raise ConfigError(
                f"unknown encoder kind {self.kind!r}; expected one of {[k.value for k in EncoderKind]}"
            ) from None
        merged = _default_layers(self.kind)
        for name, conf in self.layers.items():
            if name not in merged:
                raise ConfigError(f"encoder {self.kind.value} has no layer {name!r}")
            merged[name] = conf
        self.layers = merged
        if self.downsample == 0:
            self.downsample = {EncoderKind.ONEDCNN: 8, EncoderKind.FFTFCN: 4}.get(self.kind, 1)


@dataclass
class AudioFeature:
    kind: EncoderKind
    tensor: Tensor

    def __post_init__(self):
        expected = FEATURE_SHAPES[self.kind]
        if self.tensor.shape != expected:
            raise ShapeError(f"{self.kind.value} feature", expected, self.tensor.shape)

    @property
    def flattened_len(self) -> int:
        return self.tensor.size


class AudioRingBuffer:
    """The most recent stereo frames, oldest first."""

    def __init__(self, capacity: int = RING_FRAMES):
        self.capacity = capacity
        self._frames: deque = deque(maxlen=capacity)

    def reset(self) -> "AudioRingBuffer":
        self._frames.clear()
        for _ in range(self.capacity):
            self._frames.append(np.zeros((2, FRAME_SAMPLES)))
        return self

    def push(self, frame: AudioFrame | np.ndarray) -> None:
        stereo = frame.stereo() if isinstance(frame, AudioFrame) else np.asarray(frame, dtype=np.float64)
        if stereo.shape != (2, FRAME_SAMPLES):
            raise ShapeError("ring buffer frame", (2, FRAME_SAMPLES), stereo.shape)
        self._frames.append(stereo)

    @property
    def full(self) -> bool:
        return len(self._frames) == self.capacity

    def __len__(self):
        return len(self._frames)

    def latest(self) -> np.ndarray:
        if not self._frames:
            raise StateError("audio ring buffer is empty; call reset() at round start")
        return self._frames[-1]

    def samples(self) -> np.ndarray:
        if not self.full:
            raise StateError("audio ring buffer not initialised; call reset() at round start")
        return np.concatenate(list(self._frames), axis=1)


# -- preprocessing ------------------------------------------------------------


def preprocess_1dcnn(stereo: np.ndarray, factor: int = 8) -> np.ndarray:
    return np.stack([dsp.downsample(stereo[0], factor), dsp.downsample(stereo[1], factor)])


def preprocess_fft(stereo: np.ndarray, factor: int = 4) -> np.ndarray:
    spec = dsp.fft_rows(stereo, FFT_LEN)[:, :FFT_KEEP]
    logmag = np.log(np.abs(spec) + dsp.LOG_FLOOR)
    feats = logmag[:, ::factor].reshape(-1)
    return (feats + LOG_SHIFT) / LOG_SCALE


_BANK: MelFilterBank | None = None


def default_mel_bank() -> MelFilterBank:
    global _BANK
    if _BANK is None:
        _BANK = dsp.build_mel_filterbank(N_MELS, MEL_NFFT, dsp.SAMPLE_RATE)
    return _BANK


def preprocess_mel(stereo_long: np.ndarray, bank: MelFilterBank | None = None) -> np.ndarray:
    """(2, 3200) samples -> normalised log-mel (2, 80, 5)."""
    bank = bank or default_mel_bank()
    out = np.stack(
        [dsp.stft_mel(ch, bank, MEL_WINDOW, MEL_HOP).values for ch in stereo_long]
    )
    return (out + LOG_SHIFT) / LOG_SCALE


# -- learned modules ----------------------------------------------------------


class Encoder(Module):
    kind: EncoderKind
    in_shape: tuple
    out_shape: tuple

    def preprocess(self, buffer: AudioRingBuffer) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x: Tensor) -> Tensor:
        raise NotImplementedError

    @property
    def feature_len(self) -> int:
        return int(np.prod(self.out_shape))

    def feature(self, x: np.ndarray) -> AudioFeature:
        if x.shape != self.in_shape:
            raise ShapeError(f"{self.kind.value} encoder input", self.in_shape, x.shape)
        y = self(Tensor(x[None]))
        return AudioFeature(self.kind, Tensor(y.data[0]))


class OneDCNNEncoder(Encoder):
    kind = EncoderKind.ONEDCNN

    def __init__(self, config: EncoderConfig, rng):
        self.factor = config.downsample
        length = -(-FRAME_SAMPLES // self.factor)
        c1, c2 = config.layers["conv1"], config.layers["conv2"]
        self.conv1 = Conv1d(2, c1.channels, c1.kernel[0], c1.stride[0], c1.padding[0], length, rng)
        self.conv2 = Conv1d(c1.channels, c2.channels, c2.kernel[0], c2.stride[0], c2.padding[0],
                            self.conv1.out_shape[1], rng)
        self.in_shape = self.conv1.in_shape
        self.out_shape = self.conv2.out_shape

    def preprocess(self, buffer):
        return preprocess_1dcnn(buffer.latest(), self.factor)

    def __call__(self, x):
        return core.relu(self.conv2(core.relu(self.conv1(x))))


class FFTEncoder(Encoder):
    kind = EncoderKind.FFTFCN

    def __init__(self, config: EncoderConfig, rng):
        self.factor = config.downsample
        n_in = 2 * (-(-FFT_KEEP // self.factor))
        f1, f2 = config.layers["fc1"], config.layers["fc2"]
        self.fc1 = Linear(n_in, f1.channels, rng)
        self.fc2 = Linear(f1.channels, f2.channels, rng)
        self.in_shape = (n_in,)
        self.out_shape = (f2.channels,)

    def preprocess(self, buffer):
        return preprocess_fft(buffer.latest(), self.factor)

    def __call__(self, x):
        return self.fc2(core.relu(self.fc1(x)))


class MelEncoder(Encoder):
    kind = EncoderKind.MELSPEC

    def __init__(self, config: EncoderConfig, rng, bank: MelFilterBank | None = None):
        self.bank = bank or default_mel_bank()
        n_cols = (RING_FRAMES * FRAME_SAMPLES - MEL_WINDOW) // MEL_HOP + 1
        c1, c2 = config.layers["conv1"], config.layers["conv2"]
        self.conv1 = Conv2d(2, c1.channels, c1.kernel, c1.stride, c1.padding, (self.bank.n_mels, n_cols), rng)
        self.conv2 = Conv2d(c1.channels, c2.channels, c2.kernel, c2.stride, c2.padding,
                            self.conv1.out_shape[1:], rng)
        self.in_shape = self.conv1.in_shape
        self.out_shape = self.conv2.out_shape

    def preprocess(self, buffer):
        return preprocess_mel(buffer.samples(), self.bank)

    def __call__(self, x):
        return core.relu(self.conv2(core.relu(self.conv1(x))))


def build_encoder(config: EncoderConfig | str, rng=None) -> Encoder:
    if not isinstance(config, EncoderConfig):
        config = EncoderConfig(kind=config)
    rng = rng if rng is not None else np.random.default_rng(0)
    cls = {
        EncoderKind.ONEDCNN: OneDCNNEncoder,
        EncoderKind.FFTFCN: FFTEncoder,
        EncoderKind.MELSPEC: MelEncoder,
    }[config.kind]
    return cls(config, rng)


# -- single-sample entry points ----------------------------------------------


def encode_1dcnn(frame: AudioFrame, encoder: OneDCNNEncoder) -> AudioFeature:
    return encoder.feature(preprocess_1dcnn(frame.stereo(), encoder.factor))


def encode_fft(frame: AudioFrame, encoder: FFTEncoder) -> AudioFeature:
    return encoder.feature(preprocess_fft(frame.stereo(), encoder.factor))


def encode_mel(buffer: AudioRingBuffer, bank: MelFilterBank, encoder: MelEncoder) -> AudioFeature:
    return encoder.feature(preprocess_mel(buffer.samples(), bank))
