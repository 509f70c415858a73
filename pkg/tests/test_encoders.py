import math

import numpy as np
import pytest
from gradcheck import finite_difference_check

from blindai import dsp
from blindai.encoders import (
    FEATURE_SHAPES, AudioFeature, AudioRingBuffer, EncoderConfig, EncoderKind, LayerConf, build_encoder,
    default_mel_bank, encode_1dcnn, encode_fft, encode_mel, preprocess_fft, preprocess_mel,
)
from blindai.errors import ConfigError, ShapeError, StateError
from blindai.tensor import Tensor, core


def random_frame(rng):
    return dsp.AudioFrame(rng.uniform(-1, 1, 800), rng.uniform(-1, 1, 800))


def zero_biases(enc):
    for name, p in enc.named_parameters().items():
        if name.endswith("bias"):
            p.data[:] = 0.0


def test_1dcnn_shapes_and_intermediates():
    enc = build_encoder("onedcnn")
    assert enc.in_shape == (2, 100)
    assert enc.conv1.out_shape == (16, 22)
    assert enc.out_shape == (32, 5)
    feat = encode_1dcnn(random_frame(np.random.default_rng(0)), enc)
    assert feat.tensor.shape == (32, 5) and feat.flattened_len == 160


def test_fft_shapes_and_intermediates():
    enc = build_encoder("fftfcn")
    assert enc.in_shape == (256,)
    x = preprocess_fft(np.zeros((2, 800)))
    assert x.shape == (256,)
    feat = encode_fft(random_frame(np.random.default_rng(1)), enc)
    assert feat.tensor.shape == (256,) and feat.flattened_len == 256


def test_mel_shapes_and_intermediates():
    enc = build_encoder("melspec")
    assert enc.in_shape == (2, 80, 5)
    assert enc.conv1.out_shape == (16, 40, 3)
    buf = AudioRingBuffer().reset()
    rng = np.random.default_rng(2)
    for _ in range(4):
        buf.push(random_frame(rng))
    assert preprocess_mel(buf.samples()).shape == (2, 80, 5)
    feat = encode_mel(buf, default_mel_bank(), enc)
    assert feat.tensor.shape == (32, 40, 1) and feat.flattened_len == 1280


def test_zero_frame_zero_bias_gives_zero_feature():
    enc = build_encoder("onedcnn")
    zero_biases(enc)
    feat = encode_1dcnn(dsp.AudioFrame.silent(), enc)
    np.testing.assert_array_equal(feat.tensor.data, 0.0)


def test_silent_fft_frame_is_finite_and_normalised():
    # the floor ln(1e-6) maps to exactly zero after input normalisation
    x = preprocess_fft(np.zeros((2, 800)))
    np.testing.assert_allclose(x, 0.0, atol=1e-12)
    raw = np.log(np.zeros(512) + 1e-6)
    assert raw[0] == pytest.approx(math.log(1e-6))
    feat = encode_fft(dsp.AudioFrame.silent(), build_encoder("fftfcn"))
    assert np.all(np.isfinite(feat.tensor.data))


def test_silent_mel_buffer_is_constant():
    enc = build_encoder("melspec")
    zero_biases(enc)
    buf = AudioRingBuffer().reset()
    feat = encode_mel(buf, default_mel_bank(), enc)
    np.testing.assert_array_equal(feat.tensor.data, 0.0)


def test_ring_buffer_contract():
    buf = AudioRingBuffer()
    with pytest.raises(StateError):
        buf.samples()
    buf.reset()
    assert buf.samples().shape == (2, 3200)
    np.testing.assert_array_equal(buf.samples(), 0.0)
    frames = [np.full((2, 800), v) for v in (0.1, 0.2, 0.3, 0.4, 0.5)]
    for f in frames:
        buf.push(f)
    assert len(buf) == 4
    np.testing.assert_array_equal(buf.samples()[:, :800], 0.2)
    np.testing.assert_array_equal(buf.latest(), 0.5)
    with pytest.raises(ShapeError):
        buf.push(np.zeros((2, 799)))


@pytest.mark.parametrize("kind", list(EncoderKind))
def test_encoders_deterministic(kind):
    rng = np.random.default_rng(3)
    buf = AudioRingBuffer().reset()
    for _ in range(4):
        buf.push(random_frame(rng))
    a = build_encoder(EncoderConfig(kind=kind), np.random.default_rng(9))
    b = build_encoder(EncoderConfig(kind=kind), np.random.default_rng(9))
    fa = a.feature(a.preprocess(buf)).tensor.data
    fb = b.feature(b.preprocess(buf)).tensor.data
    np.testing.assert_array_equal(fa, fb)


@pytest.mark.parametrize("kind", list(EncoderKind))
def test_channel_swap_symmetry(kind):
    rng = np.random.default_rng(4)
    enc = build_encoder(kind, np.random.default_rng(5))
    buf_a, buf_b = AudioRingBuffer().reset(), AudioRingBuffer().reset()
    for _ in range(4):
        mono = rng.uniform(-1, 1, 800)
        buf_a.push(np.stack([mono, mono]))
        buf_b.push(np.stack([mono, mono])[::-1])
    fa = enc.feature(enc.preprocess(buf_a)).tensor.data
    fb = enc.feature(enc.preprocess(buf_b)).tensor.data
    np.testing.assert_array_equal(fa, fb)


@pytest.mark.parametrize("kind", list(EncoderKind))
def test_encoder_gradients(kind):
    rng = np.random.default_rng(6)
    enc = build_encoder(kind, np.random.default_rng(7))
    buf = AudioRingBuffer().reset()
    for _ in range(4):
        buf.push(random_frame(rng))
    x = Tensor(enc.preprocess(buf)[None], requires_grad=True)
    r = Tensor(rng.standard_normal((1,) + enc.out_shape))
    check = finite_difference_check(lambda: core.sum(core.mul(enc(x), r)), enc.parameters() + [x], max_entries=8)
    assert check <= 1.0


def test_feature_kind_shape_enforced():
    with pytest.raises(ShapeError):
        AudioFeature(EncoderKind.MELSPEC, Tensor(np.zeros((32, 5))))
    assert FEATURE_SHAPES[EncoderKind.FFTFCN] == (256,)


def test_config_overrides_and_errors():
    cfg = EncoderConfig(kind="onedcnn", layers={"conv1": LayerConf(8, (16,), (4,), (0,))})
    enc = build_encoder(cfg)
    assert enc.conv1.out_shape == (8, 22)
    with pytest.raises(ConfigError):
        EncoderConfig(kind="onedcnn", layers={"conv9": LayerConf(8)})
    with pytest.raises(ConfigError):
        EncoderConfig(kind="wavenet")
