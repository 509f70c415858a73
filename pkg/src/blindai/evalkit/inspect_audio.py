"""Re-render a logged round as one player hears it and dump its mel spectrogram."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import dsp
from ..arena.actions import default_actions
from ..arena.game import Simulator, reset
from ..arena.sound import AudioRenderer, SoundDesign, load_sound_design
from ..encoders import MEL_HOP, MEL_WINDOW, default_mel_bank
from ..errors import ConfigError, InvalidArgument

HEADER = "melspec-v1"


def render_replay(records, design: SoundDesign | str, listener: int = 0, seed: int = 0,
                  mirrored: bool = False) -> np.ndarray:
    """Stereo audio (frames, 2, 800) for the logged inputs, heard by ``listener``."""
    design = design if isinstance(design, SoundDesign) else load_sound_design(design)
    state = reset(seed, mirrored)
    sim = Simulator(state, default_actions())
    renderer = AudioRenderer(design, listener)
    out = np.zeros((len(records), 2, dsp.FRAME_SAMPLES))
    for i, r in enumerate(records):
        if state.over:
            raise ConfigError(f"replay continues past the end of the round at frame {r.frame}")
        events, _ = sim.step(r.a1, r.a2)
        out[i, 0], out[i, 1] = renderer.render_arrays(state, events)
    return out


def segment_melspec(audio: np.ndarray, start: int, frames: int) -> dsp.MelSpectrogram:
    """Log-mel of the mono mix of frames [start, start + frames)."""
    if start < 0 or frames < 1 or start + frames > len(audio):
        raise InvalidArgument(f"segment [{start}, {start + frames}) outside replay of {len(audio)} frames")
    seg = audio[start : start + frames]
    mono = 0.5 * (seg[:, 0, :] + seg[:, 1, :]).reshape(-1)
    if len(mono) < MEL_WINDOW:
        raise InvalidArgument(f"segment shorter than one {MEL_WINDOW}-sample window")
    return dsp.stft_mel(mono, default_mel_bank(), MEL_WINDOW, MEL_HOP)


def write_melspec(path, spec: dsp.MelSpectrogram) -> Path:
    path = Path(path)
    n_mels, t = spec.values.shape
    lines = [f"{HEADER} {n_mels} {t} {spec.hop_samples} {spec.window_samples}"]
    lines += [",".join(repr(float(v)) for v in row) for row in spec.values]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_melspec(path) -> dsp.MelSpectrogram:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"spectrogram dump not found: {path}")
    head, *rows = path.read_text().splitlines()
    parts = head.split()
    if len(parts) != 5 or parts[0] != HEADER:
        raise ConfigError(f"{path}: expected header '{HEADER} <mels> <T> <hop> <window>'")
    n_mels, t, hop, window = (int(p) for p in parts[1:])
    values = np.array([[float(v) for v in r.split(",")] for r in rows])
    if values.shape != (n_mels, t):
        raise ConfigError(f"{path}: header says {n_mels}x{t}, body is {values.shape}")
    return dsp.MelSpectrogram(values, hop, window)
