"""Sound designs (``sounddesign-v1`` files) and the per-listener stereo mixer."""
from __future__ import annotations

import configparser
import shlex
import wave
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..dsp import FRAME_SAMPLES, SAMPLE_RATE, AudioFrame
from ..errors import ConfigError
from . import kernel as K
from .game import EVENT_NAMES, GameState, SoundEvent

HEADER = "sounddesign-v1"
BUILTIN_DESIGNS = ("informative", "sparse", "silent")
MAX_ASSET_SECONDS = 1.0
WAVEFORMS = ("sine", "square", "saw", "noise", "chirp")


@dataclass(frozen=True)
class SoundAsset:
    samples: np.ndarray  # mono float64 at 48 kHz
    source: str = ""


def synth(waveform: str, freq: float = 440.0, duration: float = 0.1, gain: float = 0.5,
          decay: float = 0.0, freq_end: float | None = None, seed: int = 0) -> SoundAsset:
    """Procedural cue: a basic waveform with optional exponential decay."""
    if waveform not in WAVEFORMS:
        raise ConfigError(f"unknown waveform {waveform!r}; expected one of {WAVEFORMS}")
    if not 0 < duration <= MAX_ASSET_SECONDS:
        raise ConfigError(f"cue duration must be in (0, {MAX_ASSET_SECONDS}] s, got {duration}")
    if not 0 <= gain <= 1:
        raise ConfigError(f"cue gain must be in [0, 1], got {gain}")
    n = max(1, int(round(duration * SAMPLE_RATE)))
    t = np.arange(n) / SAMPLE_RATE
    if waveform == "sine":
        y = np.sin(2 * np.pi * freq * t)
    elif waveform == "square":
        y = np.sign(np.sin(2 * np.pi * freq * t))
    elif waveform == "saw":
        y = 2.0 * ((freq * t) % 1.0) - 1.0
    elif waveform == "noise":
        y = np.random.default_rng(seed).uniform(-1.0, 1.0, n)
    else:
        f1 = freq if freq_end is None else freq_end
        phase = 2 * np.pi * (freq * t + 0.5 * (f1 - freq) * t * t / duration)
        y = np.sin(phase)
    if decay > 0:
        y = y * np.exp(-decay * t)
    return SoundAsset(gain * y, f"synth:{waveform}")


def load_wav(path) -> SoundAsset:
    """16-bit PCM mono 48 kHz WAV, at most one second long."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"wav file not found: {path}")
    with wave.open(str(path), "rb") as w:
        if w.getnchannels() != 1 or w.getsampwidth() != 2 or w.getframerate() != SAMPLE_RATE:
            raise ConfigError(f"{path}: need 16-bit mono {SAMPLE_RATE} Hz PCM")
        raw = w.readframes(w.getnframes())
    y = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if len(y) > MAX_ASSET_SECONDS * SAMPLE_RATE:
        raise ConfigError(f"{path}: cue longer than {MAX_ASSET_SECONDS} s")
    return SoundAsset(y, f"wav:{path.name}")


@dataclass
class SoundDesign:
    name: str
    cues: dict = field(default_factory=dict)  # event name -> SoundAsset | None (silence)

    def __post_init__(self):
        missing = [e for e in EVENT_NAMES if e not in self.cues]
        if missing:
            raise ConfigError(f"sound design {self.name!r} has no entry for {missing}")
        unknown = [e for e in self.cues if e not in EVENT_NAMES]
        if unknown:
            raise ConfigError(f"sound design {self.name!r} has unknown events {unknown}")
        self._by_kind = [self.cues[e] for e in EVENT_NAMES]

    def asset(self, kind: int) -> SoundAsset | None:
        return self._by_kind[kind]

    def is_silent(self, event: str) -> bool:
        return self.cues[event] is None


def _parse_cue(spec: str, base_dir: Path | None, where: str):
    words = shlex.split(spec)
    if not words:
        raise ConfigError(f"{where}: empty cue")
    head, params = words[0], {}
    for w in words[1:]:
        key, eq, val = w.partition("=")
        if not eq:
            raise ConfigError(f"{where}: expected key=value, got {w!r}")
        params[key] = val
    if head == "silence":
        if params:
            raise ConfigError(f"{where}: silence takes no parameters")
        return None
    if head == "wav":
        if set(params) != {"path"}:
            raise ConfigError(f"{where}: wav cue needs exactly path=...")
        p = Path(params["path"])
        if not p.is_absolute() and base_dir is not None:
            p = base_dir / p
        return load_wav(p)
    if head == "synth":
        kinds = {"waveform": str, "freq": float, "freq_end": float, "duration": float,
                 "gain": float, "decay": float, "seed": int}
        bad = set(params) - set(kinds)
        if bad:
            raise ConfigError(f"{where}: unknown synth parameters {sorted(bad)}")
        if "waveform" not in params:
            raise ConfigError(f"{where}: synth cue needs waveform=...")
        try:
            kwargs = {k: kinds[k](v) for k, v in params.items()}
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        return synth(**kwargs)
    raise ConfigError(f"{where}: cue must be synth, wav or silence, got {head!r}")


def parse_sound_design(text: str, source: str = "<string>", base_dir=None) -> SoundDesign:
    first, _, body = text.partition("\n")
    if first.strip() != HEADER:
        raise ConfigError(f"{source}: expected header {HEADER!r}, got {first.strip()!r}")
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(body, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if set(cp.sections()) != {"design", "cues"}:
        raise ConfigError(f"{source}: need exactly [design] and [cues] sections")
    name = cp["design"].get("name", Path(source).stem)
    base = Path(base_dir) if base_dir is not None else None
    cues = {ev: _parse_cue(spec, base, f"{source}:{ev}") for ev, spec in cp["cues"].items()}
    return SoundDesign(name, cues)


def load_sound_design(name_or_path) -> SoundDesign:
    """Load a builtin design by name or a ``sounddesign-v1`` file by path."""
    if str(name_or_path) in BUILTIN_DESIGNS:
        res = resources.files("blindai.arena").joinpath(f"data/{name_or_path}.sounddesign")
        return parse_sound_design(res.read_text(), str(name_or_path))
    path = Path(name_or_path)
    if not path.exists():
        raise ConfigError(f"sound design not found: {path}")
    return parse_sound_design(path.read_text(), str(path), path.parent)


def pan_gains(source_x: float, listener_x: float) -> tuple[float, float]:
    """Constant-power gains; pan spans [-1, 1] over half the stage width either side."""
    pan = min(1.0, max(-1.0, (source_x - listener_x) / (K.STAGE_W / 2)))
    theta = (pan + 1.0) * np.pi / 4.0
    return float(np.cos(theta)), float(np.sin(theta))


class AudioRenderer:
    """Mixes the cues triggered by game events into one 800-sample stereo frame per step.

    Cues longer than a frame keep playing from their emission position on
    later frames, so the renderer carries the active voices between calls.
    """

    def __init__(self, design: SoundDesign, listener: int = 0):
        self.design = design
        self.listener = listener
        self._voices: list = []

    def reset(self) -> None:
        self._voices = []

    def render(self, state: GameState, events: list) -> AudioFrame:
        left, right = self.render_arrays(state, events)
        return AudioFrame(left, right, state.frame)

    def render_arrays(self, state: GameState, events: list):
        for ev in events:
            asset = self.design.asset(ev.kind)
            if asset is not None:
                self._voices.append([asset.samples, 0, ev.x])
        left = np.zeros(FRAME_SAMPLES)
        right = np.zeros(FRAME_SAMPLES)
        lx = state.x(self.listener)
        alive = []
        for voice in self._voices:
            samples, pos, sx = voice
            seg = samples[pos : pos + FRAME_SAMPLES]
            gl, gr = pan_gains(sx, lx)
            left[: len(seg)] += gl * seg
            right[: len(seg)] += gr * seg
            voice[1] = pos + FRAME_SAMPLES
            if voice[1] < len(samples):
                alive.append(voice)
        self._voices = alive
        np.clip(left, -1.0, 1.0, out=left)
        np.clip(right, -1.0, 1.0, out=right)
        return left, right


def render_audio(state: GameState, events: list[SoundEvent], listener: int,
                 design: SoundDesign, renderer: AudioRenderer | None = None) -> AudioFrame:
    """Render one frame for ``listener``. Pass the same ``renderer`` across frames to keep long cues playing."""
    renderer = renderer or AudioRenderer(design, listener)
    return renderer.render(state, events)
