"""Blind-AI policy: audio encoder -> GRU(512) -> 3-layer FCN over 40 actions, plus a value head."""
from __future__ import annotations

import numpy as np

from ..encoders import AudioFeature, EncoderConfig, build_encoder
from ..errors import ShapeError
from ..tensor import core
from ..tensor.core import Tensor, no_grad
from ..tensor.layers import GRU, Linear, Module

N_ACTIONS = 40
HIDDEN_FC = 256


class PolicyNet(Module):
    def __init__(self, encoder: EncoderConfig | str = "melspec", gru_hidden: int = 512,
                 seed: int = 0, n_actions: int = N_ACTIONS):
        rng = np.random.default_rng(seed)
        self.encoder = build_encoder(encoder, rng)
        self.gru = GRU(self.encoder.feature_len, gru_hidden, rng)
        self.fc1 = Linear(gru_hidden, HIDDEN_FC, rng)
        self.fc2 = Linear(HIDDEN_FC, HIDDEN_FC, rng)
        self.fc3 = Linear(HIDDEN_FC, n_actions, rng)
        self.value_head = Linear(gru_hidden, 1, rng)
        # near-uniform initial policy
        self.fc3.weight.data *= 0.01
        self.gru_hidden = gru_hidden
        self.n_actions = n_actions

    @property
    def kind(self):
        return self.encoder.kind

    def initial_hidden(self) -> np.ndarray:
        return np.zeros(self.gru_hidden)

    def heads(self, h: Tensor) -> tuple[Tensor, Tensor]:
        """Batched hidden states (N, H) -> logits (N, 40), values (N,)."""
        x = core.relu(self.fc2(core.relu(self.fc1(h))))
        logits = self.fc3(x)
        values = core.reshape(self.value_head(h), (h.shape[0],))
        return logits, values

    def act(self, obs: np.ndarray, hidden: np.ndarray):
        """One no-grad step from a preprocessed observation.

        Returns ``(probs, value, new_hidden)`` as numpy values.
        """
        with no_grad():
            feat = core.flatten(self.encoder(Tensor(obs[None])))
            h = self.gru.step(feat, Tensor(hidden[None]))
            logits, values = self.heads(h)
            probs = core.softmax(logits)
        return probs.data[0], float(values.data[0]), h.data[0]

    def forward_sequence(self, obs: np.ndarray, h0: np.ndarray):
        """Unroll over a (L, B, *obs_shape) block from initial hidden (B, H).

        Returns logits (L*B, 40) and values (L*B,) in time-major order.
        """
        steps, batch = obs.shape[:2]
        feat = core.flatten(self.encoder(Tensor(obs.reshape((steps * batch,) + obs.shape[2:]))))
        hs = self.gru.sequence(core.reshape(feat, (steps, batch, feat.shape[1])), Tensor(h0))
        return self.heads(core.reshape(hs, (steps * batch, self.gru_hidden)))


def policy_forward(net: PolicyNet, feature: AudioFeature, hidden: Tensor):
    """Encoder feature + hidden state -> (probs (40,), value (), new_hidden (H,)).

    Gradients are recorded when enabled, so this doubles as the single-step
    training path.
    """
    if feature.kind != net.kind:
        raise ShapeError(f"{net.kind.value} policy feature",
                         net.encoder.out_shape, feature.tensor.shape)
    x = core.reshape(feature.tensor, (1, feature.flattened_len))
    h = net.gru.step(x, core.reshape(hidden, (1, hidden.shape[-1])))
    logits, values = net.heads(h)
    probs = core.softmax(logits)
    return core.reshape(probs, (net.n_actions,)), core.reshape(values, ()), core.reshape(h, (net.gru_hidden,))
