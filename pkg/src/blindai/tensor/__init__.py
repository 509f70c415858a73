from .core import Tensor, backward, no_grad
from .layers import GRU, Conv1d, Conv2d, Layer, Linear, Module, ReLU, Softmax, forward, softmax
from .optim import AdamState, adam_step, clip_grad_norm
from .checkpoint import load_checkpoint, read_manifest, save_checkpoint

__all__ = [
    "Tensor", "backward", "no_grad", "GRU", "Conv1d", "Conv2d", "Layer", "Linear", "Module",
    "ReLU", "Softmax", "forward", "softmax", "AdamState", "adam_step", "clip_grad_norm",
    "load_checkpoint", "read_manifest", "save_checkpoint",
]
