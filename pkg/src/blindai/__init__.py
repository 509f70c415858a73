"""Blind fighting-game agent: audio features, a small autodiff library, PPO and evaluation tools."""
__version__ = "0.1.0"
