from .actions import ActionTable, default_actions, load_actions
from .game import GameState, RoundResult, SoundEvent, Simulator, Winner, reset, round_result, step
from .opponents import MCTSPolicy, RandomPolicy, ScriptedPolicy, make_opponent, mcts_opponent, scripted_opponent
from .runner import play_round, read_replay, verify_replay, write_replay
from .sound import AudioRenderer, SoundDesign, load_sound_design, render_audio

__all__ = [
    "ActionTable", "default_actions", "load_actions", "GameState", "RoundResult", "SoundEvent",
    "Simulator", "Winner", "reset", "round_result", "step", "MCTSPolicy", "RandomPolicy",
    "ScriptedPolicy", "make_opponent", "mcts_opponent", "scripted_opponent", "play_round",
    "read_replay", "verify_replay", "write_replay", "AudioRenderer", "SoundDesign",
    "load_sound_design", "render_audio",
]
