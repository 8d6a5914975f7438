"""
Tracefill - UI Package

Command handlers and terminal rendering.
"""

from ui.commands import cmd_benchmark, cmd_evaluate, cmd_reconstruct, cmd_simulate_missing, cmd_synthesize

__all__ = ["cmd_benchmark", "cmd_evaluate", "cmd_reconstruct", "cmd_simulate_missing", "cmd_synthesize"]
