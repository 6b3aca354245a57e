# Command handlers - one module per group of sub-commands
from mppsim.commands import codec, experiment, noise

COMMAND_GROUPS = (codec, noise, experiment)

__all__ = ["codec", "experiment", "noise", "COMMAND_GROUPS"]
