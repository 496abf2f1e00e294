"""Error taxonomy shared by every module.

All library errors derive from ``LabError`` so callers (the CLI in particular)
can separate bad input from genuine failures.
"""

from __future__ import annotations


class LabError(ValueError):
    pass


# -- parameters ---------------------------------------------------------------


class ParamsError(LabError):
    pass


class NonPositiveCoefficient(ParamsError):
    pass


class AlphaNotBelowBeta(ParamsError):
    pass


class BetaAboveOne(ParamsError):
    pass


class NegativeFloor(ParamsError):
    pass


class BetaOneRequiresC2LessThanOne(ParamsError):
    pass


class BetaBelowOneRequiresPositiveFloor(ParamsError):
    pass


class POutOfRange(ParamsError):
    pass


class BetaMustBeBelowOne(ParamsError):
    pass


class BetaMustBeOne(ParamsError):
    pass


# -- simulation ---------------------------------------------------------------


class SimulationError(LabError):
    pass


class InvalidArgument(SimulationError):
    pass


class NonFiniteWindow(SimulationError):
    pass


class HorizonTooLarge(SimulationError):
    pass


class GridMismatch(SimulationError):
    pass


class GridTooCoarse(SimulationError):
    pass


class NonPositiveState(SimulationError):
    pass


# -- statistics ---------------------------------------------------------------


class StatsError(LabError):
    pass


class EmptySample(StatsError):
    pass


class SizeMismatch(StatsError):
    pass


class DegenerateSample(StatsError):
    pass


class TooFewPoints(StatsError):
    pass


class NonPositiveValue(StatsError):
    pass


# -- experiment configuration -------------------------------------------------


class ConfigError(LabError):
    pass


class TooFewReplicates(ConfigError):
    pass


class ScenarioHypothesisViolated(ConfigError):
    pass
