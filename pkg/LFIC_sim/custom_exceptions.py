"""
Contains custom exceptions relevant for LFIC_sim.
"""

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright (c) 2024. LFIC_sim developers. All Rights Reserved."


class LFICError(Exception):
    """
    Base class of the domain errors raised by LFIC_sim. The command line maps it to exit code 1.
    """


class ScenarioMismatchError(LFICError):
    def __init__(self, left, right):
        super().__init__(f"Scenario mismatch: {left} vs. {right}.")


class ScenarioShapeError(LFICError):
    def __init__(self, reason: str):
        super().__init__(f"Scenario shape violation: {reason}")


class DocumentParseError(LFICError):
    """
    The document could not be parsed. The location of the failure is stored in the instance.
    """
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"Parse error at line {line}, column {column}: {message}")


class SchemaError(LFICError):
    def __init__(self, reason: str):
        super().__init__(f"Schema error: {reason}")


class InfeasibleError(LFICError):
    """
    The constraint system has no solution. `certificate` holds Farkas multipliers proving it.
    """
    def __init__(self, certificate=None, reason: str = "Infeasible constraint system."):
        self.certificate = certificate
        super().__init__(reason)


class UnboundedError(LFICError):
    """
    The polyhedron or the objective is unbounded. `ray` holds a certifying direction.
    """
    def __init__(self, ray=None, reason: str = "Unbounded polyhedron."):
        self.ray = ray
        super().__init__(f"{reason} Certifying ray: {ray}")


class CollinearPointsError(LFICError):
    def __init__(self):
        super().__init__("The points defining the plane are not affinely independent.")


class NoViolationError(LFICError):
    def __init__(self):
        super().__init__("no violation to protect")


class UnknownPresetError(LFICError):
    def __init__(self, name: str, available):
        super().__init__(f"Unknown preset '{name}'. Available presets: {', '.join(available)}.")


class InvalidRealizationError(LFICError):
    def __init__(self, operator_name: str, reason: str):
        super().__init__(f"Invalid quantum realization, operator {operator_name}: {reason}")


class ZeroProbabilityOutcomeError(LFICError):
    def __init__(self):
        super().__init__("The observed outcome has zero probability.")


class SDPIterationLimitError(LFICError):
    """
    The SDP solver exhausted its iterations. The best safe bound and the duality gap are kept.
    """
    def __init__(self, best_bound: float, gap: float):
        self.best_bound = best_bound
        self.gap = gap
        super().__init__(f"SDP iteration limit exceeded (best safe bound {best_bound}, gap {gap}).")


class OutsideAffineHullError(LFICError):
    def __init__(self):
        super().__init__("The direction leaves the affine hull of valid behaviors.")


class OutputExistsError(LFICError):
    def __init__(self, path: str):
        super().__init__(f"{path} already exists. Use --force to overwrite.")
