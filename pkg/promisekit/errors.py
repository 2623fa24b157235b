# promisekit/errors.py
from typing import Optional


class PromiseKitError(Exception):
    """Base error. `detail` is what the CLI prints, `exit_code` what it exits with."""

    exit_code = 2

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigError(PromiseKitError):
    pass


# --- promise_core ---
class PromiseError(PromiseKitError):
    code = "PromiseError"


class AutonomyViolation(PromiseError):
    code = "AutonomyViolation"


class UnknownAgent(PromiseError):
    code = "UnknownAgent"


class SelfPromise(PromiseError):
    code = "SelfPromise"


# --- language ---
class LanguageError(PromiseKitError):
    pass


class VocabMismatch(LanguageError):
    pass


class ShapeMismatch(LanguageError):
    pass


class MissingTranslation(LanguageError):
    pass


# --- trust ---
class TrustError(PromiseKitError):
    pass


# --- dynamics ---
class SimulationError(PromiseKitError):
    pass


class InertChannel(SimulationError):
    pass


class NoChannels(SimulationError):
    pass


class NoObservations(SimulationError):
    pass


# --- composition ---
class CompositionError(PromiseKitError):
    pass


class NotAConditional(CompositionError):
    pass


# --- convergence ---
class ConvergenceError(PromiseKitError):
    pass


class UnknownState(ConvergenceError):
    pass


class StateSpaceTooLarge(ConvergenceError):
    pass


# --- model documents ---
class DocumentError(PromiseKitError):
    pass


class ParseError(DocumentError):
    def __init__(self, detail: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            detail = f"{detail} (line {line}, column {column})"
        super().__init__(detail)
        self.line = line
        self.column = column


class UnresolvedReference(DocumentError):
    pass


class UnsupportedVersion(DocumentError):
    pass
