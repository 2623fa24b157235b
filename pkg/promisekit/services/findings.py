# promisekit/services/findings.py
from enum import Enum
from typing import Iterable, List, Tuple

from pydantic import BaseModel, ConfigDict


class Severity(str, Enum):
    INFO = "info"
    WARN = "warn"
    ERROR = "error"

    @property
    def rank(self) -> int:
        return {"error": 0, "warn": 1, "info": 2}[self.value]


class Finding(BaseModel):
    model_config = ConfigDict(frozen=True)

    code: str
    severity: Severity
    promises: Tuple[int, ...] = ()
    message: str


def info(code: str, promises: Iterable[int], message: str) -> Finding:
    return Finding(code=code, severity=Severity.INFO, promises=tuple(promises), message=message)


def warn(code: str, promises: Iterable[int], message: str) -> Finding:
    return Finding(code=code, severity=Severity.WARN, promises=tuple(promises), message=message)


def error(code: str, promises: Iterable[int], message: str) -> Finding:
    return Finding(code=code, severity=Severity.ERROR, promises=tuple(promises), message=message)


def sort_findings(findings: Iterable[Finding]) -> List[Finding]:
    """Errors first, then warnings, then info; ties broken by lowest promise index."""
    return sorted(
        findings,
        key=lambda f: (
            f.severity.rank,
            min(f.promises) if f.promises else -1,
            f.code,
            f.message,
        ),
    )


def has_errors(findings: Iterable[Finding]) -> bool:
    return any(f.severity is Severity.ERROR for f in findings)
