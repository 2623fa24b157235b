# promisekit/services/report.py
"""Reports: sorted findings, metrics and pass/fail verdicts, rendered as text or JSON."""
import json
import logging
import sys
from pathlib import Path
from typing import Dict, Iterable, List, Literal, Optional, Union

from jinja2 import Environment, FileSystemLoader, StrictUndefined
from pydantic import BaseModel, Field, field_validator

from promisekit.services.findings import Finding, has_errors, sort_findings

logger = logging.getLogger(__name__)

TEMPLATES_DIR = Path(__file__).resolve().parent.parent / "templates"

Metric = Union[bool, int, float, str]
Verdict = Literal["pass", "fail"]

_env = Environment(
    loader=FileSystemLoader(str(TEMPLATES_DIR)),
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    autoescape=False,
)


def _format_metric(value: Metric) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


_env.filters["metric"] = _format_metric


class Report(BaseModel):
    command: str
    findings: List[Finding] = Field(default_factory=list)
    metrics: Dict[str, Metric] = Field(default_factory=dict)
    verdicts: Dict[str, Verdict] = Field(default_factory=dict)
    # free-form result lines (chain lines, translated words, orbits)
    details: List[str] = Field(default_factory=list)

    @field_validator("findings")
    @classmethod
    def _ordered(cls, v: List[Finding]) -> List[Finding]:
        return sort_findings(v)

    def add(self, findings: Iterable[Finding], verdict: Optional[str] = None) -> None:
        """Merge findings; when `verdict` names a check it passes iff none of them is an error."""
        findings = list(findings)
        self.findings = sort_findings([*self.findings, *findings])
        if verdict:
            self.verdicts[verdict] = "fail" if has_errors(findings) else "pass"

    @property
    def exit_status(self) -> int:
        return 1 if has_errors(self.findings) else 0


def render_text(report: Report) -> str:
    return _env.get_template("report.txt.j2").render(
        report=report,
        metrics=sorted(report.metrics.items()),
        verdicts=sorted(report.verdicts.items()),
    )


def render_json(report: Report) -> str:
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return render_json(report)
    return render_text(report)


def write(report: Report, fmt: str, out: Optional[str] = None) -> int:
    """Write the rendered report to `out` (stdout when None) and return the exit status."""
    text = render(report, fmt)
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("report written to %s", out)
    else:
        sys.stdout.write(text)
    return report.exit_status
