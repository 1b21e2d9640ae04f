"""Result containers: bound reports, certified enclosures, run manifests.

A BoundReport is the uniform outcome of every inequality check: it names the
check, states the domain that was actually swept, and records the worst case
seen.  A CertifiedValue is a closed interval guaranteed to contain a constant.
Both serialize to plain dicts for the CLI's JSON output.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from typing import Any


@dataclass
class BoundReport:
    """Outcome of sweeping one inequality over a finite domain.

    worst_ratio is measured quantity divided by its bound at the worst point,
    so passed is (worst_ratio <= 1) modulo any stated slack.  details carries
    check-specific numbers (components, witnesses, tolerances).
    """

    name: str
    domain: str
    passed: bool
    worst_ratio: float
    worst_arg: Any = None
    bound: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["passed"] = bool(self.passed)
        return d

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, default=str)

    def summary_line(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        arg = f" at {self.worst_arg}" if self.worst_arg is not None else ""
        return f"{self.name}: {verdict} (worst ratio {self.worst_ratio:.6f}{arg}, domain {self.domain})"


@dataclass(frozen=True)
class CertifiedValue:
    """Closed interval [lo, hi] guaranteed to contain the true value.

    The guarantee is only as good as the tail estimates that produced it;
    every producer documents its tail reasoning.
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo <= self.hi):
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __contains__(self, x: float) -> bool:
        return self.contains(x)

    def entirely_below(self, cap: float) -> bool:
        """True if every value in the enclosure is <= cap."""
        return self.hi <= cap

    def entirely_above(self, floor: float) -> bool:
        return self.lo >= floor

    def scale(self, c: float) -> "CertifiedValue":
        if c >= 0:
            return CertifiedValue(self.lo * c, self.hi * c)
        return CertifiedValue(self.hi * c, self.lo * c)

    def __mul__(self, other: "CertifiedValue") -> "CertifiedValue":
        """Interval product, assuming both operands may straddle zero."""
        cands = (self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi)
        return CertifiedValue(min(cands), max(cands))

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "mid": self.mid, "width": self.width}


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Reproducibility record attached to CLI outputs.

    Captures the exact command configuration, library versions, wall time,
    and digests of any files written, so a run can be re-executed and diffed.
    """

    command: str
    config: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)
    wall_time_s: float | None = None
    outputs: dict = field(default_factory=dict)

    @staticmethod
    def start(command: str, config: dict | None = None) -> "RunManifest":
        import numpy
        import mpmath
        m = RunManifest(command=command, config=dict(config or {}))
        m.versions = {
            "python": sys.version.split()[0],
            "numpy": numpy.__version__,
            "mpmath": mpmath.__version__,
            "platform": platform.platform(),
        }
        m._t0 = time.monotonic()
        return m

    def finish(self, output_paths: dict[str, str] | None = None) -> "RunManifest":
        t0 = getattr(self, "_t0", None)
        if t0 is not None:
            self.wall_time_s = round(time.monotonic() - t0, 3)
        for label, path in (output_paths or {}).items():
            self.outputs[label] = {"path": path, "sha256": sha256_file(path)}
        return self

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "versions": self.versions,
            "wall_time_s": self.wall_time_s,
            "outputs": self.outputs,
        }
