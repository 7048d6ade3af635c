from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

Cell = Union[bool, int, float, str, None]


class InvariantCheck(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    passed: bool = Field(alias="pass")
    value: float
    tolerance: float

    @classmethod
    def below(cls, name: str, value: float, tolerance: float) -> "InvariantCheck":
        """Passes when ``value`` is finite and at most ``tolerance``."""
        return cls(name=name, passed=bool(value <= tolerance), value=float(value), tolerance=float(tolerance))

class RunManifest(BaseModel):
    tool: str
    version: str
    config_hash: str
    python: str
    numpy: str
    scipy: str
    # Only written to the sidecar file
    timestamp_utc: Optional[str] = None
    duration_seconds: Optional[float] = None

class ReportRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    experiment: str
    config: Dict[str, Any]
    columns: Tuple[str, ...]
    rows: List[Dict[str, Cell]]
    invariants: List[InvariantCheck]
    manifest: Optional[RunManifest] = None
    duration_seconds: float = Field(0.0, exclude=True)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.invariants) and all(
            row.get("pass", True) for row in self.rows
        )

    @property
    def truncation_leak(self) -> float:
        return max((float(row.get("leak") or 0.0) for row in self.rows), default=0.0)

    def failures(self) -> List[str]:
        return [check.name for check in self.invariants if not check.passed]
