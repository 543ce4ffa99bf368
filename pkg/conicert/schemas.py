"""Pydantic schemas for request/response validation."""
import json
from datetime import datetime
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

Element = Union[int, List[int]]
PointValue = Union[str, int, List[Any]]


class FieldIn(BaseModel):
    p: int = Field(..., ge=3)
    n: int = Field(default=1, ge=1)
    modulus: Optional[List[int]] = None


class BundleIn(BaseModel):
    field: FieldIn
    a: List[Element]
    b: List[Element]
    c: List[Element]

    @field_validator('a', 'b', 'c')
    @classmethod
    def validate_nonempty(cls, v):
        """Coefficient lists must describe a nonzero polynomial."""
        if not v:
            raise ValueError('coefficient list must not be empty')
        return v


class MapIn(BaseModel):
    num: List[Element]
    den: List[Element] = Field(default_factory=lambda: [1])


class ChainStepIn(BaseModel):
    kind: str = Field(..., pattern="^(mobius|squaring|twist|descent|composition)$")
    params: Dict[str, Any] = Field(default_factory=dict)
    map: MapIn


class CoverIn(MapIn):
    chain: Optional[List[ChainStepIn]] = None


def point_text(value: Optional[PointValue]) -> Optional[str]:
    """Normalize a point given in JSON to the CLI text form."""
    if value is None or isinstance(value, str):
        return value
    return json.dumps(value)


class RequivIn(BaseModel):
    bundle: BundleIn
    s0: PointValue
    s1: PointValue


class VerifyIn(BaseModel):
    bundle: BundleIn
    cover: CoverIn
    s0: Optional[PointValue] = None
    s1: Optional[PointValue] = None

    @model_validator(mode='after')
    def validate_pair(self):
        """s0 and s1 come together or not at all."""
        if (self.s0 is None) != (self.s1 is None):
            raise ValueError('s0 and s1 must be given together')
        return self


class SectionIn(BaseModel):
    bundle: BundleIn
    max_deg: int = Field(..., ge=0, le=6)
    budget_ms: Optional[int] = Field(None, ge=1)


class CertificateSummary(BaseModel):
    id: int
    created_at: datetime
    kind: str
    degree: int
    s0: Optional[str]
    s1: Optional[str]
    passed: bool

    class Config:
        from_attributes = True


class CertificateDetail(CertificateSummary):
    report: Dict[str, Any]


class ReverifyResponse(BaseModel):
    id: int
    passed: bool
    checks: List[Dict[str, Any]]
