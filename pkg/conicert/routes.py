"""API routes for analysis, certification and the certificate archive."""
import json
from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, Query, status
from fastapi.responses import JSONResponse
from sqlalchemy.orm import Session

from conicert import __version__
from conicert.certify import (
    Report,
    analyze,
    certify_requiv,
    certify_unirational,
    section_search_oracle,
    verify_certificate,
    verify_report,
)
from conicert.config import CONFIG
from conicert.database import get_db
from conicert.models import CertificateRecord
from conicert.schemas import (
    BundleIn,
    CertificateDetail,
    CertificateSummary,
    RequivIn,
    ReverifyResponse,
    SectionIn,
    VerifyIn,
    point_text,
)
from conicert.utils import parse_bundle, parse_cover, parse_field, parse_rational_point

router = APIRouter(prefix="/api")

# exit code -> HTTP status
HTTP_STATUS = {0: status.HTTP_200_OK, 1: status.HTTP_409_CONFLICT, 2: status.HTTP_500_INTERNAL_SERVER_ERROR}


def _store(db: Session, report: Report) -> Optional[int]:
    """Archive an issued certificate; returns its id."""
    certificate = report.issued
    if certificate is None:
        return None
    spec = certificate.bundle.spec
    record = CertificateRecord(
        kind=certificate.kind,
        field_json=json.dumps(spec.to_dict()),
        bundle_json=json.dumps(certificate.bundle.to_dict()),
        cover_json=json.dumps(certificate.cover.to_dict()),
        report_json=json.dumps(report.to_dict()),
        s0=None if certificate.s0 is None else json.dumps(certificate.s0.to_json(spec)),
        s1=None if certificate.s1 is None else json.dumps(certificate.s1.to_json(spec)),
        degree=certificate.cover.degree,
        passed=True,
    )
    db.add(record)
    db.commit()
    db.refresh(record)
    return record.id


def _respond(report: Report, certificate_id: Optional[int] = None) -> JSONResponse:
    return JSONResponse(
        status_code=HTTP_STATUS[report.exit_code],
        content={"certificate_id": certificate_id, "report": report.to_dict()},
    )


@router.get("/health")
async def health():
    """Liveness check."""
    return {"status": "ok", "version": __version__}


@router.post("/analyze")
def analyze_bundle(payload: BundleIn):
    """Non-split locus, delta and the hypothesis flags of a bundle."""
    report = analyze(parse_bundle(payload.model_dump()), seed=CONFIG.engine.seed)
    return report.to_dict()


@router.post("/certify/unirational")
def certify_unirational_route(payload: BundleIn, db: Session = Depends(get_db)):
    """Synthesize and verify a cover for condition (*); stores passing certificates."""
    bundle = parse_bundle(payload.model_dump())
    report = certify_unirational(bundle, CONFIG.engine, seed=CONFIG.engine.seed)
    return _respond(report, _store(db, report))


@router.post("/certify/requiv")
def certify_requiv_route(payload: RequivIn, db: Session = Depends(get_db)):
    """Synthesize and verify a cover for condition (**) with rational points over s0, s1."""
    bundle = parse_bundle(payload.bundle.model_dump())
    s0 = parse_rational_point(bundle.spec, point_text(payload.s0), "s0")
    s1 = parse_rational_point(bundle.spec, point_text(payload.s1), "s1")
    report = certify_requiv(bundle, s0, s1, CONFIG.engine, seed=CONFIG.engine.seed)
    return _respond(report, _store(db, report))


@router.post("/verify")
def verify_route(payload: VerifyIn):
    """Run the independent verifiers on a supplied cover."""
    bundle = parse_bundle(payload.bundle.model_dump())
    cover = parse_cover(bundle.spec, payload.cover.model_dump())
    s0 = s1 = None
    if payload.s0 is not None:
        s0 = parse_rational_point(bundle.spec, point_text(payload.s0), "s0")
        s1 = parse_rational_point(bundle.spec, point_text(payload.s1), "s1")
    return _respond(verify_report(bundle, cover, s0, s1, seed=CONFIG.engine.seed))


@router.post("/oracle/section")
def section_route(payload: SectionIn):
    """Bounded exhaustive search for a polynomial section."""
    bundle = parse_bundle(payload.bundle.model_dump())
    budget = payload.budget_ms or CONFIG.engine.budget_ms
    result = section_search_oracle(bundle, payload.max_deg, budget)
    return result.to_dict(bundle.spec)


@router.get("/certificates", response_model=List[CertificateSummary])
async def list_certificates(
    kind: Optional[str] = Query(None, pattern="^(unirational|requiv)$"),
    skip: int = Query(0, ge=0),
    limit: int = Query(100, ge=1, le=500),
    db: Session = Depends(get_db)
):
    """List archived certificates, newest first."""
    query = db.query(CertificateRecord)
    if kind:
        query = query.filter(CertificateRecord.kind == kind)
    return query.order_by(CertificateRecord.id.desc()).offset(skip).limit(limit).all()


def _get_record(db: Session, certificate_id: int) -> CertificateRecord:
    record = db.query(CertificateRecord).filter(CertificateRecord.id == certificate_id).first()
    if not record:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail="Certificate not found"
        )
    return record


@router.get("/certificates/{certificate_id}", response_model=CertificateDetail)
async def get_certificate(certificate_id: int, db: Session = Depends(get_db)):
    """Get one archived certificate with its full report."""
    record = _get_record(db, certificate_id)
    return CertificateDetail(
        id=record.id,
        created_at=record.created_at,
        kind=record.kind,
        degree=record.degree,
        s0=record.s0,
        s1=record.s1,
        passed=record.passed,
        report=json.loads(record.report_json),
    )


@router.post("/certificates/{certificate_id}/reverify", response_model=ReverifyResponse)
def reverify_certificate(certificate_id: int, db: Session = Depends(get_db)):
    """Re-run the verifiers from the stored serialized bundle and cover alone."""
    record = _get_record(db, certificate_id)
    spec = parse_field(json.loads(record.field_json))
    bundle = parse_bundle(json.loads(record.bundle_json))
    cover = parse_cover(spec, json.loads(record.cover_json))
    s0 = s1 = None
    if record.s0 is not None:
        s0 = parse_rational_point(spec, record.s0, "s0")
        s1 = parse_rational_point(spec, record.s1, "s1")
    checks = verify_certificate(bundle, cover, s0, s1)
    record.passed = all(c.passed for c in checks)
    db.commit()
    return ReverifyResponse(id=record.id, passed=record.passed, checks=[c.to_dict() for c in checks])
