"""SQLAlchemy models for Conicert."""
from datetime import datetime

from sqlalchemy import Boolean, Column, DateTime, Integer, String, Text

from conicert.database import Base


class CertificateRecord(Base):
    """A certificate issued by the service, stored in serialized form."""
    __tablename__ = "certificates"

    id = Column(Integer, primary_key=True, index=True)
    created_at = Column(DateTime, default=datetime.utcnow)
    kind = Column(String(20), nullable=False)  # unirational or requiv
    field_json = Column(Text, nullable=False)
    bundle_json = Column(Text, nullable=False)
    cover_json = Column(Text, nullable=False)
    report_json = Column(Text, nullable=False)
    s0 = Column(String(100), nullable=True)  # JSON-encoded point
    s1 = Column(String(100), nullable=True)
    degree = Column(Integer, nullable=False)
    passed = Column(Boolean, default=True, nullable=False)
