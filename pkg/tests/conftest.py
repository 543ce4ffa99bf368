import json
import os

# the app module creates its tables at import; keep that in memory
os.environ.setdefault("CONICERT_DATABASE_URL", "sqlite://")

import pytest
from fastapi.testclient import TestClient
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from conicert import models  # noqa: F401
from conicert.conicbundle import ConicBundle
from conicert.database import Base, get_db
from conicert.gf import field_spec
from conicert.p1curve import ClosedPoint, poly


@pytest.fixture
def F3():
    return field_spec(3)


@pytest.fixture
def F5():
    return field_spec(5)


@pytest.fixture
def F9():
    """F_9 = F_3[i]/(i^2 + 1)."""
    return field_spec(3, 2, (1, 0, 1))


def make_bundle(spec, a, b, c):
    return ConicBundle.create(spec, poly(spec, a), poly(spec, b), poly(spec, c))


def pt(spec, a):
    """Rational point t = a, or infinity for 'inf'."""
    return ClosedPoint.rational(spec, a)


@pytest.fixture
def t_bundle(F3):
    """(t, -1, -1) over F_3: non-split exactly at (t) and infinity."""
    return make_bundle(F3, [0, 1], [2], [2])


@pytest.fixture
def write_json(tmp_path):
    def _write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return _write


@pytest.fixture
def client():
    from conicert.main import app

    engine = create_engine(
        "sqlite://",
        connect_args={"check_same_thread": False},
        poolclass=StaticPool,
    )
    Base.metadata.create_all(bind=engine)
    TestingSession = sessionmaker(autocommit=False, autoflush=False, bind=engine)

    def override_get_db():
        db = TestingSession()
        try:
            yield db
        finally:
            db.close()

    app.dependency_overrides[get_db] = override_get_db
    with TestClient(app) as test_client:
        yield test_client
    app.dependency_overrides.clear()
