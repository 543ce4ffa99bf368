"""Main FastAPI application for Conicert."""
from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse

from conicert import __version__
from conicert.config import CONFIG
from conicert.database import Base, engine
from conicert.exceptions import (
    BudgetExceeded,
    ConicertError,
    HypothesisError,
    InputError,
    SynthesisError,
    VerificationError,
)
from conicert import models  # noqa: F401  registers tables on Base
from conicert.routes import router

# Create database tables
Base.metadata.create_all(bind=engine)

app = FastAPI(
    title="Conicert",
    description="Non-split loci, cover synthesis and certificates for conic bundles over P^1 of a finite field",
    version=__version__
)

app.include_router(router)

# most specific first
ERROR_STATUS = (
    (InputError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (HypothesisError, status.HTTP_409_CONFLICT),
    (BudgetExceeded, status.HTTP_408_REQUEST_TIMEOUT),
    (SynthesisError, status.HTTP_500_INTERNAL_SERVER_ERROR),
    (VerificationError, status.HTTP_500_INTERNAL_SERVER_ERROR),
)


def status_for(exc: ConicertError) -> int:
    for family, code in ERROR_STATUS:
        if isinstance(exc, family):
            return code
    return status.HTTP_500_INTERNAL_SERVER_ERROR


@app.exception_handler(ConicertError)
async def conicert_exception_handler(request: Request, exc: ConicertError):
    """Map domain errors to JSON responses."""
    content = {"detail": str(exc), "error": type(exc).__name__}
    chain = getattr(exc, "chain", None)
    if chain:
        content["chain"] = [step.to_dict() for step in chain]
    return JSONResponse(status_code=status_for(exc), content=content)


def run_server(host: str = None, port: int = None):
    """Run the API server with uvicorn."""
    import uvicorn

    host = host or CONFIG.server.host
    port = port or CONFIG.server.port

    print(f"\n{'='*50}")
    print("  Conicert - conic bundle certificates")
    print(f"{'='*50}")
    print(f"  Server: http://{host}:{port}")
    print(f"  Docs:   http://{host}:{port}/docs")
    print(f"{'='*50}\n")

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    run_server()
