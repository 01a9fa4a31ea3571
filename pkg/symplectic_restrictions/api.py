"""HTTP API mirroring the command-line interface.

Every compute endpoint returns the same Report document the CLI prints with
``--format json``.

## Rate Limiting
Lookups share `API_LIMIT`; endpoints that build restriction spaces or run a
tangency search share `COMPUTE_LIMIT`. Both are read from the environment.

## Response Format
- 200: Success
- 404: Unknown germ, class or report
- 422: Invalid input (parse errors, failed germ checks, preconditions)
- 429: Rate limit exceeded
- 503: A degree bound or search ceiling was exhausted
"""

from typing import List, Optional

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from slowapi import Limiter
from slowapi.errors import RateLimitExceeded
from slowapi.util import get_remote_address

from symplectic_restrictions import __version__
from symplectic_restrictions.catalog import FAMILIES, load_family
from symplectic_restrictions.commands import (
    action_table_report,
    basis_report,
    class_invariants_report,
    classify_report,
    scene_invariants_report,
    verify_report,
)
from symplectic_restrictions.config import RateLimitConfig, configure_logging
from symplectic_restrictions.database import get_db_manager
from symplectic_restrictions.errors import BoundExhaustedError, RestrictionError, UnknownNameError
from symplectic_restrictions.models import ClassifyRequest, InvariantsRequest, Report, VerifyRequest

configure_logging()

# Initialize rate limiter
limiter = Limiter(key_func=get_remote_address)

api_app = FastAPI(
    title="Symplectic Restrictions API",
    description="Algebraic restrictions, normal forms and symplectic invariants of curve germs",
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
    openapi_url="/openapi.json",
    tags=[
        {"name": "germs", "description": "Restriction bases and action tables"},
        {"name": "classification", "description": "Normal forms and invariants"},
        {"name": "reports", "description": "Stored reports"},
        {"name": "health", "description": "API health and monitoring"},
    ],
)


def rate_limit_exceeded_handler(request: Request, exc: RateLimitExceeded):
    """Custom handler for rate limit exceeded errors."""
    return JSONResponse(
        status_code=429,
        content={
            "error": "Rate limit exceeded",
            "message": "Too many requests. Please try again later.",
            "retry_after": exc.detail if exc.detail else "60",
        },
    )


def restriction_error_handler(request: Request, exc: RestrictionError):
    """Engine errors: unknown names are 404, exhausted bounds 503, everything else 422."""
    if isinstance(exc, UnknownNameError):
        status = 404
    elif isinstance(exc, BoundExhaustedError):
        status = 503
    else:
        status = 422
    return JSONResponse(
        status_code=status,
        content={"error": type(exc).__name__, "message": exc.message, "exit_code": exc.exit_code},
    )


api_app.state.limiter = limiter
api_app.add_exception_handler(RateLimitExceeded, rate_limit_exceeded_handler)
api_app.add_exception_handler(RestrictionError, restriction_error_handler)


class GermSummary(BaseModel):
    """Built-in germ listing entry."""
    name: str = Field(description="Family name")
    weights: List[int] = Field(description="Quasi-homogeneous weights")
    equations: List[str] = Field(description="Defining equations")
    branches: int = Field(description="Number of real branches")
    classes: List[str] = Field(description="Class indices in matching order")


class HealthResponse(BaseModel):
    """Health check response model."""
    status: str = Field(description="API status")
    database: str = Field(description="Report store status")


@api_app.get("/germs", response_model=List[GermSummary], tags=["germs"])
@limiter.limit(RateLimitConfig.API_LIMIT)
def list_germs(request: Request):
    """List the built-in germs with their class indices."""
    summaries = []
    for name in FAMILIES:
        record = load_family(name)
        summaries.append(GermSummary(
            name=name,
            weights=list(record.germ.weights),
            equations=[str(e) for e in record.germ.equations],
            branches=len(record.germ.branches),
            classes=[c.index for c in record.classes],
        ))
    return summaries


@api_app.get("/germs/{name}/basis", response_model=Report, tags=["germs"])
@limiter.limit(RateLimitConfig.COMPUTE_LIMIT)
def get_basis(request: Request, name: str, degree_bound: Optional[int] = Query(None, ge=1)):
    """
    Bases of [Λ²] and [Z²] for a built-in germ.

    - **degree_bound**: truncation quasi-degree, defaults to `DEGREE_BOUND`
    """
    if name.upper() not in FAMILIES:
        raise HTTPException(status_code=404, detail=f"unknown germ {name}")
    return basis_report(name, degree_bound)


@api_app.get("/germs/{name}/action-table", response_model=Report, tags=["germs"])
@limiter.limit(RateLimitConfig.COMPUTE_LIMIT)
def get_action_table(request: Request, name: str):
    """Infinitesimal actions of the tangent fields on [Z²]."""
    if name.upper() not in FAMILIES:
        raise HTTPException(status_code=404, detail=f"unknown germ {name}")
    return action_table_report(name)


@api_app.post("/classify", response_model=Report, tags=["classification"])
@limiter.limit(RateLimitConfig.COMPUTE_LIMIT)
def classify(request: Request, body: ClassifyRequest):
    """
    Bring a closed restriction to its normal form.

    - **germ**: U7, U8 or U9
    - **coeffs**: coefficients on θ1, θ2, ... as "p/q" strings
    """
    if body.germ.upper() not in FAMILIES:
        raise HTTPException(status_code=404, detail=f"unknown germ {body.germ}")
    return classify_report(body.germ, body.coeffs)


@api_app.post("/invariants", response_model=Report, tags=["classification"])
@limiter.limit(RateLimitConfig.COMPUTE_LIMIT)
def invariants(request: Request, body: InvariantsRequest):
    """Invariants of a catalog class, or of a scene when one is given."""
    if body.scene is not None:
        return scene_invariants_report(body.scene)
    return class_invariants_report(body.germ, body.class_label, body.moduli or None, body.sign)


@api_app.post("/verify", response_model=Report, tags=["classification"])
@limiter.limit(RateLimitConfig.COMPUTE_LIMIT)
def verify(request: Request, body: VerifyRequest):
    """Recompute the stored tables; `results.passed` tells whether every cell matched."""
    return verify_report(body.family, body.seed, bound=body.degree_bound)


@api_app.get("/reports", tags=["reports"])
@limiter.limit(RateLimitConfig.API_LIMIT)
def list_reports(
    request: Request,
    command: Optional[str] = Query(None, description="Filter by command name"),
    limit: int = Query(50, ge=1, le=500),
):
    """Stored reports, newest first."""
    return get_db_manager().list_reports(command, limit)


@api_app.get("/reports/{report_id}", tags=["reports"])
@limiter.limit(RateLimitConfig.API_LIMIT)
def get_report(request: Request, report_id: int):
    """One stored report."""
    report = get_db_manager().get_report(report_id)
    if report is None:
        raise HTTPException(status_code=404, detail="Report not found")
    return report


@api_app.get("/", tags=["health"], response_model=dict)
async def root():
    """
    API root endpoint.

    Returns basic information about the API including its name and version.
    """
    return {"message": "Symplectic Restrictions API is running", "version": __version__}


@api_app.get("/health", tags=["health"], response_model=HealthResponse)
async def health_check():
    """Health check endpoint for monitoring."""
    return HealthResponse(status="healthy", database="connected" if get_db_manager().engine else "unavailable")
