"""
FastAPI service for the hyperbolic extension toolkit.
Exposes the one-point solver and the closed-form bounds for interactive use.
"""

from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError, model_validator

from hypext import (HPoint, HypextError, PartialMap, SolverOptions, certify_hull, choose_parameters,
                    compute_c_star, solve_one_point)
from hypext.config import Settings, configure_logging

app = FastAPI(title="Hyperbolic Extension Certificate API")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# In-memory only; runs are lost on restart
class RunStore:
    def __init__(self):
        self.runs: List[Dict[str, Any]] = []

    def add_run(self, kind: str, request: dict, result: dict) -> int:
        """Store a finished run and return its id"""
        run_id = len(self.runs) + 1
        self.runs.append({
            'run_id': run_id,
            'kind': kind,
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'request': request,
            'result': result,
        })
        return run_id

    def count(self, kind: str) -> int:
        return sum(1 for run in self.runs if run['kind'] == kind)


db = RunStore()


class SolveRequest(BaseModel):
    dimension: int = Field(ge=1)
    declared_C: float = Field(gt=0)
    sources: List[List[float]]
    targets: List[List[float]]
    xi: List[float]
    tol: Optional[float] = Field(None, gt=0)
    max_iters: Optional[int] = Field(None, ge=1)

    @model_validator(mode='after')
    def check_shapes(self) -> 'SolveRequest':
        width = self.dimension + 1
        if not self.sources or len(self.sources) != len(self.targets):
            raise ValueError('sources and targets must be nonempty and of equal length')
        for row in self.sources + self.targets + [self.xi]:
            if len(row) != width:
                raise ValueError(f'every point needs {width} coordinates')
        return self

    def options(self) -> SolverOptions:
        overrides = {k: v for k, v in (('tol', self.tol), ('max_iters', self.max_iters)) if v is not None}
        return SolverOptions(**overrides)


class BoundsResponse(BaseModel):
    C: float
    r_star: float
    c_hat: float
    arcsinh_value: float
    c_star: float
    delta: float


# API Endpoints

@app.get("/")
async def root():
    """Health check endpoint"""
    return {
        "status": "ok",
        "service": "Hyperbolic Extension Certificate API",
        "stats": {
            "runs": len(db.runs),
            "solves": db.count('solve-one-point'),
            "bounds": db.count('bounds'),
        },
    }


@app.get("/api/bounds", response_model=BoundsResponse)
async def get_bounds(c: float = Query(..., gt=0, lt=1, description="Lipschitz constant C of the input map")):
    """c_star and its ingredients for a given C"""
    report = compute_c_star(c)
    result = BoundsResponse(**vars(report))
    db.add_run('bounds', {'c': c}, result.model_dump())
    return result


@app.get("/api/parameters")
async def get_parameters(c: float = Query(..., gt=0, lt=1)):
    """Pipeline parameters (epsilon0, epsilon, R) chosen for C"""
    return choose_parameters(c).model_dump()


@app.post("/api/solve-one-point")
async def solve(request: SolveRequest):
    """Optimal image of xi and its convex-hull certificate"""
    try:
        pmap = PartialMap(request.sources, request.targets, request.declared_C)
        xi = HPoint(request.xi)
        opts = request.options()
        solution = solve_one_point(pmap, xi, opts)
        certificate = certify_hull(solution, pmap, opts)
    except (HypextError, ValidationError) as error:
        raise HTTPException(status_code=400, detail=str(error))

    result = solution.as_dict()
    result['certificate'] = {
        'passed': certificate.passed,
        'norm': certificate.norm,
        'trivial': certificate.trivial,
        'reason': certificate.reason,
    }
    result['run_id'] = db.add_run('solve-one-point', request.model_dump(), result)
    return result


@app.get("/api/runs")
async def get_runs(kind: Optional[str] = None):
    """Stored runs, oldest first"""
    return [run for run in db.runs if kind is None or run['kind'] == kind]


@app.on_event("startup")
async def startup_event():
    """Initialize the API server"""
    settings = configure_logging()
    print(f"\n✓ API ready at http://localhost:{settings.port}")
    print(f"✓ Docs available at http://localhost:{settings.port}/docs\n")


if __name__ == "__main__":
    import uvicorn

    settings = Settings.from_env()

    print(f"""
    ╔════════════════════════════════════════════════════════════╗
    ║   Hyperbolic Extension Certificate API                     ║
    ╚════════════════════════════════════════════════════════════╝

    Starting server...
    - API: http://localhost:{settings.port}
    - Docs: http://localhost:{settings.port}/docs
    """)

    uvicorn.run(app, host="0.0.0.0", port=settings.port)
