"""HTTP service exposing solve, transform, generate, and check.

A thin FastAPI layer over the library: request and response bodies mirror
the JSON problem and report documents.  Run with

    uvicorn t2soco.service:app
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import checks as checks_mod
from . import problem_io, transform
from .cones import BlockShape
from .kernels import BoundConstants, kernel_from_spec
from .solver import SolverConfig, generate_instance, solve

app = FastAPI(title="t2soco", version="1.0.0")


class ProblemModel(BaseModel):
    m: int
    blocks: list[int]
    A: list[float]
    b: list[float]
    c: list[float]
    cones: Optional[list[str]] = None
    x0: Optional[list[float]] = None
    y0: Optional[list[float]] = None
    s0: Optional[list[float]] = None


class SolveOptions(BaseModel):
    theta: float = 0.5
    tau: float = 3.0
    epsilon: float = 1e-6
    kernel: str = "log"
    max_outer: int = 200
    max_inner: int = 500
    bound_kappa: Optional[float] = None
    bound_gamma: Optional[float] = None


class SolveRequest(BaseModel):
    problem: ProblemModel
    options: SolveOptions = Field(default_factory=SolveOptions)


class SolveResponse(BaseModel):
    status: str
    objective: float
    x: list[float]
    y: list[float]
    s: list[float]
    mu: float
    gap: float
    residuals: dict[str, float]
    iterations: dict
    bound: Optional[dict] = None
    wall_time_seconds: float


class TransformResponse(BaseModel):
    problem: ProblemModel
    blowup: dict[str, int]


class GenerateRequest(BaseModel):
    blocks: list[int]
    m: int
    seed: int = 0
    known_solution: bool = False


class GenerateResponse(BaseModel):
    problem: ProblemModel
    solution: Optional[dict] = None


class CheckRequest(BaseModel):
    trials: int = 1000
    seed: int = 0


class CheckResultModel(BaseModel):
    name: str
    trials: int
    worst: float
    tolerance: float
    passed: bool


class CheckResponse(BaseModel):
    results: list[CheckResultModel]
    all_passed: bool


def _parse(problem: ProblemModel) -> problem_io.ProblemDocument:
    try:
        return problem_io.parse_problem(
            problem.model_dump(exclude_none=True)
        )
    except problem_io.ProblemFormatError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


def _doc_to_model(doc: problem_io.ProblemDocument) -> ProblemModel:
    payload = doc.to_json_dict()
    return ProblemModel(**payload)


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok"}


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(req: SolveRequest) -> SolveResponse:
    doc = _parse(req.problem)
    try:
        p = doc.to_problem_data()
    except (problem_io.ProblemFormatError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    opt = req.options
    if (opt.bound_kappa is None) != (opt.bound_gamma is None):
        raise HTTPException(
            status_code=422, detail="bound_kappa and bound_gamma must come together"
        )
    constants = None
    if opt.bound_kappa is not None:
        constants = BoundConstants(kappa=opt.bound_kappa, gamma=opt.bound_gamma)
    try:
        cfg = SolverConfig(
            tau=opt.tau,
            epsilon=opt.epsilon,
            theta=opt.theta,
            kernel=kernel_from_spec(opt.kernel),
            max_outer=opt.max_outer,
            max_inner=opt.max_inner,
            bound_constants=constants,
        )
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    start = doc.start()
    if start is None:
        raise HTTPException(
            status_code=422, detail="problem must include the start point x0, y0, s0"
        )
    try:
        report = solve(p, start, cfg)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return SolveResponse(**problem_io.report_to_dict(report))


@app.post("/transform", response_model=TransformResponse)
def transform_endpoint(problem: ProblemModel) -> TransformResponse:
    doc = _parse(problem)
    try:
        p = doc.to_problem_data()
    except (problem_io.ProblemFormatError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    t = transform.to_soco(p)
    rep = transform.blowup_report(p)
    outdoc = problem_io.ProblemDocument(
        m=t.a_hat.shape[0],
        blocks=t.blocks,
        A=t.a_hat,
        b=t.b_hat,
        c=t.c_bar,
        cones=t.cones,
    )
    return TransformResponse(
        problem=_doc_to_model(outdoc),
        blowup={
            "m_original": rep.m_original,
            "n_original": rep.n_original,
            "m_transformed": rep.m_transformed,
            "n_transformed": rep.n_transformed,
        },
    )


@app.post("/generate", response_model=GenerateResponse)
def generate_endpoint(req: GenerateRequest) -> GenerateResponse:
    try:
        shape = BlockShape(tuple(req.blocks))
        inst = generate_instance(shape, req.m, req.seed, known_solution=req.known_solution)
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    doc = problem_io.ProblemDocument(
        m=req.m,
        blocks=tuple(req.blocks),
        A=inst.problem.A,
        b=inst.problem.b,
        c=inst.problem.c,
        cones=("type2",) * len(req.blocks),
        x0=inst.x0.data,
        y0=inst.y0,
        s0=inst.s0.data,
    )
    solution = None
    if req.known_solution:
        solution = {
            "x_star": [float(v) for v in inst.x_star.data],
            "y_star": [float(v) for v in inst.y_star],
            "s_star": [float(v) for v in inst.s_star.data],
            "objective": float(inst.optimal_objective),
        }
    return GenerateResponse(problem=_doc_to_model(doc), solution=solution)


@app.post("/check", response_model=CheckResponse)
def check_endpoint(req: CheckRequest) -> CheckResponse:
    if req.trials < 0:
        raise HTTPException(status_code=422, detail="trials must be nonnegative")
    results = checks_mod.run_all(trials=req.trials, seed=req.seed)
    models = [
        CheckResultModel(
            name=r.name, trials=r.trials, worst=r.worst,
            tolerance=r.tolerance, passed=r.passed,
        )
        for r in results
    ]
    return CheckResponse(results=models, all_passed=all(r.passed for r in results))
