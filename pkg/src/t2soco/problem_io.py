"""JSON problem and report documents.

A problem file carries keys "m", "blocks", "A" (row-major), "b", "c",
an optional central start ("x0", "y0", "s0" -- all or none), and optional
per-block cone tags ("type2" by default; "nonneg" and "lorentz:<k>" appear
in emitted reductions).  Reports round-trip losslessly: every float is
written with 17 significant digits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .cones import BlockShape, ConeVector
from .newton import ProblemData


class ProblemFormatError(ValueError):
    """Malformed problem or report document; the message names the field."""


@dataclass(frozen=True)
class ProblemDocument:
    """Parsed problem file, cone tags included; may or may not be type-2."""

    m: int
    blocks: tuple[int, ...]
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    cones: tuple[str, ...]
    x0: np.ndarray | None = None
    y0: np.ndarray | None = None
    s0: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(sum(self.blocks))

    def is_type2(self) -> bool:
        return all(tag == "type2" for tag in self.cones)

    def to_problem_data(self) -> ProblemData:
        if not self.is_type2():
            raise ProblemFormatError(
                'field "cones": solver requires all tags "type2", got '
                + repr(sorted(set(self.cones)))
            )
        shape = BlockShape(self.blocks)
        return ProblemData(A=self.A, b=self.b, c=self.c, shape=shape)

    def start(self) -> tuple[ConeVector, np.ndarray, ConeVector] | None:
        if self.x0 is None:
            return None
        shape = BlockShape(self.blocks)
        return (
            ConeVector(shape, self.x0),
            self.y0.copy(),
            ConeVector(shape, self.s0),
        )

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "m": self.m,
            "blocks": list(self.blocks),
            "A": [float(v) for v in self.A.ravel()],
            "b": [float(v) for v in self.b],
            "c": [float(v) for v in self.c],
        }
        if any(tag != "type2" for tag in self.cones):
            doc["cones"] = list(self.cones)
        if self.x0 is not None:
            doc["x0"] = [float(v) for v in self.x0]
            doc["y0"] = [float(v) for v in self.y0]
            doc["s0"] = [float(v) for v in self.s0]
        return doc


def _require(doc: dict, key: str, kind: type, where: str = "problem") -> Any:
    if key not in doc:
        raise ProblemFormatError(f'{where} document is missing required key "{key}"')
    return doc[key]


def _float_list(value: Any, key: str, length: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float).ravel()
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f'field "{key}" is not a list of numbers') from exc
    if arr.size != length:
        raise ProblemFormatError(
            f'field "{key}" has length {arr.size}, expected {length}'
        )
    if not np.all(np.isfinite(arr)):
        raise ProblemFormatError(f'field "{key}" contains non-finite values')
    return arr


def parse_problem(doc: dict) -> ProblemDocument:
    """Validate and convert a problem dictionary, naming any bad field."""
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem document must be a JSON object")
    m = _require(doc, "m", int)
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ProblemFormatError('field "m" must be a positive integer')
    blocks_raw = _require(doc, "blocks", list)
    if not isinstance(blocks_raw, list) or not blocks_raw:
        raise ProblemFormatError('field "blocks" must be a non-empty list of integers')
    blocks: list[int] = []
    for i, v in enumerate(blocks_raw):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ProblemFormatError(f'field "blocks"[{i}] must be a positive integer')
        blocks.append(v)
    n = sum(blocks)

    cones_raw = doc.get("cones")
    if cones_raw is None:
        cones = ("type2",) * len(blocks)
    else:
        if not isinstance(cones_raw, list) or len(cones_raw) != len(blocks):
            raise ProblemFormatError(
                'field "cones" must be a list with one tag per block'
            )
        cones = tuple(str(t) for t in cones_raw)
    for i, (tag, size) in enumerate(zip(cones, blocks)):
        if tag == "type2":
            if size < 2:
                raise ProblemFormatError(
                    f'field "blocks"[{i}]: type2 blocks must have size >= 2, got {size}'
                )
        elif tag == "nonneg":
            pass
        elif tag.startswith("lorentz:"):
            try:
                k = int(tag.split(":", 1)[1])
            except ValueError:
                raise ProblemFormatError(f'field "cones"[{i}]: bad tag {tag!r}') from None
            if k != size:
                raise ProblemFormatError(
                    f'field "cones"[{i}]: tag {tag!r} does not match block size {size}'
                )
        else:
            raise ProblemFormatError(f'field "cones"[{i}]: unknown tag {tag!r}')

    A = _float_list(_require(doc, "A", list), "A", m * n).reshape(m, n)
    b = _float_list(_require(doc, "b", list), "b", m)
    c = _float_list(_require(doc, "c", list), "c", n)

    start_keys = [k for k in ("x0", "y0", "s0") if k in doc]
    if start_keys and len(start_keys) != 3:
        missing = sorted(set(("x0", "y0", "s0")) - set(start_keys))
        raise ProblemFormatError(
            f"start point requires x0, y0 and s0 together; missing {missing}"
        )
    x0 = y0 = s0 = None
    if start_keys:
        x0 = _float_list(doc["x0"], "x0", n)
        y0 = _float_list(doc["y0"], "y0", m)
        s0 = _float_list(doc["s0"], "s0", n)

    return ProblemDocument(
        m=m, blocks=tuple(blocks), A=A, b=b, c=c, cones=cones, x0=x0, y0=y0, s0=s0
    )


def load_problem(path: str) -> ProblemDocument:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_problem(doc)


def dump_json(obj: Any, indent: int = 0) -> str:
    """Serialize with floats at 17 significant digits (lossless)."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{json.dumps(str(k))}: {dump_json(v, indent + 2)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dump_json(v, indent) for v in obj]
        body = ", ".join(items)
        if len(body) <= 76 - indent and "\n" not in body:
            return "[" + body + "]"
        items = [inner + dump_json(v, indent + 2) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            raise ValueError("cannot serialize non-finite number")
        return format(v, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_problem(doc: ProblemDocument) -> str:
    return dump_json(doc.to_json_dict()) + "\n"


def report_to_dict(report) -> dict[str, Any]:
    """Flatten a solve report into the report-file layout."""
    out: dict[str, Any] = {
        "status": str(report.status.value),
        "objective": report.objective,
        "x": [float(v) for v in report.x.data],
        "y": [float(v) for v in report.y],
        "s": [float(v) for v in report.s.data],
        "mu": report.mu,
        "gap": report.gap,
        "residuals": {"primal": report.primal_res, "dual": report.dual_res},
        "iterations": {
            "outer": report.outer_iterations,
            "inner_total": report.inner_total,
            "inner_per_outer": list(report.inner_per_outer),
        },
    }
    if report.bound is not None:
        out["bound"] = {
            "L": report.bound.L,
            "value": report.bound.total,
            "inner_per_outer": report.bound.inner_per_outer,
            "constants": {
                "kappa": report.bound_constants.kappa,
                "gamma": report.bound_constants.gamma,
            },
        }
    out["wall_time_seconds"] = report.wall_time_seconds
    return out


def emit_report(report) -> str:
    return dump_json(report_to_dict(report)) + "\n"


def parse_report(text: str) -> dict[str, Any]:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
