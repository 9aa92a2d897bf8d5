"""Job files: one JSON document naming a task and carrying its payload.

Scalars and rational functions inside a job are strings in the expression
grammar; points are scalar strings or "inf".
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Optional

from ..config import get_settings
from ..core import linalg
from ..core.connection import LogConnection, SplitBundle, ratfun_matrix
from ..core.cover import CoverDesc, EquivariantConnection, ParabolicConnection, ParabolicFlag
from ..core.errors import GrammarError, JobError, LogConnError
from ..core.existence import ResiduePrescription
from ..core.field import field_make
from ..core.torsion import Character, Representation, SubgroupRepresentation
from .grammar import parse_matrix, parse_point, parse_scalar

TASKS = (
    "residue", "fuchs", "pushforward", "invariants", "equivariantize", "roundtrip",
    "fixed-point", "decompose", "induce", "existence", "obstruction", "agreement",
)


@dataclass(frozen=True)
class JobFile:
    field_order: int
    task: str
    payload: dict = field(default_factory=dict)
    source: Optional[str] = None

    @property
    def context(self):
        return field_make(self.field_order)


def _require(record, key, where):
    if not isinstance(record, dict):
        raise JobError(f"{where} must be an object")
    if key not in record:
        raise JobError(f"{where} is missing the {key!r} field")
    return record[key]


def _int_list(values, where):
    if not isinstance(values, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        raise JobError(f"{where} must be a list of integers")
    return values


def job_from_dict(data, task=None, field_order=None, source=None):
    """Build a JobFile; an explicit field order beats the job's, which beats LOGCONN_FIELD_ORDER"""
    if not isinstance(data, dict):
        raise JobError("a job must be a JSON object")
    named = data.get("task")
    if task is None:
        task = named
    elif named is not None and named != task:
        raise JobError(f"job is a {named!r} job, not {task!r}")
    if task not in TASKS:
        raise JobError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    order = field_order or data.get("field_order") or get_settings().field_order
    if not isinstance(order, int) or order < 1:
        raise JobError(f"field order must be a positive integer, got {order!r}")
    payload = data.get("payload", {k: v for k, v in data.items() if k not in ("task", "field_order")})
    return JobFile(order, task, payload, source)


def load_job(path, task=None, field_order=None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise JobError(f"cannot read job file {path}: {e}")
    except json.JSONDecodeError as e:
        raise JobError(f"{path} is not valid JSON: {e}")
    logging.debug(f"loaded job {path}")
    return job_from_dict(data, task, field_order, str(path))


def decode_points(values, ctx, where="singular"):
    if not isinstance(values, list):
        raise JobError(f"{where} must be a list of points")
    return tuple(parse_point(v, ctx) for v in values)


def decode_connection(record, ctx, twists_default=None):
    rows = parse_matrix(_require(record, "matrix", "connection"), ctx)
    r = len(rows)
    if len(rows[0]) != r:
        raise JobError(f"connection matrix must be square, got {r}x{len(rows[0])}")
    twists = record.get("twists", twists_default if twists_default is not None else [0] * r)
    twists = _int_list(twists, "twists")
    if len(twists) != r:
        raise JobError(f"{len(twists)} twists for a rank {r} matrix")
    singular = decode_points(record.get("singular", []), ctx)
    return LogConnection(SplitBundle(tuple(twists)), ratfun_matrix(rows, ctx), singular)


def decode_scalar_matrix(rows, ctx):
    return linalg.matrix(parse_matrix(rows, ctx, scalar=True), ctx)


def decode_cover(record, ctx):
    n = _require(_require(record, "cover", "payload"), "n", "cover")
    if not isinstance(n, int):
        raise JobError(f"cover degree must be an integer, got {n!r}")
    return CoverDesc(n, ctx)


def decode_equivariant(record, ctx):
    cover = decode_cover(record, ctx)
    body = _require(record, "equivariant", "payload")
    conn = decode_connection(body, ctx)
    action = decode_scalar_matrix(_require(body, "action", "equivariant"), ctx)
    return EquivariantConnection(cover, conn, action)


def _weight(value, ctx):
    scalar = parse_scalar(value, ctx)
    if not scalar.is_rational():
        raise JobError(f"weight {value!r} is not rational")
    return scalar.as_rational()


def decode_flag(record, ctx):
    point = parse_point(_require(record, "point", "flag"), ctx)
    dimensions = _int_list(_require(record, "dimensions", "flag"), "flag dimensions")
    weights = [_weight(w, ctx) for w in _require(record, "weights", "flag")]
    return ParabolicFlag(point, tuple(dimensions), tuple(weights))


def decode_parabolic(record, ctx):
    cover = decode_cover(record, ctx)
    body = _require(record, "parabolic", "payload")
    conn = decode_connection(body, ctx)
    flags = tuple(decode_flag(f, ctx) for f in body.get("flags", []))
    return cover, ParabolicConnection(conn, flags)


def _decode_residues(record, ctx):
    residues = record.get("residues", {})
    if not isinstance(residues, dict):
        raise JobError("residues must map labels to matrices")
    out = {}
    for label, value in residues.items():
        if value and isinstance(value[0], list) and value[0] and isinstance(value[0][0], list):
            out[label] = [decode_scalar_matrix(block, ctx) for block in value]
        else:
            out[label] = decode_scalar_matrix(value, ctx)
    return out


def decode_representation(record, ctx):
    matrices = _require(record, "matrices", "representation")
    if not isinstance(matrices, list) or not matrices:
        raise JobError("representation needs a non-empty list of matrices")
    return Representation(tuple(decode_scalar_matrix(m, ctx) for m in matrices), _decode_residues(record, ctx))


def decode_character(record, ctx):
    order = _require(record, "order", "character")
    exponents = _int_list(_require(record, "exponents", "character"), "character exponents")
    residues = record.get("residues", {})
    if not isinstance(residues, dict):
        raise JobError("character residues must map labels to scalars")
    shifts = {label: parse_scalar(value, ctx) for label, value in residues.items()}
    return Character(order, tuple(exponents), shifts)


def decode_subrepresentation(record, ctx):
    chi = decode_character(_require(record, "character", "payload"), ctx)
    expected = record.get("generator_count", chi.generator_count)
    if expected != chi.generator_count:
        raise JobError(f"generator_count {expected} but the character has {chi.generator_count} exponents")
    body = _require(record, "subrepresentation", "payload")
    matrices = _require(body, "matrices", "subrepresentation")
    if not isinstance(matrices, list) or not matrices:
        raise JobError("subrepresentation needs a non-empty list of matrices")
    return SubgroupRepresentation(chi, tuple(decode_scalar_matrix(m, ctx) for m in matrices),
                                  _decode_residues(body, ctx))


def decode_prescription(record, ctx):
    twists = _int_list(_require(record, "twists", "payload"), "twists")
    points = decode_points(_require(record, "points", "payload"), ctx, "points")
    lambdas = _require(record, "lambdas", "payload")
    if not isinstance(lambdas, list):
        raise JobError("lambdas must be a list of scalars")
    return (SplitBundle(tuple(twists)), ResiduePrescription(points, tuple(parse_scalar(x, ctx) for x in lambdas)),
            ctx)


def decode(job):
    """Typed arguments for the job's task; every decoding failure is a JobError or GrammarError"""
    ctx = job.context
    payload = job.payload
    try:
        if job.task == "residue":
            return decode_connection(payload, ctx), parse_point(_require(payload, "point", "payload"), ctx)
        if job.task == "fuchs":
            return (decode_connection(payload, ctx),)
        if job.task in ("pushforward", "invariants"):
            return (decode_equivariant(payload, ctx),)
        if job.task in ("equivariantize", "roundtrip"):
            return decode_parabolic(payload, ctx)
        if job.task in ("fixed-point", "decompose"):
            return (decode_representation(_require(payload, "representation", "payload"), ctx),
                    decode_character(_require(payload, "character", "payload"), ctx))
        if job.task == "induce":
            return (decode_subrepresentation(payload, ctx),)
        return decode_prescription(payload, ctx)
    except (GrammarError, JobError):
        raise
    except LogConnError as e:
        raise JobError(f"invalid {job.task} payload: {e}")
