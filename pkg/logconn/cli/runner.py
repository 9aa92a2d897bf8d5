"""Task dispatch and JSON reports.

Exit codes: 0 ok, 1 mathematical negative (not fixed, criterion fails, a
cross-check fails), 2 input error.
"""
import json
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from ..config import get_settings
from ..core import linalg
from ..core.connection import conn_validate, fuchs_check, residue_at, residue_charpoly
from ..core.cover import (equivariantize, gamma_action_on_pushforward, invariant_part, pushforward_full,
                          roundtrip_check)
from ..core.errors import GrammarError, JobError, LogConnError
from ..core.existence import cech_obstruction, construct_connection, criterion_check, oracle_agreement
from ..core.ratcalc import P1Point
from ..core.torsion import are_isomorphic, certify_fixed_point, decompose, induce, twist
from .grammar import format_matrix, format_point, format_scalar
from .jobs import decode, load_job

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2


def _connection(conn):
    return {
        "twists": list(conn.bundle.twists),
        "matrix": format_matrix(conn.matrix),
        "singular": [format_point(p) for p in conn.singular_set],
    }


def _flags(flags):
    return [{"point": format_point(f.point), "dimensions": list(f.dimensions),
             "weights": [str(w) for w in f.weights]} for f in flags]


def _connection_checks(conn, prefix=""):
    report = conn_validate(conn)
    defect = fuchs_check(conn)
    checks = {f"{prefix}valid": bool(report), f"{prefix}fuchs": not defect}
    details = {f"{prefix}fuchs_defect": format_scalar(defect)}
    if not report:
        details[f"{prefix}validation"] = report.message
    return checks, details


def _residues(conn, points):
    return {format_point(p): format_matrix(residue_at(conn, p).matrix) for p in points}


def run_residue(conn, point):
    res = residue_at(conn, point)
    checks, details = _connection_checks(conn)
    result = {"point": format_point(point), "residue": format_matrix(res.matrix),
              "charpoly": [format_scalar(c) for c in residue_charpoly(res)], **details}
    return result, checks, False


def run_fuchs(conn):
    checks, details = _connection_checks(conn)
    defect = fuchs_check(conn)
    result = {"defect": format_scalar(defect), "residues": _residues(conn, conn.singular_set), **details}
    return result, {"valid": checks["valid"]}, bool(defect)


def run_pushforward(e):
    pushed = pushforward_full(e)
    gamma = gamma_action_on_pushforward(e)
    ctx = e.cover.context
    commutes = linalg.matrices_equal(pushed.matrix @ gamma, gamma @ pushed.matrix)
    checks, details = _connection_checks(pushed)
    checks["gamma_commutes"] = commutes
    result = {"connection": _connection(pushed), "gamma_action": format_matrix(gamma),
              "residues": _residues(pushed, (e.cover.origin(), P1Point.infinity())), **details}
    logging.debug(f"pushforward over Q(zeta_{ctx.order}): twists {pushed.bundle.twists}")
    return result, checks, False


def run_invariants(e):
    p = invariant_part(e)
    checks, details = _connection_checks(p.conn)
    result = {"connection": _connection(p.conn), "flags": _flags(p.flags),
              "residues": _residues(p.conn, p.parabolic_points), **details}
    return result, checks, False


def run_equivariantize(cover, p):
    e = equivariantize(p, cover)
    checks, details = _connection_checks(e.conn)
    result = {"n": cover.n, "connection": _connection(e.conn), "action": format_matrix(e.action), **details}
    return result, checks, False


def run_roundtrip(cover, p):
    report = roundtrip_check(p, cover)
    result = {"ok": report.ok, "message": report.message}
    checks = {}
    if report.gauge is not None:
        result["gauge"] = format_matrix(report.gauge)
    if report.recovered is not None:
        # The recovered connection is the one this job produces
        checks, details = _connection_checks(report.recovered.conn)
        result.update(details)
        result["recovered"] = _connection(report.recovered.conn)
        result["flags"] = _flags(report.recovered.flags)
    return result, checks, not report.ok


def _certificate_checks(rho, chi, h):
    ctx = rho.context
    twisted = twist(rho, chi)
    power = linalg.matrix_power(h, chi.order, ctx)
    return {
        "certificate_order": linalg.matrices_equal(power, linalg.identity(rho.rank, ctx)),
        "certificate_intertwines": all(linalg.matrices_equal(h @ a, b @ h)
                                       for a, b in zip(rho.matrices, twisted.matrices)),
    }


def run_fixed_point(rho, chi):
    cert = certify_fixed_point(rho, chi)
    if cert is None:
        return {"fixed": False}, {}, True
    return ({"fixed": True, "normalized": cert.normalized, "certificate": format_matrix(cert.H)},
            _certificate_checks(rho, chi, cert.H), False)


def _words(words):
    return [list(w) for w in words]


def run_decompose(rho, chi):
    cert = certify_fixed_point(rho, chi)
    if cert is None:
        return {"fixed": False}, {}, True
    data = decompose(rho, chi, cert)
    checks = _certificate_checks(rho, chi, cert.H)
    checks["induce_matches"] = are_isomorphic(induce(data.subrep), rho)
    result = {
        "fixed": True,
        "certificate": format_matrix(cert.H),
        "basis": format_matrix(data.basis),
        "transversal": _words(data.schreier.transversal),
        "schreier_generators": _words(data.schreier.generators),
        "subrepresentation": [format_matrix(m) for m in data.subrep.matrices],
        "residue_blocks": {label: [format_matrix(b) for b in blocks]
                           for label, blocks in data.residue_blocks.items()},
    }
    return result, checks, False


def run_induce(sigma):
    rho = induce(sigma)
    cert = certify_fixed_point(rho, sigma.character)
    checks = {"fixed_point_certified": cert is not None}
    result = {
        "matrices": [format_matrix(m) for m in rho.matrices],
        "residues": {label: format_matrix(m) for label, m in rho.residues.items()},
    }
    return result, checks, False


def run_existence(bundle, p, ctx):
    verdict = criterion_check(bundle, p, ctx)
    result = {"exists": verdict.exists}
    if not verdict:
        result["witness"] = list(verdict.witness)
        result["condition"] = verdict.condition
        return result, {}, True
    conn = construct_connection(bundle, p, ctx)
    checks, details = _connection_checks(conn)
    result["connection"] = _connection(conn)
    result.update(details)
    return result, checks, False


def run_obstruction(bundle, p, ctx):
    theta = cech_obstruction(bundle, p, ctx)
    expected = ctx.coerce(bundle.degree) + p.total(ctx) * bundle.rank
    result = {
        "values": {f"{i},{j},{k}": format_scalar(v) for (i, j, k), v in sorted(theta.values.items())},
        "zero": theta.is_zero(),
        "identity_value": format_scalar(theta.identity_value()),
    }
    return result, {"identity": theta.identity_value() == expected}, not theta.is_zero()


def run_agreement(bundle, p, ctx):
    report = oracle_agreement(bundle, p, ctx)
    result = {"ok": report.ok, "criterion": report.criterion, "obstruction_zero": report.obstruction_zero,
              "constructed": report.constructed, "identity_ok": report.identity_ok, "message": report.message}
    return result, {}, not report.ok


HANDLERS = {
    "residue": run_residue,
    "fuchs": run_fuchs,
    "pushforward": run_pushforward,
    "invariants": run_invariants,
    "equivariantize": run_equivariantize,
    "roundtrip": run_roundtrip,
    "fixed-point": run_fixed_point,
    "decompose": run_decompose,
    "induce": run_induce,
    "existence": run_existence,
    "obstruction": run_obstruction,
    "agreement": run_agreement,
}


def _stamp(report, timestamp):
    if timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    return report


def run(job, timestamp=True):
    """Execute a decoded job; returns (report, exit code)"""
    report = {"task": job.task, "field_order": job.field_order}
    if job.source:
        report["source"] = job.source
    try:
        args = decode(job)
    except (GrammarError, JobError) as e:
        logging.error(f"bad {job.task} job: {e}")
        report.update(verdict="input-error", error=str(e), exit_code=EXIT_INPUT)
        if isinstance(e, GrammarError) and e.position is not None:
            report["position"] = e.position
        return _stamp(report, timestamp), EXIT_INPUT
    try:
        result, checks, negative = HANDLERS[job.task](*args)
    except LogConnError as e:
        logging.info(f"{job.task}: {type(e).__name__}: {e}")
        report.update(verdict="negative", error=f"{type(e).__name__}: {e}", exit_code=EXIT_NEGATIVE)
        return _stamp(report, timestamp), EXIT_NEGATIVE
    except Exception as e:
        logging.error(f"Error running {job.task}: {e}")
        logging.error(traceback.format_exc())
        report.update(verdict="error", error=str(e), exit_code=EXIT_INPUT)
        return _stamp(report, timestamp), EXIT_INPUT
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        logging.error(f"{job.task}: cross-checks failed: {failed}")
    code = EXIT_NEGATIVE if negative or failed else EXIT_OK
    verdict = "ok" if code == EXIT_OK else ("check-failed" if failed else "negative")
    report.update(verdict=verdict, result=result, checks=checks, exit_code=code)
    return _stamp(report, timestamp), code


def run_file(path, task=None, field_order=None, timestamp=True):
    try:
        job = load_job(path, task, field_order)
    except (GrammarError, JobError) as e:
        logging.error(f"cannot load {path}: {e}")
        report = {"task": task, "source": str(path), "verdict": "input-error", "error": str(e),
                  "exit_code": EXIT_INPUT}
        return _stamp(report, timestamp), EXIT_INPUT
    return run(job, timestamp)


def _sweep_worker(args):
    path, task, field_order, timestamp = args
    return run_file(path, task, field_order, timestamp)


def run_sweep(directory, task=None, field_order=None, timestamp=True, workers=None):
    """Every *.json job of a directory, one worker process per job; the exit code is the worst one"""
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        logging.error(f"no job files in {directory}")
        return [], EXIT_INPUT
    workers = workers or get_settings().sweep_workers or 1
    logging.info(f"sweeping {len(paths)} jobs from {directory} with {workers} workers")
    jobs = [(str(p), task, field_order, timestamp) for p in paths]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        outcomes = list(executor.map(_sweep_worker, jobs))
    reports = [report for report, _ in outcomes]
    return reports, max(code for _, code in outcomes)


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2)
