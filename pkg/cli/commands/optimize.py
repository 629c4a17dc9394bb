"""
minimize and scan commands
Energy minimization over the configured shape family, once or along an eps/m sweep
"""
import logging
from typing import Optional

from src.families import get_family
from src.lab_config import LabConfigError
from src.optimize import OptimizationReport, minimize_family, roundtrip_check, scan
from src.report_writer import boundary_rows
from src.shapes import ShapeError

from cli.commands.common import RunContext

logger = logging.getLogger(__name__)

BOUND_RTOL = 1e-9


def _family(cfg):
    if cfg.family is None:
        raise LabConfigError("family: required for minimize and scan")
    tension = cfg.tension if cfg.family.variant in ("polygon", "star") else None
    return get_family(cfg.family.variant, tension, **cfg.family.options)


def _write_boundary(ctx: RunContext, name: str, report: OptimizationReport, samples: int) -> Optional[str]:
    if report.shape.dim != 2:
        return None
    try:
        points = report.shape.boundary_points(samples)
    except ShapeError as e:
        logger.warning("no boundary export for %s: %s", report.shape.variant, e)
        return None
    return ctx.writer.write_csv(name, boundary_rows(points)).name


def _exceeds_wulff_bound(report: OptimizationReport) -> bool:
    if report.wulff_energy is None:
        return False
    return report.energy > report.wulff_energy + BOUND_RTOL * max(1.0, abs(report.wulff_energy))


def run_minimize_command(args, cfg) -> int:
    """
    Write minimize.json, minimize_trace.csv and, for planar minimizers, minimizer_boundary.csv

    Returns:
        1 when the minimizer exceeds the energy of the Wulff start,
        3 when the search did not converge, 0 otherwise
    """
    family = _family(cfg)
    params = cfg.require_params()
    report = minimize_family(family, params, cfg.quadrature, cfg.nonlocal_kind)
    ctx = RunContext(cfg, "minimize")
    trace = [{"evaluation": k, **dict(zip([f"x{j}" for j in range(family.dimension)], row["parameters"])), "energy": row["energy"]} for k, row in enumerate(report.trace)]
    trace_path = ctx.writer.write_csv("minimize_trace.csv", trace)
    columns = {trace_path.name: ctx.writer.csv_columns(trace_path)}
    boundary = _write_boundary(ctx, "minimizer_boundary.csv", report, cfg.formats.boundary_samples)
    if boundary is not None:
        columns[boundary] = ctx.writer.csv_columns(ctx.out_dir / boundary)
    doc = {
        "family": family.to_dict(),
        "params": params.model_dump(mode="json"),
        "result": report.to_dict(),
        "shape": report.shape.to_dict(),
        "roundtrip_rel_diff": roundtrip_check(family, report, params, cfg.quadrature, cfg.nonlocal_kind),
    }
    ctx.writer.write_json("minimize.json", doc, columns)
    logger.info("%s minimizer %s: energy %.12g", family.variant, report.described, report.energy)

    if _exceeds_wulff_bound(report):
        logger.error("minimizer energy %.12g exceeds the Wulff start %.12g", report.energy, report.wulff_energy)
        return ctx.finish(1)
    return ctx.finish(0 if report.converged else 3)


def run_scan_command(args, cfg) -> int:
    """
    Write scan.csv (one row per sweep value) and scan.json

    Returns:
        3 when a sweep point failed or did not converge, 0 otherwise
    """
    if cfg.sweep is None:
        raise LabConfigError("sweep: required for scan")
    family = _family(cfg)
    params = cfg.require_params()
    points = scan(family, params, cfg.sweep.points(), cfg.quadrature, cfg.nonlocal_kind, cfg.sweep.key, cfg.parallel_sweep)
    ctx = RunContext(cfg, "scan")
    path = ctx.writer.write_csv("scan.csv", [p.row() for p in points])
    failed = [p.value for p in points if p.report is None]
    unconverged = [p.value for p in points if p.report is not None and not p.report.converged]
    doc = {
        "family": family.to_dict(),
        "key": cfg.sweep.key,
        "points": [{"value": p.value, "error": p.error, "result": p.report.to_dict() if p.report else None} for p in points],
        "failed": failed,
        "unconverged": unconverged,
    }
    ctx.writer.write_json("scan.json", doc, {path.name: ctx.writer.csv_columns(path)})
    return ctx.finish(3 if failed or unconverged else 0)
