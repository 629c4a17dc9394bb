"""
energy command
Evaluates the requested energies of a shape file
"""
import logging

from src.energy import NONLOCAL_TERMS, EnergyError, el_residual, total_energy
from src.lab_config import LabConfigError
from src.potentials import PotentialError
from src.shape_io import load_shape
from src.shapes import StarDomain

from cli.commands.common import RunContext, exit_code_for

logger = logging.getLogger(__name__)

COLUMNS = ["kind", "perimeter", "nonlocal", "weight", "total", "error", "mass_total", "admissible", "failure"]


def run_energy_command(args, cfg) -> int:
    """
    Write energy.csv (one row per nonlocal term) and energy.json, plus
    el_profile.csv for star domains when --profile is given

    Returns:
        Exit code; 1 on a potential bound violation, 2 when no requested
        energy is defined for the shape
    """
    path = args.shape or cfg.shape
    if path is None:
        raise LabConfigError("shape: a shape file is required (argument or config)")
    params = cfg.require_params()
    shape = load_shape(path, args.h)
    f = cfg.surface_tension()
    kinds = args.kind or [cfg.nonlocal_kind]
    unknown = [k for k in kinds if k not in NONLOCAL_TERMS]
    if unknown:
        raise LabConfigError(f"kind: unknown nonlocal terms {unknown}")

    ctx = RunContext(cfg, "energy")
    rows, breakdowns, failures = [], {}, []
    for kind in kinds:
        try:
            breakdown = total_energy(shape, f, params, cfg.quadrature, kind)
        except (EnergyError, PotentialError) as e:
            logger.error("%s energy of %s: %s", kind, shape.variant, e)
            failures.append(exit_code_for(e))
            rows.append({"kind": kind, "failure": str(e)})
            continue
        doc = breakdown.to_dict()
        breakdowns[kind] = doc
        rows.append({"kind": kind, **{k: doc[k] for k in COLUMNS[1:-1]}, "failure": ""})

    csv_path = ctx.writer.write_csv("energy.csv", rows, COLUMNS)
    summary = {"shape": shape.to_dict(), "volume": shape.volume(), "energies": breakdowns}
    if args.profile and isinstance(shape, StarDomain) and f.is_smooth:
        report = el_residual(shape, f, params, cfg.quadrature)
        ctx.writer.write_csv("el_profile.csv", report.rows(), ["s", "H_f", "v_E", "g"])
        summary["el_residual"] = report.to_dict()
    ctx.writer.write_json("energy.json", summary, {csv_path.name: ["config_hash", *COLUMNS]})
    # bound violations and non-convergence outrank inputs the shape cannot support
    return ctx.finish(max((c for c in failures if c != 2), default=0 if breakdowns else 2))
