"""
wulff command
Builds the Wulff shape of the configured tension and exports it with its constants
"""
import logging

from src.anisotropy import build_wulff, wulff_metadata
from src.potentials import lipschitz_constant
from src.report_writer import coordinate_names
from src.shape_io import save_shape
from src.shapes import unit_ball_volume

from cli.commands.common import RunContext

logger = logging.getLogger(__name__)


def run_wulff_command(args, cfg) -> int:
    """
    Write wulff.json (samples and metadata), wulff_boundary.csv and wulff_shape.json

    Returns:
        Exit code
    """
    ctx = RunContext(cfg, "wulff")
    f = cfg.surface_tension()
    samples = args.samples or cfg.formats.boundary_samples
    wulff = build_wulff(f, samples)
    metadata = wulff_metadata(wulff)
    if cfg.params is not None:
        n, alpha = cfg.params.n, cfg.params.alpha
        metadata["lipschitz_constant"] = lipschitz_constant(n, alpha)
        metadata["ball_potential_constant"] = n * unit_ball_volume(n) / (n - alpha)
    logger.info("Wulff shape of %s: |K| = %.12g, P_f(K) = %.12g", f.variant, wulff.volume, metadata["perimeter"])

    names = coordinate_names(wulff.n)
    rows = []
    for p, nu, w in zip(wulff.points, wulff.normals, wulff.weights):
        row = dict(zip(names, map(float, p)))
        row.update({f"nu_{c}": float(v) for c, v in zip(names, nu)})
        row["w"] = float(w)
        rows.append(row)
    columns = names + [f"nu_{c}" for c in names] + ["w"]
    boundary = ctx.writer.write_csv("wulff_boundary.csv", rows, columns)
    doc = {"metadata": metadata, **wulff.to_dict()}
    ctx.writer.write_json("wulff.json", doc, {boundary.name: ["config_hash", *columns]})
    if cfg.formats.json_summary:
        ctx.track(save_shape(wulff.to_shape(), ctx.out_dir / "wulff_shape.json"))
    return ctx.finish(0)
