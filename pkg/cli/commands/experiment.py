"""
experiment command
Runs one named experiment and writes its tables and summary
"""
import logging

from src.experiments.base import get_experiment
from src.lab_config import LabConfigError

from cli.commands.common import RunContext, exit_code_for

logger = logging.getLogger(__name__)


def _flush_tables(ctx: RunContext, tables) -> None:
    for table, rows in sorted(tables.items()):
        if rows:
            ctx.writer.write_csv(f"{table}.csv", rows)


def run_experiment_command(args, cfg) -> int:
    """
    Write one CSV per recorded table and summary.json

    Tables recorded before an exception are flushed, with a manifest, before it propagates.

    Returns:
        The outcome's exit code
    """
    name = args.name or cfg.experiment
    if not name:
        raise LabConfigError("experiment: a name is required (argument or config)")
    runner = get_experiment(name, cfg)
    ctx = RunContext(cfg, f"experiment {runner.name}")
    try:
        outcome = runner.run()
    except Exception as e:
        _flush_tables(ctx, runner.tables)
        ctx.finish(exit_code_for(e))
        raise

    _flush_tables(ctx, outcome.tables)
    columns = {f"{t}.csv": ctx.writer.csv_columns(ctx.out_dir / f"{t}.csv") for t, rows in outcome.tables.items() if rows}
    summary = {
        "experiment": outcome.name,
        "passed": outcome.passed,
        "converged": outcome.converged,
        "summary": outcome.summary,
    }
    ctx.writer.write_json("summary.json", summary, columns)
    return ctx.finish(outcome.exit_code)
