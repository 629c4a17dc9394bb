"""
verify command
Runs the invariant suites and reports every check with its margin
"""
import logging

from src.verify_suites import run_suites

from cli.commands.common import RunContext

logger = logging.getLogger(__name__)

COLUMNS = ["suite", "check", "value", "threshold", "margin", "passed"]


def run_verify_command(args, cfg) -> int:
    """
    Write verify.csv and verify.json

    Returns:
        0 when every check passes, 1 otherwise
    """
    names = args.suite or cfg.suites
    report = run_suites(names, cfg.quadrature)
    ctx = RunContext(cfg, "verify")
    path = ctx.writer.write_csv("verify.csv", report.rows(), COLUMNS)
    ctx.writer.write_json("verify.json", report.to_dict(), {path.name: ["config_hash", *COLUMNS]})
    for check in report.failures:
        logger.error("FAIL %s / %s: value %.6g, threshold %.6g", check.suite, check.name, check.value, check.threshold)
    return ctx.finish(0 if report.passed else 1)
