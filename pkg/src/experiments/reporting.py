"""Summary table and text report of a run"""
import logging

import numpy as np

from experiments.checks import RESULT_COLUMNS
from utils.io import atomic_write_text, write_csv

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("instance", "epsilon", "tau", "lambda_hat", "predicted_contraction", "setting",
                   "certificate_lambda", "certificate_contraction", "threshold_ok", "empirical_max_ratio",
                   "empirical_mean_ratio", "ratios", "rate_hard")
GAUSSIAN_COLUMNS = ("draw", "epsilon", "alpha", "beta", "steps", "error", "binfty_residual")


def summary_row(cell, ratios, rate_result=None):
    """Empirical per-step contraction of one cell next to the prediction, when one was made"""
    details = rate_result.details if rate_result is not None else {}
    certificate = details.get("certificate")
    if certificate is None and rate_result is None:
        certificate = cell.certificate()
    tau = details.get("tau", cell.instance.resolved_tau())
    return (
        cell.instance.name,
        cell.epsilon,
        np.nan if tau is None else tau,
        details.get("lambda_hat", np.nan),
        details.get("predicted", np.nan),
        "" if certificate is None else certificate.setting,
        np.nan if certificate is None else certificate.lam,
        np.nan if certificate is None else certificate.contraction,
        "" if certificate is None else certificate.threshold_ok,
        float(ratios.max()) if ratios.size else np.nan,
        float(ratios.mean()) if ratios.size else np.nan,
        int(ratios.size),
        rate_result.hard if rate_result is not None else False,
    )


def write_checks(path, results):
    return write_csv(path, RESULT_COLUMNS, [r.as_row() for r in results])


def write_summary(path, rows):
    return write_csv(path, SUMMARY_COLUMNS, rows)


def write_gaussian_rows(path, rows):
    return write_csv(path, GAUSSIAN_COLUMNS, rows)


def render_report(config, results, elapsed):
    """Plain-text pass/fail listing, hard failures first"""
    hard = [r for r in results if r.hard_failure]
    soft = [r for r in results if not r.passed and not r.hard]
    lines = [
        f"Experiment: {config.name}",
        f"Seed: {config.seed}",
        f"Checks: {', '.join(config.checks) or '(none)'}",
        f"Elapsed: {elapsed:.1f} s",
        f"Results: {len(results)} checks, {len(hard)} hard failures, {len(soft)} warnings",
        "",
    ]
    ordered = hard + soft + [r for r in results if r.passed]
    for r in ordered:
        where = r.instance if np.isnan(r.epsilon) else f"{r.instance} eps={r.epsilon:g}"
        line = f"[{r.status:>4}] {r.check:<18} {where:<28} value={r.value:.3e} limit={r.limit:.3e}"
        if r.message:
            line += f"  {r.message}"
        lines.append(line)
    lines.append("")
    lines.append("PASSED" if not hard else "FAILED")
    return "\n".join(lines) + "\n"


def write_report(path, config, results, elapsed):
    text = render_report(config, results, elapsed)
    atomic_write_text(path, text)
    logger.info(f"Report saved: {path}")
    return text
