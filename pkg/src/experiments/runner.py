"""Run every (instance, ε) cell of a config and write its artifacts"""
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List

import numpy as np

from diagnostics.identities import IdentityRecorder
from experiments import reporting
from experiments.checks import (
    GLOBAL_CHECK_FUNCTIONS, Cell, CheckResult, StateSampler, empirical_ratios, run_cell_check,
)
from transport.sinkhorn import solve_reference
from transport.trace import run_sinkhorn
from utils.errors import SinkhornLabError
from utils.io import format_value

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    results: List[CheckResult] = field(default_factory=list)
    summary: list = field(default_factory=list)
    out_dir: str = ""
    elapsed: float = 0.0

    @property
    def hard_failures(self):
        return [r for r in self.results if r.hard_failure]

    @property
    def exit_code(self):
        return 1 if self.hard_failures else 0


def cell_dir(out_dir, instance_name, epsilon):
    return os.path.join(out_dir, instance_name, f"eps_{format_value(float(epsilon))}")


class ExperimentRunner:
    """Independent cells run on a thread pool; each cell's pipeline is sequential"""

    def __init__(self, config, out_dir=None, jobs=1):
        self.config = config
        self.out_dir = out_dir or config.output_dir
        self.jobs = max(1, int(jobs))

    def build_instances(self):
        built = []
        for inst in self.config.instances:
            rho = inst.rho.build(self.config.base_dir)
            nu = inst.nu.build(self.config.base_dir)
            cost = inst.build_cost()
            logger.info(f"Instance {inst.name}: ρ {len(rho)} atoms, ν {len(nu)} atoms, cost {cost}")
            built.append((inst, rho, nu, cost))
        return built

    def cells(self, built):
        for i, (inst, rho, nu, cost) in enumerate(built):
            for j, epsilon in enumerate(self.config.epsilons):
                yield inst, rho, nu, cost, epsilon, self.config.seed + 1000 * i + j

    def run_cell(self, inst, rho, nu, cost, epsilon, seed):
        config = self.config
        tol = config.tolerance
        checks = config.cell_checks
        started = time.time()

        reference = solve_reference(rho, nu, cost, epsilon, tol=tol["reference"], max_iter=config.max_iter)
        recorder = IdentityRecorder(reference) if "identity" in checks else None
        sampler = StateSampler()
        observers = [sampler] + ([recorder] if recorder is not None else [])
        trace = run_sinkhorn(rho, nu, cost, epsilon, config.trace_iterations, reference=reference,
                             observers=observers)
        cell = Cell(inst, epsilon, rho, nu, cost, reference, trace, config, seed, recorder, sampler)

        results = []
        if not reference.converged:
            results.append(CheckResult("reference", inst.name, epsilon, False, False, reference.residual,
                                       tol["reference"], "reference solve did not converge"))
        for check in checks:
            result = run_cell_check(cell, check)
            if not result.passed:
                log = logger.error if result.hard else logger.warning
                log(f"{check} {result.status} on {inst.name} ε={epsilon}: {result.message}")
            results.append(result)

        rate = next((r for r in results if r.check == "rate"), None)
        summary = reporting.summary_row(cell, empirical_ratios(trace, tol["stop_kl"]), rate)
        self.write_cell(cell, results, rate)
        logger.info(f"Cell {inst.name} ε={epsilon} done in {time.time() - started:.1f} s")
        return results, summary

    def write_cell(self, cell, results, rate=None):
        directory = cell_dir(self.out_dir, cell.instance.name, cell.epsilon)
        trace_path = cell.trace.to_csv(os.path.join(directory, "trace.csv"))
        reporting.write_checks(os.path.join(directory, "checks.csv"), results)
        if self.config.plots:
            from utils.plotting import plot_kl_trace
            contraction = rate.details.get("predicted") if rate is not None else None
            plot_kl_trace(trace_path, os.path.join(directory, "kl_trace.svg"), contraction,
                          title=f"{cell.instance.name}, ε = {cell.epsilon:g}")

    def run_global(self, check):
        try:
            result = GLOBAL_CHECK_FUNCTIONS[check](self.config)
        except SinkhornLabError as e:
            logger.error(f"{check} failed: {e}")
            return CheckResult(check, "-", np.nan, False, True, np.nan, np.nan, str(e))
        if check == "gaussian-recursion":
            reporting.write_gaussian_rows(os.path.join(self.out_dir, "gaussian_recursion.csv"),
                                          result.details["rows"])
        if not result.passed:
            logger.error(f"{check} FAIL: {result.message}")
        return result

    def run(self):
        started = time.time()
        os.makedirs(self.out_dir, exist_ok=True)
        outcome = RunOutcome(out_dir=self.out_dir)

        if self.config.cell_checks:
            cells = list(self.cells(self.build_instances()))
            logger.info(f"Running {len(cells)} cells with {self.jobs} worker(s)")
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                futures = [pool.submit(self.run_cell, *cell) for cell in cells]
                # collected in submission order so artifacts do not depend on scheduling
                for future in futures:
                    results, summary = future.result()
                    outcome.results += results
                    outcome.summary.append(summary)

        for check in self.config.global_checks:
            outcome.results.append(self.run_global(check))

        outcome.elapsed = time.time() - started
        reporting.write_checks(os.path.join(self.out_dir, "checks.csv"), outcome.results)
        if outcome.summary:
            reporting.write_summary(os.path.join(self.out_dir, "summary.csv"), outcome.summary)
        reporting.write_report(os.path.join(self.out_dir, "report.txt"), self.config, outcome.results,
                               outcome.elapsed)
        logger.info(f"Run {self.config.name!r}: {len(outcome.results)} checks, "
                    f"{len(outcome.hard_failures)} hard failures; artifacts in {self.out_dir}")
        return outcome


def run_experiment(config, out_dir=None, jobs=1):
    return ExperimentRunner(config, out_dir, jobs).run()
