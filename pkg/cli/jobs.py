"""
Independent scenario runs for compare and sweep.

`execute_job` is a module-level function so it can be pickled into a
ProcessPoolExecutor worker. Each job returns a plain dict; the trajectory
itself stays in the worker and only the summary and norm series come back.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from diagnostics.report import analyze
from drem.monitor import DEFAULT_PE_THRESHOLD
from sim.runner import run_scenario
from sim.scenario import Scenario
from utils.exceptions import SimulationError

logger = logging.getLogger(__name__)


@dataclass
class Job:
    scenario: Scenario
    window: Tuple[float, Optional[float]] = (0.0, None)
    pe_threshold: float = DEFAULT_PE_THRESHOLD
    rho: float = 1.0
    r0: float = 0.1
    extra: Dict = field(default_factory=dict)


def norm_series(log) -> Dict[str, np.ndarray]:
    return {
        't': log.t[:len(log)].copy(),
        'qev_norm': np.linalg.norm(log['q_e'][:, :3], axis=1),
        'omega_e_norm': np.linalg.norm(log['omega_e'], axis=1),
        'u_norm': np.linalg.norm(log['u'], axis=1),
        'theta_err_norm': np.linalg.norm(log['theta_err'], axis=1),
    }


def execute_job(job: Job) -> Dict:
    scenario = job.scenario
    started = time.perf_counter()
    result = {'label': scenario.label, 'seed': scenario.seed, 'extra': job.extra,
              'exit_code': 0, 'error': None, 'summary': {}, 'series': None}
    try:
        log = run_scenario(scenario)
        t_start, t_end = job.window
        analysis = analyze(log, t_start=t_start, t_end=t_end, rho=job.rho, r0=job.r0,
                           pe_threshold=job.pe_threshold)
        result['summary'] = analysis.summary()
        result['series'] = norm_series(log)
    except SimulationError as exc:
        result['exit_code'] = exc.exit_code
        result['error'] = exc
    result['wall_time'] = time.perf_counter() - started
    return result


def execute_jobs(jobs: List[Job], workers: int = 1) -> List[Dict]:
    """Run jobs in order; results come back in job order."""
    if workers <= 1 or len(jobs) <= 1:
        return [execute_job(job) for job in jobs]
    logger.info(f"Dispatching {len(jobs)} runs to {workers} worker processes")
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(execute_job, jobs))
