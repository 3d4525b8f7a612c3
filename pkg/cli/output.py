"""
Result files and the run registry.

Every CSV starts with '#' provenance lines (tool version, configuration hash,
seed and the resolved parameters) so a result can be traced back to the
exact configuration that produced it. Read them with
`pandas.read_csv(path, comment='#')`.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import pandas as pd
from django.conf import settings
from django.db import DatabaseError

from sim.models import SimulationRun
from utils.exceptions import (
    BarrierBlowupError, NonFiniteStateError, ScenarioConfigError, SimulationError, UnwindingGuardBreach,
    VerificationFailed,
)

logger = logging.getLogger(__name__)


def status_for(exc: Optional[BaseException]) -> str:
    if exc is None:
        return 'COMPLETED'
    if isinstance(exc, (UnwindingGuardBreach, BarrierBlowupError)):
        return 'UNWINDING_BREACH'
    if isinstance(exc, NonFiniteStateError):
        return 'NON_FINITE'
    if isinstance(exc, VerificationFailed):
        return 'VERIFY_FAILED'
    return 'CONFIG_ERROR'


def exit_code_for(exc: Optional[BaseException]) -> int:
    if exc is None:
        return 0
    return exc.exit_code if isinstance(exc, SimulationError) else 1


def provenance_lines(scenario=None, extra: Optional[Dict] = None) -> List[str]:
    lines = [f'# tool: {settings.TOOL_NAME} {settings.TOOL_VERSION}']
    if scenario is not None:
        lines += [
            f'# config_hash: {scenario.config_hash}',
            f'# seed: {scenario.seed}',
            f'# parameters: {json.dumps(scenario.to_dict(), sort_keys=True)}',
        ]
    for key, value in (extra or {}).items():
        lines.append(f'# {key}: {value}')
    return lines


def write_csv(frame: pd.DataFrame, path: Path, header: Iterable[str], digits: Optional[int] = None) -> Path:
    digits = settings.SIM_CSV_DIGITS if digits is None else digits
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        for line in header:
            handle.write(line + '\n')
        frame.to_csv(handle, index=False, float_format=f'%.{digits}g')
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def trajectory_frame(log, lyapunov=None) -> pd.DataFrame:
    frame = log.to_frame()
    if lyapunov is not None:
        frame['V[-]'] = lyapunov.V_total
        frame['V_z[-]'] = lyapunov.V_z
        frame['R[kg*m^2]'] = lyapunov.scaling.R
    return frame


def write_trajectory(log, path: Path, lyapunov=None, digits: Optional[int] = None) -> Path:
    return write_csv(trajectory_frame(log, lyapunov), path, provenance_lines(log.scenario), digits)


def write_summary(rows: List[Dict], path: Path, scenarios=(), digits: Optional[int] = None) -> Path:
    """One row per run; provenance lists every contributing scenario with its resolved parameters."""
    header = provenance_lines()
    for scenario in scenarios:
        header.append(f'# run: {scenario.label} seed={scenario.seed} config_hash={scenario.config_hash}')
        header.append(f'# parameters[{scenario.label}]: {json.dumps(scenario.to_dict(), sort_keys=True)}')
    return write_csv(pd.DataFrame(rows), path, header, digits)


def write_report(text: str, path: Path, scenario) -> Path:
    """Text report preceded by the same '#' provenance block as the CSV files."""
    path = Path(path)
    path.write_text('\n'.join(provenance_lines(scenario)) + '\n' + text, encoding='utf-8')
    return path


def _json_safe(values: Dict) -> Dict:
    clean = {}
    for key, value in (values or {}).items():
        if hasattr(value, 'item'):
            value = value.item()
        if isinstance(value, float) and value != value:
            value = None
        clean[key] = value
    return clean


def record_run(scenario, command: str, exc: Optional[BaseException] = None, wall_time: Optional[float] = None,
               metrics: Optional[Dict] = None, output_path: str = '') -> Optional[SimulationRun]:
    """Store a registry entry. Registry failures never fail the run itself."""
    try:
        return SimulationRun.objects.create(
            label=scenario.label,
            command=command,
            variant=scenario.variant,
            seed=scenario.seed,
            config_hash=scenario.config_hash,
            status=status_for(exc),
            exit_code=exit_code_for(exc),
            message=getattr(exc, 'message', str(exc)) if exc is not None else '',
            duration=scenario.duration,
            step=scenario.step,
            steps=scenario.steps,
            wall_time=wall_time,
            parameters=scenario.to_dict(),
            metrics=_json_safe(metrics),
            output_path=str(output_path),
        )
    except DatabaseError as exc_db:
        logger.warning(f"Could not record run '{scenario.label}' in the registry: {exc_db}")
        return None


def output_dir(path: Optional[str]) -> Path:
    directory = Path(path) if path else Path(settings.SIM_OUTPUT_DIR)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ScenarioConfigError(f"Cannot create output directory {directory}: {exc}")
    return directory
