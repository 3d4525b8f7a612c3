"""
Post-run analysis bundle and its plain-text report.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from diagnostics.fits import exponential_envelope_fit
from diagnostics.lyapunov import LyapunovSeries, lyapunov_series, sandwich_violation
from diagnostics.metrics import metrics
from diagnostics.settling import SettlingBounds, convergence_time, settling_bounds
from drem.monitor import DEFAULT_PE_THRESHOLD

logger = logging.getLogger(__name__)


@dataclass
class RunAnalysis:
    label: str
    metrics: Dict
    lyapunov: LyapunovSeries
    envelope: Optional[Tuple[float, float]] = None
    bounds: Optional[SettlingBounds] = None
    convergence_time: Optional[float] = None
    V_increase: float = 0.0
    sandwich_gap: float = 0.0
    extras: Dict = field(default_factory=dict)

    def summary(self) -> Dict:
        """Flat row for CSV summaries and the run registry."""
        row = dict(self.metrics)
        row['V_max_increase'] = self.V_increase
        row['sandwich_gap'] = self.sandwich_gap
        row['envelope_rate'] = self.envelope[0] if self.envelope else None
        row['envelope_r2'] = self.envelope[1] if self.envelope else None
        row['theta_convergence_time'] = self.convergence_time
        row['finite_time_bound'] = self.bounds.finite if self.bounds else None
        row['fixed_time_bound'] = self.bounds.fixed if self.bounds else None
        row['scaling_saturated'] = self.lyapunov.scaling.saturated
        return row


def analyze(log, t_start: float = 0.0, t_end: Optional[float] = None, rho: float = 1.0,
            r0: float = 0.1, pe_threshold: float = DEFAULT_PE_THRESHOLD,
            convergence_threshold: float = 1e-3) -> RunAnalysis:
    scenario = log.scenario
    gains = scenario.gains
    t = log.t[:len(log)]
    t_end = float(t[-1]) if t_end is None else min(t_end, float(t[-1]))
    t_start = min(t_start, t_end)

    if t_end > t_start:
        run_metrics = metrics(log, t_start, t_end, pe_threshold)
    else:
        run_metrics = metrics(log, 0.0, float(t[-1]), pe_threshold) if t.size > 1 else {}
    series = lyapunov_series(log, scenario.theta_true, gains, rho=rho, r0=r0)

    analysis = RunAnalysis(
        label=scenario.label,
        metrics=run_metrics,
        lyapunov=series,
        V_increase=series.non_increase_violation(),
        sandwich_gap=sandwich_violation(series, gains.gamma, log['q_e'][:, 3]),
        convergence_time=convergence_time(t, log['theta_err'], convergence_threshold),
    )

    T_s = run_metrics.get('T_s_detected')
    hbar = run_metrics.get('hbar')
    if T_s is not None and hbar:
        after = t >= T_s
        try:
            analysis.envelope = exponential_envelope_fit(t, series.V_total, T_s)
        except ValueError as exc:
            logger.debug(f"No envelope fit for '{scenario.label}': {exc}")
        index = int(np.flatnonzero(after)[0])
        R_m = float(series.scaling.R[after].min())
        analysis.bounds = settling_bounds(gains, hbar, float(series.V_z[index]), R_m, T_s)
    return analysis


def _fmt(value) -> str:
    if value is None:
        return 'n/a'
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    if isinstance(value, float):
        return f'{value:.6g}'
    return str(value)


def render_report(analysis: RunAnalysis, scenario) -> str:
    gains = scenario.gains
    lines = [
        '=' * 60,
        f'Run report: {scenario.label}',
        '=' * 60,
        f'variant        {scenario.variant}',
        f'duration       {scenario.duration} s  (h = {scenario.step} s, seed = {scenario.seed})',
        f'config hash    {scenario.config_hash}',
        '',
        'Gains',
        '-' * 60,
    ]
    for key, value in gains.as_dict().items():
        lines.append(f'  {key:<10} {_fmt(value)}')
    lines += ['', 'Metrics', '-' * 60]
    for key, value in analysis.summary().items():
        lines.append(f'  {key:<24} {_fmt(value)}')
    lines += [
        '',
        f'Lyapunov: eta = {analysis.lyapunov.eta:.6g}, barrier weight = {analysis.lyapunov.barrier_weight:g} '
        f'(configured alpha = {analysis.lyapunov.alpha:g})',
    ]
    if analysis.lyapunov.scaling.saturated:
        lines.append(f'Scaling saturated at t = {analysis.lyapunov.scaling.saturation_time:.3f} s')
    lines.append('=' * 60)
    return '\n'.join(lines) + '\n'
