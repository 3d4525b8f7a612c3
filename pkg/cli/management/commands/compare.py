"""
Run several scenarios and write aligned norm histories plus a summary table.
"""
import logging
from typing import Dict, List

import pandas as pd
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.jobs import Job, execute_jobs
from cli.output import output_dir, provenance_lines, record_run, status_for, write_csv, write_summary
from cli.scenario_files import load_scenario
from utils.exceptions import ScenarioConfigError

logger = logging.getLogger(__name__)


def unique_names(labels: List[str]) -> List[str]:
    seen: Dict[str, int] = {}
    names = []
    for label in labels:
        seen[label] = seen.get(label, 0) + 1
        names.append(label if seen[label] == 1 else f'{label}_{seen[label]}')
    return names


def aligned_norms(results: List[Dict], names: List[str]) -> pd.DataFrame:
    frames = []
    for name, result in zip(names, results):
        series = result['series']
        if series is None:
            continue
        frame = pd.DataFrame({
            f'{name}:|q_ev|[-]': series['qev_norm'],
            f'{name}:|omega_e|[rad/s]': series['omega_e_norm'],
            f'{name}:|u|[N*m]': series['u_norm'],
            f'{name}:|theta_err|[kg*m^2]': series['theta_err_norm'],
        }, index=pd.Index(series['t'], name='t[s]'))
        frames.append(frame)
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, axis=1).sort_index().reset_index()


class Command(BaseCommand):
    help = 'Run two or more scenarios and compare their tracking and estimation performance'

    def add_arguments(self, parser):
        parser.add_argument('scenarios', nargs='+', help='Scenario files or shipped scenario names')
        parser.add_argument(
            '--out',
            type=str,
            default=None,
            help='Output directory (default: SIM_OUTPUT_DIR)'
        )
        parser.add_argument(
            '--set',
            dest='overrides',
            action='append',
            default=[],
            metavar='SECTION.KEY=VALUE',
            help='Override applied to every scenario; may be repeated'
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=None,
            help='Override the seed of every scenario'
        )
        parser.add_argument(
            '--workers',
            type=int,
            default=None,
            help='Worker processes (default: SIM_WORKERS)'
        )
        parser.add_argument(
            '--window',
            type=float,
            nargs=2,
            default=None,
            metavar=('START', 'END'),
            help='Metrics window in seconds (default: SIM_METRICS_WINDOW_START to the end of each run)'
        )
        parser.add_argument(
            '--name',
            type=str,
            default='compare',
            help='Prefix of the output files (default: compare)'
        )

    def handle(self, *args, **options):
        if len(options['scenarios']) < 2:
            message = 'compare needs at least two scenarios'
            self.stderr.write(self.style.ERROR(f"✗ {message}"))
            raise CommandError(message, returncode=1)

        try:
            scenarios = [load_scenario(name, options['overrides'], options['seed'])
                         for name in options['scenarios']]
        except ScenarioConfigError as exc:
            self.stderr.write(self.style.ERROR(f"✗ {exc.message}"))
            raise CommandError(exc.message, returncode=exc.exit_code)

        window = tuple(options['window']) if options['window'] else (settings.SIM_METRICS_WINDOW_START, None)
        workers = options['workers'] or settings.SIM_WORKERS
        directory = output_dir(options['out'])

        self.stdout.write("\n" + "=" * 60)
        self.stdout.write(self.style.SUCCESS(f"Comparing {len(scenarios)} scenarios"))
        self.stdout.write("=" * 60)

        jobs = [Job(scenario, window=window, pe_threshold=settings.SIM_PE_THRESHOLD,
                    rho=settings.SIM_RHO, r0=settings.SIM_SCALING_R0) for scenario in scenarios]
        results = execute_jobs(jobs, workers)
        names = unique_names([scenario.label for scenario in scenarios])

        rows = []
        for name, scenario, result in zip(names, scenarios, results):
            exc = result['error']
            record_run(scenario, 'compare', exc, wall_time=result['wall_time'], metrics=result['summary'])
            rows.append({
                'name': name, 'label': scenario.label, 'variant': scenario.variant, 'seed': scenario.seed,
                'config_hash': scenario.config_hash, 'status': status_for(exc), 'exit_code': result['exit_code'],
                **result['summary'],
            })
            if exc is None:
                self.stdout.write(self.style.SUCCESS(
                    f"✓ {name}: rms |q_ev| {result['summary'].get('rms_qev', float('nan')):.3e}, "
                    f"rms |theta_err| {result['summary'].get('rms_theta_err', float('nan')):.3e}"
                ))
            else:
                self.stdout.write(self.style.ERROR(f"✗ {name}: {getattr(exc, 'message', exc)}"))

        summary_path = write_summary(rows, directory / f"{options['name']}_summary.csv", scenarios=scenarios)
        norms = aligned_norms(results, names)
        header = provenance_lines() + [
            f'# run: {scenario.label} seed={scenario.seed} config_hash={scenario.config_hash}'
            for scenario in scenarios
        ]
        norms_path = write_csv(norms, directory / f"{options['name']}_norms.csv", header)

        self.stdout.write(f"  Summary: {summary_path}")
        self.stdout.write(f"  Norms:   {norms_path}")
        self.stdout.write("=" * 60 + "\n")

        exit_code = max(result['exit_code'] for result in results)
        if exit_code:
            failed = sum(1 for result in results if result['exit_code'])
            raise CommandError(f"{failed} of {len(results)} runs failed", returncode=exit_code)
