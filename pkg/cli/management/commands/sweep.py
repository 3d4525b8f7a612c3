"""
Cartesian parameter sweep over one scenario.
"""
import itertools
import logging
from typing import List, Tuple

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.jobs import Job, execute_jobs
from cli.output import output_dir, record_run, status_for, write_summary
from cli.scenario_files import load_scenario
from utils.exceptions import ScenarioConfigError

logger = logging.getLogger(__name__)


def parse_grid(entries: List[str]) -> List[Tuple[str, List[str]]]:
    """`controller.gamma=10,25` -> [('controller.gamma', ['10', '25'])]."""
    grid = []
    for entry in entries or ():
        if '=' not in entry:
            raise ScenarioConfigError(f"Grid entry '{entry}' must look like section.key=v1,v2,...")
        key, raw = entry.split('=', 1)
        values = [value.strip() for value in raw.split(',') if value.strip()]
        if not key.strip() or not values:
            raise ScenarioConfigError(f"Grid entry '{entry}' has no values")
        grid.append((key.strip(), values))
    if not grid:
        raise ScenarioConfigError("The sweep grid is empty; give at least one --grid key=v1,v2")
    return grid


class Command(BaseCommand):
    help = 'Sweep a scenario over the Cartesian product of parameter values'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Scenario file or shipped scenario name')
        parser.add_argument(
            '--grid',
            action='append',
            default=[],
            metavar='SECTION.KEY=V1,V2,...',
            help='Values for one parameter; repeat for more axes'
        )
        parser.add_argument(
            '--set',
            dest='overrides',
            action='append',
            default=[],
            metavar='SECTION.KEY=VALUE',
            help='Fixed override applied to every grid point'
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=None,
            help='Override the scenario seed'
        )
        parser.add_argument(
            '--out',
            type=str,
            default=None,
            help='Output directory (default: SIM_OUTPUT_DIR)'
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
            default='sweep',
            help='Prefix of the output file (default: sweep)'
        )

    def handle(self, *args, **options):
        try:
            grid = parse_grid(options['grid'])
            points = list(itertools.product(*[values for _, values in grid]))
            scenarios = []
            for point in points:
                assignments = [f'{key}={value}' for (key, _), value in zip(grid, point)]
                scenario = load_scenario(options['scenario'], options['overrides'] + assignments, options['seed'])
                scenarios.append((point, scenario))
        except ScenarioConfigError as exc:
            self.stderr.write(self.style.ERROR(f"✗ {exc.message}"))
            raise CommandError(exc.message, returncode=exc.exit_code)

        keys = [key for key, _ in grid]
        window = tuple(options['window']) if options['window'] else (settings.SIM_METRICS_WINDOW_START, None)
        workers = options['workers'] or settings.SIM_WORKERS
        directory = output_dir(options['out'])

        self.stdout.write("\n" + "=" * 60)
        self.stdout.write(self.style.SUCCESS(f"Sweeping {', '.join(keys)} over {len(points)} points"))
        self.stdout.write("=" * 60)

        jobs = [Job(scenario, window=window, pe_threshold=settings.SIM_PE_THRESHOLD, rho=settings.SIM_RHO,
                    r0=settings.SIM_SCALING_R0, extra=dict(zip(keys, point)))
                for point, scenario in scenarios]
        results = execute_jobs(jobs, workers)

        rows = []
        for (point, scenario), result in zip(scenarios, results):
            exc = result['error']
            record_run(scenario, 'sweep', exc, wall_time=result['wall_time'], metrics=result['summary'])
            row = dict(zip(keys, point))
            row.update({'label': scenario.label, 'seed': scenario.seed, 'config_hash': scenario.config_hash,
                        'status': status_for(exc), 'exit_code': result['exit_code']})
            row.update(result['summary'])
            rows.append(row)
            settings_text = ', '.join(f'{key}={value}' for key, value in zip(keys, point))
            if exc is None:
                self.stdout.write(self.style.SUCCESS(f"✓ {settings_text}"))
            else:
                self.stdout.write(self.style.ERROR(f"✗ {settings_text}: {getattr(exc, 'message', exc)}"))

        summary_path = write_summary(rows, directory / f"{options['name']}_summary.csv",
                                     scenarios=[scenario for _, scenario in scenarios])
        self.stdout.write(f"  Summary: {summary_path}")
        self.stdout.write("=" * 60 + "\n")

        exit_code = max(result['exit_code'] for result in results)
        if exit_code:
            failed = sum(1 for result in results if result['exit_code'])
            raise CommandError(f"{failed} of {len(results)} grid points failed", returncode=exit_code)
