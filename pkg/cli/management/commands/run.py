"""
Run one scenario and write its trajectory, metrics and report.
"""
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.output import output_dir, record_run, write_report, write_summary, write_trajectory
from cli.scenario_files import load_scenario
from diagnostics.report import analyze, render_report
from sim.runner import run_scenario
from utils.exceptions import ScenarioConfigError, SimulationError

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Simulate one scenario file and write trajectory CSV, metrics CSV and a text report'

    def add_arguments(self, parser):
        parser.add_argument('scenario', help='Scenario YAML file, or the name of a shipped scenario')
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
            help='Override one scenario value; may be repeated'
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=None,
            help='Override the scenario seed'
        )
        parser.add_argument(
            '--window',
            type=float,
            nargs=2,
            default=None,
            metavar=('START', 'END'),
            help='Metrics window in seconds (default: the whole run)'
        )
        parser.add_argument(
            '--progress',
            type=int,
            default=0,
            help='Log progress every N steps at DEBUG level (default: 0, off)'
        )

    def handle(self, *args, **options):
        try:
            scenario = load_scenario(options['scenario'], options['overrides'], options['seed'])
        except ScenarioConfigError as exc:
            self.stderr.write(self.style.ERROR(f"✗ {exc.message}"))
            raise CommandError(exc.message, returncode=exc.exit_code)

        directory = output_dir(options['out'])
        t_start, t_end = options['window'] or (0.0, None)

        self.stdout.write("\n" + "=" * 60)
        self.stdout.write(self.style.SUCCESS(f"Running scenario '{scenario.label}'"))
        self.stdout.write("=" * 60)
        self.stdout.write(f"Variant: {scenario.variant}  duration: {scenario.duration} s  "
                          f"step: {scenario.step} s  seed: {scenario.seed}")

        try:
            log = run_scenario(scenario, progress=options['progress'] or None)
        except SimulationError as exc:
            record_run(scenario, 'run', exc)
            self.stderr.write(self.style.ERROR(f"✗ {exc.message}"))
            raise CommandError(exc.message, returncode=exc.exit_code)

        analysis = analyze(log, t_start=t_start, t_end=t_end, rho=settings.SIM_RHO,
                           r0=settings.SIM_SCALING_R0, pe_threshold=settings.SIM_PE_THRESHOLD)
        summary = analysis.summary()

        trajectory_path = write_trajectory(log, directory / f'{scenario.label}.csv', analysis.lyapunov)
        write_summary([{'label': scenario.label, 'seed': scenario.seed, **summary}],
                      directory / f'{scenario.label}_metrics.csv', scenarios=[scenario])
        report_path = directory / f'{scenario.label}_report.txt'
        write_report(render_report(analysis, scenario), report_path, scenario)

        record_run(scenario, 'run', wall_time=log.wall_time, metrics=summary, output_path=str(trajectory_path))

        self.stdout.write(self.style.SUCCESS(f"✓ {len(log)} samples in {log.wall_time:.2f}s"))
        self.stdout.write(f"  rms |q_ev|      {summary.get('rms_qev', float('nan')):.3e}")
        self.stdout.write(f"  rms |omega_e|   {summary.get('rms_omega_e', float('nan')):.3e}")
        self.stdout.write(f"  rms |theta_err| {summary.get('rms_theta_err', float('nan')):.3e}")
        self.stdout.write(f"  Trajectory: {trajectory_path}")
        self.stdout.write(f"  Report:     {report_path}")
        self.stdout.write("=" * 60 + "\n")
