"""
Run the identity and bound checks and print a pass/fail table.
"""
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.output import record_run
from diagnostics.checks import run_checks
from sim.scenario import Scenario
from utils.exceptions import ScenarioConfigError, VerificationFailed

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Verify the regressor identities, the PDE solution, the DREM algebra and the barrier bounds'

    def add_arguments(self, parser):
        parser.add_argument(
            '--duration',
            type=float,
            default=10.0,
            help='Length of the nominal run used by the trajectory checks in seconds (default: 10)'
        )
        parser.add_argument(
            '--threshold',
            type=float,
            default=None,
            help='Delta_N excitation threshold (default: SIM_PE_THRESHOLD)'
        )

    def handle(self, *args, **options):
        threshold = options['threshold'] if options['threshold'] is not None else settings.SIM_PE_THRESHOLD
        try:
            registry_entry = Scenario(label='verify', duration=options['duration'])
        except ScenarioConfigError as exc:
            raise CommandError(exc.message, returncode=exc.exit_code)

        self.stdout.write("\n" + "=" * 60)
        self.stdout.write(self.style.SUCCESS("Verification suite"))
        self.stdout.write("=" * 60)

        results = run_checks(duration=options['duration'], threshold=threshold)

        self.stdout.write(f"{'check':<36} {'status':<6} {'deviation':>10} {'tolerance':>10}")
        self.stdout.write("-" * 66)
        for result in results:
            mark = self.style.SUCCESS('✓ PASS') if result.passed else self.style.ERROR('✗ FAIL')
            self.stdout.write(f"{result.name:<36} {mark} {result.deviation:>10.3e} {result.tolerance:>10.3e}")
            if result.detail:
                self.stdout.write(f"    {result.detail}")

        failed = [result.name for result in results if not result.passed]
        exc = VerificationFailed(f"{len(failed)} check(s) failed: {', '.join(failed)}",
                                 details={'failed': failed}) if failed else None
        record_run(registry_entry, 'verify', exc,
                   metrics={'passed': len(results) - len(failed), 'failed': len(failed)})

        self.stdout.write("=" * 60)
        if exc is not None:
            logger.error(exc.message)
            self.stdout.write(self.style.ERROR(f"✗ {exc.message}"))
            raise CommandError(exc.message, returncode=exc.exit_code)
        self.stdout.write(self.style.SUCCESS(f"✓ All {len(results)} checks passed"))
        self.stdout.write("=" * 60 + "\n")
