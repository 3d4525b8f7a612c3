from django.core.management.base import BaseCommand

from sim.models import SimulationRun


class Command(BaseCommand):
    help = 'List recorded simulation runs, newest first'

    def add_arguments(self, parser):
        parser.add_argument(
            '--label',
            type=str,
            help='Show only runs whose label contains this text',
        )
        parser.add_argument(
            '--status',
            type=str,
            choices=[code for code, _ in SimulationRun.STATUS_CHOICES],
            help='Show only runs with this status',
        )
        parser.add_argument(
            '--limit',
            type=int,
            default=20,
            help='Maximum number of runs to show (default: 20)',
        )

    def handle(self, *args, **options):
        runs = SimulationRun.objects.all()
        if options.get('label'):
            runs = runs.filter(label__icontains=options['label'])
        if options.get('status'):
            runs = runs.filter(status=options['status'])
        runs = runs[:options['limit']]

        if not runs:
            self.stdout.write(self.style.WARNING('No runs recorded.'))
            return

        for run in runs:
            mark = '✓' if run.succeeded else '✗'
            wall = f"{run.wall_time:.2f}s" if run.wall_time is not None else '-'
            self.stdout.write(
                f"{mark} #{run.id} {run.created_at:%Y-%m-%d %H:%M:%S} {run.command:<8} {run.label} "
                f"[{run.variant}, seed={run.seed}] {run.status} exit={run.exit_code} "
                f"wall={wall} hash={run.config_hash[:12]}"
            )
