from django.db import models


class SimulationRun(models.Model):
    """
    Registry entry for every run started from the command line.
    """
    STATUS_CHOICES = [
        ('COMPLETED', 'Completed'),
        ('UNWINDING_BREACH', 'Unwinding guard breach'),
        ('NON_FINITE', 'Non-finite state'),
        ('CONFIG_ERROR', 'Configuration error'),
        ('VERIFY_FAILED', 'Verification failed'),
    ]

    COMMAND_CHOICES = [
        ('run', 'run'),
        ('compare', 'compare'),
        ('sweep', 'sweep'),
        ('verify', 'verify'),
    ]

    label = models.CharField(max_length=200, help_text="Scenario label")
    command = models.CharField(max_length=20, choices=COMMAND_CHOICES, default='run')
    variant = models.CharField(max_length=30, blank=True, help_text="Estimator variant")
    seed = models.BigIntegerField(default=0)
    config_hash = models.CharField(max_length=64, blank=True, help_text="sha256 of the resolved parameters")
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='COMPLETED')
    exit_code = models.IntegerField(default=0)
    message = models.TextField(blank=True, help_text="Error message for failed runs")

    duration = models.FloatField(default=0.0, help_text="Simulated time in seconds")
    step = models.FloatField(default=0.01, help_text="RK4 step in seconds")
    steps = models.IntegerField(default=0)
    wall_time = models.FloatField(null=True, blank=True, help_text="Wall-clock seconds")

    parameters = models.JSONField(default=dict, help_text="Resolved scenario parameters")
    metrics = models.JSONField(default=dict, blank=True)
    output_path = models.CharField(max_length=500, blank=True)

    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'sim_simulationrun'
        ordering = ['-created_at']
        verbose_name = 'Simulation Run'
        verbose_name_plural = 'Simulation Runs'

    def __str__(self):
        return f"{self.label} ({self.command}, {self.status})"

    @property
    def succeeded(self):
        return self.status == 'COMPLETED'
