from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('label', models.CharField(help_text='Scenario label', max_length=200)),
                ('command', models.CharField(choices=[('run', 'run'), ('compare', 'compare'), ('sweep', 'sweep'), ('verify', 'verify')], default='run', max_length=20)),
                ('variant', models.CharField(blank=True, help_text='Estimator variant', max_length=30)),
                ('seed', models.BigIntegerField(default=0)),
                ('config_hash', models.CharField(blank=True, help_text='sha256 of the resolved parameters', max_length=64)),
                ('status', models.CharField(choices=[('COMPLETED', 'Completed'), ('UNWINDING_BREACH', 'Unwinding guard breach'), ('NON_FINITE', 'Non-finite state'), ('CONFIG_ERROR', 'Configuration error'), ('VERIFY_FAILED', 'Verification failed')], default='COMPLETED', max_length=20)),
                ('exit_code', models.IntegerField(default=0)),
                ('message', models.TextField(blank=True, help_text='Error message for failed runs')),
                ('duration', models.FloatField(default=0.0, help_text='Simulated time in seconds')),
                ('step', models.FloatField(default=0.01, help_text='RK4 step in seconds')),
                ('steps', models.IntegerField(default=0)),
                ('wall_time', models.FloatField(blank=True, help_text='Wall-clock seconds', null=True)),
                ('parameters', models.JSONField(default=dict, help_text='Resolved scenario parameters')),
                ('metrics', models.JSONField(blank=True, default=dict)),
                ('output_path', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Simulation Run',
                'verbose_name_plural': 'Simulation Runs',
                'db_table': 'sim_simulationrun',
                'ordering': ['-created_at'],
            },
        ),
    ]
