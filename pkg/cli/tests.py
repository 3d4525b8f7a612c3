import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from cli.scenario_files import (
    apply_overrides, flatten_errors, load_scenario, parse_override, resolve_scenario_path,
)
from cli.serializers import ScenarioSerializer
from controller.gains import ControllerGains
from regressor import pde
from sim.models import SimulationRun
from sim.scenario import initial_attitude
from utils.exceptions import ScenarioConfigError


def read_result(path):
    return pd.read_csv(path, comment='#')


def header_lines(path):
    with open(path, encoding='utf-8') as handle:
        return [line.rstrip('\n') for line in handle if line.startswith('#')]


class ScenarioSerializerTests(SimpleTestCase):

    def validate(self, data):
        serializer = ScenarioSerializer(data=data, context={'default_step': 0.01, 'default_label': 'x'})
        return serializer.is_valid(), serializer

    def test_empty_file_uses_defaults(self):
        valid, serializer = self.validate({})
        self.assertTrue(valid, serializer.errors)
        values = serializer.validated_data
        self.assertEqual(values['label'], 'x')
        self.assertEqual(values['step'], 0.01)
        self.assertEqual(values['controller']['lambda'], 0.01)
        self.assertEqual(values['initial']['case'], 1)
        self.assertFalse(values['estimator']['pin_omega_hat'])
        self.assertIsNone(values['noise'])

    def test_unknown_key_rejected(self):
        valid, serializer = self.validate({'controller': {'gamam': 3.0}})
        self.assertFalse(valid)
        self.assertIn('gamam', serializer.errors['controller'])

    def test_case_and_quaternion_are_exclusive(self):
        valid, serializer = self.validate({'initial': {'case': 1, 'q': [0, 0, 0, 1]}})
        self.assertFalse(valid)
        self.assertIn('q', serializer.errors['initial'])

    def test_variant_gain_consistency(self):
        self.assertFalse(self.validate({'estimator': {'variant': 'exponential', 'lambda1': 0.01}})[0])
        self.assertFalse(self.validate({'estimator': {'variant': 'finite_time', 'lambda1': 0.0}})[0])
        self.assertFalse(self.validate({'estimator': {'variant': 'fixed_time', 'lambda1': 0.01}})[0])
        self.assertTrue(self.validate({'estimator': {'variant': 'fixed_time', 'lambda1': 0.01,
                                                     'lambda2': 0.01}})[0])

    def test_singular_inertia_rejected(self):
        valid, serializer = self.validate({'plant': {'theta_true': [1, 1, 0, 0, 0, 0]}})
        self.assertFalse(valid)
        self.assertIn('theta_true', serializer.errors['plant'])

    def test_duration_shorter_than_step(self):
        self.assertFalse(self.validate({'duration': 0.005, 'step': 0.01})[0])
        self.assertTrue(self.validate({'duration': 0.0, 'step': 0.01})[0])

    def test_vector_length(self):
        valid, serializer = self.validate({'initial': {'omega': [0.0, 0.0]}})
        self.assertFalse(valid)
        self.assertIn('omega', serializer.errors['initial'])


class ScenarioFileTests(SimpleTestCase):

    def test_parse_override(self):
        self.assertEqual(parse_override('controller.gamma=30'), (['controller', 'gamma'], 30))
        self.assertEqual(parse_override('initial.q=[0, 0, 0, 1]'), (['initial', 'q'], [0, 0, 0, 1]))
        with self.assertRaises(ScenarioConfigError):
            parse_override('controller.gamma')

    def test_overrides_do_not_mutate_input(self):
        data = {'controller': {'gamma': 25.0}}
        updated = apply_overrides(data, ['controller.gamma=10', 'drem.k_N=64', 'duration=5'])
        self.assertEqual(data['controller']['gamma'], 25.0)
        self.assertEqual(updated['controller']['gamma'], 10)
        self.assertEqual(updated['drem']['k_N'], 64)
        self.assertEqual(updated['duration'], 5)

    def test_shipped_scenario_matches_defaults(self):
        scenario = load_scenario('nominal_case1')
        self.assertEqual(scenario.label, 'nominal_case1')
        self.assertEqual(scenario.gains, ControllerGains())
        self.assertEqual(scenario.q0, initial_attitude(1))
        self.assertEqual(scenario.steps, 4000)
        self.assertIsNone(scenario.noise)

    def test_noise_seed_follows_scenario_seed(self):
        scenario = load_scenario('perturbed_case2', seed=7)
        self.assertEqual(scenario.seed, 7)
        self.assertEqual(scenario.noise.seed, 7)
        self.assertTrue(scenario.disturbance)

    def test_every_shipped_scenario_loads(self):
        for name in ('nominal_case1', 'nominal_case2', 'finite_time', 'fixed_time', 'perturbed_case2',
                     'perturbed_ce_baseline', 'nominal_ce_baseline', 'excitation_cutoff', 'pure_ii'):
            self.assertEqual(load_scenario(name).label, name)

    def test_baseline_scenarios_share_default_adaptation_gain(self):
        for name in ('nominal_ce_baseline', 'perturbed_ce_baseline'):
            scenario = load_scenario(name)
            self.assertTrue(scenario.is_baseline)
            self.assertEqual(scenario.gains.gamma_ce, ControllerGains().gamma_ce)
            self.assertEqual(scenario.duration, 100.0)
            self.assertFalse(scenario.pin_omega_hat)

    def test_pure_immersion_scenario_pins_filter_state(self):
        scenario = load_scenario('pure_ii')
        self.assertTrue(scenario.pin_omega_hat)
        self.assertEqual(scenario.gains.lam, 0.0)

    def test_missing_file(self):
        with self.assertRaises(ScenarioConfigError):
            resolve_scenario_path('no_such_scenario')

    def test_flatten_nested_errors(self):
        flat = flatten_errors({'initial': {'q': {1: ['A valid number is required.']}},
                               'non_field_errors': ['bad']})
        self.assertIn((('initial', 'q', 1), 'A valid number is required.'), flat)
        self.assertIn(((), 'bad'), flat)


class CommandTestCase(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_scenario(self, name, text):
        path = self.out / name
        path.write_text(text, encoding='utf-8')
        return str(path)

    def call(self, *args, **kwargs):
        stdout, stderr = StringIO(), StringIO()
        call_command(*args, stdout=stdout, stderr=stderr, **kwargs)
        return stdout.getvalue()

    def assertExitCode(self, code, *args, **kwargs):
        with self.assertRaises(CommandError) as ctx:
            self.call(*args, **kwargs)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class RunCommandTests(CommandTestCase):

    def test_nominal_run_writes_results(self):
        output = self.call('run', 'nominal_case1', out=str(self.out))
        self.assertIn('nominal_case1', output)

        trajectory = self.out / 'nominal_case1.csv'
        frame = read_result(trajectory)
        self.assertEqual(len(frame), 4001)
        self.assertIn('t[s]', frame.columns)
        self.assertIn('q_e_4[-]', frame.columns)
        self.assertIn('V[-]', frame.columns)

        header = header_lines(trajectory)
        self.assertTrue(header[0].startswith('# tool: attitude-lab'))
        self.assertTrue(any(line.startswith('# config_hash: ') for line in header))
        self.assertIn('# seed: 0', header)

        metrics_path = self.out / 'nominal_case1_metrics.csv'
        metrics = read_result(metrics_path)
        self.assertEqual(len(metrics), 1)
        metrics_header = header_lines(metrics_path)
        self.assertTrue(metrics_header[0].startswith('# tool: attitude-lab'))
        parameters = [line for line in metrics_header if line.startswith('# parameters[nominal_case1]: ')]
        self.assertEqual(len(parameters), 1)
        resolved = json.loads(parameters[0].split(': ', 1)[1])
        self.assertEqual(resolved['drem']['k_I'], 1e9)
        self.assertTrue(any('seed=0' in line for line in metrics_header))

        report = (self.out / 'nominal_case1_report.txt').read_text(encoding='utf-8').splitlines()
        self.assertTrue(report[0].startswith('# tool: attitude-lab'))
        self.assertIn('# seed: 0', report)
        self.assertTrue(any(line.startswith('# parameters: ') for line in report))
        self.assertIn('Run report: nominal_case1', '\n'.join(report))

        run = SimulationRun.objects.get(label='nominal_case1')
        self.assertEqual(run.status, 'COMPLETED')
        self.assertEqual(run.exit_code, 0)
        self.assertEqual(run.steps, 4000)
        self.assertEqual(len(run.config_hash), 64)
        self.assertIn('rms_qev', run.metrics)

    def test_overrides_and_seed(self):
        self.call('run', 'nominal_case2', out=str(self.out), overrides=['duration=1.0'], seed=5)
        frame = read_result(self.out / 'nominal_case2.csv')
        self.assertEqual(len(frame), 101)
        self.assertIn('# seed: 5', header_lines(self.out / 'nominal_case2.csv'))

    def test_malformed_value_reports_line(self):
        path = self.write_scenario('bad_gain.yaml', 'label: bad\nduration: 1.0\ncontroller:\n  gamma: -3\n')
        error = self.assertExitCode(1, 'run', path, out=str(self.out))
        self.assertIn(f'{path}:4: controller.gamma', str(error))

    def test_unknown_key_reports_line(self):
        path = self.write_scenario('typo.yaml', 'label: typo\ndrem:\n  a: 5.0\n  kN: 8\n')
        error = self.assertExitCode(1, 'run', path, out=str(self.out))
        self.assertIn(f'{path}:4: drem.kN', str(error))

    def test_yaml_syntax_error(self):
        path = self.write_scenario('broken.yaml', 'label: broken\ncontroller:\n  gamma: [1, 2\n')
        error = self.assertExitCode(1, 'run', path, out=str(self.out))
        self.assertIn('YAML syntax error', str(error))

    def test_outside_permissible_set(self):
        path = self.write_scenario('edge.yaml', 'label: edge\nduration: 1.0\ninitial:\n  q: [1.0, 0.0, 0.0, 1.0e-8]\n')
        self.assertExitCode(1, 'run', path, out=str(self.out))
        run = SimulationRun.objects.get(label='edge')
        self.assertEqual(run.status, 'CONFIG_ERROR')
        self.assertEqual(run.exit_code, 1)

    def test_unwinding_guard_breach(self):
        path = self.write_scenario(
            'near.yaml',
            'label: near\nduration: 1.0\ninitial:\n  q: [1.0, 0.0, 0.0, 5.0e-6]\n'
            'controller:\n  unwinding_guard: 1.0e-5\n',
        )
        self.assertExitCode(2, 'run', path, out=str(self.out))
        self.assertEqual(SimulationRun.objects.get(label='near').status, 'UNWINDING_BREACH')

    def test_zero_duration(self):
        self.call('run', 'nominal_case1', out=str(self.out), overrides=['duration=0'])
        self.assertEqual(len(read_result(self.out / 'nominal_case1.csv')), 1)


class VerifyCommandTests(CommandTestCase):

    def test_all_checks_pass(self):
        output = self.call('verify')
        self.assertIn('All', output)
        self.assertEqual(SimulationRun.objects.get(command='verify').status, 'COMPLETED')

    def test_corrupted_pde_solution_fails(self):
        original = pde.mu2

        def corrupted(*args):
            return 1.01 * original(*args)

        with mock.patch('regressor.pde.mu2', side_effect=corrupted):
            error = self.assertExitCode(4, 'verify')
        self.assertIn('dmu/domega', str(error))
        self.assertEqual(SimulationRun.objects.get(command='verify').status, 'VERIFY_FAILED')


class CompareCommandTests(CommandTestCase):

    def test_needs_two_scenarios(self):
        self.assertExitCode(1, 'compare', 'nominal_case1', out=str(self.out))

    def test_compare_writes_aligned_norms(self):
        self.call('compare', 'nominal_case1', 'nominal_ce_baseline', out=str(self.out),
                  overrides=['duration=2.0'], workers=1)
        summary = read_result(self.out / 'compare_summary.csv')
        self.assertEqual(list(summary['label']), ['nominal_case1', 'nominal_ce_baseline'])
        self.assertIn('seed', summary.columns)
        self.assertTrue((summary['exit_code'] == 0).all())

        norms_path = self.out / 'compare_norms.csv'
        norms = read_result(norms_path)
        self.assertEqual(len(norms), 201)
        self.assertIn('nominal_case1:|theta_err|[kg*m^2]', norms.columns)
        self.assertIn('nominal_ce_baseline:|q_ev|[-]', norms.columns)
        runs = [line for line in header_lines(norms_path) if line.startswith('# run: ')]
        self.assertEqual(len(runs), 2)
        self.assertEqual(SimulationRun.objects.filter(command='compare').count(), 2)

    def test_duplicate_labels_get_distinct_columns(self):
        self.call('compare', 'nominal_case1', 'nominal_case1', out=str(self.out),
                  overrides=['duration=0.5'], workers=2)
        norms = read_result(self.out / 'compare_norms.csv')
        self.assertIn('nominal_case1_2:|u|[N*m]', norms.columns)

    def test_failed_run_sets_exit_code(self):
        path = self.write_scenario('near.yaml', 'label: near\ninitial:\n  q: [1.0, 0.0, 0.0, 5.0e-7]\n')
        self.assertExitCode(1, 'compare', 'nominal_case1', path, out=str(self.out),
                            overrides=['duration=0.5'], workers=1)


class SweepCommandTests(CommandTestCase):

    def test_cartesian_product(self):
        self.call('sweep', 'nominal_case1', out=str(self.out), workers=1,
                  grid=['controller.gamma=10,25,40', 'controller.lambda=0.005,0.01'],
                  overrides=['duration=1.0'])
        summary = read_result(self.out / 'sweep_summary.csv')
        self.assertEqual(len(summary), 6)
        self.assertEqual(sorted(set(summary['controller.gamma'])), [10, 25, 40])
        self.assertEqual(len(set(summary['config_hash'])), 6)

    def test_empty_grid(self):
        self.assertExitCode(1, 'sweep', 'nominal_case1', out=str(self.out))
        self.assertExitCode(1, 'sweep', 'nominal_case1', out=str(self.out), grid=['drem.k_N='])

    def test_invalid_grid_value(self):
        self.assertExitCode(1, 'sweep', 'nominal_case1', out=str(self.out), grid=['controller.gamma=-1,2'])

    def test_stronger_extension_settles_no_later(self):
        self.call('sweep', 'nominal_case1', out=str(self.out), workers=1,
                  grid=['drem.k_N=1,8,64'], overrides=['duration=20.0'])
        summary = read_result(self.out / 'sweep_summary.csv').sort_values('drem.k_N')
        times = [float('inf') if pd.isna(t) else t for t in summary['T_s_detected']]
        self.assertLess(times[-1], float('inf'))
        self.assertEqual(times, sorted(times, reverse=True))


class ListRunsCommandTests(CommandTestCase):

    def test_empty_registry(self):
        self.assertIn('No runs recorded', self.call('list_runs'))

    def test_lists_and_filters(self):
        self.call('run', 'nominal_case1', out=str(self.out), overrides=['duration=0.5'])
        path = self.write_scenario('edge.yaml', 'label: edge\ninitial:\n  q: [1.0, 0.0, 0.0, 1.0e-8]\n')
        with self.assertRaises(CommandError):
            self.call('run', path, out=str(self.out))

        output = self.call('list_runs')
        self.assertIn('nominal_case1', output)
        self.assertIn('edge', output)
        filtered = self.call('list_runs', status='CONFIG_ERROR')
        self.assertIn('edge', filtered)
        self.assertNotIn('nominal_case1', filtered)
        self.assertEqual(len(self.call('list_runs', limit=1).strip().splitlines()), 1)
