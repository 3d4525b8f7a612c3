"""
Scenario-file validation.

One serializer per YAML section. Every serializer is strict: keys it does not
declare are rejected instead of being silently ignored.
"""
import numpy as np
from rest_framework import serializers

from attmath.inertia import InertiaParams
from utils.constants import (
    CONE_HALF_ANGLE_DEG, DEFAULT_DREM, DEFAULT_GAINS, ESTIMATOR_VARIANTS, GYRO_STD, THETA_ESTIMATE_0,
    THETA_TRUE,
)
from utils.exceptions import SingularInertiaError

ZERO3 = [0.0, 0.0, 0.0]
ZERO6 = [0.0] * 6


def vector_field(size, **kwargs):
    return serializers.ListField(child=serializers.FloatField(), min_length=size, max_length=size, **kwargs)


def positive(value, name):
    if value <= 0:
        raise serializers.ValidationError(f"{name} must be positive")
    return value


class StrictSerializer(serializers.Serializer):
    """Rejects keys that are not declared fields."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Unknown key.'] for key in unknown})
        return super().to_internal_value(data)


class InitialSerializer(StrictSerializer):
    case = serializers.ChoiceField(choices=[1, 2], required=False)
    q = vector_field(4, required=False)
    omega = vector_field(3, default=ZERO3)
    theta_estimate = vector_field(6, default=list(THETA_ESTIMATE_0))
    chi0 = vector_field(6, default=ZERO6)

    def validate_q(self, value):
        if np.linalg.norm(value) < 1e-12:
            raise serializers.ValidationError("Attitude quaternion must be non-zero")
        return value

    def validate(self, data):
        if 'case' in data and 'q' in data:
            raise serializers.ValidationError({'q': 'Give either an initial case or an explicit quaternion, not both.'})
        if 'q' not in data:
            data.setdefault('case', 1)
        return data


class PlantSerializer(StrictSerializer):
    theta_true = vector_field(6, default=list(THETA_TRUE))
    disturbance = serializers.BooleanField(default=False)

    def validate_theta_true(self, value):
        try:
            InertiaParams(np.array(value))
        except SingularInertiaError as exc:
            raise serializers.ValidationError(exc.message)
        return value


class NoiseSerializer(StrictSerializer):
    cone_half_angle = serializers.FloatField(min_value=0.0, default=CONE_HALF_ANGLE_DEG,
                                             help_text="Half-angle of the eigenaxis cone in degrees")
    gyro_std = serializers.FloatField(min_value=0.0, default=GYRO_STD,
                                      help_text="Gyro noise standard deviation in rad/s")


class ReferenceSerializer(StrictSerializer):
    q_r0 = vector_field(4, default=[0.0, 0.0, 0.0, 1.0])
    excitation_cutoff = serializers.FloatField(min_value=0.0, required=False, allow_null=True, default=None)

    def validate_q_r0(self, value):
        if np.linalg.norm(value) < 1e-12:
            raise serializers.ValidationError("Reference quaternion must be non-zero")
        return value


class ControllerSerializer(StrictSerializer):
    alpha = serializers.FloatField(default=DEFAULT_GAINS['alpha'])
    beta = serializers.FloatField(default=DEFAULT_GAINS['beta'])
    kappa = serializers.FloatField(default=DEFAULT_GAINS['kappa'])
    f_m = serializers.FloatField(default=DEFAULT_GAINS['f_m'])
    gamma = serializers.FloatField(default=DEFAULT_GAINS['gamma'])
    gamma_ce = serializers.FloatField(default=DEFAULT_GAINS['gamma_ce'])
    unwinding_guard = serializers.FloatField(required=False)

    def get_fields(self):
        fields = super().get_fields()
        # 'lambda' is a Python keyword, so it cannot be a class attribute
        fields['lambda'] = serializers.FloatField(min_value=0.0, default=DEFAULT_GAINS['lambda'])
        return fields

    def validate_alpha(self, value):
        return positive(value, 'alpha')

    def validate_beta(self, value):
        return positive(value, 'beta')

    def validate_kappa(self, value):
        return positive(value, 'kappa')

    def validate_f_m(self, value):
        return positive(value, 'f_m')

    def validate_gamma(self, value):
        return positive(value, 'gamma')

    def validate_gamma_ce(self, value):
        return positive(value, 'gamma_ce')

    def validate_unwinding_guard(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("unwinding_guard must lie in (0, 1)")
        return value


class DremSerializer(StrictSerializer):
    a = serializers.FloatField(default=DEFAULT_DREM['a'])
    b = serializers.FloatField(default=DEFAULT_DREM['b'])
    k_I = serializers.FloatField(min_value=1.0, default=DEFAULT_DREM['k_I'])
    k_N = serializers.FloatField(default=DEFAULT_DREM['k_N'])

    def validate_a(self, value):
        return positive(value, 'a')

    def validate_b(self, value):
        return positive(value, 'b')

    def validate_k_N(self, value):
        return positive(value, 'k_N')


class EstimatorSerializer(StrictSerializer):
    variant = serializers.ChoiceField(choices=ESTIMATOR_VARIANTS, default='exponential')
    lambda1 = serializers.FloatField(min_value=0.0, default=DEFAULT_GAINS['lambda1'])
    lambda2 = serializers.FloatField(min_value=0.0, default=DEFAULT_GAINS['lambda2'])
    iota1 = serializers.FloatField(default=DEFAULT_GAINS['iota1'])
    iota2 = serializers.FloatField(default=DEFAULT_GAINS['iota2'])
    pin_omega_hat = serializers.BooleanField(
        default=False, help_text="Hold omega_hat equal to omega (simulation-only pure I&I check)")

    def validate_iota1(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("iota1 must lie in (0, 1)")
        return value

    def validate_iota2(self, value):
        if value <= 1.0:
            raise serializers.ValidationError("iota2 must exceed 1")
        return value

    def validate(self, data):
        variant, l1, l2 = data['variant'], data['lambda1'], data['lambda2']
        if variant == 'exponential' and (l1 > 0 or l2 > 0):
            raise serializers.ValidationError({'variant': 'Power-term gains require the finite_time or fixed_time variant.'})
        if variant == 'finite_time' and (l1 <= 0 or l2 != 0):
            raise serializers.ValidationError({'lambda1': 'finite_time needs lambda1 > 0 and lambda2 = 0.'})
        if variant == 'fixed_time' and (l1 <= 0 or l2 <= 0):
            raise serializers.ValidationError({'lambda2': 'fixed_time needs lambda1 > 0 and lambda2 > 0.'})
        return data


SECTIONS = ('initial', 'plant', 'reference', 'controller', 'drem', 'estimator')


class ScenarioSerializer(StrictSerializer):
    """Whole scenario file. `default_step` and `default_label` come from the context."""
    label = serializers.CharField(max_length=200, required=False)
    description = serializers.CharField(allow_blank=True, default='')
    duration = serializers.FloatField(min_value=0.0, default=40.0)
    step = serializers.FloatField(required=False)
    seed = serializers.IntegerField(min_value=0, default=0)
    initial = InitialSerializer()
    plant = PlantSerializer()
    noise = NoiseSerializer(allow_null=True, required=False, default=None)
    reference = ReferenceSerializer()
    controller = ControllerSerializer()
    drem = DremSerializer()
    estimator = EstimatorSerializer()

    def to_internal_value(self, data):
        if isinstance(data, dict):
            data = dict(data)
            for section in SECTIONS:
                if data.get(section) is None:
                    data[section] = {}
        return super().to_internal_value(data)

    def validate_step(self, value):
        return positive(value, 'step')

    def validate(self, data):
        data.setdefault('label', self.context.get('default_label', 'scenario'))
        data.setdefault('step', self.context.get('default_step', 0.01))
        duration, step = data['duration'], data['step']
        if 0 < duration < step:
            raise serializers.ValidationError({'duration': f'duration must be 0 or at least one step ({step}).'})
        return data
