"""
Loading scenario files: YAML parsing, command-line overrides, validation and
construction of the Scenario value object.
"""
import copy
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import yaml
from django.conf import settings

from cli.serializers import ScenarioSerializer
from controller.gains import ControllerGains
from plant.perturbations import NoiseConfig
from sim.scenario import Scenario, initial_attitude
from utils.exceptions import ScenarioConfigError

logger = logging.getLogger(__name__)

KeyPath = Tuple


def resolve_scenario_path(name: str) -> Path:
    """A bare name like `nominal_case1` refers to a shipped scenario."""
    path = Path(name)
    if path.exists():
        return path
    if path.suffix == '' and len(path.parts) == 1:
        shipped = Path(settings.SIM_SCENARIO_DIR) / f'{name}.yaml'
        if shipped.exists():
            return shipped
    raise ScenarioConfigError(f"Scenario file not found: {name}", details={'path': str(path)})


def _collect_lines(node, path: KeyPath, lines: Dict[KeyPath, int]):
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = key_node.value
            _collect_lines(value_node, path + (key,), lines)
            # report the key line, not where its value starts
            lines[path + (key,)] = key_node.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _collect_lines(item, path + (i,), lines)


def load_yaml(path: Path) -> Tuple[dict, Dict[KeyPath, int]]:
    """Parse a scenario file and return the data plus a key-path to line map."""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ScenarioConfigError(f"{path}: cannot read scenario file: {exc}")

    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, 'problem_mark', None)
        where = f"{path}:{mark.line + 1}" if mark is not None else str(path)
        problem = getattr(exc, 'problem', None) or str(exc)
        raise ScenarioConfigError(f"{where}: YAML syntax error: {problem}",
                                  details={'line': mark.line + 1 if mark else None})

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioConfigError(f"{path}:1: a scenario file must contain a mapping at the top level")

    lines: Dict[KeyPath, int] = {}
    if node is not None:
        _collect_lines(node, (), lines)
    return data, lines


def parse_override(text: str) -> Tuple[List[str], object]:
    """`controller.gamma=30` -> (['controller', 'gamma'], 30)."""
    if '=' not in text:
        raise ScenarioConfigError(f"Override '{text}' must look like section.key=value")
    key, raw = text.split('=', 1)
    keys = [part for part in key.strip().split('.') if part]
    if not keys:
        raise ScenarioConfigError(f"Override '{text}' has an empty key")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as exc:
        raise ScenarioConfigError(f"Override '{text}' has an unparseable value: {exc}")
    return keys, value


def apply_overrides(data: dict, overrides: Sequence[str]) -> dict:
    data = copy.deepcopy(data)
    for text in overrides or ():
        keys, value = parse_override(text)
        target = data
        for key in keys[:-1]:
            if not isinstance(target.get(key), dict):
                target[key] = {}
            target = target[key]
        target[keys[-1]] = value
        logger.debug(f"Override applied: {'.'.join(keys)} = {value!r}")
    return data


def _line_for(path: KeyPath, lines: Dict[KeyPath, int]) -> Optional[int]:
    while path:
        if path in lines:
            return lines[path]
        path = path[:-1]
    return None


def flatten_errors(errors, path: KeyPath = ()) -> List[Tuple[KeyPath, str]]:
    flat = []
    if isinstance(errors, dict):
        for key, value in errors.items():
            sub = path if key == 'non_field_errors' else path + (key,)
            flat.extend(flatten_errors(value, sub))
    elif isinstance(errors, list):
        for item in errors:
            if isinstance(item, (dict, list)):
                flat.extend(flatten_errors(item, path))
            else:
                flat.append((path, str(item)))
    else:
        flat.append((path, str(errors)))
    return flat


def _format_path(path: KeyPath) -> str:
    text = ''
    for part in path:
        if isinstance(part, int):
            text += f'[{part}]'
        else:
            text += f'.{part}' if text else str(part)
    return text or '<root>'


def validate_scenario_data(data: dict, source: str, lines: Optional[Dict[KeyPath, int]] = None,
                           default_label: str = 'scenario') -> dict:
    serializer = ScenarioSerializer(data=data, context={
        'default_step': settings.SIM_DEFAULT_STEP,
        'default_label': default_label,
    })
    if serializer.is_valid():
        return serializer.validated_data

    messages = []
    for path, message in flatten_errors(serializer.errors):
        line = _line_for(tuple(str(p) if not isinstance(p, int) else p for p in path), lines or {})
        where = f"{source}:{line}" if line else source
        messages.append(f"{where}: {_format_path(path)}: {message}")
    logger.warning(f"Scenario '{source}' rejected with {len(messages)} error(s)")
    raise ScenarioConfigError('\n'.join(messages), details={'errors': messages})


def build_scenario(values: dict) -> Scenario:
    initial, plant, reference = values['initial'], values['plant'], values['reference']
    controller, drem, estimator = values['controller'], values['drem'], values['estimator']
    seed = values['seed']

    gains = ControllerGains(
        alpha=controller['alpha'], beta=controller['beta'], kappa=controller['kappa'],
        f_m=controller['f_m'], gamma=controller['gamma'], lam=controller['lambda'],
        gamma_ce=controller['gamma_ce'],
        a=drem['a'], b=drem['b'], k_I=drem['k_I'], k_N=drem['k_N'],
        lambda1=estimator['lambda1'], lambda2=estimator['lambda2'],
        iota1=estimator['iota1'], iota2=estimator['iota2'],
    )
    noise = values.get('noise')
    q0 = tuple(initial['q']) if 'q' in initial else initial_attitude(initial['case'])

    return Scenario(
        label=values['label'],
        description=values['description'],
        duration=values['duration'],
        step=values['step'],
        seed=seed,
        q0=q0,
        omega0=tuple(initial['omega']),
        theta_estimate0=tuple(initial['theta_estimate']),
        chi0=tuple(initial['chi0']),
        theta_true=tuple(plant['theta_true']),
        disturbance=plant['disturbance'],
        noise=None if noise is None else NoiseConfig(noise['cone_half_angle'], noise['gyro_std'], seed=seed),
        q_r0=tuple(reference['q_r0']),
        excitation_cutoff=reference['excitation_cutoff'],
        gains=gains,
        variant=estimator['variant'],
        pin_omega_hat=estimator['pin_omega_hat'],
        unwinding_guard=controller.get('unwinding_guard', settings.SIM_UNWINDING_GUARD),
    )


def load_scenario(name: str, overrides: Sequence[str] = (), seed: Optional[int] = None) -> Scenario:
    """Resolve, parse, override, validate and build one scenario."""
    path = resolve_scenario_path(name)
    data, lines = load_yaml(path)
    data = apply_overrides(data, overrides)
    if seed is not None:
        data['seed'] = seed
    values = validate_scenario_data(data, str(path), lines, default_label=path.stem)
    scenario = build_scenario(values)
    logger.info(f"Loaded scenario '{scenario.label}' from {path} (config {scenario.config_hash[:12]})")
    return scenario
