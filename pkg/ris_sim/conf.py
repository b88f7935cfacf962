from pathlib import Path

from django.conf import settings

DEFAULTS = {
    'OUTPUT_DIR': Path('runs'),
    'PERMUTATION_CAP': 10 ** 6,
    'DEFAULT_SEED': 42,
    'BS_POSITION': (-1000.0, 0.0),
    'MS_POSITION': (0.0, 0.0),
    'SCENARIO_RECTANGLE': (200.0, 800.0, -300.0, 300.0),
    'RECORD_RUNS': True,
}


def ris_setting(name):
    """Return ``settings.RIS_SIM[name]``, falling back to the built-in default."""
    if name not in DEFAULTS:
        raise KeyError(f'Unknown RIS_SIM setting: {name}')
    return getattr(settings, 'RIS_SIM', {}).get(name, DEFAULTS[name])
