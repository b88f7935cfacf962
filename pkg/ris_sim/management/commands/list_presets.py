import json

from django.core.management.base import BaseCommand

from ris_sim.presets import build_presets
from ris_sim.runner import RunJSONEncoder


class Command(BaseCommand):
    help = "Lists every built-in preset with its parameters and the figure it mirrors."

    def add_arguments(self, parser):
        parser.add_argument('--format', choices=('text', 'json'), default='text')

    def handle(self, *args, **options):
        presets = {name: preset.summary() for name, preset in build_presets().items()}
        if options['format'] == 'json':
            self.stdout.write(json.dumps(presets, cls=RunJSONEncoder, indent=2))
            return

        for name, info in presets.items():
            self.stdout.write(self.style.MIGRATE_HEADING(
                f"{name}  ({info['figure']})" if info['figure'] else name))
            self.stdout.write(f"  {info['description']}")
            self.stdout.write(
                f"  strategy={info['strategy']}  n_s={info['n_s']}  "
                f"t_s={info['t_s'] * 1e3:.6g} ms  FFT={info['fft']}")
            for key, value in info.items():
                if key not in ('figure', 'description', 'strategy', 'n_s', 't_s', 'fft'):
                    self.stdout.write(f"  {key}={value}")
