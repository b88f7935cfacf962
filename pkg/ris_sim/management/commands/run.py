from pathlib import Path

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from ris_sim.exceptions import PermutationCapExceeded, UnknownNameError
from ris_sim.runner import RunConfig, run

USAGE_ERROR = 2
RESOURCE_ERROR = 3
CONTRACT_ERROR = 4


def _message(exc):
    return '; '.join(exc.messages)


class Command(BaseCommand):
    help = (
        "Simulates a preset or a scenario file under a phase-control strategy and writes "
        "trace.csv, spectrum.csv, metrics.json and manifest.json."
    )

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--preset', help="Built-in preset (see list_presets)")
        source.add_argument('--scenario', type=Path, help="Scenario JSON file")
        parser.add_argument('--strategy', help="Override the preset strategy, e.g. cancel-io:1")
        parser.add_argument('--seed', type=int)
        parser.add_argument('--fft', type=int, dest='fft_size')
        parser.add_argument('--out', type=Path, dest='output_dir')
        parser.add_argument('--u-hz', type=float, dest='u_hz',
                            help="Doppler estimation error bound U in Hz")
        hold = parser.add_mutually_exclusive_group()
        hold.add_argument('--hold-q', type=int, dest='hold_q',
                          help="Hold the RIS phases for Q samples")
        hold.add_argument('--hold-tr-us', type=float, dest='hold_tr_us',
                          help="Reconfiguration interval t_r in microseconds")
        parser.add_argument('--realistic-ris', action='store_true',
                            help="-1 dB amplitude, phases limited to [-150, 140] degrees")
        parser.add_argument('--cap', type=int, help="Permutation search cap")
        parser.add_argument('--no-record', action='store_false', dest='record', default=None,
                            help="Do not store the run in the database")

    def handle(self, *args, **options):
        try:
            config = RunConfig(
                preset=options['preset'], scenario_path=options['scenario'],
                strategy=options['strategy'], seed=options['seed'],
                fft_size=options['fft_size'], output_dir=options['output_dir'],
                u_hz=options['u_hz'], hold_q=options['hold_q'],
                hold_tr_us=options['hold_tr_us'], realistic_ris=options['realistic_ris'],
                cap=options['cap'], record=options['record'],
            )
            manifest = run(config)
        except UnknownNameError as exc:
            raise CommandError(_message(exc), returncode=USAGE_ERROR) from exc
        except PermutationCapExceeded as exc:
            raise CommandError(str(exc), returncode=RESOURCE_ERROR) from exc
        except ValidationError as exc:
            raise CommandError(_message(exc), returncode=CONTRACT_ERROR) from exc

        for variant in manifest.variants:
            self.stdout.write(f"{variant.name}: {variant.metrics}")
        if manifest.metrics is not None:
            self.stdout.write(
                f"delta_r={manifest.metrics['delta_r_db']} dB, "
                f"r_bar={manifest.metrics['r_bar_db']} dB")
        self.stdout.write(self.style.SUCCESS(f"Wrote {manifest.output_dir}"))
