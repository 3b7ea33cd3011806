import json
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from screening import __version__
from screening.exceptions import ScreeningError

logger = logging.getLogger(__name__)

# Options every Django command carries; they never change results, so they
# are left out of the run manifest.
DJANGO_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback',
    'no_color', 'force_color', 'skip_checks', 'stdout', 'stderr',
}

APP_LOGGERS = ('screening', 'cohort', 'breathing', 'network',
               'training', 'tuning', 'evaluation')


class ScreeningCommand(BaseCommand):
    """
    Base class of every subcommand.

    Adds the global flags (``--seed``, ``--threads``, ``--verbose``,
    ``--out``), maps toolkit and I/O errors to exit code 1 and writes a
    ``run.json`` manifest holding the resolved configuration. Subclasses
    implement ``add_command_arguments`` and ``run``; ``run`` returns the
    resolved configuration as a JSON-serializable dict.
    """
    out_required = True
    out_help = 'Output directory.'
    # When --out is optional and omitted, write the manifest under RUN_ROOT.
    default_run_dir = False

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int,
                            default=settings.SCREENING['SEED'],
                            help='Root seed; all randomness derives from it.')
        parser.add_argument('--threads', type=int,
                            default=settings.SCREENING['THREADS'],
                            help='Upper bound on fold-level parallelism.')
        parser.add_argument('--verbose', action='store_true',
                            help='Log at DEBUG level.')
        parser.add_argument('--out', required=self.out_required,
                            help=self.out_help)
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run(self, options):
        raise NotImplementedError('subclasses of ScreeningCommand must provide a run() method')

    @property
    def subcommand(self):
        return self.__module__.rsplit('.', 1)[-1]

    def handle(self, *args, **options):
        if options['verbose'] or options['verbosity'] >= 2:
            for name in APP_LOGGERS:
                logging.getLogger(name).setLevel(logging.DEBUG)
        if options['threads'] < 1:
            raise CommandError('--threads must be at least 1', returncode=2)
        if not options.get('out') and self.default_run_dir:
            options['out'] = str(self.run_dir(options))

        try:
            resolved = self.run(options)
            if options.get('out'):
                self.write_manifest(Path(options['out']), options, resolved)
        except ScreeningError as exc:
            raise CommandError(f'{exc.code}: {exc.detail}', returncode=1) from exc
        except OSError as exc:
            path = exc.filename or ''
            raise CommandError(f'io_error: {path}: {exc.strerror or exc}',
                               returncode=1) from exc

    def run_dir(self, options):
        return Path(settings.SCREENING['RUN_ROOT']) / f'{self.subcommand}-seed{options["seed"]}'

    def manifest_path(self, out):
        return out / 'run.json'

    def write_manifest(self, out, options, resolved):
        manifest = {
            'tool': 'breathscreen',
            'version': __version__,
            'subcommand': self.subcommand,
            'options': {
                key: value for key, value in sorted(options.items())
                if key not in DJANGO_OPTIONS
            },
            'resolved': resolved or {},
        }
        path = self.manifest_path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + '\n')
        logger.debug('run.manifest path=%s', path)
