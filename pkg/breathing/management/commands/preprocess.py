import logging

from django.core.management.base import CommandError

from breathing.archive import write_cycle_archive
from breathing.models import DspConfig
from breathing.segmentation import segment_patient
from cohort.storage import load_dataset
from cohort.summary import dataset_summary, write_summary
from screening.commands import ScreeningCommand

logger = logging.getLogger(__name__)


class Command(ScreeningCommand):
    help = 'Segment every trainable patient into aligned breathing cycles and write a cycle archive.'
    out_required = False
    out_help = 'Cycle archive directory (same as --output).'

    def add_command_arguments(self, parser):
        parser.add_argument('--input', required=True, help='Dataset directory.')
        parser.add_argument('--output', dest='out', help='Cycle archive directory.')
        parser.add_argument('--cutoff-hz', type=float)
        parser.add_argument('--trim-s', type=float)
        parser.add_argument('--target-len', type=int)
        parser.add_argument('--min-distance-s', type=float)
        parser.add_argument('--min-prominence', type=float)
        parser.add_argument('--reflect-edges', action='store_true', default=None,
                            help='Low-pass a mirror-extended gyro-y trace.')

    def run(self, options):
        if not options['out']:
            raise CommandError('one of --output/--out is required', returncode=2)
        cfg = DspConfig.from_settings(
            cutoff_hz=options['cutoff_hz'],
            trim_s=options['trim_s'],
            target_len=options['target_len'],
            min_distance_s=options['min_distance_s'],
            min_prominence=options['min_prominence'],
            reflect_edges=options['reflect_edges'],
        )
        dataset = load_dataset(options['input'])
        for diagnostic in dataset.diagnostics:
            self.stderr.write(f'{diagnostic.patient_id}: {diagnostic.code}: {diagnostic.message}')

        trainable = dataset.trainable()
        segmentations = [segment_patient(patient, cfg) for patient in trainable]
        records = {patient.patient_id: patient for patient in trainable}
        write_cycle_archive(segmentations, records, options['out'], settings_used=cfg.to_dict())
        if len(dataset):
            write_summary(dataset_summary(dataset, segmentations), options['out'])

        n_examples = sum(len(s.examples) for s in segmentations)
        flagged = sorted(s.patient_id for s in segmentations if s.flagged)
        self.stdout.write(f'wrote {n_examples} examples for {len(segmentations) - len(flagged)} patients '
                          f'to {options["out"]} ({len(flagged)} flagged)')
        return {
            'dsp': cfg.to_dict(),
            'patients': len(segmentations),
            'examples': n_examples,
            'flagged': flagged,
            'not_trainable': sorted(p.patient_id for p in dataset.flagged()),
        }
