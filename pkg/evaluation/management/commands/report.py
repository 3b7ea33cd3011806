import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from breathing.models import DspConfig
from cohort.storage import load_dataset
from evaluation.reports import (export_heatmap, plot_filter_response, plot_segmentation, probability_grid,
                                read_heatmap, render_heatmap)
from network.checkpoint import load_checkpoint
from screening.commands import ScreeningCommand
from training.models import TrainedModel
from training.prediction import predict_cycles

logger = logging.getLogger(__name__)


class Command(ScreeningCommand):
    help = ('Render the filter response, a segmentation overlay per scene and the per-cycle heatmap '
            'of a report directory or of a trained model.')
    out_help = 'Directory for the rendered images.'

    def add_command_arguments(self, parser):
        parser.add_argument('--report', help='Report directory written by loocv.')
        parser.add_argument('--data', help='Dataset directory, for the segmentation overlay and --checkpoint.')
        parser.add_argument('--patient', help='Patient to overlay; the first trainable one by default.')
        parser.add_argument('--checkpoint', help='Trained model; renders its heatmap over --data.')
        parser.add_argument('--heatmap-cycles', type=int,
                            default=settings.SCREENING['EVALUATION']['HEATMAP_CYCLES'])
        parser.add_argument('--target-len', type=int)

    def run(self, options):
        if options['checkpoint'] and not options['data']:
            raise CommandError('--checkpoint needs --data', returncode=2)
        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        cfg = DspConfig.from_settings(target_len=options['target_len'])
        written = [plot_filter_response(cfg.filter_spec(settings.SCREENING['ACQUISITION']['SAMPLE_RATE_HZ']),
                                        out / 'filter_response.png')]

        if options['report']:
            written.append(render_heatmap(read_heatmap(options['report']), out / 'heatmap.png'))

        if options['data']:
            dataset = load_dataset(options['data'])
            trainable = dataset.trainable()
            if options['patient'] and options['patient'] not in trainable.patient_ids:
                raise CommandError(f'no trainable patient "{options["patient"]}" in {options["data"]}', returncode=1)
            patient_id = options['patient'] or (trainable.patient_ids[0] if len(trainable) else None)
            if patient_id is not None:
                patient = trainable.get(patient_id)
                for scene, recording in patient.recordings.items():
                    path = out / f'segmentation_{patient_id}_{scene.value}.png'
                    written.append(plot_segmentation(recording, cfg, path))

            if options['checkpoint']:
                network, standardizer, _ = load_checkpoint(options['checkpoint'])
                model = TrainedModel(network=network, standardizer=standardizer)
                predictions = [predict_cycles(model, p, cfg) for p in trainable]
                probabilities = {p.patient_id: p.probabilities for p in predictions if not p.flagged}
                truth = {p.patient_id: p.label for p in trainable}
                export_heatmap(probability_grid(probabilities, truth, options['heatmap_cycles']),
                               out / 'prediction', options['heatmap_cycles'])
                written.append(out / 'prediction' / 'heatmap.png')

        for path in written:
            self.stdout.write(f'wrote {path}')
        return {'dsp': cfg.to_dict(), 'images': [str(p) for p in written]}
