from breathing.models import DspConfig
from cohort.storage import load_dataset
from cohort.summary import dataset_summary
from evaluation.crossval import prepare_cohort, segment_cohort
from evaluation.models import EvaluationConfig, HoldoutMode
from screening.commands import ScreeningCommand
from screening.config import read_config
from training.models import TrainConfig
from training.serializers import TrainConfigSerializer
from tuning.models import SearchConfig, SearchSpace
from tuning.serializers import SearchConfigSerializer, SearchSpaceSerializer


class EvaluationCommand(ScreeningCommand):
    """Options and config resolution shared by ``loocv`` and ``compare``."""
    out_help = 'Report directory.'

    def add_command_arguments(self, parser):
        parser.add_argument('--data', required=True, help='Dataset directory.')
        parser.add_argument('--seeds', type=int, help='Number of undersampling seeds.')
        parser.add_argument('--model-space', help='JSON search space.')
        parser.add_argument('--train-config', help='JSON training configuration.')
        parser.add_argument('--holdout-mode', choices=HoldoutMode.values)
        parser.add_argument('--validation-fraction', type=float)
        parser.add_argument('--heatmap-cycles', type=int)
        parser.add_argument('--target-len', type=int, help='Samples per resampled cycle.')

    def resolve(self, options):
        space = SearchSpace.from_settings(**self._read(options['model_space'], SearchSpaceSerializer, 'search space'))
        train_overrides = self._read(options['train_config'], TrainConfigSerializer, 'training')
        train_overrides.setdefault('seed', options['seed'])
        eval_cfg = EvaluationConfig.from_settings(
            seeds=options['seeds'],
            validation_fraction=options['validation_fraction'],
            heatmap_cycles=options['heatmap_cycles'],
            holdout_mode=options['holdout_mode'],
            threads=options['threads'],
        )
        return space, TrainConfig.from_settings(**train_overrides), eval_cfg

    def load_cohort(self, options):
        dsp_cfg = DspConfig.from_settings(target_len=options['target_len'])
        dataset = load_dataset(options['data'])
        for diagnostic in dataset.diagnostics:
            self.stderr.write(f'{diagnostic.patient_id}: {diagnostic.code}: {diagnostic.message}')
        segmentations = segment_cohort(dataset, dsp_cfg)
        cohort, examples, left_out = prepare_cohort(dataset, dsp_cfg, segmentations)
        summary = dataset_summary(dataset, segmentations.values()) if len(dataset) else None
        return cohort, examples, left_out, dsp_cfg, summary

    def search_config(self, options):
        return SearchConfig.from_settings(**self._read(options.get('search_config'), SearchConfigSerializer,
                                                       'search'), trials=options.get('trials'))

    @staticmethod
    def _read(path, serializer_class, section):
        return read_config(path, serializer_class, section) if path else {}
