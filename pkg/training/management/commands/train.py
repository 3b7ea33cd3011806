import logging

from django.conf import settings

from breathing.archive import load_examples
from breathing.models import DspConfig
from network.checkpoint import checkpoint_path, save_checkpoint
from network.classifier import log_parameter_count
from network.models import ModelConfig
from network.serializers import ModelConfigSerializer
from screening.commands import ScreeningCommand
from screening.config import read_config
from training.exceptions import EmptyTrainingSet
from training.fit import fit
from training.models import TrainConfig
from training.serializers import TrainConfigSerializer
from training.splits import stratified_split

logger = logging.getLogger(__name__)


class Command(ScreeningCommand):
    help = 'Train one network on a dataset or cycle archive with a stratified train/validation split.'
    out_help = 'Checkpoint file to write (.npz).'

    def add_command_arguments(self, parser):
        parser.add_argument('--data', required=True, help='Dataset directory or cycle archive.')
        parser.add_argument('--model-config', help='JSON model configuration.')
        parser.add_argument('--train-config', help='JSON training configuration.')
        parser.add_argument('--validation-fraction', type=float,
                            default=settings.SCREENING['EVALUATION']['VALIDATION_FRACTION'])

    def manifest_path(self, out):
        path = checkpoint_path(out)
        return path.with_name(path.name + '.run.json')

    def run(self, options):
        model_overrides = read_config(options['model_config'], ModelConfigSerializer, 'model') \
            if options['model_config'] else {}
        train_overrides = read_config(options['train_config'], TrainConfigSerializer, 'training') \
            if options['train_config'] else {}
        train_overrides.setdefault('seed', options['seed'])
        model_cfg = ModelConfig.from_settings(**model_overrides)
        train_cfg = TrainConfig.from_settings(**train_overrides)
        dsp_cfg = DspConfig.from_settings()

        examples = load_examples(options['data'], dsp_cfg)
        if not examples:
            raise EmptyTrainingSet()
        labels = {e.patient_id: e.label for e in examples}
        train_ids, val_ids = stratified_split(list(labels), list(labels.values()),
                                              options['validation_fraction'], seed=options['seed'])
        in_train = set(train_ids)
        train = [e for e in examples if e.patient_id in in_train]
        val = [e for e in examples if e.patient_id not in in_train]
        log_parameter_count(model_cfg)

        model, history = fit(train, val, model_cfg, train_cfg)
        path = save_checkpoint(options['out'], model.network, model.standardizer,
                               extra={'best_epoch': history.best_epoch, 'train_patients': list(train_ids),
                                      'val_patients': list(val_ids)})
        history.write_csv(path.with_name(path.stem + '.history.csv'))
        self.stdout.write(f'trained {model_cfg.label} on {len(train)} examples '
                          f'({len(train_ids)} patients); best epoch {history.best_epoch}; wrote {path}')
        return {
            'model': model_cfg.to_dict(),
            'training': train_cfg.to_dict(),
            'dsp': dsp_cfg.to_dict(),
            'train_patients': list(train_ids),
            'val_patients': list(val_ids),
            'best_epoch': history.best_epoch,
        }
