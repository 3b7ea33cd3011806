import json
import logging
from dataclasses import asdict

from cohort.serializers import CohortSpecSerializer
from cohort.storage import save_dataset
from cohort.summary import dataset_summary
from cohort.synthesis import CohortSpec, generate_cohort
from screening.commands import ScreeningCommand
from screening.config import read_config

logger = logging.getLogger(__name__)


class Command(ScreeningCommand):
    help = 'Generate a synthetic five-scene cohort with ground-truth cycle boundaries.'
    out_help = 'Dataset directory to write.'

    def add_command_arguments(self, parser):
        parser.add_argument('--spec', help='JSON cohort spec; explicit flags override its values.')
        parser.add_argument('--n-healthy', type=int)
        parser.add_argument('--n-nonhealthy', type=int)
        parser.add_argument('--separation', type=float, dest='class_separation')
        parser.add_argument('--noise-std', type=float)
        parser.add_argument('--transient-s', type=float, dest='transient_duration_s')

    def run(self, options):
        overrides = read_config(options['spec'], CohortSpecSerializer, 'cohort') if options['spec'] else {}
        for name in ('n_healthy', 'n_nonhealthy', 'class_separation', 'noise_std', 'transient_duration_s'):
            if options[name] is not None:
                overrides[name] = options[name]
        overrides['seed'] = options['seed']
        spec = CohortSpec.from_settings(**overrides)

        dataset = generate_cohort(spec)
        save_dataset(dataset, options['out'])
        if len(dataset):
            summary = dataset_summary(dataset)
            counts = {label: group.count for label, group in summary.by_label.items()}
            self.stdout.write(f"wrote {len(dataset)} patients to {options['out']} {json.dumps(counts)}")
        else:
            self.stdout.write(f"wrote an empty dataset to {options['out']}")
        resolved = asdict(spec)
        resolved['breath_rate_hz'] = {k.value: v for k, v in spec.breath_rate_hz.items()}
        resolved['amplitude'] = {k.value: {s.value: b for s, b in v.items()}
                                 for k, v in spec.amplitude.items()}
        resolved['disease_mix'] = {k.value: v for k, v in spec.disease_mix.items()}
        return {'cohort': resolved}
