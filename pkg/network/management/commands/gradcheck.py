from network.classifier import log_parameter_count
from network.exceptions import GradientCheckFailed
from network.gradcheck import TOLERANCE, gradient_check, small_config
from network.models import EncoderFamily, ModelConfig
from screening.commands import ScreeningCommand


class Command(ScreeningCommand):
    help = 'Check analytic BPTT gradients against central finite differences on small random networks.'
    out_required = False
    out_help = 'Directory for run.json (default: RUN_ROOT/gradcheck-seed<seed>).'
    default_run_dir = True

    def add_command_arguments(self, parser):
        parser.add_argument('--seeds', type=int, default=5, help='Number of random networks to check.')
        parser.add_argument('--family', choices=EncoderFamily.values, default=EncoderFamily.BILSTM.value)
        parser.add_argument('--hidden', type=int, default=3)
        parser.add_argument('--layers', type=int, default=2)
        parser.add_argument('--length', type=int, default=12, help='Sequence length m.')
        parser.add_argument('--per-scene', action='store_true', help='One encoder per scene.')
        parser.add_argument('--demographics', action='store_true')

    def run(self, options):
        config = small_config(family=options['family'], hidden=options['hidden'], layers=options['layers'],
                              shared_across_scenes=not options['per_scene'],
                              use_demographics=options['demographics'])
        errors = []
        for k in range(options['seeds']):
            result = gradient_check(config, seed=options['seed'] + k, length=options['length'])
            errors.append(result.max_relative_error)
            self.stdout.write(f'seed {options["seed"] + k}: max relative error {result.max_relative_error:.3e}')
        worst = max(errors, default=0.0)
        self.stdout.write(f'max relative error {worst:.3e} (tolerance {TOLERANCE:.0e})')

        full_count = log_parameter_count(ModelConfig.from_settings())
        self.stdout.write(f'default model parameters: {full_count}')
        if worst >= TOLERANCE:
            raise GradientCheckFailed(worst, TOLERANCE)
        return {'model': config.to_dict(), 'max_relative_error': worst, 'default_parameter_count': full_count}
