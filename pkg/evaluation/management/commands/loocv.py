import logging

from evaluation.commands import EvaluationCommand
from evaluation.crossval import evaluate
from cohort.summary import write_summary
from evaluation.reports import write_report

logger = logging.getLogger(__name__)


class Command(EvaluationCommand):
    help = ('Undersample, run patient-level leave-one-out with a Bayesian model search per fold, '
            'test the trained models on the removed healthy patients and write a report.')

    def add_command_arguments(self, parser):
        super().add_command_arguments(parser)
        parser.add_argument('--trials', type=int, help='Search budget per fold.')
        parser.add_argument('--search-config', help='JSON search configuration.')

    def run(self, options):
        space, train_cfg, eval_cfg = self.resolve(options)
        search_cfg = self.search_config(options)
        cohort, examples, left_out, dsp_cfg, summary = self.load_cohort(options)

        report = evaluate(cohort, examples, space, train_cfg, search_cfg, eval_cfg, root_seed=options['seed'])
        write_report(report, options['out'], eval_cfg.heatmap_cycles, dataset=summary.to_dict())
        write_summary(summary, options['out'])

        accuracy = report.aggregate['accuracy']
        self.stdout.write(f"{len(cohort)} patients, {eval_cfg.seeds} seeds: accuracy "
                          f"{accuracy['mean']:.3f} +- {accuracy['sd']:.3f}; report in {options['out']}")
        return {**report.config, 'dsp': dsp_cfg.to_dict(), 'left_out': list(left_out)}
