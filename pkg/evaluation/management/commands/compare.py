import logging
from pathlib import Path

from evaluation.commands import EvaluationCommand
from evaluation.crossval import compare_architectures
from cohort.summary import write_summary
from evaluation.reports import write_report

logger = logging.getLogger(__name__)


class Command(EvaluationCommand):
    help = ('Leave-one-out evaluation of every encoder configuration of the search space as a fixed '
            'model, ranked by validation F1.')

    def run(self, options):
        space, train_cfg, eval_cfg = self.resolve(options)
        cohort, examples, left_out, dsp_cfg, summary = self.load_cohort(options)

        table, reports = compare_architectures(cohort, examples, space, train_cfg, eval_cfg,
                                               root_seed=options['seed'])
        out = Path(options['out'])
        out.mkdir(parents=True, exist_ok=True)
        table.to_csv(out / 'comparison.csv', index=False, lineterminator='\n')
        write_summary(summary, out)
        for slug, report in reports.items():
            write_report(report, out / slug, eval_cfg.heatmap_cycles)

        self.stdout.write(table.to_string(index=False))
        return {
            'space': space.to_dict(),
            'training': train_cfg.to_dict(),
            'evaluation': eval_cfg.to_dict(),
            'dsp': dsp_cfg.to_dict(),
            'left_out': list(left_out),
            'ranking': table['model'].tolist(),
        }
