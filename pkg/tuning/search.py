"""
Bayesian model selection.

Points are encoded into the unit cube (one-hot discretes, log-scaled
learning rate). The first ``initial_trials`` suggestions are space-filling:
the Latin-hypercube candidate farthest from everything already tried. After
that a Gaussian-process surrogate with a fixed squared-exponential kernel is
fitted to the completed trials and the point maximizing expected improvement
is proposed. Every discrete combination is scored on a learning-rate grid
and each combination's best grid point is refined with a bounded scalar
search.
"""
import logging
import math

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from scipy.spatial.distance import cdist
from scipy.stats import norm, qmc
from sklearn.gaussian_process import GaussianProcessRegressor
from sklearn.gaussian_process.kernels import RBF
from sklearn.metrics import f1_score

from cohort.models import Label
from screening.exceptions import ConfigurationError, ScreeningError
from training.exceptions import LeakageError
from training.fit import fit
from training.models import TrainConfig
from training.permissions import MODEL_SELECTION, SplitGuard
from training.prediction import cycle_probabilities, predict_patient
from tuning.exceptions import EmptyValidationSet, SearchFailed
from tuning.models import SearchConfig, SearchPoint, Trial, TrialStatus

logger = logging.getLogger(__name__)

LR_GRID = 64
SPACE_FILLING_CANDIDATES = 32
MIN_STD = 1e-12


def _one_hot(value, values):
    vector = np.zeros(len(values))
    vector[values.index(value)] = 1.0
    return vector


def lr_to_unit(learning_rate, space):
    low, high = space.log_lr_bounds
    if high == low:
        return 0.0
    return float(np.clip((math.log(learning_rate) - low) / (high - low), 0.0, 1.0))


def lr_from_unit(u, space):
    low, high = space.log_lr_bounds
    return math.exp(low + float(u) * (high - low))


def encode(point, space):
    """Unit-cube vector of ``point``: one-hot family, hidden, layers and head preset, then log-lr."""
    return np.concatenate([
        _one_hot(point.family, list(space.families)),
        _one_hot(point.hidden, list(space.hidden)),
        _one_hot(point.layers, list(space.layers)),
        _one_hot(point.head_preset, list(space.head_presets)),
        [lr_to_unit(point.learning_rate, space)],
    ])


def _pick(values, u):
    values = list(values)
    return values[min(int(u * len(values)), len(values) - 1)]


def point_from_unit(row, space):
    """Map a 5-d unit sample (one coordinate per dimension) onto the space."""
    if space.finite:
        learning_rate = _pick(space.learning_rates, row[4])
    else:
        learning_rate = lr_from_unit(row[4], space)
    return SearchPoint(
        family=_pick(space.families, row[0]),
        hidden=_pick(space.hidden, row[1]),
        layers=_pick(space.layers, row[2]),
        head_preset=_pick(space.head_presets, row[3]),
        learning_rate=learning_rate,
    )


def space_filling(history, space, rng):
    """The Latin-hypercube candidate with the largest distance to the tried points."""
    seen = {trial.point.key() for trial in history}
    sample = qmc.LatinHypercube(d=5, seed=rng).random(SPACE_FILLING_CANDIDATES)
    candidates = [p for p in (point_from_unit(row, space) for row in sample) if p.key() not in seen]
    if not candidates and space.finite:
        candidates = [p for p in space.points() if p.key() not in seen]
    if not candidates:
        return None
    if not history:
        return candidates[0]
    tried = np.array([encode(trial.point, space) for trial in history])
    distances = cdist(np.array([encode(p, space) for p in candidates]), tried).min(axis=1)
    return candidates[int(np.argmax(distances))]


def fit_surrogate(trials, space, search_cfg):
    """GP regressor on the completed trials; fixed kernel, no hyperparameter fitting."""
    X = np.array([encode(t.point, space) for t in trials])
    y = np.array([t.objective for t in trials], dtype=np.float64)
    gp = GaussianProcessRegressor(
        kernel=RBF(length_scale=search_cfg.length_scale, length_scale_bounds='fixed'),
        alpha=search_cfg.noise,
        optimizer=None,
        normalize_y=True,
    )
    return gp.fit(X, y)


def expected_improvement(X, gp, best, xi=0.0):
    """EI of maximizing at each row of ``X`` over the incumbent ``best``."""
    mu, sigma = gp.predict(np.atleast_2d(X), return_std=True)
    improvement = mu - best - xi
    with np.errstate(divide='ignore', invalid='ignore'):
        z = improvement / sigma
        ei = improvement * norm.cdf(z) + sigma * norm.pdf(z)
    return np.where(sigma > MIN_STD, ei, np.maximum(improvement, 0.0))


def _maximize_finite(gp, best, space, seen):
    candidates = [p for p in space.points() if p.key() not in seen]
    if not candidates:
        return None, None
    ei = expected_improvement(np.array([encode(p, space) for p in candidates]), gp, best)
    index = int(np.argmax(ei))
    return candidates[index], float(ei[index])


def _maximize_continuous(gp, best, space, seen):
    combos = space.discrete_points()
    grid = np.linspace(0.0, 1.0, LR_GRID)
    prefixes = [encode(SearchPoint(*combo, lr_from_unit(0.0, space)), space)[:-1] for combo in combos]
    X = np.array([np.append(prefix, u) for prefix in prefixes for u in grid])
    ei = expected_improvement(X, gp, best).reshape(len(combos), LR_GRID)

    best_point, best_value = None, -np.inf
    for combo, prefix, row in zip(combos, prefixes, ei):
        j = int(np.argmax(row))
        u, value = grid[j], row[j]
        low, high = grid[max(j - 1, 0)], grid[min(j + 1, LR_GRID - 1)]
        if high > low:
            refined = minimize_scalar(lambda v: -expected_improvement(np.append(prefix, v), gp, best)[0],
                                      bounds=(low, high), method='bounded')
            if -refined.fun > value:
                u, value = float(refined.x), float(-refined.fun)
        point = SearchPoint(*combo, lr_from_unit(u, space))
        if value > best_value and point.key() not in seen:
            best_point, best_value = point, value
    return best_point, best_value


def suggest(history, space, rng, search_cfg=None):
    """
    Next point to try given all trials so far, or ``None`` once a finite
    space has been tried exhaustively. Deterministic given ``rng``'s state
    and ``history``.
    """
    search_cfg = search_cfg or SearchConfig()
    history = list(history)
    seen = {trial.point.key() for trial in history}
    if space.finite and len(seen) >= len(space):
        logger.info('search.exhausted points=%d', len(space))
        return None

    completed = [t for t in history if t.completed and np.isfinite(t.objective)]
    if len(history) < search_cfg.initial_trials or not completed:
        return space_filling(history, space, rng)

    gp = fit_surrogate(completed, space, search_cfg)
    incumbent = max(t.objective for t in completed)
    if space.finite:
        point, value = _maximize_finite(gp, incumbent, space, seen)
    else:
        point, value = _maximize_continuous(gp, incumbent, space, seen)
    if point is None:
        return space_filling(history, space, rng)
    logger.debug('search.suggest point=%s ei=%.3g incumbent=%.4f', point.label, value, incumbent)
    return point


def validation_objective(model_cfg, train_examples, val_examples, train_cfg, guard=None):
    """
    Patient-level F1 on the validation patients of a model trained on the
    training patients; an undefined F1 scores 0. Returns ``(f1, model)``.
    """
    if not val_examples:
        raise EmptyValidationSet()
    guard = guard or SplitGuard.for_fit(train_examples, val_examples)
    model, _ = fit(train_examples, val_examples, model_cfg, train_cfg, guard=guard)
    probabilities = cycle_probabilities(model, guard.access(val_examples, MODEL_SELECTION))
    if not all(np.all(np.isfinite(p)) for p in probabilities.values()):
        raise FloatingPointError('non-finite validation probabilities')
    truth = {e.patient_id: Label(e.label).value for e in val_examples}
    patients = sorted(probabilities)
    y_true = [truth[pid] for pid in patients]
    y_pred = [predict_patient(probabilities[pid], train_cfg.aggregation).label for pid in patients]
    score = f1_score(y_true, y_pred, pos_label=Label.NON_HEALTHY.value, zero_division=0)
    return float(score), model


def run_trial(index, point, space, train_examples, val_examples, train_cfg, objective, guard=None):
    config = space.model_config(point)
    n_parameters = space.n_parameters(point)
    try:
        result = objective(config, train_examples, val_examples, train_cfg, guard)
        score, model = result if isinstance(result, tuple) else (result, None)
        score = float(score)
        if not np.isfinite(score):
            raise FloatingPointError(f'objective is {score}')
    except LeakageError:
        raise
    except (ScreeningError, ValueError, ArithmeticError) as exc:
        logger.warning('search.trial_failed trial=%d point=%s error=%s', index, point.label, exc)
        return Trial(index, point, TrialStatus.FAILED, n_parameters=n_parameters,
                     diagnostic=f'{type(exc).__name__}: {exc}')
    logger.info('search.trial trial=%d point=%s objective=%.4f params=%d', index, point.label, score, n_parameters)
    return Trial(index, point, TrialStatus.COMPLETED, score, n_parameters, model=model)


def select_best(trials):
    """Highest objective; ties go to fewer parameters, then the earlier trial."""
    completed = [t for t in trials if t.completed]
    if not completed:
        raise SearchFailed(trials)
    return max(completed, key=lambda t: (t.objective, -t.n_parameters, -t.index))


def incumbent_trace(trials):
    """Best completed objective after each trial (``nan`` before the first completion)."""
    trace, best = [], -np.inf
    for trial in trials:
        if trial.completed:
            best = max(best, trial.objective)
        trace.append(best if np.isfinite(best) else np.nan)
    return trace


def run_search(train_examples, val_examples, space, budget=None, train_cfg=None, search_cfg=None,
               seed=None, objective=None, guard=None, history=None):
    """
    Try up to ``budget`` suggested configurations, each trained on the
    training examples and scored on the validation examples, and return the
    best completed :class:`Trial`. Trials are appended to ``history`` when a
    list is given.
    """
    search_cfg = search_cfg or SearchConfig()
    train_cfg = train_cfg or TrainConfig()
    budget = search_cfg.trials if budget is None else budget
    if budget < 1:
        raise ConfigurationError(section='search', errors='budget must be >= 1')
    objective = objective or validation_objective
    rng = np.random.default_rng(train_cfg.seed if seed is None else seed)

    trials = [] if history is None else history
    start = len(trials)
    for index in range(budget):
        point = suggest(trials[start:], space, rng, search_cfg)
        if point is None:
            break
        trials.append(run_trial(index, point, space, train_examples, val_examples, train_cfg, objective, guard))
    ours = trials[start:]
    best = select_best(ours)
    logger.info('search.done trials=%d completed=%d best=%s objective=%.4f',
                len(ours), sum(t.completed for t in ours), best.point.label, best.objective)
    return best


def trial_frame(trials):
    columns = ['trial', 'status', 'objective', 'family', 'hidden', 'layers', 'head_preset',
               'learning_rate', 'n_parameters', 'diagnostic']
    return pd.DataFrame([t.to_row() for t in trials], columns=columns)


def write_trial_log(trials, path):
    trial_frame(trials).to_csv(path, index=False, lineterminator='\n')
    return path
