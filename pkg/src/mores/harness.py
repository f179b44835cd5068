"""Prequential (test-then-train) evaluation, diagnostics, parameter
sweeps and throughput benchmarking over any learner exposing
predict(x) / update(x, y)."""

import itertools
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import core
from .exceptions import DimensionMismatch, MoresError
from .linalg import spd_inverse, sym_eig
from .suffstats import Sample, SufficientStats

__all__ = [
    "ReportOptions",
    "EvalReport",
    "prequential_run",
    "structure_diagnostics",
    "convergence_trace",
    "throughput_bench",
    "sweep",
    "load_prediction_log",
    "mae_from_log",
]


@dataclass
class ReportOptions:
    """What to record during a prequential run.

    diag_every > 0 samples eigenvalue/diagnostic records every that many
    rounds (MORES learners only); p_ref enables coefficient-distance
    tracking; skip_first excludes the first k rounds from the MAE
    aggregates (predictions are still made and logged for them).
    """

    diag_every: int = 0
    p_ref: np.ndarray = None
    skip_first: int = 0
    keep_predictions: bool = True


@dataclass
class EvalReport:
    """Outcome of one prequential run."""

    per_output_mae: np.ndarray
    average_mae: float
    mae_curve: list
    records: list = field(default_factory=list)
    predictions: list = field(default_factory=list)
    rounds: int = 0
    complete: bool = True
    error: str = None


def _diag_record(learner, opts):
    rec = {}
    state = learner.state
    if opts.p_ref is not None:
        rec["p_dist"] = float(np.linalg.norm(state.p - opts.p_ref))
    for name, mat in (("omega", state.omega), ("gamma", state.gamma)):
        values = sym_eig(mat).values
        rec[f"{name}_eig_min"] = float(values[0])
        rec[f"{name}_eig_max"] = float(values[-1])
    return rec


def prequential_run(learner, stream, opts=None):
    """Evaluate a learner sample by sample: predict, score, then update.

    The absolute error of each round uses the prediction made before the
    learner sees the true outputs.  Per-output MAE is the running mean of
    absolute errors over the evaluated rounds; the average MAE is their
    unweighted mean.  A learner error aborts the run and returns the
    partial report flagged incomplete.
    """
    opts = opts or ReportOptions()
    abs_sum = None
    counted = 0
    mae_curve = []
    records = []
    predictions = []
    complete = True
    error = None
    t = 0
    is_mores = isinstance(learner, core.MoresLearner)
    for sample in stream:
        t += 1
        try:
            y_pred = learner.predict(sample.x)
            learner.update(sample.x, sample.y)
        except MoresError as exc:
            complete = False
            error = f"round {t}: {exc}"
            break
        abs_err = np.abs(sample.y - y_pred)
        if abs_sum is None:
            abs_sum = np.zeros_like(abs_err)
        if opts.keep_predictions:
            predictions.append((t, np.asarray(y_pred, dtype=float)))
        record = {"t": t, "abs_err": [float(v) for v in abs_err]}
        if t > opts.skip_first:
            abs_sum += abs_err
            counted += 1
            mae_avg = float(np.mean(abs_sum / counted))
            mae_curve.append(mae_avg)
            record["mae_avg_so_far"] = mae_avg
        if is_mores and opts.diag_every > 0 and t % opts.diag_every == 0:
            record.update(_diag_record(learner, opts))
        records.append(record)
    if counted == 0:
        per_output = np.zeros(0)
        average = float("nan")
    else:
        per_output = abs_sum / counted
        average = float(np.mean(per_output))
    return EvalReport(
        per_output_mae=per_output,
        average_mae=average,
        mae_curve=mae_curve,
        records=records,
        predictions=predictions,
        rounds=t,
        complete=complete,
        error=error,
    )


def _correlation_normalize(m):
    """Scale a PSD-like matrix to unit diagonal; zero-variance rows keep a
    unit diagonal with zero off-diagonals."""
    diag = np.diag(m).copy()
    n = m.shape[0]
    out = np.eye(n)
    scale = np.sqrt(np.maximum(diag, 0.0))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if scale[i] > 0 and scale[j] > 0:
                out[i, j] = m[i, j] / (scale[i] * scale[j])
    return out


def structure_diagnostics(state, stats, hp):
    """Learned correlation structure of the residual errors and of the
    coefficient change.

    The residual matrix is the correlation normalization of
    (eta/alpha) (Gamma^-1 - I), which unwinds the metric update back to
    the decayed residual Gram; in the long run that Gram is proportional
    to the residual covariance.  The coefficient-change matrix applies
    the same normalization to Omega^-1 - I.
    """
    m = state.gamma.shape[0]
    eye = np.eye(m)
    if hp.eta > 0:
        residual_raw = (hp.eta / hp.alpha) * (spd_inverse(state.gamma) - eye)
    else:
        residual_raw = np.zeros((m, m))
    change_raw = spd_inverse(state.omega) - eye
    return _correlation_normalize(residual_raw), _correlation_normalize(change_raw)


def convergence_trace(learner, stream, p_ref):
    """Frobenius distance of the learned coefficients to a reference
    matrix after each round."""
    p_ref = np.asarray(p_ref, dtype=float)
    if p_ref.shape != learner.state.p.shape:
        raise DimensionMismatch(
            f"reference shape {p_ref.shape} vs coefficients {learner.state.p.shape}"
        )
    trace = []
    for sample in stream:
        learner.update(sample.x, sample.y)
        trace.append(float(np.linalg.norm(learner.state.p - p_ref)))
    return trace


def throughput_bench(d, m, samples, hp=None, warmup_fraction=0.1, seed=0):
    """Measure steady-state update throughput of the MORES solver chain.

    Runs a random stream of the given shape, discards the warmup prefix,
    and reports updates/sec plus median per-phase times for the three
    solves (seconds).
    """
    if d < 1 or m < 1 or samples < 1:
        raise DimensionMismatch("d, m, samples must all be >= 1")
    hp = (hp or core.HyperParams()).validate()
    rng = np.random.Generator(np.random.PCG64(seed))
    xs = rng.standard_normal((samples, d))
    ys = rng.standard_normal((samples, m))
    state = core.RegressionState.initial(d, m)
    stats = SufficientStats(d=d, m=m, mu=hp.mu)
    warmup = int(samples * warmup_fraction)
    step_times = []
    phase = {"p_solve": [], "omega_update": [], "gamma_update": []}
    total_start = None
    from . import suffstats as ss
    for t in range(samples):
        sample = Sample(x=xs[t], y=ys[t])
        if t == warmup:
            total_start = time.perf_counter()
        t0 = time.perf_counter()
        core.predict(state, sample.x)
        stats = ss.fold(stats, sample)
        t1 = time.perf_counter()
        p_new = core.solve_p(state, stats, hp)
        t2 = time.perf_counter()
        omega_new = core.update_omega(state, p_new, hp)
        t3 = time.perf_counter()
        gamma_new = core.update_gamma(p_new, stats, hp)
        t4 = time.perf_counter()
        state = core.RegressionState(p=p_new, omega=omega_new, gamma=gamma_new,
                                     round=t + 1)
        if t >= warmup:
            step_times.append(t4 - t0)
            phase["p_solve"].append(t2 - t1)
            phase["omega_update"].append(t3 - t2)
            phase["gamma_update"].append(t4 - t3)
    elapsed = time.perf_counter() - total_start
    n_timed = samples - warmup
    return {
        "d": d,
        "m": m,
        "samples": samples,
        "warmup": warmup,
        "updates_per_sec": n_timed / elapsed if elapsed > 0 else float("inf"),
        "median_step_sec": float(np.median(step_times)),
        "median_phase_sec": {k: float(np.median(v)) for k, v in phase.items()},
    }


def sweep(param_grid, stream, base_hp, d, m, opts=None):
    """Prequential runs over the cartesian product of a hyperparameter grid.

    param_grid maps HyperParams field names to value lists.  Each grid
    point runs a fresh MORES learner on the same stream; failures are
    recorded per cell and do not stop the sweep.  Returns a flat list of
    {param: value, ..., "average_mae": float, "error": str|None} rows.
    """
    if not param_grid:
        raise DimensionMismatch("parameter grid must be non-empty")
    stream = list(stream)
    names = sorted(param_grid)
    rows = []
    for combo in itertools.product(*(param_grid[k] for k in names)):
        overrides = dict(zip(names, combo))
        row = dict(overrides)
        try:
            hp = core.HyperParams(**{**base_hp.__dict__, **overrides}).validate()
            learner = core.MoresLearner(d, m, hp)
            report = prequential_run(learner, stream, opts)
            row["average_mae"] = report.average_mae
            row["error"] = report.error
        except MoresError as exc:
            row["average_mae"] = float("nan")
            row["error"] = str(exc)
        rows.append(row)
    return rows


def load_prediction_log(path):
    """Read an external prediction log (JSON lines with fields "t" and
    "y_pred") into a round -> vector mapping."""
    log = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            log[int(rec["t"])] = np.asarray(rec["y_pred"], dtype=float)
    return log


def mae_from_log(stream, log, skip_first=0):
    """Per-output and average MAE of externally produced predictions
    against a stream, for side-by-side comparison with local learners."""
    abs_sum = None
    counted = 0
    for t, sample in enumerate(stream, start=1):
        if t <= skip_first or t not in log:
            continue
        err = np.abs(sample.y - log[t])
        abs_sum = err if abs_sum is None else abs_sum + err
        counted += 1
    if counted == 0:
        return np.zeros(0), float("nan")
    per_output = abs_sum / counted
    return per_output, float(np.mean(per_output))
