"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with `pytest -s tests/test_acceptance.py` to see them
as they execute)."""

import json
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from mores import core
from mores.baselines import somor_update
from mores.cli import main as cli_main
from mores.core import HyperParams, MoresLearner, RegressionState
from mores.datagen import SynthConfig, gen_correlated, gen_drifting, gen_noiseless_linear
from mores.harness import (
    ReportOptions,
    prequential_run,
    structure_diagnostics,
    throughput_bench,
)
from mores.suffstats import Sample, SufficientStats, fold, weighted_loss


def report(num, description, ok):
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {description}")
    assert ok, f"criterion {num} failed: {description}"


# ------------------------------------------------------------ criterion 1

def test_criterion_1_lossless_statistics():
    rng = np.random.Generator(np.random.PCG64(1001))
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        mu = float(rng.choice([0.0, 0.5, 0.9, 1.0]))
        t = int(rng.integers(1, 51))
        stats = SufficientStats(d=d, m=m, mu=mu)
        history = []
        for _ in range(t):
            x = rng.standard_normal(d)
            y = rng.standard_normal(m)
            history.append((x, y))
            stats = fold(stats, Sample(x=x, y=y))
        p = rng.standard_normal((m, d))
        b = rng.standard_normal((m, m))
        gamma = b @ b.T + 0.1 * np.eye(m)
        got = weighted_loss(stats, p, gamma)
        explicit = 0.0
        n = len(history)
        for i, (x, y) in enumerate(history, start=1):
            w = 1.0 if n - i == 0 else mu ** (n - i)
            r = y - p @ x
            explicit += w * float(r @ gamma @ r)
        worst = max(worst, abs(got - explicit) / max(abs(explicit), 1e-12))
    elapsed = time.perf_counter() - start
    report(1, f"lossless statistics (worst rel err {worst:.2e}, {elapsed:.1f}s)",
           worst <= 1e-9 and elapsed < 5.0)


# ------------------------------------------- criteria 2-4 (shared runs)

@pytest.fixture(scope="module")
def alternation_runs():
    rng = np.random.Generator(np.random.PCG64(2002))
    eig_min = np.inf
    eig_max = -np.inf
    worst_residual = 0.0
    worst_descent = -np.inf
    start = time.perf_counter()
    for _ in range(50):
        d = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        hp = HyperParams(
            alpha=float(10 ** rng.uniform(-2, 2)),
            beta=float(10 ** rng.uniform(-2, 2)),
            rho=float(10 ** rng.uniform(-2, 2)),
            eta=float(rng.choice([0.0, 1.0]) * 10 ** rng.uniform(-1, 3)),
            mu=float(rng.choice([0.0, 0.5, 0.9, 1.0])),
        ).validate()
        state = RegressionState.initial(d, m)
        stats = SufficientStats(d=d, m=m, mu=hp.mu)
        p_star = rng.standard_normal((m, d))
        for t in range(300):
            x = rng.standard_normal(d)
            y = p_star @ x + 0.1 * rng.standard_normal(m)
            prev = state.copy()
            stats = fold(stats, Sample(x=x, y=y))
            p_new = core.solve_p(state, stats, hp)

            lhs = state.omega @ p_new + hp.alpha * state.gamma @ p_new @ stats.c_xx
            rhs = state.omega @ state.p + hp.alpha * state.gamma @ stats.c_xy.T
            scale = (np.linalg.norm(state.omega @ state.p)
                     + hp.alpha * np.linalg.norm(state.gamma @ stats.c_xy.T))
            worst_residual = max(
                worst_residual, np.linalg.norm(lhs - rhs) / max(scale, 1e-300))

            omega_new = core.update_omega(state, p_new, hp)
            gamma_new = core.update_gamma(p_new, stats, hp)
            for mat in (omega_new, gamma_new):
                values = np.linalg.eigvalsh(mat)
                eig_min = min(eig_min, values[0])
                eig_max = max(eig_max, values[-1])

            j0 = core.objective_eval(prev, prev, stats, hp)
            cand = RegressionState(p=p_new, omega=prev.omega, gamma=prev.gamma)
            j1 = core.objective_eval(cand, prev, stats, hp)
            cand = RegressionState(p=p_new, omega=omega_new, gamma=prev.gamma)
            j2 = core.objective_eval(cand, prev, stats, hp)
            cand = RegressionState(p=p_new, omega=omega_new, gamma=gamma_new)
            j3 = core.objective_eval(cand, prev, stats, hp)
            for before, after in ((j0, j1), (j1, j2), (j2, j3)):
                worst_descent = max(
                    worst_descent,
                    (after - before) / max(abs(before), 1.0))

            state = RegressionState(p=p_new, omega=omega_new,
                                    gamma=gamma_new, round=t + 1)
    return {
        "eig_min": eig_min,
        "eig_max": eig_max,
        "worst_residual": worst_residual,
        "worst_descent": worst_descent,
        "elapsed": time.perf_counter() - start,
    }


def test_criterion_2_metric_eigenvalue_bound(alternation_runs):
    r = alternation_runs
    ok = (r["eig_min"] > 0.0 and r["eig_max"] <= 1.0 + 1e-8
          and r["elapsed"] < 30.0)
    report(2, f"metric eigenvalues in (0, 1] "
              f"(range [{r['eig_min']:.2e}, {r['eig_max']:.10f}], "
              f"{r['elapsed']:.1f}s)", ok)


def test_criterion_3_p_solver_correctness(alternation_runs):
    stream_ok = alternation_runs["worst_residual"] <= 1e-8
    # dense vectorized oracle on 20 small instances
    rng = np.random.Generator(np.random.PCG64(3003))
    oracle_ok = True
    for _ in range(20):
        m = int(rng.integers(1, 6))
        d = int(rng.integers(1, 6))
        b = rng.standard_normal((m, m))
        omega = b @ b.T + 0.1 * np.eye(m)
        omega /= np.linalg.eigvalsh(omega)[-1]
        b = rng.standard_normal((m, m))
        gamma = b @ b.T + 0.1 * np.eye(m)
        gamma /= np.linalg.eigvalsh(gamma)[-1]
        state = RegressionState(p=rng.standard_normal((m, d)),
                                omega=omega, gamma=gamma)
        stats = SufficientStats(d=d, m=m, mu=0.9)
        for _ in range(int(rng.integers(1, 10))):
            stats = fold(stats, Sample(x=rng.standard_normal(d),
                                       y=rng.standard_normal(m)))
        hp = HyperParams(alpha=float(10 ** rng.uniform(-1, 1)))
        got = core.solve_p(state, stats, hp)
        a = (np.kron(np.eye(d), omega)
             + hp.alpha * np.kron(stats.c_xx, gamma))
        rhs = omega @ state.p + hp.alpha * gamma @ stats.c_xy.T
        want = np.linalg.solve(a, rhs.flatten(order="F")).reshape(
            (m, d), order="F")
        if np.linalg.norm(got - want) > 1e-8 * max(1.0, np.linalg.norm(want)):
            oracle_ok = False
    report(3, f"coefficient solver residual "
              f"(worst {alternation_runs['worst_residual']:.2e}) "
              f"and dense-oracle agreement", stream_ok and oracle_ok)


def test_criterion_4_block_descent(alternation_runs):
    worst = alternation_runs["worst_descent"]
    report(4, f"block descent of the objective (worst increase {worst:.2e})",
           worst <= 1e-9)


# ------------------------------------------------------------ criterion 5

def test_criterion_5_noiseless_convergence():
    start = time.perf_counter()
    stream, p_star = gen_noiseless_linear(0, 500, 11, 3)
    hp = HyperParams(alpha=1.0, beta=1.0, rho=1.0, eta=100.0, mu=1.0)
    learner = MoresLearner(11, 3, hp)
    prev_dist = np.inf
    monotone = True
    for s in stream:
        learner.update(s.x, s.y)
        dist = np.linalg.norm(learner.state.p - p_star)
        if dist > prev_dist + 1e-10:
            monotone = False
        prev_dist = dist
    elapsed = time.perf_counter() - start
    rel = prev_dist / np.linalg.norm(p_star)
    omega_dev = np.linalg.norm(learner.state.omega - np.eye(3))
    gamma_dev = np.linalg.norm(learner.state.gamma - np.eye(3))
    ok = (monotone and rel < 1e-3 and omega_dev < 0.05 and gamma_dev < 0.05
          and elapsed < 10.0)
    report(5, f"noiseless convergence (rel dist {rel:.2e}, "
              f"omega dev {omega_dev:.2e}, gamma dev {gamma_dev:.2e}, "
              f"{elapsed:.1f}s)", ok)


# ------------------------------------------- criteria 6-7 (shared panel)

@pytest.fixture(scope="module")
def synthetic_panel():
    rows = []
    for seed in range(10):
        stream, p_real = gen_correlated(SynthConfig(seed=seed))
        learner = MoresLearner(11, 3, HyperParams())
        d100 = None
        for t, s in enumerate(stream, start=1):
            learner.update(s.x, s.y)
            if t == 100:
                d100 = np.linalg.norm(learner.state.p - p_real)
        d500 = np.linalg.norm(learner.state.p - p_real)
        residual_corr, _ = structure_diagnostics(learner.state, learner.stats,
                                                 learner.hp)
        rows.append({
            "rel100": d100 / np.linalg.norm(p_real),
            "rel500": d500 / np.linalg.norm(p_real),
            "c13": residual_corr[0, 2],
            "c23": residual_corr[1, 2],
            "c12": residual_corr[0, 1],
        })
    return rows


def test_criterion_6_synthetic_convergence(synthetic_panel):
    rel100 = float(np.median([r["rel100"] for r in synthetic_panel]))
    rel500 = float(np.median([r["rel500"] for r in synthetic_panel]))
    report(6, f"correlated-synthetic convergence "
              f"(median rel dist t=100 {rel100:.3f}, t=500 {rel500:.3f})",
           rel100 < 0.15 and rel500 < 0.10)


def test_criterion_7_structure_recovery(synthetic_panel):
    c13 = float(np.median([r["c13"] for r in synthetic_panel]))
    c23 = float(np.median([r["c23"] for r in synthetic_panel]))
    c12 = float(np.median([r["c12"] for r in synthetic_panel]))
    ok = (0.42 <= c13 <= 0.72 and 0.42 <= c23 <= 0.72
          and -0.15 <= c12 <= 0.15)
    report(7, f"residual-correlation recovery "
              f"(medians c13={c13:.3f}, c23={c23:.3f}, c12={c12:.3f})", ok)


# ------------------------------------------------------------ criterion 8

def test_criterion_8_forgetting_factor():
    maes = {0.0: [], 0.9: [], 1.0: []}
    for seed in range(10):
        stream, _ = gen_drifting(seed, 400, 8, 3, switch_at=200)
        for mu in maes:
            learner = MoresLearner(8, 3, HyperParams(mu=mu))
            rep = prequential_run(learner, stream,
                                  ReportOptions(keep_predictions=False))
            maes[mu].append(rep.average_mae)
    med = {mu: float(np.median(v)) for mu, v in maes.items()}
    ok = med[0.9] < med[0.0] and med[0.9] < med[1.0]
    report(8, f"interior forgetting factor wins on drifting stream "
              f"(median MAE mu=0: {med[0.0]:.3f}, mu=0.9: {med[0.9]:.3f}, "
              f"mu=1: {med[1.0]:.3f})", ok)


# ------------------------------------------------------------ criterion 9

def test_criterion_9_somor_kkt():
    rng = np.random.Generator(np.random.PCG64(9009))
    equality_ok = True
    minimality_ok = True
    checked = 0
    while checked < 20:
        m = int(rng.integers(1, 4))
        d = int(rng.integers(1, 4))
        p = rng.standard_normal((m, d))
        x = rng.standard_normal(d)
        y = rng.standard_normal(m) * 3.0
        xi = float(rng.uniform(0.1, 1.0))
        new, updated = somor_update(p, x, y, xi)
        if not updated:
            continue
        checked += 1
        r = y - new @ x
        if abs(float(r @ r) - xi) > 1e-9 * xi:
            equality_ok = False

        gram = np.outer(x, x)

        def p_of(lam):
            lhs = np.eye(d) + lam * gram
            return np.linalg.solve(lhs, (p + lam * np.outer(y, x)).T).T

        def gap(lam):
            rr = y - p_of(lam) @ x
            return float(rr @ rr) - xi

        hi = 1.0
        while gap(hi) > 0:
            hi *= 2.0
        lam = brentq(gap, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
        oracle = p_of(lam)
        if np.linalg.norm(new - oracle) > 1e-6 * max(1.0, np.linalg.norm(oracle)):
            minimality_ok = False
    report(9, "slack-projection update: constraint equality and "
              "Frobenius minimality vs numeric oracle",
           equality_ok and minimality_ok)


# ----------------------------------------------------------- criterion 10

def test_criterion_10_throughput():
    r21 = throughput_bench(21, 7, 6000)
    r42 = throughput_bench(42, 7, 4000)
    rate = r21["updates_per_sec"]
    ratio = r42["median_step_sec"] / r21["median_step_sec"]
    ok = rate >= 2000 and ratio <= 4.5
    report(10, f"throughput {rate:.0f} updates/s at (d=21, m=7); "
               f"step-time ratio d 21->42 is {ratio:.2f}", ok)


# ----------------------------------------------------------- criterion 11

def test_criterion_11_cli_round_trip(tmp_path):
    from mores.harness import prequential_run as run_mem

    csv = tmp_path / "stream.csv"
    assert cli_main(["synth", "--seed", "21", "--samples", "150",
                     "--out", str(csv)]) == 0
    out = tmp_path / "r.jsonl"
    assert cli_main(["run", "--input", str(csv), "--out", str(out)]) == 0
    summary = json.loads((tmp_path / "r.summary.json").read_text())

    stream, _ = gen_correlated(SynthConfig(seed=21, samples=150))
    mem = run_mem(MoresLearner(11, 3, HyperParams()), stream)
    mae_match = (abs(summary["average_mae"] - mem.average_mae) <= 1e-12
                 and np.allclose(summary["per_output_mae"],
                                 mem.per_output_mae, atol=1e-12))

    bad = tmp_path / "bad.csv"
    bad.write_text("x1,x2,y1\n1,2,3\n1,2\n")
    exit_codes_ok = (
        cli_main(["run", "--input", str(bad)]) == 3
        and cli_main(["run", "--synth", "linear", "--samples", "10",
                      "--beta", "0", "--rho", "0"]) == 2
        and cli_main(["bench", "--samples", "0"]) == 2
    )
    report(11, "CLI round trip reproduces in-memory MAE and documented "
               "exit codes", mae_match and exit_codes_ok)
