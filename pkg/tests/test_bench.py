import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import shotmeta.bench as bench
from shotmeta.bench import (
    ACCURACY_LEVELS,
    SuccessCurve,
    SuccessSample,
    TrialRecord,
    aggregate_samples,
    derive_seed,
    eval_curve,
    fit_success_curve,
    read_records,
    run_benchmark,
    run_trial,
    success_fraction,
    write_records,
)
from shotmeta.errors import InsufficientDataError, InvalidArgumentError
from shotmeta.estimator import EnergyEstimate
from shotmeta.spsa import SpsaConfig

from conftest import E0

from oracles import REFERENCE_CURVES, model

CHP_CURVE = SuccessCurve(*REFERENCE_CURVES[1], accuracy_d=0.0015)


def exact_samples(a, b, c, ns, d=0.0015, trials=1):
    # fractional "successes" so fraction() returns the model value exactly
    return [SuccessSample(n, trials, {d: model(a, b, c, n) * trials}) for n in ns]


def strip_ts(doc):
    doc = dict(doc)
    doc.pop("timestamp", None)
    return doc


def test_run_trial_deterministic(h2):
    cfg = SpsaConfig(maxiter=20, shots_per_eval=64)
    a, b = run_trial(cfg, h2, 1234), run_trial(cfg, h2, 1234)
    assert json.dumps(strip_ts(a.to_json()), sort_keys=True) == json.dumps(strip_ts(b.to_json()), sort_keys=True)


def test_run_trial_accounting(h2):
    rec = run_trial(SpsaConfig(maxiter=100, shots_per_eval=500), h2, 7)
    assert rec.calibration_shots == 2 * 10 * 500
    assert rec.shots_used == 100000 + rec.calibration_shots
    assert rec.true_energy >= E0 - 1e-9


def test_run_trial_statevector_costs_nothing(h2):
    rec = run_trial(SpsaConfig(maxiter=10), h2, 3, statevector=True)
    assert rec.shots_used == 0
    assert rec.statevector


def test_run_trial_rejects_tiny_shots(h2):
    with pytest.raises(InvalidArgumentError):
        run_trial(SpsaConfig(shots_per_eval=1), h2, 0)


def test_aborted_trial_is_recorded(h2, monkeypatch):
    monkeypatch.setattr(bench, "estimate_energy", lambda *a: EnergyEstimate(math.nan, 2))
    rec = run_trial(SpsaConfig(maxiter=5, shots_per_eval=2), h2, 0)
    assert rec.aborted and rec.true_energy == math.inf
    doc = rec.to_json()
    assert doc["true_energy"] is None and doc["aborted"]
    assert TrialRecord.from_json(json.loads(json.dumps(doc))).true_energy == math.inf
    assert success_fraction([rec], 1.0, E0) == (0.0, 0.0)


def test_derive_seed_index_based():
    assert derive_seed(5, 0, 1) == derive_seed(5, 0, 1)
    assert len({derive_seed(5, j, i) for j in range(3) for i in range(50)}) == 150
    assert derive_seed(5, 0, 1) != derive_seed(6, 0, 1)
    assert 0 <= derive_seed(2**64 - 1, 9) < 2**63


def test_benchmark_worker_count_irrelevant(h2):
    cfg = SpsaConfig(maxiter=5)
    one = run_benchmark(cfg, h2, [4, 16], 3, master_seed=11, workers=1)
    two = run_benchmark(cfg, h2, [4, 16], 3, master_seed=11, workers=2)
    assert [strip_ts(r.to_json()) for r in one] == [strip_ts(r.to_json()) for r in two]
    assert [r.config.shots_per_eval for r in one] == [4, 4, 4, 16, 16, 16]


def test_benchmark_energies_respect_variational_bound(h2):
    records = run_benchmark(SpsaConfig(maxiter=30), h2, [8, 64], 20, master_seed=3)
    energies = np.array([r.true_energy for r in records])
    assert np.all(energies >= E0 - 1e-9)
    assert energies.mean() > E0


def test_jsonl_round_trip(tmp_path, h2):
    path = tmp_path / "trials.jsonl"
    records = run_benchmark(SpsaConfig(maxiter=5), h2, [4], 3, master_seed=1)
    write_records(path, records[:2], meta={"seed": 1})
    write_records(path, records[2:], meta={"seed": 1})
    lines = path.read_text().splitlines()
    assert len(lines) == 4
    assert json.loads(lines[0]) == {"meta": {"seed": 1}}
    again = read_records(path)
    assert [r.to_json() for r in again] == [r.to_json() for r in records]


def _fake_records(energies, shots=1000):
    cfg = SpsaConfig()
    return [TrialRecord(i, cfg, shots, np.zeros(8), e, timestamp=0.0) for i, e in enumerate(energies)]


def test_success_fraction_examples():
    energies = [E0 + 0.001] * 3416 + [E0 + 0.1] * (10000 - 3416)
    p, se = success_fraction(_fake_records(energies), 0.0015, E0)
    assert p == 0.3416
    assert se == pytest.approx(math.sqrt(0.3416 * 0.6584 / 10000))
    assert success_fraction(_fake_records([E0] * 5), 0.0015, E0) == (1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        success_fraction([], 0.0015, E0)
    with pytest.raises(InvalidArgumentError):
        success_fraction(_fake_records([E0]), 0.0, E0)


@given(st.lists(st.floats(0, 0.02), min_size=1, max_size=50), st.floats(1e-4, 0.01), st.floats(1e-4, 0.01))
def test_success_fraction_nested(gaps, d1, d2):
    records = _fake_records([E0 + g for g in gaps])
    lo, hi = sorted((d1, d2))
    assert success_fraction(records, lo, E0)[0] <= success_fraction(records, hi, E0)[0]


def test_aggregate_samples():
    recs = _fake_records([E0 + 0.001, E0 + 0.004, E0 + 0.1], shots=100)
    recs += _fake_records([E0 + 0.0001, E0 + 0.0001], shots=500)
    samples = aggregate_samples(recs, ACCURACY_LEVELS, e0=E0)
    assert [s.n for s in samples] == [100, 500]
    assert samples[0].trials == 3
    assert [samples[0].successes[d] for d in ACCURACY_LEVELS] == [1, 1, 2, 2, 2]
    assert all(s.successes[d] <= s.trials for s in samples for d in ACCURACY_LEVELS)
    again = SuccessSample.from_json(json.loads(json.dumps(samples[0].to_json())))
    assert again == samples[0]


@pytest.mark.parametrize("a, b, c", [(0.4185, 9.35e-6, 0.0)] + list(REFERENCE_CURVES.values()))
def test_fit_recovers_noise_free(a, b, c):
    curve = fit_success_curve(exact_samples(a, b, c, [10**4, 10**5, 10**6, 10**7]), 0.0015)
    assert curve.a == pytest.approx(a, rel=1e-12)
    assert curve.b == pytest.approx(b, rel=1e-12)
    # offsets near 1e-17 are about one ulp of the data, so c is only known to that
    assert curve.c == pytest.approx(c, abs=1e-16)
    assert curve.fit_residual < 1e-30


def test_fit_all_zero_is_degenerate():
    samples = [SuccessSample(n, 100, {0.0015: 0}) for n in (10, 100, 1000)]
    curve = fit_success_curve(samples, 0.0015)
    assert (curve.a, curve.c) == (0.0, 0.0)
    assert not curve.b_identifiable
    assert curve.no_signal
    assert eval_curve(curve, 10**9) == 0.0


def test_fit_needs_three_shot_counts():
    samples = [SuccessSample(n, 100, {0.0015: 10}) for n in (10, 100)]
    with pytest.raises(InsufficientDataError):
        fit_success_curve(samples, 0.0015)
    with pytest.raises(InsufficientDataError):
        fit_success_curve(samples + [SuccessSample(1000, 10, {0.003: 1})], 0.0015)


def test_fit_noisy_recovery():
    # Monte-Carlo oracle: binomial draws around the noise-free generator
    a, b, c = 0.3416, 3.60e-6, 0.0
    ns = [10**4, 10**5, 10**6, 10**7]
    rng = np.random.default_rng(20240501)
    for _ in range(100):
        samples = [SuccessSample(n, 10000, {0.0015: int(rng.binomial(10000, model(a, b, c, n)))}) for n in ns]
        curve = fit_success_curve(samples, 0.0015)
        assert abs(curve.a - a) <= 0.02
        assert abs(curve.b - b) <= 0.2 * b


def test_fit_duplicate_sample_invariance():
    a, b, c = 0.5, 1e-5, 0.0
    ns = [10**4, 3 * 10**4, 10**5, 10**6]
    base = fit_success_curve(exact_samples(a, b, c, ns, trials=10), 0.0015)
    dup = fit_success_curve(exact_samples(a, b, c, ns + [10**5], trials=10), 0.0015)
    assert (dup.a, dup.b) == pytest.approx((base.a, base.b), rel=1e-8)
    assert dup.c == pytest.approx(base.c, abs=1e-12)


def test_fit_respects_constraints():
    # data above 1 - c forces the a + c <= 1 boundary
    samples = [SuccessSample(n, 10, {0.0015: k}) for n, k in [(10, 10), (100, 10), (1000, 10), (1, 10)]]
    curve = fit_success_curve(samples, 0.0015)
    assert curve.a >= 0 and curve.c >= 0 and curve.a + curve.c <= 1 + 1e-12
    assert eval_curve(curve, 10**6) == pytest.approx(1.0, abs=1e-9)


def test_eval_curve_table1_chp():
    assert eval_curve(CHP_CURVE, 0) == pytest.approx(9.56e-11, rel=1e-12)
    assert eval_curve(CHP_CURVE, 10**12) == pytest.approx(0.3416, abs=1e-9)
    assert eval_curve(CHP_CURVE, 10**6) == pytest.approx(0.3416 * (1 - math.exp(-3.6)) + 9.56e-11, abs=1e-12)
    assert eval_curve(CHP_CURVE, 10**6) == pytest.approx(0.33227, abs=1e-4)


@given(
    st.floats(0, 1), st.floats(0, 1e-3), st.floats(0, 1),
    st.integers(0, 10**9), st.integers(0, 10**9),
)
def test_eval_curve_monotone(a, b, c, n1, n2):
    if a + c > 1:
        a, c = a / (a + c), c / (a + c)
    curve = SuccessCurve(a, b, c, 0.0015)
    lo, hi = sorted((n1, n2))
    assert eval_curve(curve, lo) <= eval_curve(curve, hi)
    assert 0 <= eval_curve(curve, hi) <= 1


def test_curve_validation_and_json():
    with pytest.raises(InvalidArgumentError):
        SuccessCurve(0.8, 1e-5, 0.3, 0.0015)
    with pytest.raises(InvalidArgumentError):
        SuccessCurve(-0.1, 1e-5, 0.0, 0.0015)
    again = SuccessCurve.from_json(json.loads(json.dumps(CHP_CURVE.to_json())))
    assert again == CHP_CURVE
