import math

import numpy as np
import pytest

from rfeh_diversity.channel import ChannelConfig, harmonic_number
from rfeh_diversity.combining import CombinerKind
from rfeh_diversity.power import reference_profiles
from rfeh_diversity.simulation import (
    CrossoverQuery,
    ExperimentSpec,
    Mode,
    NoSignChangeError,
    analytic_mean_powers,
    bisect,
    collect_statistics,
    find_crossover,
    find_no_harvesting_boundary,
    run_sweep,
)

PL = 1e-3
mW = 1e-3
PROFILES = reference_profiles()
SC, EGC, MRC = CombinerKind.SC, CombinerKind.EGC, CombinerKind.MRC


def spec(k, trials=1_000_000, grid=(0.5, 1.0, 2.0), seed=11, **kw):
    return ExperimentSpec(ChannelConfig(k, PL), transmit_powers=grid, trials=trials, seed=seed, **kw)


# -- closed-form oracles (hand arithmetic over the reference constants) --------


def test_analytic_mrc_boundary_point():
    h, n = analytic_mean_powers(MRC, 2, PL, 1.0, 2.0, PROFILES[MRC])
    assert h == pytest.approx(4 * mW) and n == pytest.approx(0.0, abs=1e-15)


def test_analytic_egc_root():
    root = 3 * mW / ((1 + math.pi / 4) * PL)
    assert root == pytest.approx(1.680, abs=5e-4)
    assert analytic_mean_powers(EGC, 2, PL, 1.0, root, PROFILES[EGC])[1] == pytest.approx(0, abs=1e-15)


def test_analytic_sc_single_antenna():
    h, n = analytic_mean_powers(SC, 1, 2e-3, 0.4, 1.5, PROFILES[SC])
    assert (h, n) == pytest.approx((0.4 * 1.5 * 2e-3, 0.4 * 1.5 * 2e-3 - 0.5 * mW))


@pytest.mark.parametrize("k", range(1, 12))
def test_expectation_ordering(k):
    g = [analytic_mean_powers(t, k, PL, 1.0, 1.0, PROFILES[t])[0] for t in (SC, EGC, MRC)]
    if k == 1:
        assert g[0] == pytest.approx(g[1]) and g[1] == pytest.approx(g[2])
    else:
        assert g[0] < g[1] < g[2]


def test_sc_k8_beats_mrc_k2():
    sc8 = analytic_mean_powers(SC, 8, PL, 1.0, 1.0, PROFILES[SC])[0]
    mrc2 = analytic_mean_powers(MRC, 2, PL, 1.0, 1.0, PROFILES[MRC])[0]
    assert sc8 / mrc2 == pytest.approx(harmonic_number(8) / 2)
    assert sc8 > mrc2


# -- Monte Carlo --------------------------------------------------------------------


def test_sweep_examples():
    r2 = run_sweep(spec(2, grid=(1.0,)))
    row = r2.row(MRC, 1.0)
    assert abs(row.mean_harvested - 2e-3) < 3 * row.harvested_ci_halfwidth_95 / 1.96
    r8 = run_sweep(spec(8, grid=(1.0,)))
    row = r8.row(SC, 1.0)
    assert abs(row.mean_harvested - 2.7179e-3) < 3 * row.harvested_ci_halfwidth_95 / 1.96


def test_sweep_mean_identity_and_ci():
    res = run_sweep(spec(4, trials=20_000))
    for r in res.rows:
        beta = PROFILES[r.technique].beta
        fixed = PROFILES[r.technique].fixed_power(4)
        assert r.mean_net == pytest.approx(r.mean_harvested - beta - fixed, rel=1e-12, abs=1e-15)
        assert r.ci_halfwidth_95 >= 0
        assert r.trials_used == 20_000


@pytest.mark.parametrize("k", [1, 2, 4, 8])
def test_oracle_agreement_three_standard_errors(k):
    res = run_sweep(spec(k))
    for r in res.rows:
        se = r.harvested_ci_halfwidth_95 / 1.959963984540054
        assert abs(r.mean_harvested - r.analytic_mean_harvested) < 3 * se


def test_single_trial_deterministic():
    a = run_sweep(spec(3, trials=1))
    b = run_sweep(spec(3, trials=1))
    assert a.rows == b.rows
    assert all(math.isinf(r.ci_halfwidth_95) for r in a.rows)


def test_parallel_matches_serial():
    s = spec(4, trials=300_001)
    assert run_sweep(s, workers=1).rows == run_sweep(s, workers=4).rows


def test_per_trial_dominance_of_mrc():
    from rfeh_diversity.channel import sample_channels
    from rfeh_diversity.combining import batch_weights, combined_power

    h = sample_channels(ChannelConfig(6, PL), 3, 0, 50_000)
    p = {t: combined_power(h, batch_weights(t, h)) for t in (SC, EGC, MRC)}
    assert np.all(p[SC] <= p[MRC] * (1 + 1e-12))
    assert np.all(p[EGC] <= p[MRC] * (1 + 1e-12))


def test_spec_validation():
    with pytest.raises(ValueError):
        spec(2, techniques=())
    with pytest.raises(ValueError):
        spec(2, grid=(1.0, 0.5))
    with pytest.raises(ValueError):
        spec(2, grid=())
    with pytest.raises(ValueError):
        spec(2, trials=0)
    with pytest.raises(ValueError):
        spec(2, techniques=(CombinerKind.NUMERIC_P2,))


# -- roots ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kind, expected",
    [
        (MRC, 4 * mW / (2 * PL)),
        (EGC, 3 * mW / ((1 + math.pi / 4) * PL)),
        (SC, 0.5 * mW / (1.5 * PL)),
    ],
)
def test_boundaries_k2(kind, expected):
    s = spec(2, trials=1)
    res = find_no_harvesting_boundary(kind, s, Mode.ANALYTIC, bracket=(0.01, 3.0))
    assert res.root == pytest.approx(expected, abs=1e-6)
    assert abs(analytic_mean_powers(kind, 2, PL, 1.0, res.root, PROFILES[kind])[1]) < 1e-9


def test_reference_boundary_values():
    s = spec(2, trials=1)
    assert find_no_harvesting_boundary(MRC, s, bracket=(0.1, 3)).root == pytest.approx(2.000, abs=5e-4)
    assert find_no_harvesting_boundary(EGC, s, bracket=(0.1, 3)).root == pytest.approx(1.680, abs=5e-4)
    assert find_no_harvesting_boundary(SC, s, bracket=(0.1, 3)).root == pytest.approx(0.3333, abs=5e-5)


def test_crossovers_k8():
    s = spec(8, trials=1)
    h8 = harmonic_number(8)
    egc8 = 1 + 7 * math.pi / 4
    r = find_crossover(CrossoverQuery(SC, MRC, (0.1, 3)), s)
    assert r.root == pytest.approx(6.5 / (8 - h8), abs=1e-6)
    assert r.root == pytest.approx(1.2306, abs=1e-4)
    r = find_crossover(CrossoverQuery(EGC, MRC, (0.1, 3)), s)
    assert r.root == pytest.approx(1.0 / (8 - egc8), abs=1e-6)
    r = find_crossover(CrossoverQuery(SC, EGC, (0.1, 3)), s)
    assert r.root == pytest.approx(5.5 / (egc8 - h8), abs=1e-6)
    assert abs(r.residual) < 1e-9


def test_crossover_errors():
    s = spec(8, trials=1)
    with pytest.raises(NoSignChangeError):
        find_crossover(CrossoverQuery(MRC, MRC, (0.1, 3)), s)
    with pytest.raises(NoSignChangeError):
        find_crossover(CrossoverQuery(SC, MRC, (0.1, 3)), spec(2, trials=1))
    with pytest.raises(ValueError):
        CrossoverQuery(SC, MRC, (3, 0.1))


def test_boundary_requires_sign_change():
    with pytest.raises(NoSignChangeError, match="no zero crossing in bracket"):
        find_no_harvesting_boundary(MRC, spec(2, trials=1), bracket=(0.1, 1.0))


def test_monte_carlo_boundary_brackets_analytic_root():
    res = find_no_harvesting_boundary(MRC, spec(2, trials=200_000), Mode.MONTE_CARLO, bracket=(0.1, 3))
    assert res.lower <= 2.0 <= res.upper
    assert res.upper - res.lower < 0.5


def test_bisect_plain():
    root, lo, hi = bisect(lambda x: x * x - 2, 0, 2, xtol=1e-12)
    assert root == pytest.approx(math.sqrt(2), abs=1e-11)
    with pytest.raises(NoSignChangeError):
        bisect(lambda x: 1.0, 0, 1)


def test_statistics_paired_difference():
    st = collect_statistics(spec(8, trials=100_000))
    a, ca = st.net(SC, 1.0)
    b, cb = st.net(MRC, 1.0)
    d, cd = st.net_difference(SC, MRC, 1.0)
    assert d == pytest.approx(a - b, rel=1e-12)
    assert cd > 0
