import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from powerdist.distance import DissimilarityMatrix
from powerdist.errors import (DegenerateMatrixError, PowerDistError,
                              UnsupportedParameterError, VacuousRelationError)
from powerdist.fixtures import AnalyticSpace, sample_matrix
from powerdist.power_triangle import (PowerParams, TriplePolicy, boundary_p,
                                      boundary_sigma, check_relation,
                                      lower_bound_check, sigma_min,
                                      sigma_profile, tau)

INF = math.inf
ALL = TriplePolicy.ALL_TRIPLES
P_GRID = (-INF, -8.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0, 8.0, INF)


def test_params_validation():
    with pytest.raises(PowerDistError):
        PowerParams(1.0, 0.0)
    with pytest.raises(PowerDistError):
        PowerParams(1.0, INF)
    with pytest.raises(PowerDistError):
        PowerParams(math.nan, 1.0)


@pytest.mark.parametrize("p, expected", [
    (INF, 2 * 4.0), (2.0, 2 * math.sqrt(8.5)), (1.0, 5.0), (0.0, 4.0),
    (-1.0, 3.2), (-INF, 2.0)])
def test_tau_closed_forms(p, expected):
    assert tau(PowerParams(p, 1.0), 1.0, 4.0) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("p", [-1.0, 0.0, 1.0, 2.0])
def test_tau_closed_form_continuous(p):
    near = tau(PowerParams(p + 1e-9, 1.0), 1.0, 4.0)
    assert near == pytest.approx(tau(PowerParams(p, 1.0), 1.0, 4.0), rel=1e-7)


def test_tau_zero_leg():
    for p in (0.0, -1.0, -3.0, -INF):
        assert tau(PowerParams(p, 1.0), 0.0, 3.0) == 0.0
    assert tau(PowerParams(1.0, 1.0), 0.0, 3.0) == 3.0


def test_tau_on_arrays():
    out = tau(PowerParams(1.0, 2.0), np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    assert out.tolist() == [8.0, 12.0]


legs = st.floats(0.01, 100)


@given(legs, legs, st.floats(-20, 20), st.floats(0.01, 5), st.floats(0.1, 3))
def test_tau_monotone_in_p_and_sigma(a, b, p, dp, s):
    lo, hi = tau(PowerParams(p, s), a, b), tau(PowerParams(p + dp, s), a, b)
    assert lo <= hi * (1 + 1e-12)
    assert tau(PowerParams(p, s), a, b) <= tau(PowerParams(p, s * 1.5), a, b)


@given(legs, st.floats(-20, 20), st.floats(0.1, 3))
def test_tau_equal_legs_constant_in_p(a, p, s):
    assert tau(PowerParams(p, s), a, a) == pytest.approx(2 * s * a, rel=1e-12)


@given(legs, legs, st.floats(0.1, 3))
def test_tau_chain(a, b, s):
    vals = [tau(PowerParams(p, s), a, b) for p in (-INF, -1.0, 0.0, 1.0, INF)]
    for lo, hi in zip(vals, vals[1:]):
        assert lo <= hi + 1e-12 * hi


def test_triangle_on_ex321_sample():
    m = sample_matrix(AnalyticSpace.EX321, [0, 1, 4])
    r = check_relation(m, PowerParams(1, 1))
    assert not r.holds
    w = r.witness
    assert [m.labels[i] for i in w.triple] == ["0", "4", "1"]
    assert (w.lhs, w.rhs, w.deficit) == (4.0, 2.0, 2.0)


def test_colinear_points_hold_with_zero_deficit():
    m = DissimilarityMatrix.from_points([0, 1, 2])
    r = check_relation(m, PowerParams(1, 1))
    assert r.holds and r.witness.deficit == 0.0


def test_two_points_hold_trivially():
    m = DissimilarityMatrix.from_points([0, 1])
    assert check_relation(m, PowerParams(-1, 0.25)).holds
    assert sigma_min(m, 1.0).sigma == 0.0 and sigma_min(m, 1.0).witness is None


def test_tolerance_absorbs_rounding():
    d = [[0, 0.3, 0.1], [0.3, 0, 0.2], [0.1, 0.2, 0]]
    # 0.1 + 0.2 = 0.30000000000000004 but the other way the sum may round low
    d[0][1] = d[1][0] = 0.1 + 0.2 + 1e-13
    assert check_relation(DissimilarityMatrix(d), PowerParams(1, 1)).holds


def test_vacuous_all_triples():
    m = DissimilarityMatrix.from_points([0, 1, 2])
    for p in (0.0, -1.0, -INF):
        with pytest.raises(VacuousRelationError) as e:
            check_relation(m, PowerParams(p, 10.0), ALL)
        assert e.value.code == "vacuous-degenerate-triples"
    assert check_relation(m, PowerParams(1, 1), ALL).holds


def _random_cases(seed, count, nmax=8):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, nmax + 1))
        if rng.random() < 0.5:
            yield oracles.random_metric(rng, n)
        else:
            yield oracles.random_distance(rng, n)


def test_check_relation_matches_brute_force():
    rng = np.random.default_rng(11)
    for d in _random_cases(1, 150):
        p = float(rng.choice([-INF, -2.0, -1.0, 0.0, 0.5, 1.0, 2.0, INF]))
        s = float(rng.uniform(0.2, 3))
        m = DissimilarityMatrix(d)
        assert check_relation(m, PowerParams(p, s)).holds == oracles.relation_holds(d, p, s)
        if p > 0:
            assert (check_relation(m, PowerParams(p, s), ALL).holds
                    == oracles.relation_holds(d, p, s, all_triples=True))


def test_sigma_min_matches_brute_force():
    for d in _random_cases(2, 60):
        m = DissimilarityMatrix(d)
        for p in P_GRID:
            got = sigma_min(m, p).sigma
            assert got == pytest.approx(oracles.sigma_min(d, p), rel=1e-10)
            if p > 0:
                got = sigma_min(m, p, ALL).sigma
                assert got == pytest.approx(oracles.sigma_min(d, p, True), rel=1e-10)


def test_sigma_witness_realizes_value():
    for d in _random_cases(3, 30):
        m = DissimilarityMatrix(d)
        for p in (-1.0, 0.5, 2.0):
            s = sigma_min(m, p)
            if s.witness is None:
                continue
            x, y, z = s.witness.triple
            ratio = d[x][y] / (2 * oracles.direct_mean(d[x][z], d[z][y], p))
            assert ratio == pytest.approx(s.sigma, rel=1e-12)


def test_feasibility_consistency():
    for d in _random_cases(4, 60):
        m = DissimilarityMatrix(d)
        if m.n < 3:
            continue
        for p in (-2.0, 0.0, 1.0, INF):
            s = sigma_min(m, p).sigma
            if not (0 < s < INF):
                continue
            assert check_relation(m, PowerParams(p, s * (1 + 1e-9))).holds
            assert not check_relation(m, PowerParams(p, s * (1 - 1e-6))).holds


def test_infinite_sigma_when_mean_vanishes():
    # d(a, c) = 0 makes every mean through c at p <= 0 vanish
    d = [[0, 0, 1], [0, 0, 1], [1, 1, 0]]
    m = DissimilarityMatrix(d)
    s = sigma_min(m, -1.0)
    assert s.sigma == INF and s.witness.mean == 0.0
    assert sigma_min(m, 1.0).sigma == pytest.approx(oracles.sigma_min(d, 1.0))


def test_flag_only_agrees():
    for d in _random_cases(5, 60):
        m = DissimilarityMatrix(d)
        a = check_relation(m, PowerParams(1, 1))
        b = check_relation(m, PowerParams(1, 1), flag_only=True)
        assert a.holds == b.holds
        if not b.holds:
            assert b.witness.deficit > 0


def test_parallel_matches_sequential():
    rng = np.random.default_rng(9)
    m = DissimilarityMatrix(oracles.random_distance(rng, 200))
    for p in (-1.0, 1.0, INF):
        a = sigma_min(m, p, workers=1)
        b = sigma_min(m, p, workers=4)
        assert a == b
    a = check_relation(m, PowerParams(1, 1.5), workers=1)
    b = check_relation(m, PowerParams(1, 1.5), workers=4)
    assert a == b


def test_thread_env_var(monkeypatch):
    rng = np.random.default_rng(10)
    m = DissimilarityMatrix(oracles.random_distance(rng, 200))
    monkeypatch.setenv("POWERDIST_THREADS", "1")
    a = sigma_min(m, 2.0)
    monkeypatch.setenv("POWERDIST_THREADS", "3")
    assert sigma_min(m, 2.0) == a


def test_ties_keep_smallest_triple():
    m = DissimilarityMatrix.from_points([0, 1, 2, 3])
    r = check_relation(m, PowerParams(1, 1))
    assert r.witness.triple == (0, 2, 1)


def test_profile_antitone_and_boundary():
    for d in _random_cases(6, 40, nmax=12):
        prof = sigma_profile(DissimilarityMatrix(d), P_GRID)
        sig = prof.sigmas
        assert all(a >= b - 1e-10 for a, b in zip(sig, sig[1:]))
        for row in prof.rows:
            if row.p == 0.0:
                assert row.boundary is None
            else:
                assert row.boundary == boundary_sigma(row.p)


def test_profile_grid_must_increase():
    m = DissimilarityMatrix.from_points([0, 1, 3])
    with pytest.raises(PowerDistError):
        sigma_profile(m, [1.0, 0.0])
    with pytest.raises(PowerDistError):
        sigma_profile(m, [1.0, 1.0])
    with pytest.raises(PowerDistError):
        sigma_profile(m, [])


def test_boundary_curve():
    assert boundary_sigma(1) == 1.0
    assert boundary_sigma(0.5) == 2.0
    assert abs(boundary_sigma(2) - 0.7071067811865476) <= 1e-15
    assert boundary_sigma(INF) == 0.5 and boundary_sigma(-INF) == 0.5
    assert boundary_sigma(-1) == 0.25
    with pytest.raises(UnsupportedParameterError):
        boundary_sigma(0)
    assert boundary_p(0.5) == INF


@given(st.floats(-50, 50).filter(lambda p: abs(p) > 1e-3))
def test_boundary_round_trip(p):
    assert boundary_p(boundary_sigma(p)) == pytest.approx(p, rel=1e-9)


def test_metric_spaces_satisfy_lower_bound():
    rng = np.random.default_rng(12)
    for _ in range(40):
        d = oracles.random_metric(rng, int(rng.integers(3, 9)))
        r = lower_bound_check(DissimilarityMatrix(d), PowerParams(1, 1))
        assert r.relation_holds and r.holds
        assert r.on_boundary and r.reverse_holds


@pytest.mark.parametrize("p", [-2.0, -1.0, 0.5, 2.0, 3.0])
def test_lower_bound_follows_from_relation(p):
    rng = np.random.default_rng(13)
    for _ in range(30):
        d = oracles.random_distance(rng, int(rng.integers(3, 8)))
        m = DissimilarityMatrix(d)
        s = sigma_min(m, p).sigma * (1 + 1e-9)
        r = lower_bound_check(m, PowerParams(p, s))
        assert r.relation_holds and r.holds, r.witness


def test_lower_bound_on_boundary_gives_reverse_triangle():
    m = sample_matrix(AnalyticSpace.EX324, [0, 0.25, 0.5, 1])
    p = 0.5
    r = lower_bound_check(m, PowerParams(p, boundary_sigma(p)))
    assert r.on_boundary and r.reverse_holds is not None
    r = lower_bound_check(m, PowerParams(1, 2))
    assert not r.on_boundary and r.reverse_holds is None


def test_lower_bound_can_fail_when_relation_fails():
    m = sample_matrix(AnalyticSpace.EX321, [0, 1, 4])
    r = lower_bound_check(m, PowerParams(1, 1))
    assert not r.relation_holds
    assert not r.reverse_holds and r.reverse_witness.deficit > 0


def test_lower_bound_unsupported_and_degenerate():
    m = DissimilarityMatrix.from_points([0, 1, 3])
    for p in (0.0, INF, -INF):
        with pytest.raises(UnsupportedParameterError):
            lower_bound_check(m, PowerParams(p, 1))
    with pytest.raises(DegenerateMatrixError):
        lower_bound_check(DissimilarityMatrix([[0, 0, 1], [0, 0, 1], [1, 1, 0]]),
                          PowerParams(-1, 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([-1.0, 0.0, 1.0, 2.0, INF]),
       st.floats(0.2, 3), st.floats(0.0, 2.0))
def test_relation_monotone_in_sigma_and_p(seed, p, s, bump):
    d = oracles.random_distance(np.random.default_rng(seed), 6)
    m = DissimilarityMatrix(d)
    if check_relation(m, PowerParams(p, s)).holds:
        assert check_relation(m, PowerParams(p, s + bump)).holds
        assert check_relation(m, PowerParams(p + bump if p != INF else INF, s)).holds
