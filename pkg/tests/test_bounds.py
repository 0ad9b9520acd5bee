import numpy as np
import pytest

import bounds
import engine
import states
from bounds import LhsBoundQuery
from engine import W1, W2, W3, Strategy
from errors import InvalidParam, NoConvergence
from states import StateFamily

# Region where the closed form is attained by some hidden-state ensemble
TIGHT_ETAS = np.linspace(-0.7, 0.7, 9)
TIGHT_STRATEGIES = [W1, W2, W3, Strategy(0.5, 0.0, 0.5), Strategy(0.6, 0.2, 0.2)]


def _closed(eta, strategy):
    return bounds.lhs_bound_closed(LhsBoundQuery(eta, strategy))


def test_closed_form_examples():
    for eta in (-0.8, 0.0, 0.3, 0.9):
        assert abs(_closed(eta, W1) - (1 + eta) / 2) < 1e-15
    assert abs(_closed(0, W2) - 1 / (2 * np.sqrt(2))) < 1e-15
    assert abs(_closed(0, W3) - 1 / (2 * np.sqrt(3))) < 1e-15
    for strategy in (W1, W2, W3, (0.1, 0.3, 0.6)):
        assert abs(_closed(-1, strategy)) < 1e-15


def test_closed_form_symmetric_in_c2_c3():
    for eta in (-0.5, 0.2, 0.7):
        assert _closed(eta, (0.2, 0.5, 0.3)) == _closed(eta, (0.2, 0.3, 0.5))


def test_query_validation():
    with pytest.raises(InvalidParam):
        LhsBoundQuery(1.5, W3)
    query = LhsBoundQuery(0, (0.5, 0.5, 0))
    assert query.strategy == W2


def test_tightness_region():
    assert bounds.lhs_bound_is_tight(LhsBoundQuery(0.99, W1))
    assert bounds.lhs_bound_is_tight(LhsBoundQuery(0.99, W2))
    assert bounds.lhs_bound_is_tight(LhsBoundQuery(0.5, W3))
    assert not bounds.lhs_bound_is_tight(LhsBoundQuery(0.8, W3))
    assert bounds.lhs_bound_is_tight(LhsBoundQuery(0.0, (0, 1, 0)))
    assert not bounds.lhs_bound_is_tight(LhsBoundQuery(0.5, (0, 1, 0)))
    for eta in TIGHT_ETAS:
        for strategy in TIGHT_STRATEGIES:
            assert bounds.lhs_bound_is_tight(LhsBoundQuery(eta, strategy))


def test_sphere_points_include_poles():
    points = bounds.sphere_points(1001)
    assert np.allclose(np.linalg.norm(points, axis=1), 1)
    assert np.allclose(points[0], [0, 0, 1])
    assert np.allclose(points[-1], [0, 0, -1])
    assert np.array_equal(points, bounds.sphere_points(1001))


def test_oracle_single_measurement_is_classical():
    value, ensemble = bounds.lhs_bound_oracle(LhsBoundQuery(0.5, W1), 20000)
    assert abs(value - 0.75) < 2e-3
    assert len(ensemble) <= 4
    assert abs(ensemble.weights.sum() - 1) < 1e-12
    assert np.allclose(ensemble.mean(), [0, 0, 0.5], atol=1e-7)


def test_oracle_zero_at_ground_state():
    value, _ = bounds.lhs_bound_oracle(LhsBoundQuery(-1, W3), 5000)
    assert abs(value) < 1e-9


def test_oracle_w3_at_zero():
    value, ensemble = bounds.lhs_bound_oracle(LhsBoundQuery(0, W3), 20000)
    assert abs(value - 1 / (2 * np.sqrt(3))) < 2e-3
    assert value <= 1 / (2 * np.sqrt(3)) + 1e-9
    assert len(ensemble) <= 4


@pytest.mark.parametrize('strategy', TIGHT_STRATEGIES)
def test_oracle_agrees_with_closed_form(strategy):
    for eta in TIGHT_ETAS:
        query = LhsBoundQuery(eta, strategy)
        value, ensemble = bounds.lhs_bound_oracle(query, 20000)
        closed = bounds.lhs_bound_closed(query)
        assert value <= closed + 1e-9
        assert abs(value - closed) < 2e-3
        assert abs(bounds.replay_ensemble(ensemble, query) - value) < 1e-9


@pytest.mark.slow
@pytest.mark.parametrize('strategy', TIGHT_STRATEGIES)
def test_oracle_agrees_with_closed_form_fine(strategy):
    for eta in TIGHT_ETAS:
        query = LhsBoundQuery(eta, strategy)
        value, _ = bounds.lhs_bound_oracle(query, 200000)
        assert abs(value - bounds.lhs_bound_closed(query)) < 5e-4


def test_oracle_below_closed_form_where_not_attained():
    query = LhsBoundQuery(0.5, (0, 1, 0))
    value, _ = bounds.lhs_bound_oracle(query, 20000)
    assert abs(value - 0.75) < 2e-3
    assert value < bounds.lhs_bound_closed(query) - 0.05

    for eta in (0.8, 0.9, -0.85):
        query = LhsBoundQuery(eta, W3)
        value, ensemble = bounds.lhs_bound_oracle(query, 20000)
        assert value <= bounds.lhs_bound_closed(query) + 1e-9
        assert abs(bounds.replay_ensemble(ensemble, query) - value) < 1e-9


def test_oracle_rejects_coarse_resolution():
    with pytest.raises(InvalidParam):
        bounds.lhs_bound_oracle(LhsBoundQuery(0, W3), 10)


@pytest.mark.parametrize('strategy', [W1, W2, W3, (0.2, 0.5, 0.3)])
def test_classical_state_never_violates(strategy):
    for eta in np.linspace(-1, 1, 21):
        assert bounds.violation(states.classical_correlated(eta), strategy) <= 1e-9


def test_pure_entangled_violates():
    for eta in np.linspace(-0.99, 0.99, 23):
        assert bounds.violation(states.pure_entangled(eta), W3) > 0
        assert bounds.violation(states.pure_entangled(eta), W2) > 0


def test_werner_violation_at_threshold():
    assert abs(bounds.violation(states.werner(0, 1 / np.sqrt(3)), W3)) < 1e-9
    assert abs(bounds.violation(states.werner(0, 1 / np.sqrt(2)), W2)) < 1e-9


@pytest.mark.parametrize('family, strategy, expected', [
    (StateFamily.WERNER, W2, 1 / np.sqrt(2)),
    (StateFamily.WERNER, W3, 1 / np.sqrt(3)),
    (StateFamily.GIBBS_INVARIANT, W3, (np.sqrt(3) - 1) / 2),
])
def test_violation_boundary_at_zero(family, strategy, expected):
    q_star = bounds.violation_boundary(family, strategy, 0.0)
    assert abs(q_star - expected) < 1e-9

    qs = np.linspace(0, 1, 201)
    signs = [np.sign(bounds.violation(states.family_state(family, 0.0, q), strategy)) for q in qs]
    changes = [q for q, a, b in zip(qs[1:], signs[:-1], signs[1:]) if a < 0 < b]
    assert len(changes) == 1
    assert changes[0] - 0.005 <= q_star <= changes[0]


@pytest.mark.parametrize('family', [StateFamily.GIBBS_INVARIANT, StateFamily.WERNER])
@pytest.mark.parametrize('strategy', [W2, W3])
def test_violation_is_monotone_in_q(family, strategy):
    for eta in np.linspace(-0.8, 0.8, 9):
        values = [bounds.violation(states.family_state(family, eta, q), strategy)
                  for q in np.linspace(0, 1, 21)]
        assert np.all(np.diff(values) >= -1e-12)


def test_violation_boundary_rejects_fixed_families():
    with pytest.raises(InvalidParam):
        bounds.violation_boundary(StateFamily.PURE_ENTANGLED, W3, 0.0)
    with pytest.raises(InvalidParam):
        bounds.violation_boundary(StateFamily.WERNER, W3, 1.0)


def test_quantum_optimum_attained_by_rho1():
    for eta in np.linspace(-1, 1, 9):
        for strategy in (W1, W2, W3):
            work = engine.average_work(states.pure_entangled(eta), strategy)
            assert abs(work - bounds.quantum_optimum(eta)) < 1e-12


# Always-tight strategies over the full eta range, plus an eta where dual simplex can stall
@pytest.mark.parametrize('strategy', [W1, W2, Strategy(0.5, 0.0, 0.5), Strategy(0.6, 0.2, 0.2)])
def test_oracle_converges_across_eta(strategy):
    for eta in [*np.linspace(-0.9, 0.9, 19), 0.525]:
        query = LhsBoundQuery(eta, strategy)
        assert bounds.lhs_bound_is_tight(query)
        value, ensemble = bounds.lhs_bound_oracle(query, 20000)
        assert abs(value - bounds.lhs_bound_closed(query)) < 2e-3
        assert abs(bounds.replay_ensemble(ensemble, query) - value) < 1e-9


def test_oracle_falls_back_when_dual_simplex_stalls(monkeypatch):
    calls = []
    solve = bounds.linprog

    def stalling(*args, method, **kwargs):
        calls.append(method)
        res = solve(*args, method=method, **kwargs)
        if method == 'highs-ds':
            res.status = 4
        return res

    monkeypatch.setattr(bounds, 'linprog', stalling)
    query = LhsBoundQuery(-0.1, (0.5, 0.0, 0.5))
    value, _ = bounds.lhs_bound_oracle(query, 5000)
    assert calls == ['highs-ds', 'highs']
    assert abs(value - bounds.lhs_bound_closed(query)) < 5e-3


def test_oracle_reports_persistent_stall(monkeypatch):
    solve = bounds.linprog

    def stalling(*args, **kwargs):
        res = solve(*args, **kwargs)
        res.status = 4
        return res

    monkeypatch.setattr(bounds, 'linprog', stalling)
    with pytest.raises(NoConvergence):
        bounds.lhs_bound_oracle(LhsBoundQuery(0.2, W3), 2000)
