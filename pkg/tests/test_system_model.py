import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usagevalues.pwl import PiecewiseLinear
from usagevalues.system_model import (HourlyControl, HourlyUncertainty, Storage,
                                      SystemModel, ThermalUnit, balance_residual,
                                      hourly_cost, hourly_dynamics, production,
                                      weekly_cost, weekly_dynamics)


def make_model(units=None, ens_penalty=1000.0):
    storage = Storage(0.0, 20.0, pump_max=3.0, turb_max=3.0, eta=0.8)
    if units is None:
        units = (ThermalUnit("u1", 1.0, 2.0, 5.0, 10.0, "slow"),)
    fc = PiecewiseLinear(np.array([0.0, 20.0]), np.array([0.0, -20.0]))
    return SystemModel(storage, tuple(units), ens_penalty, fc, 10.0)


def ctrl(commit, mod, pump=0.0, turb=0.0, ens=0.0):
    return HourlyControl(np.atleast_1d(commit), np.atleast_1d(mod), pump, turb, ens)


def unc(demand, avail):
    return HourlyUncertainty(demand, np.atleast_1d(avail))


# ---- hourly and weekly dynamics ---------------------------------------------

def test_hourly_dynamics_direct_substitution():
    st_ = Storage(0.0, 100.0, 5.0, 5.0, 0.8)
    assert hourly_dynamics(10.0, 2.0, 1.0, st_) == pytest.approx(10.6, abs=1e-12)


def test_hourly_dynamics_identity():
    st_ = Storage(0.0, 100.0, 5.0, 5.0, 0.3)
    assert hourly_dynamics(5.0, 0.0, 0.0, st_) == 5.0


def test_hourly_dynamics_symmetric_cancellation():
    st_ = Storage(0.0, 100.0, 5.0, 5.0, 1.0)
    assert hourly_dynamics(0.0, 3.0, 3.0, st_) == 0.0


def test_weekly_dynamics_sum_formula():
    st_ = Storage(0.0, 100.0, 5.0, 5.0, 0.5)
    assert weekly_dynamics(10.0, [2.0, 0.0], [1.0, 1.0], st_) == pytest.approx(9.0, abs=1e-12)


def test_weekly_dynamics_identity():
    st_ = Storage(0.0, 100.0, 5.0, 5.0, 0.9)
    assert weekly_dynamics(3.0, [0.0] * 4, [0.0] * 4, st_) == 3.0


@given(
    x=st.floats(0, 50),
    eta=st.floats(0, 1),
    pumps=st.lists(st.floats(0, 5), min_size=5, max_size=5),
    turbs=st.lists(st.floats(0, 5), min_size=5, max_size=5),
)
@settings(max_examples=100, deadline=None)
def test_weekly_dynamics_matches_hourly_fold(x, eta, pumps, turbs):
    st_ = Storage(0.0, 100.0, 5.0, 5.0, eta)
    folded = x
    for p, t in zip(pumps, turbs):
        folded = hourly_dynamics(folded, p, t, st_)
    assert weekly_dynamics(x, pumps, turbs, st_) == pytest.approx(folded, abs=1e-12)


def test_weekly_dynamics_length_mismatch():
    st_ = Storage(0.0, 100.0, 5.0, 5.0, 0.5)
    with pytest.raises(ValueError):
        weekly_dynamics(1.0, [1.0, 2.0], [1.0], st_)


# ---- production --------------------------------------------------------------

def test_production_both_on():
    assert production(1, 2.5, 1) == 2.5


def test_production_unavailable_is_zero():
    assert production(1, 2.5, 0) == 0.0


def test_production_off_decision_is_zero():
    assert production(0, 2.5, 1) == 0.0


@given(z=st.floats(0, 10), commit=st.integers(0, 1), avail=st.integers(0, 1))
@settings(max_examples=60, deadline=None)
def test_production_monotone_in_gates(z, commit, avail):
    p = production(commit, z, avail)
    assert production(0, z, avail) <= p
    assert production(commit, z, 0) <= p


# ---- balance -----------------------------------------------------------------

def test_balance_exact():
    c = ctrl([1, 1], [2.0, 2.0], pump=0.0, turb=1.0, ens=0.0)
    u = unc(5.0, [1, 1])
    units = (ThermalUnit("a", 1.0, 2.0, 0.0, 1.0, "fast"),
             ThermalUnit("b", 1.0, 2.0, 0.0, 1.0, "fast"))
    assert balance_residual(c, u, units) == pytest.approx(0.0, abs=1e-12)


def test_balance_all_demand_unserved():
    c = ctrl([0], [0.0], ens=5.0)
    u = unc(5.0, [1])
    units = (ThermalUnit("a", 1.0, 2.0, 0.0, 1.0, "fast"),)
    assert balance_residual(c, u, units) == pytest.approx(0.0, abs=1e-12)


def test_balance_overproduction_positive():
    units = (ThermalUnit("a", 1.0, 6.0, 0.0, 1.0, "fast"),)
    c = ctrl([1], [6.0])
    u = unc(5.0, [1])
    assert balance_residual(c, u, units) == pytest.approx(1.0, abs=1e-12)


@given(pump=st.floats(0, 3), turb=st.floats(0, 3), ens=st.floats(0, 5))
@settings(max_examples=60, deadline=None)
def test_balance_affine_coefficients(pump, turb, ens):
    units = (ThermalUnit("a", 1.0, 2.0, 0.0, 1.0, "fast"),)
    base = balance_residual(ctrl([0], [0.0], pump, turb, ens), unc(1.0, [1]), units)
    assert balance_residual(ctrl([0], [0.0], pump + 1, turb, ens), unc(1.0, [1]),
                            units) == pytest.approx(base - 1, abs=1e-9)
    assert balance_residual(ctrl([0], [0.0], pump, turb + 1, ens), unc(1.0, [1]),
                            units) == pytest.approx(base + 1, abs=1e-9)
    assert balance_residual(ctrl([0], [0.0], pump, turb, ens + 1), unc(1.0, [1]),
                            units) == pytest.approx(base + 1, abs=1e-9)


# ---- costs -------------------------------------------------------------------

def test_hourly_cost_startup_charged():
    model = make_model()
    assert hourly_cost([1], [0], [2.0], 0.0, model) == pytest.approx(25.0)


def test_hourly_cost_no_restart():
    model = make_model()
    assert hourly_cost([1], [1], [2.0], 0.0, model) == pytest.approx(20.0)


def test_hourly_cost_penalty_only():
    model = make_model()
    assert hourly_cost([0], [0], [0.0], 3.0, model) == pytest.approx(3000.0)


def test_weekly_cost_zero_dispatch():
    model = make_model()
    controls = [ctrl([0], [0.0]) for _ in range(3)]
    hours = [unc(0.0, [1]) for _ in range(3)]
    assert weekly_cost(10.0, controls, hours, model) == 0.0


def test_weekly_cost_week_start_reset():
    model = make_model()
    controls = [ctrl([1], [1.0]) for _ in range(2)]
    hours = [unc(1.0, [1]) for _ in range(2)]
    # one start-up at hour 0 plus two hours at p_min
    assert weekly_cost(0.0, controls, hours, model) == pytest.approx(25.0)


def test_weekly_cost_matches_shifted_hourly_sum():
    rng = np.random.default_rng(0)
    units = (ThermalUnit("a", 0.5, 2.0, 4.0, 9.0, "slow"),
             ThermalUnit("b", 1.0, 3.0, 2.0, 20.0, "fast"))
    model = make_model(units)
    H = 4
    commits = rng.integers(0, 2, size=(H, 2))
    mods = rng.uniform(1.0, 2.0, size=(H, 2))
    avails = rng.integers(0, 2, size=(H, 2))
    controls = [ctrl(commits[k], mods[k], ens=float(k)) for k in range(H)]
    hours = [unc(1.0, avails[k]) for k in range(H)]
    total = weekly_cost(5.0, controls, hours, model)
    expected = 0.0
    prev = np.zeros(2, dtype=int)
    for k in range(H):
        prods = np.array([production(commits[k, i], mods[k, i], avails[k, i])
                          for i in range(2)])
        expected += hourly_cost(commits[k], prev, prods, float(k), model)
        prev = commits[k]
    assert total == pytest.approx(expected, rel=1e-12)


@given(lam=st.floats(0.1, 50))
@settings(max_examples=40, deadline=None)
def test_hourly_cost_positively_homogeneous(lam):
    model = make_model()
    scaled_units = tuple(
        ThermalUnit(u.name, u.p_min, u.p_max, lam * u.startup_cost,
                    lam * u.variable_cost, u.speed_class)
        for u in model.units
    )
    scaled = SystemModel(model.storage, scaled_units, lam * model.ens_penalty,
                         model.final_cost, model.initial_stock)
    base = hourly_cost([1], [0], [1.7], 0.4, model)
    assert hourly_cost([1], [0], [1.7], 0.4, scaled) == pytest.approx(lam * base,
                                                                      rel=1e-9)
    assert base >= 0


# ---- validation --------------------------------------------------------------

def test_storage_invariants():
    with pytest.raises(ValueError):
        Storage(5.0, 5.0, 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        Storage(0.0, 5.0, -1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        Storage(0.0, 5.0, 1.0, 1.0, 1.5)


def test_unit_invariants():
    with pytest.raises(ValueError):
        ThermalUnit("x", 0.0, 2.0, 1.0, 1.0, "slow")
    with pytest.raises(ValueError):
        ThermalUnit("x", 2.0, 1.0, 1.0, 1.0, "slow")
    with pytest.raises(ValueError):
        ThermalUnit("x", 1.0, 2.0, 1.0, 1.0, "medium")


def test_model_requires_high_penalty():
    with pytest.raises(ValueError):
        make_model(ens_penalty=5.0)


def test_availability_must_be_binary():
    with pytest.raises(ValueError):
        HourlyUncertainty(1.0, np.array([0.5]))
