import numpy as np
import pytest

from usagevalues.campaign import random_instance
from usagevalues.errors import GuardExceeded
from usagevalues.intraweek import expectation, solve_week_dhd, solve_week_hd
from usagevalues.oracles import (ScenarioTreeNode, brute_force_week,
                                 tree_from_blocks, wphr_week_toy)
from usagevalues.pwl import PiecewiseLinear
from usagevalues.scenario_io import WeekBlock
from usagevalues.system_model import HourlyUncertainty, Storage, SystemModel, ThermalUnit


def flat_ctg(x_min, x_max, value=0.0):
    return PiecewiseLinear(np.array([x_min, x_max]), np.array([value, value]))


def two_unit_model():
    storage = Storage(0.0, 4.0, pump_max=1.0, turb_max=1.0, eta=0.8)
    units = (ThermalUnit("slow1", 1.0, 2.0, 6.0, 10.0, "slow"),
             ThermalUnit("fast1", 0.5, 2.0, 2.0, 40.0, "fast"))
    fc = PiecewiseLinear(np.array([0.0, 4.0]), np.array([0.0, -80.0]))
    return SystemModel(storage, units, 500.0, fc, 2.0)


def test_brute_matches_solver_h1():
    rng = np.random.default_rng(2)
    for _ in range(10):
        model, x0, blocks, ctg = random_instance(rng)
        blk = WeekBlock(blocks[0].demand[:1], blocks[0].avail[:1])
        solver = solve_week_hd(x0, blk, ctg, model).value
        oracle = brute_force_week(x0, [blk], ctg, model, "hd")
        assert solver == pytest.approx(oracle, abs=1e-9, rel=1e-9)


def test_brute_zero_demand_is_ctg_at_start():
    model = two_unit_model()
    blk = WeekBlock(np.zeros(2), np.ones((2, 2), dtype=int))
    ctg = PiecewiseLinear(np.array([0.0, 4.0]), np.array([12.0, 4.0]))
    val = brute_force_week(2.0, [blk], ctg, model, "hd")
    assert val == pytest.approx(ctg(2.0), abs=1e-7)


def test_brute_guard():
    model = two_unit_model()
    blk = WeekBlock(np.zeros(9), np.ones((9, 2), dtype=int))
    with pytest.raises(GuardExceeded):
        brute_force_week(2.0, [blk], flat_ctg(0.0, 4.0), model, "hd")
    with pytest.raises(ValueError):
        brute_force_week(2.0, [WeekBlock(np.zeros(1), np.ones((1, 2), dtype=int))],
                         flat_ctg(0.0, 4.0), model, "nope")


def test_randomized_equivalence_smoke():
    rng = np.random.default_rng(5)
    for _ in range(15):
        model, x0, blocks, ctg = random_instance(rng)
        probs = [1.0 / len(blocks)] * len(blocks)
        solver_hd = expectation(
            [solve_week_hd(x0, b, ctg, model).value for b in blocks], probs)
        assert solver_hd == pytest.approx(
            brute_force_week(x0, blocks, ctg, model, "hd"),
            rel=1e-6, abs=1e-6)
        solver_dhd = solve_week_dhd(x0, blocks, ctg, model).value
        assert solver_dhd == pytest.approx(
            brute_force_week(x0, blocks, ctg, model, "dhd"),
            rel=1e-6, abs=1e-6)


def chain_node(demand, avail, prob, children=()):
    return ScenarioTreeNode(HourlyUncertainty(demand, np.asarray(avail)), prob,
                            tuple(children))


def test_wphr_single_branch_collapses_to_hd():
    model = two_unit_model()
    blk = WeekBlock(np.array([2.0, 3.0]), np.ones((2, 2), dtype=int))
    ctg = PiecewiseLinear(np.array([0.0, 2.0, 4.0]), np.array([30.0, 5.0, -10.0]))
    tree = tree_from_blocks([blk])
    wphr = wphr_week_toy(2.0, tree, ctg, model)
    hd = solve_week_hd(2.0, blk, ctg, model).value
    dhd = solve_week_dhd(2.0, [blk], ctg, model).value
    assert wphr == pytest.approx(hd, abs=1e-7)
    assert wphr == pytest.approx(dhd, abs=1e-7)


def test_wphr_identical_branches_add_no_information():
    model = two_unit_model()
    # two hour-1 branches with identical content, then identical hour-2 leaves
    leaf = chain_node(3.0, [1, 1], 1.0)
    roots = (chain_node(2.0, [1, 1], 0.5, [leaf]),
             chain_node(2.0, [1, 1], 0.5, [leaf]))
    ctg = PiecewiseLinear(np.array([0.0, 2.0, 4.0]), np.array([30.0, 5.0, -10.0]))
    blk = WeekBlock(np.array([2.0, 3.0]), np.ones((2, 2), dtype=int))
    wphr = wphr_week_toy(2.0, roots, ctg, model)
    dhd = solve_week_dhd(2.0, [blk], ctg, model).value
    assert wphr == pytest.approx(dhd, abs=1e-7)


def test_wphr_dominates_dhd_on_genuine_tree():
    model = two_unit_model()
    # shared hour-1 realisation, genuinely different hour 2
    b1 = WeekBlock(np.array([2.0, 4.0]), np.ones((2, 2), dtype=int))
    b2 = WeekBlock(np.array([2.0, 0.5]), np.ones((2, 2), dtype=int))
    ctg = PiecewiseLinear(np.array([0.0, 2.0, 4.0]), np.array([60.0, 10.0, -20.0]))
    tree = tree_from_blocks([b1, b2])
    assert len(tree) == 1 and len(tree[0].children) == 2  # prefixes merged
    wphr = wphr_week_toy(2.0, tree, ctg, model)
    dhd = solve_week_dhd(2.0, [b1, b2], ctg, model).value
    hd = expectation([solve_week_hd(2.0, b, ctg, model).value for b in (b1, b2)],
                     [0.5, 0.5])
    assert hd <= dhd + 1e-9
    assert dhd <= wphr + 1e-9


def test_wphr_guards():
    model = two_unit_model()
    ctg = flat_ctg(0.0, 4.0)
    # depth 4 exceeds the hour guard
    deep = chain_node(1.0, [1, 1], 1.0)
    for _ in range(3):
        deep = chain_node(1.0, [1, 1], 1.0, [deep])
    with pytest.raises(GuardExceeded):
        wphr_week_toy(2.0, (deep,), ctg, model)
    # sibling probabilities must sum to one
    bad = (chain_node(1.0, [1, 1], 0.4), chain_node(2.0, [1, 1], 0.4))
    with pytest.raises(ValueError):
        wphr_week_toy(2.0, bad, ctg, model)


def test_tree_from_blocks_probabilities():
    b1 = WeekBlock(np.array([1.0, 2.0]), np.ones((2, 1), dtype=int))
    b2 = WeekBlock(np.array([1.0, 3.0]), np.ones((2, 1), dtype=int))
    b3 = WeekBlock(np.array([5.0, 2.0]), np.ones((2, 1), dtype=int))
    roots = tree_from_blocks([b1, b2, b3])
    assert len(roots) == 2
    merged = roots[0]
    assert merged.prob == pytest.approx(2.0 / 3.0)
    assert len(merged.children) == 2
    assert merged.children[0].prob == pytest.approx(0.5)
