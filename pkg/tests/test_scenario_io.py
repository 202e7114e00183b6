import numpy as np
import pytest

from usagevalues.errors import ScenarioFormatError
from usagevalues.scenario_io import (Chronicle, ScenarioSet, SynthSpec, WeekBlock,
                                     load_chronicles, load_scenarios,
                                     save_chronicles, save_scenarios,
                                     synthesize_case_study)
from usagevalues.timeline import Timeline


def small_set():
    rng = np.random.default_rng(1)
    blocks = tuple(
        tuple(WeekBlock(rng.uniform(-1, 5, 2), rng.integers(0, 2, size=(2, 1)))
              for _ in range(2))
        for _ in range(2)
    )
    return ScenarioSet(blocks)


def test_roundtrip_scenarios(tmp_path):
    scen = small_set()
    path = tmp_path / "scen.csv"
    save_scenarios(scen, path)
    loaded = load_scenarios(path, Timeline(2, 2), num_units=1)
    assert loaded.num_weeks == 2 and loaded.num_scenarios == 2
    for w in range(2):
        for n in range(2):
            a, b = scen.week(w)[n], loaded.week(w)[n]
            assert np.array_equal(a.demand, b.demand)
            assert np.array_equal(a.avail, b.avail)


def test_roundtrip_chronicles(tmp_path):
    rng = np.random.default_rng(2)
    chrons = [
        Chronicle(tuple(WeekBlock(rng.uniform(0, 3, 2), np.ones((2, 2), dtype=int))
                        for _ in range(3)))
        for _ in range(2)
    ]
    path = tmp_path / "chron.csv"
    save_chronicles(chrons, path)
    loaded = load_chronicles(path, Timeline(3, 2), num_units=2)
    assert len(loaded) == 2
    for a, b in zip(chrons, loaded):
        for wa, wb in zip(a.weeks, b.weeks):
            assert np.array_equal(wa.demand, wb.demand)
            assert np.array_equal(wa.avail, wb.avail)


def test_fractional_availability_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "week,hour,scenario,residual_demand,avail_1\n"
        "0,1,1,2.0,0.5\n"
        "0,2,1,2.0,1\n"
    )
    with pytest.raises(ScenarioFormatError, match="avail_1"):
        load_scenarios(path, Timeline(1, 2), num_units=1)


def test_missing_scenario_rejected(tmp_path):
    scen = small_set()
    path = tmp_path / "scen.csv"
    save_scenarios(scen, path)
    lines = path.read_text().splitlines()
    # drop every week-1 scenario-2 row
    kept = [lines[0]]
    for line in lines[1:]:
        parts = line.split(",")
        if parts[0] == "1" and parts[2] == "2":
            continue
        kept.append(line)
    path.write_text("\n".join(kept) + "\n")
    with pytest.raises(ScenarioFormatError, match="inconsistent scenario count"):
        load_scenarios(path, Timeline(2, 2), num_units=1)


def test_wrong_hour_count_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "week,hour,scenario,residual_demand,avail_1\n"
        "0,1,1,2.0,1\n"
    )
    with pytest.raises(ScenarioFormatError, match="missing hours"):
        load_scenarios(path, Timeline(1, 2), num_units=1)


def test_missing_column_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("week,hour,scenario,residual_demand\n0,1,1,2.0\n")
    with pytest.raises(ScenarioFormatError, match="avail_1"):
        load_scenarios(path, Timeline(1, 1), num_units=1)


def test_blocks_of_inconsistent_shape_rejected():
    b2 = WeekBlock(np.zeros(2), np.ones((2, 1), dtype=int))
    b3 = WeekBlock(np.zeros(3), np.ones((3, 1), dtype=int))
    with pytest.raises(ValueError):
        ScenarioSet(((b2, b3),))


def spec(**kw):
    base = dict(num_weeks=3, hours_per_week=4, num_scenarios=3, num_chronicles=2,
                num_units=3, outage_prob=0.3, outage_len_hours=2)
    base.update(kw)
    return SynthSpec(**base)


def test_synthesis_deterministic():
    s1, c1 = synthesize_case_study(7, spec())
    s2, c2 = synthesize_case_study(7, spec())
    for w in range(3):
        for n in range(3):
            assert np.array_equal(s1.week(w)[n].demand, s2.week(w)[n].demand)
            assert np.array_equal(s1.week(w)[n].avail, s2.week(w)[n].avail)
    for a, b in zip(c1, c2):
        for wa, wb in zip(a.weeks, b.weeks):
            assert np.array_equal(wa.demand, wb.demand)


def test_synthesis_seed_changes_demand():
    s1, _ = synthesize_case_study(1, spec())
    s2, _ = synthesize_case_study(2, spec())
    diffs = [
        not np.array_equal(s1.week(w)[n].demand, s2.week(w)[n].demand)
        for w in range(3) for n in range(3)
    ]
    assert any(diffs)


def test_synthesis_zero_outage_probability():
    s, _ = synthesize_case_study(3, spec(outage_prob=0.0))
    # scenario 1 keeps the injected base-unit outage; all others fully available
    for w in range(3):
        for n in range(1, 3):
            assert np.all(s.week(w)[n].avail == 1)


def test_synthesis_guarantees_base_outage():
    s, chrons = synthesize_case_study(5, spec())
    for w in range(3):
        first = s.week(w)[0]
        assert np.all(first.avail[:2, 0] == 0)  # multi-hour outage of unit 0
    mid = chrons[0].weeks[3 // 2]
    assert np.all(mid.avail[:2, 0] == 0)
