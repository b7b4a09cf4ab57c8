import json

import pytest

from uavmec.model import BITS_PER_KBIT, BITS_PER_KBYTE
from uavmec.scenario import (
    InstanceFormatError,
    ScenarioSpec,
    generate,
    instance_to_dict,
    load_instance,
    load_spec,
    preset,
    save_instance,
    save_spec,
)


@pytest.mark.parametrize("unit, lo, hi", [("kbyte", 819200, 8192000), ("kbit", 102400, 1024000)])
def test_generated_values_within_table1_ranges(unit, lo, hi):
    assert (100 * (BITS_PER_KBYTE if unit == "kbyte" else BITS_PER_KBIT)) == lo
    inst = generate(preset("fig3", 500, seed=11, data_unit=unit))
    for ue in inst.ues:
        assert lo <= ue.task.data_bits <= hi
        assert 1e8 <= ue.task.cycles <= 1e9
        assert -2000 <= ue.position.x_m <= 2000 and -1000 <= ue.position.y_m <= 1000


def test_generation_is_deterministic():
    spec = preset("fig2", 20, seed=42)
    assert generate(spec) == generate(spec)


def test_different_seeds_give_different_instances():
    for s in range(100):
        a = generate(preset("fig2", 5, seed=2 * s))
        b = generate(preset("fig2", 5, seed=2 * s + 1))
        assert a.ues != b.ues


@pytest.mark.parametrize("name, n_uavs", [("fig2", 2), ("fig3", 3), ("fig4", 5)])
def test_presets_follow_published_geometry(name, n_uavs):
    spec = preset(name, 100 if name != "fig2" else 5)
    assert len(spec.uav_centers) == n_uavs
    assert spec.uav_centers[0] == (1200.0, 1200.0, 350.0)
    assert spec.uav_centers[1] == (-1200.0, -1200.0, 350.0)
    assert spec.radius_m == 800 and spec.num_slots == 12
    assert spec.compute.slot_ue_cap == 150 and spec.compute.f_max_hz == 150e9 and spec.compute.t_max_s == 1
    assert spec.radio.noise_power_w == pytest.approx(1e-12)


def test_fig4_includes_center_uav():
    assert (0.0, 0.0, 350.0) in preset("fig4", 100).uav_centers
    assert (-1200.0, 1200.0, 350.0) in preset("fig3", 100).uav_centers


def test_unknown_preset():
    with pytest.raises(ValueError, match="unknown preset"):
        preset("fig9", 3)


def test_psd_noise_mode():
    assert preset("fig2", 3, noise_mode="psd").radio.noise_power_w == pytest.approx(1e-6)


def test_instance_round_trip_is_exact(tmp_path):
    inst = generate(preset("fig4", 30, seed=7))
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    assert load_instance(path) == inst


def test_round_trip_keeps_per_ue_overrides(tmp_path):
    from conftest import make_instance
    from dataclasses import replace

    inst = make_instance([(1.0, 2.0, 3e5, 4e8)])
    inst = replace(inst, ues=(replace(inst.ues[0], tx_power_w=0.5, k_i=2e-27),))
    save_instance(inst, tmp_path / "i.json")
    back = load_instance(tmp_path / "i.json")
    assert back == inst and back.tx_power(0) == 0.5 and back.k(0) == 2e-27


def test_truncated_file_is_rejected(tmp_path):
    inst = generate(preset("fig2", 4))
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(InstanceFormatError, match=r"line \d+ column \d+"):
        load_instance(path)


def test_negative_bandwidth_names_the_field(tmp_path):
    data = instance_to_dict(generate(preset("fig2", 2)))
    data["radio"]["bandwidth_hz"] = -1e6
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceFormatError, match=r"radio\.bandwidth_hz"):
        load_instance(path)


def test_missing_ue_field_is_located(tmp_path):
    data = instance_to_dict(generate(preset("fig2", 3)))
    del data["ues"][2]["cycles"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceFormatError, match=r"ues\[2\]\.cycles"):
        load_instance(path)


def test_spec_round_trip(tmp_path):
    spec = preset("fig3", 12, seed=5)
    save_spec(spec, tmp_path / "spec.json")
    assert load_spec(tmp_path / "spec.json") == spec


@pytest.mark.parametrize("kwargs, field", [
    ({"ue_region": (0, 0, -1, 1)}, "ue_region"),
    ({"data_range_bits": (10, 1)}, "data_range_bits"),
    ({"cycles_range": (0, 1e9)}, "cycles_range"),
    ({"num_ues": -1}, "num_ues"),
])
def test_spec_validation(kwargs, field):
    base = dict(num_ues=3, uav_centers=((0, 0, 350),))
    base.update(kwargs)
    with pytest.raises(ValueError, match=field):
        ScenarioSpec(**base)
