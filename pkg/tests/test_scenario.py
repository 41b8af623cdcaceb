"""Scenario file grammar, presets, validation diagnostics."""

import dataclasses

import pytest

import ghostsim as gs
from ghostsim import ConfigError
from ghostsim.cli import preset_names, preset_text


def test_preset_names():
    assert preset_names() == ["fig2", "fig3", "hbt"]


def test_presets_parse_and_round_trip():
    for name in preset_names():
        cfg = gs.parse_scenario(preset_text(name))
        again = gs.parse_scenario(gs.dump_scenario(cfg))
        assert again == cfg


def test_round_trip_preserves_custom_config(tiny_scenario_text):
    cfg = gs.parse_scenario(tiny_scenario_text)
    assert gs.parse_scenario(gs.dump_scenario(cfg)) == cfg


def test_focused_preset_reproduces_reference_geometry():
    cfg = gs.parse_scenario(preset_text("fig2"))
    assert cfg.kind == "focused_image"
    assert cfg.wavelength == pytest.approx(692.9e-9)
    assert cfg.source_radius == pytest.approx(0.835e-3)
    assert cfg.z1 == pytest.approx(1.7)
    assert cfg.z2 == pytest.approx(1.7)
    assert cfg.mask == "pinhole_pair"
    assert cfg.mask_diameter_1 == pytest.approx(0.77e-3)
    assert cfg.mask_diameter_2 == pytest.approx(0.72e-3)
    assert cfg.mask_separation == pytest.approx(3.66e-3)
    assert cfg.detector_aperture == pytest.approx(1.8e-3)
    assert cfg.detector_step == pytest.approx(0.25e-3)


def test_sweep_preset_reproduces_reference_geometry():
    cfg = gs.parse_scenario(preset_text("fig3"))
    assert cfg.kind == "z2_sweep"
    assert cfg.wavelength == pytest.approx(693e-9)
    assert cfg.source_radius == pytest.approx(6e-3)
    assert cfg.z1 == pytest.approx(0.3)
    assert (cfg.z2_min, cfg.z2_max, cfg.z2_steps) == (pytest.approx(0.2), pytest.approx(0.4), 21)
    assert cfg.mask == "double_slit"
    assert cfg.mask_slit_width == pytest.approx(100e-6)
    assert cfg.mask_separation == pytest.approx(200e-6)


def test_hbt_preset_parameters():
    cfg = gs.parse_scenario(preset_text("hbt"))
    assert cfg.kind == "hbt"
    assert cfg.coherence_time == pytest.approx(0.1e-9)
    assert cfg.hbt_dt == pytest.approx(5e-12)
    assert cfg.jitter_sigma == 0.0
    assert cfg.hbt_window >= 10 * cfg.coherence_time


def test_unit_suffixes():
    text = (
        "kind = hbt\ncoherence_time = 0.1 ns\nhbt_dt = 5 ps\n"
        "hbt_batch_duration = 40 us\nhbt_batches = 2\nhbt_bin_width = 0.025 ns\n"
        "hbt_window = 1.8 ns\nstart_rate = 1.8e10\nstop_rate = 5e6\n"
    )
    cfg = gs.parse_scenario(text)
    assert cfg.coherence_time == pytest.approx(1e-10)
    assert cfg.hbt_dt == pytest.approx(5e-12)
    assert cfg.hbt_batch_duration == pytest.approx(4e-5)


@pytest.mark.parametrize(
    "unit,si",
    [("170 cm", 1.7), ("1.7 m", 1.7), ("1700 mm", 1.7), ("1.7e6 um", 1.7), ("1.7e6 µm", 1.7), ("1.7e9 nm", 1.7)],
)
def test_length_units(unit, si, tiny_scenario_text):
    text = tiny_scenario_text.replace("z1 = 30 cm", f"z1 = {unit}")
    assert gs.parse_scenario(text).z1 == pytest.approx(si)


def test_error_reports_line_and_key(tiny_scenario_text):
    text = tiny_scenario_text + "lens_focal = 3 mm\n"
    with pytest.raises(ConfigError) as exc:
        gs.parse_scenario(text)
    msg = str(exc.value)
    assert "lens_focal" in msg
    assert "line 17" in msg
    assert "unknown key" in msg


def test_duplicate_key_rejected(tiny_scenario_text):
    text = tiny_scenario_text + "seed = 3\n"
    with pytest.raises(ConfigError, match="duplicate"):
        gs.parse_scenario(text)


def test_malformed_line_rejected():
    with pytest.raises(ConfigError, match="key = value"):
        gs.parse_scenario("kind = hbt\nthis is not an assignment\n")


def test_empty_value_rejected():
    with pytest.raises(ConfigError, match="empty"):
        gs.parse_scenario("kind = \n")


def test_missing_kind_rejected():
    with pytest.raises(ConfigError):
        gs.parse_scenario("seed = 4\n")


def test_missing_required_key_rejected(tiny_scenario_text):
    text = tiny_scenario_text.replace("mask_separation = 350 um\n", "")
    with pytest.raises(ConfigError, match="mask_separation"):
        gs.parse_scenario(text)


def test_key_for_wrong_kind_rejected():
    text = preset_text("hbt") + "mask_slit_width = 100 um\n"
    with pytest.raises(ConfigError, match="does not apply"):
        gs.parse_scenario(text)


def test_wrong_unit_dimension_rejected(tiny_scenario_text):
    text = tiny_scenario_text.replace("z1 = 30 cm", "z1 = 30 ns")
    with pytest.raises(ConfigError):
        gs.parse_scenario(text)


def test_nonpositive_dimension_rejected(tiny_scenario_text):
    text = tiny_scenario_text.replace("source_radius = 2 mm", "source_radius = -2 mm")
    with pytest.raises(ConfigError, match="positive"):
        gs.parse_scenario(text)


def test_sweep_bounds_must_order():
    text = preset_text("fig3").replace("z2_min = 200 mm", "z2_min = 500 mm")
    with pytest.raises(ConfigError):
        gs.parse_scenario(text)


def test_overlapping_pinholes_rejected():
    text = preset_text("fig2").replace("mask_separation = 3.66 mm", "mask_separation = 0.5 mm")
    with pytest.raises(ConfigError, match="overlap"):
        gs.parse_scenario(text)


def test_hbt_step_must_resolve_coherence_time():
    text = preset_text("hbt").replace("hbt_dt = 5 ps", "hbt_dt = 50 ps")
    with pytest.raises(ConfigError):
        gs.parse_scenario(text)


def test_analytic_method_invalid_for_hbt():
    text = preset_text("hbt").replace("method = montecarlo", "method = analytic")
    with pytest.raises(ConfigError):
        gs.parse_scenario(text)


def test_dump_echoes_resolved_defaults(tiny_scenario_text):
    cfg = gs.parse_scenario(tiny_scenario_text)
    dump = gs.dump_scenario(cfg)
    assert "n_realizations = 384" in dump
    assert "seed = 777" in dump
    # values are normalized to SI floats on the way out
    assert "z1 = 0.3" in dump


def test_config_is_a_plain_dataclass(tiny_scenario_text):
    cfg = gs.parse_scenario(tiny_scenario_text)
    clone = dataclasses.replace(cfg, seed=1)
    assert clone.seed == 1 and cfg.seed == 777
