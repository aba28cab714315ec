import dataclasses
import io
import re

import numpy as np
import pytest

from schelling1d.dynamics import Dynamic, replay, run, simulate
from schelling1d.render import PALETTE, render_landscape, render_ring, ring_layers
from schelling1d.ring import Color, Ring, Scenario
from schelling1d.sweep import SweepConfig, read_csv, run_sweep, write_csv


@pytest.fixture(scope="module")
def grid():
    return run_sweep(SweepConfig(rho=0.42, w=5, n=400, grid=6, reps=1, base_seed=2))


def cell_fills(svg):
    # only cell rectangles carry both a position and a bare fill
    return re.findall(r'<rect x="[^"]+" y="[^"]+" width="[^"]+" height="[^"]+" fill="([^"]+)"/>',
                      svg)


def test_landscape_is_byte_identical(grid, tmp_path):
    a = render_landscape(grid, tmp_path / "a.svg")
    b = render_landscape(grid, tmp_path / "b.svg")
    assert a == b
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    # and the same after a CSV round-trip
    buf = io.StringIO()
    write_csv(grid, buf)
    assert render_landscape(read_csv(io.StringIO(buf.getvalue())), io.StringIO()) == a


def test_all_green_grid_renders_green_with_overlays(grid):
    green = dataclasses.replace(grid, cells=[
        dataclasses.replace(c, reps=[dataclasses.replace(r, outcome="GreenTotal") for r in c.reps])
        for c in grid.cells])
    svg = render_landscape(green, io.StringIO())
    fills = cell_fills(svg)
    assert fills[:36] == [PALETTE["GreenTotal"]] * 36
    assert "stroke-dasharray" in svg and "<polyline" in svg
    assert "rho=0.42 w=5 n=400" in svg


def test_landscape_cell_count_and_labels(grid):
    svg = render_landscape(grid, io.StringIO())
    fills = cell_fills(svg)[:36]
    assert fills == [PALETTE[c.majority] for c in grid.cells]
    for name in ("kg", "kr", "mu_g", "mu_r"):
        assert f">{name}</text>" in svg


def test_landscape_span_only_draws_lines_inside():
    cfg = SweepConfig(rho=0.42, w=4, n=200, grid=2, reps=1,
                      tau_r_span=("0.55", "0.9"), tau_g_span=("0.55", "0.9"))
    svg = render_landscape(run_sweep(cfg), io.StringIO())
    # kappa values lie below the span, mu values inside it
    assert ">kg</text>" not in svg and ">kr</text>" not in svg
    assert ">mu_g</text>" in svg and ">mu_r</text>" in svg
    assert ">0.55</text>" in svg and ">0.9</text>" in svg


def rec_with_no_events():
    s = Scenario(0.5, "0.45", "0.45")
    return run(Ring.uniform(60, 3, Color.RED), s, Dynamic("selective"), rng=0)


def test_zero_event_ring_has_equal_inner_and_outer_annuli():
    rec = rec_with_no_events()
    assert len(rec.event_time) == 0
    layers = ring_layers(rec)
    assert np.array_equal(layers.initial, layers.final)
    assert (layers.event_bins == -1).all()
    svg = render_ring(rec, io.StringIO())
    red = PALETTE["RedTotal"]
    # one full-circle stroke per colour layer, nothing in between
    assert svg.count(f'stroke="{red}"') == 2
    assert "<path" not in svg


def test_outer_layer_is_the_replay_of_events():
    rec = simulate(3000, 6, Scenario(0.45, "0.4", "0.45"), "selective", 5)
    assert len(rec.event_time) > 0
    layers = ring_layers(rec)
    assert np.array_equal(layers.final,
                          replay(rec.initial_colors, rec.event_node, rec.event_color))
    assert np.array_equal(layers.final, rec.final_colors)
    assert np.array_equal(layers.unhappy, _unhappy_at_start(rec))
    assert (layers.event_bins >= 0).any()


def _unhappy_at_start(rec):
    import oracles
    return oracles.status(rec.initial_colors, rec.w, rec.scenario.tau_g, rec.scenario.tau_r) != 0


def test_takeover_ring_has_single_colour_outside():
    rec = simulate(20_000, 40, Scenario(0.2, "0.25", "0.65"), "selective", 1)
    assert rec.final_colors.all()
    svg = render_ring(rec, io.StringIO())
    # the outer annulus is a single full circle at the outer radius band
    outer = re.findall(r'<circle cx="360" cy="360" r="326" fill="none" stroke="([^"]+)"', svg)
    assert outer == ["#1b7837"]


def test_ring_rendering_is_deterministic_and_downsampled():
    rec = simulate(30_000, 5, Scenario(0.5, "0.4", "0.4"), "selective", 3)
    a = render_ring(rec, io.StringIO())
    assert a == render_ring(rec, io.StringIO())
    assert a.count("<path") + a.count("<circle") < 60_000


def test_record_without_events_is_rejected():
    rec = simulate(500, 3, Scenario(0.5, "0.4", "0.4"), "selective", 1, record_events=False)
    with pytest.raises(ValueError, match="event log"):
        render_ring(rec, io.StringIO())
