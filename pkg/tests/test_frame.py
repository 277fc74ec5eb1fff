import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coexist.frame import (
    EMBB,
    URLLC,
    FrameConfig,
    FrameGrid,
    Mode,
    UserProfile,
    assign_embb,
    draw_arrivals,
    draw_user_arrivals,
    generate_topology,
)


def test_frame_defaults():
    f = FrameConfig()
    assert f.minislots_per_tti == 8


def test_frame_rejects_non_integer_ratio():
    with pytest.raises(ValueError):
        FrameConfig(1e-3, 3e-4)


def test_empty_topology():
    assert generate_topology(1, 0, 0, 1000.0) == []


def test_topology_deterministic():
    assert generate_topology(5, 4, 6, 1000.0) == generate_topology(5, 4, 6, 1000.0)


def test_topology_ids_and_roles():
    users = generate_topology(3, 2, 3, 500.0)
    assert [u.id for u in users] == [0, 1, 2, 3, 4]
    assert [u.role for u in users] == [EMBB, EMBB, URLLC, URLLC, URLLC]
    assert all(1.0 <= u.distance_to_bs <= 500.0 + 1e-9 for u in users)


def test_topology_prefix_stable():
    small = generate_topology(9, 3, 4, 1000.0)
    large = generate_topology(9, 3, 10, 1000.0)
    assert large[:7] == small


def test_mean_distance_uniform_disc():
    # E[r] = 2R/3 on a uniform disc
    users = generate_topology(11, 10_000, 0, 1000.0)
    mean = np.mean([u.distance_to_bs for u in users])
    assert mean == pytest.approx(2000.0 / 3.0, rel=0.02)


def test_arrivals_zero_rate():
    assert draw_arrivals(1, 0.0, 50) == [0] * 50


def test_arrivals_mean_and_dispersion():
    counts = np.array(draw_arrivals(2, 2.0, 100_000))
    assert abs(counts.mean() - 2.0) <= 0.03
    assert counts.var() == pytest.approx(counts.mean(), rel=0.05)


def test_user_arrivals_stable_under_more_users():
    a = draw_user_arrivals(4, 0.3, [10, 11], 200)
    b = draw_user_arrivals(4, 0.3, [10, 11, 12, 13], 200)
    for uid in a:
        assert np.array_equal(a[uid], b[uid])


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        draw_arrivals(1, -1.0, 5)


def _users(distances):
    return [UserProfile(i, EMBB, d, 0.0) for i, d in enumerate(distances)]


def test_assign_single():
    grid = assign_embb(FrameGrid.empty(FrameConfig(rb_count=1)), _users([300.0]))
    assert grid.owner(0) == 0


def test_assign_best_gain_users():
    grid = assign_embb(FrameGrid.empty(FrameConfig(rb_count=3)), _users([900, 100, 500, 50, 700]))
    assert sorted(grid.owner(rb) for rb in range(3)) == [1, 2, 3]


def test_assign_round_robin():
    grid = assign_embb(FrameGrid.empty(FrameConfig(rb_count=4)), _users([100, 200]))
    owners = [grid.owner(rb) for rb in range(4)]
    assert owners.count(0) == 2 and owners.count(1) == 2


def test_assign_errors():
    with pytest.raises(ValueError):
        assign_embb(FrameGrid.empty(FrameConfig()), [])
    grid = assign_embb(FrameGrid.empty(FrameConfig()), _users([100]))
    with pytest.raises(ValueError):
        assign_embb(grid, _users([100]))


def test_place_rejects_collision():
    grid = FrameGrid.empty(FrameConfig(rb_count=2))
    grid.place(0, 3, 7, Mode.PUNCTURE, 0.1)
    with pytest.raises(ValueError):
        grid.place(0, 3, 8, Mode.SUPERPOSE, 0.1)
    assert grid.free_rbs(3) == [1]


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 7)), max_size=40))
def test_grid_conservation(placements):
    grid = assign_embb(FrameGrid.empty(FrameConfig(rb_count=4)), _users([100, 200, 300]))
    for k, (rb, slot) in enumerate(placements):
        try:
            grid.place(rb, slot, 100 + k, Mode.SUPERPOSE if k % 2 else Mode.PUNCTURE, 1e-3)
        except ValueError:
            pass
    x, z = grid.indicator_arrays()
    assert ((x + z) <= 1).all()
    assert all(grid.owner(rb) is not None for rb in range(4))
    assert len(list(grid.occupied())) == int((x + z).sum())
