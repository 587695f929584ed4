import math

import numpy as np
import pytest

from rayblock.trace import SPEED_OF_LIGHT, ChannelTrace, Ray


def carrier_phase(delay: float, frequency_hz: float = 60e9) -> float:
    turns = frequency_hz * delay
    return -2.0 * math.pi * (turns - round(turns))


def make_ray(*points, gain_db: float = -80.0, frequency_hz: float = 60e9) -> Ray:
    vertices = np.array(points, dtype=np.float64)
    length = float(np.sum(np.linalg.norm(np.diff(vertices, axis=0), axis=1)))
    delay = length / SPEED_OF_LIGHT
    return Ray(delay=delay, path_gain_db=gain_db, phase_rad=carrier_phase(delay, frequency_hz),
               vertices=vertices)


def fspl_db(length: float, frequency_hz: float) -> float:
    wavelength = SPEED_OF_LIGHT / frequency_hz
    return -20.0 * math.log10(4.0 * math.pi * length / wavelength)


def build_los_trace(tx, rx, num_steps: int, time_step: float,
                    gain_db: float = -80.0) -> ChannelTrace:
    """Static single-pair trace carrying only the direct ray."""
    ray = make_ray(tx, rx, gain_db=gain_db)
    positions = {
        0: np.tile(np.asarray(tx, dtype=np.float64), (num_steps, 1)),
        1: np.tile(np.asarray(rx, dtype=np.float64), (num_steps, 1)),
    }
    pairs = {(0, 1): [[ray] for _ in range(num_steps)]}
    return ChannelTrace(node_positions=positions, pairs=pairs,
                        time_step=time_step, num_steps=num_steps)


# Fixed single-bounce reflection points of the synthetic dynamic room
# (19 m long in y, 10 m wide in x, 3 m high).
DYNAMIC_ROOM_BOUNCES = (
    (0.0, 2.0, 1.5), (0.0, 6.0, 1.0), (0.0, 10.0, 2.0), (0.0, 14.0, 1.2), (0.0, 17.0, 2.2),
    (10.0, 3.0, 1.1), (10.0, 7.0, 2.1), (10.0, 11.0, 1.4), (10.0, 15.0, 1.9), (10.0, 18.0, 1.3),
    (3.0, 5.0, 3.0), (7.0, 9.0, 3.0), (4.0, 13.0, 3.0), (6.0, 16.0, 3.0), (5.0, 8.0, 3.0),
)


def build_dynamic_trace(num_steps: int = 3133, time_step: float = 0.005,
                        frequency_hz: float = 60e9) -> ChannelTrace:
    """Moving-receiver trace with 16 rays per step (direct + 15 bounces)."""
    tx = np.array([5.0, 0.1, 2.9])
    speed = 1.2
    tx_pos = np.tile(tx, (num_steps, 1))
    rx_pos = np.empty((num_steps, 3))
    steps = []
    for k in range(num_steps):
        rx = np.array([5.0, 0.1 + speed * time_step * k, 1.5])
        rx_pos[k] = rx
        rays = [make_ray(tx, rx, gain_db=fspl_db(float(np.linalg.norm(rx - tx)), frequency_hz),
                         frequency_hz=frequency_hz)]
        for bounce in DYNAMIC_ROOM_BOUNCES:
            b = np.asarray(bounce)
            length = float(np.linalg.norm(b - tx) + np.linalg.norm(rx - b))
            rays.append(make_ray(tx, b, rx, gain_db=fspl_db(length, frequency_hz) - 10.0,
                                 frequency_hz=frequency_hz))
        steps.append(rays)
    return ChannelTrace(node_positions={0: tx_pos, 1: rx_pos}, pairs={(0, 1): steps},
                        time_step=time_step, num_steps=num_steps)


def assert_traces_equal(a: ChannelTrace, b: ChannelTrace) -> None:
    assert a.num_steps == b.num_steps
    assert a.time_step == b.time_step
    assert set(a.pairs) == set(b.pairs)
    assert set(a.node_positions) == set(b.node_positions)
    for node in a.node_positions:
        np.testing.assert_array_equal(a.node_positions[node], b.node_positions[node])
    for pair in a.pairs:
        for k, (ra, rb) in enumerate(zip(a.pairs[pair], b.pairs[pair])):
            assert len(ra) == len(rb), f"pair {pair} step {k}"
            for x, y in zip(ra, rb):
                assert x.delay == y.delay
                assert x.path_gain_db == y.path_gain_db
                assert x.phase_rad == y.phase_rad
                np.testing.assert_array_equal(x.vertices, y.vertices)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
