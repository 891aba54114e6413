import numpy as np
import pytest

from swimrom.mesh import MeshError, closedness_residual, min_component_distance
from swimrom.swimmers import (BACTERIUM_DESK, EUKARYOTE_DESK,
                              BacteriumParams, StrokeParams,
                              bacterium_resolution, bacterium_shape_velocity,
                              build_bacterium, build_eukaryote,
                              eukaryote_resolution, motor_angular_velocity,
                              shape_velocity)


@pytest.fixture(scope="module")
def bacterium():
    return build_bacterium(BacteriumParams(2.4, 0.8), BACTERIUM_DESK)


@pytest.fixture(scope="module")
def stroke():
    return StrokeParams(frames=24, resolution=EUKARYOTE_DESK)


def test_parameter_domain_enforced():
    with pytest.raises(ValueError):
        BacteriumParams(0.1, 0.8)
    with pytest.raises(ValueError):
        BacteriumParams(2.0, 5.0)


def test_bacterium_mesh_watertight(bacterium):
    assert bacterium.mesh.n_nodes >= 200
    assert closedness_residual(bacterium.mesh) < 1e-12
    head, tail = bacterium.components
    assert min_component_distance(head, tail) > 0


def test_bacterium_node_slices(bacterium):
    head, tail = bacterium.components
    assert bacterium.node_slice("head") == slice(0, head.n_nodes)
    sl = bacterium.node_slice("tail")
    assert sl.stop - sl.start == tail.n_nodes


def test_resolution_presets():
    assert bacterium_resolution("desk") == BACTERIUM_DESK
    assert eukaryote_resolution("desk") == EUKARYOTE_DESK
    with pytest.raises(KeyError):
        bacterium_resolution("gigantic")


def test_shape_velocity_zero_on_head(bacterium):
    v = bacterium_shape_velocity(bacterium).reshape(-1, 3)
    head_nodes = bacterium.node_slice("head")
    assert np.abs(v[head_nodes]).max() == 0
    tail_nodes = bacterium.node_slice("tail")
    assert np.linalg.norm(v[tail_nodes]) > 0


def test_shape_velocity_is_tail_rotation(bacterium):
    # v = omega x r with omega along the motor axis: axial component zero
    v = bacterium_shape_velocity(bacterium).reshape(-1, 3)
    omega = motor_angular_velocity(bacterium)
    tail = bacterium.node_slice("tail")
    expected = np.cross(omega, bacterium.mesh.nodes[tail])
    np.testing.assert_allclose(v[tail], expected, atol=1e-14)


def test_eukaryote_flagella_mirror_symmetry(stroke):
    geom = build_eukaryote(stroke, 5)
    f1 = geom.node_slice("flagellum1")
    f2 = geom.node_slice("flagellum2")
    reflected = geom.mesh.nodes[f1] * np.array([1.0, -1.0, 1.0])
    np.testing.assert_allclose(reflected, geom.mesh.nodes[f2], atol=1e-12)


def test_eukaryote_frame_wraps_periodically(stroke):
    a = build_eukaryote(stroke, 3)
    b = build_eukaryote(stroke, 3 + stroke.frames)
    assert a is b  # cached, frame index taken modulo the period


def test_eukaryote_watertight_all_frames(stroke):
    for frame in range(0, stroke.frames, 6):
        geom = build_eukaryote(stroke, frame)
        assert closedness_residual(geom.mesh) < 1e-12


def test_shape_velocity_periodic_mean(stroke):
    # central differences of a periodic motion sum to zero over a cycle
    total = sum(shape_velocity(stroke, t) for t in range(stroke.frames))
    assert np.abs(total).max() < 1e-8


def test_shape_velocity_zero_on_body(stroke):
    v = shape_velocity(stroke, 2).reshape(-1, 3)
    geom = build_eukaryote(stroke, 2)
    assert np.abs(v[geom.node_slice("body")]).max() == 0


def test_stroke_frame_count_validated():
    with pytest.raises(ValueError):
        StrokeParams(frames=2)


def test_stroke_self_intersection_guard():
    bad = StrokeParams(frames=24, wave_amplitude=3.0,
                       resolution=EUKARYOTE_DESK)
    with pytest.raises(MeshError):
        for frame in range(bad.frames):
            build_eukaryote(bad, frame)
