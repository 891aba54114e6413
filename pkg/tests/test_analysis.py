import numpy as np
import pytest

from swimrom.analysis import (AdditiveApproach, AnalysisError, axial_velocity,
                              fom_efficiency, integrate_rigid_motion,
                              lighthill_efficiency, motor_torque,
                              training_frames)
from swimrom.rommodel import BacteriumFamily
from swimrom.swimmers import BACTERIUM_DESK


@pytest.fixture(scope="module")
def family():
    return BacteriumFamily(BACTERIUM_DESK)


def test_axial_velocity_aligned():
    p_dot = np.array([0.1, 0.0, 0.0, 0.0, 0.0, 0.0])
    assert axial_velocity(p_dot, np.array([1.0, 0.0, 0.0])) == pytest.approx(0.1)


def test_axial_velocity_perpendicular():
    p_dot = np.array([0.0, 0.2, 0.0, 0.0, 0.0, 0.0])
    assert axial_velocity(p_dot, np.array([1.0, 0.0, 0.0])) == pytest.approx(0.0)


def test_axial_velocity_zero_axis_rejected():
    p_dot = np.array([0.1, 0.0, 0.0, 1.0, 0.0, 0.0])
    with pytest.raises(AnalysisError):
        axial_velocity(p_dot, np.array([1.0, 0.0, 0.0]))


def test_lighthill_rejects_nonpositive_power():
    with pytest.raises(AnalysisError):
        lighthill_efficiency(1.0, 0.1, -2.0, 1.0)


def test_forward_swimming_at_reference_tail(family):
    # the reference helical swimmer must make forward progress and spin
    # its body against the tail
    rec = fom_efficiency(family, (2.38, 0.8))
    assert rec.U_axial > 0
    assert rec.T_motor > 0
    assert 0 < rec.eta < 0.1


def test_efficiency_invariant_under_motor_rate(family):
    # Stokes linearity: doubling the motor rate doubles U and T, eta fixed
    from swimrom.analysis import bacterium_efficiency
    from swimrom.solve import split_solve
    from swimrom.swimmers import (BacteriumParams, bacterium_shape_velocity,
                                  build_bacterium)
    from swimrom.assembly import assemble_operators

    mu = (2.0, 1.0)
    base = fom_efficiency(family, mu)
    geom2 = build_bacterium(BacteriumParams(*mu), BACTERIUM_DESK,
                            motor_rate=2.0)
    ops = assemble_operators(geom2.mesh)
    sol2 = split_solve(ops, geom2.rigid_kit(),
                       bacterium_shape_velocity(geom2))
    rec2 = bacterium_efficiency(geom2, geom2.rigid_kit(), sol2, mu, "FOM")
    assert rec2.U_axial == pytest.approx(2 * base.U_axial, rel=1e-8)
    assert rec2.T_motor == pytest.approx(2 * base.T_motor, rel=1e-8)
    assert rec2.eta == pytest.approx(base.eta, rel=1e-8)


def test_additive_approach_overestimates(family):
    # dropping head-tail interaction leaves out the wake the head casts
    # on the tail, inflating the predicted efficiency
    aa = AdditiveApproach(BACTERIUM_DESK)
    mu = (2.38, 0.8)
    rec_aa = aa.efficiency(mu)
    rec_fom = fom_efficiency(family, mu)
    assert rec_aa.eta > rec_fom.eta


def test_additive_discrepancy_grows_with_head(family):
    aa = AdditiveApproach(BACTERIUM_DESK)
    small = abs(aa.efficiency((2.38, 0.8)).eta
                - fom_efficiency(family, (2.38, 0.8)).eta) \
        / fom_efficiency(family, (2.38, 0.8)).eta
    big = abs(aa.efficiency((2.38, 4.0)).eta
              - fom_efficiency(family, (2.38, 4.0)).eta) \
        / fom_efficiency(family, (2.38, 4.0)).eta
    assert big > small


def test_integrate_constant_translation_exact():
    pd = np.tile([0.3, -0.1, 0.2, 0.0, 0.0, 0.0], (11, 1))
    pos, quat = integrate_rigid_motion(pd, 0.1)
    np.testing.assert_allclose(pos[-1], [0.3, -0.1, 0.2], rtol=1e-13)
    np.testing.assert_allclose(quat[-1], [1.0, 0.0, 0.0, 0.0], atol=1e-14)


def test_integrate_constant_rotation_angle():
    omega = 0.7
    T, steps = 2.0, 400
    pd = np.tile([0.0, 0.0, 0.0, 0.0, 0.0, omega], (steps + 1, 1))
    _, quat = integrate_rigid_motion(pd, T / steps)
    angle = 2 * np.arccos(np.clip(quat[-1, 0], -1, 1))
    assert angle == pytest.approx(omega * T, rel=1e-6)
    np.testing.assert_allclose(np.linalg.norm(quat, axis=1), 1.0, atol=1e-12)


def test_integrator_second_order():
    # smooth synthetic velocity: halving the step shrinks the endpoint
    # error by about four
    def series(steps):
        t = np.linspace(0.0, 1.0, steps + 1)
        pd = np.zeros((steps + 1, 6))
        pd[:, 0] = np.exp(t)
        return pd

    exact = np.e - 1.0
    errs = []
    for steps in (50, 100):
        pos, _ = integrate_rigid_motion(series(steps), 1.0 / steps)
        errs.append(abs(pos[-1, 0] - exact))
    ratio = errs[0] / errs[1]
    assert 3.0 < ratio < 5.5


def test_training_frames_equispaced():
    frames = training_frames(240, 6)
    assert frames == [0, 40, 80, 120, 160, 200]
    with pytest.raises(AnalysisError):
        training_frames(240, 1)


def test_motor_torque_uses_tail_only(family):
    mu = (2.0, 1.0)
    geom = family.geometry(mu)
    kit = geom.rigid_kit()
    f = np.zeros(geom.mesh.n_dofs)
    f[geom.dof_mask("head")] = 1.0  # head-only traction: no motor load
    assert motor_torque(geom, kit, f) == 0.0
