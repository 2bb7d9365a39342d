import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simhmimo.channel import (
    ChannelModel,
    PathLossParams,
    correlation_matrix,
    draw_channel,
    path_loss_db,
    path_loss_gain,
    psd_sqrt,
)

from .conftest import WAVELENGTH, make_arch


def test_reference_path_loss_pinned():
    # 20 log10(4 pi / 0.0107), evaluated to 30 digits
    assert path_loss_db(PathLossParams(d=1.0), WAVELENGTH) == pytest.approx(61.3965217267377, abs=1e-10)


def test_path_loss_at_link_distance_pinned():
    assert path_loss_db(PathLossParams(), WAVELENGTH) == pytest.approx(145.324422030259, abs=1e-9)


def test_path_loss_slope_per_decade():
    a = path_loss_db(PathLossParams(d=10.0, b=2.7), WAVELENGTH)
    b = path_loss_db(PathLossParams(d=100.0, b=2.7), WAVELENGTH)
    assert b - a == pytest.approx(27.0)


def test_shadowing_enters_linearly_in_db():
    p = PathLossParams(delta_db=9.0)
    assert path_loss_db(p, WAVELENGTH, 1.5) - path_loss_db(p, WAVELENGTH) == pytest.approx(13.5)
    assert path_loss_gain(p, 0.0, WAVELENGTH) == pytest.approx(10 ** (-145.324422030259 / 10), rel=1e-9)


def test_distance_below_reference_rejected():
    with pytest.raises(ValueError):
        PathLossParams(d=0.5, d0=1.0)


def test_correlation_matrix_pinned_entries():
    R = correlation_matrix(3, WAVELENGTH / 4, WAVELENGTH)
    assert np.allclose(np.diag(R), 1.0)
    assert R[0, 1] == pytest.approx(0.636619772367581, rel=1e-12)
    assert R[0, 4] == pytest.approx(math.sin(math.pi / math.sqrt(2)) / (math.pi / math.sqrt(2)), rel=1e-12)


def test_half_wavelength_spacing_nearly_uncorrelated_rows():
    R = correlation_matrix(4, WAVELENGTH / 2, WAVELENGTH)
    # sinc vanishes at integer multiples of lambda/2 along a row
    assert abs(R[0, 1]) < 1e-15 and abs(R[0, 2]) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.floats(0.05, 2.0))
def test_correlation_is_symmetric_psd(row_len, spacing_wl):
    R = correlation_matrix(row_len, spacing_wl * WAVELENGTH, WAVELENGTH)
    assert np.allclose(R, R.T)
    assert np.allclose(np.diag(R), 1.0)
    assert np.linalg.eigvalsh(R).min() > -1e-10
    X = psd_sqrt(R)
    assert np.allclose(X, X.T)
    assert np.allclose(X @ X, R, atol=1e-8)


def test_psd_sqrt_clamps_roundoff_negative():
    v = np.array([1.0, 1.0]) / math.sqrt(2)
    R = np.outer(v, v)
    R[0, 0] -= 1e-17
    X = psd_sqrt(R)
    assert np.all(np.isfinite(X))
    assert np.allclose(X @ X, R, atol=1e-12)


def test_psd_sqrt_rejects_asymmetric():
    with pytest.raises(ValueError):
        psd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_identity_correlation_reduces_to_iid(rng):
    arch = make_arch(M=4, N=9)
    model = ChannelModel.for_architecture(arch, PathLossParams(delta_db=0.0), correlated=False)
    assert np.array_equal(model.sqrt_tx, np.eye(4))
    G = draw_channel(model, rng).G
    assert G.shape == (9, 4)


def test_channel_shape_and_determinism():
    arch = make_arch(M=16, N=9)
    model = ChannelModel.for_architecture(arch)
    a = draw_channel(model, np.random.default_rng(3), seed=3)
    b = draw_channel(model, np.random.default_rng(3), seed=3)
    assert a.G.shape == (9, 16)
    assert np.array_equal(a.G, b.G)
    assert a.seed == 3 and a.shadowing_draw == b.shadowing_draw


def test_no_shadowing_draw_when_disabled(rng):
    model = ChannelModel.for_architecture(make_arch(), PathLossParams(delta_db=0.0))
    real = draw_channel(model, rng)
    assert real.shadowing_draw == 0.0
    assert real.rho2 == model.rho2


def test_channel_second_moments():
    # E[G G^H] = tr(R_tx) rho2 R_rx and E[G^H G] = tr(R_rx) rho2 R_tx
    arch = make_arch(M=9, N=4, spacing=WAVELENGTH / 4)
    model = ChannelModel.for_architecture(arch, PathLossParams(d=1.0, delta_db=0.0))
    rng = np.random.default_rng(0)
    trials = 20000
    acc_rx = np.zeros((4, 4), complex)
    acc_tx = np.zeros((9, 9), complex)
    for _ in range(trials):
        G = draw_channel(model, rng).G / math.sqrt(model.rho2)
        acc_rx += G @ G.conj().T
        acc_tx += G.conj().T @ G
    assert np.allclose(acc_rx / trials, np.trace(model.R_tx) * model.R_rx, atol=0.15)
    assert np.allclose(acc_tx / trials, np.trace(model.R_rx) * model.R_tx, atol=0.1)


def test_shadowing_scales_whole_realization():
    model = ChannelModel.for_architecture(make_arch(), PathLossParams(delta_db=9.0))
    real = draw_channel(model, np.random.default_rng(11))
    expected = path_loss_gain(model.pathloss, real.shadowing_draw, model.wavelength)
    assert real.rho2 == pytest.approx(expected)


@pytest.mark.parametrize(
    "R, expected",
    [(np.eye(3), np.eye(3)), (np.diag([4.0, 1.0]), np.diag([2.0, 1.0]))],
)
def test_psd_sqrt_simple_cases(R, expected):
    assert np.allclose(psd_sqrt(R), expected, atol=1e-14)


def test_psd_sqrt_multiplies_back():
    R = np.array([[1.0, 0.5], [0.5, 1.0]])
    X = psd_sqrt(R)
    assert np.linalg.norm(X @ X - R) / np.linalg.norm(R) <= 1e-10
