import numpy as np
import pytest

from simhmimo import SimArchitecture, build_operators, truncated_svd_target
from simhmimo.channel import ChannelModel, PathLossParams, draw_channel

WAVELENGTH = 0.0107


def make_arch(S=2, L=2, K=2, M=9, N=9, spacing=WAVELENGTH / 2, **kw):
    return SimArchitecture(S=S, L=L, K=K, M=M, N=N, r_et=spacing, t_er=spacing, **kw)


def random_instance(rng, S=2, L=2, K=2, M=9, N=9, shadowing=0.0):
    """Operators, a correlated channel draw and its SVD target."""
    arch = make_arch(S=S, L=L, K=K, M=M, N=N)
    ops = build_operators(arch)
    model = ChannelModel.for_architecture(arch, PathLossParams(delta_db=shadowing))
    G = draw_channel(model, rng).G
    return arch, ops, G, truncated_svd_target(G, S)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one summary line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def report(number, passed, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
