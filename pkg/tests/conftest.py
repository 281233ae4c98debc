import numpy as np
import pytest

from spinorbit.hilbert import ModeLabel, SinglePhotonState, Spin, TwoPhotonState

SMALL_OAMS = range(-4, 5)


def random_single(rng, n_terms=4, m_range=SMALL_OAMS, m_max=6):
    labels = [ModeLabel(Spin(s), m) for s in (0, 1) for m in m_range]
    pick = rng.choice(len(labels), size=n_terms, replace=False)
    amps = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
    amps /= np.linalg.norm(amps)
    return SinglePhotonState({labels[i]: a for i, a in zip(pick, amps)}, m_max)


def random_pair(rng, n_terms=6, m_range=SMALL_OAMS, m_max=6):
    labels = [ModeLabel(Spin(s), m) for s in (0, 1) for m in m_range]
    amps = {}
    for _ in range(n_terms):
        a, b = rng.choice(len(labels), size=2)
        amps[(labels[a], labels[b])] = complex(rng.normal(), rng.normal())
    norm = np.sqrt(sum(abs(v) ** 2 for v in amps.values()))
    return TwoPhotonState({k: v / norm for k, v in amps.items()}, m_max)


@pytest.fixture
def rng():
    return np.random.default_rng(20100614)


# criterion number -> (status, detail); filled by tests/test_acceptance.py
ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        status, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
