import numpy as np
import pytest

from usc_polariton.hopfield import SystemParams, diagonalize_polaritons
from usc_polariton.reservoir import excitonic, photonic


@pytest.fixture(scope="session")
def params():
    """omega_x = omega_c = rabi = 1 with the minimal diamagnetic term (figure parameters)."""
    return SystemParams.minimal_coupling(1.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def basis(params):
    return diagonalize_polaritons(params)


@pytest.fixture(scope="session")
def specs():
    return [photonic(1e-2), excitonic(1e-2)]


def fock_ladder(n):
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def criterion(request):
    """record(label, ok, detail): log an acceptance result for the terminal summary."""
    results = request.config.stash[_ACCEPTANCE_KEY]

    def record(label, ok, detail):
        results[label] = (bool(ok), detail)
        print(f"criterion {label}: {'PASS' if ok else 'FAIL'} ({detail})")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_ACCEPTANCE_KEY, {})
    if not results:
        return
    groups = {}
    for label, (ok, detail) in results.items():
        groups.setdefault(int("".join(ch for ch in label if ch.isdigit())), []).append(
            (label, ok, detail))
    terminalreporter.section("acceptance criteria")
    for number in sorted(groups):
        parts = sorted(groups[number])
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{lab}: {'pass' if good else 'FAIL'} {d}" if len(parts) > 1 else d
                           for lab, good, d in parts)
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
