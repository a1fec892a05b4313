import numpy as np
import pytest
from hypothesis import strategies as st


def coefs_from_roots(roots, sign):
    """Coefficients (without the leading 1) of prod(1 - z/r), AR (sign=-1) or MA (+1)."""
    poly = np.array([1.0 + 0j])
    for r in roots:
        poly = np.convolve(poly, [1.0, -1.0 / r])
    return sign * poly.real[1:]


@st.composite
def root_sets(draw, max_degree=3, min_modulus=1.15, max_modulus=4.0):
    """Roots outside the unit disk, closed under conjugation."""
    n_pairs = draw(st.integers(0, max_degree // 2))
    n_real = draw(st.integers(0, max_degree - 2 * n_pairs))
    mods = st.floats(min_modulus, max_modulus)
    roots = []
    for _ in range(n_pairs):
        r = draw(mods)
        a = draw(st.floats(0.1, np.pi - 0.1))
        roots += [r * np.exp(1j * a), r * np.exp(-1j * a)]
    for _ in range(n_real):
        roots.append(draw(mods) * draw(st.sampled_from([-1.0, 1.0])))
    return roots


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE]

    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}"
        lines.append((number, line))
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
