import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_pair(rng, n, alphabet=4, edits=None):
    """Equal-length pair over a small alphabet with a few planted edits."""
    from gapedit.audit import fit_length
    from gapedit.cli import generate_pair

    if edits is None:
        edits = int(rng.integers(0, max(1, n // 4) + 1))
    x, y, _ = generate_pair(n, edits, alphabet, int(rng.integers(1 << 31)))
    y = fit_length(y, n, rng, int(x.min()), int(x.max()))
    return x, y


@pytest.fixture
def report(capsys):
    """Print one verdict line past pytest's capture."""
    def emit(number, name, ok, detail=""):
        with capsys.disabled():
            print(f"\nCRITERION {number} {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    return emit
