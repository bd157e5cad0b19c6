import random

import pytest

from lcws import scheme


@pytest.fixture(scope="session")
def suite():
    """One master key setup shared by the whole run (seeded)."""
    rng = random.Random(0xA11CE)
    pk, mk = scheme.setup(rng)
    return pk, mk, scheme.encryption_context(mk)
