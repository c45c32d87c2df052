"""Session-scoped fixtures: forms and one shared endpoint batch.

The endpoint batch is deliberately moderate (m = 20000, N = 400): large
enough that 3-standard-error assertions are meaningful, small enough that
the whole module suite stays fast.  The acceptance tests build their own
batches at the pinned sizes.
"""

import pytest

from heislab import make_isotropic_form, sample_unit_endpoints


@pytest.fixture(scope="session")
def iso1():
    return make_isotropic_form(1)


@pytest.fixture(scope="session")
def iso2():
    return make_isotropic_form(2)


@pytest.fixture(scope="session")
def batch_iso1(iso1):
    return sample_unit_endpoints([iso1], steps=400, base_seed=42, m=20000)[0]
