import numpy as np
import pytest

from randlanczos.measures import DiscreteMeasure


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def random_measure(rng, natoms, lo=-1.0, hi=1.0, min_weight=0.05):
    """Random discrete measure with well-separated atoms and bounded-away weights."""
    atoms = np.sort(rng.uniform(lo, hi, natoms))
    while np.min(np.diff(atoms)) < 1e-3 * (hi - lo):
        atoms = np.sort(rng.uniform(lo, hi, natoms))
    weights = rng.uniform(min_weight, 1.0, natoms)
    weights /= weights.sum()
    return DiscreteMeasure.from_atoms(atoms, weights)
