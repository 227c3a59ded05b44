import numpy as np
import pytest

RINGS = ["c1ccccc1", "c1ccncc1", "c1ccsc1", "C1CCCCC1", "C1CCNCC1", "c1ccc2ccccc2c1"]
LINKERS = ["", "C", "CC", "O", "OCC", "C(=O)N", "C(=O)O", "NC", "S(=O)(=O)N", "C=CC", "CCOCC"]
CAPS = ["", "C", "CC", "O", "N", "F", "Cl", "OC", "CC(C)", "C(=O)O", "C(=O)NC"]


def generate_corpus(size, seed):
    """Ring systems joined by linkers, capped with small substituents."""
    rng = np.random.default_rng(seed)
    corpus = []
    while len(corpus) < size:
        parts = [CAPS[rng.integers(len(CAPS))]]
        for k in range(int(rng.integers(1, 4))):
            if k:
                parts.append(LINKERS[rng.integers(len(LINKERS))])
            parts.append(RINGS[rng.integers(len(RINGS))])
        parts.append(CAPS[rng.integers(len(CAPS))])
        corpus.append("".join(parts))
    return corpus


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(500, seed=11)
