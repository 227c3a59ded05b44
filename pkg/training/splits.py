"""Train/validation/test partitions of a dataset."""
import logging

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def random_split(size, ratios, seed):
    order = np.random.default_rng(seed).permutation(size)
    n_train = int(np.floor(ratios[0] * size + 1e-9))
    n_valid = int(np.floor(ratios[1] * size + 1e-9))
    return (
        np.sort(order[:n_train]),
        np.sort(order[n_train:n_train + n_valid]),
        np.sort(order[n_train + n_valid:]),
    )


def scaffold_split(scaffolds, ratios, seed):
    """Whole scaffold groups, largest first, fill train, then validation, then test."""
    size = len(scaffolds)
    frame = pd.DataFrame({"scaffold": list(scaffolds), "row": np.arange(size)})
    groups = [(key, group["row"].to_numpy()) for key, group in frame.groupby("scaffold", sort=True)]
    if len(groups) < 3:
        logger.warning(f"Only {len(groups)} scaffold groups among {size} molecules; using a random split")
        return random_split(size, ratios, seed)

    groups.sort(key=lambda item: (-len(item[1]), item[0]))
    train_cut = ratios[0] * size - 1e-9
    valid_cut = ratios[1] * size - 1e-9
    train, valid, test = [], [], []
    for _, rows in groups:
        if len(train) < train_cut:
            train.extend(rows)
        elif len(valid) < valid_cut:
            valid.extend(rows)
        else:
            test.extend(rows)
    return tuple(np.sort(np.asarray(part, dtype=np.int64)) for part in (train, valid, test))


def make_split(scaffolds, kind, ratios, seed):
    if kind == "scaffold":
        parts = scaffold_split(scaffolds, ratios, seed)
    elif kind == "random":
        parts = random_split(len(scaffolds), ratios, seed)
    else:
        raise ValueError(f"Unknown split '{kind}'")
    logger.info(f"{kind} split sizes: {[len(p) for p in parts]}")
    return parts
