"""
Dataset ingestion from delimited text tables.

The header must name a ``smiles`` column (any case); every other column is
a binary task. Empty label cells become the ``MISSING`` sentinel.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from chem.features import featurize
from chem.scaffold import murcko_scaffold
from chem.smiles import SmilesParseError, parse_smiles
from fragments.brics import brics_decompose

logger = logging.getLogger(__name__)

MISSING = -1.0

_LABEL_VALUES = {"0": 0.0, "1": 1.0, "0.0": 0.0, "1.0": 1.0, "": MISSING}


class DatasetFormatError(ValueError):
    pass


@dataclass
class MoleculeRecord:
    graph: object
    labels: np.ndarray
    scaffold: str
    fragments: list
    row: int

    @property
    def smiles(self):
        return self.graph.source_smiles

    @property
    def observed(self):
        return self.labels != MISSING


@dataclass
class Dataset:
    records: list
    task_names: list
    dropped_invalid: int = 0
    dropped_unlabeled: int = 0
    source: str = ""
    summary: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    @property
    def num_tasks(self):
        return len(self.task_names)

    @property
    def labels(self):
        if not self.records:
            return np.zeros((0, self.num_tasks))
        return np.stack([r.labels for r in self.records])

    def subset(self, indices):
        return Dataset(
            records=[self.records[i] for i in indices],
            task_names=list(self.task_names),
            source=self.source,
        )


def _separator(path):
    if Path(path).suffix.lower() == ".tsv":
        return "\t"
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
    return "\t" if "\t" in header else ","


def _first_short_row(path, sep, width):
    # with NA parsing off, pandas pads short rows with "", so count fields per record
    with open(path, encoding="utf-8", newline="") as handle:
        for number, fields in enumerate(csv.reader(handle, delimiter=sep), start=1):
            if fields and len(fields) < width:
                return number
    return None


def read_table(path, require_tasks=True):
    """Return (smiles, task_names, labels) exactly as written in the file."""
    try:
        sep = _separator(path)
        frame = pd.read_csv(path, sep=sep, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as exc:
        raise DatasetFormatError(f"{path}: empty file") from exc
    except pd.errors.ParserError as exc:
        raise DatasetFormatError(f"{path}: {exc}") from exc

    columns = [c.strip() for c in frame.columns]
    frame.columns = columns
    smiles_columns = [c for c in columns if c.lower() == "smiles"]
    if not smiles_columns:
        raise DatasetFormatError(f"{path}: no 'smiles' column in header {columns}")
    short_row = _first_short_row(path, sep, len(columns))
    if short_row is not None:
        raise DatasetFormatError(f"{path}: row {short_row} has fewer columns than the header")

    smiles_column = smiles_columns[0]
    task_names = [c for c in columns if c != smiles_column]
    if require_tasks and not task_names:
        raise DatasetFormatError(f"{path}: no task columns besides '{smiles_column}'")
    labels = np.full((len(frame), len(task_names)), MISSING)
    for j, task in enumerate(task_names):
        for i, cell in enumerate(frame[task]):
            value = _LABEL_VALUES.get(cell.strip())
            if value is None:
                raise DatasetFormatError(
                    f"{path}: row {i + 2}, column '{task}': label {cell!r} is not 0, 1 or empty"
                )
            labels[i, j] = value
    return frame[smiles_column].str.strip().tolist(), task_names, labels


def build_dataset(smiles, task_names, labels, source=""):
    """Parse, featurize, scaffold and fragment every row; drop unusable rows."""
    records = []
    dropped_invalid = dropped_unlabeled = 0
    for row, (text, y) in enumerate(zip(smiles, labels)):
        try:
            graph = featurize(parse_smiles(text))
        except SmilesParseError as exc:
            dropped_invalid += 1
            logger.warning(f"Dropping row {row}: {exc}")
            continue
        y = np.asarray(y, dtype=np.float64)
        if not np.any(y != MISSING):
            dropped_unlabeled += 1
            logger.warning(f"Dropping row {row}: no observed labels")
            continue
        records.append(MoleculeRecord(
            graph=graph,
            labels=y,
            scaffold=murcko_scaffold(graph),
            fragments=brics_decompose(graph),
            row=row,
        ))

    dataset = Dataset(
        records=records,
        task_names=list(task_names),
        dropped_invalid=dropped_invalid,
        dropped_unlabeled=dropped_unlabeled,
        source=str(source),
    )
    dataset.summary = {
        "type": "ingest",
        "source": str(source),
        "kept": len(records),
        "dropped_invalid": dropped_invalid,
        "dropped_unlabeled": dropped_unlabeled,
        "tasks": list(task_names),
    }
    logger.info(
        f"Ingested {len(records)} molecules from {source or 'memory'} "
        f"({dropped_invalid} invalid, {dropped_unlabeled} unlabeled dropped)"
    )
    return dataset


def ingest(path):
    smiles, task_names, labels = read_table(path)
    return build_dataset(smiles, task_names, labels, source=path)
