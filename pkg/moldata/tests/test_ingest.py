import numpy as np
import pytest

from chem.scaffold import murcko_scaffold
from chem.smiles import parse_smiles
from moldata.ingest import MISSING, DatasetFormatError, build_dataset, ingest, read_table

TOX21_TASKS = [
    "NR-AR", "NR-AR-LBD", "NR-AhR", "NR-Aromatase", "NR-ER", "NR-ER-LBD",
    "NR-PPAR-gamma", "SR-ARE", "SR-ATAD5", "SR-HSE", "SR-MMP", "SR-p53",
]


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_invalid_rows_are_dropped_and_counted(tmp_path):
    path = write(tmp_path, "smiles,p_np\nCCO,1\nC1CC,0\nc1ccccc1,0\n")
    dataset = ingest(path)
    assert len(dataset) == 2
    assert dataset.dropped_invalid == 1
    assert [r.row for r in dataset.records] == [0, 2]
    assert dataset.labels.tolist() == [[1.0], [0.0]]
    assert dataset.summary["kept"] == 2


def test_multitask_header_with_missing_labels(tmp_path):
    rows = ["CCO," + ",".join(["1"] + [""] * 11), "c1ccccc1O," + ",".join(["0"] * 12)]
    path = write(tmp_path, "smiles," + ",".join(TOX21_TASKS) + "\n" + "\n".join(rows) + "\n")
    dataset = ingest(path)
    assert dataset.task_names == TOX21_TASKS
    assert dataset.num_tasks == 12
    first = dataset.records[0].labels
    assert first[0] == 1.0
    assert np.all(first[1:] == MISSING)
    assert dataset.records[0].observed.sum() == 1


def test_rows_without_labels_are_dropped(tmp_path):
    path = write(tmp_path, "smiles,a,b\nCCO,,\nCCN,1,\n")
    dataset = ingest(path)
    assert len(dataset) == 1
    assert dataset.dropped_unlabeled == 1


def test_tab_separated_and_case_insensitive_header(tmp_path):
    path = write(tmp_path, "SMILES\tactive\nCCO\t1\n", name="data.tsv")
    smiles, tasks, labels = read_table(path)
    assert smiles == ["CCO"]
    assert tasks == ["active"]
    assert labels.tolist() == [[1.0]]


def test_records_carry_scaffold_and_fragments(tmp_path):
    path = write(tmp_path, "smiles,y\nCC(=O)Nc1ccccc1,1\n")
    [record] = ingest(path).records
    assert record.scaffold == murcko_scaffold(parse_smiles("c1ccccc1"))
    assert len(record.fragments) == 2
    assert record.smiles == "CC(=O)Nc1ccccc1"


@pytest.mark.parametrize("text,message", [
    ("", "empty"),
    ("name,y\nCCO,1\n", "no 'smiles' column"),
    ("smiles,y\nCCO,2\n", "not 0, 1 or empty"),
    ("smiles,a,b\nCCO,1\n", "fewer columns"),
    ("smiles\nCCO\n", "no task columns"),
])
def test_format_errors(tmp_path, text, message):
    with pytest.raises(DatasetFormatError, match=message):
        ingest(write(tmp_path, text))


def test_short_row_is_rejected_not_padded(tmp_path):
    path = write(tmp_path, "smiles,a,b\nCCO,1\nc1ccccc1,1,0\n")
    with pytest.raises(DatasetFormatError, match="row 2 has fewer columns"):
        read_table(path)


def test_short_row_detected_in_tab_separated_table(tmp_path):
    path = write(tmp_path, "smiles\ta\tb\nCCO\t1\t0\nCCN\t1\n", name="data.tsv")
    with pytest.raises(DatasetFormatError, match="row 3 has fewer columns"):
        read_table(path)


def test_empty_label_cells_are_not_short_rows(tmp_path):
    smiles, tasks, labels = read_table(write(tmp_path, "smiles,a,b\nCCO,1,\nCCN,,0\n"))
    assert smiles == ["CCO", "CCN"]
    assert labels.tolist() == [[1.0, MISSING], [MISSING, 0.0]]


def test_smiles_only_table_without_tasks(tmp_path):
    smiles, tasks, labels = read_table(write(tmp_path, "smiles\nCCO\nCC\n"), require_tasks=False)
    assert smiles == ["CCO", "CC"]
    assert tasks == []
    assert labels.shape == (2, 0)


def test_subset_keeps_task_names():
    dataset = build_dataset(["CCO", "CCN", "CCC"], ["y"], [[1], [0], [1]])
    part = dataset.subset([2, 0])
    assert part.task_names == ["y"]
    assert [r.smiles for r in part.records] == ["CCC", "CCO"]
