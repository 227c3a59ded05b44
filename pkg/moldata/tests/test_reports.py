import json

from moldata.reports import JsonLinesWriter, LossReport, render_line


def test_render_line_is_compact_and_maps_nan_to_null():
    line = render_line({"auc": float("nan"), "values": [1.0, float("inf")], "name": "x"})
    assert "\n" not in line
    assert json.loads(line) == {"auc": None, "values": [1.0, None], "name": "x"}


def test_loss_report_record():
    record = LossReport(epoch=2, phase="prediction", loss_task=0.5, loss_imp=0.1, loss_total=0.51).as_record()
    assert record["type"] == "epoch"
    assert record["epoch"] == 2
    assert record["loss_margin"] == 0.0


def test_writer_appends_lines(tmp_path):
    path = tmp_path / "reports.jsonl"
    with JsonLinesWriter(str(path)) as writer:
        writer.write({"a": 1})
        writer.write({"b": 2})
    assert [json.loads(line) for line in path.read_text().splitlines()] == [{"a": 1}, {"b": 2}]
    assert writer.lines == ['{"a":1}', '{"b":2}']


def test_writer_without_path_keeps_lines_in_memory():
    writer = JsonLinesWriter()
    writer.write({"a": 1})
    writer.close()
    assert writer.lines == ['{"a":1}']
