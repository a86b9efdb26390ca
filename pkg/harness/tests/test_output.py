from __future__ import annotations

import pandas as pd

from harness.output import format_header, read_table, write_table


class TestOutput:
    def test_header_precedes_the_data(self, tmp_path):
        frame = pd.DataFrame({"a": [0.1, 1.0 / 3.0], "b": [1, 2]})
        path = write_table(tmp_path / "run", "demo", frame, {"seed": 4, "epsilons": (1e-3, 1e-4)})
        lines = path.read_text().splitlines()
        assert lines[:3] == ["# table = demo", "# seed = 4", "# epsilons = 0.001 0.0001"]
        assert lines[3] == "a,b"

    def test_floats_round_trip(self, tmp_path):
        values = [1.0 / 3.0, 2.0**-40, 0.98254]
        path = write_table(tmp_path, "floats", pd.DataFrame({"x": values}), {})
        header, frame = read_table(path)
        assert header == {"table": "floats"}
        assert frame["x"].tolist() == values

    def test_empty_frame_keeps_its_columns(self, tmp_path):
        path = write_table(tmp_path, "empty", pd.DataFrame(columns=["trajectory", "passage_time"]), {"n": 0})
        assert path.read_text() == "# table = empty\n# n = 0\ntrajectory,passage_time\n"

    def test_format_header(self):
        assert format_header({"dt": 0.001, "name": "x"}) == "# dt = 0.001\n# name = x\n"
