import json

import jsonschema
import pytest

from eigencuts.report import (
    MAXCUT_CSV_COLUMNS,
    SPCA_CSV_COLUMNS,
    THETA_CSV_COLUMNS,
    ExperimentReport,
    aggregate_csv,
    read_report,
    report_schema,
    trace_csv,
    write_report,
)


def maxcut_report(**over):
    base = dict(
        command="maxcut", source="file:petersen.edges", seed=0, n=10,
        m_total=15.0,
        values={"z_sp": 12.5, "z_sd": 12.5, "z_ref": 12.5, "z_gw_cut": 12.0,
                "eigenvalue_bound": 12.5},
        gaps={"lp_gap": 1.0, "opt_gap": 1.0},
        best_cut={"value": 12.0, "method": "gw"},
        baselines={"greedy": 12.0, "sweep": 12.0},
        traces={"cutting_plane": [[0, 13.0], [5, 12.5]]},
        timings={"solve": 0.1, "total": 0.2},
        tolerances={"opt_tol": 1e-7},
        statuses={"sp": "optimal", "ref": "optimal"})
    base.update(over)
    return ExperimentReport(**base)


class TestValidation:
    def test_valid_report(self):
        maxcut_report().validate()

    def test_rejects_unknown_command(self):
        with pytest.raises(ValueError, match="command"):
            maxcut_report(command="tsp").validate()

    def test_rejects_inverted_sandwich(self):
        with pytest.raises(ValueError, match="sandwich"):
            maxcut_report(gaps={"lp_gap": 1.01, "opt_gap": 1.05}).validate()

    def test_rejects_gap_below_one(self):
        with pytest.raises(ValueError, match="sandwich"):
            maxcut_report(gaps={"lp_gap": 1.0, "opt_gap": 0.97}).validate()

    def test_gap_floor_slack_tolerated(self):
        maxcut_report(gaps={"lp_gap": 1.0, "opt_gap": 1.0 - 5e-7}).validate()

    def test_all_optimal(self):
        assert maxcut_report().all_optimal()
        r = maxcut_report(statuses={"sp": "optimal", "ref": "iteration-limit"})
        assert not r.all_optimal()


class TestSchema:
    def test_report_validates_against_shipped_schema(self):
        jsonschema.validate(maxcut_report().to_dict(), report_schema())

    def test_schema_rejects_extra_field(self):
        d = maxcut_report().to_dict()
        d["extra"] = 1
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(d, report_schema())

    def test_schema_rejects_bad_status(self):
        d = maxcut_report().to_dict()
        d["statuses"]["sp"] = "fine"
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(d, report_schema())

    def test_schema_is_itself_valid(self):
        jsonschema.Draft7Validator.check_schema(report_schema())


class TestJson:
    def test_canonical_form(self):
        text = maxcut_report().to_json()
        assert text.endswith("\n")
        keys = list(json.loads(text))
        assert keys == sorted(keys)

    def test_round_trip(self):
        r = maxcut_report()
        assert ExperimentReport.from_json(r.to_json()) == r

    def test_nan_rejected(self):
        r = maxcut_report(values={"z_sp": float("nan")})
        with pytest.raises(ValueError):
            r.to_json()

    def test_write_read(self, tmp_path):
        r = maxcut_report()
        path = tmp_path / "report.json"
        write_report(r, str(path))
        assert read_report(str(path)) == r

    def test_write_refuses_invalid(self, tmp_path):
        r = maxcut_report(gaps={"lp_gap": 0.5, "opt_gap": 1.0})
        with pytest.raises(ValueError):
            write_report(r, str(tmp_path / "bad.json"))


class TestCsv:
    def test_maxcut_columns(self):
        out = aggregate_csv([maxcut_report()])
        header, row = out.strip().split("\r\n")
        assert header == ",".join(MAXCUT_CSV_COLUMNS)
        assert row.startswith("file:petersen.edges,1,1,12")

    def test_spca_one_row_per_component(self):
        r = ExperimentReport(
            command="spca", source="pitprops.csv", n=13,
            values={"explained_variance": 0.46},
            components=[
                {"k": 5, "support": [0, 1, 6], "loading": [0.6, 0.8, 0.0],
                 "objective": 2.0, "z_lspca": 2.5, "z_ref": 2.4,
                 "quotient": 0.96},
                {"k": 2, "support": [2, 3], "loading": [0.7, 0.7],
                 "objective": 1.0, "z_lspca": 1.2, "z_ref": None,
                 "quotient": None}])
        lines = aggregate_csv([r]).strip().split("\r\n")
        assert lines[0] == ",".join(SPCA_CSV_COLUMNS)
        assert len(lines) == 3
        assert lines[1].split(",")[2] == "0 1 6"

    def test_theta_row_uses_final_ratio(self):
        r = ExperimentReport(
            command="theta", source="gen:regular", n=50,
            values={"z_ref": 9.2, "policy": "eigen", "socp": False},
            traces={"ratio": [[0, 0.1], [60, 0.89]]})
        lines = aggregate_csv([r]).strip().split("\r\n")
        assert lines[0] == ",".join(THETA_CSV_COLUMNS)
        assert lines[1].split(",")[2:4] == ["60", "0.89"]

    def test_empty_batch(self):
        assert aggregate_csv([]) == ""

    def test_mixed_commands_rejected(self):
        theta = ExperimentReport(command="theta", source="x", n=5)
        with pytest.raises(ValueError, match="different commands"):
            aggregate_csv([maxcut_report(), theta])


class TestTraceCsv:
    def test_two_column_output(self):
        out = trace_csv(maxcut_report(), "cutting_plane")
        lines = out.strip().split("\r\n")
        assert lines[0] == "cuts,cutting_plane"
        assert lines[1] == "0,13"
        assert lines[2] == "5,12.5"

    def test_unknown_trace_lists_available(self):
        with pytest.raises(KeyError, match="cutting_plane"):
            trace_csv(maxcut_report(), "ratio")
