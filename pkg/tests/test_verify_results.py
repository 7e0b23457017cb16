"""Tests for the artifact re-check script."""

import pandas as pd
import pytest

import verify_results
from utils.model import Parameters, posterior_mean_array
from utils.simulation import path_table, simulate_path
from utils.table_io import make_record, write_record, write_table
from utils.value_functions import value_table


def posterior_for(mu, x):
    return posterior_mean_array(Parameters(mu=mu, p=0.5, c0=1.0, c1=1.0, c2=1.0), x)


@pytest.fixture
def trace_file(example_params, fast_cfg, tmp_path):
    out = tmp_path / "path.csv"
    write_table(path_table(simulate_path(example_params, fast_cfg, 2)), str(out))
    return out


class TestTrace:
    def test_simulated_trace_is_consistent(self, trace_file):
        assert verify_results.main(["trace", str(trace_file)]) == 0

    def test_tampered_trace(self, trace_file):
        table = pd.read_csv(trace_file)
        table.loc[5, "m"] += 1e-6
        write_table(table, str(trace_file))
        assert verify_results.main(["trace", str(trace_file)]) == 1

    def test_other_instance_needs_its_config(self, tmp_path):
        table = pd.DataFrame({"t": [0.0, 0.5, 1.0], "x": [0.0, 0.2, 0.4], "d": [0, 0, 1]})
        table["m"] = posterior_for(0.5, table["x"].to_numpy())
        out = tmp_path / "path.csv"
        write_table(table, str(out))
        assert verify_results.main(["trace", str(out), "--mu", "0.5"]) == 0
        assert verify_results.main(["trace", str(out)]) == 1


class TestValues:
    def test_value_table(self, example_ctx, tmp_path):
        out = tmp_path / "value.csv"
        write_table(value_table(example_ctx, -1.0, 1.0, 401), str(out))
        assert verify_results.main(["values", str(out)]) == 0

    def test_wrong_instance(self, example_ctx, tmp_path):
        out = tmp_path / "value.csv"
        write_table(value_table(example_ctx, -1.0, 1.0, 401), str(out))
        assert verify_results.main(["values", str(out), "--c2", "2"]) == 1


class TestSame:
    def test_records(self, tmp_path):
        first, second, third = (tmp_path / f"{name}.json" for name in "abc")
        write_record(make_record("risk", {"seed": 1}, {"mean": 6.0}), str(first))
        write_record(make_record("risk", {"seed": 1}, {"mean": 6.0}), str(second))
        write_record(make_record("risk", {"seed": 2}, {"mean": 6.0}), str(third))
        assert verify_results.main(["same", str(first), str(second)]) == 0
        assert verify_results.main(["same", str(first), str(third)]) == 1
