"""CSV/JSON ingestion and serialization round trips and error reporting."""
from __future__ import annotations

import json

import numpy as np
import pytest

from hypervar import InputError
from hypervar.dataio import (
    INSTRUMENTS_HEADER,
    read_instruments_csv,
    read_matrix_csv,
    read_prices_csv,
    read_vector_csv,
    report_to_json,
    write_gfun_csv,
    write_matrix_csv,
)

from .conftest import DEMO


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestMatrixAndVector:
    def test_matrix_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((4, 4)) * 1e-3
        p = tmp_path / "m.csv"
        write_matrix_csv(p, a)
        assert np.array_equal(read_matrix_csv(p), a)  # .17g is lossless

    def test_vector_read(self, tmp_path):
        p = write(tmp_path, "v.csv", "1.0\n-2.5\n3e-2\n")
        assert np.array_equal(read_vector_csv(p), [1.0, -2.5, 0.03])
        row = write(tmp_path, "row.csv", "1.0,2.0,3.0\n")
        assert np.array_equal(read_vector_csv(row), [1.0, 2.0, 3.0])

    def test_ragged_matrix_reports_line(self, tmp_path):
        p = write(tmp_path, "bad.csv", "1.0,2.0\n3.0\n")
        with pytest.raises(InputError, match=r"bad\.csv:2"):
            read_matrix_csv(p)

    def test_non_numeric_reports_line_and_token(self, tmp_path):
        p = write(tmp_path, "bad.csv", "1.0,2.0\n3.0,oops\n")
        with pytest.raises(InputError, match=r"bad\.csv:2.*'oops'"):
            read_matrix_csv(p)

    def test_empty_file_rejected(self, tmp_path):
        p = write(tmp_path, "empty.csv", "\n\n")
        with pytest.raises(InputError, match="no data"):
            read_matrix_csv(p)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(InputError, match="gone"):
            read_matrix_csv(tmp_path / "gone.csv")

    def test_comments_and_blanks_skipped(self, tmp_path):
        p = write(tmp_path, "c.csv", "# header\n\n1.0,0.0\n0.0,1.0\n")
        assert np.array_equal(read_matrix_csv(p), np.eye(2))


class TestPrices:
    def test_reads_bundled_demo(self):
        tickers, prices = read_prices_csv(DEMO / "prices.csv")
        assert len(tickers) == 3
        assert prices.shape == (121, 3)
        assert np.all(prices > 0)

    def test_header_required(self, tmp_path):
        p = write(tmp_path, "p.csv", "100.0,50.0\n101.0,51.0\n")
        with pytest.raises(InputError, match="not a number|header"):
            read_prices_csv(p)

    def test_empty_ticker_rejected(self, tmp_path):
        p = write(tmp_path, "p.csv", "A,,C\n1,2,3\n1,2,3\n")
        with pytest.raises(InputError, match=r"p\.csv:1"):
            read_prices_csv(p)

    def test_row_width_checked(self, tmp_path):
        p = write(tmp_path, "p.csv", "A,B\n1.0,2.0\n1.0\n")
        with pytest.raises(InputError, match=r"p\.csv:3"):
            read_prices_csv(p)


class TestInstruments:
    def test_reads_bundled_demo_with_derived_vols(self):
        _, prices = read_prices_csv(DEMO / "prices.csv")
        sigma = np.cov(np.diff(np.log(prices), axis=0).T)
        instruments = read_instruments_csv(DEMO / "instruments.csv", sigma)
        assert len(instruments) == 3
        assert all(i.vol > 0 for i in instruments)
        assert all(i.quantity < 0 for i in instruments)

    def test_header_must_match(self, tmp_path):
        p = write(tmp_path, "i.csv", "name,kind\nA,call\n")
        with pytest.raises(InputError, match=r"i\.csv:1.*header"):
            read_instruments_csv(p)

    def test_explicit_vol_used(self, tmp_path):
        p = write(
            tmp_path, "i.csv",
            ",".join(INSTRUMENTS_HEADER)
            + "\nX,call,100,0.02,0.5,100,0.33,-1,0.5\n",
        )
        (inst,) = read_instruments_csv(p)
        assert inst.vol == 0.33 and inst.name == "X"
        assert inst.hedge_shares == 0.5

    def test_empty_vol_needs_sigma(self, tmp_path):
        p = write(
            tmp_path, "i.csv",
            ",".join(INSTRUMENTS_HEADER) + "\nX,call,100,0.02,0.5,100,,-1,0\n",
        )
        with pytest.raises(InputError, match=r"i\.csv:2.*vol"):
            read_instruments_csv(p)
        (inst,) = read_instruments_csv(p, sigma=np.array([[1e-4]]))
        assert inst.vol == pytest.approx(np.sqrt(252 * 1e-4))

    def test_bad_cell_names_column(self, tmp_path):
        p = write(
            tmp_path, "i.csv",
            ",".join(INSTRUMENTS_HEADER) + "\nX,call,abc,0.02,0.5,100,0.2,-1,0\n",
        )
        with pytest.raises(InputError, match=r"i\.csv:2.*strike.*'abc'"):
            read_instruments_csv(p)

    def test_field_count_checked(self, tmp_path):
        p = write(
            tmp_path, "i.csv",
            ",".join(INSTRUMENTS_HEADER) + "\nX,call,100,0.02\n",
        )
        with pytest.raises(InputError, match=r"i\.csv:2.*fields"):
            read_instruments_csv(p)

    def test_invalid_instrument_reports_line(self, tmp_path):
        p = write(
            tmp_path, "i.csv",
            ",".join(INSTRUMENTS_HEADER) + "\nX,swap,100,0.02,0.5,100,0.2,-1,0\n",
        )
        with pytest.raises(InputError, match=r"i\.csv:2.*kind"):
            read_instruments_csv(p)

    def test_no_rows_rejected(self, tmp_path):
        p = write(tmp_path, "i.csv", ",".join(INSTRUMENTS_HEADER) + "\n")
        with pytest.raises(InputError, match="no instrument rows"):
            read_instruments_csv(p)


class TestReportsAndExports:
    def test_report_json_is_stable(self):
        report = {"results": [{"alpha": 0.05, "R": 1.0}], "config": {"seed": 0}}
        a = report_to_json(report)
        b = report_to_json(json.loads(a))
        assert a == b
        assert a.endswith("\n")
        assert json.loads(a) == report

    def test_gfun_csv_format(self, tmp_path):
        p = tmp_path / "g.csv"
        points = [
            {"R": 0.0, "G": 1.0, "standardError": 0.0},
            {"R": 1.25, "G": 0.0625, "standardError": 1.5e-4},
        ]
        write_gfun_csv(p, points)
        lines = p.read_text().strip().split("\n")
        assert lines[0] == "R,G,standardError"
        assert len(lines) == 3
        parsed = [float(x) for x in lines[2].split(",")]
        assert parsed == [1.25, 0.0625, 1.5e-4]
