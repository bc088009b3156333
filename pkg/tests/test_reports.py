import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levysmooth.exceptions import ConfigError
from levysmooth.reports import COLUMNS, REPORT_HEADER, EstimateReport, ReportRow, summarize

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def _report():
    rep = EstimateReport("demo")
    rep.add(check="a", model="m", f="sin", x=0.5, t=0.1, lhs=1.0, rhs=2.0, se=0.1, tol=0.3,
            passed=True, n_paths=100, seed="1:0", note="k=v")
    rep.add(check="a", model="m", f="sin", x=(0.5, -1.25), t=0.1, lhs=3.0, rhs=2.0, passed=False)
    rep.add(check="b", model="m", f="ind", x=None, t="0.001..0.1", lhs=0.1, rhs=0.2)
    return rep


def test_header_and_columns():
    text = _report().to_csv()
    lines = text.splitlines()
    assert lines[0] == REPORT_HEADER
    assert lines[1] == "# suite=demo"
    assert tuple(lines[2].split(",")) == COLUMNS


def test_round_trip(tmp_path):
    rep = _report()
    p = tmp_path / "r.csv"
    rep.save(p)
    back = EstimateReport.from_csv(p)
    assert back.name == "demo"
    assert back.rows == rep.rows
    assert back.to_csv() == rep.to_csv()


@settings(max_examples=50, deadline=None)
@given(lhs=finite, rhs=finite, se=finite, x=st.one_of(st.none(), finite), ok=st.booleans(),
       note=st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), max_size=20))
def test_round_trip_property(lhs, rhs, se, x, ok, note):
    rep = EstimateReport("p")
    rep.add(check="c", model="m", f="f", x=x, t=1.0, lhs=lhs, rhs=rhs, se=se, passed=ok, note=note)
    back = EstimateReport.from_csv(rep.to_csv())
    assert back.rows[0] == rep.rows[0]


def test_pass_flags():
    rep = _report()
    assert not rep.passed
    assert len(rep.failures()) == 1
    assert rep.rows[1].as_strings()[COLUMNS.index("pass")] == "0"


def test_summarize_counts():
    text, ok = summarize([_report()])
    assert not ok
    assert "FAIL demo/a: 1/2 rows" in text
    assert "PASS demo/b: 1/1 rows" in text
    assert text.splitlines()[-1] == "overall: FAIL"


def test_summarize_is_pure_function_of_rows(tmp_path):
    rep = _report()
    rep.save(tmp_path / "r.csv")
    assert summarize([rep]) == summarize([EstimateReport.from_csv(tmp_path / "r.csv")])


def test_empty_report():
    text, ok = summarize([EstimateReport("none")])
    assert ok and "no rows" in text


def test_rejects_foreign_csv(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        EstimateReport.from_csv(p)
    with pytest.raises(ConfigError):
        EstimateReport.from_csv(REPORT_HEADER + "\nwrong,columns\n")


def test_numpy_scalars_format_like_python():
    a = ReportRow("c", "m", "f", np.float64(0.1), 1.0, np.float64(2.5), 3.0, passed=np.bool_(True),
                  n_paths=np.int64(7))
    b = ReportRow("c", "m", "f", 0.1, 1.0, 2.5, 3.0, passed=True, n_paths=7)
    assert a.as_strings() == b.as_strings()
