import io
import random
from pathlib import Path

import pytest

from support import config, random_module
from tiltphi.cli import main
from tiltphi.errors import ParseError
from tiltphi.specfile import format_spec, parse_spec, read_spec

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"

GOLDEN_RUNS = {
    "analyze_slope": ["analyze", str(DATA / "slope.spec"), "--alpha", "1", "--alpha", "5/2"],
    "analyze_fixedpoint": ["analyze", str(DATA / "fixedpoint.spec"), "--alpha", "1"],
    "example_slope": ["example", "slope"],
    "example_fixedpoint": ["example", "fixedpoint"],
    "example_margherita3_p2": ["example", "margherita3", "--p", "2"],
    "example_margherita3_p3": ["example", "margherita3", "--p", "3"],
    "cm_m4_p3": ["cm", "--delta", "-4", "--p", "3"],
    "cm_m3_p3": ["cm", "--delta", "-3", "--p", "3"],
    "cm_m7_p2": ["cm", "--delta", "-7", "--p", "2"],
    "brauer_ss_ord_p3": ["brauer", "--left", "ss", "--right", "ord", "--p", "3"],
    "abelian_g2_e1_p3": ["abelian", "--g", "2", "--e", "1", "--p", "3"],
    "kummer_2_p3": ["kummer", "--gap", "2", "--p", "3"],
}


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def report(text):
    return dict(line.split("=", 1) for line in text.splitlines())


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden_output(name):
    code, text = run(GOLDEN_RUNS[name])
    assert code == 0
    assert text == (GOLDEN / f"{name}.txt").read_text(encoding="utf-8")


def test_output_is_deterministic():
    argv = GOLDEN_RUNS["analyze_slope"]
    assert run(argv) == run(argv)


def test_analyze_values():
    _, text = run(GOLDEN_RUNS["analyze_slope"])
    rep = report(text)
    assert rep["total_slope"] == "5/2"
    assert rep["hodge_slopes"] == "0/1,5/2"
    assert rep["filtration_sum"] == "5/2"
    assert rep["certification"] == "PASS"
    _, text = run(GOLDEN_RUNS["analyze_fixedpoint"])
    assert report(text)["kernel[1/1].dim"] == "2"


def test_example_margherita_crosses_two():
    r2 = report(run(GOLDEN_RUNS["example_margherita3_p2"])[1])
    r3 = report(run(GOLDEN_RUNS["example_margherita3_p3"])[1])
    assert r2["max_slope"] == "2/1" and r2["max_slope_exceeds_2"] == "false"
    assert r3["max_slope"] == "9/4" and r3["max_slope_exceeds_2"] == "true"


def test_no_certify_watermark():
    _, text = run(["analyze", str(DATA / "slope.spec"), "--no-certify"])
    rep = report(text)
    assert rep["watermark"] == "UNCERTIFIED"
    assert "certification" not in rep


def test_overrides_and_polygon_tsv(tmp_path):
    tsv = tmp_path / "poly.tsv"
    code, text = run(["analyze", str(DATA / "slope.spec"), "--precision", "10", "--polygon-tsv", str(tsv)])
    assert code == 0
    assert report(text)["precision"] == "10/1"
    assert tsv.read_text() == "0/1\t0/1\n1/1\t0/1\n2/1\t5/2\n"


def test_exit_codes(tmp_path, capsys):
    assert run(["analyze", str(DATA / "bad_entry.spec")])[0] == 3
    assert "line 10, column 7" in capsys.readouterr().err
    assert run(["analyze", str(tmp_path / "missing.spec")])[0] == 2
    assert run(["frobnicate"])[0] == 2
    assert run(["kummer", "--gap", "2", "--p", "2"])[0] == 6
    assert run(["cm", "--delta", "-4", "--p", "2"])[0] == 6
    assert run(["abelian", "--g", "1", "--e", "1", "--p", "3"])[0] == 6
    singular = tmp_path / "singular.spec"
    singular.write_text("[field]\np = 2\n[ring]\n[module]\nrank = 2\nentry 1 1 = 1\nentry 1 2 = 1\n"
                        "entry 2 1 = 1\nentry 2 2 = 1\n")
    assert run(["analyze", str(singular)])[0] == 4
    unsolvable = tmp_path / "unsolvable.spec"
    unsolvable.write_text("[field]\np = 2\n[ring]\n[module]\nrank = 2\nentry 1 1 = 1\nentry 1 2 = 1*d^{1}\n"
                          "entry 2 1 = 1*d^{2}\n")
    assert run(["analyze", str(unsolvable), "--no-certify"])[0] == 5


# -- spec files -------------------------------------------------------------

def test_spec_round_trip_files():
    for path in sorted(DATA.glob("*.spec")):
        if path.stem.startswith("bad"):
            continue
        spec = read_spec(path)
        text = format_spec(spec)
        assert format_spec(parse_spec(text)) == text
        assert parse_spec(text).module == spec.module


@pytest.mark.parametrize("p,m", [(2, 1), (3, 1), (2, 2), (5, 1)])
def test_spec_round_trip_random(p, m):
    rng = random.Random(p * 7 + m)
    for _ in range(10):
        M = random_module(rng, config(p, m, D=rng.choice([1, 2, 3]), P=8), rng.randint(1, 3))
        assert parse_spec(format_spec(M)).module == M


@pytest.mark.parametrize("text,line", [
    ("[field]\np = 2\n[bogus]\n", 3),
    ("p = 2\n", 1),
    ("[field]\np = 2\ncolour = red\n", 3),
    ("[field]\np = 2\np = 3\n", 3),
    ("[field]\np = two\n[module]\nrank = 1\n", 2),
    ("[field]\np = 2\n[ring]\nentry 1 1 = 1\n", 4),
    ("[field]\np = 2\n[module]\nrank = 1\nentry 1 1 = 1\nentry 1 1 = d\n", 6),
    ("[field]\np = 2\n[module]\nrank = 1\nentry 1 1 = 1*d^{1/3}\n", 5),
])
def test_spec_parse_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_spec(text)
    assert info.value.line == line


def test_spec_missing_rank():
    with pytest.raises(ParseError):
        parse_spec("[field]\np = 2\n")
