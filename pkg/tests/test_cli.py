import json
from fractions import Fraction

import pytest

from relaycap.cli import (
    EXIT_INFEASIBLE,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_SIDE_CONDITION,
    InputError,
    load_network,
    main,
    parse_fraction,
)
from relaycap.detnet import DetNetwork, FullDuplex, HalfDuplex
from relaycap.gaussian import GaussNetwork

REF_NET = {
    "kind": "deterministic",
    "pairs": 2,
    "n_ar": [3, 2],
    "n_br": [2, 1],
    "n_ra": [2, 1],
    "n_rb": [3, 2],
}

GAUSS = {
    "kind": "gaussian",
    "h_ar": [16.0, 16.0],
    "h_br": [16.0, 16.0],
    "h_ra": [16.0, 16.0],
    "h_rb": [16.0, 16.0],
    "power": 1.0,
}


@pytest.fixture
def det_file(tmp_path):
    path = tmp_path / "det.json"
    path.write_text(json.dumps(REF_NET))
    return str(path)


@pytest.fixture
def gauss_file(tmp_path):
    path = tmp_path / "gauss.json"
    path.write_text(json.dumps(GAUSS))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    doc = json.loads(out.out) if out.out.strip().startswith("{") else None
    return code, doc, out.err


def test_parse_fraction_forms():
    assert parse_fraction("3") == 3
    assert parse_fraction("1/2") == Fraction(1, 2)
    for bad in ("0.5", "-1", "1/0", "a/b", ""):
        with pytest.raises(InputError):
            parse_fraction(bad)


def test_load_deterministic(tmp_path):
    path = tmp_path / "n.json"
    path.write_text(json.dumps({**REF_NET, "duplex": "half", "delta": "1/3"}))
    net, mode, digest = load_network(str(path))
    assert isinstance(net, DetNetwork) and isinstance(mode, HalfDuplex)
    assert mode.delta == Fraction(1, 3)
    assert len(digest) == 64


def test_load_rejects_unknown_fields(tmp_path):
    path = tmp_path / "n.json"
    path.write_text(json.dumps({**REF_NET, "mystery": 1}))
    with pytest.raises(InputError):
        load_network(str(path))


def test_load_rejects_decimal_delta(tmp_path):
    path = tmp_path / "n.json"
    path.write_text(json.dumps({**REF_NET, "duplex": "half", "delta": "0.5"}))
    with pytest.raises(InputError):
        load_network(str(path))


def test_load_gaussian(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(GAUSS))
    net, mode, _ = load_network(str(path))
    assert isinstance(net, GaussNetwork) and mode is None


def test_region_member(det_file, capsys):
    code, doc, _ = run(capsys, "region", det_file, "--rates", "2,1,1,1")
    assert code == EXIT_OK
    assert doc["member"] is True and doc["violated_cuts"] == []
    assert doc["input_digest"]


def test_region_non_member_lists_cuts(det_file, capsys):
    code, doc, _ = run(capsys, "region", det_file, "--rates", "4,0,0,0")
    assert code == EXIT_INFEASIBLE
    assert any(v["cut"] == "{A1}->relay" for v in doc["violated_cuts"])


def test_region_bad_rate_arity(det_file, capsys):
    code, _, err = run(capsys, "region", det_file, "--rates", "1,1")
    assert code == EXIT_INPUT and "expected 4 rates" in err


def test_region_decimal_rate_rejected(det_file, capsys):
    code, _, _ = run(capsys, "region", det_file, "--rates", "0.5,0,0,0")
    assert code == EXIT_INPUT


def test_region_gaussian(gauss_file, capsys):
    code, doc, _ = run(capsys, "region", gauss_file, "--rates", "2,2,2,2", "--restricted")
    assert code == EXIT_OK and doc["member"]
    code, doc, _ = run(capsys, "region", gauss_file, "--rates", "9,9,9,9")
    assert code == EXIT_INFEASIBLE and doc["violated"]


def test_schedule_with_simulation(det_file, capsys):
    code, doc, _ = run(capsys, "schedule", det_file, "--rates", "2,1,1,1", "--simulate", "100")
    assert code == EXIT_OK
    assert doc["simulate"]["decoded_exactly"] == 100
    assert doc["bit_budgets"] == {"A1": 2, "B1": 1, "A2": 1, "B2": 1}
    assert len(doc["assignments"]) == 3


def test_schedule_chunked(det_file, capsys):
    code, doc, _ = run(capsys, "schedule", det_file, "--rates", "2,1,1,1", "--chunked", "--simulate", "10")
    assert code == EXIT_OK and doc["simulate"]["decoded_exactly"] == 10


def test_schedule_fractional(tmp_path, capsys):
    path = tmp_path / "m1.json"
    path.write_text(
        json.dumps({"kind": "deterministic", "pairs": 1, "n_ar": [1], "n_br": [1], "n_ra": [1], "n_rb": [1]})
    )
    code, doc, _ = run(capsys, "schedule", str(path), "--rates", "1/2,1/2", "--simulate", "5")
    assert code == EXIT_OK and doc["slots"] == 2


def test_schedule_half_duplex_labels(tmp_path, capsys):
    path = tmp_path / "hd.json"
    path.write_text(
        json.dumps(
            {
                "kind": "deterministic",
                "pairs": 1,
                "n_ar": [2],
                "n_br": [2],
                "n_ra": [2],
                "n_rb": [2],
                "duplex": "half",
                "delta": "1/2",
            }
        )
    )
    code, doc, _ = run(capsys, "schedule", str(path), "--rates", "1,1", "--simulate", "5")
    assert code == EXIT_OK
    assert doc["slots"] == 2 and doc["listen_slots"] == 1
    assert all(a["uplink_slot"] < 1 <= a["downlink_slot"] for a in doc["assignments"])


def test_schedule_non_member(det_file, capsys):
    code, _, err = run(capsys, "schedule", det_file, "--rates", "4,0,0,0")
    assert code == EXIT_INFEASIBLE and "violated" in err


def test_gauss_verify_achievable(gauss_file, capsys):
    code, doc, _ = run(capsys, "gauss-verify", gauss_file, "--rates", "4,4,4,4")
    assert code == EXIT_OK
    assert doc["achievable"] and doc["stage"] == "ok"
    assert doc["uplink"]["case"] in ("I", "II", "III")
    assert all(c["slack"] >= -1e-9 for c in doc["uplink"]["checks"])


def test_gauss_verify_hypothesis(gauss_file, capsys):
    code, _, err = run(capsys, "gauss-verify", gauss_file, "--rates", "1,4,4,4")
    assert code == EXIT_INFEASIBLE and "constant-gap hypothesis" in err


def test_gauss_verify_low_power(tmp_path, capsys):
    path = tmp_path / "low.json"
    path.write_text(json.dumps({**GAUSS, "h_ar": [0.7, 0.7], "h_br": [0.7, 0.7], "h_ra": [0.7, 0.7], "h_rb": [0.7, 0.7]}))
    code, _, err = run(capsys, "gauss-verify", str(path), "--rates", "4,4,4,4")
    assert code == EXIT_SIDE_CONDITION and "side condition" in err


def test_sweep_deterministic_csv(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    out3 = tmp_path / "c.csv"
    assert main(["sweep", "--trials", "40", "--seed", "5", "--out", str(out1)]) == EXIT_OK
    capsys.readouterr()
    assert main(["sweep", "--trials", "40", "--seed", "5", "--out", str(out2)]) == EXIT_OK
    capsys.readouterr()
    assert main(["sweep", "--trials", "40", "--seed", "5", "--workers", "4", "--out", str(out3)]) == EXIT_OK
    capsys.readouterr()
    assert out1.read_bytes() == out2.read_bytes() == out3.read_bytes()
    header = out1.read_text().splitlines()[0]
    assert header.startswith("trial,seed,verdict,stage,max_alpha_slack,bound_gap,")


def test_sweep_zero_trials_header_only(tmp_path, capsys):
    out = tmp_path / "empty.csv"
    assert main(["sweep", "--trials", "0", "--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    lines = out.read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("trial,")


def test_sweep_det_mode(tmp_path, capsys):
    out = tmp_path / "det.csv"
    code = main(["sweep", "--det", "--trials", "8", "--seed", "2", "--out", str(out)])
    doc = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert doc["failures"] == 0 and doc["tuples_checked"] > 0
    assert out.read_text().splitlines()[0] == "trial,seed,verdict,pairs,n_ar,n_br,n_ra,n_rb,tuples_checked,failures"
