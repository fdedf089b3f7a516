"""CLI subcommands, exit codes, JSON output."""

import json

import pytest

from udpn import MODE_QPLUS, Marking, parse_net, parse_run, validate_run
from udpn.cli import main
from udpn.textio import serialize_marking, serialize_net

from helpers import golden_f, golden_i, golden_net


@pytest.fixture
def instance(tmp_path):
    net = golden_net()
    paths = {
        "net": tmp_path / "n1.udpn",
        "from": tmp_path / "i.mk",
        "to": tmp_path / "f.mk",
    }
    paths["net"].write_text(serialize_net(net))
    paths["from"].write_text(serialize_marking(golden_i(net)))
    paths["to"].write_text(serialize_marking(golden_f(net)))
    return net, paths


def test_check_writes_witness(instance, tmp_path, capsys):
    net, paths = instance
    witness = tmp_path / "w.run"
    code = main(["check", "--mode", "qplus",
                 "--net", str(paths["net"]),
                 "--from", str(paths["from"]), "--to", str(paths["to"]),
                 "--witness", str(witness)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "reachable"
    run = parse_run(witness.read_text(), net)
    assert validate_run(golden_i(net), run, golden_f(net), MODE_QPLUS).ok


def test_check_unreachable_exit_code(instance, capsys):
    _net, paths = instance
    code = main(["check", "--net", str(paths["net"]),
                 "--from", str(paths["to"]), "--to", str(paths["from"])])
    assert code == 1
    assert capsys.readouterr().out.strip() == "unreachable"


def test_check_json_record(instance, capsys):
    _net, paths = instance
    code = main(["check", "--json", "--net", str(paths["net"]),
                 "--from", str(paths["from"]), "--to", str(paths["to"])])
    assert code == 0
    record = json.loads(capsys.readouterr().out)
    assert record["verdict"] == "reachable"
    assert record["witness-path"] is None
    stats = record["stats"]
    assert set(stats) == {"data-values", "variables", "constraints",
                          "solver-pivots"}


def test_validate_roundtrip(instance, tmp_path, capsys):
    _net, paths = instance
    witness = tmp_path / "w.run"
    assert main(["check", "--net", str(paths["net"]),
                 "--from", str(paths["from"]), "--to", str(paths["to"]),
                 "--witness", str(witness)]) == 0
    assert main(["validate", "--mode", "qplus",
                 "--net", str(paths["net"]),
                 "--from", str(paths["from"]), "--to", str(paths["to"]),
                 "--run", str(witness)]) == 0


def test_validate_reports_failure(instance, tmp_path, capsys):
    net, paths = instance
    empty = tmp_path / "empty.run"
    empty.write_text("run { }")
    code = main(["validate", "--json", "--net", str(paths["net"]),
                 "--from", str(paths["from"]), "--to", str(paths["to"]),
                 "--run", str(empty)])
    assert code == 1
    record = json.loads(capsys.readouterr().out)
    assert record["verdict"] == "invalid"
    assert {"step", "place", "datum", "shortfall"} == set(record["failure"])


def test_transform_loopless(instance, tmp_path, capsys):
    net, paths = instance
    out_net = tmp_path / "n2.udpn"
    code = main(["transform", "--loopless", "--net", str(paths["net"]),
                 "--out-net", str(out_net)])
    assert code == 0
    net2 = parse_net(out_net.read_text())
    assert len(net2.places) == 2 * len(net.places)
    assert len(net2.transitions) == len(net.transitions) + len(net.places)


def test_reduce_data_rejects_bad_run(instance, tmp_path):
    _net, paths = instance
    empty = tmp_path / "empty.run"
    empty.write_text("run { }")
    code = main(["reduce-data", "--net", str(paths["net"]),
                 "--from", str(paths["from"]), "--to", str(paths["to"]),
                 "--run", str(empty)])
    assert code == 1


def test_oracle_deterministic_and_seed_env(instance, tmp_path, capsys, monkeypatch):
    net, paths = instance
    argv = ["oracle", "--net", str(paths["net"]), "--from", str(paths["from"]),
            "--seed", "3"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first

    monkeypatch.setenv("UDPN_SEED", "4")
    assert main(argv) == 0
    overridden = capsys.readouterr().out
    monkeypatch.setenv("UDPN_SEED", "junk")
    assert main(argv) == 2
    monkeypatch.delenv("UDPN_SEED")
    assert main(["oracle", "--net", str(paths["net"]),
                 "--from", str(paths["from"]), "--seed", "4"]) == 0
    assert capsys.readouterr().out == overridden


def test_hist_decomposition_output(tmp_path, capsys):
    hist = tmp_path / "h.hist"
    hist.write_text("histogram { x: a 1/2, b 1/2; y: a 1/2, b 1/2; }")
    assert main(["hist", "--histogram", str(hist)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert all(line.startswith("part 1/2:") for line in lines)


def test_usage_and_input_errors(instance, tmp_path):
    _net, paths = instance
    assert main(["check"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["check", "--net", str(tmp_path / "missing.udpn"),
                 "--from", str(paths["from"]), "--to", str(paths["to"])]) == 2
