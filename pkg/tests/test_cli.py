"""Line servers, the interactive shell, and the CLI."""

import io
import json

import pytest
from click.testing import CliRunner

from hilsim.cli import main
from hilsim.memmap import emit_csv
from hilsim.pal import NameMap, RefDeviceClient
from hilsim.reference import reference_config_text, reference_layout
from hilsim.repl import DeviceShell
from hilsim.serve import serve_stdio, serve_tcp

from conftest import make_bench


@pytest.fixture(scope="module")
def map_dir(tmp_path_factory):
    layout = reference_layout()
    path = tmp_path_factory.mktemp("maps")
    (path / "ref_device_1.2.3.csv").write_text(emit_csv(layout), "utf-8")
    return path


# -- servers ------------------------------------------------------------


def test_serve_stdio_round_trip(bench):
    out = io.StringIO()
    serve_stdio(bench.refdev, infile=io.StringIO("-v\n\nrr 204 1\n"), outfile=out)
    lines = out.getvalue().splitlines()
    assert json.loads(lines[0]) == {"version": "1.2.3", "result": 0}
    assert json.loads(lines[1]) == {"data": 85, "result": 0}


def test_serve_tcp_with_pal_client(bench, map_dir):
    server = serve_tcp(bench.refdev)
    server.serve_background()
    try:
        client = RefDeviceClient(server.endpoint, str(map_dir))
        assert client.connect().ok
        assert client.read_reg("i2c.slave_addr_1").data == [85]
        assert client.write_and_execute("i2c.mode.nack_data", 1).ok
        assert client.read_reg("i2c.mode.nack_data").data == [1]
    finally:
        server.shutdown()


def test_serve_tcp_sequential_clients(bench, map_dir):
    server = serve_tcp(bench.refdev)
    server.serve_background()
    try:
        first = RefDeviceClient(server.endpoint, str(map_dir))
        second = RefDeviceClient(server.endpoint, str(map_dir))
        assert first.connect().ok and second.connect().ok
        first.write_reg("user_reg.user_reg", 42)
        second.execute()  # same device: staged write commits
        assert first.read_reg("user_reg.user_reg").data == [42]
    finally:
        server.shutdown()


# -- shell --------------------------------------------------------------


@pytest.fixture
def shell(bench):
    layout = reference_layout()
    client = RefDeviceClient(bench.refdev, NameMap.from_csv(emit_csv(layout), version="1.2.3"))
    client.connect()
    out = io.StringIO()
    sh = DeviceShell(client, stdout=out)
    return sh, out


def test_shell_read_and_describe(shell):
    sh, out = shell
    sh.onecmd("read i2c.slave_addr_1")
    sh.onecmd("describe i2c.r_count")
    text = out.getvalue()
    assert "[85]" in text
    assert "offset 334" in text
    assert "type u8" in text


def test_shell_write_execute_and_raw(shell):
    sh, out = shell
    sh.onecmd("write_execute i2c.mode.nack_data 1")
    sh.onecmd("raw rr 191 1")
    assert '"data": 1' in out.getvalue()


def test_shell_completion(shell):
    sh, _ = shell
    matches = sh.complete_read("i2c.r", "read i2c.r", 5, 10)
    assert "i2c.r_count" in matches
    assert all(m.startswith("i2c.r") for m in matches)


def test_shell_survives_bad_input(shell):
    sh, out = shell
    sh.onecmd("read not.a.name")
    sh.onecmd("write")
    text = out.getvalue()
    assert "error" in text and "usage" in text


# -- cli ----------------------------------------------------------------


def test_cli_generate(tmp_path):
    config = tmp_path / "map.json"
    config.write_text(reference_config_text(), "utf-8")
    result = CliRunner().invoke(main, ["generate", str(config), "--out-dir", str(tmp_path / "out")])
    assert result.exit_code == 0, result.output
    names = {p.name for p in (tmp_path / "out").iterdir()}
    assert names == {
        "ref_device_map.h.txt",
        "ref_device_map.csv",
        "ref_device_map.md",
        "ref_device_version.txt",
    }
    assert (tmp_path / "out" / "ref_device_version.txt").read_text("utf-8").startswith("1.2.3 ")


def test_cli_generate_rejects_bad_config(tmp_path):
    config = tmp_path / "bad.json"
    config.write_text('{"name": "m"}', "utf-8")
    result = CliRunner().invoke(main, ["generate", str(config), "--out-dir", str(tmp_path)])
    assert result.exit_code != 0


def test_cli_run_suite_local_json():
    result = CliRunner().invoke(main, ["run-suite", "--suite", "uart", "--format", "json", "--seed", "3"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["suite"] == "uart"
    assert doc["totals"]["fail"] == 0


def test_cli_run_suite_detects_faults(tmp_path):
    faults = tmp_path / "faults.json"
    faults.write_text('{"extra_read_byte": true}', "utf-8")
    result = CliRunner().invoke(
        main, ["run-suite", "--suite", "i2c", "--faults", str(faults), "--format", "json"]
    )
    assert result.exit_code == 1
    doc = json.loads(result.output)
    assert doc["totals"]["fail"] >= 1


def test_cli_dump_trace(map_dir):
    bench = make_bench()
    bench.dut.handle_line("gpio_toggle 0")
    bench.dut.handle_line("gpio_toggle 0")
    server = serve_tcp(bench.refdev)
    server.serve_background()
    try:
        result = CliRunner().invoke(
            main, ["dump-trace", "--endpoint", server.endpoint, "--maps", str(map_dir)]
        )
    finally:
        server.shutdown()
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "index,pin,level,tick_ns"
    assert len(lines) == 3
    assert lines[1].startswith("0,0,1,")


def test_cli_serve_mutually_exclusive_flags():
    result = CliRunner().invoke(main, ["serve"])
    assert result.exit_code != 0
    assert "exactly one" in result.output
