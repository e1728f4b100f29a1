"""Protocol abstraction layer: name maps, clients, and transports."""

import random

import pytest

from hilsim.memmap import emit_csv
from hilsim.pal import (
    DutClient,
    MapStore,
    NameMap,
    RefDeviceClient,
    SUCCESS,
    TransportError,
    open_transport,
)
from hilsim.reference import reference_layout


@pytest.fixture(scope="module")
def layout():
    return reference_layout()


@pytest.fixture(scope="module")
def name_map(layout):
    return NameMap.from_csv(emit_csv(layout), version=layout.version)


@pytest.fixture
def client(bench, name_map):
    c = RefDeviceClient(bench.refdev, name_map)
    assert c.connect().ok
    return c


class RecordingTransport:
    """Wraps a device, logging every request line."""

    def __init__(self, device):
        self.device = device
        self.lines = []

    def request(self, line):
        self.lines.append(line)
        return self.device.handle_line(line)

    def close(self):
        pass


# -- name map and map store ---------------------------------------------


def test_name_map_lookup(name_map):
    entry = name_map.lookup("i2c.r_count")
    assert (entry.offset, entry.size, entry.type) == (334, 1, "u8")
    with pytest.raises(KeyError, match="unknown parameter"):
        name_map.lookup("i2c.nope")


def test_map_store_version_from_filename(tmp_path, layout):
    (tmp_path / "dev_1.2.3.csv").write_text(emit_csv(layout), "utf-8")
    store = MapStore(tmp_path)
    assert store.versions() == ["1.2.3"]
    assert store.get("1.2.3").lookup("i2c.r_count").offset == 334


def test_map_store_version_from_sibling_file(tmp_path, layout):
    (tmp_path / "dev_map.csv").write_text(emit_csv(layout), "utf-8")
    (tmp_path / "dev_version.txt").write_text("1.2.3 abcd\n", "utf-8")
    store = MapStore(tmp_path)
    assert store.versions() == ["1.2.3"]


def test_map_store_unknown_version(tmp_path):
    with pytest.raises(KeyError):
        MapStore(tmp_path).get("9.9.9")


# -- connection ---------------------------------------------------------


def test_connect_binds_matching_map(bench, name_map):
    client = RefDeviceClient(bench.refdev, name_map)
    result = client.connect()
    assert result.ok and result.data == "1.2.3"


def test_connect_reports_missing_map_version(bench, tmp_path):
    client = RefDeviceClient(bench.refdev, MapStore(tmp_path))
    result = client.connect()
    assert not result.ok
    assert "1.2.3" in result.error


def test_unreachable_endpoint_is_timeout():
    client = RefDeviceClient("127.0.0.1:1", NameMap({}))
    result = client.connect()
    assert result.result == "Timeout"


def test_open_transport_rejects_garbage():
    with pytest.raises(ValueError):
        open_transport("not-an-endpoint")


# -- read/write by name -------------------------------------------------


def test_read_reg_decodes_scalars(client, bench):
    assert client.read_reg("i2c.slave_addr_1").data == [85]
    bench.refdev.regs.poke_param("gpio0.rise_ticks", 0xDEADBEEF)
    assert client.read_reg("gpio0.rise_ticks").data == [0xDEADBEEF]


def test_read_reg_array_slice(client, bench):
    for i, b in enumerate((9, 8, 7)):
        bench.refdev.regs.poke_param("user_reg.user_reg", b, index=i)
    assert client.read_reg("user_reg.user_reg", 0, 3).data == [9, 8, 7]
    assert client.read_reg("user_reg.user_reg", 2).data == [7]


def test_read_reg_high_bit_stays_unsigned(client, bench):
    bench.refdev.regs.poke_param("i2c.slave_addr_2", 0x8001)
    assert client.read_reg("i2c.slave_addr_2").data == [0x8001]


def test_write_reg_stages_until_execute(client, bench):
    client.write_reg("i2c.mode.nack_data", 1)
    assert client.read_reg("i2c.mode.nack_data").data == [0]
    client.execute()
    assert client.read_reg("i2c.mode.nack_data").data == [1]


def test_write_reg_client_side_guards(client):
    assert not client.write_reg("sys.sn", 1).ok  # read-only
    assert not client.write_reg("i2c.mode.nack_data", 300).ok  # u8 range
    assert not client.write_reg("user_reg.user_reg", 1, index=500).ok  # index


def test_write_and_execute_wire_capture(bench, name_map, layout):
    """The staged-write command triple, verified against the raw wire log."""
    transport = RecordingTransport(bench.refdev)
    client = RefDeviceClient(transport, name_map)
    client.connect()
    transport.lines.clear()
    result = client.write_and_execute("i2c.mode.nack_data", 1)
    value_off = layout.lookup("i2c.mode.nack_data").offset
    init_off = layout.lookup("i2c.mode.init").offset
    expected = [f"wr {value_off} 1", f"wr {init_off} 1", "ex"]
    assert transport.lines == expected
    assert result.cmd == expected
    assert result.ok


def test_write_and_execute_triggers_reinit(client, bench):
    client.write_and_execute("i2c.mode.nack_data", 1)
    assert bench.i2c.nack_data is True


# -- name/address parity ------------------------------------------------


def test_name_address_parity_random_states(bench, name_map, layout):
    rng = random.Random(21)
    client = RefDeviceClient(bench.refdev, name_map)
    client.connect()
    for _ in range(10):
        bench.refdev.regs.poke(0, bytes(rng.randrange(256) for _ in range(2048)))
        for name in rng.sample(name_map.names(), 40):
            entry = layout.lookup(name)
            named = client.read_reg(name, 0, entry.array_len).data
            raw = bench.refdev.regs.read(entry.offset, entry.size)
            signed = entry.type.startswith("i")
            decoded = [
                int.from_bytes(raw[i : i + entry.elem_size], "little", signed=signed)
                for i in range(0, len(raw), entry.elem_size)
            ]
            assert named == decoded, name


# -- DUT client ---------------------------------------------------------


def test_dut_client_methods(bench):
    dut = DutClient(bench.dut)
    assert dut.sync()["result"] == SUCCESS
    assert dut.i2c_init()["result"] == SUCCESS
    assert dut.i2c_write_reg(85, 4, [1, 2])["result"] == SUCCESS
    assert dut.i2c_read_reg(85, 4, 2)["data"] == [1, 2]
    assert dut.gpio_toggle(0)["result"] == SUCCESS
    reply = dut.command("i2c_read_reg 99 0 1")
    assert reply["result"] == "Error" and reply["error_code"] == -6
