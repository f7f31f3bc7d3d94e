import pytest

from edspid.clock import Scheduler
from edspid.registers import (BankHooks, CTRL_ENABLE, CTRL_HOME_ALL,
                              CTRL_SOFT_RESET, IndexOutOfRange, LatencyReport,
                              REG_GLOBAL_CTRL, REG_LATENCY_CFG, REG_SCRATCH,
                              REG_STATUS, REG_TELEMETRY_DIV, REG_VERSION,
                              READ_ONLY, ReadOnlyRegister, RegisterBank,
                              TransportModel, VERSION_WORD, WORD_COUNT,
                              reg_kp, reg_pos, reg_ref)


@pytest.fixture
def bank():
    return RegisterBank(Scheduler())


# ---------------------------------------------------------------------------
# plain word semantics

def test_scratch_loopback(bank):
    bank.write_word(REG_SCRATCH, 0xDEADBEEF)
    assert bank.read_word(REG_SCRATCH) == 0xDEADBEEF


def test_read_after_write_all_writable_words(bank):
    for index in range(WORD_COUNT):
        if index in READ_ONLY or index == REG_GLOBAL_CTRL:
            continue
        bank.write_word(index, 0x1234_0000 | index)
        assert bank.read_word(index) == 0x1234_0000 | index


def test_read_only_words_reject_writes(bank):
    for index in sorted(READ_ONLY):
        with pytest.raises(ReadOnlyRegister):
            bank.write_word(index, 1)


def test_version_is_constant(bank):
    assert bank.read_word(REG_VERSION) == VERSION_WORD


def test_index_out_of_range(bank):
    with pytest.raises(IndexOutOfRange):
        bank.read_word(36)
    with pytest.raises(IndexOutOfRange):
        bank.write_word(-1, 0)


def test_value_must_fit_32_bits(bank):
    with pytest.raises(ValueError):
        bank.write_word(REG_SCRATCH, 1 << 32)


# ---------------------------------------------------------------------------
# side-effect dispatch

def test_ref_write_dispatches_low_16_bits():
    calls = []
    bank = RegisterBank(Scheduler(), BankHooks(
        set_reference=lambda j, c: calls.append((j, c))))
    bank.write_word(reg_ref(3), 0xABCD_8214)
    assert calls == [(3, 0x8214)]


def test_gain_write_dispatches_field_name():
    calls = []
    bank = RegisterBank(Scheduler(), BankHooks(
        set_gain=lambda j, f, w: calls.append((j, f, w))))
    bank.write_word(reg_kp(2), 0x4000)
    assert calls == [(2, "kp", 0x4000)]


def test_pos_reads_live_counter():
    bank = RegisterBank(Scheduler(), BankHooks(
        read_position=lambda j: 32768 + 100 * j))
    assert bank.read_word(reg_pos(1)) == 32868
    assert bank.read_word(reg_pos(6)) == 33368


def test_status_packs_flags():
    bank = RegisterBank(Scheduler(), BankHooks(
        status_flags=lambda: (0b000010, 0b001001, True)))
    word = bank.read_word(REG_STATUS)
    assert word & 0x3F == 0b000010            # limit: joint 2
    assert (word >> 8) & 0x3F == 0b001001     # home: joints 1 and 4
    assert word >> 31 == 1                    # busy


def test_global_ctrl_pulse_bits_self_clear():
    events = []
    bank = RegisterBank(Scheduler(), BankHooks(
        set_enabled=lambda e: events.append(("enable", e)),
        soft_reset=lambda: events.append(("reset",)),
        home_all=lambda: events.append(("home",))))
    bank.write_word(REG_GLOBAL_CTRL, CTRL_ENABLE | CTRL_SOFT_RESET | CTRL_HOME_ALL)
    assert events == [("enable", True), ("reset",), ("home",)]
    assert bank.read_word(REG_GLOBAL_CTRL) == CTRL_ENABLE


def test_telemetry_div_dispatch():
    periods = []
    bank = RegisterBank(Scheduler(), BankHooks(
        telemetry_period_changed=periods.append))
    bank.write_word(REG_TELEMETRY_DIV, 25)
    assert periods == [25]
    assert bank.read_word(REG_TELEMETRY_DIV) == 25


# ---------------------------------------------------------------------------
# byte-address math

def test_word_addressing(bank):
    base = bank.base_address
    bank.write_address(base + 4 * REG_SCRATCH, 77)
    assert bank.read_address(base + 4 * REG_SCRATCH) == 77


def test_address_out_of_bank(bank):
    base = bank.base_address
    with pytest.raises(IndexOutOfRange):
        bank.read_address(base - 4)
    with pytest.raises(IndexOutOfRange):
        bank.read_address(base + 144)  # one word past the last
    assert bank.read_address(base + 140) == bank.read_word(35)


def test_misaligned_address_rejected(bank):
    with pytest.raises(IndexOutOfRange):
        bank.read_address(bank.base_address + 2)


# ---------------------------------------------------------------------------
# transports and latency

def test_transport_latency_is_exact_in_ticks(bank):
    sched = bank._sched
    record = bank.submit_command("axi", [("w", REG_SCRATCH, 5)])
    sched.run_until(sched.now + 10_000_000)
    assert record.done
    # 6.5 ms at 50 MHz
    assert record.completed_tick - record.submitted_tick == 325_000
    assert record.latency_seconds == pytest.approx(6.5e-3)


def test_spi_latency_default(bank):
    sched = bank._sched
    record = bank.submit_command("spi", [("w", REG_SCRATCH, 5)])
    sched.run_until(sched.now + 10_000_000)
    assert record.completed_tick - record.submitted_tick == 2_000_000


def test_command_applies_atomically(bank):
    sched = bank._sched
    ops = [("w", REG_SCRATCH, 111), ("r", REG_SCRATCH),
           ("w", REG_SCRATCH, 222), ("r", REG_SCRATCH)]
    record = bank.submit_command("axi", ops)
    assert bank.read_word(REG_SCRATCH) == 0  # nothing applied yet
    sched.run_until(sched.now + 1_000_000)
    assert record.read_values == [111, 222]
    assert bank.read_word(REG_SCRATCH) == 222


def test_empty_command_rejected(bank):
    with pytest.raises(ValueError):
        bank.submit_command("axi", [])


def test_bench_latency_statistics(bank):
    axi = bank.bench_latency("axi", 100)
    spi = bank.bench_latency("spi", 100)
    assert axi.mean_s == pytest.approx(6.5e-3)
    assert axi.min_s == axi.max_s
    assert axi.mean_s == pytest.approx(axi.min_s)
    assert spi.mean_s == pytest.approx(40e-3)
    assert axi.improvement_over(spi) == pytest.approx(515.38, abs=0.1)


def test_bench_single_command(bank):
    report = bank.bench_latency("spi-worst-case", 1)
    assert report.min_s == report.max_s == report.mean_s
    assert report.mean_s == pytest.approx(0.120)


def test_equal_latencies_zero_improvement():
    a = LatencyReport("AXI", 10, 5e-3, 5e-3, 5e-3)
    b = LatencyReport("SPI", 10, 5e-3, 5e-3, 5e-3)
    assert a.improvement_over(b) == 0.0


def test_latency_cfg_register_retunes_transports(bank):
    # 100 us units: AXI=10 -> 1 ms, SPI=20 -> 2 ms
    bank.write_word(REG_LATENCY_CFG, (20 << 16) | 10)
    assert bank.transports["axi"].per_command_latency == pytest.approx(1e-3)
    assert bank.transports["spi"].per_command_latency == pytest.approx(2e-3)
    assert bank.read_word(REG_LATENCY_CFG) == (20 << 16) | 10


def test_transport_latency_must_be_positive():
    with pytest.raises(ValueError):
        TransportModel("AXI", 0.0)


def test_dump_format(bank):
    lines = bank.dump_lines()
    assert len(lines) == 36
    index, name, value = lines[3].split("\t")
    assert (index, name) == ("3", "SCRATCH")
    assert value == "00000000"
