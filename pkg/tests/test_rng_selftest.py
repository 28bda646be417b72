import numpy as np

from kerneldescent.rng import child_rng, child_seed_sequence
from kerneldescent.selftest import CHECKS, run_selftest


class TestChildStreams:
    def test_deterministic(self):
        a = child_rng(7, "stream").standard_normal(8)
        b = child_rng(7, "stream").standard_normal(8)
        np.testing.assert_array_equal(a, b)

    def test_tag_separates(self):
        a = child_rng(7, "stream-a").standard_normal(8)
        b = child_rng(7, "stream-b").standard_normal(8)
        assert not np.array_equal(a, b)

    def test_index_separates(self):
        a = child_rng(7, "stream", 0).standard_normal(8)
        b = child_rng(7, "stream", 1).standard_normal(8)
        assert not np.array_equal(a, b)

    def test_seed_separates(self):
        a = child_rng(7, "stream").standard_normal(8)
        b = child_rng(8, "stream").standard_normal(8)
        assert not np.array_equal(a, b)

    def test_spawn_key_layout(self):
        ss = child_seed_sequence(3, "x", 5)
        assert len(ss.spawn_key) == 5
        assert ss.spawn_key[-1] == 5
        assert ss.entropy == 3


class TestSelftest:
    def test_all_checks_pass(self, capsys):
        failures = run_selftest()
        out = capsys.readouterr().out
        assert failures == 0
        assert "[FAIL]" not in out
        assert out.count("[PASS]") == len(CHECKS)

    def test_custom_printer(self):
        lines = []
        failures = run_selftest(printer=lines.append)
        assert failures == 0
        assert any("[PASS]" in ln for ln in lines)
