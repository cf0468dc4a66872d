# Tests for seeding and worker utilities

import logging

import pytest
import torch

from seisforge.utils import WorkerPool, make_rng, make_torch_generator, thread_cap
from seisforge.utils.workers import THREADS_ENV


class TestRng:
    def test_same_stream_same_draws(self):
        assert make_rng(3, "motion", 4).uniform(size=5).tolist() == make_rng(3, "motion", 4).uniform(size=5).tolist()

    def test_streams_are_independent(self):
        assert make_rng(3, "motion", 4).uniform() != make_rng(3, "motion", 5).uniform()
        assert make_rng(3, "a").uniform() != make_rng(3, "b").uniform()
        assert make_rng(3).uniform() != make_rng(4).uniform()

    def test_negative_seed(self):
        with pytest.raises(ValueError):
            make_rng(-1)

    def test_torch_generator(self):
        first = torch.rand(4, generator=make_torch_generator(1, "init"))
        second = torch.rand(4, generator=make_torch_generator(1, "init"))
        assert torch.equal(first, second)


class TestThreadCap:
    def test_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert thread_cap() == 1
        assert thread_cap(default=3) == 3

    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "4")
        assert thread_cap() == 4
        monkeypatch.setenv(THREADS_ENV, "0")
        assert thread_cap() == 1

    def test_invalid_value(self, monkeypatch, caplog):
        monkeypatch.setenv(THREADS_ENV, "many")
        with caplog.at_level(logging.WARNING, logger="seisforge.utils.workers"):
            assert thread_cap(default=2) == 2
        assert "many" in caplog.text


class TestWorkerPool:
    def test_capped_by_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "2")
        assert WorkerPool(8).max_workers == 2
        assert WorkerPool().max_workers == 2

    def test_inline_map(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        with WorkerPool(4) as pool:
            assert pool.map(abs, [-3, 2, -1]) == [3, 2, 1]
            assert pool.get_stats() == {"batches": 1, "items": 3, "max_workers": 1}

    def test_process_pool_keeps_order(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "2")
        items = list(range(-10, 10))
        with WorkerPool(2) as pool:
            assert pool.map(abs, items) == [abs(i) for i in items]
