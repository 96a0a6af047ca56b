import asyncio
import threading
import time

import pytest

from phaselab.core.utils import bounded_gather, map_bounded


class _Gauge:
    def __init__(self):
        self.lock = threading.Lock()
        self.active = 0
        self.peak = 0

    def enter(self):
        with self.lock:
            self.active += 1
            self.peak = max(self.peak, self.active)

    def leave(self):
        with self.lock:
            self.active -= 1


def test_bounded_gather_respects_limit():
    gauge = _Gauge()

    async def job(i):
        gauge.enter()
        await asyncio.sleep(0.01)
        gauge.leave()
        return i

    async def main():
        return await bounded_gather(*(job(i) for i in range(12)), limit=3)

    assert asyncio.run(main()) == list(range(12))
    assert gauge.peak == 3


def test_bounded_gather_rejects_bad_limit():
    with pytest.raises(TypeError):
        bounded_gather(limit=0)


def test_map_bounded_respects_worker_count():
    gauge = _Gauge()

    def job(i):
        gauge.enter()
        time.sleep(0.02)
        gauge.leave()
        return i * i

    assert map_bounded(job, range(16), workers=4) == [i * i for i in range(16)]
    assert 1 <= gauge.peak <= 4


def test_map_bounded_keeps_order():
    items = list(range(40))
    assert map_bounded(lambda x: x * x, items, workers=4) == [x * x for x in items]
    assert map_bounded(str, [], workers=3) == []
    with pytest.raises(TypeError):
        map_bounded(str, items, workers=0)
