import numpy as np
import pytest

from ddc_grid import CommRegistry, Direction, GridSimError


def _registry(n=4, clusters=None, window_T=30.0, **kwargs):
    return CommRegistry(n, clusters or [list(range(n))], window_T, **kwargs)


def test_record_switch_signs():
    reg = _registry()
    reg.record_switch(0, Direction.ON, 1.0)
    reg.record_switch(1, Direction.OFF, 2.0)
    assert reg.register(0).value == -1.0
    assert reg.register(0).set_at == 1.0
    assert reg.register(1).value == 1.0
    assert reg._live_registers() == {0: (-1.0, 1.0), 1: (1.0, 2.0)}


def test_expire_after_window():
    reg = _registry()
    reg.record_switch(0, Direction.ON, 0.0)
    reg.expire(30.0)
    assert reg.register(0).value == -1.0
    reg.expire(30.01)
    assert reg.register(0).value == 0.0
    assert reg._live_registers() == {}


def test_find_and_consume_follows_search_order():
    reg = _registry()
    reg.record_switch(1, Direction.OFF, 0.0)
    reg.record_switch(2, Direction.OFF, 0.0)
    assert reg.find_and_consume(0, Direction.ON, searcher=0, search_order=[2, 1, 0, 3]) == 2
    assert reg.register(2).value == 0.0
    assert reg.register(1).value == 1.0
    assert reg.find_and_consume(0, Direction.ON, searcher=0, search_order=[2, 1, 0, 3]) == 1
    assert reg.find_and_consume(0, Direction.ON, searcher=0, search_order=[2, 1, 0, 3]) is None


def test_wanting_off_needs_a_switch_on_slot():
    reg = _registry()
    reg.record_switch(1, Direction.OFF, 0.0)
    assert reg.find_and_consume(0, Direction.OFF, searcher=0) is None
    reg.record_switch(3, Direction.ON, 0.0)
    assert reg.find_and_consume(0, Direction.OFF, searcher=0) == 3


def test_searcher_skips_its_own_register():
    reg = _registry()
    reg.record_switch(0, Direction.OFF, 0.0)
    assert reg.find_and_consume(0, Direction.ON, searcher=0) is None
    assert reg.register(0).value == 1.0


def test_search_stays_inside_cluster():
    reg = _registry(clusters=[[0, 1], [2, 3]])
    reg.record_switch(2, Direction.OFF, 0.0)
    assert reg.find_and_consume(0, Direction.ON, searcher=0) is None
    assert reg.find_and_consume(1, Direction.ON, searcher=3) == 2


def test_zero_window_and_disabled_never_match():
    for reg in (_registry(window_T=0.0), _registry(enabled=False)):
        reg.record_switch(1, Direction.OFF, 0.0)
        assert reg.find_and_consume(0, Direction.ON, searcher=0) is None
        assert reg.register(1).value == 1.0


def test_power_variant_decrements_provider():
    reg = _registry()
    reg.record_switch(1, Direction.OFF, 0.0, power=2.0)
    assert reg.find_and_consume_power(0, 1.5, searcher=0) == 1
    assert reg.register(1).value == pytest.approx(0.5)
    # a single provider must cover the whole need
    assert reg.find_and_consume_power(0, 1.0, searcher=0) is None
    assert reg.find_and_consume_power(0, 0.5, searcher=0) == 1
    assert reg._live_registers() == {}


def test_power_variant_switching_off():
    reg = _registry()
    reg.record_switch(2, Direction.ON, 0.0, power=1.0)
    assert reg.find_and_consume_power(0, 1.0, searcher=0) is None
    assert reg.find_and_consume_power(0, -1.0, searcher=0) == 2
    assert reg.register(2).value == 0.0


def test_from_sizes_offsets_clusters():
    reg = CommRegistry.from_sizes(10, [2, 3], first_id=5, window_T=30.0)
    assert reg.n_clusters == 2
    assert reg.cluster(5) == 0
    assert reg.cluster(7) == 1
    assert reg.cluster(9) == 1
    assert reg.cluster(0) is None
    assert reg.members(1).tolist() == [7, 8, 9]


def test_overlapping_clusters_rejected():
    with pytest.raises(GridSimError):
        CommRegistry(4, [[0, 1], [1, 2]], 30.0)
    with pytest.raises(GridSimError):
        CommRegistry(4, [[0, 4]], 30.0)


def test_random_search_order_is_a_permutation():
    reg = _registry(n=20, rng=np.random.default_rng(5))
    order = reg.search_order(0)
    assert sorted(order.tolist()) == list(range(20))


def test_random_search_finds_some_provider():
    reg = _registry(n=20, rng=np.random.default_rng(5))
    for j in (3, 8, 12):
        reg.record_switch(j, Direction.OFF, 0.0)
    found = {reg.find_and_consume(0, Direction.ON, searcher=0) for _ in range(3)}
    assert found == {3, 8, 12}
