"""RankRegistry: rank-indexed slots with spread-out doubling."""

import pytest
from hypothesis import given, settings, strategies as st

from cacheheap.core import RankRegistry


class Probe:
    def __init__(self, rank):
        self.rank = rank


def test_starts_with_eight_slots_and_grows_on_demand():
    reg = RankRegistry()
    assert len(reg.slots) == 8
    assert reg.get(0) is None
    assert reg.get(100) is None   # out-of-range reads are None, not errors
    p = Probe(11)
    reg.put(11, p)
    assert reg.get(11) is p
    assert len(reg.slots) >= 12
    assert reg.occupied == 1


def test_put_clear_roundtrip_across_growth():
    reg = RankRegistry()
    probes = {r: Probe(r) for r in range(0, 40, 3)}
    for r, p in probes.items():
        reg.put(r, p)
    assert reg.occupied == len(probes)
    for r, p in probes.items():
        assert reg.get(r) is p
    occupied = dict(reg.occupants())
    assert occupied == probes
    for r in list(probes)[::2]:
        reg.clear(r)
        assert reg.get(r) is None


def test_migration_is_incremental():
    reg = RankRegistry()
    for r in range(8):
        reg.put(r, Probe(r))
    reg.put(8, Probe(8))        # triggers doubling; old array pending
    assert reg.old is not None
    assert reg.copied <= 4      # at most two slots migrated per mutation
    for r in range(9):
        assert reg.get(r) is not None and reg.get(r).rank == r
    # a few more mutations finish the migration two slots at a time
    for r in range(9, 13):
        reg.put(r, Probe(r))
    assert reg.old is None
    for r in range(13):
        assert reg.get(r).rank == r


def test_reads_are_pure_during_migration():
    reg = RankRegistry()
    for r in range(9):
        reg.put(r, Probe(r))
    copied_before = reg.copied
    for _ in range(5):
        reg.get(3)
    assert reg.copied == copied_before


def test_put_on_occupied_slot_asserts():
    reg = RankRegistry()
    reg.put(2, Probe(2))
    with pytest.raises(AssertionError):
        reg.put(2, Probe(2))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.integers(0, 70)), max_size=120))
def test_matches_dict_model(ops):
    reg = RankRegistry()
    model = {}
    for is_put, rank in ops:
        if is_put:
            if rank in model:
                continue
            p = Probe(rank)
            reg.put(rank, p)
            model[rank] = p
        else:
            if rank not in model:
                assert reg.get(rank) is None
                continue
            reg.clear(rank)
            del model[rank]
        assert reg.occupied == len(model)
        for r in range(72):
            assert reg.get(r) is model.get(r)
