from fractions import Fraction
from itertools import product

from hypothesis import given

from conftest import binary_instances
from mixedfair.audit import FREE_DISPOSAL_TABLE
from mixedfair.core import Instance, lorenz_dominates
from mixedfair.mnwtie import (
    assignment_to_allocation,
    assignment_utilities,
    leximin_profile,
    mnw_tie_allocate,
    mnw_tie_no_disposal,
)
from mixedfair.oracles import (
    all_assignments,
    brute_leximin_indivisible,
    brute_mnw_indivisible,
)

FREE = Instance.binary_all(FREE_DISPOSAL_TABLE)


def small_binary(max_n=3, max_m=5):
    for n in range(1, max_n + 1):
        for m in range(max_m + 1):
            for rows in product(product((0, 1), repeat=m), repeat=n):
                yield Instance.binary_all(rows)


class TestLeximinProfile:
    def test_single_agent(self):
        assert leximin_profile(Instance.binary_all([(1, 1, 1)])) == (3,)

    def test_free_disposal_table(self):
        assert leximin_profile(FREE) == (1, 2, 2)

    def test_two_shared_goods(self):
        assert leximin_profile(Instance.binary_all([(1, 1), (1, 1)])) == (1, 1)

    def test_profile_is_fractions(self):
        assert all(isinstance(x, Fraction) for x in leximin_profile(FREE))

    def test_divisible_part_ignored(self):
        inst = Instance([(1, 1), (1, 0)], [(1, 1), (0, 0)])
        assert leximin_profile(inst) == (1, 1)


class TestAllocate:
    def test_free_disposal_table(self):
        assert mnw_tie_allocate(FREE) == (0, 1, 1, 0, 2)

    def test_worthless_goods_disposed(self):
        assert mnw_tie_allocate(Instance.binary_all([(0, 0), (0, 0)])) == (None, None)

    def test_no_disposal_variant_keeps_everything(self):
        assert mnw_tie_no_disposal(Instance.binary_all([(0, 1), (0, 1)])) == (0, 0)

    def test_single_shared_good_goes_to_first_agent(self):
        assert mnw_tie_allocate(Instance.binary_all([(1,), (1,)])) == (0,)

    def test_allocation_wrapper(self):
        a = assignment_to_allocation(FREE, (0, 1, 1, 0, 2))
        a.validate(FREE.indivisible_projection())
        assert [sorted(b.goods) for b in a.bundles] == [[0, 3], [1, 2], [4]]


def test_matches_brute_force_argmax():
    for inst in small_binary(max_m=4):
        owner = mnw_tie_allocate(inst)
        count, prod_, brute = brute_mnw_indivisible(inst)
        assert owner == brute, inst
        assert leximin_profile(inst) == brute_leximin_indivisible(inst)


@given(binary_instances(max_m=5, max_m_bar=0))
def test_wasteless(inst):
    owner = mnw_tie_allocate(inst)
    for k, i in enumerate(owner):
        if i is None:
            assert all(row[k] == 0 for row in inst.v_ind)
        else:
            assert inst.v_ind[i][k] == 1


@given(binary_instances(max_m=4, max_m_bar=0))
def test_lorenz_dominates_every_assignment(inst):
    best = assignment_utilities(inst, mnw_tie_allocate(inst))
    for owner in all_assignments(inst):
        assert lorenz_dominates(best, assignment_utilities(inst, owner))


@given(binary_instances(max_m=5, max_m_bar=0))
def test_deterministic(inst):
    again = Instance.binary_all([tuple(r) for r in inst.v_ind])
    assert mnw_tie_allocate(inst) == mnw_tie_allocate(again)
