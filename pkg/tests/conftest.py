from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mixedfair.core import Allocation, Bundle, Instance, Mode

settings.register_profile(
    "default", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

bits = st.sampled_from((0, 1))


@st.composite
def binary_instances(draw, max_n=3, max_m=4, max_m_bar=3, min_m_bar=0):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, max_m))
    m_bar = draw(st.integers(min_m_bar, max_m_bar))
    rows = draw(st.lists(st.lists(bits, min_size=m + m_bar, max_size=m + m_bar),
                         min_size=n, max_size=n))
    return Instance([r[:m] for r in rows], [r[m:] for r in rows], Mode.BINARY_ALL)


@st.composite
def split(draw, n, denominator=6):
    """A random split of one unit into ``n`` multiples of ``1/denominator``."""
    cuts = sorted(draw(st.lists(st.integers(0, denominator), min_size=n - 1, max_size=n - 1)))
    edges = [0, *cuts, denominator]
    return [Fraction(edges[i + 1] - edges[i], denominator) for i in range(n)]


@st.composite
def allocations(draw, inst):
    """A valid allocation of ``inst`` that never disposes anything."""
    owners = draw(st.lists(st.integers(0, inst.n - 1), min_size=inst.m, max_size=inst.m))
    columns = [draw(split(inst.n)) for _ in range(inst.m_bar)]
    goods = [frozenset(k for k, o in enumerate(owners) if o == i) for i in range(inst.n)]
    return Allocation(tuple(
        Bundle(goods[i], tuple(col[i] for col in columns)) for i in range(inst.n)))


@st.composite
def instance_and_allocation(draw, **kwargs):
    inst = draw(binary_instances(**kwargs))
    return inst, draw(allocations(inst))
