import pytest

from corpus import KIRBY_CORPUS
from unisurf.kirby import KirbyError, KirbyInput, normalize_framings


def test_partial_sums_and_blocks():
    k = KirbyInput(0, (1, 1, 2), (0, 0, 0), (("s", 2, 1),))
    assert k.t == (0, 1, 2, 4)
    assert list(k.block(2)) == [2, 3]
    assert k.component_of(1) == 1


@pytest.mark.parametrize(
    "args, msg",
    [
        ((0, (1,), (), ()), "one framing"),
        ((0, (0,), (0,), ()), "positive"),
        ((0, (2,), (0,), (("s", 1, 1),)), "bad generator"),
        ((1, (1,), (0,), (("h", 1, 0),)), "1-handle"),
        ((0, (1, 1), (0, 0), (("s", 0, 1),)), "close up"),
        ((0, (2,), (0,), ()), "several loops"),
        ((0, (1,), (0,), (("x", 0, 0),)), "unknown"),
    ],
)
def test_rejects_malformed(args, msg):
    with pytest.raises(KirbyError, match=msg):
        KirbyInput(*args)


def test_writhe_counts_self_crossings_only():
    hopf = KIRBY_CORPUS["hopf"]
    assert hopf.writhes() == (0, 0)
    assert KIRBY_CORPUS["trefoil"].writhe(0) == 3


@pytest.mark.parametrize("name", sorted(KIRBY_CORPUS))
def test_normalization_reaches_framing(name):
    k = normalize_framings(KIRBY_CORPUS[name])
    assert k.writhes() == k.framings
    assert k.m == KIRBY_CORPUS[name].m


@pytest.mark.parametrize("f", range(-4, 5))
def test_unknot_normalization_adds_one_string_per_unit(f):
    k = normalize_framings(KirbyInput(0, (1,), (f,), ()))
    assert k.writhe(0) == f
    assert k.strings == (1 + abs(f),)


def test_normalization_leaves_other_components_alone():
    k = normalize_framings(KIRBY_CORPUS["two-comp-s21"])
    assert k.writhes() == (1, -1)
    assert len(k.strings) == 2
