import numpy as np
import pytest

from errors import IndexOutOfRange, InvalidArgument, ParseError
from helpers import (
    as_subset,
    complement_subset,
    fock_order,
    format_subset,
    mask_to_subset,
    parse_subset,
    popcounts,
    subset_to_mask,
    subsets_of_size,
)


def test_as_subset_sorts():
    assert as_subset([3, 0, 2], 4) == (0, 2, 3)


def test_as_subset_rejects_duplicates_and_out_of_range():
    with pytest.raises(InvalidArgument):
        as_subset([1, 1], 3)
    with pytest.raises(IndexOutOfRange):
        as_subset([3], 3)
    with pytest.raises(IndexOutOfRange):
        as_subset([-1], 3)


def test_mask_conversions():
    assert subset_to_mask((0, 2)) == 5
    assert mask_to_subset(5) == (0, 2)
    assert mask_to_subset(0) == ()
    assert complement_subset((0, 2), 4) == (1, 3)


def test_fock_order_is_size_then_lexicographic():
    assert fock_order(3) == [(), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]


def test_popcounts():
    np.testing.assert_array_equal(popcounts(3), [0, 1, 1, 2, 1, 2, 2, 3])


def test_subset_text_round_trip():
    assert format_subset((0, 2, 3)) == "0,2,3"
    assert format_subset(()) == ""
    assert parse_subset("0,2,3") == (0, 2, 3)
    assert parse_subset("{1, 4}") == (1, 4)
    assert parse_subset("") == ()
    with pytest.raises(ParseError):
        parse_subset("0,a")


def test_subsets_of_size():
    assert subsets_of_size(4, 2) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert subsets_of_size(3, 0) == [()]
    assert subsets_of_size(2, 3) == []


def test_bad_subset_is_logged(caplog):
    with caplog.at_level("ERROR", logger="helpers"):
        with pytest.raises(ParseError):
            parse_subset("1;2")
    assert "1;2" in caplog.text
