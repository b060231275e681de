import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from models.strings import BitString, SeparatedString
from services.core import (
    PrefixSums,
    chain_instance,
    check_separated,
    from_bits,
    gap_sum,
    periodic_instance,
    random_separated,
    reverse,
    reverse_string,
    to_bits,
)
from utils.errors import IndexOutOfRange, InfeasibleParameters
from utils.rng import derive_rng

bitstrings = st.text(alphabet="01", max_size=200)


@pytest.mark.parametrize(
    "text, gaps",
    [("01001", (1, 2, 0)), ("0000", (4,)), ("1", (0, 0)), ("", (0,))],
)
def test_from_bits_runs(text, gaps):
    s = from_bits(BitString(bits=text))
    assert s.gaps == gaps
    assert s.t == len(gaps) - 1
    assert s.n == len(text)


def test_from_bits_records_min_interior_run():
    assert from_bits(BitString(bits="0100010011")).L == 0
    assert from_bits(BitString(bits="01000100")).L == 3
    assert from_bits(BitString(bits="0010")).L is None


@pytest.mark.parametrize("gaps, text", [((1, 2, 0), "01001"), ((0, 0), "1"), ((3,), "000")])
def test_to_bits(gaps, text):
    assert to_bits(SeparatedString(gaps=gaps)).bits == text


@given(bitstrings)
def test_bits_round_trip(text):
    b = BitString(bits=text)
    assert to_bits(from_bits(b)) == b


@given(bitstrings)
def test_reverse_is_an_involution_and_mirrors_runs(text):
    b = BitString(bits=text)
    assert reverse(reverse(b)) == b
    assert from_bits(reverse(b)).gaps == reverse_string(from_bits(b)).gaps


@pytest.mark.parametrize("text, expected", [("0110", "0110"), ("001", "100"), ("", "")])
def test_reverse_examples(text, expected):
    assert reverse(BitString(bits=text)).bits == expected


def test_bitstring_rejects_other_characters():
    with pytest.raises(ValidationError):
        BitString(bits="0120")


def test_separated_string_validation():
    with pytest.raises(ValidationError):
        SeparatedString(gaps=())
    with pytest.raises(ValidationError):
        SeparatedString(gaps=(1, -1, 2))
    with pytest.raises(ValidationError):
        SeparatedString(gaps=(0, 2, 5, 0), L=3)
    # boundary runs are exempt from the separation
    assert SeparatedString(gaps=(0, 3, 0), L=3).interior_gaps() == (3,)


@pytest.mark.parametrize("j, j2, expected", [(0, 2, 8), (1, 1, 0), (0, 3, 15)])
def test_gap_sum(j, j2, expected):
    assert gap_sum([3, 5, 7], j, j2) == expected


@pytest.mark.parametrize("j, j2", [(-1, 2), (2, 1), (0, 4)])
def test_gap_sum_out_of_range(j, j2):
    with pytest.raises(IndexOutOfRange):
        gap_sum([3, 5, 7], j, j2)


@given(
    st.lists(st.integers(min_value=0, max_value=10**6), min_size=1, max_size=30),
    st.data(),
)
def test_gap_sum_is_additive(seq, data):
    j = data.draw(st.integers(min_value=0, max_value=len(seq)))
    k = data.draw(st.integers(min_value=j, max_value=len(seq)))
    j2 = data.draw(st.integers(min_value=k, max_value=len(seq)))
    sums = PrefixSums(seq)
    assert sums.sum(j, j2) == sums.sum(j, k) + sums.sum(k, j2) == sum(seq[j:j2])


def test_random_separated_small_example():
    s = random_separated(10, 3, 2, derive_rng(1, "instance"))
    assert s.n == 10
    assert s.t == 2
    assert not check_separated(s, 3)


def test_random_separated_without_ones():
    assert to_bits(random_separated(5, 5, 0, derive_rng(0))).bits == "00000"


def test_random_separated_infeasible_names_the_constraint():
    with pytest.raises(InfeasibleParameters) as exc:
        random_separated(4, 3, 2, derive_rng(0))
    assert "t*(L+1) <= n" in exc.value.detail


def test_random_separated_tight_fit():
    # t(L+1) == n leaves no freedom in the interior runs
    s = random_separated(8, 3, 2, derive_rng(3))
    assert s.n == 8
    assert s.gaps[1] >= 3


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=0, max_value=2_000),
    st.integers(min_value=0, max_value=50),
    st.integers(min_value=0, max_value=40),
    st.integers(min_value=0, max_value=2**32),
)
def test_random_separated_properties(n, L, t, seed):
    if t * (L + 1) > n:
        with pytest.raises(InfeasibleParameters):
            random_separated(n, L, t, derive_rng(seed))
        return
    s = random_separated(n, L, t, derive_rng(seed))
    assert (s.n, s.t) == (n, t)
    assert all(a >= L for a in s.interior_gaps())


def test_random_separated_is_deterministic():
    first = random_separated(1_000, 20, 12, derive_rng(99, "instance"))
    again = random_separated(1_000, 20, 12, derive_rng(99, "instance"))
    other = random_separated(1_000, 20, 12, derive_rng(100, "instance"))
    assert first == again
    assert first != other


def test_check_separated_lists_short_runs():
    s = SeparatedString(gaps=(0, 5, 2, 7, 1, 0))
    assert check_separated(s, 3) == [2, 4]
    assert check_separated(s, 1) == []


def test_chain_and_periodic_instances():
    chain = chain_instance(10_000, 100, 3)
    assert chain.gaps == (10_000, 100, 100, 100)
    periodic = periodic_instance([5, 7], 3, 50)
    assert periodic.gaps == (50, 5, 7, 5, 7, 5, 7)
    with pytest.raises(InfeasibleParameters):
        periodic_instance([], 2, 10)
