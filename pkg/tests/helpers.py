from hypothesis import given, settings
from hypothesis.strategies import SearchStrategy

from logconn.cli.grammar import parse_ratfun, parse_scalar
from logconn.core.ratcalc import RatFun


def check_print_parse_invariant(strategy: SearchStrategy, examples: int = 200) -> None:
    """parse(print(v)) == v for every value the strategy produces"""

    @settings(max_examples=examples, deadline=None)
    @given(strategy)
    def check(value) -> None:
        text = str(value)
        if isinstance(value, RatFun):
            assert parse_ratfun(text, value.context) == value
        else:
            assert parse_scalar(text, value.context) == value

    check()

