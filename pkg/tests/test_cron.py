import random

import pytest

from toscaflow.cron import SECONDS_PER_DAY, cron_next, is_valid_cron, parse_cron
from toscaflow.errors import CronSyntaxError


def brute_force_next(expr, tick):
    """Oracle: linear scan for the next matching tick."""
    t = max(tick, 0)
    for candidate in range(t, t + SECONDS_PER_DAY + 1):
        if expr.matches(candidate):
            return candidate
    raise AssertionError("no match within a day")


def test_wildcard_matches_every_second():
    expr = parse_cron("* * * * * ?")
    assert cron_next(expr, 5) == 5
    assert cron_next(expr, 0) == 0
    assert cron_next(expr, 123456) == 123456


def test_minute_boundary():
    expr = parse_cron("0 * * * * ?")
    assert cron_next(expr, 61) == brute_force_next(expr, 61) == 120
    assert cron_next(expr, 60) == 60


def test_step_field():
    expr = parse_cron("*/15 * * * * ?")
    assert cron_next(expr, 7) == brute_force_next(expr, 7) == 15


def test_comma_list_and_hour_wrap():
    expr = parse_cron("5,10 30 2 * * ?")
    # 02:30:05 is second-of-day 9005
    assert cron_next(expr, 0) == 9005
    assert cron_next(expr, 9006) == 9010
    assert cron_next(expr, 9011) == SECONDS_PER_DAY + 9005


@pytest.mark.parametrize("bad", [
    "not a cron",
    "* * * * *",            # five fields
    "60 * * * * ?",         # second out of range
    "* * 24 * * ?",         # hour out of range
    "*/0 * * * * ?",        # zero step
    "* * * 1 * ?",          # date fields must be wildcards
    "a,b * * * * ?",
])
def test_invalid_expressions(bad):
    assert not is_valid_cron(bad)
    with pytest.raises(CronSyntaxError):
        parse_cron(bad)


def _random_expr(rng):
    def time_field(hi):
        kind = rng.randrange(4)
        if kind == 0:
            return "*"
        if kind == 1:
            return str(rng.randint(0, hi))
        if kind == 2:
            return f"*/{rng.randint(1, hi)}"
        return ",".join(str(rng.randint(0, hi))
                        for _ in range(rng.randint(1, 3)))

    fields = [time_field(59), time_field(59), time_field(23),
              rng.choice("*?"), rng.choice("*?"), rng.choice("*?")]
    return " ".join(fields)


def test_cron_next_matches_brute_force_oracle():
    rng = random.Random(20260810)
    for _ in range(300):
        expr = parse_cron(_random_expr(rng))
        tick = rng.randint(0, 200000)
        assert cron_next(expr, tick) == brute_force_next(expr, tick), expr.text
