import datetime as dt
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthcard.cards import (CardConfig, cards_held_on, chip_status, issue_cards, load_iin_table,
                             luhn_check_digit, luhn_valid, make_pan)
from synthcard.population import PopulationConfig, generate_population
from synthcard.rand import derive_stream

HORIZON = (dt.date(1985, 1, 1), dt.date(2019, 12, 31))


def brute_force_luhn(pan: str) -> bool:
    """Textbook mod-10 check written independently: double every second digit from the right."""
    digits = [int(c) for c in pan]
    total = 0
    for pos, d in enumerate(digits[::-1], start=1):
        if pos % 2 == 0:
            d = sum(int(c) for c in str(2 * d))
        total += d
    return total % 10 == 0


@pytest.fixture(scope="module")
def issued():
    cfg = PopulationConfig(size=600)
    profiles = generate_population(cfg, 5, HORIZON)
    return profiles, {p.consumer_id: issue_cards(p, cfg, HORIZON, CardConfig(), 5) for p in profiles}


@pytest.mark.parametrize("pan", ["4111111111111111", "5555555555554444", "378282246310005", "79927398713",
                                 "6011111111111117"])
def test_known_valid_numbers(pan):
    assert luhn_valid(pan) and brute_force_luhn(pan)


def test_known_invalid_numbers():
    for pan in ["4111111111111112", "79927398710", "1", "", "12a4"]:
        assert not luhn_valid(pan)


def test_check_digit_is_the_unique_passing_digit():
    g = np.random.default_rng(0)
    for _ in range(300):
        body = "".join(map(str, g.integers(0, 10, 15)))
        passing = [d for d in range(10) if brute_force_luhn(body + str(d))]
        assert passing == [luhn_check_digit(body)]


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="0123456789", min_size=1, max_size=20))
def test_check_digit_always_validates(body):
    pan = body + str(luhn_check_digit(body))
    assert luhn_valid(pan) and brute_force_luhn(pan)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="0123456789", min_size=5, max_size=18), st.data())
def test_single_digit_errors_detected(body, data):
    pan = body + str(luhn_check_digit(body))
    i = data.draw(st.integers(0, len(pan) - 1))
    new = data.draw(st.sampled_from([c for c in "0123456789" if c != pan[i]]))
    assert not luhn_valid(pan[:i] + new + pan[i + 1:])


def test_check_digit_rejects_non_digits():
    with pytest.raises(ValueError):
        luhn_check_digit("12x4")
    with pytest.raises(ValueError):
        luhn_check_digit("")


def test_make_pan_shape():
    pan = make_pan("4147", 12345)
    assert len(pan) == 14 and pan.startswith("4147") and luhn_valid(pan)
    assert make_pan("4147", 1) != make_pan("4147", 2)


def test_all_issued_pans_valid_and_unique(issued):
    _, cards = issued
    pans = [c.pan for cs in cards.values() for c in cs]
    assert all(brute_force_luhn(p) for p in pans)
    assert len(set(pans)) == len(pans)
    ids = [c.card_id for cs in cards.values() for c in cs]
    assert len(set(ids)) == len(ids)


def test_pan_prefix_matches_brand(issued):
    iin = load_iin_table()
    _, cards = issued
    for cs in cards.values():
        for c in cs:
            assert any(c.pan.startswith(str(p)) for p in iin["brands"][c.brand])


def test_cards_start_at_or_after_entry(issued):
    profiles, cards = issued
    for p in profiles:
        cs = cards[p.consumer_id]
        assert len(cs) >= 1
        assert all(c.acquired_date >= p.entry_date for c in cs)
        assert min(c.acquired_date for c in cs) == p.entry_date
        assert all(c.acquired_date <= HORIZON[1] for c in cs)


def test_reissue_chain_is_contiguous(issued):
    _, cards = issued
    for cs in cards.values():
        by_slot = {}
        for c in cs:
            by_slot.setdefault(c.slot, []).append(c)
        for chain in by_slot.values():
            chain.sort(key=lambda c: c.acquired_date)
            for a, b in zip(chain, chain[1:]):
                assert b.acquired_date == a.expiry_date + dt.timedelta(days=1)
                assert b.account_id == a.account_id and b.card_kind == a.card_kind and b.pan != a.pan
            for c in chain[1:]:
                months = (c.expiry_year - c.acquired_date.year) * 12 + c.expiry_month - c.acquired_date.month
                assert months == 4 * 12


def test_expiry_is_month_end(issued):
    _, cards = issued
    c = next(iter(cards.values()))[0]
    assert c.expiry_date.month == c.expiry_month
    assert (c.expiry_date + dt.timedelta(days=1)).day == 1
    assert c.valid_on(c.acquired_date) and c.valid_on(c.expiry_date)
    assert not c.valid_on(c.expiry_date + dt.timedelta(days=1))


def test_kind_mix_within_4se(issued):
    _, cards = issued
    accounts = {}
    for cs in cards.values():
        for c in cs:
            accounts[c.account_id] = c.card_kind
    n = len(accounts)
    counts = Counter(accounts.values())
    for kind, p in CardConfig().kind_mix.items():
        assert abs(counts[kind] / n - p) <= 4 * math.sqrt(p * (1 - p) / n), (kind, counts[kind] / n)


def test_no_chip_before_introduction(issued):
    _, cards = issued
    intro = CardConfig().chip_intro_date
    all_cards = [c for cs in cards.values() for c in cs]
    assert not any(c.has_chip for c in all_cards if c.acquired_date < intro)
    late = [c.has_chip for c in all_cards if c.acquired_date >= intro + dt.timedelta(days=3 * 366)]
    assert late and all(late)


def test_chip_ramp_probability():
    g = derive_stream(1, ("chip",)).generator
    intro = dt.date(2014, 1, 1)
    mid = dt.date(2015, 7, 2)  # halfway through a 3-year ramp
    x = np.array([chip_status(mid, intro, 3.0, g) for _ in range(4000)])
    assert abs(x.mean() - 0.5) < 4 * math.sqrt(0.25 / 4000)
    with pytest.raises(ValueError):
        chip_status(mid, intro, -1.0, g)


def test_credit_limits_only_on_credit_cards(issued):
    _, cards = issued
    for cs in cards.values():
        for c in cs:
            if c.card_kind == "Credit":
                assert c.credit_limit >= CardConfig().min_credit_limit
            else:
                assert c.credit_limit == 0.0
            assert (c.load_balance > 0) == (c.card_kind == "Prepaid")


def test_cards_held_on(issued):
    _, cards = issued
    cs = next(iter(cards.values()))
    d = cs[0].acquired_date
    held = cards_held_on(cs, d)
    assert cs[0] in held and all(c.valid_on(d) for c in held)


def test_late_entrant_gets_no_cards_outside_horizon():
    cfg = PopulationConfig(size=40)
    ps = generate_population(cfg, 2, HORIZON)
    short = (dt.date(1985, 1, 1), dt.date(1985, 12, 31))
    for p in ps:
        cs = issue_cards(p, cfg, short, CardConfig(), 2)
        if p.entry_date > short[1]:
            assert cs == []


def test_issue_is_deterministic(issued):
    profiles, cards = issued
    p = profiles[3]
    again = issue_cards(p, PopulationConfig(size=600), HORIZON, CardConfig(), 5)
    assert again == cards[p.consumer_id]


def test_card_config_validation():
    with pytest.raises(ValueError):
        CardConfig(kind_mix={"Gold": 1.0})
    with pytest.raises(ValueError):
        CardConfig(validity_years=0)
