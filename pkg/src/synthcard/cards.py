"""Card issuance: accounts, PAN numbering, chip status and reissue chains."""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping

from .population import ConsumerProfile, PopulationConfig
from .rand import derive_stream, sample_categorical, sample_lognormal, sample_truncated_gaussian

CARD_KINDS = ("Credit", "Debit", "Prepaid")
# Odd multiplier coprime to 10**9: card ids map to distinct account digits.
_PAN_MULT = 387420489
_PAN_OFFSET = 104729
MAX_CARDS_PER_CONSUMER = 1000


def luhn_check_digit(pan_body: str) -> int:
    """Check digit that makes ``pan_body + digit`` pass the Luhn test."""
    if not isinstance(pan_body, str) or not pan_body.isdigit() or not pan_body.isascii():
        raise ValueError(f"PAN body must be decimal digits, got {pan_body!r}")
    total = 0
    # Rightmost body digit is doubled once the check digit is appended.
    for i, ch in enumerate(reversed(pan_body)):
        d = ord(ch) - 48
        if i % 2 == 0:
            d *= 2
            if d > 9:
                d -= 9
        total += d
    return (10 - total % 10) % 10


def luhn_valid(pan: str) -> bool:
    if not pan.isdigit() or len(pan) < 2:
        return False
    return luhn_check_digit(pan[:-1]) == int(pan[-1])


def chip_status(acquired_date: dt.date, chip_intro_date: dt.date, ramp_years: float, s) -> bool:
    """Whether a card acquired on ``acquired_date`` carries a chip.

    The chip probability is 0 before the introduction date and rises linearly
    to 1 over ``ramp_years``.  One uniform is always consumed so the stream
    position does not depend on the date.
    """
    if ramp_years < 0:
        raise ValueError("ramp_years must be >= 0")
    g = s.generator if hasattr(s, "generator") else s
    u = g.random()
    if acquired_date < chip_intro_date:
        return False
    if ramp_years == 0:
        return True
    p = (acquired_date - chip_intro_date).days / (365.25 * ramp_years)
    return bool(u < min(1.0, p))


@lru_cache(maxsize=4)
def load_iin_table(path: str | None = None) -> dict:
    if path:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    with resources.files("synthcard").joinpath("data").joinpath("iin.json").open() as fh:
        return json.load(fh)


@dataclass(frozen=True)
class CardConfig:
    kind_mix: Mapping[str, float] = field(
        default_factory=lambda: {"Credit": 0.55, "Debit": 0.37, "Prepaid": 0.08})
    validity_years: int = 4
    chip_intro_date: dt.date = dt.date(2014, 1, 1)
    chip_ramp_years: float = 3.0
    prepaid_load_mean: float = 400.0
    prepaid_load_std: float = 300.0
    min_credit_limit: float = 300.0
    iin_table: str | None = None

    def __post_init__(self):
        if set(self.kind_mix) - set(CARD_KINDS):
            raise ValueError(f"unknown card kinds {set(self.kind_mix) - set(CARD_KINDS)}")
        if sum(self.kind_mix.values()) <= 0 or min(self.kind_mix.values()) < 0:
            raise ValueError("card kind mix must be non-negative with positive sum")
        if self.validity_years < 1:
            raise ValueError("validity_years must be >= 1")


@dataclass(frozen=True)
class CardAccount:
    card_id: int
    consumer_id: int
    account_id: int
    card_kind: str
    brand: str
    pan: str
    expiry_month: int
    expiry_year: int
    cvv: str
    has_chip: bool
    acquired_date: dt.date
    credit_limit: float
    balance_fraction: float
    years_since_pin_change: float
    load_balance: float = 0.0
    slot: int = 0
    preference_weight: float = 1.0

    @property
    def expiry_date(self) -> dt.date:
        """Last valid day: the final day of the expiry month."""
        y, m = (self.expiry_year + 1, 1) if self.expiry_month == 12 else (self.expiry_year, self.expiry_month + 1)
        return dt.date(y, m, 1) - dt.timedelta(days=1)

    def valid_on(self, day: dt.date) -> bool:
        return self.acquired_date <= day <= self.expiry_date


def make_pan(iin: str, card_id: int) -> str:
    body = iin + f"{(card_id * _PAN_MULT + _PAN_OFFSET) % 10**9:09d}"
    return body + str(luhn_check_digit(body))


def _add_months(d: dt.date, months: int) -> tuple[int, int]:
    k = d.year * 12 + d.month - 1 + months
    return k // 12, k % 12 + 1


def issue_cards(profile: ConsumerProfile, cfg: PopulationConfig, clock, card_cfg: CardConfig | None = None,
                seed: int = 0) -> list[CardAccount]:
    """All cards the consumer holds over the horizon, reissues included.

    ``clock`` is anything with ``start_date``/``end_date`` (or a ``(start, end)``
    tuple).  Each card slot starts at or after the consumer's entry date; when
    a card expires the slot is refilled on the first day of the following
    month with a new PAN on the same account.
    """
    card_cfg = card_cfg or CardConfig()
    start, end = (clock.start_date, clock.end_date) if hasattr(clock, "start_date") else clock
    g = derive_stream(seed, ("consumer", profile.consumer_id, "cards")).generator
    iin = load_iin_table(card_cfg.iin_table)
    n_cards = max(1, int(round(profile.cards_per_consumer)))
    per_account = max(1.0, profile.cards_per_account)
    n_accounts = max(1, min(n_cards, int(round(n_cards / per_account))))
    kinds = list(card_cfg.kind_mix)
    kind_w = [card_cfg.kind_mix[k] for k in kinds]

    accounts = []
    for a in range(n_accounts):
        kind = kinds[int(sample_categorical(g, kind_w))]
        brands = iin["kind_brands"][kind]
        names = sorted(brands)
        brand = names[int(sample_categorical(g, [brands[b] for b in names]))]
        cl = profile.credit_limit
        if kind == "Credit":
            limit = round(float(sample_truncated_gaussian(g, cl.indiv_mean, cl.indiv_std,
                                                          card_cfg.min_credit_limit, 1e7)), -2)
        else:
            limit = 0.0
        load = (round(float(sample_lognormal(g, card_cfg.prepaid_load_mean, card_cfg.prepaid_load_std)), 2)
                if kind == "Prepaid" else 0.0)
        accounts.append((profile.consumer_id * 1000 + a, kind, brand, limit, load))

    if profile.entry_date > end:
        return []
    cards: list[CardAccount] = []
    next_k = 0
    span_days = (end - profile.entry_date).days
    for slot in range(n_cards):
        account_id, kind, brand, limit, load = accounts[slot % n_accounts]
        offset = 0 if slot == 0 else int(g.integers(0, min(3 * 365, span_days) + 1))
        acquired = profile.entry_date + dt.timedelta(days=offset)
        # First generation has a staggered remaining life so reissues are spread out.
        months = int(g.integers(12, card_cfg.validity_years * 12 + 1))
        weight = float(g.lognormal(0.0, 0.75))
        while acquired <= end and next_k < MAX_CARDS_PER_CONSUMER:
            card_id = profile.consumer_id * 1000 + next_k
            next_k += 1
            prefixes = iin["brands"][brand]
            prefix = prefixes[int(g.integers(len(prefixes)))]
            ey, em = _add_months(acquired, months)
            bf = profile.balance_fraction_of_limit
            ps = profile.years_since_pin_change
            cards.append(CardAccount(
                card_id=card_id,
                consumer_id=profile.consumer_id,
                account_id=account_id,
                card_kind=kind,
                brand=brand,
                pan=make_pan(str(prefix), card_id),
                expiry_month=em,
                expiry_year=ey,
                cvv=f"{int(g.integers(0, 1000)):03d}",
                has_chip=chip_status(acquired, card_cfg.chip_intro_date, card_cfg.chip_ramp_years, g),
                acquired_date=acquired,
                credit_limit=limit,
                balance_fraction=float(sample_truncated_gaussian(g, bf.indiv_mean, bf.indiv_std, 0.0, 1.0)),
                years_since_pin_change=float(sample_truncated_gaussian(g, ps.indiv_mean, ps.indiv_std, 0.0, 60.0)),
                load_balance=load,
                slot=slot,
                preference_weight=weight,
            ))
            ny, nm = _add_months(acquired, months + 1)
            acquired = dt.date(ny, nm, 1)
            months = card_cfg.validity_years * 12
    return cards


def cards_held_on(cards, day: dt.date) -> list[CardAccount]:
    return [c for c in cards if c.valid_on(day)]
