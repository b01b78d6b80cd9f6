"""Per-consumer simulation: travel states, purchase timing, merchants, prices, instruments.

The engine works on whole day ranges at once.  For a consumer it builds one
row per simulated day (weekday/weekend, travel mode, current place, retired
flag, extreme-age flag, year), computes the expected purchase count of every
item the consumer buys, and realizes the day's purchases as a Poisson count
split across items (superposition of per-item Poisson processes).  Everything
downstream of the counts is vectorized over events.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cards import CardAccount
from .population import ConsumerProfile, add_years
from .rand import derive_stream, lognormal_params, sample_truncated_gaussian
from .world import GsCatalog, MerchantWorld, Preferences, load_catalog, nearby_locations

EPOCH = dt.date(1970, 1, 1)
MINUTES_PER_DAY = 1440

CHIP, SWIPE, ONLINE, CASH = 0, 1, 2, 3
CHANNEL_NAMES = ("CHIP", "SWIPE", "ONLINE", "CASH")

HOME, GETAWAY, VACATION, BUSINESS = 0, 1, 2, 3
MODE_NAMES = ("Home", "WeekendGetaway", "Vacation", "BusinessTrip")
MODE_CONTEXT = np.array([0, 1, 1, 2])  # travel mode -> context column (Home, Vacation, BusinessTravel)

SEGMENT_NAMES = ("Morning", "Afternoon", "Night")
# Morning 05:00-11:59, Afternoon 12:00-18:59, Night 19:00-04:59 (early hours on the same date).
SEGMENT_LENGTH = np.array([420, 420, 600])

EVENT_DTYPE = np.dtype([
    ("ts", "<i8"),         # minutes since 1970-01-01 00:00
    ("consumer", "<i4"),
    ("card", "<i8"),       # -1 for cash
    ("amount", "<i8"),     # cents
    ("gs", "<i2"),
    ("merchant", "<i4"),
    ("location", "<i8"),   # -1 for online
    ("channel", "i1"),
    ("fraud", "i1"),       # 0 genuine, 1 fraudster agent, 2 random injection
    ("fraudster", "<i4"),  # -1 unless mechanism 1
    ("place", "<i4"),      # consumer's current place index (genuine rows), else -1
    ("segment", "i1"),
])


def day_number(d: dt.date) -> int:
    return (d - EPOCH).days


def from_day_number(n: int) -> dt.date:
    return EPOCH + dt.timedelta(days=int(n))


def day_of_week(day_numbers):
    """Monday = 0 ... Sunday = 6 (1970-01-01 was a Thursday)."""
    return (np.asarray(day_numbers) + 3) % 7


def segment_minute(segment, offset):
    """Minute of day for an offset into a segment."""
    segment = np.asarray(segment)
    offset = np.asarray(offset)
    night = np.where(offset < 300, offset, offset + 840)
    return np.where(segment == 0, 300 + offset, np.where(segment == 1, 720 + offset, night))


def minute_segment(minute_of_day):
    m = np.asarray(minute_of_day)
    return np.where((m >= 300) & (m < 720), 0, np.where((m >= 720) & (m < 1140), 1, 2))


def year_fraction(day_numbers):
    """Calendar year as a real number (e.g. 2014.5 mid-2014), vectorized."""
    d = np.asarray(day_numbers).astype("datetime64[D]")
    y = d.astype("datetime64[Y]")
    start = y.astype("datetime64[D]")
    length = (y + 1).astype("datetime64[D]") - start
    return y.astype(int) + 1970 + (d - start).astype(float) / length.astype(float)


@dataclass(frozen=True)
class SimClock:
    start_date: dt.date
    end_date: dt.date
    current: dt.date = None
    segment: str = "Morning"

    def __post_init__(self):
        if self.start_date > self.end_date:
            raise ValueError("horizon start after end")
        cur = self.current or self.start_date
        if not self.start_date <= cur <= self.end_date:
            raise ValueError("clock date outside horizon")
        object.__setattr__(self, "current", cur)

    @property
    def day_of_week(self) -> int:
        return self.current.weekday()

    @property
    def n_days(self) -> int:
        return (self.end_date - self.start_date).days + 1

    def advance(self) -> "SimClock":
        return SimClock(self.start_date, self.end_date, self.current + dt.timedelta(days=1))


@dataclass(frozen=True)
class DriftSchedule:
    """Era curves as piecewise-linear knots over fractional calendar years."""

    online_share_knots: tuple = ((1995.0, 0.0), (2000.0, 0.04), (2010.0, 0.12), (2020.0, 0.22), (2030.0, 0.30))
    chip_intro_year: int = 2014
    chip_ramp_years: float = 3.0
    online_fraud_share_knots: tuple = ((1995.0, 0.0), (2005.0, 0.30), (2013.0, 0.45), (2016.0, 0.70),
                                       (2100.0, 0.70))

    def __post_init__(self):
        for name in ("online_share_knots", "online_fraud_share_knots"):
            k = getattr(self, name)
            xs = [a for a, _ in k]
            ys = [b for _, b in k]
            if xs != sorted(xs) or any(b < a for a, b in zip(ys, ys[1:])):
                raise ValueError(f"{name} must be non-decreasing")
            if min(ys) < 0 or max(ys) > 1:
                raise ValueError(f"{name} values must lie in [0, 1]")

    @property
    def online_start_year(self) -> float:
        return self.online_share_knots[0][0]

    @property
    def chip_intro_date(self) -> dt.date:
        return dt.date(self.chip_intro_year, 1, 1)

    def _curve(self, knots, yf):
        xs = np.array([a for a, _ in knots])
        ys = np.array([b for _, b in knots])
        out = np.interp(yf, xs, ys)
        return np.where(np.asarray(yf) < xs[0], 0.0, out)

    def online_share(self, yf):
        return self._curve(self.online_share_knots, yf)

    def online_fraud_share(self, yf):
        return self._curve(self.online_fraud_share_knots, yf)

    def chip_share(self, yf):
        yf = np.asarray(yf, dtype=float)
        if self.chip_ramp_years == 0:
            return np.where(yf >= self.chip_intro_year, 1.0, 0.0)
        return np.clip((yf - self.chip_intro_year) / self.chip_ramp_years, 0.0, 1.0)


@dataclass(frozen=True)
class EngineConfig:
    max_radius_km: float = 250.0
    distance_decay_km: float = 20.0
    k_candidates: int = 8
    favorite_multiplier: float = 10.0
    cash_threshold: float = 200.0
    cash_share_knots: tuple = ((1985.0, 0.45), (2000.0, 0.32), (2010.0, 0.22), (2020.0, 0.12))
    retirement_rate_multiplier: float = 0.85
    retirement_weekday_flattening: float = 0.5
    extreme_age_multiplier: float = 0.5
    getaway_extra_day_prob: float = 0.3
    max_trip_attempts: int = 10
    max_travel_day_share: float = 0.6

    def cash_share(self, yf):
        xs = np.array([a for a, _ in self.cash_share_knots])
        ys = np.array([b for _, b in self.cash_share_knots])
        return np.interp(yf, xs, ys)


@dataclass(frozen=True)
class Trip:
    kind: int           # GETAWAY | VACATION | BUSINESS
    start: dt.date
    duration: int       # days, >= 1
    place: int          # index into the world's combined place table
    foreign: bool

    @property
    def end(self) -> dt.date:
        return self.start + dt.timedelta(days=self.duration - 1)


@dataclass
class ConsumerState:
    mode: int = HOME
    place: int = -1
    trip_end_date: dt.date | None = None
    is_retired: bool = False

    def __post_init__(self):
        if self.mode != HOME and self.trip_end_date is None:
            raise ValueError("a traveling state needs a trip end date")


@dataclass
class Counters:
    dropped_no_merchant: int = 0
    dropped_no_instrument: int = 0
    online_fallback: int = 0
    in_person_fallback: int = 0
    trips_dropped_overlap: int = 0

    def add(self, other: "Counters") -> None:
        for k in self.__dataclass_fields__:
            setattr(self, k, getattr(self, k) + getattr(other, k))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# --- travel -------------------------------------------------------------------------------

class _PlaceSampler:
    def __init__(self, places, n_us: int):
        self.n_us = n_us
        w = np.asarray(places.weight, dtype=float)
        self.us_cdf = np.cumsum(w[:n_us]) / w[:n_us].sum()
        fw = w[n_us:]
        self.f_cdf = np.cumsum(fw) / fw.sum() if len(fw) else None

    def draw(self, g, foreign: bool, avoid: int) -> int:
        if foreign and self.f_cdf is not None:
            return self.n_us + int(min(np.searchsorted(self.f_cdf, g.random(), side="right"), len(self.f_cdf) - 1))
        for _ in range(3):
            p = int(min(np.searchsorted(self.us_cdf, g.random(), side="right"), self.n_us - 1))
            if p != avoid:
                break
        return p


_SAMPLERS: dict = {}


def _sampler(world: MerchantWorld) -> _PlaceSampler:
    key = id(world.places)
    s = _SAMPLERS.get(key)
    if s is None:
        s = _SAMPLERS[key] = _PlaceSampler(world.places, int(world.places.is_us.sum()))
    return s


def plan_travel(profile: ConsumerProfile, year: int, s, world: MerchantWorld, cfg: EngineConfig | None = None,
                retired: bool = False, occupied: set | None = None, counters: Counters | None = None) -> list:
    """Trips starting in ``year``: counts are Poisson, trips never overlap.

    ``occupied`` (a set of day numbers) carries booked days across calls so
    trips spilling over a year boundary are respected.  A trip that overlaps
    an earlier one is re-rolled up to ``max_trip_attempts`` times, then dropped.
    Retired consumers take no business trips.
    """
    cfg = cfg or EngineConfig()
    g = s.generator if hasattr(s, "generator") else s
    t = profile.travel
    sampler = _sampler(world)
    occupied = set() if occupied is None else occupied
    y0 = dt.date(year, 1, 1)
    n_year = (dt.date(year + 1, 1, 1) - y0).days
    plans = [
        (VACATION, t.vacations, t.p_foreign_vacation),
        (GETAWAY, t.weekend_getaways, t.p_foreign_weekend_getaway),
        (BUSINESS, 0.0 if retired else t.business_trips, t.p_foreign_business_trip),
    ]
    trips = []
    for kind, mean, p_foreign in plans:
        n = int(g.poisson(max(mean, 0.0)))
        for _ in range(n):
            foreign = bool(g.random() < p_foreign)
            place = sampler.draw(g, foreign, profile.home.place_index)
            for _attempt in range(cfg.max_trip_attempts):
                if kind == GETAWAY:
                    first_sat = (5 - y0.weekday()) % 7
                    n_sat = (n_year - 1 - first_sat) // 7 + 1
                    start = y0 + dt.timedelta(days=first_sat + 7 * int(g.integers(n_sat)))
                    dur = 3 if g.random() < cfg.getaway_extra_day_prob else 2
                else:
                    dist = t.vacation_duration if kind == VACATION else t.business_trip_duration
                    dur = int(round(sample_truncated_gaussian(g, dist.indiv_mean, dist.indiv_std, 1.0, 60.0)))
                    dur = max(dur, 1)
                    start = y0 + dt.timedelta(days=int(g.integers(n_year)))
                    if kind == BUSINESS:
                        while start.weekday() >= 5:
                            start += dt.timedelta(days=1)
                d0 = day_number(start)
                span = range(d0, d0 + dur)
                if not any(d in occupied for d in span):
                    occupied.update(span)
                    trips.append(Trip(kind, start, dur, place, foreign))
                    break
            else:
                if counters is not None:
                    counters.trips_dropped_overlap += 1
    trips.sort(key=lambda tr: tr.start)
    return trips


# --- consumer context ---------------------------------------------------------------------

@dataclass
class RateAdjustment:
    item_multiplier: np.ndarray
    weekday_flattening: float
    business_trips: bool


@dataclass
class ConsumerContext:
    """Everything the engine needs for one consumer, precomputed once."""

    profile: ConsumerProfile
    prefs: Preferences
    cards: list
    items: np.ndarray          # gs ids the consumer buys
    rate: np.ndarray           # personal relative annual rate per item
    week_mult: np.ndarray      # [retired, item, weekend]
    ctx_mult: np.ndarray       # [retired, item, context]
    ret_mult: np.ndarray       # [retired, item]
    combo_cdf: np.ndarray      # [retired*6 + weekend*3 + ctx, item] cumulative item shares
    combo_rate: np.ndarray     # expected daily count per combo before the year factor
    tod_cdf: np.ndarray        # [item, segment]
    spend_mu: np.ndarray
    spend_sigma: np.ndarray
    online_aff: np.ndarray
    fav_u: np.ndarray
    card_acq: np.ndarray
    card_exp: np.ndarray
    card_id: np.ndarray
    card_chip: np.ndarray
    card_w: np.ndarray
    retire_day: int
    extreme_day: int
    entry_day: int


def _expected_mode_shares(profile: ConsumerProfile, cfg: EngineConfig, retired: bool) -> np.ndarray:
    t = profile.travel
    getaway = t.weekend_getaways * (2 + cfg.getaway_extra_day_prob)
    vac = t.vacations * max(1.0, t.vacation_duration.indiv_mean)
    biz = 0.0 if retired else t.business_trips * max(1.0, t.business_trip_duration.indiv_mean)
    away = np.array([getaway + vac, biz]) / 365.25
    total = away.sum()
    if total > cfg.max_travel_day_share:
        away *= cfg.max_travel_day_share / total
    return np.array([1.0 - away.sum(), away[0], away[1]])


def apply_retirement(catalog: GsCatalog, items: np.ndarray, rate: np.ndarray,
                     cfg: EngineConfig | None = None) -> RateAdjustment:
    """Post-retirement per-item multipliers, rescaled so the total rate scales by the configured factor."""
    cfg = cfg or EngineConfig()
    raw = np.array([catalog.items[i].retirement_multiplier for i in items], dtype=float)
    denom = float((rate * raw).sum())
    scale = cfg.retirement_rate_multiplier * float(rate.sum()) / denom if denom > 0 else 0.0
    return RateAdjustment(raw * scale, cfg.retirement_weekday_flattening, business_trips=False)


def build_context(profile: ConsumerProfile, prefs: Preferences, cards: Sequence[CardAccount], catalog: GsCatalog,
                  cfg: EngineConfig | None = None, extreme_age_threshold: float = 85.0) -> ConsumerContext:
    cfg = cfg or EngineConfig()
    arr = catalog.arrays()
    items = prefs.active_items
    rate = prefs.annual_rate[items].astype(float)
    week = arr["week"][items]
    ctxw = arr["ctx"][items]
    adj = apply_retirement(catalog, items, rate, cfg)
    week_mult = np.zeros((2, len(items), 2))
    ctx_mult = np.zeros((2, len(items), 3))
    ret_mult = np.ones((2, len(items)))
    ret_mult[1] = adj.item_multiplier
    for r in (0, 1):
        w = week.copy()
        if r:
            avg = w @ np.array([5 / 7, 2 / 7])
            w = (1 - adj.weekday_flattening) * w + adj.weekday_flattening * avg[:, None]
        norm = w @ np.array([5 / 7, 2 / 7])
        week_mult[r] = np.divide(w, norm[:, None], out=np.zeros_like(w), where=norm[:, None] > 0)
        pi = _expected_mode_shares(profile, cfg, bool(r))
        cn = ctxw @ pi
        ctx_mult[r] = np.divide(ctxw, cn[:, None], out=np.zeros_like(ctxw), where=cn[:, None] > 0)
    # Items with no reachable context never occur; keep the total on the rest.
    eff = rate * (ctx_mult[0].sum(axis=1) > 0)
    total = eff.sum()
    rel = eff / total if total > 0 else eff
    combos = np.zeros((12, len(items)))
    for r in (0, 1):
        for we in (0, 1):
            for c in (0, 1, 2):
                combos[r * 6 + we * 3 + c] = rel * week_mult[r, :, we] * ctx_mult[r, :, c] * ret_mult[r]
    combo_rate = combos.sum(axis=1) / 365.25
    cdf = np.cumsum(combos, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cdf = np.where(cdf[:, -1:] > 0, cdf / cdf[:, -1:], 0.0) if len(items) else cdf
    tod = arr["tod"][items]
    tod_cdf = np.cumsum(tod, axis=1) / tod.sum(axis=1, keepdims=True)
    m = prefs.spend_mean[items]
    sd = prefs.spend_std[items]
    sigma2 = np.log1p((sd / m) ** 2)
    cards = list(cards)
    return ConsumerContext(
        profile=profile, prefs=prefs, cards=cards, items=items, rate=rel,
        week_mult=week_mult, ctx_mult=ctx_mult, ret_mult=ret_mult,
        combo_cdf=cdf, combo_rate=combo_rate, tod_cdf=tod_cdf,
        spend_mu=np.log(m) - 0.5 * sigma2, spend_sigma=np.sqrt(sigma2),
        online_aff=arr["online_affinity"][items], fav_u=prefs.favorite_u[items],
        card_acq=np.array([day_number(c.acquired_date) for c in cards], dtype=np.int64),
        card_exp=np.array([day_number(c.expiry_date) for c in cards], dtype=np.int64),
        card_id=np.array([c.card_id for c in cards], dtype=np.int64),
        card_chip=np.array([c.has_chip for c in cards], dtype=bool),
        card_w=np.array([c.preference_weight for c in cards], dtype=float),
        retire_day=day_number(add_years(profile.birth_date, profile.retirement_age)),
        extreme_day=day_number(add_years(profile.birth_date, extreme_age_threshold)),
        entry_day=day_number(profile.entry_date),
    )


def year_rate(ctx: ConsumerContext, year: int, seed: int) -> float:
    """The consumer's total purchase rate for one calendar year (personal distribution draw)."""
    d = ctx.profile.transactions_per_year
    g = derive_stream(seed, ("consumer", ctx.profile.consumer_id, "year-rate", int(year))).generator
    return float(sample_truncated_gaussian(g, d.indiv_mean, d.indiv_std, 0.0, math.inf))


# --- merchant / price / instrument ----------------------------------------------------------

class CandidateCache:
    """Per-worker cache of nearby candidate locations keyed by (place, gs_id)."""

    def __init__(self, world: MerchantWorld, catalog: GsCatalog, cfg: EngineConfig):
        self.world, self.catalog, self.cfg = world, catalog, cfg
        self._near = {}
        self._online = {}
        self._place_xy = (world.places.lat, world.places.lon)

    def near(self, place: int, gs: int):
        key = (place, gs)
        hit = self._near.get(key)
        if hit is None:
            if len(self._near) > 200_000:
                self._near.clear()
            lat, lon = self._place_xy[0][place], self._place_xy[1][place]
            ids, _, score = nearby_locations(self.world, (lat, lon), self.catalog.items[gs].mcc_set,
                                             self.cfg.k_candidates, self.cfg.max_radius_km,
                                             self.cfg.distance_decay_km)
            hit = self._near[key] = (ids, score)
        return hit

    def online(self, gs: int) -> np.ndarray:
        hit = self._online.get(gs)
        if hit is None:
            hit = self._online[gs] = self.world.online_merchants(self.catalog.items[gs].mcc_set)
        return hit


def _weighted_pick(g, n_events: int, weights: np.ndarray) -> np.ndarray:
    cw = np.cumsum(weights)
    return np.minimum(np.searchsorted(cw, g.random(n_events) * cw[-1], side="right"), len(weights) - 1)


def choose_merchant(candidates, scores, favorite_u: float, favorite_multiplier: float, g, n: int = 1):
    """Pick among ranked candidates with distance-decay scores and a sticky favorite."""
    w = np.asarray(scores, dtype=float).copy()
    fav = min(int(favorite_u * len(w)), len(w) - 1)
    w[fav] *= favorite_multiplier
    return np.asarray(candidates)[_weighted_pick(g, n, w)]


def price_transaction(spend_mean: float, spend_std: float, g, n=None):
    """Lognormal amount with the given personal mean/std, in integer cents (>= 1)."""
    if spend_std == 0:
        cents = int(round(spend_mean * 100))
        return max(cents, 1) if n is None else np.full(n, max(cents, 1), dtype=np.int64)
    mu, sigma = lognormal_params(spend_mean, spend_std)
    x = g.lognormal(mu, sigma, 1 if n is None else n)
    c = np.maximum(np.rint(x * 100), 1).astype(np.int64)
    return int(c[0]) if n is None else c


def select_instrument(ctx: ConsumerContext, day: np.ndarray, amount_cents: np.ndarray, channel_online: np.ndarray,
                      cash_prob: np.ndarray, cash_threshold_cents: int, g):
    """Card index into ``ctx.cards`` per event, or -1 for cash, -2 when nothing is usable."""
    n = len(day)
    u_cash = g.random(n)
    u_card = g.random(n)
    cash_ok = (~channel_online) & (amount_cents <= cash_threshold_cents)
    use_cash = cash_ok & (u_cash < cash_prob)
    out = np.full(n, -2, dtype=np.int64)
    if len(ctx.cards):
        valid = (day[:, None] >= ctx.card_acq[None, :]) & (day[:, None] <= ctx.card_exp[None, :])
        w = valid * ctx.card_w[None, :]
        cw = np.cumsum(w, axis=1)
        tot = cw[:, -1]
        pick = (cw <= (u_card * tot)[:, None]).sum(axis=1)
        has = tot > 0
        out[has] = np.minimum(pick[has], len(ctx.cards) - 1)
    out[use_cash] = -1
    out[(out == -2) & cash_ok] = -1
    return out


# --- event generation -------------------------------------------------------------------------

def _realize(ctx: ConsumerContext, days: np.ndarray, mode: np.ndarray, place: np.ndarray, retired: np.ndarray,
             level: np.ndarray, world: MerchantWorld, drift: DriftSchedule, cfg: EngineConfig,
             cache: CandidateCache, g, counters: Counters) -> np.ndarray:
    """Turn per-day state arrays into purchase events for one consumer.

    ``level`` is the day's multiplier on the consumer's base daily rate
    (year rate / reference rate, times any extreme-age factor).
    """
    n_items = len(ctx.items)
    if n_items == 0 or len(days) == 0:
        return np.zeros(0, dtype=EVENT_DTYPE)
    weekend = (day_of_week(days) >= 5).astype(np.int64)
    combo = retired.astype(np.int64) * 6 + weekend * 3 + MODE_CONTEXT[mode]
    lam = ctx.combo_rate[combo] * level
    counts = g.poisson(lam)
    n = int(counts.sum())
    if n == 0:
        return np.zeros(0, dtype=EVENT_DTYPE)
    ev_idx = np.repeat(np.arange(len(days)), counts)
    ev_day = days[ev_idx]
    ev_combo = combo[ev_idx]
    # Item per event: searchsorted into the stacked per-combo CDFs (offset by combo index).
    flat = (ctx.combo_cdf + np.arange(12)[:, None]).ravel()
    k = np.searchsorted(flat, ev_combo + g.random(n), side="right") - ev_combo * n_items
    k = np.clip(k, 0, n_items - 1)
    gs = ctx.items[k]
    seg_flat = (ctx.tod_cdf + np.arange(n_items)[:, None]).ravel()
    seg = np.clip(np.searchsorted(seg_flat, k + g.random(n), side="right") - k * 3, 0, 2)
    minute = segment_minute(seg, np.floor(g.random(n) * SEGMENT_LENGTH[seg]).astype(np.int64))
    amount = np.maximum(np.rint(np.exp(ctx.spend_mu[k] + ctx.spend_sigma[k] * g.standard_normal(n)) * 100),
                        1).astype(np.int64)
    yf = year_fraction(ev_day)
    online_share = drift.online_share(yf)
    online = g.random(n) < online_share * ctx.online_aff[k]
    ev_place = place[ev_idx]

    merchant = np.full(n, -1, dtype=np.int64)
    location = np.full(n, -1, dtype=np.int64)
    u_pick = g.random(n)
    fav_mult = cfg.favorite_multiplier
    # In-person: group by (place, item) so each candidate list is fetched once.
    inp = np.flatnonzero(~online)
    if len(inp):
        key = ev_place[inp].astype(np.int64) * n_items + k[inp]
        order = np.argsort(key, kind="stable")
        skey = key[order]
        bounds = np.flatnonzero(np.diff(skey)) + 1
        for grp in np.split(inp[order], bounds):
            kk = int(k[grp[0]])
            ids, score = cache.near(int(ev_place[grp[0]]), int(ctx.items[kk]))
            if len(ids) == 0:
                continue
            w = score.copy()
            w[min(int(ctx.fav_u[kk] * len(w)), len(w) - 1)] *= fav_mult
            cw = np.cumsum(w)
            j = np.minimum(np.searchsorted(cw, u_pick[grp] * cw[-1], side="right"), len(w) - 1)
            location[grp] = ids[j]
        merchant[inp] = np.where(location[inp] >= 0, world.loc_merchant[np.maximum(location[inp], 0)], -1)
        # No in-person candidate: fall back to online when the era allows it.
        miss = inp[location[inp] < 0]
        fb = miss[online_share[miss] > 0]
        online[fb] = True
        counters.online_fallback += len(fb)
    onl = np.flatnonzero(online & (merchant < 0))
    if len(onl):
        order = np.argsort(k[onl], kind="stable")
        sk = k[onl][order]
        bounds = np.flatnonzero(np.diff(sk)) + 1
        for grp in np.split(onl[order], bounds):
            kk = int(k[grp[0]])
            cands = cache.online(int(ctx.items[kk]))
            if len(cands) == 0:
                continue
            nc = len(cands)
            fav = min(int(ctx.fav_u[kk] * nc), nc - 1)
            p_fav = fav_mult / (fav_mult + nc - 1)
            u = u_pick[grp]
            other = np.minimum(((u - p_fav) / (1 - p_fav) * (nc - 1)).astype(np.int64), nc - 2) if nc > 1 else 0
            j = np.where(u < p_fav, fav, np.where(other >= fav, other + 1, other))
            merchant[grp] = cands[j]
        # Online chosen but no online merchant sells the item: try in person.
        miss = onl[merchant[onl] < 0]
        for i in miss:
            ids, score = cache.near(int(ev_place[i]), int(gs[i]))
            if len(ids):
                location[i] = choose_merchant(ids, score, ctx.fav_u[k[i]], fav_mult, g)[0]
                merchant[i] = world.loc_merchant[location[i]]
                online[i] = False
                counters.in_person_fallback += 1
    has_merchant = merchant >= 0
    counters.dropped_no_merchant += int((~has_merchant).sum())

    cash_prob = cfg.cash_share(yf)
    inst = select_instrument(ctx, ev_day, amount, online, cash_prob, int(round(cfg.cash_threshold * 100)), g)
    has_inst = inst > -2
    counters.dropped_no_instrument += int((has_merchant & ~has_inst).sum())
    keep = has_merchant & has_inst

    out = np.zeros(int(keep.sum()), dtype=EVENT_DTYPE)
    inst_k = inst[keep]
    out["ts"] = ev_day[keep] * MINUTES_PER_DAY + minute[keep]
    out["consumer"] = ctx.profile.consumer_id
    out["card"] = np.where(inst_k >= 0, ctx.card_id[np.maximum(inst_k, 0)] if len(ctx.cards) else -1, -1)
    out["amount"] = amount[keep]
    out["gs"] = gs[keep]
    out["merchant"] = merchant[keep]
    out["location"] = np.where(online[keep], -1, location[keep])
    chip = ctx.card_chip[np.maximum(inst_k, 0)] if len(ctx.cards) else np.zeros(len(inst_k), bool)
    out["channel"] = np.where(online[keep], ONLINE, np.where(inst_k < 0, CASH, np.where(chip, CHIP, SWIPE)))
    out["fraudster"] = -1
    out["place"] = ev_place[keep]
    out["segment"] = seg[keep]
    return out


def day_states(ctx: ConsumerContext, start_day: int, end_day: int, world: MerchantWorld, cfg: EngineConfig,
               seed: int, counters: Counters):
    """Per-day (mode, place, retired) arrays over ``[start_day, end_day]`` plus the trips taken."""
    days = np.arange(start_day, end_day + 1, dtype=np.int64)
    mode = np.zeros(len(days), dtype=np.int64)
    home = ctx.profile.home.place_index
    place = np.full(len(days), home, dtype=np.int64)
    retired = days >= ctx.retire_day
    if len(days) == 0:
        return days, mode, place, retired, []
    occupied: set = set()
    trips = []
    y_first = from_day_number(start_day).year
    y_last = from_day_number(end_day).year
    for y in range(y_first, y_last + 1):
        s = derive_stream(seed, ("consumer", ctx.profile.consumer_id, "travel", y))
        is_ret = day_number(dt.date(y, 1, 1)) >= ctx.retire_day
        trips.extend(plan_travel(ctx.profile, y, s, world, cfg, is_ret, occupied, counters))
    for tr in trips:
        a = day_number(tr.start) - start_day
        b = a + tr.duration
        a, b = max(a, 0), min(b, len(days))
        if a < b:
            mode[a:b] = tr.kind
            place[a:b] = tr.place
    return days, mode, place, retired, trips


def simulate_consumer(ctx: ConsumerContext, world: MerchantWorld, drift: DriftSchedule, cfg: EngineConfig,
                      horizon: tuple[dt.date, dt.date], seed: int, cache: CandidateCache | None = None,
                      counters: Counters | None = None, return_trips: bool = False):
    """All genuine purchase events of one consumer over the horizon (unsorted)."""
    counters = counters if counters is not None else Counters()
    cache = cache or CandidateCache(world, load_catalog(), cfg)
    start = max(day_number(horizon[0]), ctx.entry_day)
    end = day_number(horizon[1])
    days, mode, place, retired, trips = day_states(ctx, start, end, world, cfg, seed, counters)
    if len(days) == 0:
        empty = np.zeros(0, dtype=EVENT_DTYPE)
        return (empty, trips) if return_trips else empty
    years = days.astype("datetime64[D]").astype("datetime64[Y]").astype(int) + 1970
    uy, inv = np.unique(years, return_inverse=True)
    level = np.array([year_rate(ctx, int(y), seed) for y in uy])[inv]
    level = level * np.where(days >= ctx.extreme_day, cfg.extreme_age_multiplier, 1.0)
    g = derive_stream(seed, ("consumer", ctx.profile.consumer_id, "purchases")).generator
    ev = _realize(ctx, days, mode, place, retired, level, world, drift, cfg, cache, g, counters)
    return (ev, trips) if return_trips else ev


def step_day(ctx: ConsumerContext, state: ConsumerState, world: MerchantWorld, clock: SimClock,
             drift: DriftSchedule, cfg: EngineConfig, seed: int, cache: CandidateCache,
             counters: Counters | None = None):
    """Advance one consumer by one day from an explicit state; returns (next state, events)."""
    counters = counters if counters is not None else Counters()
    d = day_number(clock.current)
    if d < ctx.entry_day:
        return state, np.zeros(0, dtype=EVENT_DTYPE)
    place = ctx.profile.home.place_index if state.mode == HOME else state.place
    level = year_rate(ctx, clock.current.year, seed)
    if d >= ctx.extreme_day:
        level *= cfg.extreme_age_multiplier
    g = derive_stream(seed, ("consumer", ctx.profile.consumer_id, "day", d)).generator
    retired = state.is_retired or d >= ctx.retire_day
    ev = _realize(ctx, np.array([d]), np.array([state.mode]), np.array([place]), np.array([retired]),
                  np.array([level]), world, drift, cfg, cache, g, counters)
    nxt = ConsumerState(state.mode, state.place, state.trip_end_date, retired)
    if state.mode != HOME and state.trip_end_date is not None and clock.current >= state.trip_end_date:
        nxt = ConsumerState(HOME, -1, None, retired)
    return nxt, ev


def resolve_collisions(events: np.ndarray, g, max_rounds: int = 50) -> np.ndarray:
    """Sort one consumer's events by time, re-drawing the minute of any clash.

    A clashing event keeps its day and segment and gets a new minute in that
    segment, so timestamps end up strictly increasing.
    """
    if len(events) < 2:
        return events
    ev = events[np.argsort(events["ts"], kind="stable")]
    for _ in range(max_rounds):
        dup = np.flatnonzero(ev["ts"][1:] == ev["ts"][:-1]) + 1
        if len(dup) == 0:
            return ev
        day = ev["ts"][dup] // MINUTES_PER_DAY
        seg = minute_segment(ev["ts"][dup] % MINUTES_PER_DAY)
        off = np.floor(g.random(len(dup)) * SEGMENT_LENGTH[seg]).astype(np.int64)
        ev["ts"][dup] = day * MINUTES_PER_DAY + segment_minute(seg, off)
        ev = ev[np.argsort(ev["ts"], kind="stable")]
    # Pathological density: push remaining clashes forward minute by minute.
    ts = ev["ts"].copy()
    for i in range(1, len(ts)):
        if ts[i] <= ts[i - 1]:
            ts[i] = ts[i - 1] + 1
    ev["ts"] = ts
    return ev
