"""Fraud injection: fraudster agents working compromised cards, plus random per-consumer fraud.

Nothing here reads detection output; generation is one-directional.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, replace

import numpy as np

from .engine import (
    EVENT_DTYPE,
    MINUTES_PER_DAY,
    ONLINE,
    SEGMENT_LENGTH,
    SWIPE,
    CandidateCache,
    DriftSchedule,
    EngineConfig,
    day_number,
    day_of_week,
    from_day_number,
    minute_segment,
    segment_minute,
    year_fraction,
)
from .geo import haversine_km
from .population import PopulationConfig, build_population
from .rand import derive_stream, lognormal_params
from .world import GsCatalog, MerchantWorld, Preferences, instantiate_preferences, nearby_locations

MECH_FRAUDSTER = 1
MECH_RANDOM = 2


@dataclass(frozen=True)
class FraudConfig:
    target_fraud_rate: float | None = 0.001
    fraudster_share: float = 0.5
    n_fraudsters: int | None = None
    acquisition_rate_per_month: float = 2.0
    random_fraud_rate: float = 0.2          # per consumer-year; used when no target rate is set
    active_min_days: float = 90.0
    active_max_days: float = 5 * 365.25
    burst_mean: float = 5.0                 # mean transactions per compromised card
    intensity_mean: float = 0.5             # mean fraud transactions per active day
    locality_km: float = 300.0
    amount_mean: float = 180.0
    amount_std: float = 300.0
    fraudster_spend_multiplier: float = 1.5

    def problems(self) -> list:
        out = []
        if self.target_fraud_rate is not None and not 0 <= self.target_fraud_rate < 1:
            out.append(("fraud.target_fraud_rate", "must be in [0, 1)"))
        if not 0 <= self.fraudster_share <= 1:
            out.append(("fraud.fraudster_share", "must be in [0, 1]"))
        if self.n_fraudsters is not None and self.n_fraudsters < 0:
            out.append(("fraud.n_fraudsters", "must be >= 0"))
        if self.acquisition_rate_per_month < 0 or self.random_fraud_rate < 0:
            out.append(("fraud", "rates must be >= 0"))
        if not 0 < self.active_min_days <= self.active_max_days:
            out.append(("fraud.active_min_days", "need 0 < min <= max"))
        if self.burst_mean < 1:
            out.append(("fraud.burst_mean", "must be >= 1"))
        if self.intensity_mean <= 0:
            out.append(("fraud.intensity_mean", "must be > 0"))
        return out


@dataclass(frozen=True)
class Fraudster:
    fraudster_id: int
    place: int
    latitude: float
    longitude: float
    prefs: Preferences
    segment_weights: np.ndarray
    weekday_weights: np.ndarray
    active_start: dt.date
    active_end: dt.date
    intensity: float
    acquisition_rate: float

    @property
    def label(self) -> str:
        return fraudster_label(self.fraudster_id)

    @property
    def active_months(self) -> float:
        return ((self.active_end - self.active_start).days + 1) / (365.25 / 12)


@dataclass(frozen=True)
class CardCompromise:
    fraudster_id: int
    card_id: int
    consumer_id: int
    compromise_date: dt.date
    seq: int = 0
    exhausted: bool = False


def fraudster_label(fraudster_id: int) -> str:
    return f"F{fraudster_id:05d}"


def generate_fraudsters(cfg: FraudConfig, count: int, seed: int, horizon: tuple[dt.date, dt.date],
                        catalog: GsCatalog, pop_cfg: PopulationConfig | None = None) -> list[Fraudster]:
    """Fraudsters built with the consumer machinery plus schedules and active intervals.

    Durations are log-uniform on ``[active_min_days, active_max_days]`` (capped
    at the horizon length) and each interval lies wholly inside the horizon.
    """
    if count <= 0:
        return []
    base = pop_cfg or PopulationConfig()
    fcfg = PopulationConfig(size=count, attributes=base.attributes, core_attributes=base.core_attributes,
                            correlations=base.correlations, geo_table=base.geo_table)
    sub_seed = int(derive_stream(seed, ("fraudsters",)).generator.integers(2**63))
    profiles = build_population(fcfg, sub_seed, horizon).profiles
    span = (horizon[1] - horizon[0]).days + 1
    out = []
    for i, p in enumerate(profiles):
        g = derive_stream(seed, ("fraudster", i, "traits")).generator
        lo = math.log(min(cfg.active_min_days, span))
        hi = math.log(min(cfg.active_max_days, span))
        dur = int(round(math.exp(g.uniform(lo, hi)))) if hi > lo else int(round(math.exp(lo)))
        dur = max(1, min(dur, span))
        start = horizon[0] + dt.timedelta(days=int(g.integers(0, span - dur + 1)))
        prefs = instantiate_preferences(p, catalog, derive_stream(seed, ("fraudster", i, "prefs")))
        seg_w = g.dirichlet(np.full(3, 0.8))
        wk_w = g.lognormal(0.0, 0.6, 7)
        out.append(Fraudster(
            fraudster_id=i,
            place=p.home.place_index,
            latitude=p.home.latitude,
            longitude=p.home.longitude,
            prefs=prefs,
            segment_weights=seg_w,
            weekday_weights=wk_w,
            active_start=start,
            active_end=start + dt.timedelta(days=dur - 1),
            intensity=float(g.lognormal(*lognormal_params(cfg.intensity_mean, 0.5 * cfg.intensity_mean))),
            acquisition_rate=cfg.acquisition_rate_per_month,
        ))
    return out


@dataclass
class CardIndex:
    """Population-wide card arrays used to pick victims."""

    card_id: np.ndarray
    consumer_id: np.ndarray
    acq_day: np.ndarray
    exp_day: np.ndarray
    lat: np.ndarray
    lon: np.ndarray

    @classmethod
    def build(cls, profiles, cards_by_consumer) -> "CardIndex":
        rows = [(c.card_id, p.consumer_id, day_number(c.acquired_date), day_number(c.expiry_date),
                 p.home.latitude, p.home.longitude)
                for p in profiles for c in cards_by_consumer[p.consumer_id]]
        if not rows:
            z = np.zeros(0)
            return cls(z.astype(np.int64), z.astype(np.int64), z.astype(np.int64), z.astype(np.int64), z, z)
        a = list(zip(*rows))
        return cls(np.array(a[0], np.int64), np.array(a[1], np.int64), np.array(a[2], np.int64),
                   np.array(a[3], np.int64), np.array(a[4], float), np.array(a[5], float))


def compromise_cards(fraudster: Fraudster, cards: CardIndex, drift: DriftSchedule, cfg: FraudConfig, s,
                     horizon: tuple[dt.date, dt.date] | None = None) -> list[CardCompromise]:
    """Cards stolen by one fraudster: a Poisson number over the active interval.

    Before online commerce exists, victims are weighted by
    ``exp(-distance / locality_km)`` from the fraudster; afterwards any card in
    the population is equally exposed.
    """
    g = s.generator if hasattr(s, "generator") else s
    n = int(g.poisson(max(fraudster.acquisition_rate, 0.0) * fraudster.active_months))
    if n == 0 or len(cards.card_id) == 0:
        return []
    a, b = day_number(fraudster.active_start), day_number(fraudster.active_end)
    days = np.sort(g.integers(a, b + 1, n))
    u = g.random(n)
    dist = haversine_km(fraudster.latitude, fraudster.longitude, cards.lat, cards.lon)
    local_w = np.exp(-dist / cfg.locality_km)
    online_era = year_fraction(days) >= drift.online_start_year
    out = []
    n_cards = len(cards.card_id)
    for j, d in enumerate(days):
        if online_era[j]:
            # Uniform over valid cards: rejection sampling avoids a full scan.
            k = -1
            for r in g.integers(0, n_cards, 256):
                if cards.acq_day[r] <= d <= cards.exp_day[r]:
                    k = int(r)
                    break
            if k >= 0:
                out.append(CardCompromise(fraudster.fraudster_id, int(cards.card_id[k]), int(cards.consumer_id[k]),
                                          from_day_number(int(d)), seq=j))
                continue
        valid = (cards.acq_day <= d) & (cards.exp_day >= d)
        w = valid.astype(float) if online_era[j] else valid * local_w
        tot = w.sum()
        if tot <= 0:
            continue
        cw = np.cumsum(w)
        k = int(min(np.searchsorted(cw, u[j] * tot, side="right"), len(cw) - 1))
        out.append(CardCompromise(fraudster.fraudster_id, int(cards.card_id[k]), int(cards.consumer_id[k]),
                                  from_day_number(int(d)), seq=j))
    return out


def _fraud_items(catalog: GsCatalog, cache: CandidateCache, weights: np.ndarray, online: bool) -> np.ndarray:
    w = weights.copy()
    if online:
        w *= np.array([len(cache.online(i)) > 0 for i in range(len(catalog.items))])
    return w


def _locations_for(world: MerchantWorld, mcc_set) -> np.ndarray:
    parts = [world.mcc_location_ids(c) for c in sorted(mcc_set)]
    parts = [p for p in parts if len(p)]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def fraudster_transactions(fraudster: Fraudster, compromise: CardCompromise, card_exp_day: int,
                           world: MerchantWorld, catalog: GsCatalog, drift: DriftSchedule, cfg: FraudConfig,
                           engine_cfg: EngineConfig, cache: CandidateCache, s,
                           horizon_end: dt.date) -> np.ndarray:
    """A burst of fraud on one compromised card, in the fraudster's own habits.

    Timing follows the fraudster's weekday and time-of-day weights; items and
    amounts follow the fraudster's preferences; in-person fraud happens near
    the fraudster's base, regardless of where the victim lives.
    """
    g = s.generator if hasattr(s, "generator") else s
    burst = 1 + int(g.poisson(cfg.burst_mean - 1.0))
    end_day = min(card_exp_day, day_number(fraudster.active_end), day_number(horizon_end))
    d0 = day_number(compromise.compromise_date)
    wk = fraudster.weekday_weights
    wmax = wk.max()
    rate = fraudster.intensity * wmax / wk.mean()
    # Thinned Poisson process on days: candidate gaps at the peak weekday rate.
    days = []
    t = float(d0)
    while len(days) < burst:
        t += g.exponential(1.0 / rate)
        d = int(math.floor(t))
        if d > end_day:
            break
        if g.random() * wmax < wk[int(day_of_week(d))]:
            days.append(d)
    n = len(days)
    if n == 0:
        return np.zeros(0, dtype=EVENT_DTYPE)
    days = np.array(days, dtype=np.int64)
    segc = np.cumsum(fraudster.segment_weights)
    seg = np.minimum(np.searchsorted(segc, g.random(n) * segc[-1], side="right"), 2)
    minute = segment_minute(seg, np.floor(g.random(n) * SEGMENT_LENGTH[seg]).astype(np.int64))
    online = g.random(n) < drift.online_fraud_share(year_fraction(days))
    prefs = fraudster.prefs
    base_w = prefs.annual_rate * prefs.participates * catalog.arrays()["fraud_weight"]
    if base_w.sum() <= 0:
        base_w = catalog.arrays()["fraud_weight"].copy()
    out = np.zeros(n, dtype=EVENT_DTYPE)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        w = _fraud_items(catalog, cache, base_w, bool(online[i]))
        if w.sum() <= 0:
            keep[i] = False
            continue
        cw = np.cumsum(w)
        gs = int(min(np.searchsorted(cw, g.random() * cw[-1], side="right"), len(cw) - 1))
        mean = prefs.spend_mean[gs] * cfg.fraudster_spend_multiplier
        mu, sig = lognormal_params(mean, max(prefs.spend_std[gs], 0.3 * mean) * cfg.fraudster_spend_multiplier)
        out["amount"][i] = max(1, int(round(math.exp(mu + sig * g.standard_normal()) * 100)))
        out["gs"][i] = gs
        if online[i]:
            cands = cache.online(gs)
            out["merchant"][i] = cands[int(g.integers(len(cands)))]
            out["location"][i] = -1
            out["channel"][i] = ONLINE
        else:
            ids, score = cache.near(fraudster.place, gs)
            if len(ids) == 0:
                ids, _, score = _nearest_any(world, fraudster, catalog.items[gs].mcc_set, engine_cfg)
            if len(ids) == 0:
                keep[i] = False
                continue
            cw = np.cumsum(score)
            loc = int(ids[min(np.searchsorted(cw, g.random() * cw[-1], side="right"), len(ids) - 1)])
            out["location"][i] = loc
            out["merchant"][i] = world.loc_merchant[loc]
            out["channel"][i] = SWIPE
    out["ts"] = days * MINUTES_PER_DAY + minute
    out["consumer"] = compromise.consumer_id
    out["card"] = compromise.card_id
    out["fraud"] = MECH_FRAUDSTER
    out["fraudster"] = fraudster.fraudster_id
    out["place"] = -1
    out["segment"] = seg
    return out[keep]


def _nearest_any(world, fraudster, mcc_set, engine_cfg):
    return nearby_locations(world, (fraudster.latitude, fraudster.longitude), mcc_set,
                            engine_cfg.k_candidates, None, engine_cfg.distance_decay_km)


def random_fraud(consumer_id: int, cards, span: tuple[int, int], rate: float, drift: DriftSchedule,
                 world: MerchantWorld, catalog: GsCatalog, cfg: FraudConfig, cache: CandidateCache, s) -> np.ndarray:
    """Homogeneous Poisson fraud over the day span ``[a, b]`` with ``rate`` events per year.

    Items follow the catalog's fraud weights and amounts a single global
    lognormal; in-person locations are drawn uniformly from every location
    with a matching MCC, so there is no locality or schedule.
    """
    if rate < 0:
        raise ValueError("rate must be >= 0")
    g = s.generator if hasattr(s, "generator") else s
    a, b = span
    if b < a or rate == 0 or len(cards) == 0:
        return np.zeros(0, dtype=EVENT_DTYPE)
    total_min = (b - a + 1) * MINUTES_PER_DAY
    n = int(g.poisson(rate * (b - a + 1) / 365.25))
    if n == 0:
        return np.zeros(0, dtype=EVENT_DTYPE)
    ts = a * MINUTES_PER_DAY + np.floor(np.sort(g.random(n)) * total_min).astype(np.int64)
    day = ts // MINUTES_PER_DAY
    acq = np.array([day_number(c.acquired_date) for c in cards])
    exp = np.array([day_number(c.expiry_date) for c in cards])
    ids = np.array([c.card_id for c in cards])
    valid = (day[:, None] >= acq[None, :]) & (day[:, None] <= exp[None, :])
    cnt = valid.sum(axis=1)
    pick_rank = np.floor(g.random(n) * np.maximum(cnt, 1)).astype(np.int64)
    csum = np.cumsum(valid, axis=1)
    card_k = (csum <= pick_rank[:, None]).sum(axis=1)
    online = g.random(n) < drift.online_fraud_share(year_fraction(day))
    mu, sig = lognormal_params(cfg.amount_mean, cfg.amount_std)
    amount = np.maximum(np.rint(g.lognormal(mu, sig, n) * 100), 1).astype(np.int64)
    fw = catalog.arrays()["fraud_weight"]
    u_item = g.random(n)
    u_m = g.random(n)
    out = np.zeros(n, dtype=EVENT_DTYPE)
    keep = cnt > 0
    for flag in (True, False):
        sel = np.flatnonzero(online == flag)
        if not len(sel):
            continue
        w = _fraud_items(catalog, cache, fw, flag)
        if w.sum() <= 0:
            keep[sel] = False
            continue
        cw = np.cumsum(w)
        gs = np.minimum(np.searchsorted(cw, u_item[sel] * cw[-1], side="right"), len(cw) - 1)
        out["gs"][sel] = gs
        for i, item in zip(sel, gs):
            if flag:
                cands = cache.online(int(item))
                out["merchant"][i] = cands[int(u_m[i] * len(cands))]
                out["location"][i] = -1
            else:
                locs = _cached_locations(cache, world, catalog, int(item))
                if len(locs) == 0:
                    keep[i] = False
                    continue
                loc = locs[int(u_m[i] * len(locs))]
                out["location"][i] = loc
                out["merchant"][i] = world.loc_merchant[loc]
    out["ts"] = ts
    out["consumer"] = consumer_id
    out["card"] = ids[np.minimum(card_k, len(ids) - 1)]
    out["amount"] = amount
    out["channel"] = np.where(online, ONLINE, SWIPE)
    out["fraud"] = MECH_RANDOM
    out["fraudster"] = -1
    out["place"] = -1
    out["segment"] = minute_segment(ts % MINUTES_PER_DAY)
    return out[keep]


def _cached_locations(cache: CandidateCache, world, catalog, item: int) -> np.ndarray:
    store = cache.__dict__.setdefault("_all_locations", {})
    hit = store.get(item)
    if hit is None:
        hit = store[item] = _locations_for(world, catalog.items[item].mcc_set)
    return hit


@dataclass
class FraudPlan:
    """Startup-time fraud decisions shared by every worker."""

    fraudsters: list
    compromises_by_consumer: dict
    random_rate: float
    expected_genuine: float
    target_fraud: float

    @property
    def n_compromises(self) -> int:
        return sum(len(v) for v in self.compromises_by_consumer.values())


def mean_log_uniform(lo: float, hi: float) -> float:
    return lo if hi <= lo else (hi - lo) / math.log(hi / lo)


def plan_fraud(cfg: FraudConfig, profiles, cards_by_consumer, expected_genuine: float, consumer_years: float,
               seed: int, horizon, catalog: GsCatalog, drift: DriftSchedule,
               pop_cfg: PopulationConfig | None = None) -> FraudPlan:
    """Fix fraudsters, their compromises and the random-fraud rate before simulation.

    With a ``target_fraud_rate`` the expected fraud count is split between the
    two mechanisms by ``fraudster_share``; the random rate is the second part
    divided by consumer-years, and fraudster acquisition rates are scaled so the
    drawn active intervals produce the first part in expectation.
    """
    if cfg.target_fraud_rate is not None:
        r = cfg.target_fraud_rate
        target = r / (1 - r) * expected_genuine
        m1 = cfg.fraudster_share * target
        m2 = target - m1
        random_rate = m2 / consumer_years if consumer_years > 0 else 0.0
        span = (horizon[1] - horizon[0]).days + 1
        mean_months = mean_log_uniform(min(cfg.active_min_days, span), min(cfg.active_max_days, span)) / 30.4375
        per_fraudster = cfg.acquisition_rate_per_month * mean_months * cfg.burst_mean
        n_fr = cfg.n_fraudsters if cfg.n_fraudsters is not None else (
            int(max(1, round(m1 / per_fraudster))) if m1 > 0 else 0)
    else:
        target = float("nan")
        m1 = None
        random_rate = cfg.random_fraud_rate
        n_fr = cfg.n_fraudsters if cfg.n_fraudsters is not None else 0
    fraudsters = generate_fraudsters(cfg, n_fr, seed, horizon, catalog, pop_cfg)
    if m1 is not None and fraudsters:
        # Expected burst realized before the fraudster retires (burst spans ~burst/intensity days).
        eff = 0.0
        for f in fraudsters:
            dur = (f.active_end - f.active_start).days + 1
            burst_days = cfg.burst_mean / f.intensity
            eff += f.active_months * max(0.0, 1.0 - burst_days / (2 * dur))
        acq = m1 / (cfg.burst_mean * eff) if eff > 0 else 0.0
        fraudsters = [_with_rate(f, acq) for f in fraudsters]
    index = CardIndex.build(profiles, cards_by_consumer)
    by_consumer: dict = {}
    for f in fraudsters:
        for c in compromise_cards(f, index, drift, cfg, derive_stream(seed, ("fraudster", f.fraudster_id, "steal")),
                                  horizon):
            by_consumer.setdefault(c.consumer_id, []).append(c)
    return FraudPlan(fraudsters, by_consumer, random_rate, expected_genuine, target)


def _with_rate(f: Fraudster, rate: float) -> Fraudster:
    return replace(f, acquisition_rate=rate)
