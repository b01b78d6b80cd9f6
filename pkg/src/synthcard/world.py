"""Merchant universe and the goods-and-services catalog.

Locations are stored as flat numpy arrays so full-scale worlds (millions of
locations) fit in memory.  Spatial lookups go through one k-d tree per MCC
built on unit-sphere coordinates; Euclidean chord length is monotone in
great-circle distance, so tree order equals geographic order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError
from .geo import EARTH_RADIUS_KM, PlaceTable, chord_to_km, haversine_km, load_us_places, load_world_cities, unit_xyz
from .rand import IndividualDistribution, derive_stream, lognormal_params

SEGMENTS = ("Morning", "Afternoon", "Night")
CONTEXTS = ("Home", "Vacation", "BusinessTravel")


@dataclass(frozen=True)
class MccCode:
    code: int
    description: str
    noun: str = ""
    chain: bool = False

    def __post_init__(self):
        if not 0 <= self.code <= 9999:
            raise ValueError(f"MCC {self.code} outside 0-9999")


@dataclass(frozen=True)
class Merchant:
    merchant_id: int
    name: str
    mcc: MccCode
    is_multinational: bool
    has_online: bool


@dataclass(frozen=True)
class MerchantLocation:
    location_id: int
    merchant_id: int
    latitude: float
    longitude: float
    city: str
    country: str
    country_code: str
    state: str = ""
    zipcode: str = ""


@dataclass(frozen=True)
class IncomeCurve:
    """Piecewise-linear function of log-income through fixed knots."""

    knots: tuple
    values: tuple

    def __post_init__(self):
        if len(self.knots) != len(self.values) or len(self.knots) < 2:
            raise ValueError("income curve needs matching knots/values, at least 2")
        if any(k <= 0 for k in self.knots) or list(self.knots) != sorted(self.knots):
            raise ValueError("income knots must be positive and increasing")

    def __call__(self, income):
        x = np.log(np.maximum(np.asarray(income, dtype=float), 1.0))
        return np.interp(x, np.log(self.knots), self.values)


@dataclass(frozen=True)
class GoodsServiceItem:
    gs_id: int
    name: str
    mcc_set: tuple
    frequency_mean: float
    frequency_std: float
    frequency_spread_fraction: float
    time_of_day_weights: tuple
    weekday_weekend_weights: tuple
    context_weights: tuple
    income_participation: IncomeCurve
    spend_mean: IncomeCurve
    spend_cv: float
    spend_spread_fraction: float = 0.5
    online_affinity: float = 0.5
    fraud_weight: float = 1.0
    retirement_multiplier: float = 1.0

    def __post_init__(self):
        if not self.mcc_set:
            raise ValueError(f"item {self.name!r} has no MCC")
        for label, w, n in (("time_of_day_weights", self.time_of_day_weights, 3),
                            ("weekday_weekend_weights", self.weekday_weekend_weights, 2),
                            ("context_weights", self.context_weights, 3)):
            if len(w) != n or min(w) < 0 or sum(w) <= 0:
                raise ValueError(f"item {self.name!r}: {label} must be {n} non-negative values with positive sum")
        if not self.frequency_mean > 0:
            raise ValueError(f"item {self.name!r}: frequency must be > 0")


@dataclass
class GsCatalog:
    items: list
    mccs: dict  # code -> MccCode
    income_knots: tuple

    def __post_init__(self):
        self._by_name = {it.name: it for it in self.items}
        self._by_id = {it.gs_id: it for it in self.items}

    def __len__(self):
        return len(self.items)

    def item(self, key) -> GoodsServiceItem:
        if isinstance(key, str):
            if key not in self._by_name:
                raise KeyError(f"unknown goods/service item {key!r}")
            return self._by_name[key]
        if int(key) not in self._by_id:
            raise KeyError(f"unknown goods/service id {key!r}")
        return self._by_id[int(key)]

    def arrays(self) -> dict:
        """Dense per-item arrays for the engine's vectorized inner loop."""
        return {
            "tod": np.array([it.time_of_day_weights for it in self.items], dtype=float),
            "week": np.array([it.weekday_weekend_weights for it in self.items], dtype=float),
            "ctx": np.array([it.context_weights for it in self.items], dtype=float),
            "online_affinity": np.array([it.online_affinity for it in self.items]),
            "fraud_weight": np.array([it.fraud_weight for it in self.items]),
            "retirement_multiplier": np.array([it.retirement_multiplier for it in self.items]),
        }


def _open_data(name: str):
    return resources.files("synthcard").joinpath("data").joinpath(name).open(encoding="utf-8")


@lru_cache(maxsize=4)
def load_mcc_catalog(path: str | None = None) -> dict:
    fh = open(path, encoding="utf-8") if path else _open_data("mcc.json")
    with fh:
        rows = json.load(fh)
    return {int(r["code"]): MccCode(int(r["code"]), r["description"], r.get("noun", ""), bool(r.get("chain")))
            for r in rows}


def catalog_from_dict(doc: dict, mccs: dict) -> GsCatalog:
    knots = tuple(float(k) for k in doc["income_knots"])
    items = []
    problems = []
    for raw in doc["items"]:
        missing = [c for c in raw["mccs"] if int(c) not in mccs]
        if missing:
            problems.append((f"gs_catalog.{raw['name']}.mccs", f"unknown MCC(s) {missing}"))
            continue
        f = raw["frequency"]
        items.append(GoodsServiceItem(
            gs_id=int(raw["gs_id"]),
            name=raw["name"],
            mcc_set=tuple(int(c) for c in raw["mccs"]),
            frequency_mean=float(f["mean"]),
            frequency_std=float(f["std"]),
            frequency_spread_fraction=float(f.get("spread_fraction", 0.5)),
            time_of_day_weights=tuple(raw["time_of_day_weights"]),
            weekday_weekend_weights=tuple(raw["weekday_weekend_weights"]),
            context_weights=tuple(raw["context_weights"]),
            income_participation=IncomeCurve(knots, tuple(raw["participation"])),
            spend_mean=IncomeCurve(knots, tuple(raw["spend_mean"])),
            spend_cv=float(raw["spend_cv"]),
            spend_spread_fraction=float(raw.get("spend_spread_fraction", 0.5)),
            online_affinity=float(raw.get("online_affinity", 0.5)),
            fraud_weight=float(raw.get("fraud_weight", 1.0)),
            retirement_multiplier=float(raw.get("retirement_multiplier", 1.0)),
        ))
    if problems:
        raise ConfigError("invalid goods/services catalog", problems)
    ids = [it.gs_id for it in items]
    if sorted(ids) != list(range(len(items))):
        raise ConfigError("invalid goods/services catalog", [("gs_catalog.items", "gs_id must be 0..n-1")])
    return GsCatalog(items, mccs, knots)


@lru_cache(maxsize=4)
def load_catalog(path: str | None = None, mcc_path: str | None = None) -> GsCatalog:
    fh = open(path, encoding="utf-8") if path else _open_data("gs_catalog.json")
    with fh:
        doc = json.load(fh)
    return catalog_from_dict(doc, load_mcc_catalog(mcc_path))


def mccs_for_item(catalog: GsCatalog, gs_id) -> frozenset:
    return frozenset(catalog.item(gs_id).mcc_set)


# --- preferences ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Preferences:
    """Per-item personal parameters for one consumer (arrays indexed by gs_id)."""

    participates: np.ndarray
    annual_rate: np.ndarray
    spend_mean: np.ndarray
    spend_std: np.ndarray
    favorite_u: np.ndarray

    @property
    def active_items(self) -> np.ndarray:
        return np.flatnonzero(self.participates & (self.annual_rate > 0))

    def spend(self, gs_id: int) -> IndividualDistribution:
        return IndividualDistribution(float(self.spend_mean[gs_id]), float(self.spend_std[gs_id]))


def instantiate_preferences(profile, catalog: GsCatalog, s, income: float | None = None) -> Preferences:
    """Turn catalog-level item features into one consumer's personal table.

    Personal annual rates are lognormal around the item's frequency mean (the
    between-person share of variance set by the item's spread fraction);
    personal spend means are lognormal around the income-curve mean.
    """
    g = s.generator if hasattr(s, "generator") else s
    inc = profile.annual_income if income is None else income
    n = len(catalog.items)
    u_part = g.random(n)
    z_rate = g.standard_normal(n)
    z_spend = g.standard_normal(n)
    fav = g.random(n)
    part = np.empty(n, dtype=bool)
    rate = np.empty(n)
    smean = np.empty(n)
    sstd = np.empty(n)
    for it in catalog.items:
        i = it.gs_id
        part[i] = u_part[i] < float(it.income_participation(inc))
        between = math.sqrt(it.frequency_spread_fraction) * it.frequency_std
        if between > 0:
            mu, sig = lognormal_params(it.frequency_mean, between)
            rate[i] = math.exp(mu + sig * z_rate[i])
        else:
            rate[i] = it.frequency_mean
        m = float(it.spend_mean(inc))
        total_sd = it.spend_cv * m
        b = math.sqrt(it.spend_spread_fraction) * total_sd
        if b > 0:
            mu, sig = lognormal_params(m, b)
            smean[i] = math.exp(mu + sig * z_spend[i])
        else:
            smean[i] = m
        sstd[i] = math.sqrt(1.0 - it.spend_spread_fraction) * it.spend_cv * smean[i]
    return Preferences(part, rate, smean, sstd, fav)


# --- merchant world -------------------------------------------------------------------------

@dataclass(frozen=True)
class WorldConfig:
    total_locations: int = 50_000
    n_multinationals: int = 301
    min_locations_per_multinational: int = 50
    min_countries_per_multinational: int = 3
    multinational_location_share: float = 0.35
    multinational_online_share: float = 0.85
    local_online_share: float = 0.1
    local_foreign_share: float = 0.15
    local_min_per_mcc: int = 3
    jitter_km: float = 6.0
    mcc_sales_weights: Mapping[int, float] | None = None

    def problems(self) -> list:
        out = []
        if self.total_locations < 1:
            out.append(("world.total_locations", "must be >= 1"))
        if self.n_multinationals < 0:
            out.append(("world.n_multinationals", "must be >= 0"))
        if self.min_locations_per_multinational < 1:
            out.append(("world.min_locations_per_multinational", "must be >= 1"))
        if self.min_countries_per_multinational < 1:
            out.append(("world.min_countries_per_multinational", "must be >= 1"))
        if self.n_multinationals * self.min_locations_per_multinational > self.total_locations:
            out.append(("world.total_locations",
                        f"{self.total_locations} locations cannot hold {self.n_multinationals} multinationals "
                        f"x {self.min_locations_per_multinational}"))
        for k in ("multinational_location_share", "multinational_online_share", "local_online_share",
                  "local_foreign_share"):
            if not 0 <= getattr(self, k) <= 1:
                out.append((f"world.{k}", "must be in [0, 1]"))
        return out


class MerchantWorld:
    """Immutable merchant world: merchants, locations and a per-MCC spatial index."""

    def __init__(self, mcc_table: dict, merchant_mcc, merchant_multi, merchant_online, merchant_country,
                 loc_merchant, loc_lat, loc_lon, loc_place, places: PlaceTable, seed: int = 0,
                 name_parts=None):
        self.mcc_table = mcc_table
        self.merchant_mcc = np.asarray(merchant_mcc, dtype=np.int32)
        self.merchant_multi = np.asarray(merchant_multi, dtype=bool)
        self.merchant_online = np.asarray(merchant_online, dtype=bool)
        self.merchant_country = np.asarray(merchant_country, dtype=object)
        self.loc_merchant = np.asarray(loc_merchant, dtype=np.int64)
        self.loc_lat = np.asarray(loc_lat, dtype=float)
        self.loc_lon = np.asarray(loc_lon, dtype=float)
        self.loc_place = np.asarray(loc_place, dtype=np.int32)
        self.places = places
        self.seed = seed
        self._name_parts = name_parts or _load_name_parts()
        self.loc_mcc = self.merchant_mcc[self.loc_merchant] if len(self.loc_merchant) else np.zeros(0, np.int32)
        self._trees = {}
        self._tree_ids = {}
        xyz = unit_xyz(self.loc_lat, self.loc_lon) if len(self.loc_lat) else np.zeros((0, 3))
        order = np.argsort(self.loc_mcc, kind="stable")
        codes, starts = np.unique(self.loc_mcc[order], return_index=True)
        bounds = list(starts) + [len(order)]
        for c, a, b in zip(codes, bounds[:-1], bounds[1:]):
            ids = order[a:b]
            self._tree_ids[int(c)] = ids
            self._trees[int(c)] = cKDTree(xyz[ids])
        self._online = {}
        for c in np.unique(self.merchant_mcc):
            self._online[int(c)] = np.flatnonzero(self.merchant_online & (self.merchant_mcc == c))
        self._names = {}

    # sizes
    @property
    def n_merchants(self) -> int:
        return len(self.merchant_mcc)

    @property
    def n_locations(self) -> int:
        return len(self.loc_merchant)

    @property
    def n_multinationals(self) -> int:
        return int(self.merchant_multi.sum())

    def merchant_name(self, merchant_id: int) -> str:
        name = self._names.get(merchant_id)
        if name is None:
            syl, end = self._name_parts
            g = derive_stream(self.seed, ("merchant", int(merchant_id), "name")).generator
            k = 2 if g.random() < 0.6 else 1
            word = "".join(syl[int(j)] for j in g.integers(0, len(syl), k)) + end[int(g.integers(len(end)))]
            noun = self.mcc_table[int(self.merchant_mcc[merchant_id])].noun
            name = f"{word.capitalize()} {noun}".strip()
            self._names[merchant_id] = name
        return name

    def merchant(self, merchant_id: int) -> Merchant:
        return Merchant(int(merchant_id), self.merchant_name(merchant_id),
                        self.mcc_table[int(self.merchant_mcc[merchant_id])],
                        bool(self.merchant_multi[merchant_id]), bool(self.merchant_online[merchant_id]))

    def location(self, location_id: int) -> MerchantLocation:
        p = int(self.loc_place[location_id])
        pl = self.places
        return MerchantLocation(int(location_id), int(self.loc_merchant[location_id]),
                                float(self.loc_lat[location_id]), float(self.loc_lon[location_id]),
                                str(pl.city[p]), str(pl.country[p]), str(pl.country_code[p]),
                                str(pl.state[p]), str(pl.zipcode[p]))

    def location_country_code(self, location_ids) -> np.ndarray:
        return self.places.country_code[self.loc_place[location_ids]]

    def mcc_location_ids(self, mcc: int) -> np.ndarray:
        return self._tree_ids.get(int(mcc), np.zeros(0, dtype=np.int64))

    def online_merchants(self, mcc_set) -> np.ndarray:
        parts = [self._online.get(int(c)) for c in sorted(mcc_set)]
        parts = [p for p in parts if p is not None and len(p)]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def coverage_gaps(self, catalog: GsCatalog) -> list:
        """MCCs referenced by the catalog that have no merchant in this world."""
        have = set(int(c) for c in np.unique(self.merchant_mcc))
        return sorted({c for it in catalog.items for c in it.mcc_set} - have)

    def _query(self, lat, lon, mcc_set, k, max_radius_km=None):
        q = unit_xyz(np.atleast_1d(lat), np.atleast_1d(lon))[0]
        ub = np.inf if max_radius_km is None else float(2 * math.sin(min(max_radius_km / (2 * EARTH_RADIUS_KM),
                                                                          math.pi / 2)) + 1e-12)
        d_all, i_all = [], []
        for c in sorted(set(int(m) for m in mcc_set)):
            tree = self._trees.get(c)
            if tree is None:
                continue
            kk = min(k, tree.n)
            d, i = tree.query(q, k=kk, distance_upper_bound=ub)
            d, i = np.atleast_1d(d), np.atleast_1d(i)
            ok = np.isfinite(d)
            d_all.append(d[ok])
            i_all.append(self._tree_ids[c][i[ok]])
        if not d_all:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        d = np.concatenate(d_all)
        ids = np.concatenate(i_all)
        order = np.lexsort((ids, d))[:k]
        return ids[order], chord_to_km(d[order])


def nearby_locations(world: MerchantWorld, point, mcc_set, k: int, max_radius_km: float | None = None,
                     decay_km: float = 20.0):
    """Up to ``k`` locations with MCC in ``mcc_set`` ranked by ``exp(-d / decay_km)``.

    Returns ``(location_ids, distances_km, scores)``, best first.  Ties in
    distance are broken by location id.  An empty result means no matching
    location exists (within ``max_radius_km`` when given).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lat, lon = point
    ids, dist = world._query(lat, lon, mcc_set, k, max_radius_km)
    return ids, dist, np.exp(-dist / decay_km)


def brute_force_nearest(world: MerchantWorld, point, mcc_set, k: int) -> np.ndarray:
    """Exact k nearest matching locations by scanning every location (test oracle)."""
    lat, lon = point
    mask = np.isin(world.loc_mcc, list(mcc_set))
    ids = np.flatnonzero(mask)
    d = haversine_km(lat, lon, world.loc_lat[ids], world.loc_lon[ids])
    order = np.lexsort((ids, d))[:k]
    return ids[order]


@lru_cache(maxsize=1)
def _load_name_parts():
    with _open_data("names.json") as fh:
        n = json.load(fh)
    return tuple(n["brand_syllables"]), tuple(n["brand_endings"])


def default_sales_weights(catalog: GsCatalog, mccs: dict) -> dict:
    """Relative sales volume per MCC implied by the catalog at median income."""
    mid = catalog.income_knots[len(catalog.income_knots) // 2]
    w = {c: 0.0 for c in mccs}
    for it in catalog.items:
        v = it.frequency_mean * float(it.spend_mean(mid)) * float(it.income_participation(mid))
        for c in it.mcc_set:
            w[c] = w.get(c, 0.0) + v / len(it.mcc_set)
    floor = max(w.values()) * 1e-4 if w else 0.0
    return {c: max(v, floor) for c, v in w.items()}


def _jitter(g, lat, lon, km):
    n = len(lat)
    dlat = g.normal(0.0, km, n) / 111.2
    dlon = g.normal(0.0, km, n) / (111.2 * np.maximum(np.cos(np.radians(lat)), 0.05))
    return np.clip(lat + dlat, -89.9, 89.9), (lon + dlon + 180.0) % 360.0 - 180.0


def _apportion(total: int, weights: np.ndarray, minimum: int) -> np.ndarray:
    """Integer split of ``total`` proportional to ``weights`` with a per-slot floor."""
    n = len(weights)
    base = np.full(n, minimum, dtype=np.int64)
    rest = total - base.sum()
    if rest <= 0:
        return base
    share = weights / weights.sum() * rest
    fl = np.floor(share).astype(np.int64)
    left = rest - fl.sum()
    order = np.argsort(-(share - fl), kind="stable")
    fl[order[:left]] += 1
    return base + fl


def build_world(world_cfg: WorldConfig, seed: int, catalog: GsCatalog | None = None,
                us_places: PlaceTable | None = None, world_cities: PlaceTable | None = None) -> MerchantWorld:
    """Build multinationals, local merchants and their locations."""
    problems = world_cfg.problems()
    if problems:
        raise ConfigError("invalid world config", problems)
    catalog = catalog or load_catalog()
    mccs = catalog.mccs
    us = us_places if us_places is not None else load_us_places()
    wc = world_cities if world_cities is not None else load_world_cities()
    places = us.concat(wc)
    n_us = len(us)
    foreign_idx = np.arange(n_us, len(places))
    us_w = us.weight / us.weight.sum()
    fw = wc.weight / wc.weight.sum() if len(wc) else np.zeros(0)
    countries = np.unique(wc.country_code) if len(wc) else np.zeros(0, dtype=object)

    sales = dict(world_cfg.mcc_sales_weights or default_sales_weights(catalog, mccs))
    codes = np.array(sorted(mccs), dtype=np.int32)
    sw = np.array([max(sales.get(int(c), 0.0), 0.0) for c in codes])
    if sw.sum() <= 0:
        sw = np.ones(len(codes))

    g = derive_stream(seed, ("world", "build")).generator
    m_mcc, m_multi, m_online, m_country = [], [], [], []
    l_merchant, l_place = [], []

    # Multinationals on chain-style MCCs.
    n_multi = world_cfg.n_multinationals
    if n_multi:
        chain = np.array([mccs[int(c)].chain for c in codes])
        pool = codes[chain] if chain.any() else codes
        pw = sw[chain] if chain.any() else sw
        multi_budget = max(n_multi * world_cfg.min_locations_per_multinational,
                           int(world_cfg.multinational_location_share * world_cfg.total_locations))
        multi_budget = min(multi_budget, world_cfg.total_locations)
        # Zipf-like size spread: a few giants, many at the floor.
        size_w = 1.0 / np.arange(1, n_multi + 1) ** 0.8
        sizes = _apportion(multi_budget, size_w[g.permutation(n_multi)], world_cfg.min_locations_per_multinational)
        mcc_pick = pool[np.minimum(np.searchsorted(np.cumsum(pw) / pw.sum(), g.random(n_multi), side="right"),
                                   len(pool) - 1)]
        n_ctry = min(world_cfg.min_countries_per_multinational, 1 + len(countries))
        for j in range(n_multi):
            mid = len(m_mcc)
            home_foreign = len(countries) and g.random() < 0.35
            m_mcc.append(int(mcc_pick[j]))
            m_multi.append(True)
            m_online.append(bool(g.random() < world_cfg.multinational_online_share))
            size = int(sizes[j])
            # Country set: the U.S. plus (n_ctry - 1) foreign countries, at least.
            extra = max(n_ctry - 1, int(g.integers(n_ctry - 1, min(len(countries), 25) + 1)) if len(countries) else 0)
            chosen = g.choice(countries, size=min(extra, len(countries)), replace=False) if extra else []
            fmask = np.isin(wc.country_code, chosen)
            cand_f = foreign_idx[fmask]
            m_country.append(str(chosen[0]) if home_foreign and len(chosen) else "US")
            us_frac = 0.45 if home_foreign else 0.75
            n_for = 0 if not len(cand_f) else max(len(chosen), int(round(size * (1 - us_frac))))
            n_for = min(n_for, size - 1) if size > 1 else n_for
            n_home = size - n_for
            pl = list(np.minimum(np.searchsorted(np.cumsum(us_w), g.random(n_home), side="right"), n_us - 1))
            if n_for:
                # Guarantee each chosen country gets a location, rest by city population.
                first = [int(g.choice(foreign_idx[wc.country_code == c])) for c in chosen]
                cw = places.weight[cand_f] / places.weight[cand_f].sum()
                more = cand_f[np.minimum(np.searchsorted(np.cumsum(cw), g.random(n_for - len(first)), side="right"),
                                         len(cand_f) - 1)]
                pl += first + list(more)
            l_merchant.extend([mid] * size)
            l_place.extend(pl)

    # Local merchants.
    remaining = world_cfg.total_locations - len(l_place)
    if remaining > 0:
        alloc = _apportion(remaining, np.sqrt(sw), min(world_cfg.local_min_per_mcc, remaining // len(codes)))
        over = alloc.sum() - remaining
        if over > 0:  # floors exceeded the budget: trim the largest
            for idx in np.argsort(-alloc, kind="stable"):
                take = min(over, alloc[idx] - 1)
                alloc[idx] -= take
                over -= take
                if over == 0:
                    break
        us_cdf, f_cdf = np.cumsum(us_w), np.cumsum(fw)
        for c, n_loc in zip(codes, alloc):
            n_loc = int(n_loc)
            if n_loc <= 0:
                continue
            # Mostly single-site shops, some small chains of 2-5 sites.
            sizes = np.where(g.random(n_loc) < 0.85, 1, g.integers(2, 6, n_loc))
            cut = int(np.searchsorted(np.cumsum(sizes), n_loc))
            sizes = sizes[:cut + 1].copy()
            sizes[-1] -= sizes.sum() - n_loc
            k = len(sizes)
            foreign = (g.random(k) < world_cfg.local_foreign_share) if len(wc) else np.zeros(k, bool)
            u = g.random(k)
            home = np.where(foreign,
                            n_us + np.minimum(np.searchsorted(f_cdf, u, side="right"), max(len(wc) - 1, 0)),
                            np.minimum(np.searchsorted(us_cdf, u, side="right"), n_us - 1))
            online = g.random(k) < world_cfg.local_online_share
            mids = len(m_mcc) + np.arange(k)
            m_mcc.extend([int(c)] * k)
            m_multi.extend([False] * k)
            m_online.extend(online.tolist())
            m_country.extend(places.country_code[home].tolist())
            l_merchant.extend(np.repeat(mids, sizes).tolist())
            l_place.extend(np.repeat(home, sizes).tolist())

    l_place = np.asarray(l_place, dtype=np.int64)
    lat, lon = _jitter(g, places.lat[l_place], places.lon[l_place], world_cfg.jitter_km)
    return MerchantWorld(mccs, m_mcc, m_multi, m_online, m_country, l_merchant, lat, lon, l_place, places, seed)


def world_to_dict(world: MerchantWorld) -> dict:
    """Plain-data form for saving; reload with :func:`load_world`."""
    return {
        "seed": world.seed,
        "merchant_mcc": world.merchant_mcc.tolist(),
        "merchant_multi": world.merchant_multi.astype(int).tolist(),
        "merchant_online": world.merchant_online.astype(int).tolist(),
        "merchant_country": [str(c) for c in world.merchant_country],
        "loc_merchant": world.loc_merchant.tolist(),
        "loc_lat": world.loc_lat.tolist(),
        "loc_lon": world.loc_lon.tolist(),
        "loc_place": world.loc_place.tolist(),
    }


def save_world(world: MerchantWorld, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(world_to_dict(world), fh)


def load_world(path, mccs: dict | None = None) -> MerchantWorld:
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    places = load_us_places().concat(load_world_cities())
    return MerchantWorld(mccs or load_mcc_catalog(), d["merchant_mcc"], np.array(d["merchant_multi"], bool),
                         np.array(d["merchant_online"], bool), d["merchant_country"], d["loc_merchant"],
                         d["loc_lat"], d["loc_lon"], d["loc_place"], places, d["seed"])
