"""Consumer population: biography, correlated financial/travel attributes, lifecycle."""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .correlate import (
    AttributeMatrix,
    CompletedCorrelation,
    CorrelationSpec,
    complete_to_psd,
    impose_correlation,
    monotone_couple,
    nearest_psd_correlation,
)
from .errors import ConfigError
from .geo import PlaceTable, load_us_places
from .rand import (
    IndividualDistribution,
    PopulationDistribution,
    derive_stream,
    lognormal_params,
    sample_categorical,
    sample_truncated_gaussian,
    truncated_gaussian_cdf,
    truncated_gaussian_ppf,
)

# Attributes named in the virtual-world parameter table, in display order.
TABLE_ATTRIBUTES = (
    "cards_per_consumer",
    "cards_per_account",
    "transactions_per_year",
    "fico_score",
    "annual_income",
    "debt_fraction_of_income",
    "credit_limit",
    "balance_fraction_of_limit",
    "years_account_open",
    "years_since_pin_change",
    "mean_annual_weekend_getaways",
    "mean_annual_vacations",
    "mean_vacation_duration",
    "mean_annual_business_trips",
    "mean_business_trip_duration",
    "p_foreign_weekend_getaway",
    "p_foreign_vacation",
    "p_foreign_business_trip",
)
FOREIGN_PROBS = ("p_foreign_weekend_getaway", "p_foreign_vacation", "p_foreign_business_trip")


@dataclass(frozen=True)
class AttributeConfig:
    """A :class:`PopulationDistribution` plus sampling family and hard bounds.

    ``family`` is ``"gaussian"`` (truncated to ``[lo, hi]``) or
    ``"lognormal"`` (mean/std are the arithmetic moments; positive support).
    """

    mean: float
    std_dev: float
    spread_fraction: float = 1.0
    family: str = "gaussian"
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        PopulationDistribution(self.mean, self.std_dev, self.spread_fraction)
        if self.family not in ("gaussian", "lognormal"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "lognormal" and self.mean <= 0:
            raise ValueError("lognormal attributes need a positive mean")
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")

    @property
    def dist(self) -> PopulationDistribution:
        return PopulationDistribution(self.mean, self.std_dev, self.spread_fraction)

    @property
    def between_std(self) -> float:
        return math.sqrt(self.spread_fraction) * self.std_dev

    @property
    def within_std(self) -> float:
        return math.sqrt(1.0 - self.spread_fraction) * self.std_dev


DEFAULT_ATTRIBUTES = {
    "cards_per_consumer": AttributeConfig(3.0, 1.2, 1.0, "gaussian", 0.5, 15.0),
    "cards_per_account": AttributeConfig(1.3, 0.5, 1.0, "gaussian", 0.5, 4.49),
    "transactions_per_year": AttributeConfig(450.0, 150.0, 0.6, "gaussian", 10.0, 5000.0),
    "fico_score": AttributeConfig(712.0, 60.0, 1.0, "gaussian", 300.0, 850.0),
    "annual_income": AttributeConfig(72000.0, 55000.0, 1.0, "lognormal"),
    "debt_fraction_of_income": AttributeConfig(0.35, 0.15, 1.0, "gaussian", 0.0, 5.0),
    "credit_limit": AttributeConfig(12000.0, 9000.0, 0.6, "lognormal"),
    "balance_fraction_of_limit": AttributeConfig(0.25, 0.1, 0.6, "gaussian", 0.0, 1.0),
    "years_account_open": AttributeConfig(8.0, 6.0, 1.0, "lognormal"),
    "years_since_pin_change": AttributeConfig(3.0, 2.5, 0.5, "lognormal"),
    "mean_annual_weekend_getaways": AttributeConfig(2.0, 1.5, 1.0, "lognormal"),
    "mean_annual_vacations": AttributeConfig(1.2, 0.8, 1.0, "lognormal"),
    "mean_vacation_duration": AttributeConfig(7.0, 3.0, 0.5, "gaussian", 2.0, 30.0),
    "mean_annual_business_trips": AttributeConfig(1.5, 2.5, 1.0, "lognormal"),
    "mean_business_trip_duration": AttributeConfig(3.0, 1.5, 0.5, "gaussian", 1.0, 14.0),
    "p_foreign_weekend_getaway": AttributeConfig(0.05, 0.02, 1.0, "gaussian", 0.0, 1.0),
    "p_foreign_vacation": AttributeConfig(0.2, 0.08, 1.0, "gaussian", 0.0, 1.0),
    "p_foreign_business_trip": AttributeConfig(0.12, 0.05, 1.0, "gaussian", 0.0, 1.0),
}

DEFAULT_CORE = (
    "annual_income",
    "fico_score",
    "debt_fraction_of_income",
    "credit_limit",
    "balance_fraction_of_limit",
    "transactions_per_year",
    "cards_per_consumer",
    "mean_annual_weekend_getaways",
    "mean_annual_vacations",
    "mean_vacation_duration",
    "mean_annual_business_trips",
    "mean_business_trip_duration",
)

# Authored defaults; no published pairwise values exist for these.
DEFAULT_CORRELATIONS = (
    ("annual_income", "fico_score", 0.35),
    ("annual_income", "credit_limit", 0.55),
    ("fico_score", "credit_limit", 0.4),
    ("annual_income", "debt_fraction_of_income", -0.15),
    ("fico_score", "debt_fraction_of_income", -0.35),
    ("fico_score", "balance_fraction_of_limit", -0.45),
    ("annual_income", "transactions_per_year", 0.3),
    ("annual_income", "cards_per_consumer", 0.25),
    ("fico_score", "cards_per_consumer", 0.2),
    ("transactions_per_year", "cards_per_consumer", 0.2),
    ("annual_income", "mean_annual_vacations", 0.3),
    ("annual_income", "mean_annual_business_trips", 0.25),
    ("annual_income", "mean_annual_weekend_getaways", 0.15),
    ("annual_income", "mean_vacation_duration", 0.1),
)

DEFAULT_AGE_KNOTS = ((18, 1.0), (30, 1.05), (45, 1.0), (60, 0.95), (70, 0.75), (80, 0.4), (90, 0.1))


@dataclass(frozen=True)
class PopulationConfig:
    size: int = 200
    gender_male_share: float = 0.5
    age_at_end_knots: tuple = DEFAULT_AGE_KNOTS
    retirement_age: AttributeConfig = AttributeConfig(65.0, 3.0, 1.0, "gaussian", 55.0, 75.0)
    extreme_age_threshold: float = 85.0
    attributes: Mapping[str, AttributeConfig] = field(default_factory=lambda: dict(DEFAULT_ATTRIBUTES))
    core_attributes: tuple = DEFAULT_CORE
    correlations: tuple = DEFAULT_CORRELATIONS
    max_correlation_shift: float = 0.2
    foreign_travel_driver: str = "annual_income"
    foreign_travel_strength: float = 0.5
    occupation_rate_multipliers: Mapping[str, float] = field(default_factory=dict)
    geo_table: str | None = None

    def __post_init__(self):
        problems = []
        if self.size < 1:
            problems.append(("population.size", "must be >= 1"))
        if not 0 <= self.gender_male_share <= 1:
            problems.append(("population.gender_male_share", "must be in [0, 1]"))
        attrs = dict(DEFAULT_ATTRIBUTES)
        attrs.update(self.attributes)
        object.__setattr__(self, "attributes", attrs)
        for name in FOREIGN_PROBS:
            a = attrs[name]
            if not (0 <= a.lo and a.hi <= 1):
                problems.append((f"population.attributes.{name}", "probability bounds must lie in [0, 1]"))
        for name in self.core_attributes:
            if name not in attrs:
                problems.append(("population.core_attributes", f"unknown attribute {name!r}"))
        if len(self.core_attributes) > 32:
            problems.append(("population.core_attributes", "at most 32 core attributes"))
        for a, b, rho in self.correlations:
            for n in (a, b):
                if n not in self.core_attributes:
                    problems.append(("population.correlations", f"{n!r} is not a core attribute"))
            if not -1 <= rho <= 1:
                problems.append(("population.correlations", f"{a}~{b}={rho} outside [-1, 1]"))
        if not 0 <= self.foreign_travel_strength <= 1:
            problems.append(("population.foreign_travel_strength", "must be in [0, 1]"))
        if problems:
            raise ConfigError("invalid population config", problems)

    def attr(self, name: str) -> AttributeConfig:
        return self.attributes[name]


@dataclass(frozen=True)
class HomeLocation:
    latitude: float
    longitude: float
    city: str
    state: str
    zipcode: str
    place_index: int


@dataclass(frozen=True)
class TravelPropensity:
    weekend_getaways: float
    vacations: float
    vacation_duration: IndividualDistribution
    business_trips: float
    business_trip_duration: IndividualDistribution
    p_foreign_weekend_getaway: float
    p_foreign_vacation: float
    p_foreign_business_trip: float


@dataclass(frozen=True)
class ConsumerProfile:
    consumer_id: int
    name: str
    gender: str
    birth_date: dt.date
    home: HomeLocation
    occupation: str
    retirement_age: float
    annual_income: float
    fico_score: int
    debt_fraction_of_income: float
    transactions_per_year: IndividualDistribution
    cards_per_consumer: float
    cards_per_account: float
    credit_limit: IndividualDistribution
    balance_fraction_of_limit: IndividualDistribution
    years_account_open: IndividualDistribution
    years_since_pin_change: IndividualDistribution
    travel: TravelPropensity
    entry_date: dt.date
    preferences: object = None

    @property
    def n_cards(self) -> int:
        return max(1, int(round(self.cards_per_consumer)))

    def age_on(self, when: dt.date) -> float:
        return (when - self.birth_date).days / 365.25


@dataclass(frozen=True)
class LifecycleEvent:
    consumer_id: int
    kind: str  # "Enter18" | "Retire" | "ExtremeAge"
    effective_date: dt.date


@dataclass
class Population:
    profiles: list
    correlation: CompletedCorrelation
    core_names: tuple
    core_matrix: np.ndarray
    report: dict


def add_years(d: dt.date, years: float) -> dt.date:
    """Birthday-style date arithmetic; fractional years add whole days."""
    whole = int(math.floor(years))
    try:
        base = d.replace(year=d.year + whole)
    except ValueError:  # Feb 29 -> Mar 1
        base = d.replace(year=d.year + whole, month=3, day=1)
    frac = years - whole
    return base + dt.timedelta(days=int(round(frac * 365.25))) if frac else base


@lru_cache(maxsize=1)
def _names():
    with resources.files("synthcard").joinpath("data").joinpath("names.json").open() as fh:
        return json.load(fh)


def assign_geography(s, geo_table: PlaceTable) -> HomeLocation:
    """Pick a home place with probability proportional to its weight."""
    if geo_table is None or len(geo_table) == 0:
        raise ConfigError("geo table is empty", [("population.geo_table", "no rows")])
    w = np.asarray(geo_table.weight, dtype=float)
    if (w <= 0).any():
        raise ConfigError("geo table weights must be positive", [("population.geo_table", "weight <= 0")])
    g = s.generator if hasattr(s, "generator") else s
    i = int(sample_categorical(g, w))
    return HomeLocation(float(geo_table.lat[i]), float(geo_table.lon[i]), str(geo_table.city[i]),
                        str(geo_table.state[i]), str(geo_table.zipcode[i]), i)


def lifecycle_events(profile: ConsumerProfile, horizon: tuple[dt.date, dt.date],
                     extreme_age_threshold: float = 85.0) -> list[LifecycleEvent]:
    start, end = horizon
    out = []
    for kind, age in (("Enter18", 18.0), ("Retire", profile.retirement_age),
                      ("ExtremeAge", extreme_age_threshold)):
        when = add_years(profile.birth_date, age)
        if start <= when <= end:
            out.append(LifecycleEvent(profile.consumer_id, kind, when))
    out.sort(key=lambda e: e.effective_date)
    return out


# --- attribute sampling -------------------------------------------------------------------

def _consumer_level(attr: AttributeConfig):
    """Distribution of the per-consumer value (a personal mean for two-level attributes)."""
    return attr.family, attr.mean, attr.between_std, attr.lo, attr.hi


def _draw_column(attr: AttributeConfig, g, n) -> np.ndarray:
    fam, mean, std, lo, hi = _consumer_level(attr)
    if std == 0:
        return np.full(n, min(max(mean, lo), hi))
    if fam == "lognormal":
        mu, sigma = lognormal_params(mean, std)
        return g.lognormal(mu, sigma, n)
    return sample_truncated_gaussian(g, mean, std, lo, hi, size=n)


def _to_scores(attr: AttributeConfig, x: np.ndarray) -> np.ndarray:
    fam, mean, std, lo, hi = _consumer_level(attr)
    if fam == "lognormal":
        mu, sigma = lognormal_params(mean, std)
        return (np.log(x) - mu) / sigma
    u = np.clip(truncated_gaussian_cdf(x, mean, std, lo, hi), 1e-15, 1 - 1e-15)
    return ndtri(u)


def _from_scores(attr: AttributeConfig, z: np.ndarray) -> np.ndarray:
    fam, mean, std, lo, hi = _consumer_level(attr)
    if fam == "lognormal":
        mu, sigma = lognormal_params(mean, std)
        return np.exp(mu + sigma * z)
    return truncated_gaussian_ppf(ndtr(z), mean, std, lo, hi)


def correlate_core(cfg: PopulationConfig, seed: int, n: int):
    """Draw the core attribute block and impose the configured correlation.

    Returns ``(matrix n x k, CompletedCorrelation, report)``.  Correlation is
    imposed on normal scores of each column, so hard bounds survive; a short
    fixed-point loop nudges the score-space target until the correlations of
    the back-transformed values match the completed target.
    """
    names = tuple(cfg.core_attributes)
    spec = CorrelationSpec.from_triples(names, cfg.correlations)
    completed = complete_to_psd(spec, cfg.max_correlation_shift)
    target = completed.matrix
    attrs = [cfg.attr(a) for a in names]
    g = derive_stream(seed, ("population", "core")).generator
    cols = [_draw_column(a, g, n) for a in attrs]
    x = np.column_stack(cols) if cols else np.zeros((n, 0))
    report = {"correlation_iterations": 0, "correlation_max_error": 0.0}
    varying = [j for j, a in enumerate(attrs) if a.between_std > 0]
    if n <= len(names) + 1 or len(varying) < 2:
        return x, completed, report

    idx = np.array(varying)
    z = np.column_stack([_to_scores(attrs[j], x[:, j]) for j in idx])
    sub_target = target[np.ix_(idx, idx)]
    z_target = sub_target.copy()
    best = (np.inf, None)
    for it in range(25):
        zc = impose_correlation(AttributeMatrix(z, tuple(names[j] for j in idx)), z_target).columns
        xc = np.column_stack([_from_scores(attrs[j], zc[:, m]) for m, j in enumerate(idx)])
        err = sub_target - np.corrcoef(xc, rowvar=False)
        worst = float(np.abs(err).max())
        if worst < best[0]:
            best = (worst, xc)
        report["correlation_iterations"] = it + 1
        if worst < 2e-3:
            break
        z_target = z_target + err
        np.fill_diagonal(z_target, 1.0)
        z_target = nearest_psd_correlation(np.clip(z_target, -0.999, 0.999) + np.diag(np.full(len(idx), 0.001)))
    report["correlation_max_error"] = best[0]
    x[:, idx] = best[1]
    return x, completed, report


def _sample_ages(knots, g, n) -> np.ndarray:
    ages = np.array([k[0] for k in knots], dtype=float)
    dens = np.array([k[1] for k in knots], dtype=float)
    grid = np.linspace(ages[0], ages[-1], 2001)
    pdf = np.interp(grid, ages, dens)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(g.random(n), cdf, grid)


def build_population(cfg: PopulationConfig, seed: int,
                     horizon: tuple[dt.date, dt.date] = (dt.date(1985, 1, 1), dt.date(2019, 12, 31)),
                     geo_table: PlaceTable | None = None) -> Population:
    start, end = horizon
    n = cfg.size
    geo = geo_table if geo_table is not None else load_us_places(cfg.geo_table)
    core, completed, report = correlate_core(cfg, seed, n)
    col = {name: core[:, j] for j, name in enumerate(cfg.core_attributes)}
    pop_g = derive_stream(seed, ("population", "independent")).generator
    for name in TABLE_ATTRIBUTES:
        if name not in col and name not in FOREIGN_PROBS:
            col[name] = _draw_column(cfg.attr(name), pop_g, n)
    driver = col[cfg.foreign_travel_driver] if cfg.foreign_travel_driver in col else None
    for name in FOREIGN_PROBS:
        a = cfg.attr(name)
        s = derive_stream(seed, ("population", "couple", name))
        if driver is None:
            col[name] = _draw_column(a, s.generator, n)
        else:
            col[name] = monotone_couple(driver, a.dist, cfg.foreign_travel_strength, s, a.lo, a.hi)
    col["fico_score"] = np.rint(col["fico_score"])
    fico_attr = cfg.attr("fico_score")
    report["fico_out_of_range_mass"] = float(
        ndtr((fico_attr.lo - fico_attr.mean) / fico_attr.std_dev)
        + 1 - ndtr((fico_attr.hi - fico_attr.mean) / fico_attr.std_dev)) if fico_attr.std_dev else 0.0
    report["fico_clamp_rate"] = float(np.mean((col["fico_score"] <= 300) | (col["fico_score"] >= 850)))

    names = _names()
    occ_labels = [o[0] for o in names["occupations"]]
    occ_w = [o[1] for o in names["occupations"]]
    ages = _sample_ages(cfg.age_at_end_knots, derive_stream(seed, ("population", "ages")).generator, n)
    within = {a: cfg.attr(a).within_std for a in TABLE_ATTRIBUTES}
    ra = cfg.retirement_age
    profiles = []
    for i in range(n):
        s = derive_stream(seed, ("consumer", i, "bio")).generator
        male = bool(s.random() < cfg.gender_male_share)
        first = names["male" if male else "female"][int(s.integers(len(names["male" if male else "female"]))) ]
        last = names["last"][int(s.integers(len(names["last"])))]
        birth = end - dt.timedelta(days=int(round(ages[i] * 365.25)))
        home = assign_geography(derive_stream(seed, ("consumer", i, "geo")), geo)
        occupation = occ_labels[int(sample_categorical(s, occ_w))]
        retire_age = float(sample_truncated_gaussian(s, ra.mean, ra.std_dev, ra.lo, ra.hi))
        tpy = float(col["transactions_per_year"][i])
        tpy *= cfg.occupation_rate_multipliers.get(occupation, 1.0)
        entry = max(start, add_years(birth, 18.0))
        travel = TravelPropensity(
            weekend_getaways=float(col["mean_annual_weekend_getaways"][i]),
            vacations=float(col["mean_annual_vacations"][i]),
            vacation_duration=IndividualDistribution(float(col["mean_vacation_duration"][i]),
                                                     within["mean_vacation_duration"]),
            business_trips=float(col["mean_annual_business_trips"][i]),
            business_trip_duration=IndividualDistribution(float(col["mean_business_trip_duration"][i]),
                                                          within["mean_business_trip_duration"]),
            p_foreign_weekend_getaway=float(col["p_foreign_weekend_getaway"][i]),
            p_foreign_vacation=float(col["p_foreign_vacation"][i]),
            p_foreign_business_trip=float(col["p_foreign_business_trip"][i]),
        )
        profiles.append(ConsumerProfile(
            consumer_id=i,
            name=f"{first} {last}",
            gender="M" if male else "F",
            birth_date=birth,
            home=home,
            occupation=occupation,
            retirement_age=retire_age,
            annual_income=float(col["annual_income"][i]),
            fico_score=int(col["fico_score"][i]),
            debt_fraction_of_income=float(col["debt_fraction_of_income"][i]),
            transactions_per_year=IndividualDistribution(tpy, within["transactions_per_year"]),
            cards_per_consumer=float(col["cards_per_consumer"][i]),
            cards_per_account=float(col["cards_per_account"][i]),
            credit_limit=IndividualDistribution(float(col["credit_limit"][i]), within["credit_limit"]),
            balance_fraction_of_limit=IndividualDistribution(float(col["balance_fraction_of_limit"][i]),
                                                             within["balance_fraction_of_limit"]),
            years_account_open=IndividualDistribution(float(col["years_account_open"][i]),
                                                      within["years_account_open"]),
            years_since_pin_change=IndividualDistribution(float(col["years_since_pin_change"][i]),
                                                          within["years_since_pin_change"]),
            travel=travel,
            entry_date=entry,
        ))
    report["male_share"] = float(np.mean([p.gender == "M" for p in profiles]))
    return Population(profiles, completed, tuple(cfg.core_attributes), core, report)


def generate_population(cfg: PopulationConfig, seed: int,
                        horizon: tuple[dt.date, dt.date] = (dt.date(1985, 1, 1), dt.date(2019, 12, 31)),
                        geo_table: PlaceTable | None = None) -> list[ConsumerProfile]:
    return build_population(cfg, seed, horizon, geo_table).profiles


def with_preferences(profile: ConsumerProfile, prefs) -> ConsumerProfile:
    return replace(profile, preferences=prefs)


def format_bio(profile: ConsumerProfile, as_of: dt.date | None = None, cards: Sequence = ()) -> str:
    """Human-readable bio card: name, age, location, income, FICO, card count."""
    as_of = as_of or dt.date(2019, 12, 31)
    h = profile.home
    t = profile.travel
    lines = [
        f"{profile.name}  (consumer {profile.consumer_id})",
        f"  Gender: {profile.gender}    Born: {profile.birth_date.isoformat()}    "
        f"Age: {int(profile.age_on(as_of))}",
        f"  Home: {h.city}, {h.state} {h.zipcode}  ({h.latitude:.4f}, {h.longitude:.4f})",
        f"  Occupation: {profile.occupation}    Retirement age: {profile.retirement_age:.0f}",
        f"  Income: ${profile.annual_income:,.0f}/yr    FICO: {profile.fico_score}    "
        f"Debt/income: {profile.debt_fraction_of_income:.2f}",
        f"  Purchases/yr: {profile.transactions_per_year.indiv_mean:.0f}    "
        f"Vacations/yr: {t.vacations:.1f} ({t.vacation_duration.indiv_mean:.1f} days)    "
        f"Business trips/yr: {t.business_trips:.1f}",
        f"  Cards: {len(cards) if cards else profile.n_cards}",
    ]
    return "\n".join(lines)
