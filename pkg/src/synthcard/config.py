"""Run configuration: JSON ingestion, schema validation, defaults and overrides."""

from __future__ import annotations

import copy
import datetime as dt
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from typing import Any, Mapping

import jsonschema

from .cards import CardConfig
from .engine import DriftSchedule, EngineConfig
from .errors import ConfigError
from .fraud import FraudConfig
from .population import AttributeConfig, PopulationConfig
from .world import WorldConfig

# Fields that change how a run executes but not what it produces.
EXECUTION_KEYS = ("workers", "out_dir")


def _data_json(name: str) -> dict:
    with resources.files("synthcard").joinpath("data").joinpath(name).open(encoding="utf-8") as fh:
        return json.load(fh)


def default_config_dict() -> dict:
    return _data_json("default_config.json")


def config_schema() -> dict:
    return _data_json("config_schema.json")


def _strip_docs(d):
    if isinstance(d, dict):
        return {k: _strip_docs(v) for k, v in d.items() if not k.startswith("_")}
    if isinstance(d, list):
        return [_strip_docs(v) for v in d]
    return d


def deep_merge(base: dict, over: Mapping) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict) and k not in ("targets",):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _attr(d: Mapping) -> AttributeConfig:
    lo = -math.inf if d.get("lo") is None else float(d["lo"])
    hi = math.inf if d.get("hi") is None else float(d["hi"])
    return AttributeConfig(float(d["mean"]), float(d["std_dev"]), float(d.get("spread_fraction", 1.0)),
                           d.get("family", "gaussian"), lo, hi)


def _attr_dict(a: AttributeConfig) -> dict:
    return {"mean": a.mean, "std_dev": a.std_dev, "spread_fraction": a.spread_fraction, "family": a.family,
            "lo": None if math.isinf(a.lo) else a.lo, "hi": None if math.isinf(a.hi) else a.hi}


@dataclass(frozen=True)
class RunConfig:
    seed: int
    consumers: int
    start_year: int
    end_year: int
    out_dir: str
    workers: int
    gzip: bool
    population: PopulationConfig
    cards: CardConfig
    world: WorldConfig
    engine: EngineConfig
    drift: DriftSchedule
    fraud: FraudConfig
    catalog_path: str | None
    mcc_path: str | None
    targets: dict
    raw: dict = field(repr=False, compare=False, default_factory=dict)

    @property
    def horizon(self) -> tuple[dt.date, dt.date]:
        return dt.date(self.start_year, 1, 1), dt.date(self.end_year, 12, 31)

    @property
    def years(self) -> int:
        return self.end_year - self.start_year + 1

    def content_dict(self) -> dict:
        """The resolved config without execution-only keys (what the output depends on)."""
        return {k: v for k, v in self.raw.items() if k not in EXECUTION_KEYS}

    def config_hash(self) -> str:
        blob = json.dumps(self.content_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def apply_overrides(d: dict, overrides: Mapping[str, Any]) -> dict:
    """Apply CLI-style overrides; ``years`` sets ``end_year`` relative to ``start_year``."""
    out = copy.deepcopy(d)
    ov = {k: v for k, v in overrides.items() if v is not None}
    for key in ("seed", "consumers", "start_year", "end_year", "out_dir", "workers"):
        if key in ov:
            out[key] = ov[key]
    if "years" in ov:
        out["end_year"] = out["start_year"] + int(ov["years"]) - 1
    return out


def _validate_schema(d: dict) -> list:
    validator = jsonschema.Draft202012Validator(config_schema())
    problems = []
    for err in sorted(validator.iter_errors(d), key=lambda e: list(e.absolute_path)):
        path = ".".join(str(p) for p in err.absolute_path) or "(root)"
        problems.append((path, err.message))
    return problems


def build_run_config(d: Mapping) -> RunConfig:
    """Validate a full config dict (defaults already merged) and build the typed config.

    Every problem found is reported at once in the raised :class:`ConfigError`.
    """
    d = _strip_docs(dict(d))
    schema_problems = _validate_schema(d)
    problems: list = []
    try:
        parts = _build_parts(d, problems)
    except Exception:
        # Shapes the schema already rejected can break the semantic pass; the schema report covers them.
        if not schema_problems:
            raise
        parts = None
    if schema_problems or problems:
        seen = {p for p, _ in schema_problems}
        allp = schema_problems + [(p, m) for p, m in problems if p not in seen]
        raise ConfigError(f"{len(allp)} config problem(s)", allp)
    pop, cards, world, engine, drift, fraud = parts
    cat = d.get("catalog", {})
    return RunConfig(
        seed=int(d["seed"]), consumers=int(d["consumers"]), start_year=int(d["start_year"]),
        end_year=int(d["end_year"]), out_dir=str(d["out_dir"]), workers=int(d["workers"]), gzip=bool(d["gzip"]),
        population=pop, cards=cards, world=world, engine=engine, drift=drift, fraud=fraud,
        catalog_path=cat.get("gs_catalog"), mcc_path=cat.get("mcc_table"),
        targets=dict(d.get("targets", {})), raw=d,
    )


def _build_parts(d: dict, problems: list) -> tuple:
    """Typed sub-configs; semantic problems are appended to ``problems``."""
    if d["start_year"] > d["end_year"]:
        problems.append(("end_year", "must be >= start_year"))

    def attempt(label, fn):
        try:
            return fn()
        except ConfigError as e:
            problems.extend(e.problems)
        except (ValueError, TypeError, KeyError) as e:
            problems.append((label, str(e)))
        return None

    p = d["population"]
    pop = attempt("population", lambda: PopulationConfig(
        size=d["consumers"],
        gender_male_share=p["gender_male_share"],
        age_at_end_knots=tuple(tuple(k) for k in p["age_at_end_knots"]),
        retirement_age=_attr(p["retirement_age"]),
        extreme_age_threshold=p["extreme_age_threshold"],
        attributes={k: _attr(v) for k, v in p["attributes"].items()},
        core_attributes=tuple(p["core_attributes"]),
        correlations=tuple((a, b, float(r)) for a, b, r in p["correlations"]),
        max_correlation_shift=p["max_correlation_shift"],
        foreign_travel_driver=p["foreign_travel_driver"],
        foreign_travel_strength=p["foreign_travel_strength"],
        occupation_rate_multipliers=dict(p["occupation_rate_multipliers"]),
        geo_table=p.get("geo_table"),
    ))
    dr = d["drift"]
    drift = attempt("drift", lambda: DriftSchedule(
        online_share_knots=tuple(tuple(k) for k in dr["online_share_knots"]),
        chip_intro_year=dr["chip_intro_year"],
        chip_ramp_years=dr["chip_ramp_years"],
        online_fraud_share_knots=tuple(tuple(k) for k in dr["online_fraud_share_knots"]),
    ))
    c = d["cards"]
    cards = attempt("cards", lambda: CardConfig(
        kind_mix=dict(c["kind_mix"]),
        validity_years=c["validity_years"],
        chip_intro_date=dt.date(dr["chip_intro_year"], 1, 1),
        chip_ramp_years=dr["chip_ramp_years"],
        prepaid_load_mean=c["prepaid_load_mean"],
        prepaid_load_std=c["prepaid_load_std"],
        min_credit_limit=c["min_credit_limit"],
        iin_table=c.get("iin_table"),
    ))
    w = d["world"]
    world = attempt("world", lambda: WorldConfig(
        **{k: v for k, v in w.items() if k != "mcc_sales_weights"},
        mcc_sales_weights={int(k): float(v) for k, v in w["mcc_sales_weights"].items()}
        if w.get("mcc_sales_weights") else None))
    if world is not None:
        problems.extend(world.problems())
    e = d["engine"]
    engine = attempt("engine", lambda: EngineConfig(
        **{k: v for k, v in e.items() if k != "cash_share_knots"},
        cash_share_knots=tuple(tuple(k) for k in e["cash_share_knots"])))
    fraud = attempt("fraud", lambda: FraudConfig(**d["fraud"]))
    if fraud is not None:
        problems.extend(fraud.problems())
    for name, t in d.get("targets", {}).items():
        if t.get("tolerance", 0) < 0:
            problems.append((f"targets.{name}.tolerance", "must be >= 0"))
    return pop, cards, world, engine, drift, fraud


def load_config(path=None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Load a config (or a run manifest, which embeds its config), merge defaults, apply overrides."""
    user: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: not valid JSON ({e})", [("(file)", str(e))]) from None
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be an object", [("(root)", "not an object")])
        if "config" in user and "files" in user:  # a run manifest
            user = user["config"]
    merged = deep_merge(_strip_docs(default_config_dict()), _strip_docs(user))
    merged = apply_overrides(merged, overrides or {})
    return build_run_config(merged)


def defaults_from_code() -> dict:
    """The default config dict derived from the dataclass defaults (used to regenerate the JSON file)."""
    pop = PopulationConfig()
    dr = DriftSchedule()
    cards = CardConfig()
    eng = EngineConfig()
    world = WorldConfig()
    return {
        "seed": 7,
        "consumers": 200,
        "start_year": 1985,
        "end_year": 2019,
        "out_dir": "out",
        "workers": 1,
        "gzip": False,
        "population": {
            "gender_male_share": pop.gender_male_share,
            "age_at_end_knots": [list(k) for k in pop.age_at_end_knots],
            "retirement_age": _attr_dict(pop.retirement_age),
            "extreme_age_threshold": pop.extreme_age_threshold,
            "attributes": {k: _attr_dict(v) for k, v in pop.attributes.items()},
            "core_attributes": list(pop.core_attributes),
            "correlations": [list(t) for t in pop.correlations],
            "max_correlation_shift": pop.max_correlation_shift,
            "foreign_travel_driver": pop.foreign_travel_driver,
            "foreign_travel_strength": pop.foreign_travel_strength,
            "occupation_rate_multipliers": {},
            "geo_table": None,
        },
        "cards": {
            "kind_mix": dict(cards.kind_mix),
            "validity_years": cards.validity_years,
            "prepaid_load_mean": cards.prepaid_load_mean,
            "prepaid_load_std": cards.prepaid_load_std,
            "min_credit_limit": cards.min_credit_limit,
            "iin_table": None,
        },
        "world": {f.name: getattr(world, f.name) for f in fields(world)},
        "engine": {f.name: (list(map(list, getattr(eng, f.name))) if f.name == "cash_share_knots"
                            else getattr(eng, f.name)) for f in fields(eng)},
        "drift": {
            "online_share_knots": [list(k) for k in dr.online_share_knots],
            "chip_intro_year": dr.chip_intro_year,
            "chip_ramp_years": dr.chip_ramp_years,
            "online_fraud_share_knots": [list(k) for k in dr.online_fraud_share_knots],
        },
        "fraud": asdict(FraudConfig()),
        "catalog": {"gs_catalog": None, "mcc_table": None},
        "targets": {
            "bio.fico_score.mean": {"target": 712.0, "tolerance": 5.0},
            "bio.male_share": {"target": 0.5, "tolerance": 0.045},
            "fraud.online_share_2016_on": {"target": 0.70, "tolerance": 0.05},
            "fraud.rate": {"target": 0.001, "tolerance": 0.0003},
        },
    }
