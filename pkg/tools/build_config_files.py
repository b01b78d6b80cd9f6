"""Regenerate data/default_config.json and data/config_schema.json.

The default file is derived from the dataclass defaults so the two cannot
drift apart; ``_doc`` keys annotate each section and are ignored on load.
"""

import json
from pathlib import Path

from synthcard.config import defaults_from_code

DATA = Path(__file__).resolve().parents[1] / "src" / "synthcard" / "data"

DOCS = {
    "_doc": "Default run configuration. Keys starting with '_' are comments. CLI flags override the "
            "top-level scalars; 'years' on the command line sets end_year = start_year + years - 1.",
    "population": {
        "_doc": "Consumer generation. Each attribute has population mean/std_dev, the share of variance that "
                "sits between individuals (spread_fraction; the rest is within-person), a family "
                "(gaussian is truncated to [lo, hi] by resampling; lognormal uses arithmetic moments) and bounds. "
                "age_at_end_knots is a piecewise-linear density over age at the end of the horizon. "
                "correlations are [a, b, rho] triples over core_attributes; pairs not listed are 0. "
                "max_correlation_shift caps how far PSD repair may move any entry (null: report only).",
    },
    "cards": {"_doc": "Card issuance. kind_mix is the per-account share of Credit/Debit/Prepaid. "
                      "Chip timing comes from the drift section."},
    "world": {"_doc": "Merchant world scale. mcc_sales_weights (MCC -> weight) overrides the embedded "
                      "sales weights; null uses the defaults."},
    "engine": {"_doc": "Purchase simulation. Distances in km, cash_threshold in USD, knots are "
                       "[fractional year, value]."},
    "drift": {"_doc": "Era curves: online purchase share, online share of fraud, chip introduction."},
    "fraud": {"_doc": "Fraud injection. target_fraud_rate (fraud rows / all rows) auto-sizes both mechanisms; "
                      "set it to null to use n_fraudsters and random_fraud_rate directly. fraudster_share is the "
                      "share of fraud rows from fraudsters (the rest are one-off random events)."},
    "catalog": {"_doc": "Optional paths to replacement goods/services and MCC tables (JSON)."},
    "targets": {"_doc": "Calibration targets for 'synthcard validate': metric -> {target, tolerance}."},
}

KNOTS = {"type": "array", "minItems": 1,
         "items": {"type": "array", "prefixItems": [{"type": "number"}, {"type": "number", "minimum": 0}],
                   "minItems": 2, "maxItems": 2}}
NUM = {"type": "number"}
NONNEG = {"type": "number", "minimum": 0}
PROB = {"type": "number", "minimum": 0, "maximum": 1}
INT1 = {"type": "integer", "minimum": 1}
OPT_STR = {"type": ["string", "null"]}
ATTRIBUTE = {
    "type": "object",
    "required": ["mean", "std_dev"],
    "additionalProperties": False,
    "properties": {
        "mean": NUM, "std_dev": NONNEG, "spread_fraction": PROB,
        "family": {"enum": ["gaussian", "lognormal"]},
        "lo": {"type": ["number", "null"]}, "hi": {"type": ["number", "null"]},
    },
}


def section(props, required=None):
    return {"type": "object", "additionalProperties": False, "properties": props,
            "required": required if required is not None else list(props)}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "synthcard run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["seed", "consumers", "start_year", "end_year", "out_dir", "workers", "gzip", "population",
                 "cards", "world", "engine", "drift", "fraud"],
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "consumers": INT1,
        "start_year": {"type": "integer", "minimum": 1900, "maximum": 2200},
        "end_year": {"type": "integer", "minimum": 1900, "maximum": 2200},
        "out_dir": {"type": "string", "minLength": 1},
        "workers": INT1,
        "gzip": {"type": "boolean"},
        "population": section({
            "gender_male_share": PROB,
            "age_at_end_knots": KNOTS,
            "retirement_age": ATTRIBUTE,
            "extreme_age_threshold": NONNEG,
            "attributes": {"type": "object", "additionalProperties": ATTRIBUTE},
            "core_attributes": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
            "correlations": {"type": "array", "items": {
                "type": "array", "minItems": 3, "maxItems": 3,
                "prefixItems": [{"type": "string"}, {"type": "string"}, NUM]}},
            "max_correlation_shift": {"type": ["number", "null"], "minimum": 0},
            "foreign_travel_driver": {"type": "string"},
            "foreign_travel_strength": PROB,
            "occupation_rate_multipliers": {"type": "object", "additionalProperties": NONNEG},
            "geo_table": OPT_STR,
        }, required=[]),
        "cards": section({
            "kind_mix": {"type": "object", "additionalProperties": NONNEG,
                         "propertyNames": {"enum": ["Credit", "Debit", "Prepaid"]}},
            "validity_years": INT1,
            "prepaid_load_mean": NONNEG,
            "prepaid_load_std": NONNEG,
            "min_credit_limit": NONNEG,
            "iin_table": OPT_STR,
        }, required=[]),
        "world": section({
            "total_locations": INT1,
            "n_multinationals": {"type": "integer", "minimum": 0},
            "min_locations_per_multinational": INT1,
            "min_countries_per_multinational": INT1,
            "multinational_location_share": PROB,
            "multinational_online_share": PROB,
            "local_online_share": PROB,
            "local_foreign_share": PROB,
            "local_min_per_mcc": {"type": "integer", "minimum": 0},
            "jitter_km": NONNEG,
            "mcc_sales_weights": {"type": ["object", "null"], "additionalProperties": NONNEG},
        }, required=[]),
        "engine": section({
            "max_radius_km": {"type": "number", "exclusiveMinimum": 0},
            "distance_decay_km": {"type": "number", "exclusiveMinimum": 0},
            "k_candidates": INT1,
            "favorite_multiplier": NONNEG,
            "cash_threshold": NONNEG,
            "cash_share_knots": KNOTS,
            "retirement_rate_multiplier": NONNEG,
            "retirement_weekday_flattening": PROB,
            "extreme_age_multiplier": NONNEG,
            "getaway_extra_day_prob": PROB,
            "max_trip_attempts": INT1,
            "max_travel_day_share": PROB,
        }, required=[]),
        "drift": section({
            "online_share_knots": KNOTS,
            "chip_intro_year": {"type": "integer"},
            "chip_ramp_years": NONNEG,
            "online_fraud_share_knots": KNOTS,
        }, required=[]),
        "fraud": section({
            "target_fraud_rate": {"type": ["number", "null"], "minimum": 0, "exclusiveMaximum": 1},
            "fraudster_share": PROB,
            "n_fraudsters": {"type": ["integer", "null"], "minimum": 0},
            "acquisition_rate_per_month": NONNEG,
            "random_fraud_rate": NONNEG,
            "active_min_days": {"type": "number", "exclusiveMinimum": 0},
            "active_max_days": {"type": "number", "exclusiveMinimum": 0},
            "burst_mean": {"type": "number", "minimum": 1},
            "intensity_mean": {"type": "number", "exclusiveMinimum": 0},
            "locality_km": {"type": "number", "exclusiveMinimum": 0},
            "amount_mean": {"type": "number", "exclusiveMinimum": 0},
            "amount_std": NONNEG,
            "fraudster_spend_multiplier": NONNEG,
        }, required=[]),
        "catalog": section({"gs_catalog": OPT_STR, "mcc_table": OPT_STR}, required=[]),
        "targets": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["target", "tolerance"], "additionalProperties": False,
            "properties": {"target": NUM, "tolerance": NUM}}},
    },
}


def annotated_defaults() -> dict:
    d = defaults_from_code()
    out = {"_doc": DOCS["_doc"]}
    for k, v in d.items():
        if isinstance(v, dict) and k in DOCS:
            out[k] = {"_doc": DOCS[k]["_doc"], **v}
        else:
            out[k] = v
    return out


def main():
    (DATA / "default_config.json").write_text(json.dumps(annotated_defaults(), indent=2) + "\n")
    (DATA / "config_schema.json").write_text(json.dumps(SCHEMA, indent=2) + "\n")


if __name__ == "__main__":
    main()
