"""Run orchestration: build the world once, simulate consumers in shards, merge to CSV.

Every random decision is keyed by a stream path that names the consumer,
fraudster or world component it belongs to, never by worker or order of
execution, so the output bytes do not depend on how consumers are sharded.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import multiprocessing as mp
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cards import issue_cards
from .config import RunConfig
from .engine import (CandidateCache, Counters, build_context, day_number, resolve_collisions,
                     simulate_consumer)
from .fraud import FraudPlan, fraudster_transactions, plan_fraud, random_fraud
from .geo import load_us_places
from .iostats import (EST_BYTES_PER_ROW, RowFormatter, SpillStore, TransactionWriter, merge_spills, sha256_file,
                      write_bios, write_cards)
from .population import ConsumerProfile, Population, add_years, build_population
from .rand import derive_stream
from .world import GsCatalog, MerchantWorld, build_world, instantiate_preferences, load_catalog

log = logging.getLogger(__name__)

TX_FILE = "transactions.csv"
LABELS_FILE = "labels.csv"
BIOS_FILE = "bios.csv"
CARDS_FILE = "cards.csv"
MANIFEST_FILE = "manifest.json"


def expected_purchases(profile: ConsumerProfile, horizon: tuple[dt.date, dt.date], run: RunConfig) -> tuple:
    """(expected genuine purchases, active years) for one consumer over the horizon."""
    start = max(horizon[0], profile.entry_date)
    end = horizon[1]
    if start > end:
        return 0.0, 0.0
    retire = add_years(profile.birth_date, profile.retirement_age)
    extreme = add_years(profile.birth_date, run.population.extreme_age_threshold)
    a, b, r, x = (day_number(d) for d in (start, end, retire, extreme))
    days = b - a + 1
    retired_days = max(0, b - max(a, r) + 1)
    extreme_days = max(0, b - max(a, x) + 1)
    eng = run.engine
    # Extreme age starts after retirement in every sane configuration.
    weighted = (days - retired_days) + retired_days * eng.retirement_rate_multiplier
    weighted -= extreme_days * eng.retirement_rate_multiplier * (1 - eng.extreme_age_multiplier)
    rate = profile.transactions_per_year.indiv_mean / 365.25
    return rate * weighted, days / 365.25


@dataclass
class Prepared:
    """Everything shared by all workers, fixed before any consumer is simulated."""

    run: RunConfig
    catalog: GsCatalog
    world: MerchantWorld
    population: Population
    cards: dict
    plan: FraudPlan
    expected_genuine: float
    consumer_years: float
    timings: dict = field(default_factory=dict)

    @property
    def profiles(self) -> list:
        return self.population.profiles


def _catalog(run: RunConfig) -> GsCatalog:
    return load_catalog(run.catalog_path, run.mcc_path)


def build_population_and_cards(run: RunConfig):
    places = load_us_places(run.population.geo_table)
    pop = build_population(run.population, run.seed, run.horizon, places)
    cards = {p.consumer_id: issue_cards(p, run.population, run.horizon, run.cards, run.seed) for p in pop.profiles}
    return pop, cards, places


def estimate(run: RunConfig) -> dict:
    """Expected row counts and output size without simulating purchases."""
    pop = build_population(run.population, run.seed, run.horizon, load_us_places(run.population.geo_table))
    genuine, years = 0.0, 0.0
    for p in pop.profiles:
        e, y = expected_purchases(p, run.horizon, run)
        genuine += e
        years += y
    r = run.fraud.target_fraud_rate
    fraud = genuine * r / (1 - r) if r is not None else float("nan")
    rows = genuine + (fraud if r is not None else 0.0)
    return {
        "consumers": run.consumers,
        "years": run.years,
        "consumer_years": years,
        "expected_genuine_rows": genuine,
        "expected_fraud_rows": fraud,
        "expected_rows": rows,
        "bytes_per_row": EST_BYTES_PER_ROW,
        "expected_bytes": rows * EST_BYTES_PER_ROW,
    }


def prepare(run: RunConfig) -> Prepared:
    t0 = time.perf_counter()
    catalog = _catalog(run)
    pop, cards, places = build_population_and_cards(run)
    t1 = time.perf_counter()
    world = build_world(run.world, run.seed, catalog, places)
    t2 = time.perf_counter()
    genuine, years = 0.0, 0.0
    for p in pop.profiles:
        e, y = expected_purchases(p, run.horizon, run)
        genuine += e
        years += y
    plan = plan_fraud(run.fraud, pop.profiles, cards, genuine, years, run.seed, run.horizon, catalog, run.drift,
                      run.population)
    t3 = time.perf_counter()
    return Prepared(run, catalog, world, pop, cards, plan, genuine, years,
                    {"population": t1 - t0, "world": t2 - t1, "fraud_plan": t3 - t2})


def consumer_events(prep: Prepared, consumer_id: int, cache: CandidateCache, counters: Counters) -> np.ndarray:
    """Genuine and fraud events for one consumer, time-ordered with unique minutes."""
    run = prep.run
    seed = run.seed
    profile = prep.profiles[consumer_id]
    cards = prep.cards[consumer_id]
    prefs = instantiate_preferences(profile, prep.catalog, derive_stream(seed, ("consumer", consumer_id, "prefs")))
    ctx = build_context(profile, prefs, cards, prep.catalog, run.engine, run.population.extreme_age_threshold)
    parts = [simulate_consumer(ctx, prep.world, run.drift, run.engine, run.horizon, seed, cache, counters)]
    span = (max(day_number(run.horizon[0]), ctx.entry_day), day_number(run.horizon[1]))
    parts.append(random_fraud(consumer_id, cards, span, prep.plan.random_rate, run.drift, prep.world, prep.catalog,
                              run.fraud, cache, derive_stream(seed, ("consumer", consumer_id, "random-fraud"))))
    by_id = {c.card_id: c for c in cards}
    for comp in prep.plan.compromises_by_consumer.get(consumer_id, ()):
        fr = prep.plan.fraudsters[comp.fraudster_id]
        card = by_id[comp.card_id]
        s = derive_stream(seed, ("fraudster", comp.fraudster_id, "compromise", comp.seq))
        parts.append(fraudster_transactions(fr, comp, day_number(card.expiry_date), prep.world, prep.catalog,
                                            run.drift, run.fraud, run.engine, cache, s, run.horizon[1]))
    ev = np.concatenate(parts) if len(parts) > 1 else parts[0]
    return resolve_collisions(ev, derive_stream(seed, ("consumer", consumer_id, "collisions")).generator)


def iter_consumer_events(prep: Prepared, consumer_ids=None):
    """Yield ``(consumer_id, events)`` in memory, for analysis and tests."""
    cache = CandidateCache(prep.world, prep.catalog, prep.run.engine)
    counters = Counters()
    ids = range(len(prep.profiles)) if consumer_ids is None else consumer_ids
    for i in ids:
        yield i, consumer_events(prep, int(i), cache, counters)


def _run_shard(prep: Prepared, shard: int, n_shards: int, spill_dir: Path) -> dict:
    cache = CandidateCache(prep.world, prep.catalog, prep.run.engine)
    counters = Counters()
    store = SpillStore(spill_dir)
    for i in range(shard, len(prep.profiles), n_shards):
        store.add(consumer_events(prep, i, cache, counters))
    store.flush()
    return {"rows": store.rows, "counters": counters.as_dict()}


# Set in the parent before forking so workers inherit the prepared state without pickling it.
_SHARED: Prepared | None = None


def _fork_worker(args):
    shard, n_shards, spill_dir = args
    return _run_shard(_SHARED, shard, n_shards, Path(spill_dir))


def simulate_to_spills(prep: Prepared, spill_root: Path, workers: int) -> tuple[list, dict]:
    global _SHARED
    workers = max(1, min(workers, len(prep.profiles)))
    dirs = [spill_root / f"w{k:03d}" for k in range(workers)]
    if workers == 1:
        results = [_run_shard(prep, 0, 1, dirs[0])]
    else:
        _SHARED = prep
        try:
            ctx = mp.get_context("fork")
            with ctx.Pool(workers) as pool:
                results = pool.map(_fork_worker, [(k, workers, str(d)) for k, d in enumerate(dirs)])
        finally:
            _SHARED = None
    total = Counters()
    for r in results:
        total.add(Counters(**r["counters"]))
    return dirs, total.as_dict()


def _file_names(gz: bool) -> tuple[str, str]:
    suffix = ".gz" if gz else ""
    return TX_FILE + suffix, LABELS_FILE + suffix


def generate(run: RunConfig, out_dir=None, prep: Prepared | None = None) -> dict:
    """Run the whole pipeline and write the dataset plus ``manifest.json``; returns the manifest."""
    out = Path(out_dir if out_dir is not None else run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    prep = prep or prepare(run)
    log.info("prepared %d consumers, %d locations, %d fraudsters, %d compromises",
             len(prep.profiles), prep.world.n_locations, len(prep.plan.fraudsters), prep.plan.n_compromises)
    spill_root = out / ".spill"
    if spill_root.exists():
        shutil.rmtree(spill_root)
    tx_name, lab_name = _file_names(run.gzip)
    try:
        t1 = time.perf_counter()
        dirs, counters = simulate_to_spills(prep, spill_root, run.workers)
        t2 = time.perf_counter()
        fmt = RowFormatter(prep.world, prep.catalog)
        fraud_rows = 0
        with TransactionWriter(out / tx_name, out / lab_name, fmt, run.gzip) as w:
            for batch in merge_spills(dirs):
                fraud_rows += int((batch["fraud"] > 0).sum())
                w.write(batch)
        t3 = time.perf_counter()
    finally:
        shutil.rmtree(spill_root, ignore_errors=True)
    write_bios(out / BIOS_FILE, prep.profiles, prep.cards)
    write_cards(out / CARDS_FILE, prep.profiles, prep.cards)
    files = {name: sha256_file(out / name) for name in (tx_name, lab_name, BIOS_FILE, CARDS_FILE)}
    manifest = {
        "generator": "synthcard",
        "version": __version__,
        "config_hash": run.config_hash(),
        "seed": run.seed,
        "counts": {
            "consumers": len(prep.profiles),
            "cards": sum(len(v) for v in prep.cards.values()),
            "merchants": prep.world.n_merchants,
            "locations": prep.world.n_locations,
            "fraudsters": len(prep.plan.fraudsters),
            "compromised_cards": prep.plan.n_compromises,
            "transactions": w.rows,
            "fraud_transactions": fraud_rows,
            "labels": w.label_rows,
        },
        "counters": counters,
        "files": files,
        "config": run.content_dict(),
    }
    with open(out / MANIFEST_FILE, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    elapsed = time.perf_counter() - t0
    log.info("wrote %d rows in %.1fs (simulate %.1fs, merge+write %.1fs)", w.rows, elapsed, t2 - t1, t3 - t2)
    return manifest
