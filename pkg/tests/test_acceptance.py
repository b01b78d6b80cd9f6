"""End-to-end acceptance checks, one test per criterion.

Each test reports through the ``record`` fixture, so the terminal summary ends
with one PASS/FAIL line per criterion. The desk-scale dataset (200 consumers
over 35 years) is generated once per module and reused by the scans.
"""

import csv
import datetime as dt
import hashlib
import json
import math
import re
import subprocess
import sys
import textwrap
import time

import numpy as np
import pytest
from scipy import stats

from synthcard.config import load_config
from synthcard.correlate import AttributeMatrix, CorrelationSpec, complete_to_psd, impose_correlation
from synthcard.engine import (CHANNEL_NAMES, CHIP, MINUTES_PER_DAY, ONLINE, CandidateCache, Counters, build_context,
                              day_number, day_states, plan_travel)
from synthcard.fraud import MECH_FRAUDSTER, MECH_RANDOM, random_fraud
from synthcard.geo import haversine_km, load_us_places
from synthcard.iostats import TX_COLUMNS, summarize
from synthcard.pipeline import estimate, generate, iter_consumer_events, prepare
from synthcard.population import add_years, build_population
from synthcard.rand import IndividualDistribution, PopulationDistribution, derive_stream, individualize_many
from synthcard.world import WorldConfig, brute_force_nearest, build_world, instantiate_preferences, load_catalog, \
    nearby_locations

FILES = ("transactions.csv", "labels.csv", "bios.csv", "cards.csv")


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


# --- shared desk-scale run -----------------------------------------------------------------------

@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    """200 consumers x 35 years, single worker, default seed."""
    run = load_config(overrides={"consumers": 200, "workers": 1})
    prep = prepare(run)
    out = tmp_path_factory.mktemp("desk1")
    t0 = time.perf_counter()
    manifest = generate(run, out, prep=prep)
    return run, prep, out, manifest, time.perf_counter() - t0


@pytest.fixture(scope="module")
def desk_events(desk):
    """The same events held in memory, in file order."""
    _, prep, _, _, _ = desk
    ev = np.concatenate([e for _, e in iter_consumer_events(prep)])
    return ev[np.lexsort((ev["consumer"], ev["ts"]))]


@pytest.fixture(scope="module")
def desk_rows(desk):
    """Column arrays parsed straight from transactions.csv."""
    _, _, out, _, _ = desk
    cols = {k: [] for k in ("transaction_id", "consumer_id", "card_id", "timestamp", "amount", "channel",
                            "is_fraud")}
    idx = {k: TX_COLUMNS.index(k) for k in cols}
    with open(out / "transactions.csv", newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        assert tuple(next(r)) == TX_COLUMNS
        for row in r:
            for k, i in idx.items():
                cols[k].append(row[i])
    return {
        "id": np.array(cols["transaction_id"], dtype=np.int64),
        "consumer": np.array(cols["consumer_id"], dtype=np.int64),
        "card": np.array([int(c) if c else -1 for c in cols["card_id"]], dtype=np.int64),
        "ts": np.array(cols["timestamp"], dtype="datetime64[m]").astype(np.int64),
        "amount": np.round(np.array(cols["amount"], dtype=float) * 100).astype(np.int64),
        "channel": np.array([CHANNEL_NAMES.index(c) for c in cols["channel"]], dtype=np.int64),
        "is_fraud": np.array(cols["is_fraud"], dtype=np.int64),
    }


def _read_dicts(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# --- 1, 2: population calibration ----------------------------------------------------------------

@pytest.fixture(scope="module")
def population_2000():
    run = load_config(overrides={"consumers": 2000})
    t0 = time.perf_counter()
    pop = build_population(run.population, run.seed, run.horizon, load_us_places(run.population.geo_table))
    return pop, time.perf_counter() - t0


def test_01_fico_calibration(record, population_2000):
    pop, secs = population_2000
    fico = np.array([p.fico_score for p in pop.profiles], dtype=float)
    ok = len(fico) == 2000 and abs(fico.mean() - 712) <= 5 and secs < 10
    record(1, "FICO calibration", ok, f"mean {fico.mean():.2f} (712 +/- 5), population built in {secs:.2f}s (< 10s)")


def test_02_gender_balance(record, population_2000):
    pop, _ = population_2000
    male = np.mean([p.gender == "M" for p in pop.profiles])
    record(2, "Gender balance", abs(male - 0.5) <= 0.045, f"male share {male:.4f} (0.50 +/- 0.045, n=2000)")


# --- 3: online fraud share -----------------------------------------------------------------------

def test_03_online_fraud_share(record, tmp_path):
    cfg = tmp_path / "recent.json"
    cfg.write_text(json.dumps({"consumers": 250, "start_year": 2016, "end_year": 2019, "seed": 3,
                               "fraud": {"target_fraud_rate": 0.03}}))
    run = load_config(cfg)
    out = tmp_path / "recent"
    generate(run, out)
    rep = summarize(out)
    share = rep["metrics"]["fraud.online_share_2016_on"]["value"]
    n = rep["transactions"]["fraud"]["count"]
    ok = n >= 5000 and share is not None and abs(share - 0.70) <= 0.03
    record(3, "Online fraud share", ok, f"{share:.4f} over {n} fraud rows from 2016 on (0.70 +/- 0.03, n >= 5000)")


# --- 4: era gates ------------------------------------------------------------------------------------

def test_04_era_gates(record, desk, desk_rows):
    run = desk[0]
    online_start = day_number(dt.date(int(math.ceil(run.drift.online_start_year)), 1, 1)) * MINUTES_PER_DAY
    chip_start = day_number(run.drift.chip_intro_date) * MINUTES_PER_DAY
    early_online = int(np.sum((desk_rows["channel"] == ONLINE) & (desk_rows["ts"] < online_start)))
    early_chip = int(np.sum((desk_rows["channel"] == CHIP) & (desk_rows["ts"] < chip_start)))
    n = len(desk_rows["ts"])
    record(4, "Era gates", n > 0 and early_online == 0 and early_chip == 0,
           f"{n} rows scanned: {early_online} online before {int(run.drift.online_start_year)}, "
           f"{early_chip} chip before {run.drift.chip_intro_year}")


# --- 5, 6: correlation engine ----------------------------------------------------------------------

def test_05_correlation_engine(record):
    g = np.random.default_rng(2024)
    x = g.normal(np.arange(1, 9), np.arange(1, 9), size=(10_000, 8))
    a = g.standard_normal((8, 10))
    cov = a @ a.T
    d = np.sqrt(np.diag(cov))
    target = cov / d[:, None] / d[None, :]
    assert np.linalg.eigvalsh(target).min() > 0
    t0 = time.perf_counter()
    out = impose_correlation(AttributeMatrix(x, [f"c{i}" for i in range(8)]), target)
    secs = time.perf_counter() - t0
    err = np.abs(np.corrcoef(out.columns, rowvar=False) - target).max()
    mean_rel = np.abs(out.columns.mean(axis=0) / x.mean(axis=0) - 1).max()
    std_rel = np.abs(out.columns.std(axis=0) / x.std(axis=0) - 1).max()
    ok = err <= 1e-4 and mean_rel <= 1e-6 and std_rel <= 1e-6 and secs < 1
    record(5, "Correlation engine", ok, f"max |err| {err:.2e}, mean rel {mean_rel:.1e}, std rel {std_rel:.1e}, "
                                        f"{secs * 1000:.0f} ms")


def test_06_psd_repair(record):
    spec = CorrelationSpec.from_triples("abc", [("a", "b", 0.9), ("b", "c", 0.9), ("a", "c", -0.9)])
    m = complete_to_psd(spec, max_shift=None).matrix
    lo = float(np.linalg.eigvals(m).real.min())
    ok = lo >= -1e-8 and np.allclose(np.diag(m), 1.0)
    record(6, "PSD repair", ok, f"min eigenvalue {lo:.3e} (>= -1e-8)")


# --- 7: Luhn -----------------------------------------------------------------------------------------

def _luhn_brute_force(pan: str) -> bool:
    """The final digit must be the one check digit (out of ten) that makes the doubled-digit sum a multiple of 10."""
    if not pan.isdigit() or len(pan) < 2:
        return False
    body = pan[:-1]
    fits = []
    for check in range(10):
        total = 0
        for pos, ch in enumerate(reversed(body + str(check))):
            v = int(ch) * (2 if pos % 2 else 1)
            total += v // 10 + v % 10
        if total % 10 == 0:
            fits.append(check)
    return fits == [int(pan[-1])]


def test_07_luhn_validity(record, desk):
    pans = [r["pan"] for r in _read_dicts(desk[2] / "cards.csv")]
    bad = [p for p in pans if not _luhn_brute_force(p)]
    record(7, "Luhn validity", pans and not bad, f"{len(pans) - len(bad)}/{len(pans)} PANs valid")


# --- 8: determinism -------------------------------------------------------------------------------------

def test_08_determinism(record, desk, tmp_path):
    run, _, out1, _, _ = desk
    out8 = tmp_path / "eight"
    generate(load_config(overrides={"consumers": 200, "workers": 8}), out8)
    diff = [f for f in FILES if _sha(out1 / f) != _sha(out8 / f)]
    record(8, "Determinism", not diff, "1 vs 8 workers: " + ("all four CSVs byte-identical" if not diff
                                                             else f"differ: {diff}"))


# --- 9: variance decomposition ----------------------------------------------------------------------

def test_09_variance_decomposition(record):
    pop = PopulationDistribution(100.0, 20.0, 0.5)
    g = derive_stream(99, ("acceptance", "variance")).generator
    n_ind, n_ev = 4000, 25
    means, within = individualize_many(pop, g, n_ind)
    events = means[:, None] + within * g.standard_normal((n_ind, n_ev))
    sigma2 = pop.std_dev ** 2
    # Oracle: pooled variance is sigma^2, between-individual variance is spread_fraction * sigma^2.
    pooled, between = events.var(ddof=1), means.var(ddof=1)
    se = math.sqrt(2.0 / (n_ind - 1))
    z_pooled = (pooled - sigma2) / (sigma2 * se)
    z_between = (between - 0.5 * sigma2) / (0.5 * sigma2 * se)
    ok = abs(z_pooled) <= 3 and abs(z_between) <= 3
    record(9, "Variance decomposition", ok, f"pooled z={z_pooled:+.2f}, between z={z_between:+.2f} (|z| <= 3)")


# --- 10: spatial oracle ---------------------------------------------------------------------------------

def test_10_spatial_oracle(record):
    world = build_world(WorldConfig(total_locations=10_000, n_multinationals=60), 5, load_catalog())
    g = np.random.default_rng(10)
    codes = np.unique(world.loc_mcc)
    mismatches = 0
    for _ in range(100):
        p = world.loc_place[int(g.integers(world.n_locations))]
        point = (world.places.lat[p] + g.normal(0, 1.0), world.places.lon[p] + g.normal(0, 1.0))
        mccs = set(int(c) for c in g.choice(codes, int(g.integers(1, 4)), replace=False))
        k = int(g.integers(1, 12))
        ids, _, _ = nearby_locations(world, point, mccs, k)
        mismatches += set(ids.tolist()) != set(brute_force_nearest(world, point, mccs, k).tolist())
    record(10, "Spatial oracle", mismatches == 0 and world.n_locations == 10_000,
           f"{100 - mismatches}/100 queries match brute-force k-NN exactly")


# --- 11: temporal soundness -----------------------------------------------------------------------------

def test_11_temporal_soundness(record, desk, desk_rows, desk_events):
    run, prep, out, _, _ = desk
    ts, consumer, card = desk_rows["ts"], desk_rows["consumer"], desk_rows["card"]
    day = ts // MINUTES_PER_DAY

    # File scan: card validity, entry date and age 18, from cards.csv and bios.csv alone.
    cards = _read_dicts(out / "cards.csv")
    max_card = max(int(c["card_id"]) for c in cards)
    acq = np.full(max_card + 1, np.iinfo(np.int64).max)
    exp = np.full(max_card + 1, np.iinfo(np.int64).min)
    for c in cards:
        mm, yyyy = (int(v) for v in c["expiry"].split("/"))
        last = dt.date(yyyy + (mm == 12), mm % 12 + 1, 1) - dt.timedelta(days=1)
        acq[int(c["card_id"])] = day_number(dt.date.fromisoformat(c["acquired_date"]))
        exp[int(c["card_id"])] = day_number(last)
    has = card >= 0
    bad_card = int(np.sum((day[has] < acq[card[has]]) | (day[has] > exp[card[has]])))
    bios = _read_dicts(out / "bios.csv")
    entry = np.zeros(len(bios), dtype=np.int64)
    adult = np.zeros(len(bios), dtype=np.int64)
    for b in bios:
        birth = dt.date.fromisoformat(b["birth_date"])
        entry[int(b["consumer_id"])] = day_number(dt.date.fromisoformat(b["entry_date"]))
        adult[int(b["consumer_id"])] = day_number(add_years(birth, 18.0))
    bad_entry = int(np.sum(day < entry[consumer]))
    bad_age = int(np.sum(day < adult[consumer]))

    # The in-memory events are the file's rows; check that, then use them for the travel check.
    same = all(np.array_equal(desk_events[k], desk_rows[k]) for k in ("consumer", "card", "ts", "amount",
                                                                       "channel"))
    same = same and np.array_equal((desk_events["fraud"] > 0).astype(np.int64), desk_rows["is_fraud"])

    # Genuine in-person rows happen at the day's place (trip destination or home) and within the radius.
    w = prep.world
    max_r = run.engine.max_radius_km
    bad_place = bad_radius = travel_rows = 0
    end = day_number(run.horizon[1])
    ev_day = desk_events["ts"] // MINUTES_PER_DAY
    in_person = (desk_events["fraud"] == 0) & (desk_events["location"] >= 0)
    for i, p in enumerate(prep.profiles):
        sel = in_person & (desk_events["consumer"] == i)
        if not sel.any():
            continue
        prefs = instantiate_preferences(p, prep.catalog, derive_stream(run.seed, ("consumer", i, "prefs")))
        ctx = build_context(p, prefs, prep.cards[i], prep.catalog, run.engine, run.population.extreme_age_threshold)
        start = max(day_number(run.horizon[0]), ctx.entry_day)
        _, mode, place, _, _ = day_states(ctx, start, end, w, run.engine, run.seed, Counters())
        e = desk_events[sel]
        k = ev_day[sel] - start
        bad_place += int(np.sum(e["place"] != place[k]))
        travel_rows += int(np.sum(mode[k] != 0))
        d = haversine_km(w.places.lat[place[k]], w.places.lon[place[k]], w.loc_lat[e["location"]],
                         w.loc_lon[e["location"]])
        bad_radius += int(np.sum(d > max_r + 1e-6))
    ok = same and bad_card == bad_entry == bad_age == bad_place == bad_radius == 0 and travel_rows > 0
    record(11, "Temporal soundness", ok,
           f"{len(ts)} rows: {bad_card} outside card validity, {bad_entry} before entry, {bad_age} under 18; "
           f"{travel_rows} travel-day in-person rows, {bad_place} off-place, {bad_radius} beyond {max_r:.0f} km")


# --- 12: rate calibration ---------------------------------------------------------------------------------

def test_12_rate_calibration(record, desk, desk_events):
    run, prep, _, _, _ = desk
    attr = run.population.attributes["transactions_per_year"]
    std = attr.std_dev * math.sqrt(attr.spread_fraction)
    a, b = (attr.lo - attr.mean) / std, (attr.hi - attr.mean) / std
    target = stats.truncnorm(a, b, loc=attr.mean, scale=std).mean()

    genuine = desk_events[desk_events["fraud"] == 0]
    year = genuine["ts"].astype("datetime64[m]").astype("datetime64[Y]").astype(int) + 1970
    per_consumer, consumer_years = [], 0
    for i, p in enumerate(prep.profiles):
        retire = day_number(add_years(p.birth_date, p.retirement_age))
        extreme = day_number(add_years(p.birth_date, run.population.extreme_age_threshold))
        entry = day_number(p.entry_date)
        counts = []
        mine = year[genuine["consumer"] == i]
        for y in range(run.start_year, run.end_year + 1):
            lo, hi = day_number(dt.date(y, 1, 1)), day_number(dt.date(y, 12, 31))
            if lo >= entry and hi < retire and hi < extreme:
                counts.append(int(np.sum(mine == y)))
        if counts:
            per_consumer.append(np.mean(counts))
            consumer_years += len(counts)
    per_consumer = np.array(per_consumer)
    pooled = per_consumer.mean()
    se = per_consumer.std(ddof=1) / math.sqrt(len(per_consumer))
    z = (pooled - target) / se

    bar = next(k for k, it in enumerate(prep.catalog.items) if it.name == "bar drinks")
    seg = genuine["segment"][genuine["gs"] == bar]
    night, morning = int(np.sum(seg == 2)), int(np.sum(seg == 0))
    ok = consumer_years >= 2000 and abs(z) <= 4 and night > morning
    record(12, "Rate calibration", ok,
           f"{pooled:.1f}/yr vs target {target:.1f} over {consumer_years} consumer-years, z={z:+.2f} (|z| <= 4); "
           f"bar night {night} > morning {morning}")


# --- 13: Poisson / exponential oracles ------------------------------------------------------------------

def test_13_poisson_exponential(record, small_prep):
    run = small_prep.run
    end = day_number(run.horizon[1])
    chosen = None
    for i, cs in small_prep.cards.items():
        a = day_number(small_prep.profiles[i].entry_date)
        covered = np.zeros(end - a + 1, dtype=bool)
        for c in cs:
            lo, hi = max(day_number(c.acquired_date), a), min(day_number(c.expiry_date), end)
            if lo <= hi:
                covered[lo - a: hi - a + 1] = True
        if covered.all() and (chosen is None or a < chosen[1][0]):
            chosen = (i, (a, end))
    i, span = chosen
    years = (span[1] - span[0] + 1) / 365.25
    cache = CandidateCache(small_prep.world, small_prep.catalog, run.engine)
    ev = random_fraud(i, small_prep.cards[i], span, 10_500 / years, run.drift, small_prep.world, small_prep.catalog,
                      run.fraud, cache, derive_stream(13, ("acceptance", "mech2")))
    gaps = np.diff(np.sort(ev["ts"])).astype(float)
    ks = stats.kstest(gaps, stats.expon(scale=gaps.mean()).cdf).statistic

    import dataclasses
    p = small_prep.profiles[0]
    p = dataclasses.replace(p, travel=dataclasses.replace(
        p.travel, vacations=2.0, weekend_getaways=1.5, business_trips=0.0,
        vacation_duration=IndividualDistribution(3.0, 0.0)))
    n_years, trips = 1000, 0
    for k in range(n_years):
        trips += len(plan_travel(p, 2003, derive_stream(13, ("acceptance", "trips", k)), small_prep.world))
    mean = 3.5 * n_years
    z = (trips - mean) / math.sqrt(mean)
    ok = len(ev) >= 10_000 and ks < 0.02 and abs(z) <= 4
    record(13, "Poisson/exponential oracles", ok,
           f"mech-2 KS {ks:.4f} at n={len(ev)} (< 0.02); {trips} trips vs Poisson mean {mean:.0f}, z={z:+.2f}")


# --- 14: throughput, memory and size estimate ------------------------------------------------------------

THROUGHPUT_SCRIPT = textwrap.dedent("""
    import json, resource, sys, time
    from synthcard.config import load_config
    from synthcard.pipeline import generate
    run = load_config(overrides={"consumers": int(sys.argv[1]), "workers": 1})
    t0 = time.perf_counter()
    m = generate(run, sys.argv[2])
    secs = time.perf_counter() - t0
    # VmHWM belongs to this process image; ru_maxrss would carry over the forking parent's peak.
    try:
        with open("/proc/self/status") as fh:
            rss_mb = next(int(l.split()[1]) for l in fh if l.startswith("VmHWM:")) / 1024
    except (OSError, StopIteration):
        rss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(json.dumps({"rows": m["counts"]["transactions"], "seconds": secs, "rss_mb": rss_mb}))
""")


def test_14_throughput_memory_and_estimate(record, desk, tmp_path):
    run, _, out, _, _ = desk
    # About 11,200 rows per consumer over 35 years, so 940 consumers stream a little over 10^7 rows.
    big = tmp_path / "big"
    res = subprocess.run([sys.executable, "-c", THROUGHPUT_SCRIPT, "940", str(big)], capture_output=True, text=True,
                         check=True)
    m = json.loads(res.stdout.strip().splitlines()[-1])
    rate = m["rows"] / m["seconds"]
    for f in big.iterdir():
        f.unlink()

    est = estimate(run)["expected_bytes"]
    actual = sum((out / f).stat().st_size for f in ("transactions.csv", "labels.csv"))
    ratio = est / actual
    ok = m["rows"] >= 10**7 and rate >= 100_000 and m["rss_mb"] < 1024 and 0.5 <= ratio <= 2.0
    record(14, "Throughput/memory", ok,
           f"{m['rows']} rows in {m['seconds']:.1f}s = {rate:,.0f} rows/s (>= 100,000), max RSS {m['rss_mb']:.0f} MB "
           f"(< 1024); dry-run estimate {est / 1e6:.1f} MB vs actual {actual / 1e6:.1f} MB (ratio {ratio:.2f})")


# --- 15: label hygiene -------------------------------------------------------------------------------------

def test_15_label_hygiene(record, desk, desk_rows, desk_events):
    out = desk[2]
    with open(out / "transactions.csv", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        fraudster_like = sum(1 for line in fh if re.search(r"(^|,)F\d{5}(,|$)", line))
    labels = _read_dicts(out / "labels.csv")
    lab_ids = np.array(sorted(int(r["transaction_id"]) for r in labels), dtype=np.int64)
    mech1 = np.flatnonzero(desk_events["fraud"] == MECH_FRAUDSTER)
    mech2 = np.flatnonzero(desk_events["fraud"] == MECH_RANDOM)
    fraud_rows = np.flatnonzero(desk_rows["is_fraud"] == 1)
    ids_match = np.array_equal(desk_rows["id"], np.arange(len(desk_rows["id"])))
    joins = np.array_equal(lab_ids, mech1) and np.all(desk_rows["is_fraud"][lab_ids] == 1)
    no_m2 = not np.isin(mech2, lab_ids).any()
    covered = np.array_equal(np.union1d(mech1, mech2), fraud_rows)
    ok = ("fraudster_id" not in header and fraudster_like == 0 and ids_match and joins and no_m2 and covered
          and len(mech1) > 0 and len(mech2) > 0 and len(set(lab_ids.tolist())) == len(labels))
    record(15, "Label hygiene", ok,
           f"{len(labels)} labels join to {len(mech1)} mechanism-1 rows; {len(mech2)} mechanism-2 rows unlabeled; "
           f"no fraudster ids in transactions")
