"""Dataset output (CSV writers, month spill files, deterministic merge) and summary statistics."""

from __future__ import annotations

import csv
import datetime as dt
import gzip
import hashlib
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .engine import CHANNEL_NAMES, EVENT_DTYPE
from .errors import ConfigError, DatasetError
from .fraud import fraudster_label

TX_COLUMNS = ("transaction_id", "consumer_id", "card_id", "timestamp", "amount", "gs_name", "merchant_id",
              "merchant_name", "merchant_city", "merchant_state", "merchant_country", "mcc", "channel", "is_fraud")
LABEL_COLUMNS = ("transaction_id", "fraudster_id")
BIO_COLUMNS = ("consumer_id", "name", "gender", "birth_date", "city", "state", "zipcode", "latitude", "longitude",
               "occupation", "annual_income", "fico_score", "debt_fraction_of_income", "transactions_per_year",
               "n_cards", "retirement_age", "entry_date")
CARD_COLUMNS = ("card_id", "consumer_id", "account_id", "card_kind", "brand", "pan", "expiry", "cvv", "has_chip",
                "acquired_date", "credit_limit", "load_balance", "balance_fraction", "years_since_pin_change")

# Every metric summarize can report; a name missing from a dataset's report is present with value None.
METRIC_NAMES = (
    "transactions.count", "transactions.mean_amount", "transactions.online_share",
    "transactions.per_consumer_year", "fraud.rate", "fraud.online_share", "fraud.online_share_2016_on",
    "bio.fico_score.mean", "bio.annual_income.mean", "bio.transactions_per_year.mean", "bio.n_cards.mean",
    "bio.age.mean", "bio.male_share", "cards.per_consumer",
)

# Rough bytes per transaction row, used for dry-run size estimates.
EST_BYTES_PER_ROW = 110
ONLINE_CITY = "ONLINE"


def quote(value) -> str:
    """RFC 4180 field quoting."""
    s = str(value)
    if any(c in s for c in ',"\n\r'):
        return '"' + s.replace('"', '""') + '"'
    return s


def cents_str(c: int) -> str:
    return f"{c // 100}.{c % 100:02d}"


def _header(cols) -> str:
    return ",".join(cols) + "\n"


class RowFormatter:
    """Formats event arrays as CSV text, caching per-merchant and per-location strings."""

    def __init__(self, world, catalog):
        self.world = world
        self.gs_names = [quote(it.name) for it in catalog.items]
        names = {}
        pl = world.places
        for code, country in zip(pl.country_code, pl.country):
            names.setdefault(str(code), str(country))
        self.country_names = names
        self._loc = {}
        self._online = {}

    def location_prefix(self, loc: int) -> str:
        s = self._loc.get(loc)
        if s is None:
            w = self.world
            m = int(w.loc_merchant[loc])
            p = int(w.loc_place[loc])
            pl = w.places
            s = ",".join((str(m), quote(w.merchant_name(m)), quote(pl.city[p]), quote(pl.state[p]),
                          quote(pl.country[p]), f"{int(w.merchant_mcc[m]):04d}"))
            self._loc[loc] = s
        return s

    def online_prefix(self, m: int) -> str:
        s = self._online.get(m)
        if s is None:
            w = self.world
            code = str(w.merchant_country[m])
            s = ",".join((str(m), quote(w.merchant_name(m)), ONLINE_CITY, "",
                          quote(self.country_names.get(code, code)), f"{int(w.merchant_mcc[m]):04d}"))
            self._online[m] = s
        return s

    def format(self, ev: np.ndarray, first_tid: int) -> tuple[str, str]:
        """Transaction rows and label rows for a sorted batch."""
        n = len(ev)
        if n == 0:
            return "", ""
        ts = ev["ts"].astype("datetime64[m]").astype(str).tolist()
        amount = ev["amount"].tolist()
        card = ev["card"].tolist()
        cons = ev["consumer"].tolist()
        gs = ev["gs"].tolist()
        loc = ev["location"].tolist()
        mer = ev["merchant"].tolist()
        chan = ev["channel"].tolist()
        fraud = (ev["fraud"] > 0).astype(np.int8).tolist()
        lp, op, gn = self.location_prefix, self.online_prefix, self.gs_names
        chn = CHANNEL_NAMES
        rows = [
            f"{first_tid + i},{cons[i]},{'' if card[i] < 0 else card[i]},{ts[i]},"
            f"{amount[i] // 100}.{amount[i] % 100:02d},{gn[gs[i]]},"
            f"{lp(loc[i]) if loc[i] >= 0 else op(mer[i])},{chn[chan[i]]},{fraud[i]}\n"
            for i in range(n)
        ]
        fr = ev["fraudster"]
        lab_idx = np.flatnonzero(fr >= 0)
        labels = "".join(f"{first_tid + int(i)},{fraudster_label(int(fr[i]))}\n" for i in lab_idx)
        return "".join(rows), labels


def _open_text(path: Path, gz: bool):
    if gz:
        raw = open(path, "wb")
        return io.TextIOWrapper(gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0), encoding="utf-8",
                                newline="")
    return open(path, "w", encoding="utf-8", newline="")


class TransactionWriter:
    """Single-writer sink for the transactions and labels files.

    On an exception inside the ``with`` block both partial files are removed,
    so a failed run never leaves a truncated dataset that looks complete.
    """

    CHUNK = 8192

    def __init__(self, tx_path, labels_path, formatter: RowFormatter, gzip_output: bool = False):
        self.tx_path, self.labels_path = Path(tx_path), Path(labels_path)
        self.formatter = formatter
        self.gz = gzip_output
        self.rows = 0
        self.label_rows = 0

    def __enter__(self):
        self._tx = _open_text(self.tx_path, self.gz)
        self._lab = _open_text(self.labels_path, self.gz)
        self._tx.write(_header(TX_COLUMNS))
        self._lab.write(_header(LABEL_COLUMNS))
        return self

    def write(self, ev: np.ndarray) -> None:
        # Small chunks keep the joined strings cache-sized; much faster than one huge join.
        for a in range(0, len(ev), self.CHUNK):
            part = ev[a:a + self.CHUNK]
            body, labels = self.formatter.format(part, self.rows)
            self._tx.write(body)
            self._lab.write(labels)
            self.rows += len(part)
            self.label_rows += int((part["fraudster"] >= 0).sum())

    def __exit__(self, exc_type, exc, tb):
        self._tx.close()
        self._lab.close()
        if exc_type is not None:
            for p in (self.tx_path, self.labels_path):
                try:
                    p.unlink()
                except OSError:
                    pass
        return False


def write_stream(events: Iterable[np.ndarray], tx_path, labels_path, formatter: RowFormatter,
                 gzip_output: bool = False) -> int:
    """Write already-ordered event batches; returns the number of transaction rows."""
    with TransactionWriter(tx_path, labels_path, formatter, gzip_output) as w:
        for batch in events:
            w.write(batch)
    return w.rows


# --- spill files ---------------------------------------------------------------------------

def month_key(ts_minutes: np.ndarray) -> np.ndarray:
    return ts_minutes.astype("datetime64[m]").astype("datetime64[M]").astype(np.int64)


class SpillStore:
    """Buffers one worker's events and appends them to per-month binary files."""

    def __init__(self, directory, flush_rows: int = 500_000):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.flush_rows = flush_rows
        self._buf: list = []
        self._n = 0
        self.rows = 0

    def add(self, ev: np.ndarray) -> None:
        if len(ev):
            self._buf.append(ev)
            self._n += len(ev)
            if self._n >= self.flush_rows:
                self.flush()

    def flush(self) -> None:
        if not self._buf:
            return
        ev = np.concatenate(self._buf)
        self._buf, self._n = [], 0
        mk = month_key(ev["ts"])
        order = np.argsort(mk, kind="stable")
        ev, mk = ev[order], mk[order]
        keys, starts = np.unique(mk, return_index=True)
        bounds = list(starts) + [len(ev)]
        for k, a, b in zip(keys, bounds[:-1], bounds[1:]):
            with open(self.dir / f"m{int(k):06d}.bin", "ab") as fh:
                ev[a:b].tofile(fh)
        self.rows += len(ev)


def merge_spills(directories) -> Iterator[np.ndarray]:
    """Yield month batches sorted by (timestamp, consumer); the key is unique, so order is total."""
    files = defaultdict(list)
    for d in directories:
        for p in sorted(Path(d).glob("m*.bin")):
            files[p.name].append(p)
    for name in sorted(files):
        parts = [np.fromfile(p, dtype=EVENT_DTYPE) for p in files[name]]
        ev = np.concatenate(parts) if len(parts) > 1 else parts[0]
        yield ev[np.lexsort((ev["consumer"], ev["ts"]))]


# --- other CSVs ------------------------------------------------------------------------------

def write_bios(path, profiles, cards_by_consumer) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BIO_COLUMNS)
        for p in profiles:
            h = p.home
            w.writerow([p.consumer_id, p.name, p.gender, p.birth_date.isoformat(), h.city, h.state, h.zipcode,
                        f"{h.latitude:.4f}", f"{h.longitude:.4f}", p.occupation, f"{p.annual_income:.2f}",
                        p.fico_score, f"{p.debt_fraction_of_income:.4f}",
                        f"{p.transactions_per_year.indiv_mean:.2f}", p.n_cards, f"{p.retirement_age:.2f}",
                        p.entry_date.isoformat()])


def write_cards(path, profiles, cards_by_consumer) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CARD_COLUMNS)
        for p in profiles:
            for c in cards_by_consumer[p.consumer_id]:
                w.writerow([c.card_id, c.consumer_id, c.account_id, c.card_kind, c.brand, c.pan,
                            f"{c.expiry_month:02d}/{c.expiry_year}", c.cvv, int(c.has_chip),
                            c.acquired_date.isoformat(), f"{c.credit_limit:.2f}", f"{c.load_balance:.2f}",
                            f"{c.balance_fraction:.4f}", f"{c.years_since_pin_change:.2f}"])


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# --- parsing & summary -------------------------------------------------------------------------

@dataclass
class TxRow:
    transaction_id: int
    consumer_id: int
    card_id: int | None
    timestamp: str
    amount_cents: int
    gs_name: str
    merchant_id: int
    merchant_name: str
    merchant_city: str
    merchant_state: str
    merchant_country: str
    mcc: int
    channel: str
    is_fraud: int


def parse_amount(s: str) -> int:
    whole, dot, frac = s.partition(".")
    if not dot or len(frac) != 2 or not whole.isdigit() or not frac.isdigit():
        raise ValueError(f"bad amount {s!r}")
    return int(whole) * 100 + int(frac)


def _open_read(path):
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic == b"\x1f\x8b":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


def read_transactions(path) -> Iterator[TxRow]:
    """Parse a transactions CSV, raising :class:`DatasetError` with the data row number on bad input."""
    with _open_read(path) as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or tuple(header) != TX_COLUMNS:
            raise DatasetError(f"{path}: unexpected header {header!r}", row=0)
        for i, row in enumerate(r, start=1):
            if len(row) != len(TX_COLUMNS):
                raise DatasetError(f"{path}: row {i} has {len(row)} fields, expected {len(TX_COLUMNS)}", row=i)
            try:
                yield TxRow(int(row[0]), int(row[1]), int(row[2]) if row[2] else None, row[3],
                            parse_amount(row[4]), row[5], int(row[6]), row[7], row[8], row[9], row[10],
                            int(row[11]), row[12], int(row[13]))
            except ValueError as e:
                raise DatasetError(f"{path}: row {i}: {e}", row=i) from None
            if row[12] not in CHANNEL_NAMES or row[13] not in ("0", "1") or len(row[3]) != 16:
                raise DatasetError(f"{path}: row {i}: invalid channel/flag/timestamp", row=i)


def read_csv_dicts(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


class _Acc:
    __slots__ = ("n", "s", "ss")

    def __init__(self):
        self.n, self.s, self.ss = 0, 0, 0

    def add(self, cents: int):
        self.n += 1
        self.s += cents
        self.ss += cents * cents

    def block(self) -> dict:
        if self.n == 0:
            return {"count": 0, "total": 0.0, "mean": None, "std": None}
        mean = self.s / self.n
        var = max(self.ss / self.n - mean * mean, 0.0)
        return {"count": self.n, "total": self.s / 100, "mean": mean / 100, "std": math.sqrt(var) / 100}


def _moments(values) -> dict:
    a = np.asarray(values, dtype=float)
    if len(a) == 0:
        return {"n": 0, "mean": None, "std": None, "se": None}
    sd = float(a.std(ddof=1)) if len(a) > 1 else 0.0
    return {"n": int(len(a)), "mean": float(a.mean()), "std": sd, "se": sd / math.sqrt(len(a))}


def _dataset_paths(path) -> tuple[Path, Path]:
    p = Path(path)
    if p.is_dir():
        plain = p / "transactions.csv"
        packed = p / "transactions.csv.gz"
        return (packed if packed.exists() and not plain.exists() else plain), p
    return p, p.parent


def summarize(path) -> dict:
    """Single streaming pass over a transactions file (plus bios/cards alongside, when present).

    Returns a JSON-ready report with biographical, card and transaction blocks
    and a flat ``metrics`` map of ``name -> {"value", "se"}`` for calibration.
    """
    tx_path, base = _dataset_paths(path)
    if not tx_path.exists():
        raise DatasetError(f"{tx_path}: no such dataset file")
    bios = read_csv_dicts(base / "bios.csv") if (base / "bios.csv").exists() else None
    cards = read_csv_dicts(base / "cards.csv") if (base / "cards.csv").exists() else None
    card_kind = {int(c["card_id"]): c["card_kind"] for c in cards} if cards else {}

    total = _Acc()
    by_kind = defaultdict(_Acc)
    by_channel = defaultdict(_Acc)
    by_year = defaultdict(_Acc)
    by_state = defaultdict(_Acc)
    by_country = defaultdict(_Acc)
    by_mcc = defaultdict(_Acc)
    by_fraud_channel = defaultdict(_Acc)
    fraud_by_year = defaultdict(lambda: [0, 0])
    per_consumer = defaultdict(int)
    for r in read_transactions(tx_path):
        c = r.amount_cents
        total.add(c)
        kind = "Cash" if r.card_id is None else card_kind.get(r.card_id, "Card")
        by_kind[kind].add(c)
        by_channel[r.channel].add(c)
        year = r.timestamp[:4]
        by_year[year].add(c)
        if r.merchant_state:
            by_state[r.merchant_state].add(c)
        by_country[r.merchant_country].add(c)
        by_mcc[f"{r.mcc:04d}"].add(c)
        by_fraud_channel[("fraud" if r.is_fraud else "genuine") + ":" + r.channel].add(c)
        per_consumer[r.consumer_id] += 1
        if r.is_fraud:
            fy = fraud_by_year[year]
            fy[0] += 1
            fy[1] += r.channel == "ONLINE"

    n = total.n
    fraud_n = sum(v.n for k, v in by_fraud_channel.items() if k.startswith("fraud:"))
    fraud_online = by_fraud_channel["fraud:ONLINE"].n if "fraud:ONLINE" in by_fraud_channel else 0
    report = {
        "dataset": str(tx_path),
        "transactions": {
            "total": total.block(),
            "by_card_kind": {k: v.block() for k, v in sorted(by_kind.items())},
            "by_channel": {k: v.block() for k, v in sorted(by_channel.items())},
            "online_vs_in_person": {
                "online": by_channel["ONLINE"].block() if "ONLINE" in by_channel else _Acc().block(),
                "in_person": _merge_blocks([v for k, v in by_channel.items() if k != "ONLINE"]),
            },
            "annual": {k: v.block() for k, v in sorted(by_year.items())},
            "per_transaction": {k: v.block() for k, v in sorted(by_fraud_channel.items())},
            "by_state": {k: v.block() for k, v in sorted(by_state.items())},
            "by_country": {k: v.block() for k, v in sorted(by_country.items())},
            "by_mcc": {k: v.block() for k, v in sorted(by_mcc.items())},
            "fraud": {
                "count": fraud_n,
                "rate": fraud_n / n if n else None,
                "online_share": fraud_online / fraud_n if fraud_n else None,
                "by_year": {k: {"count": v[0], "online_share": v[1] / v[0]} for k, v in sorted(fraud_by_year.items())},
            },
        },
    }
    metrics = {
        "transactions.count": {"value": n, "se": None},
        "transactions.mean_amount": {"value": total.block()["mean"],
                                     "se": (total.block()["std"] / math.sqrt(n)) if n > 1 else None},
    }
    if n:
        p = fraud_n / n
        metrics["fraud.rate"] = {"value": p, "se": math.sqrt(p * (1 - p) / n)}
    if fraud_n:
        p = fraud_online / fraud_n
        metrics["fraud.online_share"] = {"value": p, "se": math.sqrt(max(p * (1 - p), 1e-12) / fraud_n)}
    recent = [(int(k), v) for k, v in fraud_by_year.items() if int(k) >= 2016]
    rn = sum(v[0] for _, v in recent)
    if rn:
        p = sum(v[1] for _, v in recent) / rn
        metrics["fraud.online_share_2016_on"] = {"value": p, "se": math.sqrt(max(p * (1 - p), 1e-12) / rn)}
    if "ONLINE" in by_channel or n:
        p = by_channel["ONLINE"].n / n if n else 0.0
        metrics["transactions.online_share"] = {"value": p, "se": math.sqrt(p * (1 - p) / n) if n else None}

    if bios is not None:
        report["bio"] = _bio_block(bios)
        for attr in ("fico_score", "annual_income", "transactions_per_year", "n_cards", "age"):
            b = report["bio"]["attributes"][attr]
            metrics[f"bio.{attr}.mean"] = {"value": b["mean"], "se": b["se"]}
        m = report["bio"]["male_share"]
        nb = len(bios)
        metrics["bio.male_share"] = {"value": m, "se": math.sqrt(m * (1 - m) / nb) if nb else None}
        end_year = max((int(k) for k in by_year), default=None)
        yrs = _consumer_years(bios, end_year) if end_year else 0.0
        if yrs > 0:
            per_year = n / yrs
            metrics["transactions.per_consumer_year"] = {"value": per_year, "se": None}
            report["transactions"]["per_consumer_year"] = per_year
    if cards is not None:
        report["cards"] = _card_block(cards)
        metrics["cards.per_consumer"] = {"value": report["cards"]["per_consumer"], "se": None}
    for name in METRIC_NAMES:
        metrics.setdefault(name, {"value": None, "se": None})
    report["metrics"] = dict(sorted(metrics.items()))
    return report


def _consumer_years(bios, end_year: int) -> float:
    end = dt.date(end_year, 12, 31)
    total = 0.0
    for b in bios:
        entry = dt.date.fromisoformat(b["entry_date"])
        if entry <= end:
            total += ((end - entry).days + 1) / 365.25
    return total


def _merge_blocks(accs) -> dict:
    out = _Acc()
    for a in accs:
        out.n += a.n
        out.s += a.s
        out.ss += a.ss
    return out.block()


def _bio_block(bios) -> dict:
    as_of = dt.date(2020, 1, 1)
    cols = {
        "fico_score": [float(b["fico_score"]) for b in bios],
        "annual_income": [float(b["annual_income"]) for b in bios],
        "debt_fraction_of_income": [float(b["debt_fraction_of_income"]) for b in bios],
        "transactions_per_year": [float(b["transactions_per_year"]) for b in bios],
        "n_cards": [float(b["n_cards"]) for b in bios],
        "retirement_age": [float(b["retirement_age"]) for b in bios],
        "age": [(as_of - dt.date.fromisoformat(b["birth_date"])).days / 365.25 for b in bios],
    }
    male = sum(b["gender"] == "M" for b in bios)
    states = defaultdict(int)
    for b in bios:
        states[b["state"]] += 1
    return {
        "consumers": len(bios),
        "male_share": male / len(bios) if bios else None,
        "attributes": {k: _moments(v) for k, v in cols.items()},
        "by_state": dict(sorted(states.items())),
    }


def _card_block(cards) -> dict:
    kinds = defaultdict(list)
    for c in cards:
        kinds[c["card_kind"]].append(c)
    consumers = {c["consumer_id"] for c in cards}
    return {
        "count": len(cards),
        "accounts": len({c["account_id"] for c in cards}),
        "per_consumer": len(cards) / len(consumers) if consumers else 0.0,
        "by_kind": {
            k: {
                "count": len(v),
                "chip_share": sum(c["has_chip"] == "1" for c in v) / len(v),
                "mean_credit_limit": float(np.mean([float(c["credit_limit"]) for c in v])),
                "mean_load_balance": float(np.mean([float(c["load_balance"]) for c in v])),
            }
            for k, v in sorted(kinds.items())
        },
    }


# --- calibration ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationResult:
    metric: str
    target: float
    achieved: float | None
    tolerance: float
    deviation: float | None
    se_deviation: float | None
    passed: bool


def calibrate(report: dict, targets: Mapping[str, Mapping]) -> list[CalibrationResult]:
    """Compare report metrics with ``{metric: {"target": x, "tolerance": t}}``.

    A metric passes when ``|achieved - target| <= tolerance``.  Unknown metric
    names raise :class:`ConfigError` listing all of them.
    """
    metrics = report.get("metrics", {})
    unknown = [m for m in targets if m not in metrics]
    if unknown:
        raise ConfigError("unknown calibration metric(s)",
                          [(f"targets.{m}", f"not produced by summarize; known: {sorted(metrics)}") for m in unknown])
    out = []
    for name, t in targets.items():
        target, tol = float(t["target"]), float(t["tolerance"])
        val = metrics[name]["value"]
        se = metrics[name].get("se")
        if val is None:
            out.append(CalibrationResult(name, target, None, tol, None, None, False))
            continue
        dev = float(val) - target
        out.append(CalibrationResult(name, target, float(val), tol, dev,
                                     dev / se if se else None, abs(dev) <= tol))
    return out


def format_calibration(results) -> str:
    lines = [f"{'metric':40s} {'target':>12s} {'achieved':>12s} {'dev':>10s} {'dev/SE':>8s}  result"]
    for r in results:
        ach = "n/a" if r.achieved is None else f"{r.achieved:12.4f}"
        dev = "n/a" if r.deviation is None else f"{r.deviation:+10.4f}"
        zse = "" if r.se_deviation is None else f"{r.se_deviation:+8.2f}"
        lines.append(f"{r.metric:40s} {r.target:12.4f} {ach:>12s} {dev:>10s} {zse:>8s}  "
                     f"{'PASS' if r.passed else 'FAIL'} (tol {r.tolerance})")
    return "\n".join(lines)


def format_report(report: dict, top: int = 10) -> str:
    """Human-readable tables for a summary report."""
    tx = report["transactions"]
    out = []

    def table(title, rows):
        out.append(title)
        out.append(f"  {'':24s} {'count':>12s} {'total $':>16s} {'mean $':>10s} {'std $':>10s}")
        for k, b in rows:
            mean = "" if b["mean"] is None else f"{b['mean']:10.2f}"
            std = "" if b["std"] is None else f"{b['std']:10.2f}"
            out.append(f"  {str(k):24s} {b['count']:12d} {b['total']:16.2f} {mean:>10s} {std:>10s}")
        out.append("")

    if "bio" in report:
        b = report["bio"]
        out.append(f"Consumers: {b['consumers']}   male share: {b['male_share']:.3f}")
        for k, m in b["attributes"].items():
            if m["mean"] is not None:
                out.append(f"  {k:26s} mean {m['mean']:14.2f}   std {m['std']:12.2f}")
        out.append("")
    if "cards" in report:
        c = report["cards"]
        out.append(f"Cards: {c['count']} in {c['accounts']} accounts ({c['per_consumer']:.2f} per consumer)")
        for k, v in c["by_kind"].items():
            out.append(f"  {k:10s} {v['count']:8d}  chip {v['chip_share']:.2f}  "
                       f"limit {v['mean_credit_limit']:10.2f}  load {v['mean_load_balance']:8.2f}")
        out.append("")
    table("Lifetime totals", [("all", tx["total"])])
    table("By card kind", tx["by_card_kind"].items())
    table("By channel", tx["by_channel"].items())
    table("Per transaction (fraud / genuine x channel)", tx["per_transaction"].items())
    table("Annual", tx["annual"].items())
    by_state = sorted(tx["by_state"].items(), key=lambda kv: -kv[1]["count"])[:top]
    table(f"Top {top} states", by_state)
    by_country = sorted(tx["by_country"].items(), key=lambda kv: -kv[1]["count"])[:top]
    table(f"Top {top} countries", by_country)
    by_mcc = sorted(tx["by_mcc"].items(), key=lambda kv: -kv[1]["count"])[:top]
    table(f"Top {top} MCCs", by_mcc)
    f = tx["fraud"]
    rate = "n/a" if f["rate"] is None else f"{f['rate']:.5f}"
    share = "n/a" if f["online_share"] is None else f"{f['online_share']:.3f}"
    out.append(f"Fraud: {f['count']} rows, rate {rate}, online share {share}")
    return "\n".join(out)
