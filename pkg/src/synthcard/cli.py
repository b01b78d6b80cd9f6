"""Command line: ``synthcard generate | stats | validate | bio``.

Exit codes: 0 success, 1 validation failure (or unknown consumer), 2 config
error, 3 I/O or dataset error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, DatasetError
from .iostats import (_dataset_paths, calibrate, format_calibration, format_report, read_csv_dicts,
                      read_transactions, summarize)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _print_config_error(e: ConfigError) -> None:
    print(f"config error: {e}", file=sys.stderr)
    for path, msg in e.problems:
        print(f"  {path}: {msg}", file=sys.stderr)


def _overrides(args) -> dict:
    return {"seed": args.seed, "consumers": args.consumers, "start_year": args.start_year,
            "end_year": args.end_year, "years": args.years, "out_dir": args.out_dir, "workers": args.workers}


def cmd_generate(args) -> int:
    from .pipeline import estimate, generate

    run = load_config(args.config, _overrides(args))
    if args.dry_run:
        est = estimate(run)
        print(f"consumers:            {est['consumers']}")
        print(f"years:                {est['years']} ({run.start_year}-{run.end_year})")
        print(f"consumer-years:       {est['consumer_years']:,.0f}")
        print(f"estimated rows:       {est['expected_rows']:,.0f}")
        print(f"estimated size:       {est['expected_bytes'] / 1e9:,.2f} GB "
              f"(~{est['bytes_per_row']} bytes/row, uncompressed)")
        return EXIT_OK
    manifest = generate(run)
    c = manifest["counts"]
    print(f"wrote {c['transactions']} transactions ({c['fraud_transactions']} fraud) for {c['consumers']} "
          f"consumers to {run.out_dir}")
    print(f"config hash {manifest['config_hash']}")
    return EXIT_OK


def cmd_stats(args) -> int:
    report = summarize(args.dataset)
    if args.json:
        text = json.dumps(report, indent=2, sort_keys=True)
        if args.json == "-":
            print(text)
        else:
            Path(args.json).write_text(text + "\n", encoding="utf-8")
    if args.json != "-":
        print(format_report(report, top=args.top))
    return EXIT_OK


def _targets_for(args) -> dict:
    if args.config:
        return load_config(args.config).targets
    manifest = Path(args.dataset) / "manifest.json" if Path(args.dataset).is_dir() else None
    if manifest is not None and manifest.exists():
        return load_config(manifest).targets
    return load_config().targets


def cmd_validate(args) -> int:
    targets = _targets_for(args)
    report = summarize(args.dataset)
    results = calibrate(report, targets)
    print(format_calibration(results))
    if args.json:
        rows = [r.__dict__ for r in results]
        Path(args.json).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} targets met")
    return EXIT_FAIL if failed else EXIT_OK


def format_bio_row(bio: dict) -> str:
    return "\n".join([
        f"{bio['name']}  (consumer {bio['consumer_id']})",
        f"  Gender: {bio['gender']}    Born: {bio['birth_date']}    Active from: {bio['entry_date']}",
        f"  Home: {bio['city']}, {bio['state']} {bio['zipcode']}  ({bio['latitude']}, {bio['longitude']})",
        f"  Occupation: {bio['occupation']}    Retirement age: {float(bio['retirement_age']):.0f}",
        f"  Income: ${float(bio['annual_income']):,.0f}/yr    FICO: {bio['fico_score']}    "
        f"Debt/income: {float(bio['debt_fraction_of_income']):.2f}",
        f"  Purchases/yr: {float(bio['transactions_per_year']):.0f}    Cards: {bio['n_cards']}",
    ])


def cmd_bio(args) -> int:
    base = Path(args.dataset)
    bios = read_csv_dicts(base / "bios.csv")
    cid = str(args.consumer_id)
    bio = next((b for b in bios if b["consumer_id"] == cid), None)
    if bio is None:
        print(f"consumer {cid} not found in {base / 'bios.csv'}", file=sys.stderr)
        return EXIT_FAIL
    print(format_bio_row(bio))
    cards_path = base / "cards.csv"
    if args.n > 0 and cards_path.exists():
        print("\nCards")
        for c in read_csv_dicts(cards_path):
            if c["consumer_id"] == cid:
                print(f"  {c['card_id']:>9s}  {c['card_kind']:8s} {c['brand']:11s} {c['pan']}  exp {c['expiry']}  "
                      f"chip {c['has_chip']}  acquired {c['acquired_date']}")
    if args.n > 0:
        print(f"\nFirst {args.n} transactions")
        shown = 0
        tx_path, _ = _dataset_paths(base)
        for r in read_transactions(tx_path):
            if r.consumer_id != args.consumer_id:
                continue
            where = r.merchant_city if r.channel == "ONLINE" else f"{r.merchant_city} {r.merchant_state}".strip()
            print(f"  {r.timestamp}  {r.amount_cents / 100:>9.2f}  {r.channel:6s} {r.gs_name[:24]:24s} "
                  f"{r.merchant_name[:28]:28s} {where}{'  FRAUD' if r.is_fraud else ''}")
            shown += 1
            if shown >= args.n:
                break
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="synthcard", description="Synthetic card transaction generator.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate a dataset")
    g.add_argument("--config", help="JSON config or a previous run's manifest.json")
    g.add_argument("--seed", type=int)
    g.add_argument("--consumers", type=int)
    g.add_argument("--start-year", type=int)
    g.add_argument("--end-year", type=int)
    g.add_argument("--years", type=int, help="horizon length; sets end year = start year + years - 1")
    g.add_argument("--out-dir")
    g.add_argument("--workers", type=int)
    g.add_argument("--dry-run", action="store_true", help="print estimated rows and size, write nothing")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("stats", help="summary statistics of a dataset")
    s.add_argument("dataset", help="dataset directory or transactions CSV")
    s.add_argument("--json", help="write the report as JSON to this path ('-' for stdout)")
    s.add_argument("--top", type=int, default=10, help="rows shown in per-state/country/MCC tables")
    s.set_defaults(func=cmd_stats)

    v = sub.add_parser("validate", help="compare a dataset against calibration targets")
    v.add_argument("dataset")
    v.add_argument("--config", help="config whose 'targets' are checked (default: the run's manifest)")
    v.add_argument("--json", help="write results as JSON to this path")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("bio", help="print one consumer's bio, cards and first transactions")
    b.add_argument("dataset", help="dataset directory")
    b.add_argument("consumer_id", type=int)
    b.add_argument("-n", type=int, default=10, help="transactions to show (0: bio only)")
    b.set_defaults(func=cmd_bio)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        _print_config_error(e)
        return EXIT_CONFIG
    except DatasetError as e:
        print(f"dataset error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
