"""Regenerate the embedded geography tables under src/synthcard/data.

Dev-time only. Needs ``geonamescache`` and ``zipcodes`` installed; the
package itself reads the resulting CSVs and depends on neither.

    python tools/build_geo_tables.py
"""

import csv
import math
from collections import defaultdict
from pathlib import Path

import geonamescache
import zipcodes

OUT = Path(__file__).resolve().parents[1] / "src" / "synthcard" / "data"
N_US = 1000
MIN_PER_STATE = 3
N_FOREIGN = 300
MAX_PER_COUNTRY = 5
STATES = {
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "DC", "FL", "GA", "HI", "ID", "IL",
    "IN", "IA", "KS", "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE",
    "NV", "NH", "NJ", "NM", "NY", "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC", "SD",
    "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY",
}


def _haversine(lat1, lon1, lat2, lon2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * 6371.0 * math.asin(math.sqrt(a))


def _zip_for(city, state, lat, lon, by_state):
    hits = [z for z in zipcodes.filter_by(city=city, state=state) if z["zip_code_type"] == "STANDARD"]
    if hits:
        return sorted(h["zip_code"] for h in hits)[0]
    best = min(by_state[state], key=lambda z: _haversine(lat, lon, float(z["lat"]), float(z["long"])))
    return best["zip_code"]


def main():
    gc = geonamescache.GeonamesCache()
    cities = list(gc.get_cities().values())
    countries = gc.get_countries()

    us = [c for c in cities if c["countrycode"] == "US" and c["admin1code"] in STATES]
    us.sort(key=lambda c: (-c["population"], c["geonameid"]))
    per_state = defaultdict(list)
    for c in us:
        per_state[c["admin1code"]].append(c)
    chosen = {c["geonameid"]: c for st in per_state.values() for c in st[:MIN_PER_STATE]}
    for c in us:
        if len(chosen) >= N_US:
            break
        chosen.setdefault(c["geonameid"], c)
    rows = sorted(chosen.values(), key=lambda c: (-c["population"], c["geonameid"]))

    by_state = defaultdict(list)
    for z in zipcodes.list_all():
        if z["zip_code_type"] == "STANDARD" and z["lat"] and z["long"]:
            by_state[z["state"]].append(z)

    with open(OUT / "us_places.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["city", "state", "zipcode", "latitude", "longitude", "population"])
        for c in rows:
            zc = _zip_for(c["name"], c["admin1code"], c["latitude"], c["longitude"], by_state)
            w.writerow([c["name"], c["admin1code"], zc, f"{c['latitude']:.4f}",
                        f"{c['longitude']:.4f}", c["population"]])

    foreign = [c for c in cities if c["countrycode"] != "US" and c["countrycode"] in countries]
    foreign.sort(key=lambda c: (-c["population"], c["geonameid"]))
    with open(OUT / "world_cities.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["city", "country_code", "country", "latitude", "longitude", "population"])
        taken = defaultdict(int)
        kept = []
        for c in foreign:
            if taken[c["countrycode"]] < MAX_PER_COUNTRY:
                taken[c["countrycode"]] += 1
                kept.append(c)
        for c in kept[:N_FOREIGN]:
            w.writerow([c["name"], c["countrycode"], countries[c["countrycode"]]["name"],
                        f"{c['latitude']:.4f}", f"{c['longitude']:.4f}", c["population"]])


if __name__ == "__main__":
    main()
