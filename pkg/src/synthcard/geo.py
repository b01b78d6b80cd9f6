"""Embedded place tables: U.S. places (consumer homes) and foreign cities."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

EARTH_RADIUS_KM = 6371.0088


@dataclass(frozen=True)
class PlaceTable:
    """Column-oriented place table.  Foreign rows carry empty state/zipcode."""

    city: np.ndarray
    state: np.ndarray
    zipcode: np.ndarray
    country_code: np.ndarray
    country: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    weight: np.ndarray

    def __len__(self):
        return len(self.lat)

    @property
    def is_us(self) -> np.ndarray:
        return self.country_code == "US"

    def concat(self, other: "PlaceTable") -> "PlaceTable":
        return PlaceTable(*(np.concatenate([getattr(self, f), getattr(other, f)])
                            for f in self.__dataclass_fields__))

    def subset(self, idx) -> "PlaceTable":
        return PlaceTable(*(getattr(self, f)[idx] for f in self.__dataclass_fields__))


def _read_rows(path):
    if path is None:
        raise ValueError("path required")
    if isinstance(path, (str, Path)):
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    with path.open("r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _table(rows, us: bool) -> PlaceTable:
    n = len(rows)
    obj = lambda key, default="": np.array([r.get(key, default) for r in rows], dtype=object)
    return PlaceTable(
        city=obj("city"),
        state=obj("state") if us else np.full(n, "", dtype=object),
        zipcode=obj("zipcode") if us else np.full(n, "", dtype=object),
        country_code=np.full(n, "US", dtype=object) if us else obj("country_code"),
        country=np.full(n, "United States", dtype=object) if us else obj("country"),
        lat=np.array([float(r["latitude"]) for r in rows]),
        lon=np.array([float(r["longitude"]) for r in rows]),
        weight=np.array([float(r.get("population") or r.get("weight")) for r in rows]),
    )


@lru_cache(maxsize=8)
def load_us_places(path: str | None = None) -> PlaceTable:
    src = path or resources.files("synthcard").joinpath("data").joinpath("us_places.csv")
    return _table(_read_rows(src), us=True)


@lru_cache(maxsize=8)
def load_world_cities(path: str | None = None) -> PlaceTable:
    src = path or resources.files("synthcard").joinpath("data").joinpath("world_cities.csv")
    return _table(_read_rows(src), us=False)


def haversine_km(lat1, lon1, lat2, lon2):
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    a = (np.sin((lat2 - lat1) / 2) ** 2
         + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def unit_xyz(lat, lon) -> np.ndarray:
    la, lo = np.radians(lat), np.radians(lon)
    return np.column_stack([np.cos(la) * np.cos(lo), np.cos(la) * np.sin(lo), np.sin(la)])


def chord_to_km(chord):
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.clip(np.asarray(chord) / 2, 0.0, 1.0))


def km_to_chord(km):
    return 2 * np.sin(np.asarray(km) / (2 * EARTH_RADIUS_KM))
