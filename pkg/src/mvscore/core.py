"""Shared types and validation helpers, including the seeded stream contract."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np


class ScoreError(ValueError):
    """Base class for all input/contract violations raised by this package."""


class DimensionMismatch(ScoreError):
    pass


class NonFiniteValue(ScoreError):
    pass


class EmptySample(ScoreError):
    pass


class OddSampleForIidSplit(ScoreError):
    pass


class BandTooWide(ScoreError):
    pass


class SampleTooSmall(ScoreError):
    pass


class SingularCovariance(ScoreError):
    pass


class OutOfUnitCube(ScoreError):
    pass


class ZeroWeightMass(ScoreError):
    pass


class LengthMismatch(ScoreError):
    pass


class DegenerateSeries(ScoreError):
    pass


class EmptySeries(ScoreError):
    pass


class ZeroReferenceMean(ScoreError):
    pass


class ZeroVarianceDifferences(ScoreError):
    pass


class NoRoot(ScoreError):
    pass


class UnknownModel(ScoreError):
    pass


class SeriesTooShort(ScoreError):
    pass


class SingularToeplitz(ScoreError):
    pass


class HistoryTooShort(ScoreError):
    pass


ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EnsembleForecast:
    """M simulated paths of an H-dimensional forecast, one row per path."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise DimensionMismatch(f"ensemble must be 2-d, got shape {v.shape}")
        if v.shape[0] < 2:
            raise EmptySample(f"ensemble needs at least 2 paths, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValue("ensemble contains NaN or infinite values")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ObservationPath:
    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        if not np.all(np.isfinite(y)):
            raise NonFiniteValue("observation contains NaN or infinite values")
        object.__setattr__(self, "y", _frozen(y))

    @property
    def h(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class WeightMatrix:
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatch(f"weight matrix must be square, got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ScoreError("weights must be finite and nonnegative")
        if not np.allclose(w, w.T):
            raise ScoreError("weight matrix must be symmetric")
        object.__setattr__(self, "w", _frozen(w))

    @classmethod
    def ones(cls, h: int) -> "WeightMatrix":
        return cls(np.ones((h, h)))

    @property
    def mass(self) -> float:
        return float(self.w.sum())


@dataclass(frozen=True)
class StudyLedger:
    """Time-ordered (ensemble, observation) pairs of a rolling-window study."""

    windows: tuple
    shift: int = 1

    def __post_init__(self):
        wins = tuple(
            (e if isinstance(e, EnsembleForecast) else EnsembleForecast(e),
             o if isinstance(o, ObservationPath) else ObservationPath(o))
            for e, o in self.windows
        )
        if len(wins) < 2:
            raise DegenerateSeries("a study ledger needs at least 2 windows")
        hs = {e.h for e, _ in wins}
        if len(hs) != 1:
            raise DimensionMismatch(f"windows disagree on H: {sorted(hs)}")
        for e, o in wins:
            validate_pairing(e, o)
        object.__setattr__(self, "windows", wins)

    @property
    def n(self) -> int:
        return len(self.windows)

    @property
    def overlapping(self) -> bool:
        return self.shift < self.windows[0][0].h


def as_ensemble(x) -> np.ndarray:
    """Return the M x H float matrix behind ``x`` (no copy when possible)."""
    if isinstance(x, EnsembleForecast):
        return x.values
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise DimensionMismatch(f"ensemble must be 2-d, got shape {a.shape}")
    return a


def as_observation(y) -> np.ndarray:
    if isinstance(y, ObservationPath):
        return y.y
    return np.atleast_1d(np.asarray(y, dtype=float)).ravel()


def validate_pairing(ensemble, obs) -> None:
    """Raise unless ensemble and observation agree on H and are all finite."""
    x = as_ensemble(ensemble)
    y = as_observation(obs)
    if x.shape[1] != y.shape[0]:
        raise DimensionMismatch(
            f"ensemble has H={x.shape[1]} columns but observation has length {y.shape[0]}"
        )
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("ensemble contains NaN or infinite values")
    if not np.all(np.isfinite(y)):
        raise NonFiniteValue("observation contains NaN or infinite values")


# --- seeded streams -------------------------------------------------------

_INT_TAG = 0
_STR_TAG = 1


def _label_words(label) -> tuple[int, int]:
    if isinstance(label, (bool, np.bool_)):
        label = int(label)
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError("integer stream labels must be nonnegative")
        return (_INT_TAG, int(label))
    if isinstance(label, str):
        digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
        return (_STR_TAG, int.from_bytes(digest, "little"))
    raise TypeError(f"unsupported stream label {label!r}")


@dataclass(frozen=True)
class SeedSpec:
    """Master seed; streams are keyed by hierarchical labels.

    ``SeedSpec(7).stream("peak", "fcst", 3, 12)`` always yields the same
    Philox-backed generator, regardless of how many other streams were
    drawn before it or on which worker.
    """

    master_seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")

    def stream(self, *labels) -> np.random.Generator:
        return derive_stream(self, labels)


def derive_stream(seed: Union[SeedSpec, int], labels: Iterable = ()) -> np.random.Generator:
    master = seed.master_seed if isinstance(seed, SeedSpec) else int(seed)
    key = []
    for lab in labels:
        key.extend(_label_words(lab))
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


# --- CSV ingestion --------------------------------------------------------


def _parse_rows(path: Path) -> list[list[float]]:
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(c == "" for c in cells):
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if not rows and lineno == 1:
                    continue  # header line
                raise ScoreError(f"{path}: row {lineno}: non-numeric value in {row!r}") from None
    return rows


def read_ensemble_csv(path) -> EnsembleForecast:
    path = Path(path)
    rows = _parse_rows(path)
    if not rows:
        raise ScoreError(f"{path}: no numeric rows")
    width = len(rows[0])
    for i, r in enumerate(rows, start=1):
        if len(r) != width:
            raise DimensionMismatch(f"{path}: row {i} has {len(r)} values, expected {width}")
    return EnsembleForecast(np.array(rows))


def read_observation_csv(path) -> ObservationPath:
    path = Path(path)
    rows = _parse_rows(path)
    if len(rows) != 1:
        raise ScoreError(f"{path}: expected exactly one row of values, found {len(rows)}")
    return ObservationPath(np.array(rows[0]))


def read_series_csv(path) -> np.ndarray:
    """Univariate series: one value per line (a header line is tolerated)."""
    path = Path(path)
    rows = _parse_rows(path)
    vals = []
    for i, r in enumerate(rows, start=1):
        if len(r) != 1:
            raise ScoreError(f"{path}: row {i} has {len(r)} values, expected 1")
        vals.append(r[0])
    out = np.array(vals)
    if out.size == 0:
        raise ScoreError(f"{path}: empty series")
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue(f"{path}: series contains NaN or infinite values")
    return out
