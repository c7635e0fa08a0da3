"""Hellinger distance, histograms and comparison reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .engine import OutcomeDistribution, sample
from .errors import ValidationError

AVERAGING = ("per_repetition", "mean_histogram")


def _as_mapping(d) -> Mapping[str, float]:
    if isinstance(d, OutcomeDistribution):
        return d.probabilities
    if isinstance(d, Histogram):
        return d.normalized()
    return d


def hellinger(p, q, atol: float = 1e-9) -> float:
    """(1/sqrt 2) * || sqrt(p) - sqrt(q) ||_2 over the union of supports."""
    p, q = _as_mapping(p), _as_mapping(q)
    for name, d in (("first", p), ("second", q)):
        total = math.fsum(d.values())
        if abs(total - 1) > atol:
            raise ValidationError(f"{name} distribution is not normalised (sum {total!r})")
        if any(v < 0 for v in d.values()):
            raise ValidationError(f"{name} distribution has a negative entry")
    keys = sorted(set(p) | set(q))
    sq = math.fsum((math.sqrt(p.get(k, 0.0)) - math.sqrt(q.get(k, 0.0))) ** 2 for k in keys)
    return min(1.0, math.sqrt(sq / 2))


@dataclass(frozen=True)
class Histogram:
    counts: Mapping[str, float]
    total: float = field(default=-1.0)

    def __post_init__(self) -> None:
        counts = dict(sorted((str(k), float(v)) for k, v in self.counts.items()))
        if any(v < 0 or not math.isfinite(v) for v in counts.values()):
            raise ValidationError("histogram counts must be finite and nonnegative")
        s = math.fsum(counts.values())
        total = s if self.total < 0 else float(self.total)
        if abs(total - s) > 1e-6:
            raise ValidationError(f"histogram total {total} disagrees with count sum {s}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", total)

    @classmethod
    def from_distribution(cls, d: OutcomeDistribution, shots: int) -> Histogram:
        return cls({k: p * shots for k, p in d.probabilities.items()})

    def normalized(self) -> dict[str, float]:
        if self.total <= 0:
            raise ValidationError("empty histogram")
        return {k: v / self.total for k, v in self.counts.items()}


@dataclass(frozen=True)
class StateRow:
    bitstring: str
    sim_count: float
    ref_count: float
    std: float = 0.0

    @property
    def delta(self) -> float:
        return abs(self.sim_count - self.ref_count)


@dataclass(frozen=True)
class ComparisonReport:
    circuit: str
    hellinger: float
    rows: tuple[StateRow, ...]
    filtered_threshold: float

    def __post_init__(self) -> None:
        if not 0 <= self.hellinger <= 1:
            raise ValidationError(f"hellinger {self.hellinger} outside [0, 1]")

    def to_dict(self) -> dict:
        return {"circuit": self.circuit, "hellinger": self.hellinger,
                "filtered_threshold": self.filtered_threshold,
                "states": [{"bitstring": r.bitstring, "sim_count": r.sim_count,
                            "ref_count": r.ref_count, "delta": r.delta, "std": r.std}
                           for r in self.rows]}

    def table_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitstring", "sim_count", "ref_count", "delta"])
        for r in self.rows:
            w.writerow([r.bitstring, repr(r.sim_count), repr(r.ref_count), repr(r.delta)])
        return buf.getvalue()

    def plot_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bitstring", "sim_count", "ref_count", "std"])
        for r in self.rows:
            w.writerow([r.bitstring, repr(r.sim_count), repr(r.ref_count), repr(r.std)])
        return buf.getvalue()


def compare(sim: Histogram, ref: Histogram, filter_below: float = 0.0, circuit: str = "",
            std: Mapping[str, float] | None = None) -> ComparisonReport:
    """Hellinger on the full normalized histograms; the per-state table drops
    states whose sim and ref counts are both below ``filter_below``."""
    if not sim.counts or sim.total <= 0 or not ref.counts or ref.total <= 0:
        raise ValidationError("cannot compare an empty histogram")
    h = hellinger(sim.normalized(), ref.normalized())
    std = std or {}
    rows = []
    for k in sorted(set(sim.counts) | set(ref.counts)):
        s, r = sim.counts.get(k, 0.0), ref.counts.get(k, 0.0)
        if s < filter_below and r < filter_below:
            continue
        rows.append(StateRow(k, s, r, float(std.get(k, 0.0))))
    return ComparisonReport(circuit, h, tuple(rows), filter_below)


@dataclass(frozen=True)
class SamplingSpread:
    """Finite-shot spread around an exact distribution."""

    mean_counts: dict[str, float]
    std_counts: dict[str, float]
    hellinger_mean: float  # Hellinger of each repetition to exact, then averaged
    hellinger_std: float
    hellinger_of_mean: float  # Hellinger of the mean histogram to exact
    repetitions: int
    shots: int

    def hellinger_for(self, averaging: str) -> float:
        if averaging == "per_repetition":
            return self.hellinger_mean
        if averaging == "mean_histogram":
            return self.hellinger_of_mean
        raise ValidationError(f"averaging must be one of {AVERAGING}")


def hellinger_std(dist: OutcomeDistribution, shots: int, repetitions: int,
                  seed: int | None = 0) -> SamplingSpread:
    """Draw ``repetitions`` histograms of ``shots`` shots and summarize their spread."""
    if shots < 1 or repetitions < 1:
        raise ValidationError("shots and repetitions must be at least 1")
    rng = np.random.default_rng(seed)
    keys = sorted(dist.probabilities)
    draws = np.zeros((repetitions, len(keys)))
    hs = []
    for i in range(repetitions):
        c = sample(dist, shots, rng)
        draws[i] = [c.get(k, 0) for k in keys]
        hs.append(hellinger({k: v / shots for k, v in c.items()}, dist.probabilities))
    mean = draws.mean(axis=0)
    sd = draws.std(axis=0)
    return SamplingSpread(
        mean_counts=dict(zip(keys, mean.tolist())),
        std_counts=dict(zip(keys, sd.tolist())),
        hellinger_mean=float(np.mean(hs)),
        hellinger_std=float(np.std(hs)),
        hellinger_of_mean=hellinger({k: m / shots for k, m in zip(keys, mean)}, dist.probabilities,
                                    atol=1e-6),
        repetitions=repetitions, shots=shots)
