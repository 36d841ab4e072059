"""CSV formats for pairwise-comparison and ranking data.

Pairwise: ``population,winner,loser[,result]``.  ``result`` is read from the
point of view of the item in the ``winner`` column: ``win`` (default),
``loss`` (the roles are swapped) or ``draw``.  In the asymmetric setting the
column order is the ordered context (i, j), so ``loss`` is how a row records
that j won in slot (i, j).

Rankings: ``population,ranking`` with items joined by ``>``, best first.

Item names map to indices by sorting the union of names from both
populations, so results do not depend on row order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .core import PairwiseDataset, PartialRanking, RankingDataset, Setting, pair_slots

POPULATIONS = ("P", "Q")
RESULTS = ("win", "loss", "draw")


class DataFormatError(ValueError):
    """Malformed input file; the message names the offending line."""


@dataclass(frozen=True)
class PairwiseData:
    p: PairwiseDataset
    q: PairwiseDataset
    items: tuple[str, ...]
    dropped_draws: int = 0


@dataclass(frozen=True)
class RankingData:
    p: RankingDataset
    q: RankingDataset
    items: tuple[str, ...]


def _open(source) -> TextIO:
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    return source


def _rows(source, expected: Sequence[str], optional: Sequence[str] = ()):
    fh = _open(source)
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataFormatError("empty file: missing header")
        header = [h.strip() for h in header]
        allowed = list(expected) + list(optional)
        if header[:len(expected)] != list(expected) or any(h not in allowed for h in header):
            raise DataFormatError(f"line 1: expected header {','.join(allowed)}, "
                                  f"got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataFormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            yield lineno, dict(zip(header, (c.strip() for c in row)))
    finally:
        if fh is not source:
            fh.close()


def _population(value: str, lineno: int) -> str:
    if value not in POPULATIONS:
        raise DataFormatError(f"line {lineno}: unknown population label {value!r} (use P or Q)")
    return value


def read_pairwise_csv(source, setting: Setting | str = Setting.SYMMETRIC,
                      drop_ties: bool = False) -> PairwiseData:
    setting = Setting(setting)
    records = []
    draws = 0
    for lineno, row in _rows(source, ("population", "winner", "loser"), ("result",)):
        pop = _population(row["population"], lineno)
        a, b = row["winner"], row["loser"]
        if not a or not b:
            raise DataFormatError(f"line {lineno}: empty item name")
        if a == b:
            raise DataFormatError(f"line {lineno}: item {a!r} compared with itself")
        result = row.get("result", "win") or "win"
        if result not in RESULTS:
            raise DataFormatError(f"line {lineno}: result must be one of {RESULTS}, got {result!r}")
        if result == "draw":
            if not drop_ties:
                raise DataFormatError(f"line {lineno}: draw found; ties are not supported "
                                      "(pass --drop-ties to discard them)")
            draws += 1
            continue
        records.append((pop, a, b, result == "win"))
    if not records:
        raise DataFormatError("no observations")
    items = tuple(sorted({r[1] for r in records} | {r[2] for r in records}))
    index = {name: i for i, name in enumerate(items)}
    d = len(items)
    k = {pop: np.zeros((d, d), dtype=np.int64) for pop in POPULATIONS}
    x = {pop: np.zeros((d, d), dtype=np.int64) for pop in POPULATIONS}
    for pop, a, b, first_won in records:
        i, j = index[a], index[b]
        if setting is Setting.SYMMETRIC:
            winner, loser = (i, j) if first_won else (j, i)
            lo, hi = min(i, j), max(i, j)
            k[pop][lo, hi] += 1
            x[pop][lo, hi] += winner < loser
        else:
            k[pop][i, j] += 1
            x[pop][i, j] += first_won
    return PairwiseData(PairwiseDataset(k["P"], x["P"], setting),
                        PairwiseDataset(k["Q"], x["Q"], setting), items, draws)


def read_ranking_csv(source) -> RankingData:
    raw = []
    for lineno, row in _rows(source, ("population", "ranking")):
        pop = _population(row["population"], lineno)
        names = [n.strip() for n in row["ranking"].split(">")]
        if any(not n for n in names):
            raise DataFormatError(f"line {lineno}: empty item name in ranking")
        if len(names) < 2:
            raise DataFormatError(f"line {lineno}: a ranking needs at least two items")
        if len(set(names)) != len(names):
            raise DataFormatError(f"line {lineno}: duplicate item in ranking {row['ranking']!r}")
        raw.append((pop, names))
    if not raw:
        raise DataFormatError("no observations")
    items = tuple(sorted({n for _, names in raw for n in names}))
    index = {name: i for i, name in enumerate(items)}
    d = len(items)
    by_pop = {pop: [] for pop in POPULATIONS}
    for pop, names in raw:
        by_pop[pop].append(PartialRanking(tuple(index[n] for n in names)))
    return RankingData(RankingDataset(d, tuple(by_pop["P"])),
                       RankingDataset(d, tuple(by_pop["Q"])), items)


def default_names(d: int) -> tuple[str, ...]:
    """Zero-padded names whose lexicographic order matches the index order."""
    width = len(str(max(d - 1, 0)))
    return tuple(f"i{i:0{width}d}" for i in range(d))


def _check_names(names: Sequence[str], d: int) -> tuple[str, ...]:
    names = tuple(names)
    if len(names) != d or list(names) != sorted(set(names)):
        raise ValueError("names must be d distinct strings in sorted order")
    if any("," in n or ">" in n for n in names):
        raise ValueError("item names must not contain ',' or '>'")
    return names


def write_pairwise_csv(p: PairwiseDataset, q: PairwiseDataset, out: TextIO,
                       names: Optional[Sequence[str]] = None) -> None:
    """One row per comparison; symmetric rows name the winner first."""
    names = _check_names(names or default_names(p.d), p.d)
    w = csv.writer(out, lineterminator="\n")
    asym = p.setting is Setting.ASYMMETRIC
    w.writerow(["population", "winner", "loser", "result"] if asym
               else ["population", "winner", "loser"])
    for label, ds in zip(POPULATIONS, (p, q)):
        rows, cols = pair_slots(ds.d, ds.setting)
        for i, j in zip(rows.tolist(), cols.tolist()):
            k, x = int(ds.counts[i, j]), int(ds.wins[i, j])
            if asym:
                w.writerows([label, names[i], names[j], "win"] for _ in range(x))
                w.writerows([label, names[i], names[j], "loss"] for _ in range(k - x))
            else:
                w.writerows([label, names[i], names[j]] for _ in range(x))
                w.writerows([label, names[j], names[i]] for _ in range(k - x))


def write_ranking_csv(p: RankingDataset, q: RankingDataset, out: TextIO,
                      names: Optional[Sequence[str]] = None) -> None:
    names = _check_names(names or default_names(p.d), p.d)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["population", "ranking"])
    for label, ds in zip(POPULATIONS, (p, q)):
        for r in ds.rankings:
            w.writerow([label, ">".join(names[i] for i in r.items)])


def pairwise_csv_text(p: PairwiseDataset, q: PairwiseDataset, names=None) -> str:
    buf = io.StringIO()
    write_pairwise_csv(p, q, buf, names)
    return buf.getvalue()


def ranking_csv_text(p: RankingDataset, q: RankingDataset, names=None) -> str:
    buf = io.StringIO()
    write_ranking_csv(p, q, buf, names)
    return buf.getvalue()
