"""Lower-bound formulas, the best-bounds table and growth ratios.

A BoundRecord states W(k, r) > bound.  Every record is checked on creation
against the seven known exact values, so nothing in the package can emit a
bound that contradicts them.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator

from .errors import DomainError, SoundnessError
from .numtheory import is_prime

log = logging.getLogger(__name__)

STATUSES = ("exact", "constructed-verified", "constructed-shortcut", "reference", "formula")
# merge preference among equal bounds, strongest first
_STATUS_RANK = {s: len(STATUSES) - i for i, s in enumerate(STATUSES)}
TSV_HEADER = ("k", "r", "bound", "status", "recipe")


def _read_tsv(name: str) -> list[dict[str, str]]:
    text = resources.files("vdw.data").joinpath(name).read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split("\t")
    return [dict(zip(header, ln.split("\t"))) for ln in lines[1:]]


def _load_exact() -> dict[tuple[int, int], int]:
    return {
        (int(row["k"]), int(row["r"])): int(row["value"])
        for row in _read_tsv("table1.tsv")
        if row["exact"] == "1"
    }


KNOWN_EXACT = _load_exact()


@dataclass(frozen=True)
class BoundRecord:
    k: int
    r: int
    bound: int
    recipe: str = ""
    status: str = "formula"

    def __post_init__(self):
        if self.status not in STATUSES:
            raise DomainError(f"unknown status {self.status!r}")
        if "\t" in self.recipe or "\n" in self.recipe:
            raise DomainError("recipe must not contain tabs or newlines")
        exact = KNOWN_EXACT.get((self.k, self.r))
        if exact is not None and self.bound >= exact:
            raise SoundnessError(
                f"claimed W({self.k},{self.r}) > {self.bound} contradicts W({self.k},{self.r}) = {exact}"
            )
        if self.status == "exact" and (exact is None or self.bound + 1 != exact):
            raise DomainError(f"W({self.k},{self.r}) is not known to equal {self.bound + 1}")

    def sort_key(self):
        return (self.bound, _STATUS_RANK[self.status], self.recipe)


@dataclass
class BoundsTable:
    records: dict[tuple[int, int], BoundRecord] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def add(self, rec: BoundRecord) -> None:
        old = self.records.get((rec.k, rec.r))
        if old is None or rec.sort_key() > old.sort_key():
            self.records[(rec.k, rec.r)] = rec

    def update(self, recs: Iterable[BoundRecord]) -> "BoundsTable":
        for rec in recs:
            self.add(rec)
        return self

    def merge(self, other: "BoundsTable") -> "BoundsTable":
        out = BoundsTable(dict(self.records), self.notes + other.notes)
        return out.update(other)

    def __iter__(self) -> Iterator[BoundRecord]:
        return iter(sorted(self.records.values(), key=lambda rec: (rec.k, rec.r)))

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other) -> bool:
        return isinstance(other, BoundsTable) and self.records == other.records

    def get(self, k: int, r: int) -> BoundRecord | None:
        return self.records.get((k, r))

    def monotonicity_warnings(self) -> list[str]:
        """Places where a bound drops as k or r grows (a consistency smell, not an error)."""
        out = []
        for (k, r), rec in sorted(self.records.items()):
            for nk, nr in ((k + 1, r), (k, r + 1)):
                nxt = self.records.get((nk, nr))
                if nxt is not None and nxt.bound < rec.bound:
                    out.append(f"W({nk},{nr}) > {nxt.bound} is below W({k},{r}) > {rec.bound}")
        return out


# ---------------------------------------------------------------- constructions


def bound_rabung(p: int, k: int) -> int:
    """Length (k-1)p + 1 of an assembled Rabung certificate."""
    if k < 3:
        raise DomainError("k must be at least 3")
    return (k - 1) * p + 1


def bound_zip(p: int, k: int, zips: int = 1) -> int:
    """Length of the certificate built from a block zipped ``zips`` times.

    Each zip doubles the period p, so the certificate has (k-1) * 2**zips * p + 1
    entries.
    """
    if k < 3:
        raise DomainError("k must be at least 3")
    return (k - 1) * (p << zips) + 1


def blankenship_inner_colors(r: int, p: int) -> int:
    """The reduced color count r - ceil(r/p) the recurrence refers to."""
    return r - -(-r // p)


def bound_blankenship(p: int, b_inner: int, k: int | None = None) -> int:
    """W(k, r) > p * b_inner, given W(k, r - ceil(r/p)) > b_inner and prime p <= k."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if k is not None and p > k:
        raise DomainError(f"the recurrence needs p <= k (p={p}, k={k})")
    return p * b_inner


# ---------------------------------------------------------------- closed forms


def formula_berlekamp(p: int) -> int:
    """W(p+1, 2) >= p(2^p - 1)."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    return p * (2**p - 1)


def formula_blankenship_power(p: int, r: int) -> int:
    """W(p+1, r) > p^(r-1) 2^p."""
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if r < 2:
        raise DomainError("r must be at least 2")
    return p ** (r - 1) * 2**p


def formula_szabo(k: int) -> float:
    """W(k, 2) >= 2^(k-1) / (e k)."""
    if k < 3:
        raise DomainError("k must be at least 3")
    return math.ldexp(1.0, k - 1) / (math.e * k)


def formula_landman_robertson(p: int, q: int) -> int:
    """W(p+1, q) >= p(q^p - 1) + 1 for primes p >= 5 and q."""
    if not (is_prime(p) and is_prime(q)):
        raise DomainError("p and q must be prime")
    if p < 5:
        raise DomainError(f"the formula needs p >= 5, got p={p}")
    return p * (q**p - 1) + 1


FORMULAS = {
    "berlekamp": formula_berlekamp,
    "blankenship-power": formula_blankenship_power,
    "szabo": formula_szabo,
    "landman-robertson": formula_landman_robertson,
    "rabung": bound_rabung,
    "zip": bound_zip,
    "blankenship": bound_blankenship,
}


# ---------------------------------------------------------------- reports


def growth_ratios(table: BoundsTable, r: int, digits: int | None = None) -> list[tuple[int, float]]:
    """Successive ratios bound(k)/bound(k-1) for one color count.

    k values whose predecessor is missing are skipped with a warning.
    ``digits`` rounds to that many significant digits.
    """
    ks = sorted(k for (k, rr) in table.records if rr == r)
    out = []
    for k in ks:
        prev = table.get(k - 1, r)
        if prev is None:
            if k != ks[0]:
                log.warning("no bound for W(%d,%d); skipping ratio at k=%d", k - 1, r, k)
            continue
        ratio = table.get(k, r).bound / prev.bound
        if digits is not None:
            ratio = float(f"{ratio:.{digits}g}")
        out.append((k, ratio))
    return out


def emit_table(table: BoundsTable, fmt: str = "tsv") -> str:
    rows = list(table)
    if fmt == "tsv":
        lines = ["\t".join(TSV_HEADER)]
        lines += [f"{rec.k}\t{rec.r}\t{rec.bound}\t{rec.status}\t{rec.recipe}" for rec in rows]
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = ["| k | r | bound | status | recipe |", "|---:|---:|---:|---|---|"]
        lines += [f"| {rec.k} | {rec.r} | {rec.bound:,} | {rec.status} | {rec.recipe} |" for rec in rows]
        return "\n".join(lines) + "\n"
    raise DomainError(f"unknown table format {fmt!r}")


def parse_table(text: str) -> BoundsTable:
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or tuple(lines[0].split("\t")) != TSV_HEADER:
        raise DomainError("bounds TSV must start with the header " + "\\t".join(TSV_HEADER))
    table = BoundsTable()
    for ln in lines[1:]:
        parts = ln.split("\t")
        if len(parts) != len(TSV_HEADER):
            raise DomainError(f"bad bounds row: {ln!r}")
        k, r, bound, status, recipe = parts
        table.add(BoundRecord(int(k), int(r), int(bound), recipe, status))
    return table


# ---------------------------------------------------------------- reference data


def reference_table() -> BoundsTable:
    """The published lower-bound table, one record per cell."""
    recipes = {(int(row["k"]), int(row["r"])): row["recipe"] for row in _read_tsv("table2.tsv")}
    table = BoundsTable(notes=["published reference values"])
    for row in _read_tsv("table1.tsv"):
        k, r, value = int(row["k"]), int(row["r"]), int(row["value"])
        exact = row["exact"] == "1"
        recipe = recipes.get((k, r), "published")
        table.add(BoundRecord(k, r, value - 1 if exact else value, recipe, "exact" if exact else "reference"))
    return table


def published_values() -> dict[tuple[int, int], tuple[int, bool, bool]]:
    """(k, r) -> (printed value, exact?, new?) for every cell of the table."""
    return {
        (int(row["k"]), int(row["r"])): (int(row["value"]), row["exact"] == "1", row["new"] == "1")
        for row in _read_tsv("table1.tsv")
    }


_RECIPES = [
    (re.compile(r"^(\d+)(Z*)$"), "rabung"),
    (re.compile(r"^(\d+)x(\d+)$"), "xu"),
    (re.compile(r"^(\d+)\*W'\((\d+),(\d+)\)$"), "blankenship"),
    (re.compile(r"^(\d+)\*\(W\((\d+),(\d+)\)-1\)$"), "blankenship-exact"),
]


def evaluate_recipe(k: int, r: int, recipe: str, published: dict | None = None) -> int:
    """Recompute the bound a printed recipe yields, by arithmetic only."""
    published = published_values() if published is None else published
    for pattern, method in _RECIPES:
        m = pattern.match(recipe)
        if not m:
            continue
        if method == "rabung":
            p, zips = int(m[1]), len(m[2])
            return bound_zip(p, k, zips) if zips else bound_rabung(p, k)
        if method == "xu":
            return int(m[1]) * int(m[2])
        p, kk, rr = int(m[1]), int(m[2]), int(m[3])
        value, exact, _ = published[(kk, rr)]
        if method == "blankenship-exact":
            if not exact:
                raise DomainError(f"W({kk},{rr}) is not a known exact value")
            value -= 1
        return bound_blankenship(p, value, k)
    raise DomainError(f"unrecognized recipe {recipe!r}")


@dataclass(frozen=True)
class ChainCheck:
    k: int
    r: int
    recipe: str
    computed: int
    published: int
    new: bool

    @property
    def agrees(self) -> bool:
        return self.computed == self.published


def soundness_chain() -> list[ChainCheck]:
    """Recompute every published recipe and compare with the published bound."""
    published = published_values()
    out = []
    for row in _read_tsv("table2.tsv"):
        k, r, recipe = int(row["k"]), int(row["r"]), row["recipe"]
        value, exact, new = published[(k, r)]
        target = value - 1 if exact else value
        out.append(ChainCheck(k, r, recipe, evaluate_recipe(k, r, recipe, published), target, new))
    return out
