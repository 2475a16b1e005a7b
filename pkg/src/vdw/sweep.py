"""Exhaustive Rabung sweeps over prime ranges, with checkpoints and merging.

A work unit covers the primes in [lo, hi).  For every prime it records the
longest run of each Rabung coloring and the smallest valid k; the best
(largest) valid prime per (k, r) becomes that unit's result.  Units can be
recomputed independently and merged; two results for the same unit must
carry the same checksum.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .bounds import BoundRecord, BoundsTable, bound_rabung
from .colorings import DEFAULT_K_MAX, MAX_COLORS, PrimeAnalysis, dlog_colors, run_stats
from .errors import DomainError, IntegrityError, ValidationError
from .numtheory import iter_prime_segments, primitive_root

log = logging.getLogger(__name__)

CHECKPOINT_EVERY = 1024
RESULT_HEADER = ("unit_id", "k", "r", "p", "bound", "checksum")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv_fold(h: int, values: Iterable[int]) -> int:
    """FNV-1a over the 8-byte little-endian encoding of each value."""
    for v in values:
        for byte in v.to_bytes(8, "little"):
            h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def fnv_text(text: str) -> int:
    h = _FNV_OFFSET
    for byte in text.encode():
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class WorkUnit:
    lo: int
    hi: int
    r_set: tuple[int, ...]
    k_max: int = DEFAULT_K_MAX
    unit_id: str = ""

    def __post_init__(self):
        if self.lo >= self.hi:
            raise DomainError(f"work unit needs lo < hi (lo={self.lo}, hi={self.hi})")
        if not self.r_set or any(not 2 <= r <= MAX_COLORS for r in self.r_set):
            raise DomainError(f"r_set must be nonempty with entries in 2..{MAX_COLORS}")
        if self.k_max < 3:
            raise DomainError("k_max must be at least 3")
        object.__setattr__(self, "r_set", tuple(sorted(set(self.r_set))))
        if not self.unit_id:
            object.__setattr__(self, "unit_id", f"{self.lo}-{self.hi}")

    def split(self, parts: int) -> list["WorkUnit"]:
        """Partition the range into ``parts`` contiguous units."""
        edges = [self.lo + (self.hi - self.lo) * i // parts for i in range(parts + 1)]
        return [
            WorkUnit(a, b, self.r_set, self.k_max)
            for a, b in zip(edges, edges[1:])
            if a < b
        ]


@dataclass
class SweepResult:
    unit_id: str
    best: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)
    primes: int = 0
    elapsed: float = 0.0
    checksum: int = _FNV_OFFSET

    def to_table(self) -> BoundsTable:
        return BoundsTable().update(
            BoundRecord(k, r, bound, f"rabung p={p}", "constructed-shortcut")
            for (k, r), (p, bound) in self.best.items()
        )


def analyze_prime(p: int, r_set: Sequence[int], k_max: int = DEFAULT_K_MAX) -> PrimeAnalysis:
    """Longest run and smallest valid k of each Rabung coloring of p.

    Uses the smallest primitive root; the root does not change either value.
    Color counts that do not divide p-1 get ``min_valid_k=None``.
    """
    rho = primitive_root(p)
    arrays = dlog_colors(p, rho, r_set)
    per_r = {}
    for r in sorted(arrays):
        stats = run_stats(arrays[r], k_max)
        if (p - 1) % r:
            stats = type(stats)(stats.longest_run, None)
        per_r[r] = stats
        del arrays[r]
    return PrimeAnalysis(p, rho, per_r)


def _analyze_batch(args) -> list[PrimeAnalysis]:
    primes, r_set, k_max = args
    return [analyze_prime(p, r_set, k_max) for p in primes]


def _absorb(result: SweepResult, a: PrimeAnalysis, k_max: int) -> None:
    for r, stats in a.per_r.items():
        result.checksum = fnv_fold(result.checksum, (a.p, r, stats.longest_run))
        if stats.min_valid_k is None:
            continue
        for k in range(stats.min_valid_k, k_max + 1):
            old = result.best.get((k, r))
            if old is None or a.p > old[0]:
                result.best[(k, r)] = (a.p, bound_rabung(a.p, k))
    result.primes += 1


# ---------------------------------------------------------------- checkpoints


def _unit_line(u: WorkUnit) -> str:
    return f"unit_id={u.unit_id} lo={u.lo} hi={u.hi} r_set={','.join(map(str, u.r_set))} k_max={u.k_max}"


def format_checkpoint(u: WorkUnit, last_p: int, result: SweepResult) -> str:
    lines = [
        "vdwsweep 1",
        _unit_line(u),
        f"last_p={last_p}",
        f"primes={result.primes}",
        f"fold={result.checksum}",
        "k\tr\tp\tbound",
    ]
    lines += [f"{k}\t{r}\t{p}\t{b}" for (k, r), (p, b) in sorted(result.best.items())]
    body = "\n".join(lines) + "\n"
    return body + f"checksum={fnv_text(body)}\n"


def parse_checkpoint(text: str, u: WorkUnit) -> tuple[int, SweepResult]:
    body, sep, tail = text.rpartition("checksum=")
    try:
        ok = sep and tail.endswith("\n") and int(tail) == fnv_text(body)
    except ValueError:
        ok = False
    if not ok:
        raise IntegrityError("checkpoint checksum missing or wrong; refusing to resume")
    lines = body.rstrip("\n").split("\n")
    if lines[0] != "vdwsweep 1" or lines[5] != "k\tr\tp\tbound":
        raise IntegrityError("not a vdwsweep v1 checkpoint")
    if lines[1] != _unit_line(u):
        raise IntegrityError(f"checkpoint belongs to a different unit: {lines[1]}")
    fields = dict(ln.split("=", 1) for ln in lines[2:5])
    result = SweepResult(u.unit_id, primes=int(fields["primes"]), checksum=int(fields["fold"]))
    for ln in lines[6:]:
        k, r, p, b = map(int, ln.split("\t"))
        result.best[(k, r)] = (p, b)
    return int(fields["last_p"]), result


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------- running


def _batches(u: WorkUnit, start: int, size: int) -> Iterator[list[int]]:
    batch: list[int] = []
    for seg in iter_prime_segments(max(start, 3), u.hi):
        for p in seg.tolist():
            batch.append(p)
            if len(batch) == size:
                yield batch
                batch = []
    if batch:
        yield batch


def run_workunit(
    u: WorkUnit,
    checkpoint_path: str | os.PathLike | None = None,
    threads: int = 1,
    checkpoint_every: int = CHECKPOINT_EVERY,
    stop_after: int | None = None,
) -> SweepResult:
    """Analyze every odd prime in [u.lo, u.hi) and keep the best per (k, r).

    With a checkpoint path the state is written every ``checkpoint_every``
    primes and an existing checkpoint is resumed.  ``stop_after`` aborts
    after that many batches (for interruption tests).
    """
    t0 = time.perf_counter()
    ckpt = Path(checkpoint_path) if checkpoint_path else None
    start = u.lo
    result = SweepResult(u.unit_id)
    if ckpt is not None and ckpt.exists():
        last_p, result = parse_checkpoint(ckpt.read_text(), u)
        start = last_p + 1
        log.info("resuming %s after p=%d (%d primes done)", u.unit_id, last_p, result.primes)

    batches = _batches(u, start, checkpoint_every)
    pool = ProcessPoolExecutor(threads) if threads > 1 else None
    try:
        for i, batch in enumerate(batches):
            if stop_after is not None and i >= stop_after:
                break
            if pool is None:
                analyses = _analyze_batch((batch, u.r_set, u.k_max))
            else:
                step = -(-len(batch) // (threads * 4))
                jobs = [(batch[j : j + step], u.r_set, u.k_max) for j in range(0, len(batch), step)]
                analyses = [a for part in pool.map(_analyze_batch, jobs) for a in part]
            for a in analyses:
                _absorb(result, a, u.k_max)
            if ckpt is not None:
                _write_atomic(ckpt, format_checkpoint(u, batch[-1], result))
    finally:
        if pool is not None:
            pool.shutdown()
    result.elapsed = time.perf_counter() - t0
    return result


# ---------------------------------------------------------------- result files


def format_result(result: SweepResult) -> str:
    lines = ["\t".join(RESULT_HEADER)]
    lines += [
        f"{result.unit_id}\t{k}\t{r}\t{p}\t{b}\t{result.checksum}"
        for (k, r), (p, b) in sorted(result.best.items())
    ]
    return "\n".join(lines) + "\n"


def parse_results(text: str) -> list[SweepResult]:
    """Read a result file; one SweepResult per unit_id it mentions."""
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or tuple(lines[0].split("\t")) != RESULT_HEADER:
        raise DomainError("sweep result file must start with the header " + " ".join(RESULT_HEADER))
    out: dict[str, SweepResult] = {}
    for ln in lines[1:]:
        parts = ln.split("\t")
        if len(parts) != len(RESULT_HEADER):
            raise DomainError(f"bad result row: {ln!r}")
        uid, k, r, p, b, cs = parts
        res = out.setdefault(uid, SweepResult(uid, checksum=int(cs)))
        if res.checksum != int(cs):
            raise IntegrityError(f"unit {uid} lists two checksums in one file")
        res.best[(int(k), int(r))] = (int(p), int(b))
    return list(out.values())


def _range_of(unit_id: str) -> tuple[int, int] | None:
    lo, sep, hi = unit_id.partition("-")
    if sep and lo.isdigit() and hi.isdigit():
        return int(lo), int(hi)
    return None


def merge_results(results: Sequence[SweepResult | str | os.PathLike]) -> BoundsTable:
    """Max-by-bound merge; duplicate units must agree exactly."""
    loaded: list[SweepResult] = []
    for item in results:
        if isinstance(item, SweepResult):
            loaded.append(item)
        else:
            loaded.extend(parse_results(Path(item).read_text()))
    seen: dict[str, SweepResult] = {}
    for res in loaded:
        twin = seen.get(res.unit_id)
        if twin is None:
            seen[res.unit_id] = res
        elif twin.checksum != res.checksum or twin.best != res.best:
            raise ValidationError(f"redundant results for unit {res.unit_id} disagree")
        else:
            log.info("unit %s validated by a duplicate result", res.unit_id)
    spans = sorted((rng, uid) for uid in seen if (rng := _range_of(uid)))
    for (a, ua), (b, ub) in zip(spans, spans[1:]):
        if b[0] < a[1]:
            log.warning("units %s and %s overlap", ua, ub)
    table = BoundsTable()
    for res in seen.values():
        table = table.merge(res.to_table())
    return table
