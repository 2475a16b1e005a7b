"""Colorings, certificates and Rabung's discrete-logarithm construction.

A Rabung block for a prime p colors position n in 1..p-1 by the discrete
logarithm of n modulo r.  Laying k-1 copies of it end to end, separated by
"fill" positions at the multiples of p, gives a certificate of length
(k-1)p + 1.  Whether that certificate avoids monochromatic k-term
progressions can be decided from the block alone: its longest run of equal
colors, plus a condition on the first few positions.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DomainError
from .numtheory import is_prime, is_primitive_root

MAX_COLORS = 36
DEFAULT_K_MAX = 25
TOPOLOGIES = ("linear", "cyclic")
VERIFIED_STATES = ("none", "shortcut", "direct")
CERT_KINDS = ("rabung", "zip", "product", "manual")

# Display letters: B and G as in the two-color examples, then Y R P V.
LETTERS = "BGYRPV" + "".join(c for c in string.ascii_uppercase if c not in "BGYRPV") + string.digits
_B36 = string.digits + string.ascii_lowercase

_CHUNK = 1 << 16
# Above this the int64 product of two residues can overflow.
_NUMPY_P_LIMIT = 3_000_000_000


@dataclass(frozen=True, eq=False)
class Coloring:
    """Colors of consecutive positions ``origin, origin+1, ...``.

    ``free`` lists positions whose color the construction left open (the
    stored value is a placeholder); certificate assembly searches them.
    """

    colors: np.ndarray
    r: int
    topology: str = "linear"
    origin: int = 0
    free: tuple[int, ...] = ()

    def __post_init__(self):
        arr = np.array(self.colors, dtype=np.int64, copy=True).ravel()
        if arr.size == 0:
            raise DomainError("a coloring needs at least one position")
        if not 2 <= self.r <= MAX_COLORS:
            raise DomainError(f"color count must be in 2..{MAX_COLORS}, got {self.r}")
        if arr.min() < 0 or arr.max() >= self.r:
            raise DomainError(f"color indices must lie in 0..{self.r - 1}")
        if self.topology not in TOPOLOGIES:
            raise DomainError(f"unknown topology {self.topology!r}")
        if self.origin not in (0, 1):
            raise DomainError("origin must be 0 or 1")
        packed = arr.astype(np.uint8)
        packed.setflags(write=False)
        object.__setattr__(self, "colors", packed)
        object.__setattr__(self, "free", tuple(sorted(set(self.free))))

    def __len__(self) -> int:
        return self.colors.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Coloring):
            return NotImplemented
        return (
            self.r == other.r
            and self.topology == other.topology
            and self.origin == other.origin
            and self.free == other.free
            and np.array_equal(self.colors, other.colors)
        )

    __hash__ = None

    @property
    def positions(self) -> range:
        return range(self.origin, self.origin + len(self))

    def color(self, position: int) -> int:
        idx = position - self.origin
        if self.topology == "cyclic":
            idx %= len(self)
        elif not 0 <= idx < len(self):
            raise IndexError(f"position {position} outside {self.positions}")
        return int(self.colors[idx])

    def tolist(self) -> list[int]:
        return self.colors.tolist()

    def letters(self) -> str:
        return "".join(LETTERS[c] for c in self.colors.tolist())

    @classmethod
    def from_letters(cls, text: str, r: int | None = None, **kw) -> "Coloring":
        colors = [LETTERS.index(ch) for ch in text]
        return cls(colors, r or max(2, max(colors) + 1), **kw)


@dataclass(frozen=True)
class Certificate:
    """A linear coloring of 0..n-1 claimed free of monochromatic k-APs.

    If the claim holds it proves W(k, r) > n.
    """

    coloring: Coloring
    k: int
    kind: str = "manual"
    provenance: str = ""
    verified: str = "none"

    def __post_init__(self):
        if self.k < 3:
            raise DomainError("progression length k must be at least 3")
        if self.coloring.topology != "linear" or self.coloring.origin != 0:
            raise DomainError("a certificate colors 0..n-1 linearly")
        if self.kind not in CERT_KINDS:
            raise DomainError(f"unknown certificate kind {self.kind!r}")
        if self.verified not in VERIFIED_STATES:
            raise DomainError(f"unknown verification state {self.verified!r}")
        if "\n" in self.provenance:
            raise DomainError("provenance must be a single line")

    @property
    def n(self) -> int:
        return len(self.coloring)

    @property
    def r(self) -> int:
        return self.coloring.r

    @property
    def bound(self) -> int:
        return self.n

    def meta(self) -> dict[str, str]:
        """``key=value`` tokens of the provenance string."""
        return dict(tok.split("=", 1) for tok in self.provenance.split() if "=" in tok)

    def with_status(self, verified: str) -> "Certificate":
        return replace(self, verified=verified)


@dataclass(frozen=True)
class RunStats:
    longest_run: int
    min_valid_k: int | None


@dataclass(frozen=True)
class PrimeAnalysis:
    p: int
    rho: int
    per_r: dict[int, RunStats] = field(default_factory=dict)


# ---------------------------------------------------------------- construction


def _powers(p: int, rho: int, chunk: int = _CHUNK) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (m0, [rho**m mod p for m in m0..m0+len-1]) covering m in 0..p-2."""
    total = p - 1
    size = min(chunk, total)
    block = np.ones(1, dtype=np.int64)
    while block.size < size:
        grow = min(block.size, size - block.size)
        block = np.concatenate([block, block[:grow] * pow(rho, block.size, p) % p])
    step = pow(rho, size, p)
    m0 = 0
    while m0 < total:
        n = min(size, total - m0)
        yield m0, block[:n]
        block = block * step % p
        m0 += size


def dlog_colors(p: int, rho: int, r_values: Iterable[int]) -> dict[int, np.ndarray]:
    """Discrete-log colorings of 1..p-1 for several color counts in one pass.

    Entry n-1 of each array is ``log_rho(n) mod r``.  One uint8 per position.
    """
    r_values = sorted(set(r_values))
    out = {r: np.empty(p - 1, dtype=np.uint8) for r in r_values}
    if p >= _NUMPY_P_LIMIT:
        x = 1
        for m in range(p - 1):
            for r in r_values:
                out[r][x - 1] = m % r
            x = x * rho % p
        return out
    ramp = np.arange(min(_CHUNK, p - 1), dtype=np.int64)
    for m0, pw in _powers(p, rho):
        exps = ramp[: pw.size] + m0
        idx = pw - 1
        for r in r_values:
            out[r][idx] = exps % r
    return out


def _check_root(p: int, rho: int) -> None:
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if not is_primitive_root(rho, p):
        raise DomainError(f"{rho} is not a primitive root of {p}")


def rabung_coloring(p: int, rho: int, r: int) -> Coloring:
    """Color position n in 1..p-1 by log_rho(n) mod r."""
    if p < 3:
        raise DomainError("Rabung's construction needs an odd prime")
    if not 2 <= r <= MAX_COLORS:
        raise DomainError(f"color count must be in 2..{MAX_COLORS}")
    _check_root(p, rho)
    return Coloring(dlog_colors(p, rho, [r])[r], r, origin=1)


# ---------------------------------------------------------------- run analysis


def _longest_run_array(arr: np.ndarray, chunk: int = _CHUNK) -> tuple[int, int]:
    """(length, start index) of the first longest constant block."""
    best_len, best_start = 0, 0
    cur_len, cur_start = 0, 0
    prev = None
    for base in range(0, arr.size, chunk):
        part = arr[base : base + chunk]
        cuts = np.flatnonzero(part[1:] != part[:-1]) + 1
        starts = np.concatenate(([0], cuts))
        lengths = np.diff(np.concatenate((starts, [part.size])))
        if prev is not None and part[0] == prev:
            lengths[0] += cur_len
            first_start = cur_start
        else:
            first_start = base
        # the last run may continue into the next chunk, so it is only a candidate
        run_starts = starts + base
        run_starts[0] = first_start
        if lengths.size > 1:
            i = int(np.argmax(lengths[:-1]))
            if lengths[i] > best_len:
                best_len, best_start = int(lengths[i]), int(run_starts[i])
        cur_len, cur_start = int(lengths[-1]), int(run_starts[-1])
        prev = part[-1]
    if cur_len > best_len:
        best_len, best_start = cur_len, cur_start
    return best_len, best_start


def longest_run(c: Coloring) -> tuple[int, int]:
    """Longest block of one color as (length, first position)."""
    if c.topology != "linear":
        raise DomainError("longest_run expects a linear coloring")
    length, start = _longest_run_array(c.colors)
    return length, start + c.origin


def _prefix_run(arr: np.ndarray) -> int:
    """Length of the constant block at the start of arr."""
    for base in range(0, arr.size, _CHUNK):
        diff = np.flatnonzero(arr[base : base + _CHUNK] != arr[0])
        if diff.size:
            return base + int(diff[0])
    return int(arr.size)


def _boundary_prefix(k: int, ends_match: bool) -> int:
    # (k-1)/2 rounded up: rounding down rejects valid primes such as p=97, r=3, k=4
    return k // 2 if ends_match else k - 1


def _boundary_ok(first: int, last: int, prefix_run: int, k: int) -> bool:
    return _boundary_prefix(k, first == last) > prefix_run


def rabung_boundary_ok(c: Coloring, k: int) -> bool:
    """Rabung's condition on the multiples of p.

    If positions 1 and p-1 share a color, positions 1..ceil((k-1)/2) must not
    all share one color; otherwise positions 1..k-1 must not.
    """
    arr = c.colors
    return _boundary_ok(int(arr[0]), int(arr[-1]), _prefix_run(arr), k)


def _require_divisible(p: int, r: int) -> None:
    if (p - 1) % r:
        raise DomainError(
            f"r={r} does not divide p-1={p - 1}: log mod r is not multiplicative, "
            "so the run shortcut does not apply"
        )


def rabung_valid(p: int, rho: int, r: int, k: int) -> bool:
    """True iff the assembled Rabung certificate avoids monochromatic k-APs."""
    _require_divisible(p, r)
    c = rabung_coloring(p, rho, r)
    return longest_run(c)[0] < k and rabung_boundary_ok(c, k)


def _min_valid_k_from(arr: np.ndarray, run: int, k_max: int) -> int | None:
    first, last, prefix = int(arr[0]), int(arr[-1]), _prefix_run(arr)
    for k in range(max(3, run + 1), k_max + 1):
        if _boundary_ok(first, last, prefix, k):
            return k
    return None


def run_stats(arr: np.ndarray, k_max: int = DEFAULT_K_MAX) -> RunStats:
    run = _longest_run_array(arr)[0]
    return RunStats(run, _min_valid_k_from(arr, run, k_max))


def min_valid_k(p: int, rho: int, r: int, k_max: int = DEFAULT_K_MAX) -> int | None:
    """Smallest k >= 3 for which the Rabung certificate is valid.

    None when r does not divide p-1 or no k <= k_max qualifies.  Validity
    is monotone in k, so every larger k also works.
    """
    if (p - 1) % r:
        return None
    return run_stats(rabung_coloring(p, rho, r).colors, k_max).min_valid_k


# ---------------------------------------------------------------- assembly


def alternating_fill(k: int) -> list[int]:
    return [i % 2 for i in range(k)]


def assemble_certificate(
    block: Coloring,
    k: int,
    fill: Sequence[int] | None = None,
    *,
    kind: str = "rabung",
    provenance: str = "",
) -> Certificate:
    """Repeat a block of positions 1..m-1 k-1 times with fill at multiples of m.

    The result colors 0..(k-1)m, so it has length (k-1)m + 1.
    """
    if block.origin != 1:
        raise DomainError("a block colors positions 1..m-1 (origin 1)")
    if k < 3:
        raise DomainError("k must be at least 3")
    fill = alternating_fill(k) if fill is None else list(fill)
    if len(fill) != k:
        raise DomainError(f"fill needs exactly k={k} colors, got {len(fill)}")
    if len(set(fill)) == 1:
        raise DomainError("fill colors must not all be equal")
    if max(fill) >= block.r or min(fill) < 0:
        raise DomainError("fill colors out of range")
    m = len(block) + 1
    out = np.empty((k - 1) * m + 1, dtype=np.uint8)
    body = out[: (k - 1) * m].reshape(k - 1, m)
    body[:, 1:] = block.colors
    out[::m] = fill
    free = [j * m + f for j in range(k - 1) for f in block.free]
    meta = f"period={m} fill={''.join(_B36[c] for c in fill)}"
    provenance = f"{provenance} {meta}".strip()
    return Certificate(Coloring(out, block.r, free=free), k, kind, provenance)


def block_of(cert: Certificate, period: int, free_step: int | None = None) -> Coloring:
    """Recover the repeated block 1..period-1 from an assembled certificate."""
    if period < 2 or cert.n < period + 1:
        raise DomainError(f"certificate of length {cert.n} has no block of period {period}")
    colors = cert.coloring.colors[1:period]
    free = range(free_step, period, free_step) if free_step else ()
    return Coloring(colors, cert.r, origin=1, free=tuple(free))


def multiplicative_permute(c: Coloring, d: int) -> Coloring:
    """The coloring i -> c(d*i mod p) of 1..p-1, where p = len(c) + 1."""
    if c.origin != 1:
        raise DomainError("expected a coloring of 1..p-1")
    p = len(c) + 1
    if d % p == 0:
        raise DomainError(f"d={d} is divisible by p={p}")
    idx = (d % p) * np.arange(1, p, dtype=np.int64) % p
    if np.any(idx == 0):
        raise DomainError(f"d={d} is not invertible modulo {p}")
    return Coloring(c.colors[idx - 1], c.r, origin=1)


# ---------------------------------------------------------------- file format v1

LINE_WIDTH = 80


def format_certificate(cert: Certificate) -> str:
    digits = "".join(_B36[c] for c in cert.coloring.colors.tolist())
    lines = [
        "vdwcert 1",
        f"k={cert.k} r={cert.r} n={cert.n} kind={cert.kind} meta={cert.provenance}",
    ]
    lines += [digits[i : i + LINE_WIDTH] for i in range(0, len(digits), LINE_WIDTH)]
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> Certificate:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 3 or lines[0] != "vdwcert 1":
        raise DomainError("not a vdwcert v1 file")
    head = lines[1].split(" ", 4)
    keys = ("k", "r", "n", "kind", "meta")
    if len(head) != 5 or any(not tok.startswith(key + "=") for tok, key in zip(head, keys)):
        raise DomainError(f"malformed header line: {lines[1]!r}")
    vals = [tok.split("=", 1)[1] for tok in head]
    k, r, n = (int(v) for v in vals[:3])
    body = lines[2:]
    if any(len(line) != LINE_WIDTH for line in body[:-1]) or not 0 < len(body[-1]) <= LINE_WIDTH:
        raise DomainError(f"color lines must hold exactly {LINE_WIDTH} digits except the last")
    digits = "".join(body)
    if len(digits) != n:
        raise DomainError(f"header says n={n} but {len(digits)} colors follow")
    try:
        colors = [_B36.index(ch) for ch in digits]
    except ValueError:
        raise DomainError("color digits must be 0-9a-z") from None
    return Certificate(Coloring(colors, r), k, vals[3], vals[4])


def write_certificate(cert: Certificate, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_certificate(cert))


def read_certificate(path) -> Certificate:
    with open(path, newline="") as fh:
        return parse_certificate(fh.read())

