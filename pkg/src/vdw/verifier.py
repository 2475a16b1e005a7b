"""Direct checks for monochromatic arithmetic progressions.

The production scanners work one spacing at a time with numpy: for spacing
d, ``eq[i] = c[i] == c[i+d]`` and a k-term progression starting at i is a
run of k-1 true entries along the chain i, i+d, i+2d, ...  The naive
scanners are plain loops kept as an independent oracle.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .colorings import Certificate, Coloring
from .errors import DomainError, ResourceLimitError

DEFAULT_CAP = 100_000


@dataclass(frozen=True)
class ApWitness:
    color: int
    start: int
    spacing: int
    length: int

    def positions(self) -> list[int]:
        return [self.start + i * self.spacing for i in range(self.length)]


def default_cap() -> int:
    return int(os.environ.get("VDW_CAP", DEFAULT_CAP))


def _array(c: Coloring | Sequence[int]) -> tuple[np.ndarray, int]:
    if isinstance(c, Coloring):
        return c.colors, c.origin
    return np.asarray(c), 0


def _chain_order(n: int, d: int) -> np.ndarray:
    """Indices 0..n-1 grouped by residue mod d, each group ascending."""
    return np.concatenate([np.arange(j, n, d) for j in range(min(d, n))])


def longest_ap(c: Coloring | Sequence[int]) -> ApWitness:
    """A longest monochromatic AP; ties go to the smallest spacing, then start."""
    arr, origin = _array(c)
    n = arr.size
    if n == 0:
        raise DomainError("empty coloring")
    best = ApWitness(int(arr[0]), origin, 1, 1)
    d = 1
    while d < n and (n - 1) // d + 1 > best.length:
        order = _chain_order(n, d)
        seq = arr[order]
        # links between consecutive members of the same chain
        link = (seq[1:] == seq[:-1]) & (order[1:] == order[:-1] + d)
        if link.any():
            cuts = np.flatnonzero(np.diff(np.concatenate(([0], link.view(np.int8), [0]))))
            starts, ends = cuts[::2], cuts[1::2]
            lengths = ends - starts + 1
            top = lengths.max()
            if top > best.length:
                first = order[starts[lengths == top]].min()
                best = ApWitness(int(arr[first]), int(first) + origin, d, int(top))
        d += 1
    return best


def find_mono_ap(c: Coloring | Sequence[int], k: int) -> ApWitness | None:
    """The canonical (smallest spacing, then start) monochromatic k-AP, if any."""
    if k < 1:
        raise DomainError("k must be positive")
    arr, origin = _array(c)
    n = arr.size
    if k == 1:
        return ApWitness(int(arr[0]), origin, 1, 1) if n else None
    for d in range(1, (n - 1) // (k - 1) + 1):
        span = n - (k - 1) * d
        eq = arr[:-d] == arr[d:]
        hit = eq[:span].copy()
        for j in range(1, k - 1):
            hit &= eq[j * d : j * d + span]
            if not hit.any():
                break
        else:
            if hit.any():
                i = int(np.argmax(hit))
                return ApWitness(int(arr[i]), i + origin, d, k)
    return None


def has_mono_ap(c: Coloring | Sequence[int], k: int) -> bool:
    return find_mono_ap(c, k) is not None


def find_mono_ap_cyclic(c: Coloring | Sequence[int], k: int) -> ApWitness | None:
    """Monochromatic k-AP in Z_n with wraparound.

    Only progressions whose k terms are distinct residues count; spacing d
    qualifies when its additive order n/gcd(n, d) is at least k.
    """
    arr, origin = _array(c)
    n = arr.size
    if k < 3 or n < k:
        raise DomainError(f"need k >= 3 and n >= k (k={k}, n={n})")
    for d in range(1, n):
        if n // math.gcd(n, d) < k:
            continue
        hit = np.ones(n, dtype=bool)
        for j in range(1, k):
            hit &= arr == np.roll(arr, -j * d)
            if not hit.any():
                break
        else:
            i = int(np.argmax(hit))
            return ApWitness(int(arr[i]), i + origin, d, k)
    return None


def has_mono_ap_cyclic(c: Coloring | Sequence[int], k: int) -> bool:
    return find_mono_ap_cyclic(c, k) is not None


# ---------------------------------------------------------------- naive oracle


def naive_longest_ap(colors: Sequence[int]) -> int:
    """Length of the longest monochromatic AP by exhaustive triple loop."""
    colors = list(colors)
    n = len(colors)
    best = 1 if n else 0
    for start in range(n):
        for d in range(1, n):
            length = 1
            while start + length * d < n and colors[start + length * d] == colors[start]:
                length += 1
            best = max(best, length)
    return best


def naive_has_mono_ap(colors: Sequence[int], k: int) -> bool:
    colors = list(colors)
    n = len(colors)
    for color in set(colors):
        for start in range(n):
            for d in range(1, n):
                if start + (k - 1) * d >= n:
                    break
                if all(colors[start + i * d] == color for i in range(k)):
                    return True
    return False


def naive_has_mono_ap_cyclic(colors: Sequence[int], k: int) -> bool:
    colors = list(colors)
    n = len(colors)
    for start in range(n):
        for d in range(1, n):
            terms = [(start + i * d) % n for i in range(k)]
            if len(set(terms)) == k and len({colors[t] for t in terms}) == 1:
                return True
    return False


# ---------------------------------------------------------------- certificates


def verify_certificate(cert: Certificate, cap: int | None = None) -> Certificate | ApWitness:
    """Directly check a certificate.

    Returns the certificate marked ``verified="direct"``, or the canonical
    progression that refutes it.
    """
    cap = default_cap() if cap is None else cap
    if cert.n > cap:
        raise ResourceLimitError(
            f"certificate length {cert.n} exceeds the direct-verification cap {cap}; "
            "raise the cap or rely on shortcut-only validation"
        )
    witness = find_mono_ap(cert.coloring.colors, cert.k)
    if witness is not None:
        return witness
    return cert.with_status("direct")


# ---------------------------------------------------------------- exact solver


def _tails(n_max: int, k: int) -> list[list[int]]:
    """For each position n, bitmasks of the k-1 earlier terms of APs ending at n."""
    tails = []
    for n in range(n_max):
        masks = []
        for d in range(1, n // (k - 1) + 1):
            masks.append(sum(1 << (n - i * d) for i in range(1, k)))
        tails.append(masks)
    return tails


def _extend_all(k: int, r: int, limit: int, collect_at: int | None = None):
    """Depth-first search over AP-free colorings with color-symmetry breaking.

    A new color may only be introduced in increasing order, so every
    coloring is explored once up to relabeling.  Returns the greatest length
    reached (capped at ``limit``) and, if requested, every coloring of
    length ``collect_at``.
    """
    tails = _tails(limit, k)
    masks = [0] * r
    seq: list[int] = []
    found: list[list[int]] = []
    best = 0

    def rec(n: int, used: int) -> bool:
        nonlocal best
        if n > best:
            best = n
        if n == collect_at:
            found.append(seq.copy())
            return False
        if n == limit:
            return True
        for color in range(min(used + 1, r)):
            m = masks[color]
            if any(m & t == t for t in tails[n]):
                continue
            masks[color] = m | (1 << n)
            seq.append(color)
            done = rec(n + 1, max(used, color + 1))
            seq.pop()
            masks[color] = m
            if done:
                return True
        return False

    rec(0, 0)
    return best, found


def brute_force_W(k: int, r: int, limit: int) -> int | None:
    """Exact W(k, r) if it is at most ``limit``, else None.

    W is one more than the longest AP-free coloring, found by exhaustive
    depth-first extension.
    """
    if k < 3 or r < 2:
        raise DomainError("need k >= 3 and r >= 2")
    best, _ = _extend_all(k, r, limit)
    return best + 1 if best < limit else None


def maximal_colorings(k: int, r: int, length: int) -> list[list[int]]:
    """All AP-free r-colorings of 0..length-1, up to relabeling of colors."""
    _, found = _extend_all(k, r, length + 1, collect_at=length)
    return found
