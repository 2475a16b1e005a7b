"""Certificate-enlarging constructions: the cyclic zipper and Xu's product.

Blocks are treated as colorings of Z_m whose residue 0 (and any ``free``
positions) is left open.  Zipping maps a Z_m block to a Z_2m block:

    out(2i)     = c(i)
    out(2i + 1) = c(i - s) + r/2   (mod r)

with the rotation s = (q - 1)/2 for q the odd part of m.  For an odd
period m this puts the copy of c(i) at odd position 2i + m, so the zipped
color of x is c(x/2 mod m), shifted by r/2 on odd x.  Residues that map
back to an open position stay open.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import BoundRecord
from .colorings import MAX_COLORS, Certificate, Coloring, assemble_certificate
from .errors import DomainError
from .numtheory import factorize
from .verifier import ApWitness, find_mono_ap, has_mono_ap, has_mono_ap_cyclic, verify_certificate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ZipRecipe:
    period: int
    r: int
    rotation: int

    @property
    def shift(self) -> int:
        return self.r // 2


@dataclass(frozen=True)
class ProductRecipe:
    n: int
    s: int
    m: int
    t: int
    k: int


def odd_part(m: int) -> int:
    while m % 2 == 0:
        m //= 2
    return m


def zip_recipe(block: Coloring) -> ZipRecipe:
    if block.origin != 1:
        raise DomainError("zip expects a block of positions 1..m-1")
    if block.r % 2:
        raise DomainError(f"zip needs an even color count, got r={block.r}")
    m = len(block) + 1
    return ZipRecipe(m, block.r, (odd_part(m) - 1) // 2)


def zip_block(block: Coloring, rotation: int | None = None) -> Coloring:
    """Double a block of period m into a block of period 2m."""
    recipe = zip_recipe(block)
    m, r = recipe.period, recipe.r
    s = recipe.rotation if rotation is None else rotation
    full = np.zeros(m, dtype=np.int64)
    full[1:] = block.colors
    is_open = np.zeros(m, dtype=bool)
    is_open[0] = True
    is_open[list(block.free)] = True
    src = (np.arange(m) - s) % m
    out = np.empty(2 * m, dtype=np.int64)
    out[0::2] = full
    out[1::2] = (full[src] + recipe.shift) % r
    out_open = np.empty(2 * m, dtype=bool)
    out_open[0::2] = is_open
    out_open[1::2] = is_open[src]
    out[out_open] = 0
    free = tuple(int(x) for x in np.flatnonzero(out_open[1:]) + 1)
    return Coloring(out[1:], r, origin=1, free=free)


def zip_twice(block: Coloring) -> Coloring:
    return zip_block(zip_block(block))


# ---------------------------------------------------------------- hole filling


def _hole_constraints(arr: np.ndarray, holes: np.ndarray, k: int) -> list[tuple[tuple[int, ...], int]]:
    """Constraints on open positions from APs that pass through them.

    arr holds colors with open positions marked -1.  Each constraint
    (hole indices, color) forbids giving all listed holes that color; color
    -1 forbids giving them any common color.
    """
    n = arr.size
    hole_index = np.full(n, -1, dtype=np.int64)
    hole_index[holes] = np.arange(holes.size)
    steps = np.arange(k)
    found: set[tuple[tuple[int, ...], int]] = set()
    for d in range(1, (n - 1) // (k - 1) + 1):
        starts = (holes[:, None] - steps[None, :] * d).ravel()
        starts = np.unique(starts[(starts >= 0) & (starts + (k - 1) * d < n)])
        if starts.size == 0:
            continue
        pos = starts[:, None] + steps[None, :] * d
        vals = arr[pos]
        closed = vals >= 0
        ref = np.where(closed.any(axis=1), vals.max(axis=1), -1)
        mono = np.all(~closed | (vals == ref[:, None]), axis=1)
        for row in np.flatnonzero(mono):
            hs = hole_index[pos[row][~closed[row]]]
            found.add((tuple(sorted(int(h) for h in hs)), int(ref[row])))
    return sorted(found)


def _solve_holes(n_holes: int, r: int, constraints) -> list[int] | None:
    by_last: dict[int, list] = {}
    for hs, color in constraints:
        by_last.setdefault(hs[-1], []).append((hs, color))
    assign: list[int] = []

    def consistent(i: int) -> bool:
        for hs, color in by_last.get(i, ()):
            cols = {assign[h] for h in hs}
            if len(cols) == 1 and (color < 0 or color in cols):
                return False
        return True

    def rec(i: int) -> bool:
        if i == n_holes:
            return True
        for color in range(r):
            assign.append(color)
            if consistent(i) and rec(i + 1):
                return True
            assign.pop()
        return False

    return assign if rec(0) else None


def complete_certificate(
    block: Coloring,
    k: int,
    *,
    kind: str = "zip",
    provenance: str = "",
    cap: int | None = None,
) -> Certificate | ApWitness:
    """Assemble a block and choose colors for every open position.

    The alternating fill is tried first.  Failing that, the fill at the
    multiples of the period and the block's free positions are solved
    exactly by backtracking over the constraints that progressions through
    them impose.  The result is always direct-verified; an ApWitness is
    returned when no choice of open colors can work.
    """
    cert = assemble_certificate(block, k, kind=kind, provenance=provenance)
    m = len(block) + 1
    holes = np.union1d(np.arange(0, cert.n, m), cert.coloring.free).astype(np.int64)
    if not block.free:
        checked = verify_certificate(cert, cap)
        if isinstance(checked, Certificate):
            return checked
    arr = cert.coloring.colors.astype(np.int64)
    probe = arr.copy()
    probe[holes] = -1 - np.arange(holes.size)
    core = find_mono_ap(probe, k)
    if core is not None:
        log.info("block itself contains a monochromatic %d-AP; no fill can help", k)
        return core
    arr[holes] = -1
    constraints = _hole_constraints(arr, holes, k)
    log.info("solving %d open positions under %d constraints", holes.size, len(constraints))
    solution = _solve_holes(holes.size, block.r, constraints)
    if solution is None:
        arr[holes] = [i % 2 for i in range(holes.size)]
        return find_mono_ap(arr, k)
    arr[holes] = solution
    fill = arr[::m]
    meta = f"period={m} fill={fill_from(fill)} searched={holes.size}"
    done = Certificate(Coloring(arr, block.r), k, kind, f"{provenance} {meta}".strip())
    return verify_certificate(done, cap)


# ---------------------------------------------------------------- Xu product


def least_prime_factor(n: int) -> int:
    return factorize(n).primes[0]


def product_violations(outer: Coloring, inner: Coloring, k: int) -> list[str]:
    """Which hypotheses of Xu's product theorem fail for these inputs."""
    n = len(outer)
    bad = []
    if k < 3:
        bad.append("k >= 3")
    if n < 5:
        bad.append(f"n >= 5 (n={n})")
    elif least_prime_factor(n) <= k:
        bad.append(f"least prime divisor of n={n} exceeds k={k}")
    if n >= k and has_mono_ap_cyclic(outer.colors, k):
        bad.append(f"outer coloring of Z_{n} avoids cyclic monochromatic {k}-APs")
    if has_mono_ap(inner.colors, k):
        bad.append(f"inner coloring avoids monochromatic {k}-APs")
    return bad


def xu_product(outer: Coloring, inner: Coloring, k: int, permissive: bool = False) -> Coloring:
    """Combine a ring coloring of Z_n with a linear coloring of length m.

    Position x in 0..nm-1 gets color outer(x mod n) * t + inner(x div n):
    the ring coloring repeats with period n and the inner coloring is
    stretched by n.  Under the theorem's hypotheses a k-AP whose spacing is
    a multiple of n sees an AP of the inner coloring, and any other k-AP
    sees k distinct residues of Z_n, so neither can be monochromatic.
    """
    s, t = outer.r, inner.r
    if s * t > MAX_COLORS:
        raise DomainError(f"product needs {s * t} colors; at most {MAX_COLORS} supported")
    if not permissive:
        bad = product_violations(outer, inner, k)
        if bad:
            raise DomainError("product theorem hypotheses fail: " + "; ".join(bad))
    colors = outer.colors.astype(np.int64)[None, :] * t + inner.colors.astype(np.int64)[:, None]
    return Coloring(colors.ravel(), s * t)


def xu_bound(n: int, b: int, k: int, s: int, t: int) -> BoundRecord:
    """W(k, s*t) > n*b from a ring coloring of Z_n and a (k, t) certificate of length b.

    The theorem's own value n*(W(k,t) - 1) + 1, taking W(k,t) = b + 1, is kept
    in the recipe.
    """
    return BoundRecord(k, s * t, n * b, f"xu:{b}x{n};theorem={n * b + 1}", "formula")


def product_certificate(outer: Coloring, inner: Coloring, k: int, permissive: bool = False) -> Certificate:
    c = xu_product(outer, inner, k, permissive)
    meta = f"n={len(outer)} s={outer.r} m={len(inner)} t={inner.r}"
    return Certificate(c, k, "product", meta)


def fill_from(seq: Sequence[int]) -> str:
    return "".join(np.base_repr(int(c), 36).lower() for c in seq)
