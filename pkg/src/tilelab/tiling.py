"""Tilings A + B = Z_M and the three verification routes.

A pair (A, B) tiles when every residue has exactly one representation a + b.
Equivalent formulations, all implemented and kept in agreement:

  direct:      the sumset covers every residue exactly once
  divisor:     |A||B| = M and Div(A) & Div(B) = {M}, where
               Div(A) = {(a - a', M) : a, a' in A}
  cyclotomic:  |A||B| = M and every Phi_s with s | M, s > 1 divides
               A(X) or B(X)

Also here: coprime-dilation invariance (r with gcd(r, |A|) = 1 maps tilings
to tilings), divisor-preserving isometries (translations, dilations, plane
exchanges), dilation stabilizers, and exhaustive complement / tiling search
with divisor-exclusion pruning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .cyclotomic import cyclo_profile
from .errors import (ContextMismatchError, InputError, InvariantViolationError,
                     TheoremViolationError)
from .zm_core import Residue, TileSet, ZmContext, _same_context, factorize


class Tiling:
    """A verified (unless check=False) pair A + B = Z_M."""

    __slots__ = ("context", "A", "B", "_decomp")

    def __init__(self, A: TileSet, B: TileSet, check: bool = True):
        ctx = _same_context(A, B)
        if check and not verify_direct(A, B):
            raise InputError(f"not a tiling of Z_{ctx.M}: A={A.members} B={B.members}")
        object.__setattr__(self, "context", ctx)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "_decomp", None)

    def __setattr__(self, *_):
        raise AttributeError("Tiling is immutable")

    def __eq__(self, other):
        return (isinstance(other, Tiling) and other.context == self.context
                and other.A == self.A and other.B == self.B)

    def __hash__(self):
        return hash((self.context.M, self.A.mask, self.B.mask))

    def __repr__(self):
        return f"Tiling(M={self.context.M}, A={list(self.A)}, B={list(self.B)})"

    @property
    def decomp(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Arrays (a_of, b_of): z = a_of[z] + b_of[z] is the representation."""
        got = self._decomp
        if got is None:
            M = self.context.M
            a_of = [-1] * M
            b_of = [-1] * M
            for a in self.A:
                for b in self.B:
                    z = (a + b) % M
                    if a_of[z] >= 0:
                        raise InvariantViolationError(
                            f"double cover at {z}: {a_of[z]}+{b_of[z]} and {a}+{b}")
                    a_of[z] = a
                    b_of[z] = b
            if -1 in a_of:
                raise InvariantViolationError(
                    f"residue {a_of.index(-1)} uncovered; not a tiling")
            got = (tuple(a_of), tuple(b_of))
            object.__setattr__(self, "_decomp", got)
        return got

    def decompose(self, z: int) -> tuple[int, int]:
        a_of, b_of = self.decomp
        return a_of[z % self.context.M], b_of[z % self.context.M]

    def swapped(self) -> "Tiling":
        return Tiling(self.B, self.A, check=False)

    def normalized(self) -> "Tiling":
        """Translate each tile so it contains 0."""
        a0 = self.A.members[0] if len(self.A) else 0
        b0 = self.B.members[0] if len(self.B) else 0
        if a0 == 0 and b0 == 0:
            return self
        return Tiling(self.A.translate(-a0), self.B.translate(-b0), check=False)


def verify_direct(A: TileSet, B: TileSet) -> bool:
    """Exact-cover check on bitmasks."""
    ctx = _same_context(A, B)
    if len(A) * len(B) != ctx.M:
        return False
    covered = 0
    for a in A:
        shifted = ctx.rotate(B.mask, a)
        if shifted & covered:
            return False
        covered |= shifted
    return covered == ctx.full_mask


@lru_cache(maxsize=1 << 18)
def div_set(A: TileSet) -> frozenset[int]:
    """Div(A) = {(a - a', M)}; contains M whenever A is nonempty."""
    ctx = A.context
    gcds = ctx.gcd_table
    out = {ctx.M} if len(A) else set()
    ms = A.members
    for i, a in enumerate(ms):
        for a2 in ms[i + 1:]:
            out.add(gcds[a2 - a])
    return frozenset(out)


def verify_sands(A: TileSet, B: TileSet) -> bool:
    """|A||B| = M plus divisor exclusion: Div(A) and Div(B) share only M."""
    ctx = _same_context(A, B)
    if len(A) * len(B) != ctx.M:
        return False
    return div_set(A) & div_set(B) <= {ctx.M}

def verify_cyclotomic(A: TileSet, B: TileSet) -> bool:
    """|A||B| = M plus: every Phi_s, s | M, s > 1, divides one of the masks."""
    ctx = _same_context(A, B)
    if len(A) * len(B) != ctx.M:
        return False
    if ctx.M == 1:
        return True
    da = cyclo_profile(A).divisors_of_mask
    db = cyclo_profile(B).divisors_of_mask
    return all(s in da or s in db for s in ctx.divisors if s > 1)


def dilate(A: TileSet, r: int) -> TileSet:
    return A.dilate(r)


def tijdeman_orbit_check(t: Tiling) -> bool:
    """rA + B must tile for every r in [1, M) with gcd(r, |A|) = 1.

    A collapse (|rA| < |A|) or a failed cover for an admissible r would
    contradict the dilation theorem; both raise TheoremViolationError.
    """
    k = len(t.A)
    for r in range(1, t.context.M):
        if math.gcd(r, k) != 1:
            continue
        rA = t.A.dilate(r)
        if len(rA) != k:
            raise TheoremViolationError(
                f"dilation r={r} collapsed A={t.A.members} to {rA.members}")
        if not verify_direct(rA, t.B):
            raise TheoremViolationError(
                f"dilation r={r} broke the tiling: rA={rA.members}")
    return True


@dataclass(frozen=True, eq=False)
class IsometryTable:
    """A bijection of Z_M given by an explicit permutation table."""

    context: ZmContext
    perm: tuple[int, ...]

    def __post_init__(self):
        M = self.context.M
        if len(self.perm) != M or sorted(self.perm) != list(range(M)):
            raise InputError("perm is not a bijection of Z_M")

    def __eq__(self, other):
        return (isinstance(other, IsometryTable)
                and other.context == self.context and other.perm == self.perm)

    def __hash__(self):
        return hash((self.context.M, self.perm))

    def apply(self, v: int) -> int:
        return self.perm[v % self.context.M]

    def apply_set(self, A: TileSet) -> TileSet:
        if A.context != self.context:
            raise ContextMismatchError("isometry and tile over different moduli")
        return TileSet(self.context, (self.perm[a] for a in A))

    def compose(self, other: "IsometryTable") -> "IsometryTable":
        """self after other: x -> self(other(x))."""
        if other.context != self.context:
            raise ContextMismatchError("cannot compose over different moduli")
        return IsometryTable(self.context,
                             tuple(self.perm[v] for v in other.perm))

    @classmethod
    def translation(cls, ctx: ZmContext, c: int) -> "IsometryTable":
        return cls(ctx, tuple((v + c) % ctx.M for v in range(ctx.M)))

    @classmethod
    def dilation(cls, ctx: ZmContext, r: int) -> "IsometryTable":
        if math.gcd(r, ctx.M) != 1:
            raise InputError(f"dilation by r={r} is not a bijection mod {ctx.M}")
        return cls(ctx, tuple(v * r % ctx.M for v in range(ctx.M)))


def plane_exchange(c: Residue, c_prime: Residue, direction: int,
                   alpha: int) -> IsometryTable:
    """Swap the planes Pi(c, p_i^alpha) and Pi(c', p_i^alpha) by +-(c' - c).

    Requires (c - c', M) = M_i * p_i^{alpha-1}: the two planes are then
    distinct, parallel, and aligned in every other direction.
    """
    ctx = _same_context(c, c_prime)
    p, n = ctx.check_direction(direction)
    if not 1 <= alpha <= n:
        raise InputError(f"alpha={alpha} outside [1, {n}] for p={p}")
    required = ctx.crt_basis[direction] * p ** (alpha - 1)
    got = ctx.gcd_table[(c.value - c_prime.value) % ctx.M]
    if got != required:
        raise InputError(
            f"(c - c', M) = {got}, need {required} for a p={p}^{alpha} exchange")
    q = p**alpha
    delta = (c_prime.value - c.value) % ctx.M
    perm = []
    for x in range(ctx.M):
        if (x - c.value) % q == 0:
            perm.append((x + delta) % ctx.M)
        elif (x - c_prime.value) % q == 0:
            perm.append((x - delta) % ctx.M)
        else:
            perm.append(x)
    return IsometryTable(ctx, tuple(perm))


def is_divisor_isometry(psi: IsometryTable) -> bool:
    """Does psi preserve (x - x', M) for every pair?"""
    ctx = psi.context
    gcds = ctx.gcd_table
    M = ctx.M
    perm = psi.perm
    for x in range(M):
        px = perm[x]
        for y in range(x + 1, M):
            if gcds[(px - perm[y]) % M] != gcds[(x - y) % M]:
                return False
    return True


def _coprime_residues(ctx: ZmContext) -> tuple[int, ...]:
    return tuple(r for r in range(ctx.M) if ctx.gcd_table[r] == 1)


def dilation_stabilizer(x: Residue, x_prime: Residue) -> tuple[int, ...]:
    """All r coprime to M with r*x = x'; requires (x, M) = (x', M).

    The result has exactly phi(M)/phi(M/m) elements, m = (x, M), and equals
    L(r0, M/m) cut down to the coprime residues; both facts are asserted.
    """
    ctx = _same_context(x, x_prime)
    m = ctx.gcd_table[x.value]
    if ctx.gcd_table[x_prime.value] != m:
        raise InputError(
            f"(x, M) = {m} but (x', M) = {ctx.gcd_table[x_prime.value]}")
    hits = tuple(r for r in _coprime_residues(ctx)
                 if r * x.value % ctx.M == x_prime.value)
    expected = ctx.phi_table[ctx.M] // ctx.phi_table[ctx.M // m]
    if len(hits) != expected:
        raise InvariantViolationError(
            f"stabilizer of ({x.value}->{x_prime.value}) has {len(hits)} "
            f"elements, expected {expected}")
    step = ctx.M // m
    r0 = hits[0]
    lattice = {r for r in range(r0 % step, ctx.M, step) if ctx.gcd_table[r] == 1}
    if lattice != set(hits):
        raise InvariantViolationError(
            f"stabilizer is not the grid L({r0}, {step}) among coprimes")
    return hits

def simultaneous_dilation(ctx: ZmContext,
                          pairs: Sequence[tuple[int, int]]) -> int:
    """One r coprime to M with r*x_nu = x'_nu in every direction nu.

    Each pair must satisfy (x_nu, M) = (x'_nu, M) = M / p_nu^{alpha_nu} for
    some alpha_nu >= 1.  Any r agreeing with a per-direction witness r_nu
    mod p_nu^{alpha_nu} works; r is assembled by CRT and the postcondition
    is asserted.
    """
    if len(pairs) != ctx.direction_count:
        raise InputError(
            f"need one pair per direction ({ctx.direction_count}), got {len(pairs)}")
    witnesses = []
    for nu, (x, x2) in enumerate(pairs):
        p, n = ctx.primes[nu]
        g = ctx.gcd_table[x % ctx.M]
        if ctx.gcd_table[x2 % ctx.M] != g:
            raise InputError(f"direction {nu}: gcds with M differ")
        quo = ctx.M // g
        # (x, M) = M/p^alpha means M/(x, M) is a p-power, alpha >= 1
        alpha = 0
        while quo % p == 0:
            quo //= p
            alpha += 1
        if quo != 1 or alpha < 1:
            raise InputError(
                f"direction {nu}: (x, M) = {g} is not M/p^alpha for p={p}")
        r_nu = dilation_stabilizer(ctx.residue(x % ctx.M),
                                   ctx.residue(x2 % ctx.M))[0]
        witnesses.append(r_nu)
    r = 0
    for nu, r_nu in enumerate(witnesses):
        q = ctx.prime_powers[nu]
        basis = ctx.crt_basis[nu]
        r = (r + (r_nu % q) * basis * pow(basis, -1, q)) % ctx.M
    if ctx.gcd_table[r] != 1:
        raise InvariantViolationError(f"assembled r={r} is not coprime to M")
    for nu, (x, x2) in enumerate(pairs):
        if r * x % ctx.M != x2 % ctx.M:
            raise InvariantViolationError(
                f"assembled r={r} fails r*{x} = {x2} (direction {nu})")
    return r


def _forbidden_diff_mask(ctx: ZmContext, forbidden: frozenset[int]) -> int:
    mask = 0
    for v in range(1, ctx.M):
        if ctx.gcd_table[v] in forbidden:
            mask |= 1 << v
    return mask


def iter_complements(A: TileSet, normalize: bool = True,
                     limit: int | None = None) -> Iterator[TileSet]:
    """Stream complements of A in deterministic search order.

    Backtracking on the lowest uncovered residue; a candidate b is cut as
    soon as (b - b', M) lands in Div(A) \\ {M} for some placed b', which also
    rules out sumset collisions.
    """
    ctx = A.context
    M = ctx.M
    k = len(A)
    if k == 0 or M % k:
        return
    target = M // k
    forb = _forbidden_diff_mask(ctx, div_set(A) - {M})
    Amask = A.mask
    full = ctx.full_mask
    rotate = ctx.rotate
    members = A.members
    found = 0
    B: list[int] = []

    def walk(covered: int, blocked: int):
        nonlocal found
        if covered == full:
            found += 1
            yield TileSet(ctx, B)
            return
        if len(B) == target:
            return
        z = (~covered & (covered + 1)).bit_length() - 1
        for a in members:
            b = (z - a) % M
            if (blocked >> b) & 1:
                continue
            B.append(b)
            yield from walk(covered | rotate(Amask, b),
                            blocked | rotate(forb, b) | (1 << b))
            B.pop()
            if limit is not None and found >= limit:
                return

    if normalize:
        B.append(0)
        yield from walk(Amask, forb | 1)
    else:
        yield from walk(0, 0)


def find_complements(A: TileSet, normalize: bool = True,
                     limit: int | None = None) -> list[TileSet]:
    """All complements (first `limit` in search order if given), sorted."""
    out = list(iter_complements(A, normalize=normalize, limit=limit))
    out.sort(key=lambda ts: ts.members)
    return out


def _class_masks(ctx: ZmContext) -> dict[int, int]:
    """divisor d -> bitmask of {v in [1, M) : (v, M) = d}."""
    masks = {d: 0 for d in ctx.divisors}
    for v in range(1, ctx.M):
        masks[ctx.gcd_table[v]] |= 1 << v
    return masks


def iter_tilings(ctx: ZmContext, normalize: bool = True,
                 size_splits: Sequence[tuple[int, int]] | None = None
                 ) -> Iterator[Tiling]:
    """Stream every tiling with 0 in A (and 0 in B when normalize).

    Deterministic DFS, each tiling exactly once: the branch taken at the
    lowest uncovered residue z pins which pair (a, b) represents z, so two
    branches can never converge to the same pair.  Order is by size split
    (|A| ascending) then search order, not globally lexicographic; use
    enumerate_tilings for the canonical ordering.  size_splits restricts to
    the given (|A|, |B|) pairs.
    """
    M = ctx.M
    if size_splits is None:
        size_splits = [(d, M // d) for d in ctx.divisors]
    for dA, dB in size_splits:
        if dA < 1 or dA * dB != M:
            raise InputError(f"bad size split ({dA}, {dB}) for M={M}")
        yield from _pair_dfs(ctx, dA, dB, normalize)


def _pair_dfs(ctx: ZmContext, dA: int, dB: int, normalize: bool):
    """Recursive pair search for one size split; see iter_tilings.

    State per call: bitmasks for members, coverage, and "blocked" residues.
    blockedA contains A's members plus every v with (v - a, M) in Div(B)\\{M}
    for some placed a (divisor exclusion; it also subsumes sumset-collision
    pruning).  blockedB_refl mirrors blockedB through v -> -v, which is sound
    to maintain by symmetric updates because each divisor class mask is
    invariant under negation.
    """
    M = ctx.M
    full = ctx.full_mask
    rotate = ctx.rotate
    gcds = ctx.gcd_table
    class_masks = _class_masks(ctx)
    A = [0]
    B = [0] if normalize else []

    def walk(Amask, Bmask, covered, divA, divB, forbA, forbB,
             blockedA, blockedB, blockedB_refl):
        if covered == full:
            yield Tiling(TileSet(ctx, A), TileSet(ctx, B), check=False)
            return
        z = (~covered & (covered + 1)).bit_length() - 1
        na, nb = len(A), len(B)

        # existing a, new b = z - a
        if nb < dB:
            for a in A:
                b = (z - a) % M
                if not (blockedB >> b) & 1:
                    yield from place(Amask, Bmask, covered, divA, divB, forbA,
                                     forbB, blockedA, blockedB, blockedB_refl,
                                     None, b)
        # existing b, new a = z - b
        if na < dA:
            for b in B:
                a = (z - b) % M
                if not (blockedA >> a) & 1:
                    yield from place(Amask, Bmask, covered, divA, divB, forbA,
                                     forbB, blockedA, blockedB, blockedB_refl,
                                     a, None)
        # both new, a + b = z
        if na < dA and nb < dB:
            cand = full & ~blockedA & ~rotate(blockedB_refl, z)
            while cand:
                bit = cand & -cand
                a = bit.bit_length() - 1
                cand ^= bit
                b = (z - a) % M
                # blocked masks cleared a against divB and b against divA;
                # the fresh-vs-fresh difference classes still need a check
                gA = frozenset(gcds[(a - w) % M] for w in A)
                gB = frozenset(gcds[(b - w) % M] for w in B)
                if gA & gB:
                    continue
                yield from place(Amask, Bmask, covered, divA, divB, forbA,
                                 forbB, blockedA, blockedB, blockedB_refl,
                                 a, b)

    def place(Amask, Bmask, covered, divA, divB, forbA, forbB, blockedA,
              blockedB, blockedB_refl, a, b):
        # b first, so a's coverage update sees the final Bmask
        pushed_a = pushed_b = False
        if b is not None:
            newd = frozenset(gcds[(b - w) % M] for w in B) - divB
            B.append(b)
            pushed_b = True
            Bmask |= 1 << b
            covered |= rotate(Amask, b)
            blockedB |= rotate(forbB, b) | (1 << b)
            blockedB_refl |= rotate(forbB, -b) | (1 << (-b % M))
            if newd:
                divB = divB | newd
                grow = 0
                for d in newd:
                    grow |= class_masks[d]
                if grow:
                    forbA |= grow
                    for w in A:
                        blockedA |= rotate(grow, w)
        if a is not None:
            newd = frozenset(gcds[(a - w) % M] for w in A) - divA
            A.append(a)
            pushed_a = True
            Amask |= 1 << a
            covered |= rotate(Bmask, a)
            blockedA |= rotate(forbA, a) | (1 << a)
            if newd:
                divA = divA | newd
                grow = 0
                for d in newd:
                    grow |= class_masks[d]
                if grow:
                    forbB |= grow
                    for w in B:
                        blockedB |= rotate(grow, w)
                        blockedB_refl |= rotate(grow, -w)
        yield from walk(Amask, Bmask, covered, divA, divB, forbA, forbB,
                        blockedA, blockedB, blockedB_refl)
        if pushed_a:
            A.pop()
        if pushed_b:
            B.pop()

    seeded = 1 if normalize else 0
    yield from walk(1, seeded, seeded, frozenset(), frozenset(), 0, 0,
                    1, seeded, seeded)


def enumerate_tilings(ctx: ZmContext, normalize: bool = True) -> list[Tiling]:
    """Every tiling with 0 in A (and 0 in B if normalize), sorted by (A, B).

    Complete; exponentially many for composite M much beyond ~40, so prefer
    iter_tilings / sample_tilings for sweeps at that scale.
    """
    out = list(iter_tilings(ctx, normalize=normalize))
    out.sort(key=lambda t: (t.A.members, t.B.members))
    return out


def sample_tilings(ctx: ZmContext, cap: int,
                   normalize: bool = True) -> list[Tiling]:
    """Deterministic stratified prefix: round-robin over size splits up to cap."""
    M = ctx.M
    streams = [iter_tilings(ctx, normalize=normalize, size_splits=[(d, M // d)])
               for d in ctx.divisors]
    out: list[Tiling] = []
    while streams and len(out) < cap:
        still = []
        for stream in streams:
            nxt = next(stream, None)
            if nxt is None:
                continue
            out.append(nxt)
            still.append(stream)
            if len(out) >= cap:
                break
        streams = still
    return out


def tiling_to_json(t: Tiling) -> dict:
    return {"M": t.context.M, "A": list(t.A), "B": list(t.B)}


def tiling_from_json(obj: dict, check: bool = True) -> Tiling:
    """Parse {"M":…, "A":[…], "B":[…]}; check=False defers tiling-ness."""
    if not isinstance(obj, dict):
        raise InputError("tiling JSON must be an object")
    try:
        M = obj["M"]
    except KeyError:
        raise InputError("missing field M") from None
    if not isinstance(M, int) or M < 1:
        raise InputError(f"M must be a positive integer, got {M!r}")
    ctx = factorize(M)
    sets = {}
    for name in ("A", "B"):
        if name not in obj:
            raise InputError(f"missing field {name}")
        raw = obj[name]
        if not isinstance(raw, list):
            raise InputError(f"{name} must be a list")
        seen = set()
        for idx, v in enumerate(raw):
            if not isinstance(v, int) or isinstance(v, bool):
                raise InputError(f"{name}[{idx}] = {v!r} is not an integer")
            if not 0 <= v < M:
                raise InputError(f"{name}[{idx}] = {v} outside [0, {M})")
            if v in seen:
                raise InputError(f"{name}[{idx}] = {v} is a duplicate")
            seen.add(v)
        sets[name] = TileSet(ctx, raw)
    return Tiling(sets["A"], sets["B"], check=check)
