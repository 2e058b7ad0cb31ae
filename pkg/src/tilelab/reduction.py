"""Slab reduction and the large-prime route to the (T2) condition.

A tiling A + B = Z_M can sometimes be pushed down to a tiling of Z_{M/p}:
either by restricting the i-th CRT coordinate of A to [0, p^{n-1}) (the
"slab" of A) and projecting, or by dilating one tile by a prime p that does
not divide its cardinality and splitting the other by residue class mod p.
Chaining such steps until at most two distinct primes remain yields a
machine-checkable certificate that both tiles satisfy (T2): products of
prime powers s with Phi_s dividing the mask must themselves divide it.

Every step records enough to be replayed; `replay_certificate` re-derives
each intermediate tiling from scratch and fails loudly on any mismatch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

from .errors import (
    CollapseError,
    EquivalenceViolationError,
    ImplicationViolationError,
    InputError,
    InvariantViolationError,
    PipelineStuckError,
)
from .zm_core import TileSet, ZmContext, factorize, radical_quotient
from .cyclotomic import check_T2, cyclo_profile, divides_mask
from .tiling import Tiling, div_set, tiling_to_json, verify_direct
from .splitting import split_report


# ---------------------------------------------------------------------------
# slabs and coordinate projection


def slab_subset(A: TileSet, direction: int) -> TileSet:
    """Members of A whose CRT coordinate in `direction` is below p^{n-1}."""
    ctx = A.context
    p, n = ctx.check_direction(direction)
    bound = p ** (n - 1)
    table = ctx.coord_tables[direction]
    return TileSet(ctx, [a for a in A if table[a] < bound])


@lru_cache(maxsize=None)
def _projection(ctx: ZmContext, direction: int) -> tuple[ZmContext, tuple[int, ...]]:
    """Value table for Z_M -> Z_{M/p}: coordinate `direction` reduced mod
    p^{n-1} (dropped entirely when n = 1), the others carried over."""
    p, n = ctx.check_direction(direction)
    child = factorize(ctx.M // p)
    table = []
    for v in range(ctx.M):
        coords = list(ctx.coords_of(v))
        if n == 1:
            coords.pop(direction)
        else:
            coords[direction] %= p ** (n - 1)
        table.append(child.from_coords(coords).value)
    return child, tuple(table)


def project_tile(A: TileSet, direction: int) -> TileSet:
    """Image of A in Z_{M/p} under the coordinate projection (may collide)."""
    child, table = _projection(A.context, direction)
    return TileSet(child, {table[a] for a in A})


def slab_cond_i(t: Tiling, direction: int) -> tuple[bool, Optional[int]]:
    """Every translate A - c has its slab tiling Z_{M/p} against projected B.

    Returns (holds, witness translate c or None).
    """
    ctx = t.context
    p, n = ctx.check_direction(direction)
    child, table = _projection(ctx, direction)
    bound = p ** (n - 1)
    coord = ctx.coord_tables[direction]
    projected_b = TileSet(child, {table[b] for b in t.B})
    for c in range(ctx.M):
        shifted = [(a - c) % ctx.M for a in t.A]
        slab = TileSet(child, {table[a] for a in shifted if coord[a] < bound})
        if not verify_direct(slab, projected_b):
            return False, c
    return True, None


def slab_cond_ii(t: Tiling, direction: int) -> tuple[bool, Optional[int]]:
    """No m with p^n | m | M lies in Div(A) while m/p lies in Div(B)."""
    ctx = t.context
    p, n = ctx.check_direction(direction)
    q = p ** n
    da = div_set(t.A)
    db = div_set(t.B)
    for m in ctx.divisors:
        if m % q == 0 and m in da and (m // p) in db:
            return False, m
    return True, None


def slab_cond_iii(t: Tiling, direction: int) -> tuple[bool, Optional[int]]:
    """For p^n | d | M: Phi_d | A, or Phi_{d/p}, ..., Phi_{d/p^n} all divide B.

    Indices that collapse to 1 (only d = p^n produces one) are skipped in the
    product requirement.
    """
    ctx = t.context
    p, n = ctx.check_direction(direction)
    q = p ** n
    in_a = cyclo_profile(t.A).divisors_of_mask
    in_b = cyclo_profile(t.B).divisors_of_mask
    for d in ctx.divisors:
        if d % q:
            continue
        if d in in_a:
            continue
        if all(d // p ** alpha in in_b
               for alpha in range(1, n + 1) if d // p ** alpha > 1):
            continue
        return False, d
    return True, None


@dataclass(frozen=True)
class SlabVerdict:
    """Three independently evaluated slab conditions for one direction."""

    direction: int
    prime: int
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    witnesses: tuple[Optional[int], Optional[int], Optional[int]]

    @property
    def holds(self) -> bool:
        return self.cond_i

    def to_json(self) -> dict:
        return {
            "direction": self.prime,
            "direction_index": self.direction,
            "cond_i": self.cond_i,
            "cond_ii": self.cond_ii,
            "cond_iii": self.cond_iii,
        }


def slab_equivalence_check(t: Tiling, direction: int) -> SlabVerdict:
    """Evaluate all three slab conditions; they must agree.

    Requires Phi_{p^n} | A. Disagreement is an implementation defect, not a
    property of the input, hence the hard error.
    """
    ctx = t.context
    p, n = ctx.check_direction(direction)
    if not divides_mask(p ** n, t.A):
        raise InputError(
            f"slab equivalence needs Phi_{p ** n} | A; not satisfied for "
            f"A={t.A.members} in Z_{ctx.M}")
    one, w1 = slab_cond_i(t, direction)
    two, w2 = slab_cond_ii(t, direction)
    three, w3 = slab_cond_iii(t, direction)
    if not one == two == three:
        raise EquivalenceViolationError(
            f"slab conditions disagree in direction p={p} for A={t.A.members}"
            f" B={t.B.members} M={ctx.M}: "
            f"(i)={one} (ii)={two} (iii)={three}, witnesses={w1, w2, w3}")
    return SlabVerdict(direction, p, one, two, three, (w1, w2, w3))


# ---------------------------------------------------------------------------
# the splitting form of the slab conditions


def _unit_residues(ctx: ZmContext) -> list[int]:
    if ctx.M == 1:
        return [0]
    return [r for r in range(1, ctx.M) if ctx.gcd_table[r] == 1]


def splittingslab_equiv_check(t: Tiling, direction: int) -> bool:
    """Three equivalent statements about splitting along one direction.

    (I)   Phi_{p^n} | A together with the divisor exclusion slab_cond_ii;
    (II)  for every unit r, the tiling A + rB splits with rB collapsing and
          A spreading on every fiber;
    (III) for all a in A, b in B and x on the fiber through a, the members
          of A whose difference class against x matches some difference
          class of b within B all lie on x's plane.

    Returns the common truth value; raises if the three ever disagree.
    """
    ctx = t.context
    p, n = ctx.check_direction(direction)
    q = p ** n

    first = divides_mask(q, t.A) and slab_cond_ii(t, direction)[0]

    second = True
    for r in _unit_residues(ctx):
        scaled = Tiling(t.A, t.B.dilate(r), check=False)
        if not split_report(scaled, direction).uniform_ba:
            second = False
            break

    third = True
    coord = ctx.coord_tables[direction]
    gcds = ctx.gcd_table
    b_classes = {b: {gcds[(b - other) % ctx.M] for other in t.B} for b in t.B}
    step = ctx.M // p
    seen_fibers = set()
    for a in t.A:
        anchor = a % step
        if anchor in seen_fibers:
            continue
        seen_fibers.add(anchor)
        for k in range(p):
            x = (anchor + k * step) % ctx.M
            cx = coord[x]
            for classes in b_classes.values():
                if any(gcds[(x - a2) % ctx.M] in classes and coord[a2] != cx
                       for a2 in t.A):
                    third = False
                    break
            if not third:
                break
        if not third:
            break

    if not first == second == third:
        raise EquivalenceViolationError(
            f"splitting criteria disagree in direction p={p} for "
            f"A={t.A.members} B={t.B.members} M={ctx.M}: "
            f"(I)={first} (II)={second} (III)={third}")
    return first


# ---------------------------------------------------------------------------
# sufficient conditions and bounds


def slabcor_check(t: Tiling, direction: int) -> tuple[bool, bool]:
    """Sufficient conditions under which A must satisfy the slab conditions.

    Applicable when (i) every a in A has another A-member at difference class
    exactly M/p, or (ii) Phi_{p^n} | A and every plane through a B-member
    meets B in exactly |B| / gcd(|B|, p^n) points.  Returns
    (applicable, implied); when applicable, the slab conditions are verified
    and any failure raises.
    """
    ctx = t.context
    p, n = ctx.check_direction(direction)
    q = p ** n
    f = ctx.M // p

    fibered = all(
        any((a + k * f) % ctx.M in t.A for k in range(1, p))
        for a in t.A)

    coord = ctx.coord_tables[direction]
    counts: dict[int, int] = {}
    for b in t.B:
        counts[coord[b]] = counts.get(coord[b], 0) + 1
    expected = len(t.B) // math.gcd(len(t.B), q)
    saturated = (divides_mask(q, t.A)
                 and all(counts[coord[b]] == expected for b in t.B))

    if not (fibered or saturated):
        return False, False
    if not divides_mask(q, t.A):
        raise ImplicationViolationError(
            f"premise holds but Phi_{q} does not divide A={t.A.members} "
            f"in Z_{ctx.M}; slab conditions cannot be stated")
    verdict = slab_equivalence_check(t, direction)
    if not verdict.holds:
        raise ImplicationViolationError(
            f"premise holds but slab conditions fail for A={t.A.members} "
            f"B={t.B.members} direction p={p}: witnesses={verdict.witnesses}")
    return True, True


def plane_bound_check(B: TileSet, direction: int) -> bool:
    """|B intersect Pi(z, p^n)| <= gcd(|B|, M/p^n) for every plane z."""
    ctx = B.context
    p, n = ctx.check_direction(direction)
    bound = math.gcd(len(B), ctx.M // p ** n)
    coord = ctx.coord_tables[direction]
    counts: dict[int, int] = {}
    for b in B:
        counts[coord[b]] = counts.get(coord[b], 0) + 1
    return all(c <= bound for c in counts.values())


def blowbound_check(t: Tiling, direction: int) -> tuple[bool, bool]:
    """When p > gcd(|B|, M/p^n) and M/p is absent from Div(A), every fiber
    must split with A collapsing.  Returns (applicable, verdict)."""
    ctx = t.context
    p, n = ctx.check_direction(direction)
    applicable = (p > math.gcd(len(t.B), ctx.M // p ** n)
                  and ctx.M // p not in div_set(t.A))
    if not applicable:
        return False, False
    if not split_report(t, direction).uniform_ab:
        raise ImplicationViolationError(
            f"uniformity forced but violated: A={t.A.members} "
            f"B={t.B.members} M={ctx.M} direction p={p}")
    return True, True


# ---------------------------------------------------------------------------
# prime removal (dilation) step


def prime_power_dilate(A: TileSet, p: int) -> TileSet:
    """The dilate p*A, which must not lose members."""
    if p == 1:
        return A
    out = A.dilate(p)
    if len(out) < len(A):
        raise CollapseError(
            f"dilation by {p} collapses {A.members} in Z_{A.context.M}")
    return out


def _prime_removal_branches(t: Tiling, p: int) -> tuple[str, list[Tiling]]:
    """Split A + B = Z_M into p tilings of Z_{M/p}.

    The tile whose cardinality p does not divide is dilated by p (injective
    for genuine tilings); the other splits by residue class mod p.  Class j
    of Z_M is covered exactly by the reduced pair, giving one verified child
    tiling per class.
    """
    ctx = t.context
    if ctx.M % p:
        raise InputError(f"{p} does not divide M={ctx.M}")
    if len(t.A) % p and len(t.B) % p:
        raise InputError(f"{p} divides neither |A|={len(t.A)} nor |B|={len(t.B)}")
    if len(t.A) % p == 0 and len(t.B) % p == 0:
        raise InputError(f"{p} divides both |A| and |B|; no side to dilate")
    dilated = "A" if len(t.A) % p else "B"
    keep, split = (t.A, t.B) if dilated == "A" else (t.B, t.A)

    child = factorize(ctx.M // p)
    # a -> a mod M/p is the dilation p*A read in p*Z_M; injective unless p*A collapses
    kept = TileSet(child, {a % child.M for a in keep})
    if len(kept) < len(keep):
        raise CollapseError(
            f"dilation by {p} collapses {keep.members} in Z_{ctx.M}")

    branches = []
    for j in range(p):
        part = TileSet(child, [((b - j) % ctx.M) // p for b in split if b % p == j])
        pair = (kept, part) if dilated == "A" else (part, kept)
        branches.append(Tiling(pair[0], pair[1]))
    return dilated, branches


# ---------------------------------------------------------------------------
# the certificate pipeline


@dataclass(frozen=True)
class SlabStep:
    p: int
    side: str          # which tile was slabbed, "A" or "B"
    result: Tiling


@dataclass(frozen=True)
class PrimeRemovalStep:
    p: int
    dilated: str       # which tile was dilated, "A" or "B"
    result: Tiling     # residue-class-0 branch; others carry certificates
    side_certificates: tuple["T2Certificate", ...]


@dataclass(frozen=True)
class BaseCase:
    primes: int
    kind: str          # "two_primes" | "direct_check"


Step = Union[SlabStep, PrimeRemovalStep]


@dataclass(frozen=True)
class T2Certificate:
    """A replayable chain of reductions ending in a checkable base case."""

    input: Tiling
    steps: tuple[Step, ...]
    base: BaseCase
    t2_a: bool
    t2_b: bool
    large_prime_hypothesis: bool

    @property
    def success(self) -> bool:
        return self.t2_a and self.t2_b


def certificate_to_json(cert: T2Certificate) -> dict:
    steps: list[dict] = []
    for step in cert.steps:
        if isinstance(step, SlabStep):
            steps.append({"kind": "slab", "p": step.p})
        else:
            steps.append({"kind": "prime_removal", "p": step.p})
    steps.append({"kind": "base", "primes": cert.base.primes})
    return {
        "input": tiling_to_json(cert.input),
        "steps": steps,
        "t2": {"A": cert.t2_a, "B": cert.t2_b},
    }


def _removal_prime(t: Tiling) -> Optional[int]:
    """Largest prime of M dividing exactly one of the cardinalities."""
    best = None
    for p, _ in t.context.primes:
        if bool(len(t.A) % p) != bool(len(t.B) % p):
            best = p
    return best


def _slab_orientation(t: Tiling) -> Optional[str]:
    """Side to slab for the largest prime, or None if no orientation exists.

    Divisor exclusion guarantees M/p_1 is absent from Div(A) or Div(B) in a
    genuine tiling; the slab applies to the opposite tile (whose mask then
    carries Phi_{p^n}).  When both are absent, A is reduced.
    """
    ctx = t.context
    f = ctx.M // ctx.primes[-1][0]
    if f not in div_set(t.B):
        return "A"
    if f not in div_set(t.A):
        return "B"
    return None


def _slab_child(t: Tiling, side: str) -> Tiling:
    """Apply the slab reduction for the largest prime to the named side.

    Gates on the directly checked hypotheses (Phi_{p^n} divides the slabbed
    tile; divisor exclusion cond_ii) and verifies the projected pair tiles
    Z_{M/p}; raises InputError when the gate fails.
    """
    ctx = t.context
    direction = len(ctx.primes) - 1
    p, n = ctx.primes[-1]
    oriented = t if side == "A" else t.swapped()
    if not divides_mask(p ** n, oriented.A):
        raise InputError(f"Phi_{p ** n} does not divide tile {side}")
    ok, witness = slab_cond_ii(oriented, direction)
    if not ok:
        raise InputError(f"divisor exclusion fails at m={witness}")
    slab = slab_subset(oriented.A, direction)
    child_a = project_tile(slab, direction)
    child_b = project_tile(oriented.B, direction)
    if not verify_direct(child_a, child_b):
        raise EquivalenceViolationError(
            f"slab hypotheses hold but projected pair is not a tiling: "
            f"A={t.A.members} B={t.B.members} M={ctx.M} side={side} p={p}")
    return Tiling(child_a, child_b, check=False)


def prove_t2_largeprime(t: Tiling) -> T2Certificate:
    """Reduce a tiling until (T2) can be checked directly; certify the chain.

    Preference order at each stage: remove a prime dividing exactly one
    cardinality (largest such); otherwise slab the largest prime; otherwise
    fall back to a direct check.  Prime removal branches over all residue
    classes; class 0 continues the main chain and the rest carry their own
    certificates.  The certificate is replayed before being returned.
    """
    hypothesis = _large_prime_hypothesis(t.context)
    steps: list[Step] = []
    cur = t
    base: Optional[BaseCase] = None
    while True:
        ctx = cur.context
        k = len(ctx.primes)
        if k <= 2:
            if not (check_T2(cur.A) and check_T2(cur.B)):
                raise ImplicationViolationError(
                    f"tile with at most two prime factors fails (T2): "
                    f"A={cur.A.members} B={cur.B.members} M={ctx.M}")
            base = BaseCase(k, "two_primes")
            break

        p = _removal_prime(cur)
        if p is not None:
            dilated, branches = _prime_removal_branches(cur, p)
            side = tuple(prove_t2_largeprime(br) for br in branches[1:])
            steps.append(PrimeRemovalStep(p, dilated, branches[0], side))
            cur = branches[0]
            continue

        side_name = _slab_orientation(cur)
        if side_name is not None:
            missing = cur.swapped() if side_name == "A" else cur
            blowbound_check(missing, len(ctx.primes) - 1)  # advisory; raises only on disproof
            try:
                child = _slab_child(cur, side_name)
            except InputError:
                child = None
            if child is not None:
                steps.append(SlabStep(ctx.primes[-1][0], side_name, child))
                cur = child
                continue

        if check_T2(cur.A) and check_T2(cur.B):
            base = BaseCase(k, "direct_check")
            break
        raise PipelineStuckError(
            f"no reduction applies and direct check fails: M={ctx.M} "
            f"A={cur.A.members} B={cur.B.members} |A|={len(cur.A)} "
            f"|B|={len(cur.B)} orientation={side_name!r}")

    t2_a = check_T2(t.A)
    t2_b = check_T2(t.B)
    if not (t2_a and t2_b):
        raise ImplicationViolationError(
            f"certificate chain succeeded but direct (T2) check disagrees: "
            f"A={t2_a} B={t2_b} for A={t.A.members} B={t.B.members}")
    cert = T2Certificate(t, tuple(steps), base, t2_a, t2_b, hypothesis)
    replay_certificate(cert)
    return cert


def _large_prime_hypothesis(ctx: ZmContext) -> bool:
    if len(ctx.primes) < 2:
        return True
    p, n = ctx.primes[-1]
    return p > radical_quotient(ctx.M // p ** n)


def replay_certificate(cert: T2Certificate) -> bool:
    """Mechanically re-derive every step; any divergence raises."""
    cur = cert.input
    if not verify_direct(cur.A, cur.B):
        raise InvariantViolationError(
            f"certificate input is not a tiling: {cur!r}")
    for step in cert.steps:
        if isinstance(step, PrimeRemovalStep):
            dilated, branches = _prime_removal_branches(cur, step.p)
            if dilated != step.dilated or branches[0] != step.result:
                raise InvariantViolationError(
                    f"prime removal step does not replay: p={step.p} "
                    f"recorded {step.result!r}, derived {branches[0]!r}")
            if len(step.side_certificates) != len(branches) - 1:
                raise InvariantViolationError(
                    f"expected {len(branches) - 1} side certificates, "
                    f"found {len(step.side_certificates)}")
            for side_cert, branch in zip(step.side_certificates, branches[1:]):
                if side_cert.input != branch:
                    raise InvariantViolationError(
                        f"side certificate input {side_cert.input!r} does "
                        f"not match derived branch {branch!r}")
                replay_certificate(side_cert)
            cur = branches[0]
        else:
            if step.p != cur.context.primes[-1][0]:
                raise InvariantViolationError(
                    f"slab step prime {step.p} is not the largest prime "
                    f"of M={cur.context.M}")
            derived = _slab_child(cur, step.side)
            if derived != step.result:
                raise InvariantViolationError(
                    f"slab step does not replay: recorded {step.result!r}, "
                    f"derived {derived!r}")
            cur = derived
        if not verify_direct(cur.A, cur.B):
            raise InvariantViolationError(
                f"intermediate pair is not a tiling: {cur!r}")
    k = len(cur.context.primes)
    if cert.base.primes != k:
        raise InvariantViolationError(
            f"base case records {cert.base.primes} primes, chain ends with {k}")
    if (cert.base.kind == "two_primes") != (k <= 2):
        raise InvariantViolationError(
            f"base kind {cert.base.kind!r} inconsistent with {k} primes")
    if not (check_T2(cur.A) and check_T2(cur.B)):
        raise InvariantViolationError(
            f"base case tiles fail (T2): {cur!r}")
    if cert.t2_a != check_T2(cert.input.A) or cert.t2_b != check_T2(cert.input.B):
        raise InvariantViolationError("final (T2) booleans do not match direct checks")
    return True
