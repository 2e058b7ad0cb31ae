"""Per-fiber splitting parity and grid consistency.

Fix a tiling and a direction with prime power p^n exactly dividing M.  Every
fiber z*F = {z + t*M/p} is covered by pairs (a, b), and the contributing
sets Sigma_A, Sigma_B always land in one of two patterns:

    parity AB:  the a's collapse (p^n | a - a'), while distinct b's differ
                by exactly p^{n-1} (p^{n-1} divides, p^n does not)
    parity BA:  the same with the roles of A and B swapped

This dichotomy is total for tilings; uniformity notions quantify it over
all fibers of a direction, or only over fibers anchored at tile elements.
The second half of the module treats tilings whose A-part is a union of
fibers on every grid of step D = M/rad(M): direction assignments, layer
stratification of grids, and parity consistency along grid fibers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import (InputError, InvariantViolationError, LemmaViolationError,
                     NeitherParityError, NotFiberedError)
from .cyclotomic import divides_mask
from .tiling import Tiling
from .zm_core import TileSet, ZmContext, radical_quotient


class Parity(Enum):
    """Which tile collapses mod p^n on a fiber (named first)."""

    AB = "AB"
    BA = "BA"

    def swapped(self) -> "Parity":
        return Parity.BA if self is Parity.AB else Parity.AB


@dataclass(frozen=True)
class SigmaPair:
    """The elements of each tile that contribute to a zone's cover."""

    zone: TileSet
    sigma_a: TileSet
    sigma_b: TileSet


def sigma_sets(t: Tiling, zone: TileSet) -> SigmaPair:
    if zone.context != t.context:
        raise InputError("zone lives in a different modulus")
    a_of, b_of = t.decomp
    return SigmaPair(
        zone,
        TileSet(t.context, {a_of[z] for z in zone}),
        TileSet(t.context, {b_of[z] for z in zone}),
    )


def _collapses(coords: list[int]) -> bool:
    return len(set(coords)) <= 1


def _spreads(coords: list[int], p: int, n: int) -> bool:
    # distinct mod p^n, all congruent mod p^{n-1}
    if len(set(coords)) != len(coords):
        return False
    low = p ** (n - 1)
    return len({c % low for c in coords}) <= 1


def fiber_parity(t: Tiling, z: int, direction: int) -> Parity:
    """The unique splitting parity of the fiber z*F in the given direction."""
    ctx = t.context
    p, n = ctx.check_direction(direction)
    step = ctx.M // p
    anchor = z % step
    a_of, b_of = t.decomp
    table = ctx.coord_tables[direction]
    sa = {a_of[w] for w in range(anchor, ctx.M, step)}
    sb = {b_of[w] for w in range(anchor, ctx.M, step)}
    ca = [table[a] for a in sa]
    cb = [table[b] for b in sb]
    holds_ab = _collapses(ca) and _spreads(cb, p, n)
    holds_ba = _collapses(cb) and _spreads(ca, p, n)
    if holds_ab == holds_ba:
        kind = "both parities" if holds_ab else "neither parity"
        raise NeitherParityError(
            f"fiber {anchor}*F (direction p={p}) admits {kind}: "
            f"Sigma_A={sorted(sa)} Sigma_B={sorted(sb)}")
    return Parity.AB if holds_ab else Parity.BA


@dataclass(frozen=True)
class SplitReport:
    """Per-fiber parity map for one direction, with uniformity verdicts."""

    direction: int
    prime: int
    fibers: dict[int, Parity]
    a_anchors: frozenset[int]
    b_anchors: frozenset[int]

    def _uniform(self, parity: Parity, anchors=None) -> bool:
        keys = self.fibers if anchors is None else anchors
        return all(self.fibers[k] is parity for k in keys)

    @property
    def uniform_ab(self) -> bool:
        return self._uniform(Parity.AB)

    @property
    def uniform_ba(self) -> bool:
        return self._uniform(Parity.BA)

    @property
    def a_uniform_ab(self) -> bool:
        return self._uniform(Parity.AB, self.a_anchors)

    @property
    def a_uniform_ba(self) -> bool:
        return self._uniform(Parity.BA, self.a_anchors)

    @property
    def b_uniform_ab(self) -> bool:
        return self._uniform(Parity.AB, self.b_anchors)

    @property
    def b_uniform_ba(self) -> bool:
        return self._uniform(Parity.BA, self.b_anchors)

    def to_json(self) -> dict:
        return {
            "direction": self.prime,
            "direction_index": self.direction,
            "fibers": [{"anchor": k, "parity": self.fibers[k].value}
                       for k in sorted(self.fibers)],
            "verdicts": {
                "uniform_AB": self.uniform_ab,
                "uniform_BA": self.uniform_ba,
                "A_uniform_AB": self.a_uniform_ab,
                "A_uniform_BA": self.a_uniform_ba,
                "B_uniform_AB": self.b_uniform_ab,
                "B_uniform_BA": self.b_uniform_ba,
            },
        }


def split_report(t: Tiling, direction: int) -> SplitReport:
    ctx = t.context
    p, _ = ctx.check_direction(direction)
    step = ctx.M // p
    fibers = {anchor: fiber_parity(t, anchor, direction)
              for anchor in range(step)}
    return SplitReport(
        direction=direction,
        prime=p,
        fibers=fibers,
        a_anchors=frozenset(a % step for a in t.A.members),
        b_anchors=frozenset(b % step for b in t.B.members),
    )


def check_translate_splitting(t: Tiling, c: int, direction: int) -> bool:
    """Parities transported by translating A by -c agree fiber-for-fiber."""
    ctx = t.context
    p, _ = ctx.check_direction(direction)
    step = ctx.M // p
    shifted = Tiling(t.A.translate(-c), t.B, check=False)
    base = split_report(t, direction).fibers
    moved = split_report(shifted, direction).fibers
    return all(moved[(anchor - c) % step] is base[anchor] for anchor in base)


def _require_member(T: TileSet, v: int, name: str) -> None:
    if not T.mask >> (v % T.context.M) & 1:
        raise InputError(f"{v} is not an element of {name}")


def check_disjoint_sigma(t: Tiling, a0: int, a1: int,
                         direction: int) -> Optional[bool]:
    """With 0 in B, p^n | a0-a1 and both fibers of parity BA: the two
    Sigma_A sets must be disjoint.  None when the hypotheses fail."""
    ctx = t.context
    p, n = ctx.check_direction(direction)
    _require_member(t.A, a0, "A")
    _require_member(t.A, a1, "A")
    if a0 == a1:
        raise InputError("a0 and a1 must be distinct")
    if not t.B.mask & 1:
        return None
    table = ctx.coord_tables[direction]
    if table[a0 % ctx.M] != table[a1 % ctx.M]:
        return None
    if (fiber_parity(t, a0, direction) is not Parity.BA
            or fiber_parity(t, a1, direction) is not Parity.BA):
        return None
    step = ctx.M // p
    a_of, _ = t.decomp
    s0 = {a_of[w] for w in range(a0 % step, ctx.M, step)}
    s1 = {a_of[w] for w in range(a1 % step, ctx.M, step)}
    return not s0 & s1


def _plane_members(ctx: ZmContext, x: int, direction: int, alpha: int):
    """Residues congruent to x mod p^alpha in the given direction."""
    p, _ = ctx.primes[direction]
    table = ctx.coord_tables[direction]
    q = p ** alpha
    want = table[x % ctx.M] % q
    return [v for v in range(ctx.M) if table[v] % q == want]


def check_local_distribution(t: Tiling, a0: int,
                             direction: int) -> Optional[bool]:
    """With 0 in B and every fiber of A inside a0's p^{n-1}-plane splitting
    BA: adjacent p^n-planes hold equally many elements of A, and the
    prime-power cyclotomic divides the plane-restricted mask."""
    ctx = t.context
    p, n = ctx.check_direction(direction)
    _require_member(t.A, a0, "A")
    if not t.B.mask & 1:
        return None
    amask = t.A.mask
    low_plane = [v for v in _plane_members(ctx, a0, direction, n - 1)
                 if amask >> v & 1]
    if any(fiber_parity(t, a, direction) is not Parity.BA for a in low_plane):
        return None
    counts = []
    for nu in range(p):
        shifted = (a0 + nu * ctx.M // p) % ctx.M
        cnt = sum(1 for v in _plane_members(ctx, shifted, direction, n)
                  if amask >> v & 1)
        counts.append(cnt)
    if len(set(counts)) != 1:
        return False
    return divides_mask(p ** n, TileSet(ctx, low_plane))


def check_aunif(t: Tiling, direction: int) -> bool:
    """0 in B and A-uniform BA parity force the prime-power cyclotomic to
    divide A; returns the truth of that implication."""
    ctx = t.context
    p, n = ctx.check_direction(direction)
    if not t.B.mask & 1:
        return True
    if not split_report(t, direction).a_uniform_ba:
        return True
    return divides_mask(p ** n, t.A)


def plane_consistency(t: Tiling, z: int, pair: tuple[int, int]) -> int:
    """Some direction nu in the pair confines both Sigma sets of the grid
    L(z, M/p_i p_j) to the p_nu^{n_nu - 1}-planes of z's own pair (a, b)."""
    ctx = t.context
    i, j = pair
    pi, _ = ctx.check_direction(i)
    pj, _ = ctx.check_direction(j)
    if i == j:
        raise InputError("plane consistency needs two distinct directions")
    step = ctx.M // (pi * pj)
    a_of, b_of = t.decomp
    zone = range(z % step, ctx.M, step)
    sa = {a_of[w] for w in zone}
    sb = {b_of[w] for w in zone}
    for nu in sorted(pair):
        p, n = ctx.primes[nu]
        table = ctx.coord_tables[nu]
        q = p ** (n - 1)
        if (len({table[x] % q for x in sa}) == 1
                and len({table[x] % q for x in sb}) == 1):
            return nu
    raise LemmaViolationError(
        f"no consistent direction for grid at {z % step} (pair p={pi},{pj}): "
        f"Sigma_A={sorted(sa)} Sigma_B={sorted(sb)}")


def cross_direction_check(t: Tiling, z: int,
                          pair: tuple[int, int]) -> Optional[bool]:
    """If some contributing a0 carries a full direction-i fiber inside A,
    the whole Sigma_A of the grid sits in a0's p_j^{n_j - 1}-plane."""
    ctx = t.context
    i, j = pair
    pi, _ = ctx.check_direction(i)
    pj, nj = ctx.check_direction(j)
    if i == j:
        raise InputError("cross-direction check needs two distinct directions")
    step = ctx.M // (pi * pj)
    a_of, _ = t.decomp
    sa = {a_of[w] for w in range(z % step, ctx.M, step)}
    amask = t.A.mask
    fiber_step = ctx.M // pi
    anchors = [a for a in sa
               if all(amask >> ((a + k * fiber_step) % ctx.M) & 1
                      for k in range(pi))]
    if not anchors:
        return None
    table = ctx.coord_tables[j]
    q = pj ** (nj - 1)
    for a0 in anchors:
        want = table[a0] % q
        bad = [a for a in sa if table[a] % q != want]
        if bad:
            raise LemmaViolationError(
                f"Sigma_A escapes the plane of a0={a0} (directions "
                f"p={pi},{pj}): offending elements {sorted(bad)}")
    return True


# ---------------------------------------------------------------------------
# Grids of step D = M / rad(M) with fully fibered A-parts.


@dataclass(frozen=True)
class FiberedGridProfile:
    """Direction structure of a tile that is fibered on every D-grid."""

    tiling: Tiling
    radical_step: int
    dir_sets: tuple[frozenset[int], ...]
    kappa: dict[int, int]
    grid_dirs: dict[int, int]
    fibers: dict[int, tuple[int, ...]]


def fibered_grid_profile(t: Tiling) -> FiberedGridProfile:
    ctx = t.context
    if len(ctx.primes) != 3:
        raise InputError(
            f"fibered-grid analysis needs exactly 3 prime directions, "
            f"M={ctx.M} has {len(ctx.primes)}")
    D = radical_quotient(ctx.M)
    if D == 1:
        raise NotFiberedError(
            "D(M)=1 degenerate: every grid of step D(M) is the full group")
    if not divides_mask(ctx.M, t.A):
        raise InputError("the full-order cyclotomic does not divide A")
    amask = t.A.mask
    members = t.A.members
    dir_sets = []
    for nu in range(3):
        p, _ = ctx.primes[nu]
        step = ctx.M // p
        dir_sets.append(frozenset(
            a for a in members
            if all(amask >> ((a + k * step) % ctx.M) & 1 for k in range(p))))
    grid_dirs: dict[int, int] = {}
    kappa: dict[int, int] = {}
    for g in range(D):
        part = [a for a in members if a % D == g]
        if not part:
            continue
        dirs = [nu for nu in range(3)
                if all(a in dir_sets[nu] for a in part)]
        if not dirs:
            raise NotFiberedError(
                f"grid {g} (step {D}): A-part {part} is not a disjoint "
                f"union of fibers in any single direction")
        grid_dirs[g] = dirs[0]
        for a in part:
            kappa[a] = dirs[0]
    fibers: dict[int, tuple[int, ...]] = {}
    owner: dict[int, tuple[int, ...]] = {}
    for a in members:
        if a not in dir_sets[kappa[a]]:
            raise InvariantViolationError(
                f"{a} assigned direction {kappa[a]} without a full fiber")
        step = ctx.M // ctx.primes[kappa[a]][0]
        fib = tuple(sorted((a + k * step) % ctx.M
                           for k in range(ctx.primes[kappa[a]][0])))
        fibers[a] = fib
        for w in fib:
            if owner.setdefault(w, fib) != fib:
                raise InvariantViolationError(
                    f"fibers {owner[w]} and {fib} overlap at {w}")
    return FiberedGridProfile(t, D, tuple(dir_sets), kappa, grid_dirs, fibers)


def check_fiber_basic(profile: FiberedGridProfile) -> bool:
    """Translated fibers b*F(a) never overlap unless they coincide."""
    t = profile.tiling
    M = t.context.M
    placed: dict[int, tuple[int, tuple[int, ...]]] = {}
    for fib in sorted(set(profile.fibers.values())):
        for b in t.B.members:
            key = (b, fib)
            moved = [(w + b) % M for w in fib]
            for w in moved:
                prev = placed.setdefault(w, key)
                if prev != key:
                    raise LemmaViolationError(
                        f"translated fibers overlap at {w}: "
                        f"b={prev[0]} F={prev[1]} vs b={b} F={fib}")
    return True


@dataclass(frozen=True)
class GridStratification:
    """Directions used by one D-grid, stratified into layers."""

    anchor: int
    axis: int
    directions: frozenset[int]
    layers: tuple[int, ...]


def grid_stratification(profile: FiberedGridProfile,
                        z0: int) -> GridStratification:
    t = profile.tiling
    ctx = t.context
    D = profile.radical_step
    a_of, _ = t.decomp
    sigma = {a_of[w] for w in range(z0 % D, ctx.M, D)}
    dirs = frozenset(profile.kappa[a] for a in sigma)
    triple = [a for a in sigma
              if all(a in profile.dir_sets[nu] for nu in range(3))]
    for a in triple:
        if dirs != {profile.kappa[a]}:
            raise LemmaViolationError(
                f"grid {z0 % D}: {a} sits in every direction set with "
                f"kappa={profile.kappa[a]}, yet directions {sorted(dirs)} occur")
    if len(dirs) > 2:
        raise LemmaViolationError(
            f"grid {z0 % D} uses three fiber directions: "
            f"{ {a: profile.kappa[a] for a in sorted(sigma)} }")
    axis = max(set(range(3)) - dirs)
    p_axis = ctx.primes[axis][0]
    others = sorted(set(range(3)) - {axis})
    steps = [ctx.M // ctx.primes[nu][0] for nu in others]
    layers = []
    for nu in range(p_axis):
        base = (z0 + nu * ctx.M // p_axis) % ctx.M
        layer = {(base + alpha * steps[0] + beta * steps[1]) % ctx.M
                 for alpha in range(ctx.primes[others[0]][0])
                 for beta in range(ctx.primes[others[1]][0])}
        found = {profile.kappa[a_of[w]] for w in layer}
        if len(found) != 1:
            raise LemmaViolationError(
                f"layer {nu} of grid {z0 % D} mixes directions {sorted(found)}")
        layers.append(found.pop())
    return GridStratification(z0 % D, axis, dirs, tuple(layers))


def consistency3_check(profile: FiberedGridProfile) -> Optional[bool]:
    """Grid through 0 (when 0 is in both tiles): Sigma_A lies in a
    p_l^{n_l - 1}-plane for some direction l other than kappa(0)."""
    t = profile.tiling
    ctx = t.context
    if not (t.A.mask & 1 and t.B.mask & 1):
        return None
    i = profile.kappa[0]
    others = sorted(set(range(3)) - {i})
    D = profile.radical_step
    a_of, _ = t.decomp
    sigma = {a_of[w] for w in range(0, ctx.M, D)}
    candidates = []
    for l in others:
        p, n = ctx.primes[l]
        table = ctx.coord_tables[l]
        q = p ** (n - 1)
        if all(table[a] % q == 0 for a in sigma):
            candidates.append(l)
    if not candidates:
        raise LemmaViolationError(
            f"Sigma_A of the grid through 0 escapes both candidate planes: "
            f"{sorted(sigma)}")
    for j, k in ((others[0], others[1]), (others[1], others[0])):
        in_i = sigma & profile.dir_sets[i]
        in_j = sigma & profile.dir_sets[j]
        if sigma <= profile.dir_sets[i] | profile.dir_sets[j] and in_i and in_j:
            if k not in candidates:
                raise LemmaViolationError(
                    f"two-direction grid through 0 must align with the third "
                    f"direction, but {k} fails: Sigma_A={sorted(sigma)}")
    return True


def consistent_splitting_check(profile: FiberedGridProfile,
                               z0: int) -> Optional[Parity]:
    """On a two-direction grid whose layers use each direction at least
    twice, every axis fiber splits with one common parity."""
    strat = grid_stratification(profile, z0)
    if len(strat.directions) != 2:
        return None
    if any(strat.layers.count(nu) < 2 for nu in strat.directions):
        return None
    t = profile.tiling
    ctx = t.context
    D = profile.radical_step
    step = ctx.M // ctx.primes[strat.axis][0]
    anchors = {w % step for w in range(z0 % D, ctx.M, D)}
    parities = {anchor: fiber_parity(t, anchor, strat.axis)
                for anchor in sorted(anchors)}
    found = set(parities.values())
    if len(found) != 1:
        sample = {a: parities[a].value for a in sorted(parities)}
        raise LemmaViolationError(
            f"grid {z0 % D} has mixed axis parities: {sample}")
    return found.pop()
