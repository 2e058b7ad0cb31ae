"""Exact arithmetic and geometry of Z_M.

Everything downstream works inside a fixed cyclic group Z_M with
M = p_1^{n_1} * ... * p_K^{n_K}.  A ZmContext precomputes the factorization,
divisor lattice, Euler phi values, CRT basis elements M_j = M / p_j^{n_j} and
per-residue CRT coordinates, plus a gcd table so that (x - y, M) lookups are
O(1).  Directions are 0-based indices into the ascending prime list.

Geometry: a grid L(x, D) = {x' : D | x - x'} for D | M; special cases are
lines (D = M_j), planes (D = p_j^alpha) and fibers (D = M / p_j).  Sets of
residues are TileSets, stored both as a sorted tuple and as a bitmask with one
bit per residue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .errors import ContextMismatchError, InputError


def prime_factorization(n: int) -> tuple[tuple[int, int], ...]:
    """Trial-division factorization, ((p, exponent), ...) with p ascending."""
    if n < 1:
        raise InputError(f"positive integer required, got {n}")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def euler_phi(n: int) -> int:
    phi = 1
    for p, e in prime_factorization(n):
        phi *= (p - 1) * p ** (e - 1)
    return phi


def radical_quotient(n: int) -> int:
    """N / prod(p | N): the largest D with D * rad(N) = N.  D(12)=2, D(30)=1."""
    rad = 1
    for p, _ in prime_factorization(n):
        rad *= p
    return n // rad


def _divisors_of(factorization: tuple[tuple[int, int], ...]) -> tuple[int, ...]:
    divs = [1]
    for p, e in factorization:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return tuple(sorted(divs))


@dataclass(frozen=True, eq=False)
class ZmContext:
    """Immutable bundle of everything precomputable about Z_M."""

    M: int
    primes: tuple[tuple[int, int], ...]      # ((p, n), ...) ascending
    divisors: tuple[int, ...]                # all divisors of M, ascending
    phi_table: dict[int, int]                # d | M  ->  phi(d)
    crt_basis: tuple[int, ...]               # M_j = M / p_j^{n_j}
    prime_powers: tuple[int, ...]            # p_j^{n_j}
    gcd_table: tuple[int, ...]               # v -> gcd(v, M), v in [0, M)
    coord_tables: tuple[tuple[int, ...], ...]  # per direction: v -> pi_j(v)
    full_mask: int

    def __eq__(self, other):
        return isinstance(other, ZmContext) and other.M == self.M

    def __hash__(self):
        return hash(("ZmContext", self.M))

    def __repr__(self):
        return f"ZmContext(M={self.M})"

    @property
    def direction_count(self) -> int:
        return len(self.primes)

    def check_direction(self, i: int) -> tuple[int, int]:
        if not 0 <= i < len(self.primes):
            raise InputError(f"direction {i} out of range for M={self.M}")
        return self.primes[i]

    def direction_of_prime(self, p: int) -> int:
        for i, (q, _) in enumerate(self.primes):
            if q == p:
                return i
        raise InputError(f"{p} does not divide M={self.M}")

    def residue(self, value: int) -> "Residue":
        if not 0 <= value < self.M:
            raise InputError(f"residue {value} outside [0, {self.M})")
        return Residue(self, value, self.coords_of(value))

    def coords_of(self, value: int) -> tuple[int, ...]:
        return tuple(t[value] for t in self.coord_tables)

    def to_coords(self, value: int) -> "Residue":
        return self.residue(value)

    def from_coords(self, coords: Iterable[int]) -> "Residue":
        coords = tuple(coords)
        if len(coords) != len(self.primes):
            raise InputError(
                f"expected {len(self.primes)} coordinates, got {len(coords)}")
        value = 0
        for x_j, q, basis in zip(coords, self.prime_powers, self.crt_basis):
            if not 0 <= x_j < q:
                raise InputError(f"coordinate {x_j} outside [0, {q})")
            value = (value + x_j * basis) % self.M
        return Residue(self, value, coords)

    def gcd_with_m(self, value: int) -> int:
        return self.gcd_table[value % self.M]

    def p_component(self, value: int, i: int) -> int:
        """p_i^min(v_p(value), n_i) where value is read mod M; M itself dims to p_i^{n_i}."""
        p, _ = self.check_direction(i)
        g = self.gcd_table[value % self.M]
        comp = 1
        while g % p == 0:
            comp *= p
            g //= p
        return comp

    def rotate(self, mask: int, k: int) -> int:
        """Cyclic shift of an M-bit mask: bit v -> bit (v + k) mod M."""
        k %= self.M
        if k == 0:
            return mask
        return ((mask << k) | (mask >> (self.M - k))) & self.full_mask


@lru_cache(maxsize=None)
def factorize(M: int) -> ZmContext:
    """Build (and memoize) the context for Z_M."""
    if M < 1:
        raise InputError(f"modulus must be >= 1, got {M}")
    primes = prime_factorization(M)
    divisors = _divisors_of(primes)
    phi_table = {d: euler_phi(d) for d in divisors}
    prime_powers = tuple(p**n for p, n in primes)
    crt_basis = tuple(M // q for q in prime_powers)
    gcd_table = tuple(math.gcd(v, M) for v in range(M))
    coord_tables = []
    for q, basis in zip(prime_powers, crt_basis):
        inv = pow(basis, -1, q)
        coord_tables.append(tuple((v % q) * inv % q for v in range(M)))
    return ZmContext(
        M=M,
        primes=primes,
        divisors=divisors,
        phi_table=phi_table,
        crt_basis=crt_basis,
        prime_powers=prime_powers,
        gcd_table=gcd_table,
        coord_tables=tuple(coord_tables),
        full_mask=(1 << M) - 1,
    )


@dataclass(frozen=True, eq=False)
class Residue:
    """A residue with its CRT coordinates (x = sum x_j M_j mod M)."""

    context: ZmContext
    value: int
    coords: tuple[int, ...]

    def __eq__(self, other):
        return (isinstance(other, Residue)
                and other.context == self.context
                and other.value == self.value)

    def __hash__(self):
        return hash((self.context.M, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"Residue({self.value} mod {self.context.M})"


def _same_context(a, b) -> ZmContext:
    if a.context != b.context:
        raise ContextMismatchError(
            f"mixed moduli {a.context.M} and {b.context.M}")
    return a.context


def gcd_divisor(x: Residue, y: Residue) -> int:
    """(x - y, M); equals M exactly when x = y."""
    ctx = _same_context(x, y)
    return ctx.gcd_table[(x.value - y.value) % ctx.M]


class TileSet:
    """An immutable set of residues of Z_M, with a bitmask mirror.

    Membership, subset and translation tests run on the mask; ordered
    iteration uses the sorted member tuple.
    """

    __slots__ = ("context", "members", "mask")

    def __init__(self, context: ZmContext, members: Iterable[int]):
        seen = 0
        for v in members:
            if not 0 <= v < context.M:
                raise InputError(f"residue {v} outside [0, {context.M})")
            seen |= 1 << v
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "mask", seen)
        object.__setattr__(self, "members", _mask_members(seen))

    @classmethod
    def from_mask(cls, context: ZmContext, mask: int) -> "TileSet":
        if mask < 0 or mask > context.full_mask:
            raise InputError("mask outside the residue range")
        ts = object.__new__(cls)
        object.__setattr__(ts, "context", context)
        object.__setattr__(ts, "mask", mask)
        object.__setattr__(ts, "members", _mask_members(mask))
        return ts

    def __setattr__(self, *_):
        raise AttributeError("TileSet is immutable")

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.context.M and self.mask >> v & 1

    def __eq__(self, other):
        return (isinstance(other, TileSet)
                and other.context == self.context
                and other.mask == self.mask)

    def __hash__(self):
        return hash((self.context.M, self.mask))

    def __repr__(self):
        return f"TileSet(M={self.context.M}, {{{', '.join(map(str, self.members))}}})"

    def translate(self, c: int) -> "TileSet":
        ctx = self.context
        return TileSet.from_mask(ctx, ctx.rotate(self.mask, c))

    def dilate(self, r: int) -> "TileSet":
        """{r*a mod M}; may have fewer elements when gcd(r, M) > 1."""
        ctx = self.context
        return TileSet(ctx, ((r * a) % ctx.M for a in self.members))

    def intersect(self, other: "TileSet") -> "TileSet":
        _same_context(self, other)
        return TileSet.from_mask(self.context, self.mask & other.mask)

    def issubset(self, other: "TileSet") -> bool:
        _same_context(self, other)
        return self.mask & ~other.mask == 0


def _mask_members(mask: int) -> tuple[int, ...]:
    out = []
    v = 0
    while mask:
        tz = (mask & -mask).bit_length() - 1
        v += tz
        out.append(v)
        mask >>= tz + 1
        v += 1
    return tuple(out)


@dataclass(frozen=True)
class GridSpec:
    """L(anchor, step) = {x : step | x - anchor}, step | M."""

    anchor: Residue
    step: int

    def __post_init__(self):
        M = self.anchor.context.M
        if self.step < 1 or M % self.step:
            raise InputError(f"step {self.step} does not divide M={M}")


def realize_grid(spec: GridSpec) -> TileSet:
    ctx = spec.anchor.context
    base = spec.anchor.value % spec.step
    return TileSet(ctx, range(base, ctx.M, spec.step))


def grid(x: Residue, step: int) -> TileSet:
    return realize_grid(GridSpec(x, step))


def line(x: Residue, direction: int) -> TileSet:
    """l_nu(x) = L(x, M_nu), the p_nu^{n_nu} points aligned with x in direction nu."""
    ctx = x.context
    ctx.check_direction(direction)
    return grid(x, ctx.crt_basis[direction])


def plane(x: Residue, direction: int, alpha: int) -> TileSet:
    """Pi(x, p_nu^alpha) = L(x, p_nu^alpha) for 0 <= alpha <= n_nu."""
    ctx = x.context
    p, n = ctx.check_direction(direction)
    if not 0 <= alpha <= n:
        raise InputError(f"alpha={alpha} outside [0, {n}] for p={p}")
    return grid(x, p**alpha)


def fiber(x: Residue, direction: int) -> TileSet:
    """x * F_nu = {x + t*M/p_nu : 0 <= t < p_nu}."""
    ctx = x.context
    ctx.check_direction(direction)
    return grid(x, ctx.M // ctx.primes[direction][0])
