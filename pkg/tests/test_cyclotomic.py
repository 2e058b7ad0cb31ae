import json
import random

import pytest
import sympy

import tilelab as tl
from tilelab.cyclotomic import (IntPoly, cyclotomic_poly, phi_at_one,
                                mask_poly, divides_mask, cyclo_profile,
                                check_T1, check_T2, load_cache, save_cache)
from tilelab.errors import InputError

from conftest import corpus


def sympy_cyclo_coeffs(s):
    x = sympy.Symbol("x")
    return tuple(int(c) for c in reversed(
        sympy.Poly(sympy.cyclotomic_poly(s, x), x).all_coeffs()))


class TestCyclotomicPoly:
    def test_worked_coefficients(self):
        assert cyclotomic_poly(6).coeffs == (1, -1, 1)
        assert cyclotomic_poly(2).coeffs == (1, 1)
        assert cyclotomic_poly(12).coeffs == (1, 0, -1, 0, 1)

    @pytest.mark.parametrize("s", list(range(1, 80)) + [105, 144, 255, 400])
    def test_against_sympy(self, s):
        assert cyclotomic_poly(s).coeffs == sympy_cyclo_coeffs(s)

    @pytest.mark.parametrize("n", list(range(1, 121)) + [144, 360, 400])
    def test_product_identity(self, n):
        prod = IntPoly([1])
        for s in range(1, n + 1):
            if n % s == 0:
                prod = prod * cyclotomic_poly(s)
        assert prod.coeffs == tuple([-1] + [0] * (n - 1) + [1])

    def test_degree_is_phi(self):
        for s in range(1, 100):
            assert cyclotomic_poly(s).degree == tl.euler_phi(s)


class TestPhiAtOne:
    def test_examples(self):
        assert phi_at_one(8) == 2
        assert phi_at_one(9) == 3
        assert phi_at_one(6) == 1

    def test_rejects_trivial(self):
        with pytest.raises(InputError):
            phi_at_one(1)


def equidistribution(A, p, alpha):
    # Eq-style counting criterion: every p^alpha plane holds 1/p of its parent
    M = A.context.M
    members = set(A.members)
    for y in range(M):
        fine = sum(1 for x in members if (x - y) % p**alpha == 0)
        coarse = sum(1 for x in members if (x - y) % p**(alpha - 1) == 0)
        if fine * p != coarse:
            return False
    return True


class TestDividesMask:
    def test_examples(self):
        c9 = tl.factorize(9)
        A = tl.TileSet(c9, [0, 1, 2])
        assert divides_mask(3, A) is True
        assert divides_mask(9, A) is False
        c12 = tl.factorize(12)
        assert divides_mask(12, tl.TileSet(c12, [0, 1, 6, 7])) is True

    def test_non_divisor_rejected(self):
        c12 = tl.factorize(12)
        A = tl.TileSet(c12, [0, 1])
        with pytest.raises(InputError):
            divides_mask(5, A)
        with pytest.raises(InputError):
            divides_mask(1, A)

    @pytest.mark.parametrize("M", [12, 16, 36, 72])
    def test_prime_power_agreement_with_counting(self, M):
        ctx = tl.factorize(M)
        rng = random.Random(M)
        pool = list(range(M))
        subsets = [rng.sample(pool, rng.randint(1, M - 1)) for _ in range(60)]
        subsets += [[0, 1, 6, 7][:M], list(range(M // 2))]
        for members in subsets:
            A = tl.TileSet(ctx, sorted(set(members)))
            for p, n in ctx.primes:
                for alpha in range(1, n + 1):
                    assert divides_mask(p**alpha, A) == \
                        equidistribution(A, p, alpha)


class TestCycloProfile:
    def test_examples(self):
        c12 = tl.factorize(12)
        prof = cyclo_profile(tl.TileSet(c12, [0, 1, 6, 7]))
        assert prof.divisors_of_mask == frozenset({2, 4, 12})
        assert prof.s_set == frozenset({2, 4})
        c9 = tl.factorize(9)
        prof = cyclo_profile(tl.TileSet(c9, [0, 3, 6]))
        assert prof.divisors_of_mask == frozenset({9})
        assert prof.s_set == frozenset({9})
        c4 = tl.factorize(4)
        prof = cyclo_profile(tl.TileSet(c4, [0, 1]))
        assert prof.divisors_of_mask == frozenset({2})
        assert prof.s_set == frozenset({2})

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            cyclo_profile(tl.TileSet(tl.factorize(12), []))


class TestT1T2:
    def test_t1_examples(self):
        assert check_T1(tl.TileSet(tl.factorize(9), [0, 1, 2])) is True
        assert check_T1(tl.TileSet(tl.factorize(12), [0, 1, 6, 7])) is True
        assert check_T1(tl.TileSet(tl.factorize(4), [0, 1, 2])) is False

    def test_t2_examples(self):
        c12 = tl.factorize(12)
        assert check_T2(tl.TileSet(c12, list(range(6)))) is True
        assert check_T2(tl.TileSet(c12, [0, 1, 6, 7])) is True
        c36 = tl.factorize(36)
        A = tl.TileSet(c36, [0, 1, 2, 12, 13, 14, 24, 25, 26])
        assert cyclo_profile(A).s_set == frozenset({3, 9})
        assert check_T2(A) is True

    @pytest.mark.parametrize("M", [12, 16])
    def test_every_divisor_lands_in_a_tile(self, M):
        for t in corpus(M):
            for s in t.context.divisors:
                if s > 1:
                    assert divides_mask(s, t.A) or divides_mask(s, t.B)

    def test_t1_holds_on_corpus_tiles(self):
        for t in corpus(12):
            assert check_T1(t.A) and check_T1(t.B)


class TestMaskPoly:
    def test_reduces_exponents_mod_M(self):
        c4 = tl.factorize(4)
        assert mask_poly(tl.TileSet(c4, [0, 3])).coeffs == (1, 0, 0, 1)


class TestCache:
    def test_round_trip(self, tmp_path):
        cyclotomic_poly(60)
        written = save_cache(str(tmp_path))
        assert written > 0
        data = json.loads((tmp_path / "cyclotomics.json").read_text())
        assert data
        assert load_cache(str(tmp_path)) >= 0

    def test_env_var_wiring(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TILELAB_CACHE_DIR", str(tmp_path))
        assert save_cache() > 0
        assert (tmp_path / "cyclotomics.json").exists()
        assert load_cache() >= 0
