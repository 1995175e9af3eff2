"""
Tests for sign functions, the inequality evaluators and the sign search.

Reference values for the quantum configurations are closed forms of the
joint distribution under the big-endian wiring used by the network module.
"""

import sys
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import InvalidNetworkError, PartyIndexError, UnknownSignFunctionError
from inequalities import (
    InequalityResult,
    SIGN_PRESETS,
    SignFunction,
    correlator,
    evaluate_ngon,
    evaluate_table,
    evaluate_trilocal,
    linear_nlocal_value,
    mix_with_uniform,
    named_sign_function,
    parse_sign_function,
    random_sign_function,
    resolve_signs,
    search_signs,
)
from measurements import entangled_basis, product_basis
from network import NetworkSpec, ProbabilityTable, joint_distribution, uniform_table
from schemas import SignsSpec
from states import bell_diagonal_state, bell_state, depolarize_bell, noisy_gate_state, product_state

OUTER_F = SignFunction("+--+++++")
CONSTANT = SignFunction("++++++++")
OUTER_H = SignFunction("-+-+++++")


def _triangle_table(source, povm=None) -> ProbabilityTable:
    povm = povm or product_basis()
    return joint_distribution(NetworkSpec(n=3, sources=(source,) * 3, povms=(povm,) * 3))


def _random_table(rng, n: int = 3) -> ProbabilityTable:
    return ProbabilityTable(rng.dirichlet(np.ones(4 ** n)).reshape((4,) * n))


class TestSignFunction:
    """Tests for sign-function construction and algebra."""

    def test_named_tables(self):
        """F11, H11, F17 and F40 as sign strings."""
        assert named_sign_function("F11").code == "++---+-+"
        assert named_sign_function("H11").code == "-++----+"
        assert named_sign_function("F17").code == "-++----+"
        assert named_sign_function("f40").code == "++++---+"

    def test_table_shape_and_value(self):
        """Row s, column 2*r1 + r2."""
        fn = named_sign_function("F11")
        assert fn.table.shape == (2, 4)
        assert fn.value(1, 0, 1) == 1
        assert fn.value(0, 1, 0) == -1

    def test_string_round_trip(self):
        """from_table(to table) returns the same code."""
        fn = SignFunction.from_string(" +-+-++-- ")
        assert SignFunction.from_table(fn.table).to_string() == "+-+-++--"

    def test_negation_and_row_flip(self):
        """negated flips every sign, row_flipped one row."""
        fn = SignFunction("++++----")
        assert fn.negated().code == "----++++"
        assert fn.row_flipped(1).code == "++++++++"

    def test_invalid_string(self):
        """Seven characters are rejected."""
        with pytest.raises(UnknownSignFunctionError):
            SignFunction("+++++++")

    def test_unknown_name(self):
        """Unknown names are rejected."""
        with pytest.raises(UnknownSignFunctionError):
            parse_sign_function("F99")

    def test_resolve_preset(self):
        """The square preset needs four parties."""
        spec = SignsSpec(preset="square")
        assert [fn.code for fn in resolve_signs(spec, 4)][0] == "-++----+"
        with pytest.raises(InvalidNetworkError):
            resolve_signs(spec, 3)

    def test_resolve_triple(self):
        """A triple mixes names and strings."""
        fns = resolve_signs(SignsSpec(f="F11", g="++++++++", h="h11"), 3)
        assert [fn.code for fn in fns] == ["++---+-+", "++++++++", "-++----+"]

    def test_presets_reference_known_names(self):
        """Every preset resolves."""
        for name, tokens in SIGN_PRESETS.items():
            assert len(resolve_signs(SignsSpec(preset=name), len(tokens))) == len(tokens)


class TestInequalityResult:
    """Tests for InequalityResult.from_terms."""

    def test_s_value_and_flag(self):
        """s = sqrt|I1| + sqrt|I2|, violated above 1 + 1e-9."""
        result = InequalityResult.from_terms(-0.25, 0.36)
        assert result.s_value == pytest.approx(1.1)
        assert result.violated

    def test_bound_itself_is_not_violated(self):
        """s = 1 exactly is not a violation."""
        assert not InequalityResult.from_terms(0.25, 0.25).violated


class TestTrilocal:
    """Tests for evaluate_trilocal on quantum configurations."""

    def test_bell_sources_product_basis(self, bell_network):
        """Three phi+ in the product basis with F17, F11, F11 give I1 = -1/8, I2 = 1/8."""
        table = _triangle_table(bell_state("phi+"))
        fns = resolve_signs(SignsSpec(**bell_network["signs"]), 3)
        result = evaluate_trilocal(table, *fns)
        assert result.i1 == pytest.approx(-1 / 8)
        assert result.i2 == pytest.approx(1 / 8)
        assert result.s_value == pytest.approx(1 / np.sqrt(2))
        assert not result.violated

    @pytest.mark.parametrize(
        "alpha1, i1, i2, s_value",
        [
            (0.9, -0.1193, 0.10125, 0.6635963723),
            (1 / np.sqrt(2), -3 / 16, 1 / 16, 0.6830127019),
        ],
    )
    def test_bell_sources_entangled_basis(self, alpha1, i1, i2, s_value):
        """Three phi+ in the entangled basis with F11, F11, H11."""
        table = _triangle_table(bell_state("phi+"), entangled_basis(alpha1))
        fns = resolve_signs(SignsSpec(preset="triangle-entangled"), 3)
        result = evaluate_trilocal(table, *fns)
        assert result.i1 == pytest.approx(i1, abs=1e-12)
        assert result.i2 == pytest.approx(i2, abs=1e-12)
        assert result.s_value == pytest.approx(s_value, abs=1e-9)

    def test_triangle_product_signs_entangled_basis(self):
        """alpha1 = 0.95 with F17, F11, F11 stays below the bound."""
        table = _triangle_table(bell_state("phi+"), entangled_basis(0.95))
        result = evaluate_trilocal(table, *resolve_signs(SignsSpec(preset="triangle-product"), 3))
        assert result.i1 == pytest.approx(-0.419440625, abs=1e-12)
        assert result.i2 == pytest.approx(0.0121875, abs=1e-12)
        assert result.s_value == pytest.approx(0.7580393697, abs=1e-9)

    def test_outer_source_triple_on_bell_sources(self):
        """The outer-source triple reaches sqrt 2 on three phi+."""
        result = evaluate_trilocal(_triangle_table(bell_state("phi+")), OUTER_F, CONSTANT, OUTER_H)
        assert result.i1 == pytest.approx(0.5)
        assert result.i2 == pytest.approx(0.5)
        assert result.s_value == pytest.approx(np.sqrt(2))

    @pytest.mark.parametrize("x", [0.3, 0.5, 0.7])
    def test_outer_source_triple_on_bell_diagonal(self, x):
        """Weights (1-x, x, 0, 0) give s = sqrt(2x)."""
        table = _triangle_table(bell_diagonal_state([1 - x, x, 0.0, 0.0]))
        result = evaluate_trilocal(table, OUTER_F, CONSTANT, OUTER_H)
        assert result.s_value == pytest.approx(np.sqrt(2 * x))

    def test_chsh_local_state_violates(self):
        """A CHSH-local Bell-diagonal state still gives s = 1.0954451150."""
        table = _triangle_table(bell_diagonal_state([0.2, 0.6, 0.0, 0.2]))
        result = evaluate_trilocal(table, OUTER_F, CONSTANT, OUTER_H)
        assert result.s_value == pytest.approx(1.0954451150, abs=1e-9)
        assert result.violated

    @pytest.mark.parametrize("p3", [0.0, 0.4, 1.0])
    def test_depolarized_sources(self, p3):
        """Depolarized phi- gives s = sqrt(1 + p3)."""
        result = evaluate_trilocal(_triangle_table(depolarize_bell(p3)), OUTER_F, CONSTANT, OUTER_H)
        assert result.s_value == pytest.approx(np.sqrt(1 + p3))

    def test_correlator_of_constant_signs(self):
        """Constant +1 functions have correlator 1."""
        table = _triangle_table(bell_state("phi+"))
        assert correlator(table, CONSTANT, CONSTANT, CONSTANT, 0, 1, 0) == pytest.approx(1.0)

    def test_trilocal_needs_triangle(self):
        """A four-party table is rejected."""
        with pytest.raises(InvalidNetworkError):
            evaluate_trilocal(uniform_table(4), CONSTANT, CONSTANT, CONSTANT)


class TestNgon:
    """Tests for evaluate_ngon."""

    def test_matches_trilocal_on_random_tables(self, rng):
        """The factorized form agrees with the literal sum for n = 3, t = 2."""
        for _ in range(100):
            table = _random_table(rng)
            fns = [random_sign_function(rng) for _ in range(3)]
            literal = evaluate_trilocal(table, *fns)
            factorized = evaluate_ngon(table, fns, 2)
            assert factorized.i1 == pytest.approx(literal.i1, abs=1e-12)
            assert factorized.i2 == pytest.approx(literal.i2, abs=1e-12)

    def test_square_network_closed_form(self):
        """Four phi+ with the square preset: I1 = (1 - 2 a2^2)^2 / 8, I2 = 0."""
        alpha2 = 0.3
        spec = NetworkSpec(
            n=4,
            sources=(bell_state("phi+"),) * 4,
            povms=(entangled_basis(np.sqrt(1 - alpha2 ** 2)),) * 4,
        )
        result = evaluate_ngon(joint_distribution(spec), resolve_signs(SignsSpec(preset="square"), 4), 2)
        assert result.i1 == pytest.approx((1 - 2 * alpha2 ** 2) ** 2 / 8, abs=1e-12)
        assert result.i2 == pytest.approx(0.0, abs=1e-12)

    def test_party_index_range(self):
        """t must lie in 1..n."""
        fns = [CONSTANT] * 3
        with pytest.raises(PartyIndexError):
            evaluate_ngon(uniform_table(3), fns, 0)
        with pytest.raises(PartyIndexError):
            evaluate_ngon(uniform_table(3), fns, 4)

    def test_sign_count_must_match(self):
        """Two sign functions for three parties are rejected."""
        with pytest.raises(InvalidNetworkError):
            evaluate_ngon(uniform_table(3), [CONSTANT] * 2, 2)

    def test_evaluate_table_dispatch(self, rng):
        """evaluate_table uses the factorized form away from the standard triangle."""
        table = _random_table(rng, 4)
        fns = [random_sign_function(rng) for _ in range(4)]
        assert evaluate_table(table, fns, 3) == evaluate_ngon(table, fns, 3)

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.integers(min_value=3, max_value=5))
    def test_universal_ceiling(self, seed, n):
        """|I1| + |I2| <= 1 for every table and sign choice, so s <= sqrt 2."""
        rng = np.random.default_rng(seed)
        table = _random_table(rng, n)
        fns = [random_sign_function(rng) for _ in range(n)]
        t = int(rng.integers(1, n + 1))
        result = evaluate_ngon(table, fns, t)
        assert abs(result.i1) + abs(result.i2) <= 1.0 + 1e-12
        assert result.s_value <= np.sqrt(2) + 1e-12


class TestMixing:
    """Tests for mix_with_uniform."""

    def test_terms_are_affine_in_mixing(self, rng):
        """I_j(q p + (1-q) u) = q I_j(p) + (1-q) I_j(u)."""
        table = _random_table(rng)
        fns = [random_sign_function(rng) for _ in range(3)]
        q = 0.35
        mixed = evaluate_trilocal(mix_with_uniform(table, q), *fns)
        pure = evaluate_trilocal(table, *fns)
        flat = evaluate_trilocal(uniform_table(3), *fns)
        assert mixed.i1 == pytest.approx(q * pure.i1 + (1 - q) * flat.i1)
        assert mixed.i2 == pytest.approx(q * pure.i2 + (1 - q) * flat.i2)


class TestLinearChain:
    """Tests for linear_nlocal_value."""

    def test_bell_chain(self):
        """Three phi+ give sqrt 2."""
        assert linear_nlocal_value([bell_state("phi+")] * 3) == pytest.approx(np.sqrt(2))

    @pytest.mark.parametrize("p1, p2", [(1.0, 0.7), (0.5, 0.9), (0.2, 0.4)])
    def test_noisy_gate_chain(self, p1, p2):
        """Singular values p2 and p1 p2 give p2^(3/2) sqrt(1 + p1^3)."""
        value = linear_nlocal_value([noisy_gate_state(p1, p2)] * 3)
        assert value == pytest.approx(p2 ** 1.5 * np.sqrt(1 + p1 ** 3))

    def test_empty_chain(self):
        """A chain needs sources."""
        with pytest.raises(InvalidNetworkError):
            linear_nlocal_value([])


class TestSignSearch:
    """Tests for the exhaustive triangle sign search."""

    def test_search_finds_ceiling_on_bell_sources(self):
        """Three phi+ in the product basis reach the universal ceiling sqrt 2."""
        found = search_signs(_triangle_table(bell_state("phi+")))
        assert found.result.s_value == pytest.approx(np.sqrt(2))
        assert len(found.signs) == 3

    def test_search_dominates_random_triples(self, rng):
        """No random triple beats the search result."""
        table = _random_table(rng)
        best = search_signs(table).result.s_value
        for _ in range(200):
            fns = [random_sign_function(rng) for _ in range(3)]
            assert evaluate_trilocal(table, *fns).s_value <= best + 1e-12

    def test_search_result_is_consistent(self, rng):
        """The reported triple reproduces the reported value."""
        table = _random_table(rng)
        found = search_signs(table)
        again = evaluate_trilocal(table, *found.functions)
        assert again.s_value == pytest.approx(found.result.s_value)

    def test_product_sources_never_exceed_one(self):
        """Factorizing tables stay within the bound for every triple."""
        sources = (
            product_state([0, 0, 1], [1, 0, 0]),
            product_state([0.6, 0, 0.8], [0, 0, -1]),
            product_state([0, 1, 0], [0, 0, 1]),
        )
        table = joint_distribution(NetworkSpec(n=3, sources=sources, povms=(entangled_basis(0.8),) * 3))
        assert search_signs(table).result.s_value <= 1.0 + 1e-9

    def test_search_needs_triangle(self):
        """Four-party tables are rejected."""
        with pytest.raises(InvalidNetworkError):
            search_signs(uniform_table(4))
