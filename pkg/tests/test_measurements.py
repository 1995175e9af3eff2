"""
Unit tests for four-outcome joint measurements.
"""

import sys
import os

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from errors import InvalidPovmError, ParameterRangeError
from measurements import (
    FourOutcomePovm,
    entangled_basis,
    inefficient_povm,
    make_povm,
    povm_from_vectors,
    product_basis,
    two_param_basis,
)
from schemas import PovmSpec
from states import bell_state


class TestBases:
    """Tests for the measurement constructors."""

    @pytest.mark.parametrize(
        "povm",
        [entangled_basis(0.3), entangled_basis(0.95), product_basis(), two_param_basis(0.4, 0.7)],
    )
    def test_elements_are_orthogonal_projectors(self, povm):
        """Each element is a rank-one projector and they sum to the identity."""
        for k in range(4):
            np.testing.assert_allclose(povm[k] @ povm[k], povm[k], atol=1e-12)
            assert np.trace(povm[k]).real == pytest.approx(1.0)
        np.testing.assert_allclose(povm.elements.sum(axis=0), np.eye(4), atol=1e-12)

    def test_product_basis_outcome_order(self):
        """Outcome 3 projects on |00> and outcome 2 on |11>."""
        povm = product_basis()
        assert povm[3][0, 0].real == pytest.approx(1.0)
        assert povm[2][3, 3].real == pytest.approx(1.0)

    def test_entangled_basis_range(self):
        """alpha1 must lie strictly inside (0, 1)."""
        with pytest.raises(ParameterRangeError):
            entangled_basis(1.0)

    def test_two_param_basis_range(self):
        """alpha4 above 1 is rejected."""
        with pytest.raises(ParameterRangeError):
            two_param_basis(0.5, 1.5)

    def test_incomplete_vectors_rejected(self):
        """Four copies of |00> do not form a POVM."""
        with pytest.raises(InvalidPovmError):
            povm_from_vectors([[1, 0, 0, 0]] * 4)

    def test_wrong_shape_rejected(self):
        """Three operators are not a four-outcome POVM."""
        with pytest.raises(InvalidPovmError):
            FourOutcomePovm(np.zeros((3, 4, 4)))


class TestProbabilities:
    """Tests for FourOutcomePovm.probabilities."""

    def test_entangled_basis_on_phi_plus(self):
        """phi+ lands on outcomes 2 and 3 with weights (a1 + a2)^2 / 2 and (a2 - a1)^2 / 2."""
        a1 = 0.8
        a2 = 0.6
        probs = entangled_basis(a1).probabilities(bell_state("phi+").matrix)
        np.testing.assert_allclose(probs, [0, 0, (a1 + a2) ** 2 / 2, (a2 - a1) ** 2 / 2], atol=1e-12)

    def test_probabilities_sum_to_one(self):
        """Any state gives a normalized distribution."""
        probs = two_param_basis(0.2, 0.9).probabilities(bell_state("psi-").matrix)
        assert probs.sum() == pytest.approx(1.0)


class TestEfficiency:
    """Tests for finite detection efficiency."""

    def test_zero_efficiency_is_uniform(self):
        """p4 = 0 gives I/4 for every outcome."""
        povm = inefficient_povm(product_basis(), 0.0)
        for k in range(4):
            np.testing.assert_allclose(povm[k], np.eye(4) / 4, atol=1e-12)

    def test_efficiency_out_of_range(self):
        """p4 > 1 is rejected."""
        with pytest.raises(ParameterRangeError):
            inefficient_povm(product_basis(), 1.1)


class TestMakePovm:
    """Tests for make_povm dispatch."""

    def test_alpha2_selects_entangled_parameter(self):
        """alpha2 = 0.6 is the same basis as alpha1 = 0.8."""
        from_alpha2 = make_povm(PovmSpec(kind="entangled", alpha2=0.6))
        np.testing.assert_allclose(from_alpha2.elements, entangled_basis(0.8).elements, atol=1e-12)

    def test_efficiency_is_applied(self):
        """efficiency < 1 mixes in the identity."""
        povm = make_povm(PovmSpec(kind="product", efficiency=0.5))
        assert povm[3][0, 0].real == pytest.approx(0.5 + 0.5 / 4)
