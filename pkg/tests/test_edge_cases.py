"""
Edge case tests for the polyloc API.

Covers validation errors, boundary parameters and concurrent requests.
"""

import sys
import os
import math
from concurrent.futures import ThreadPoolExecutor

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _network_payload(**overrides) -> dict:
    """Helper to build a valid triangle network-spec with optional overrides."""
    base = {
        "n": 3,
        "sources": [{"kind": "bell", "label": "phi+"}] * 3,
        "povms": [{"kind": "entangled", "alpha1": 0.9}] * 3,
        "signs": {"preset": "triangle-entangled"},
    }
    base.update(overrides)
    return base


class TestNetworkValidation:
    """Tests for party counts and list lengths."""

    def test_two_parties_returns_422(self, client):
        """n = 2 is not a polygon."""
        response = client.post("/api/evaluations/", json=_network_payload(n=2))
        assert response.status_code == 422

    def test_seven_parties_returns_422(self, client):
        """n above 6 is rejected."""
        response = client.post(
            "/api/evaluations/",
            json=_network_payload(n=7, sources=[{"kind": "bell", "label": "phi+"}] * 7),
        )
        assert response.status_code == 422

    def test_source_count_mismatch_returns_422(self, client):
        """Two sources for three parties is rejected."""
        response = client.post(
            "/api/evaluations/", json=_network_payload(sources=[{"kind": "bell", "label": "phi+"}] * 2)
        )
        assert response.status_code == 422

    def test_distinguished_party_beyond_n_returns_422(self, client):
        """t = 4 on a triangle is rejected."""
        response = client.post("/api/evaluations/", json=_network_payload(t=4))
        assert response.status_code == 422


class TestStateValidation:
    """Tests for source parameters."""

    def test_bell_diagonal_weights_over_one_returns_422(self, client):
        """Three weights summing above 1 are rejected."""
        sources = [{"kind": "bell_diagonal", "weights": [0.5, 0.4, 0.3]}] * 3
        response = client.post("/api/evaluations/", json=_network_payload(sources=sources))
        assert response.status_code == 422

    def test_bell_diagonal_three_weights_summing_to_one(self, client):
        """Three weights summing to exactly 1 leave psi+ at zero."""
        sources = [{"kind": "bell_diagonal", "weights": [0.0, 1.0, 0.0]}] * 3
        response = client.post("/api/evaluations/", json=_network_payload(sources=sources))
        assert response.status_code == 200

    def test_schmidt_coefficients_not_normalized_returns_422(self, client):
        """tau1^2 + tau2^2 must equal 1."""
        sources = [{"kind": "schmidt", "tau1": 0.6, "tau2": 0.6}] * 3
        response = client.post("/api/evaluations/", json=_network_payload(sources=sources))
        assert response.status_code == 422

    def test_missing_kind_parameter_returns_422(self, client):
        """A noisy gate needs both fidelities."""
        sources = [{"kind": "noisy_gate", "p1": 0.9}] * 3
        response = client.post("/api/evaluations/", json=_network_payload(sources=sources))
        assert response.status_code == 422

    def test_unknown_state_kind_returns_422(self, client):
        """Unknown kinds are rejected."""
        sources = [{"kind": "werner"}] * 3
        response = client.post("/api/evaluations/", json=_network_payload(sources=sources))
        assert response.status_code == 422


class TestMeasurementValidation:
    """Tests for POVM parameters."""

    def test_alpha1_equal_to_one_returns_422(self, client):
        """alpha1 must lie strictly inside (0, 1)."""
        povms = [{"kind": "entangled", "alpha1": 1.0}] * 3
        response = client.post("/api/evaluations/", json=_network_payload(povms=povms))
        assert response.status_code == 422

    def test_efficiency_above_one_returns_422(self, client):
        """Detection efficiency is a probability."""
        povms = [{"kind": "product", "efficiency": 1.2}] * 3
        response = client.post("/api/evaluations/", json=_network_payload(povms=povms))
        assert response.status_code == 422

    def test_zero_efficiency_gives_zero(self, client):
        """With p4 = 0 every party outputs uniformly and s = 0."""
        povms = [{"kind": "product", "efficiency": 0.0}] * 3
        response = client.post("/api/evaluations/", json=_network_payload(povms=povms))
        assert response.status_code == 200
        assert math.isclose(response.json()["result"]["s_value"], 0.0, abs_tol=1e-7)


class TestSignValidation:
    """Tests for sign function inputs."""

    def test_short_sign_string_returns_422(self, client):
        """Sign strings need exactly 8 characters."""
        signs = {"f": "+-+-+-+", "g": "F11", "h": "F11"}
        response = client.post("/api/evaluations/", json=_network_payload(signs=signs))
        assert response.status_code == 422

    def test_two_sign_forms_returns_422(self, client):
        """A preset and a triple together are ambiguous."""
        signs = {"preset": "triangle-product", "f": "F11", "g": "F11", "h": "F11"}
        response = client.post("/api/evaluations/", json=_network_payload(signs=signs))
        assert response.status_code == 422

    def test_unknown_preset_returns_422(self, client):
        """Unknown presets are unprocessable."""
        response = client.post("/api/evaluations/", json=_network_payload(signs={"preset": "hexagon"}))
        assert response.status_code == 422

    def test_search_on_square_returns_422(self, client):
        """Sign search is limited to triangles."""
        payload = _network_payload(
            n=4,
            sources=[{"kind": "bell", "label": "phi+"}] * 4,
            povms=[{"kind": "product"}] * 4,
            signs={"preset": "square"},
        )
        response = client.post("/api/evaluations/search-signs", json=payload)
        assert response.status_code == 422


class TestScanValidation:
    """Tests for scan request bodies."""

    def test_sweep_with_one_step_returns_422(self, client):
        """Axes need at least two steps."""
        payload = {"network": _network_payload(), "axes": [{"name": "a", "lo": 0.1, "hi": 0.9, "steps": 1}]}
        response = client.post("/api/scans/sweep", json=payload)
        assert response.status_code == 422

    def test_sweep_reversed_axis_returns_422(self, client):
        """lo must be below hi."""
        payload = {"network": _network_payload(), "axes": [{"name": "a", "lo": 0.9, "hi": 0.1, "steps": 3}]}
        response = client.post("/api/scans/sweep", json=payload)
        assert response.status_code == 422

    def test_threshold_empty_bracket_returns_422(self, client):
        """A bracket with lo = hi is rejected."""
        payload = {"network": _network_payload(), "parameter": "a", "lo": 0.5, "hi": 0.5}
        response = client.post("/api/scans/threshold", json=payload)
        assert response.status_code == 422

    def test_maximize_with_two_targets_returns_422(self, client):
        """quantity and network are mutually exclusive."""
        payload = {"quantity": "depolarized-s", "network": _network_payload(), "box": {"p3": [0, 1]}}
        response = client.post("/api/scans/maximize", json=payload)
        assert response.status_code == 422

    def test_maximize_empty_axis_returns_422(self, client):
        """A box axis with lo = hi has nothing to search."""
        payload = {"quantity": "depolarized-s", "box": {"p3": [0.5, 0.5]}, "points_per_axis": 3}
        response = client.post("/api/scans/maximize", json=payload)
        assert response.status_code == 422

    def test_entanglement_with_two_sources_returns_422(self, client):
        """The verdict needs exactly three sources."""
        payload = {"sources": [{"kind": "bell", "label": "phi+"}] * 2, "povm": {"kind": "product"}}
        response = client.post("/api/scans/entanglement", json=payload)
        assert response.status_code == 422

    def test_lhv_cardinality_above_cap_returns_422(self, client):
        """max_cardinality is capped at 8."""
        response = client.post("/api/scans/lhv-test", json={"max_cardinality": 9})
        assert response.status_code == 422


class TestConcurrency:
    """Tests for concurrent requests."""

    def test_concurrent_evaluations_agree(self, client):
        """
        Parallel evaluations of the same network must all succeed and
        return identical values.
        """
        payload = _network_payload()
        results = []

        def do_evaluate():
            resp = client.post("/api/evaluations/", json=payload)
            results.append((resp.status_code, resp.json()["result"]["s_value"]))

        with ThreadPoolExecutor(max_workers=4) as executor:
            for _ in range(8):
                executor.submit(do_evaluate)
            executor.shutdown(wait=True)

        assert len(results) == 8
        assert {code for code, _ in results} == {200}
        assert len({value for _, value in results}) == 1
        assert math.isclose(results[0][1], 0.6635963723, abs_tol=1e-9)
