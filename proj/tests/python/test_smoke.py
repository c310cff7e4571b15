import json
import math

import pytest

import pyqkdsim as qkd


INV_SQRT2 = 1.0 / math.sqrt(2.0)


def test_bracket_of_named_states():
    br = qkd.bracket(qkd.vertical(), qkd.circular_right())
    assert br == pytest.approx(INV_SQRT2)
    assert qkd.bracket(qkd.diagonal_pos(), qkd.circular_left()) == pytest.approx(0.5 + 0.5j)
    assert abs(qkd.bracket(qkd.linear(0.3), qkd.linear(0.3)) - 1.0) < 1e-12


def test_povm_completeness_and_decode_semantics():
    theta = math.pi / 8
    povm = qkd.b92_povm(theta)
    labels = [label for label, _ in povm]
    assert labels == ["theta", "theta_bar", "?"]
    total = [[sum(povm[k][1][r][c] for k in range(3)) for c in range(2)] for r in range(2)]
    assert total[0][0] == pytest.approx(1.0)
    assert total[1][1] == pytest.approx(1.0)
    assert abs(total[0][1]) < 1e-10
    # a conclusive click never crosses over
    theta_bar_state = qkd.linear(-theta)
    element_theta = povm[0][1]
    weight = sum(
        theta_bar_state[r].conjugate() * element_theta[r][c] * theta_bar_state[c]
        for r in range(2)
        for c in range(2)
    )
    assert abs(weight) < 1e-12


def test_uncertainty_bound():
    proj_v = [[1, 0], [0, 0]]
    proj_d = [[0.5, 0.5], [0.5, 0.5]]
    lhs, rhs = qkd.uncertainty_product(proj_v, proj_d, qkd.circular_right())
    assert lhs >= rhs - 1e-10


def test_cloning_overlap_witness():
    needed = qkd.cloning_required_probe_overlap(qkd.vertical(), qkd.diagonal_pos())
    assert needed == pytest.approx(math.sqrt(2.0))
    assert qkd.cloning_required_probe_overlap(qkd.vertical(), qkd.horizontal()) is None


def test_reconcile_repairs_flips():
    alice = [(i * 7 + 3) % 2 for i in range(400)]
    bob = list(alice)
    for pos in (17, 160, 333):
        bob[pos] ^= 1
    out = qkd.reconcile(alice, bob, 0.05, 99)
    assert not out["aborted"]
    assert out["alice"] == out["bob"]
    assert out["leaked_parities"] > 0


def test_privacy_amplify_length_contract():
    bits = [(i * 5 + 1) % 2 for i in range(100)]
    final = qkd.privacy_amplify(bits, 20, 30, 7)
    assert len(final) == 50
    assert final == qkd.privacy_amplify(bits, 20, 30, 7)


def test_run_experiment_reception_rate_and_determinism():
    config = json.dumps({"protocol": "bb84", "n": 20000, "seeds": [1, 2]})
    report = qkd.run_experiment_json(config)
    parsed = json.loads(report)
    accuracy = parsed["aggregate"]["pre_sift_accuracy"]["mean"]
    assert 0.73 < accuracy < 0.77
    assert qkd.run_experiment_json(config) == report
