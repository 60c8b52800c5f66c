import json
from fractions import Fraction
from math import comb

import pytest

import qsep


def test_pmf_n4_matches_hypergeometric():
    pmf = qsep.intersection_pmf(4)
    # |x| = 2 and |y| = 4 inside 16 points
    oracle = [Fraction(comb(4, j) * comb(12, 2 - j), comb(16, 2)) for j in range(3)]
    assert pmf == oracle
    assert sum(pmf) == 1


def test_sampled_instances_have_the_right_shape():
    inst = qsep.sample_instance(8, 7)
    assert len(inst["x"]) == 4 and len(inst["y"]) == 8
    assert all(1 <= e <= 64 for e in inst["x"] + inst["y"])
    pin = qsep.sample_pin(8, 7)
    assert len(pin["x"]) == 8 and len(pin["blocks"]) == 2
    for block in pin["blocks"]:
        assert len(set(block) & set(pin["x"])) == 2


def test_quantum_exact_law():
    for n in (4, 8, 16):
        out = qsep.quantum_exact(qsep.sample_pin(n, 11))
        probs = out["block_probabilities"]
        assert probs[0] == Fraction(1, 2)
        assert all(p == Fraction(2, n) for p in probs[1:])
        assert out["answer_probability"] == Fraction(1, 2) * (1 - Fraction(1, n * n))
        assert out["answer_probability"] == qsep.closed_form_answer_probability(n)
        assert out["readout_uniform"]
    assert qsep.qubit_cost(8) == 7


def test_reports_round_trip():
    report = qsep.validate_quantum(8, 3)
    assert report["meta"]["seed"] == 3
    assert all(c["verdict"] != "fail" for c in report["claims"])
    assert "empty" in qsep.experiment_ids()
    assert qsep.run_experiment("empty", seed=5)["claims"] == []


def test_bad_input_raises_value_error():
    with pytest.raises(ValueError):
        qsep.intersection_pmf(6)
    with pytest.raises(qsep.ContractViolation):
        qsep.run_experiment("no-such-experiment", seed=1)


def test_cli_round_trip():
    code, out, err = qsep.run_cli("--seed", 9, "quantum", "--n", 8)
    assert code == 0
    assert "seed=9" in err
    assert json.loads(out)["meta"]["seed"] == 9
    code, _, _ = qsep.run_cli("quantum")
    assert code == 2
