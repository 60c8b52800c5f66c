"""Python bindings for the qsep library."""

import json
from fractions import Fraction

from . import _core
from ._core import ContractViolation, default_seed, experiment_ids, qubit_cost

__version__ = _core.__version__

__all__ = [
    "ContractViolation",
    "closed_form_answer_probability",
    "default_seed",
    "experiment_ids",
    "intersection_pmf",
    "quantum_exact",
    "qubit_cost",
    "run_cli",
    "run_experiment",
    "sample_instance",
    "sample_pin",
    "validate_claim_cx",
    "validate_quantum",
]


def intersection_pmf(n):
    """Exact Pr[|x & y| = j] for j = 0..n/2."""
    return [Fraction(p) for p in _core.intersection_pmf(n)]


def sample_instance(n, seed):
    return json.loads(_core.sample_instance(n, seed))


def sample_pin(n, seed):
    return json.loads(_core.sample_pin(n, seed))


def quantum_exact(instance):
    """Exact outcome law of one protocol run on a Pin instance (dict)."""
    out = json.loads(_core.quantum_exact(json.dumps(instance)))
    out["block_probabilities"] = [Fraction(p) for p in out["block_probabilities"]]
    out["answer_probability"] = Fraction(out["answer_probability"])
    return out


def closed_form_answer_probability(n):
    return Fraction(_core.closed_form_answer_probability(n))


def validate_quantum(n, seed, instances=1):
    return json.loads(_core.validate_quantum(n, seed, instances))


def validate_claim_cx(n):
    return json.loads(_core.validate_claim_cx(n))


def run_experiment(experiment_id, seed=None, trials=100_000):
    if seed is None:
        seed = default_seed()
    return json.loads(_core.run_experiment(experiment_id, seed, trials))


def run_cli(*args):
    """Returns (exit code, stdout, stderr) of the command line front end."""
    return _core.run_cli([str(a) for a in args])
