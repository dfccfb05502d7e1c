"""Contexts, systems and modalities: a quantum measurement simulator."""

import json as _json

from ._core import (
    Context,
    CsmError,
    __version__,
    born_probability,
    build_context,
    context_change_unitary,
    exact_entropy_production,
    gram_uniform,
    haar_random_unitary,
    interference_return,
    irreversible_return,
    mean_entropy_production,
    meter_chain_reduced_state,
    meter_protocol_entropy,
    meter_return_probability,
    meter_states_from_gram,
    projector,
    propagate,
    reduced_system_state,
    reversible_return,
    run_scenario_json,
    shannon_entropy,
    transition_matrix,
    verify_scenario_json,
)


def run_scenario(scenario, seed=0, n_samples=10000, exhaustive=False, workers=1):
    """Run a scenario (dict or JSON text) and return the report as a dict."""
    text = scenario if isinstance(scenario, str) else _json.dumps(scenario)
    return _json.loads(run_scenario_json(text, seed, n_samples, exhaustive, workers))


def verify_scenario(scenario, tolerance=1e-10):
    """Check every invariant of a scenario; returns the verification report as a dict."""
    text = scenario if isinstance(scenario, str) else _json.dumps(scenario)
    return _json.loads(verify_scenario_json(text, tolerance))
