"""Python bindings for the flare fault-localization library."""

import json

from ._flare import (
    BadObservationIndex,
    FlareError,
    Hmm,
    NotADistribution,
    StateSpaceOverflow,
    ZeroProbabilitySequence,
    accuracy,
    build_initial_matrix,
    build_transition_matrix,
    kl_divergence,
)
from . import _flare


def analyze_net(net, property="deadlock", max_states=1_000_000, time_abstraction=False):
    """Rank transitions of a net given as a dict or JSON text."""
    text = net if isinstance(net, str) else json.dumps(net)
    return _flare.analyze_net(text, property, max_states, time_abstraction)


def generate_tpn_case(processes, resources, faults, seed):
    return json.loads(_flare.generate_tpn_case(processes, resources, faults, seed))


def generate_component_system(components, avg_io, faults=-1, seed=0, cases=100):
    return json.loads(_flare.generate_component_system(components, avg_io, faults, seed, cases))


def diagnose(bundle, seed=0, max_iter=2000):
    """Verdicts for a {"system", "dataset"} bundle, in suspicion order."""
    text = bundle if isinstance(bundle, str) else json.dumps(bundle)
    return _flare.diagnose(text, seed, max_iter)


__all__ = [
    "BadObservationIndex",
    "FlareError",
    "Hmm",
    "NotADistribution",
    "StateSpaceOverflow",
    "ZeroProbabilitySequence",
    "accuracy",
    "analyze_net",
    "build_initial_matrix",
    "build_transition_matrix",
    "diagnose",
    "generate_component_system",
    "generate_tpn_case",
    "kl_divergence",
]
