"""Chase engine and termination toolkit for existential rules.

Every function takes the text of an .erl document and returns the report as a
dict with the keys command, inputs, verdict, steps, atoms, derivation, stats.
"""

import json

from . import _chasekit
from ._chasekit import ChaseError, ChaseSyntaxError

__all__ = [
    "ChaseError",
    "ChaseSyntaxError",
    "canonical",
    "classify",
    "entails",
    "explore",
    "normalize",
    "run",
    "search",
    "tm",
]


def canonical(text):
    """Canonical serialization of a document."""
    return _chasekit.canonical(text)


def run(text, variant="r", strategy="fifo", max_steps=1000, trace=False):
    return json.loads(_chasekit.run(text, variant, strategy, max_steps, trace))


def explore(text, variant="r", max_depth=12, max_nodes=5000, dedup=True):
    return json.loads(_chasekit.explore(text, variant, max_depth, max_nodes, dedup))


def search(text, variant="r", max_steps=1000, max_nodes=5000, phased=()):
    """`phased` holds phase-file texts tried before the bounded search."""
    return json.loads(_chasekit.search(text, variant, max_steps, max_nodes, list(phased)))


def entails(text, query_index=0, variant="r", max_steps=1000, strategy="fifo"):
    return json.loads(_chasekit.entails(text, query_index, variant, max_steps, strategy))


def normalize(text, proc, skip_atomic=False):
    return json.loads(_chasekit.normalize(text, proc, skip_atomic))


def classify(fixtures):
    """Checks every annotated document in the directory `fixtures`."""
    return json.loads(_chasekit.classify(str(fixtures)))


def tm(mode, machine, len=1):
    """`mode` is "encode" or "tape"; `machine` is the text of a machine file."""
    return json.loads(_chasekit.tm(mode, machine, len))
