"""Crease-pattern folding planner.

Thin wrappers over the compiled core. Patterns, states, actions and
verdicts are plain dicts in the JSON file formats of the ``foldplan`` tool.
Edge indices refer to the canonical pattern.
"""

import json
import sys

from . import _foldplan
from ._foldplan import FoldplanError, __version__

__all__ = ["FoldplanError", "__version__", "canonicalize", "fixture", "verify", "step", "run_cli", "main"]


def canonicalize(cp):
    return json.loads(_foldplan.canonical_cp(json.dumps(cp)))


def fixture(family):
    return json.loads(_foldplan.fixture(family))


def verify(cp, state=None):
    state_text = None if state is None else json.dumps(state)
    return json.loads(_foldplan.verify(json.dumps(cp), state_text))


def step(cp, state, action):
    state_text = None if state is None else json.dumps(state)
    new_state, verdict = _foldplan.step(json.dumps(cp), state_text, json.dumps(action))
    return json.loads(new_state), json.loads(verdict)


def run_cli(args):
    return _foldplan.run_cli([str(a) for a in args])


def main():
    code, out, err = run_cli(sys.argv[1:])
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


def _entry():
    sys.exit(main())
