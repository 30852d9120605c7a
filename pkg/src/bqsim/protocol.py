"""Iterated protocol: attach the V photon, then alternate cavity passes and resets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ContractViolation, InvalidInput, ResourceLimit
from .sprint import cavity_pass, reinit_atom, sprint_event
from .state import (
    PRUNE_TOL,
    AtomState,
    InputSpec,
    Polarization,
    QuantumState,
    expand_with_v,
    make_input,
    term_from_polarizations,
)

BRUTE_FORCE_MAX_N = 5
BRUTE_FORCE_MAX_ITERATIONS = 7


@dataclass(frozen=True)
class ProtocolConfig:
    """Run settings.

    ``iterations`` counts whole iterations (cavity pass plus reset), so the
    last readout index equals ``iterations``. ``n_max`` overrides the input's
    own truncation when given.
    """

    iterations: int
    n_max: Optional[int] = None
    prune_tol: float = PRUNE_TOL

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidInput("iterations must be >= 1")
        if self.n_max is not None and self.n_max < 0:
            raise InvalidInput("n_max must be non-negative")

    def resolve(self, spec: InputSpec) -> InputSpec:
        return spec if self.n_max is None else spec.with_n_max(self.n_max)


def run_iteration(
    state: QuantumState, iteration: int, prune_tol: float = PRUNE_TOL
) -> QuantumState:
    out: dict = {}
    for term, amp in state:
        if len(term.readout) != iteration - 1:
            raise ContractViolation(
                f"iteration {iteration} applied to readout of length {len(term.readout)}"
            )
        passed, p1 = cavity_pass(term)
        final, p2 = reinit_atom(passed, iteration)
        out[final] = out.get(final, 0j) + amp * (p1 * p2)
    return QuantumState.from_amplitudes(
        out, state.n_max, prune_tol, state.pruned_weight, state.metadata
    )


def initial_state(spec: InputSpec, config: ProtocolConfig) -> QuantumState:
    return expand_with_v(make_input(config.resolve(spec)))


def run_protocol(spec: InputSpec, config: ProtocolConfig) -> QuantumState:
    state = initial_state(spec, config)
    for it in range(1, config.iterations + 1):
        state = run_iteration(state, it, config.prune_tol)
    return state


def brute_force_protocol(spec: InputSpec, config: ProtocolConfig) -> QuantumState:
    """Reference simulation over explicit polarization sequences.

    Each Fock component ``|N_h, 1_v>`` is split into its N+1 time orderings,
    written out as tuples such as ``(H, V, H)``, and every photon is walked
    through :func:`sprint_event` one at a time. Only the final result is
    converted back to compact terms.
    """
    spec = config.resolve(spec)
    if spec.n_max > BRUTE_FORCE_MAX_N or config.iterations > BRUTE_FORCE_MAX_ITERATIONS:
        raise ResourceLimit(
            f"brute force limited to n_max <= {BRUTE_FORCE_MAX_N} and "
            f"iterations <= {BRUTE_FORCE_MAX_ITERATIONS}"
        )
    coeffs, _ = spec.coefficients()

    # key: (pulse polarizations, atom, readout)
    state: dict[tuple, complex] = {}
    for n, c in enumerate(coeffs):
        if c == 0:
            continue
        for slot in range(n + 1):
            pulse = tuple(Polarization.V if i == slot else Polarization.H for i in range(n + 1))
            key = (pulse, AtomState.GROUND_V, "")
            state[key] = state.get(key, 0j) + c / math.sqrt(n + 1)

    for _ in range(config.iterations):
        nxt: dict[tuple, complex] = {}
        for (pulse, atom, readout), amp in state.items():
            sign = 1
            emitted = []
            for pol in pulse:
                ev = sprint_event(pol, atom)
                emitted.append(ev.out_polarization)
                atom = ev.out_atom
                sign *= ev.phase
            ev = sprint_event(Polarization.H, atom)
            sign *= ev.phase
            mark = "v" if ev.out_polarization is Polarization.V else "h"
            key = (tuple(emitted), ev.out_atom, readout + mark)
            nxt[key] = nxt.get(key, 0j) + amp * sign
        state = {k: a for k, a in nxt.items() if abs(a) >= config.prune_tol}

    terms = {}
    for (pulse, atom, readout), amp in state.items():
        term = term_from_polarizations(pulse, atom, readout)
        terms[term] = terms.get(term, 0j) + amp
    return QuantumState(terms, spec.n_max)
