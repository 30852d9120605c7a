import itertools

import pytest

from bqsim.errors import ContractViolation
from bqsim.sprint import (
    SprintEventResult,
    cavity_pass,
    cavity_pass_events,
    is_passable,
    reinit_atom,
    sprint_event,
)
from bqsim.state import AtomState, Polarization, PulseTerm, term_from_polarizations

H, V = Polarization.H, Polarization.V
GH, GV = AtomState.GROUND_H, AtomState.GROUND_V


def walk(term):
    """Photon-by-photon reference: (emitted polarizations, atom, phase, n_interactions)."""
    atom, phase, hits, out = term.atom, 1, 0, []
    for pol in term.polarizations():
        ev = sprint_event(pol, atom)
        out.append(ev.out_polarization)
        atom = ev.out_atom
        phase *= ev.phase
        hits += ev.interacted
    return out, atom, phase, hits


def all_terms(max_n):
    for n in range(max_n + 1):
        for slot in [None, *range(1, n + 2)]:
            for atom in (GH, GV):
                yield PulseTerm(n, slot, atom)


@pytest.mark.parametrize(
    "pol, atom, expected",
    [
        (H, GH, SprintEventResult(V, GV, True, -1)),
        (H, GV, SprintEventResult(H, GV, False, 1)),
        (V, GV, SprintEventResult(H, GH, True, -1)),
        (V, GH, SprintEventResult(V, GH, False, 1)),
    ],
)
def test_sprint_event_table(pol, atom, expected):
    assert sprint_event(pol, atom) == expected


@pytest.mark.parametrize(
    "term, expected, phase",
    [
        (PulseTerm(2, 1, GV), PulseTerm(2, 2, GV), 1),
        (PulseTerm(2, 3, GV), PulseTerm(3, None, GH), -1),
        (PulseTerm(0, 1, GV), PulseTerm(1, None, GH), -1),
        (PulseTerm(3, None, GV), PulseTerm(3, None, GV), 1),
        (PulseTerm(2, None, GH), PulseTerm(1, 1, GV), -1),
    ],
)
def test_cavity_pass_examples(term, expected, phase):
    assert cavity_pass(term) == (expected, phase)


def test_cavity_pass_keeps_readout():
    out, _ = cavity_pass(PulseTerm(1, 2, GV, "hv"))
    assert out.readout == "hv"


def test_cavity_pass_agrees_with_walk():
    for term in all_terms(6):
        pols, atom, phase, hits = walk(term)
        n_v = sum(p is V for p in pols)
        if not is_passable(term):
            assert n_v == 2
            with pytest.raises(ContractViolation):
                cavity_pass(term)
            continue
        out, ph, slots = cavity_pass_events(term)
        assert out == term_from_polarizations(pols, atom, term.readout)
        assert ph == phase == (-1) ** hits
        assert len(slots) == hits


def test_photon_number_and_single_v_preserved():
    for term in filter(is_passable, all_terms(6)):
        out, _ = cavity_pass(term)
        assert out.n_photons == term.n_photons


def test_cavity_pass_bijective_on_passable_terms():
    for total in range(0, 8):
        domain = [t for t in all_terms(total) if t.n_photons == total and is_passable(t)]
        images = [cavity_pass(t)[0] for t in domain]
        assert len(set(images)) == len(domain)
        # g_v terms plus photon-only g_h terms form a closed set
        closed = [t for t in domain if t.atom is GV or not t.has_v]
        assert {cavity_pass(t)[0] for t in closed} == set(closed)


def test_reinit_atom():
    assert reinit_atom(PulseTerm(2, None, GH, ""), 1) == (PulseTerm(2, None, GV, "v"), -1)
    assert reinit_atom(PulseTerm(2, None, GV, "h"), 2) == (PulseTerm(2, None, GV, "hh"), 1)
    assert reinit_atom(PulseTerm(0, None, GV, ""), 1)[0].readout == "h"


def test_reinit_iteration_mismatch():
    with pytest.raises(ContractViolation):
        reinit_atom(PulseTerm(1, None, GV, "h"), 1)


def test_phase_counts_events():
    # exhaustively over short explicit pulses with a single V photon
    for n, atom in itertools.product(range(5), (GV,)):
        for slot in range(1, n + 2):
            term = PulseTerm(n, slot, atom)
            _, phase, slots = cavity_pass_events(term)
            assert phase == (-1) ** len(slots)
