"""Adiabatic-limit interaction rules for a single Lambda atom in a cavity.

In the adiabatic limit every photon of a pulse meets the atom on its own, so
a whole cavity pass is a sequence of single-photon SPRINT events. The
compact :func:`cavity_pass` below uses the closed forms of that sequence;
``bqsim.protocol.brute_force_protocol`` keeps an explicit photon-by-photon
walk as an independent check.

Phases are exact ints (+1/-1) here and only become complex at the state
layer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractViolation
from .state import AtomState, Polarization, PulseTerm

_COUPLED = {
    (Polarization.H, AtomState.GROUND_H),
    (Polarization.V, AtomState.GROUND_V),
}


@dataclass(frozen=True)
class SprintEventResult:
    out_polarization: Polarization
    out_atom: AtomState
    interacted: bool
    phase: int


def sprint_event(pol: Polarization, atom: AtomState) -> SprintEventResult:
    """One photon meets the atom.

    A photon whose mode matches the occupied ground state is re-emitted in
    the other mode and toggles the atom, picking up a factor -1. Otherwise the
    photon is uncoupled and passes unchanged.
    """
    if (pol, atom) in _COUPLED:
        flipped = Polarization.V if pol is Polarization.H else Polarization.H
        return SprintEventResult(flipped, atom.toggled(), True, -1)
    return SprintEventResult(pol, atom, False, +1)


def cavity_pass_events(term: PulseTerm) -> tuple[PulseTerm, int, tuple[int, ...]]:
    """Cavity pass returning also the 1-based slots whose photon interacted.

    Raises :class:`ContractViolation` for the one family of terms whose walk
    would emit two V photons (atom in g_h with the V photon not last).
    Such terms never reach a cavity pass in the protocol because the atom is
    reset to g_v before every pass.
    """
    n, k = term.n_h, term.v_slot
    total = term.n_photons
    if term.atom is AtomState.GROUND_V:
        if k is None:
            out, slots = term, ()
        elif k < total:
            # V flips to H and toggles to g_h; the next H flips back to V.
            out, slots = term.replace(v_slot=k + 1), (k, k + 1)
        else:
            out, slots = PulseTerm(n + 1, None, AtomState.GROUND_H, term.readout), (k,)
    else:
        if total == 0 or (k is not None and total == 1):
            out, slots = term, ()
        elif k is None:
            out, slots = PulseTerm(n - 1, 1, AtomState.GROUND_V, term.readout), (1,)
        elif k == total:
            out, slots = term.replace(v_slot=1), (1, k)
        else:
            raise ContractViolation(
                f"cavity pass of {term} would leave two V photons in the pulse"
            )
    phase = -1 if len(slots) % 2 else 1
    return out, phase, slots


def cavity_pass(term: PulseTerm) -> tuple[PulseTerm, int]:
    out, phase, _ = cavity_pass_events(term)
    return out, phase


def is_passable(term: PulseTerm) -> bool:
    """True when :func:`cavity_pass` is defined on ``term``."""
    if term.atom is AtomState.GROUND_V or term.v_slot is None:
        return True
    return term.v_slot == term.n_photons


def reinit_atom(term: PulseTerm, iteration: int) -> tuple[PulseTerm, int]:
    """Send one H photon to reset the atom to g_v and record the readout.

    The readout is 'v' exactly when the atom was in g_h, i.e. when the
    preceding pass added the V photon to the H mode.
    """
    if iteration != len(term.readout) + 1:
        raise ContractViolation(
            f"reinit for iteration {iteration} on a term with readout {term.readout!r}"
        )
    ev = sprint_event(Polarization.H, term.atom)
    mark = "v" if ev.out_polarization is Polarization.V else "h"
    return term.replace(atom=ev.out_atom, readout=term.readout + mark), ev.phase
