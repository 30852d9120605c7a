"""Linear cavity loss as an exact branch enumeration over loss records.

Every photon leaving the cavity (pulse photons and the reset photon) is lost
independently with probability ``L``. Loss acts after the photon's SPRINT
event, so the atom toggle still happens. A lost photon leaves a record
``(iteration, where, slot, polarization)`` in the environment; terms with the
same record stay coherent, distinct records are orthogonal and become
separate branches of a classical mixture.

``mode="per_event"`` restricts loss to photons that actually interacted with
the atom. It is provided for comparison only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ContractViolation, InvalidInput, ResourceLimit, UndefinedFidelity
from .herald import HeraldPattern, project
from .protocol import ProtocolConfig, initial_state
from .sprint import cavity_pass_events, reinit_atom
from .state import AtomState, PulseTerm, QuantumState, fidelity

LOST = "-"


@dataclass(frozen=True)
class LossConfig:
    L: float
    max_loss_events: int = 3
    mode: str = "per_pass"
    max_branches: int = 200_000

    def __post_init__(self):
        if not 0.0 <= self.L < 1.0:
            raise InvalidInput("loss L must lie in [0, 1)")
        if self.max_loss_events < 0:
            raise InvalidInput("max_loss_events must be >= 0")
        if self.mode not in ("per_pass", "per_event"):
            raise InvalidInput(f"unknown loss mode {self.mode!r}")


@dataclass(frozen=True)
class LossEnsemble:
    """Branches ``(weight, normalized state)`` keyed implicitly by loss record."""

    branches: list
    truncated_weight: float
    records: list = field(default_factory=list)

    @property
    def total_weight(self) -> float:
        return sum(w for w, _ in self.branches) + self.truncated_weight


def _remove_slot(term: PulseTerm, slot: int) -> PulseTerm:
    if term.v_slot == slot:
        return term.replace(v_slot=None)
    v = term.v_slot
    if v is not None and v > slot:
        v -= 1
    return PulseTerm(term.n_h - 1, v, term.atom, term.readout)


def _tail_probability(n: int, budget: int, L: float) -> float:
    """P(more than ``budget`` of ``n`` independent photons are lost)."""
    return sum(
        math.comb(n, s) * L**s * (1 - L) ** (n - s) for s in range(budget + 1, n + 1)
    )


def run_protocol_lossy(
    spec, config: ProtocolConfig, loss: LossConfig
) -> LossEnsemble:
    L = loss.L
    keep_amp = math.sqrt(1 - L)
    lose_amp = math.sqrt(L)
    # record tuple -> {term: amplitude}
    branches: dict[tuple, dict] = {(): dict(initial_state(spec, config).terms)}
    dropped = 0.0
    n_max = config.resolve(spec).n_max

    for it in range(1, config.iterations + 1):
        nxt: dict[tuple, dict] = {}

        def add(record, term, amp):
            bucket = nxt.setdefault(record, {})
            bucket[term] = bucket.get(term, 0j) + amp

        for record, terms in branches.items():
            budget = loss.max_loss_events - len(record)
            for term, amp in terms.items():
                if len(term.readout) != it - 1:
                    raise ContractViolation("readout length out of step with iteration")
                passed, phase, interacted = cavity_pass_events(term)
                amp = amp * phase
                pols = passed.polarizations()
                exposed = (
                    tuple(range(1, len(pols) + 1)) if loss.mode == "per_pass" else interacted
                )
                n_exp = len(exposed)
                if L == 0.0:
                    patterns = [()]
                else:
                    patterns = (
                        combo
                        for s in range(min(budget, n_exp) + 1)
                        for combo in itertools.combinations(exposed, s)
                    )
                    dropped += abs(amp) ** 2 * _tail_probability(n_exp, budget, L)
                for lost in patterns:
                    s = len(lost)
                    a = amp * lose_amp**s * keep_amp ** (n_exp - s)
                    out = passed
                    for slot in sorted(lost, reverse=True):
                        out = _remove_slot(out, slot)
                    rec = record + tuple((it, "pulse", slot, pols[slot - 1].value) for slot in lost)
                    _reinit_branch(add, rec, out, a, it, loss, L, budget - s)
                    if len(nxt) > loss.max_branches:
                        raise ResourceLimit(
                            f"more than {loss.max_branches} loss branches",
                            partial=_assemble(nxt, n_max, dropped),
                        )
                    if L > 0.0 and budget - s == 0 and _reinit_exposed(out, loss):
                        dropped += abs(a) ** 2 * L
        branches = {
            r: {t: a for t, a in ts.items() if abs(a) >= config.prune_tol}
            for r, ts in nxt.items()
        }
    return _assemble(branches, n_max, dropped)


def _reinit_exposed(term: PulseTerm, loss: LossConfig) -> bool:
    return loss.mode == "per_pass" or term.atom is AtomState.GROUND_H


def _reinit_branch(add, record, term, amp, it, loss, L, budget):
    done, phase = reinit_atom(term, it)
    amp = amp * phase
    if L == 0.0 or not _reinit_exposed(term, loss):
        add(record, done, amp)
        return
    add(record, done, amp * math.sqrt(1 - L))
    if budget > 0:
        emitted = done.readout[-1].upper()
        lost_term = done.replace(readout=done.readout[:-1] + LOST)
        add(record + ((it, "readout", 0, emitted),), lost_term, amp * math.sqrt(L))


def _assemble(branches: dict, n_max: int, dropped: float) -> LossEnsemble:
    out, records = [], []
    for record in sorted(branches):
        raw = QuantumState.from_amplitudes(branches[record], n_max, tol=0.0)
        w = raw.norm_squared()
        if w == 0.0:
            continue
        out.append((w, raw.normalized()))
        records.append(record)
    return LossEnsemble(out, dropped, records)


def lossy_herald_fidelity(
    spec,
    config: ProtocolConfig,
    loss: LossConfig,
    pattern: HeraldPattern,
    target: QuantumState,
    ensemble: Optional[LossEnsemble] = None,
) -> tuple[float, float]:
    """(joint herald probability, heralded fidelity to ``target``).

    Fidelity is the herald-weighted average over branches of the squared
    overlap of each branch's post-herald state with the target.
    """
    if ensemble is None:
        ensemble = run_protocol_lossy(spec, config, loss)
    prob = 0.0
    good = 0.0
    for weight, branch in ensemble.branches:
        out = project(branch, pattern)
        if out.probability == 0.0:
            continue
        p = weight * out.probability
        prob += p
        good += p * fidelity(out.post_state, target)
    if prob == 0.0:
        raise UndefinedFidelity(f"herald {pattern} never fires")
    return prob, good / prob
