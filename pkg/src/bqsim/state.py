"""Time-ordered pulse basis, sparse joint states and input-state constructors.

A basis element is a :class:`PulseTerm`: ``n_h`` H photons in the pulse, an
optional single V photon at a 1-based time slot, the atom's ground state, and
the readout string accumulated so far (one character per finished
iteration). A :class:`QuantumState` is a sparse map from terms to complex
amplitudes.

Readout characters are ``'h'`` and ``'v'``; the loss channel additionally
writes ``'-'`` when the readout photon of an iteration was lost.
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Optional, Sequence

import numpy as np

from .errors import ContractViolation, InvalidInput

log = logging.getLogger(__name__)

PRUNE_TOL = 1e-14
TAIL_WARN_THRESHOLD = 1e-9
NORM_EPS = 1e-12

READOUT_CHARS = frozenset("hv-")


class Polarization(enum.Enum):
    H = "H"
    V = "V"


class AtomState(enum.Enum):
    GROUND_H = "g_h"
    GROUND_V = "g_v"

    def toggled(self) -> AtomState:
        return AtomState.GROUND_V if self is AtomState.GROUND_H else AtomState.GROUND_H


@dataclass(frozen=True)
class PulseTerm:
    n_h: int
    v_slot: Optional[int] = None
    atom: AtomState = AtomState.GROUND_V
    readout: str = ""

    def __post_init__(self):
        if self.n_h < 0:
            raise ContractViolation(f"negative photon number {self.n_h}")
        if self.v_slot is not None and not 1 <= self.v_slot <= self.n_h + 1:
            raise ContractViolation(
                f"v_slot {self.v_slot} outside 1..{self.n_h + 1}"
            )
        if not READOUT_CHARS.issuperset(self.readout):
            raise ContractViolation(f"bad readout string {self.readout!r}")

    @property
    def has_v(self) -> bool:
        return self.v_slot is not None

    @property
    def n_photons(self) -> int:
        """Total photons in the pulse (the readout train is not counted)."""
        return self.n_h + (1 if self.v_slot is not None else 0)

    def polarizations(self) -> tuple[Polarization, ...]:
        """Explicit time-ordered polarization list of the pulse."""
        pols = [Polarization.H] * self.n_photons
        if self.v_slot is not None:
            pols[self.v_slot - 1] = Polarization.V
        return tuple(pols)

    def replace(self, **changes) -> PulseTerm:
        fields = dict(n_h=self.n_h, v_slot=self.v_slot, atom=self.atom, readout=self.readout)
        fields.update(changes)
        return PulseTerm(**fields)

    def sort_key(self):
        return (self.readout, self.n_h, self.v_slot or 0, self.atom.value)


def term_from_polarizations(
    pols: Sequence[Polarization], atom: AtomState, readout: str = ""
) -> PulseTerm:
    """Inverse of :meth:`PulseTerm.polarizations`; rejects pulses with two V photons."""
    v_positions = [i + 1 for i, p in enumerate(pols) if p is Polarization.V]
    if len(v_positions) > 1:
        raise ContractViolation(f"pulse carries {len(v_positions)} V photons")
    v_slot = v_positions[0] if v_positions else None
    return PulseTerm(len(pols) - len(v_positions), v_slot, atom, readout)


@dataclass(frozen=True)
class QuantumState:
    """Immutable sparse state. Terms are stored in canonical order."""

    terms: Mapping[PulseTerm, complex]
    n_max: int = 0
    pruned_weight: float = 0.0
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        ordered = dict(sorted(self.terms.items(), key=lambda kv: kv[0].sort_key()))
        lengths = {len(t.readout) for t in ordered}
        if len(lengths) > 1:
            raise ContractViolation(f"mixed readout lengths {sorted(lengths)}")
        object.__setattr__(self, "terms", MappingProxyType(ordered))
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    @classmethod
    def from_amplitudes(
        cls,
        amplitudes: Mapping[PulseTerm, complex],
        n_max: int = 0,
        tol: float = PRUNE_TOL,
        pruned_weight: float = 0.0,
        metadata: Optional[Mapping[str, object]] = None,
    ) -> QuantumState:
        kept = {}
        removed = 0.0
        for term, amp in amplitudes.items():
            if abs(amp) < tol:
                removed += abs(amp) ** 2
            else:
                kept[term] = complex(amp)
        return cls(kept, n_max, pruned_weight + removed, metadata or {})

    @classmethod
    def empty(cls, n_max: int = 0, metadata=None) -> QuantumState:
        return cls({}, n_max, 0.0, metadata or {})

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def amplitude(self, term: PulseTerm) -> complex:
        return self.terms.get(term, 0j)

    @property
    def readout_length(self) -> Optional[int]:
        for term in self.terms:
            return len(term.readout)
        return None

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def scaled(self, factor: complex) -> QuantumState:
        return QuantumState(
            {t: a * factor for t, a in self.terms.items()},
            self.n_max,
            self.pruned_weight,
            self.metadata,
        )

    def normalized(self) -> QuantumState:
        n2 = self.norm_squared()
        if n2 == 0.0:
            raise InvalidInput("cannot normalize a zero-norm state")
        return self.scaled(1 / math.sqrt(n2))

    def with_metadata(self, **extra) -> QuantumState:
        meta = dict(self.metadata)
        meta.update(extra)
        return QuantumState(self.terms, self.n_max, self.pruned_weight, meta)


def norm(state: QuantumState) -> float:
    return math.sqrt(state.norm_squared())


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>, antilinear in the first argument."""
    if len(a) <= len(b):
        return complex(sum((amp.conjugate() * b.terms.get(t, 0j) for t, amp in a), 0j))
    return complex(sum((a.terms.get(t, 0j).conjugate() * amp for t, amp in b), 0j))


def prune(state: QuantumState, tol: float = PRUNE_TOL) -> QuantumState:
    return QuantumState.from_amplitudes(
        state.terms, state.n_max, tol, state.pruned_weight, state.metadata
    )


def fidelity(state: QuantumState, target: QuantumState) -> float:
    """Squared overlap |<target|state>|^2 of two normalized states."""
    la, lb = state.readout_length, target.readout_length
    if la is not None and lb is not None and la != lb:
        raise ContractViolation(f"readout lengths differ: {la} vs {lb}")
    return min(1.0, abs(inner_product(target, state)) ** 2)


def photon_number_distribution(state: QuantumState) -> dict[int, float]:
    """P(N) of the H pulse, incoherently summed over atom and readout."""
    if any(t.has_v for t in state.terms):
        raise ContractViolation("photon-number distribution needs a state without a V photon")
    total = state.norm_squared()
    if total == 0.0:
        raise InvalidInput("zero-norm state has no photon-number distribution")
    dist: dict[int, float] = {}
    for term, amp in state:
        dist[term.n_h] = dist.get(term.n_h, 0.0) + abs(amp) ** 2 / total
    return dict(sorted(dist.items()))


# -- inputs -----------------------------------------------------------------


def default_coherent_n_max(alpha_sq: float) -> int:
    return math.ceil(alpha_sq + 6 * math.sqrt(alpha_sq) + 10)


@dataclass(frozen=True)
class InputSpec:
    """Description of the H-mode input pulse ``sum_N C_N |N_h>``.

    Build with :meth:`coherent`, :meth:`fock` or :meth:`custom` rather than
    directly.
    """

    kind: str
    alpha: complex = 0j
    n: int = 0
    coeffs: tuple[complex, ...] = ()
    n_max: int = 0

    def __post_init__(self):
        if self.kind not in ("coherent", "fock", "custom"):
            raise InvalidInput(f"unknown input kind {self.kind!r}")
        if self.n_max < 0:
            raise InvalidInput("n_max must be non-negative")
        if self.kind == "fock" and not 0 <= self.n <= self.n_max:
            raise InvalidInput(f"fock({self.n}) needs 0 <= n <= n_max={self.n_max}")
        if self.kind == "custom" and len(self.coeffs) > self.n_max + 1:
            if any(c != 0 for c in self.coeffs[self.n_max + 1:]):
                raise InvalidInput("nonzero coefficient beyond n_max")

    @classmethod
    def coherent(cls, alpha: complex, n_max: Optional[int] = None) -> InputSpec:
        if n_max is None:
            n_max = default_coherent_n_max(abs(alpha) ** 2)
        return cls("coherent", alpha=complex(alpha), n_max=n_max)

    @classmethod
    def coherent_sq(cls, alpha_sq: float, n_max: Optional[int] = None) -> InputSpec:
        """Real positive coherent amplitude with mean photon number ``alpha_sq``."""
        if alpha_sq < 0:
            raise InvalidInput("alpha_sq must be non-negative")
        return cls.coherent(math.sqrt(alpha_sq), n_max)

    @classmethod
    def fock(cls, n: int, n_max: Optional[int] = None) -> InputSpec:
        return cls("fock", n=n, n_max=n if n_max is None else n_max)

    @classmethod
    def custom(cls, coeffs: Iterable[complex], n_max: Optional[int] = None) -> InputSpec:
        coeffs = tuple(complex(c) for c in coeffs)
        if n_max is None:
            n_max = max(len(coeffs) - 1, 0)
        return cls("custom", coeffs=coeffs, n_max=n_max)

    def with_n_max(self, n_max: int) -> InputSpec:
        if self.kind == "custom":
            return InputSpec("custom", coeffs=self.coeffs[: n_max + 1], n_max=n_max)
        return InputSpec(self.kind, self.alpha, self.n, self.coeffs, n_max)

    def raw_coefficients(self) -> np.ndarray:
        """Coefficients C_0..C_{n_max} before renormalization."""
        c = np.zeros(self.n_max + 1, dtype=complex)
        if self.kind == "fock":
            c[self.n] = 1.0
        elif self.kind == "custom":
            m = min(len(self.coeffs), self.n_max + 1)
            c[:m] = self.coeffs[:m]
        else:
            a = self.alpha
            r2 = abs(a) ** 2
            if r2 == 0:
                c[0] = 1.0
            else:
                phase = cmath.phase(a)
                for n in range(self.n_max + 1):
                    log_mag = -r2 / 2 + n * math.log(abs(a)) - 0.5 * math.lgamma(n + 1)
                    c[n] = math.exp(log_mag) * cmath.exp(1j * n * phase)
        return c

    def coefficients(self) -> tuple[np.ndarray, float]:
        """Normalized coefficients and the weight dropped by truncation.

        For coherent inputs the dropped weight is the Poisson tail beyond
        ``n_max``; for custom inputs it is whatever normalization removed
        (negative if the supplied vector had norm above one).
        """
        c = self.raw_coefficients()
        n2 = float(np.sum(np.abs(c) ** 2))
        if n2 == 0.0:
            raise InvalidInput("input coefficient vector is all zero")
        return c / math.sqrt(n2), 1.0 - n2


def make_input(spec: InputSpec, tail_threshold: float = TAIL_WARN_THRESHOLD) -> QuantumState:
    """The bare H-mode pulse ``sum_N C_N |N_h>`` with the atom in g_v."""
    coeffs, tail = spec.coefficients()
    meta: dict[str, object] = {"truncated_tail_weight": tail}
    if spec.kind == "coherent" and tail > tail_threshold:
        meta["truncation_warning"] = (
            f"coherent tail beyond n_max={spec.n_max} has weight {tail:.3e}"
        )
        log.warning(meta["truncation_warning"])
    amps = {PulseTerm(n): complex(c) for n, c in enumerate(coeffs) if c != 0}
    return QuantumState.from_amplitudes(amps, spec.n_max, metadata=meta)


def expand_with_v(state: QuantumState) -> QuantumState:
    """Attach the auxiliary V photon as an equal superposition over time slots."""
    out: dict[PulseTerm, complex] = {}
    for term, amp in state:
        if term.has_v:
            raise ContractViolation("state already carries a V photon")
        n = term.n_h
        share = amp / math.sqrt(n + 1)
        for slot in range(1, n + 2):
            key = term.replace(v_slot=slot)
            out[key] = out.get(key, 0j) + share
    return QuantumState(out, state.n_max, state.pruned_weight, state.metadata)


def fock_state(n: int, readout: str = "", atom: AtomState = AtomState.GROUND_V) -> QuantumState:
    return QuantumState({PulseTerm(n, None, atom, readout): 1.0 + 0j}, n)


def w_state(
    n_qubits: int, total_length: Optional[int] = None, n_h: int = 0,
    atom: AtomState = AtomState.GROUND_V,
) -> QuantumState:
    """W_n on the first ``n_qubits`` readout photons, padded with 'h'.

    The pulse part of every term is ``n_h`` H photons and no V photon, so the
    result can be compared directly against a multiphoton W herald.
    """
    length = n_qubits if total_length is None else total_length
    if length < n_qubits:
        raise ContractViolation("W register longer than the readout")
    amp = 1 / math.sqrt(n_qubits)
    terms = {}
    for j in range(n_qubits):
        readout = "h" * j + "v" + "h" * (length - j - 1)
        terms[PulseTerm(n_h, None, atom, readout)] = complex(amp)
    return QuantumState(terms, n_h)


# -- text serialization -----------------------------------------------------


def dumps(state: QuantumState) -> str:
    """One line per term: ``n_h v_slot atom readout re im``.

    ``v_slot`` is ``-`` when absent and an empty readout is written ``_``.
    """
    lines = []
    for term, amp in state:
        slot = "-" if term.v_slot is None else str(term.v_slot)
        readout = term.readout or "_"
        lines.append(
            f"{term.n_h} {slot} {term.atom.value} {readout} {amp.real:.17g} {amp.imag:.17g}"
        )
    return "\n".join(lines) + ("\n" if lines else "")


def loads(text: str, n_max: int = 0) -> QuantumState:
    terms = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 6:
            raise InvalidInput(f"line {lineno}: expected 6 fields, got {len(parts)}")
        n_h, slot, atom, readout, re, im = parts
        term = PulseTerm(
            int(n_h),
            None if slot == "-" else int(slot),
            AtomState(atom),
            "" if readout == "_" else readout,
        )
        terms[term] = terms.get(term, 0j) + complex(float(re), float(im))
    return QuantumState(terms, n_max)
