"""Heralding schemes on the protocol output and their closed-form efficiencies.

Every scheme is a projection of the final joint state followed by
renormalization. The closed forms (``eta1``, ``eta2``, ``eta_bqs``, ``eta3``,
``w_probability``) take the normalized input coefficient vector C_0..C_n and
are kept independent of the simulated projections so the two can be
compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractViolation
from .protocol import ProtocolConfig, run_protocol
from .state import InputSpec, PulseTerm, QuantumState, fock_state, w_state

SQRT_HALF = 1 / math.sqrt(2)


@dataclass(frozen=True)
class HeraldPattern:
    kind: str
    k: Optional[int] = None
    M: Optional[int] = None
    readout: Optional[str] = None
    verification_vacuum: bool = True

    @classmethod
    def v_at(cls, k: int) -> HeraldPattern:
        """'v' on readout photon ``k`` (1-based), 'h' on all others."""
        return cls("v_at", k=k)

    @classmethod
    def all_h(cls) -> HeraldPattern:
        return cls("all_h")

    @classmethod
    def exact(cls, readout: str) -> HeraldPattern:
        return cls("exact", readout=readout)

    @classmethod
    def bell(cls, k: int) -> HeraldPattern:
        """Antisymmetric Bell projection of readout photons k and k+1."""
        return cls("bell", k=k)

    @classmethod
    def multiphoton(cls, M: int, verification_vacuum: bool = True) -> HeraldPattern:
        return cls("multiphoton", M=M, verification_vacuum=verification_vacuum)

    def readout_string(self, length: int) -> str:
        if self.kind == "v_at":
            if not 1 <= self.k <= length:
                raise ContractViolation(f"v_at({self.k}) outside readout of length {length}")
            return "h" * (self.k - 1) + "v" + "h" * (length - self.k)
        if self.kind == "all_h":
            return "h" * length
        if self.kind == "exact":
            if len(self.readout) != length:
                raise ContractViolation(
                    f"pattern {self.readout!r} does not match readout length {length}"
                )
            return self.readout
        raise ContractViolation(f"{self.kind} is not a readout-string pattern")


@dataclass(frozen=True)
class HeraldOutcome:
    pattern: HeraldPattern
    probability: float
    post_state: QuantumState
    metadata: dict = field(default_factory=dict)


def _outcome(pattern, amplitudes, source: QuantumState, **meta) -> HeraldOutcome:
    raw = QuantumState.from_amplitudes(amplitudes, source.n_max)
    p = raw.norm_squared()
    metadata = dict(source.metadata)
    metadata.update(meta)
    post = raw.normalized() if p > 0 else QuantumState.empty(source.n_max)
    return HeraldOutcome(pattern, p, post.with_metadata(**metadata), metadata)


def project(state: QuantumState, pattern: HeraldPattern) -> HeraldOutcome:
    """Apply any herald to ``state``; readout heralds strip the readout."""
    if pattern.kind == "bell":
        return project_bell(state, pattern.k)
    if pattern.kind == "multiphoton":
        return project_multiphoton(state, pattern)
    return project_readout(state, pattern)


def project_readout(state: QuantumState, pattern: HeraldPattern) -> HeraldOutcome:
    length = state.readout_length or 0
    wanted = pattern.readout_string(length)
    kept = {}
    for term, amp in state:
        if term.readout == wanted:
            key = term.replace(readout="")
            kept[key] = kept.get(key, 0j) + amp
    return _outcome(pattern, kept, state)


def project_bell(state: QuantumState, k: int) -> HeraldOutcome:
    """Project readout photons k, k+1 onto (<v h| - <h v|)/sqrt(2), others on 'h'."""
    length = state.readout_length or 0
    if k < 1 or k + 1 > length:
        raise ContractViolation(f"bell({k}) needs readout length >= {k + 1}, got {length}")
    signs = {"vh": 1.0, "hv": -1.0}
    kept = {}
    for term, amp in state:
        r = term.readout
        pair = r[k - 1:k + 1]
        if pair not in signs or set(r[:k - 1] + r[k + 1:]) - {"h"}:
            continue
        key = term.replace(readout="")
        kept[key] = kept.get(key, 0j) + signs[pair] * SQRT_HALF * amp
    return _outcome(HeraldPattern.bell(k), kept, state)


def project_multiphoton(state: QuantumState, pattern: HeraldPattern) -> HeraldOutcome:
    """Detect M H photons in the pulse (and, optionally, no V photon).

    The readout is left in place: it carries the heralded W state.
    """
    if pattern.M < 0:
        raise ContractViolation("M must be non-negative")
    kept = {
        t: a for t, a in state
        if t.n_h == pattern.M and (not pattern.verification_vacuum or not t.has_v)
    }
    return _outcome(pattern, kept, state)


def readout_herald_probabilities(state: QuantumState) -> dict[str, float]:
    """Probabilities of the mutually exclusive heralds v_1..v_n and all-h."""
    n = state.readout_length or 0
    probs = {f"v{j}": project_readout(state, HeraldPattern.v_at(j)).probability
             for j in range(1, n + 1)}
    probs["all_h"] = project_readout(state, HeraldPattern.all_h()).probability
    return probs


# -- closed forms -----------------------------------------------------------


def _abs2(c) -> np.ndarray:
    return np.abs(np.asarray(c, dtype=complex)) ** 2


def eta1(c) -> float:
    p = _abs2(c)
    return float(np.sum(p / (np.arange(len(p)) + 1)))


def eta2(c, k: int) -> float:
    p = _abs2(c)
    return float(sum(p[n - 1] / n for n in range(max(k, 1), len(p) + 1)))


def eta_bqs(c, iterations: int) -> tuple[float, float]:
    """(probability that some readout photon is 'v', tail weight P(N >= iterations))."""
    p = _abs2(c)
    k = iterations - 1
    miss = sum((n - k) * p[n] / (n + 1) for n in range(k + 1, len(p)))
    tail = float(np.sum(p[k + 1:]))
    return 1.0 - float(miss), tail


def eta3(c, k: int) -> float:
    p = _abs2(c)
    return float(p[k - 1] / (2 * k)) if k - 1 < len(p) else 0.0


def w_probability(c, M: int, iterations: int) -> float:
    p = _abs2(c)
    if M - 1 >= len(p) or M < 1:
        return 0.0
    k = iterations - 1
    return float(p[M - 1]) if M <= k else float(p[M - 1] * (k + 1) / M)


def bqs_state(c, k: int) -> QuantumState:
    """Normalized sum_{N>=k} C_{N-1}/sqrt(N) |N>."""
    c = np.asarray(c, dtype=complex)
    amps = {PulseTerm(n): c[n - 1] / math.sqrt(n) for n in range(max(k, 1), len(c) + 1)}
    return QuantumState.from_amplitudes(amps, len(c), tol=0.0).normalized()


# -- schemes ----------------------------------------------------------------


def _final(spec, config, final_state):
    return run_protocol(spec, config) if final_state is None else final_state


def herald_inverse_annihilation(
    spec: InputSpec, config: ProtocolConfig, final_state: Optional[QuantumState] = None
) -> HeraldOutcome:
    if config.iterations != 1:
        raise ContractViolation("inverse annihilation uses exactly one iteration")
    return project_readout(_final(spec, config, final_state), HeraldPattern.v_at(1))


def herald_bqs(
    spec: InputSpec, config: ProtocolConfig, k: int,
    final_state: Optional[QuantumState] = None,
) -> HeraldOutcome:
    """k-th order scissors: herald on 'v' at readout k."""
    if not 1 <= k <= config.iterations:
        raise ContractViolation(f"BQS order {k} needs 1 <= k <= iterations")
    return project_readout(_final(spec, config, final_state), HeraldPattern.v_at(k))


@dataclass(frozen=True)
class BQSSuccess:
    probability: float
    tail_weight: float
    simulated: Optional[float] = None


def bqs_success_probability(
    spec: InputSpec, config: ProtocolConfig, simulate: bool = False
) -> BQSSuccess:
    c, _ = config.resolve(spec).coefficients()
    eta, tail = eta_bqs(c, config.iterations)
    sim = None
    if simulate:
        final = run_protocol(spec, config)
        sim = 1.0 - project_readout(final, HeraldPattern.all_h()).probability
    return BQSSuccess(eta, tail, sim)


def apply_annihilation(state: QuantumState) -> tuple[float, QuantumState]:
    """Ideal a on the H pulse: returns (||a psi||^2, normalized a psi)."""
    out = {}
    for term, amp in state:
        if term.has_v:
            raise ContractViolation("annihilation acts on a pulse without V photon")
        if term.n_h == 0:
            continue
        key = term.replace(n_h=term.n_h - 1)
        out[key] = out.get(key, 0j) + math.sqrt(term.n_h) * amp
    raw = QuantumState.from_amplitudes(out, state.n_max, tol=0.0)
    weight = raw.norm_squared()
    if weight == 0.0:
        return 0.0, QuantumState.empty(state.n_max)
    return weight, raw.normalized()


def herald_neutral_bqs(
    spec: InputSpec, config: ProtocolConfig, k: int,
    final_state: Optional[QuantumState] = None,
) -> HeraldOutcome:
    """Remove components below ``k`` while keeping amplitude ratios.

    Heralds scissors of order k+1 and then annihilates one photon, so it
    costs one more iteration than the plain k-th order scissors.
    """
    if config.iterations < k + 1:
        raise ContractViolation(f"neutral BQS of order {k} needs >= {k + 1} iterations")
    bqs = herald_bqs(spec, config, k + 1, final_state)
    if bqs.probability == 0.0:
        return bqs
    weight, post = apply_annihilation(bqs.post_state)
    meta = dict(bqs.metadata, annihilation_weight=weight)
    return HeraldOutcome(bqs.pattern, bqs.probability, post.with_metadata(**meta), meta)


def bell_measure_fock(
    spec: InputSpec, config: ProtocolConfig, k: int,
    final_state: Optional[QuantumState] = None,
) -> HeraldOutcome:
    if k < 1 or config.iterations < k + 1:
        raise ContractViolation(f"Fock |{k}> generation needs >= {k + 1} iterations")
    return project_bell(_final(spec, config, final_state), k)


def herald_w_state(
    spec: InputSpec, config: ProtocolConfig, M: int,
    final_state: Optional[QuantumState] = None,
) -> HeraldOutcome:
    """Herald M H photons and an empty V mode; the readout holds W_min(M, iterations)."""
    if M < 3:
        raise ContractViolation("W states are defined for M >= 3")
    if config.iterations < 3:
        raise ContractViolation("W generation needs >= 3 iterations")
    out = project_multiphoton(_final(spec, config, final_state), HeraldPattern.multiphoton(M))
    size = min(M, config.iterations)
    meta = dict(out.metadata, M=M, w_size=size)
    return HeraldOutcome(out.pattern, out.probability, out.post_state.with_metadata(**meta), meta)


def w_target(M: int, iterations: int) -> QuantumState:
    return w_state(min(M, iterations), iterations, n_h=M)


@dataclass(frozen=True)
class WDistribution:
    probabilities: dict
    total: float


def w_success_distribution(
    spec: InputSpec, config: ProtocolConfig, final_state: Optional[QuantumState] = None
) -> WDistribution:
    """Simulated W_M herald probabilities for M = 3..n_max+1."""
    resolved = config.resolve(spec)
    final = _final(spec, config, final_state)
    probs = {
        M: herald_w_state(spec, config, M, final).probability
        for M in range(3, resolved.n_max + 2)
    }
    return WDistribution(probs, float(sum(probs.values())))


def fock_target(k: int) -> QuantumState:
    return fock_state(k)
