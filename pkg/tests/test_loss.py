import math

import numpy as np
import pytest

from bqsim.errors import InvalidInput, ResourceLimit, UndefinedFidelity
from bqsim.herald import HeraldPattern, project
from bqsim.loss import LossConfig, lossy_herald_fidelity, run_protocol_lossy
from bqsim.protocol import ProtocolConfig, run_protocol
from bqsim.state import InputSpec, fock_state

FOCK3_SPEC = InputSpec.coherent_sq(0.02)
FOCK3_CFG = ProtocolConfig(3, n_max=5)
HHV = HeraldPattern.exact("hhv")


def test_loss_config_validation():
    with pytest.raises(InvalidInput):
        LossConfig(1.0)
    with pytest.raises(InvalidInput):
        LossConfig(0.1, max_loss_events=-1)
    with pytest.raises(InvalidInput):
        LossConfig(0.1, mode="sometimes")


@pytest.mark.parametrize(
    "spec, iterations",
    [(InputSpec.fock(2), 3), (InputSpec.custom([0.6, 0.8j]), 2), (FOCK3_SPEC, 3)],
)
def test_lossless_reduction(spec, iterations):
    cfg = ProtocolConfig(iterations, n_max=5)
    ens = run_protocol_lossy(spec, cfg, LossConfig(0.0))
    assert len(ens.branches) == 1 and ens.truncated_weight == 0
    weight, state = ens.branches[0]
    assert weight == pytest.approx(1, abs=1e-12)
    ref = run_protocol(spec, cfg)
    assert set(state.terms) == set(ref.terms)
    for term, amp in ref:
        assert abs(state.amplitude(term) - amp) < 1e-12


def test_zero_loss_branch_weight_counts_photons():
    # fock(1): two pulse photons and one reset photon pass the cavity
    L = 0.1
    ens = run_protocol_lossy(InputSpec.fock(1), ProtocolConfig(1), LossConfig(L, 3))
    weight = dict(zip(ens.records, (w for w, _ in ens.branches)))[()]
    assert weight == pytest.approx((1 - L) ** 3, abs=1e-12)


def test_lost_readout_photons_self_exclude():
    L = 0.07
    cfg = ProtocolConfig(2)
    ens = run_protocol_lossy(InputSpec.fock(1), cfg, LossConfig(L, max_loss_events=6))
    assert ens.truncated_weight == pytest.approx(0, abs=1e-15)
    lost = [(w, s) for w, s in ens.branches if "-" in next(iter(s.terms)).readout]
    assert sum(w for w, _ in lost) == pytest.approx(1 - (1 - L) ** 2, abs=1e-12)
    for _, s in lost:
        for j in (1, 2):
            assert project(s, HeraldPattern.v_at(j)).probability == 0


@pytest.mark.parametrize("L", [0.0, 0.01, 0.05, 0.2])
@pytest.mark.parametrize("cap", [0, 1, 3])
@pytest.mark.parametrize("mode", ["per_pass", "per_event"])
def test_weight_conservation(L, cap, mode):
    ens = run_protocol_lossy(
        InputSpec.custom([0.5, 0.5, 0.5, 0.5]), ProtocolConfig(3), LossConfig(L, cap, mode)
    )
    assert all(w >= 0 for w, _ in ens.branches)
    assert ens.total_weight == pytest.approx(1, abs=1e-10)
    for _, s in ens.branches:
        assert s.norm_squared() == pytest.approx(1, abs=1e-12)


def test_truncated_weight_shrinks_with_cap():
    spec, cfg = InputSpec.fock(2), ProtocolConfig(3)
    tails = [run_protocol_lossy(spec, cfg, LossConfig(0.1, cap)).truncated_weight for cap in range(5)]
    assert all(a > b for a, b in zip(tails, tails[1:]))
    # no loss at all: (1-L)^(passes), 3 pulse photons and 1 reset photon per iteration
    assert tails[0] == pytest.approx(1 - 0.9 ** 12, abs=1e-12)


def test_branch_budget():
    with pytest.raises(ResourceLimit) as err:
        run_protocol_lossy(FOCK3_SPEC, FOCK3_CFG, LossConfig(0.05, 3, max_branches=50))
    assert err.value.partial is not None


def test_undefined_fidelity():
    with pytest.raises(UndefinedFidelity):
        lossy_herald_fidelity(
            InputSpec.fock(0), ProtocolConfig(3), LossConfig(0.1),
            HeraldPattern.v_at(3), fock_state(3),
        )


def test_fock3_fidelity_lossless_against_ideal_output():
    ideal = project(run_protocol(FOCK3_SPEC, FOCK3_CFG), HHV).post_state
    _, fid = lossy_herald_fidelity(FOCK3_SPEC, FOCK3_CFG, LossConfig(0.0), HHV, ideal)
    assert fid == pytest.approx(1, abs=1e-12)


def test_fock3_fidelity_monotone_in_loss():
    grid = np.round(np.arange(0, 0.101, 0.01), 3)
    fids = [
        lossy_herald_fidelity(FOCK3_SPEC, FOCK3_CFG, LossConfig(L), HHV, fock_state(3))[1]
        for L in grid
    ]
    assert all(a >= b for a, b in zip(fids, fids[1:]))


def test_per_event_mode_loses_less():
    _, f_pass = lossy_herald_fidelity(FOCK3_SPEC, FOCK3_CFG, LossConfig(0.05), HHV, fock_state(3))
    _, f_event = lossy_herald_fidelity(
        FOCK3_SPEC, FOCK3_CFG, LossConfig(0.05, mode="per_event"), HHV, fock_state(3)
    )
    assert f_event > f_pass


def test_deterministic_ensemble_order():
    a = run_protocol_lossy(InputSpec.fock(2), ProtocolConfig(2), LossConfig(0.1))
    b = run_protocol_lossy(InputSpec.fock(2), ProtocolConfig(2), LossConfig(0.1))
    assert a.records == b.records
    assert [w for w, _ in a.branches] == [w for w, _ in b.branches]
    assert not math.isnan(a.truncated_weight)
