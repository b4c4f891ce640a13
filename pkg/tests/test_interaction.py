import numpy as np
import pytest

from conftest import random_profile
from qstrat.errors import ContractViolationError, ProfileMismatchError
from qstrat.interaction import (
    TRIVIAL_OUTCOME,
    OutcomeDistribution,
    distribution_via_reps,
    ensure_measuring,
    simulate_interaction,
)
from qstrat.strategy import (
    KIND_STRATEGY,
    CoStrategyDescription,
    MeasuringRep,
    SpaceProfile,
    StrategyDescription,
    random_costrategy,
    random_strategy,
    represent_costrategy,
    represent_strategy,
)
from qstrat.tensor import HermOp


def echo_pair():
    """Co-strategy sends |0>, plan stores the echo and measures it."""
    profile = SpaceProfile.of_dims([2], [1])
    ket0 = np.zeros((2, 1), dtype=complex)
    ket0[0, 0] = 1.0
    cdesc = CoStrategyDescription(
        profile, (1, 1), ket0 @ ket0.conj().T,
        (np.eye(1, dtype=complex),),  # reply is empty; memory stays trivial
    )
    p0 = np.diag([1.0, 0.0]).astype(complex)
    p1 = np.diag([0.0, 1.0]).astype(complex)
    sdesc = StrategyDescription(
        profile, (2,), (np.eye(2, dtype=complex),), {"0": p0, "1": p1}
    )
    return sdesc, cdesc


class TestSimulate:
    def test_deterministic_echo(self):
        sdesc, cdesc = echo_pair()
        dist = simulate_interaction(sdesc, cdesc)
        assert dist.entries[("0", TRIVIAL_OUTCOME)] == pytest.approx(1.0, abs=1e-12)
        assert dist.entries[("1", TRIVIAL_OUTCOME)] == pytest.approx(0.0, abs=1e-12)

    def test_probabilities_sum_to_one(self, rng):
        for _ in range(5):
            profile = random_profile(rng, max_turns=2)
            seed = int(rng.integers(1 << 31))
            sdesc = random_strategy(profile, 2, seed)
            cdesc = random_costrategy(profile, 3, seed + 1)
            dist = simulate_interaction(sdesc, cdesc)
            assert dist.total() == pytest.approx(1.0, abs=1e-9)

    def test_profile_mismatch(self, rng):
        sdesc = random_strategy(SpaceProfile.of_dims([2], [2]), 0, 1)
        cdesc = random_costrategy(SpaceProfile.of_dims([3], [2]), 0, 1)
        with pytest.raises(ProfileMismatchError):
            simulate_interaction(sdesc, cdesc)


class TestDistributionViaReps:
    def test_matches_simulation_on_random_pairs(self, rng):
        for _ in range(8):
            profile = random_profile(rng, max_turns=2)
            seed = int(rng.integers(1 << 31))
            sdesc = random_strategy(profile, 2, seed)
            cdesc = random_costrategy(profile, 2, seed + 1)
            via_reps = distribution_via_reps(
                represent_strategy(sdesc), represent_costrategy(cdesc)
            )
            simulated = simulate_interaction(sdesc, cdesc)
            assert via_reps.max_gap(simulated) < 1e-8

    def test_single_outcome_measurements(self, rng):
        profile = SpaceProfile.of_dims([2], [2])
        s = ensure_measuring(represent_strategy(random_strategy(profile, 0, 2)))
        c = ensure_measuring(represent_costrategy(random_costrategy(profile, 0, 3)))
        dist = distribution_via_reps(s, c)
        assert dist.pairs() == [(TRIVIAL_OUTCOME, TRIVIAL_OUTCOME)]
        assert dist.total() == pytest.approx(1.0, abs=1e-9)

    def test_kind_enforcement(self, rng):
        profile = SpaceProfile.of_dims([2], [2])
        s = ensure_measuring(represent_strategy(random_strategy(profile, 0, 4)))
        with pytest.raises(ContractViolationError):
            distribution_via_reps(s, s)

    def test_bilinearity_in_each_argument(self, rng):
        profile = SpaceProfile.of_dims([2], [2])
        s1 = represent_strategy(random_strategy(profile, 2, 5))
        s2 = represent_strategy(random_strategy(profile, 2, 6))
        c = represent_costrategy(random_costrategy(profile, 2, 7))
        lam = 0.3
        mixed = MeasuringRep(
            profile, KIND_STRATEGY,
            {k: HermOp(s1.outcomes[k].space,
                       lam * s1.outcomes[k].matrix + (1 - lam) * s2.outcomes[k].matrix)
             for k in s1.labels},
        )
        d1 = distribution_via_reps(s1, c)
        d2 = distribution_via_reps(s2, c)
        dm = distribution_via_reps(mixed, c)
        for pair in dm.pairs():
            want = lam * d1.entries[pair] + (1 - lam) * d2.entries[pair]
            assert dm.entries[pair] == pytest.approx(want, abs=1e-10)

    def test_marginal_consistency(self, rng):
        profile = SpaceProfile.of_dims([2, 1], [2, 2])
        s = represent_strategy(random_strategy(profile, 2, 8))
        c = represent_costrategy(random_costrategy(profile, 3, 9))
        joint = distribution_via_reps(s, c)
        against_total = distribution_via_reps(s, ensure_measuring(c.total()))
        marg = joint.marginal(0)
        for a in s.labels:
            assert marg[a] == pytest.approx(
                against_total.entries[(a, TRIVIAL_OUTCOME)], abs=1e-9
            )
        # and symmetrically for the co-strategy's outcomes
        total_against = distribution_via_reps(ensure_measuring(s.total()), c)
        marg_b = joint.marginal(1)
        for b in c.labels:
            assert marg_b[b] == pytest.approx(
                total_against.entries[(TRIVIAL_OUTCOME, b)], abs=1e-9
            )

    def test_all_unit_dimensions(self):
        # empty messages everywhere still give a total-probability-one run
        profile = SpaceProfile.of_dims([1], [1])
        sdesc = random_strategy(profile, 2, 10)
        cdesc = random_costrategy(profile, 2, 11)
        dist = simulate_interaction(sdesc, cdesc)
        assert dist.total() == pytest.approx(1.0, abs=1e-10)
        via = distribution_via_reps(represent_strategy(sdesc),
                                    represent_costrategy(cdesc))
        assert via.max_gap(dist) < 1e-10


class TestOutcomeDistribution:
    def test_rejects_negative_entries(self):
        with pytest.raises(ContractViolationError):
            OutcomeDistribution({("a", "b"): -1e-6})

    def test_max_gap(self):
        d1 = OutcomeDistribution({("a", "b"): 0.5, ("a", "c"): 0.5})
        d2 = OutcomeDistribution({("a", "b"): 0.25, ("a", "c"): 0.75})
        assert d1.max_gap(d2) == pytest.approx(0.25)
