"""Concrete protocol and referee fixtures shipped with the package.

The coin-flip fixture is a two-turn qubit commitment protocol: Alice commits
to a random bit a by sending |0> (a=0) or |+> (a=1), Bob replies with a
uniformly random bit b, Alice reveals a, and Bob checks the commitment
against the reveal; both parties output a xor b (Bob outputs "abort" when the
check fails).  Honest agreement is exactly 1/2 on each outcome, and the
optimal cheats on either side have the closed form (2 + sqrt(2))/4, which the
tests verify independently before freezing.
"""

from __future__ import annotations

import numpy as np

from .games import Referee
from .strategy import (
    CoStrategyDescription,
    MeasuringRep,
    SpaceProfile,
    StrategyDescription,
    represent_costrategy,
    represent_strategy,
)
from .tensor import HermOp, Space, SpaceList, kron

KET0 = np.array([1.0, 0.0], dtype=complex)
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
COMMIT_STATES = (KET0, KET_PLUS)

# optimal cheating probability of the commitment protocol, both sides
COMMITMENT_CHEAT = (2.0 + np.sqrt(2.0)) / 4.0


def coinflip_profile() -> SpaceProfile:
    return SpaceProfile.of_dims([1, 2], [2, 2])


def coinflip_alice_description() -> StrategyDescription:
    """Honest Alice: commit to a random bit, reveal it, output a xor b."""
    profile = coinflip_profile()
    a1 = np.zeros((4, 1), dtype=complex)  # -> commitment (x) memory holding a
    for a, phi in enumerate(COMMIT_STATES):
        for y in range(2):
            a1[y * 2 + a, 0] = phi[y] / np.sqrt(2.0)
    a2 = np.zeros((8, 4), dtype=complex)  # reveal a, store (a, b)
    for x in range(2):
        for m in range(2):
            a2[m * 4 + m * 2 + x, x * 2 + m] = 1.0
    povm = {}
    for out in range(2):
        p = np.zeros((4, 4), dtype=complex)
        for m in range(2):
            for x in range(2):
                if m ^ x == out:
                    p[m * 2 + x, m * 2 + x] = 1.0
        povm[str(out)] = p
    povm["abort"] = np.zeros((4, 4), dtype=complex)
    return StrategyDescription(profile, (2, 4), (a1, a2), povm)


def coinflip_bob_description() -> CoStrategyDescription:
    """Honest Bob: receive the commitment, send a random bit, check the
    reveal against the committed state, output a xor b or abort."""
    profile = coinflip_profile()
    b1 = np.zeros((8, 2), dtype=complex)  # send b, keep (b, commitment)
    for b in range(2):
        for q in range(2):
            b1[b * 4 + b * 2 + q, q] = 1.0 / np.sqrt(2.0)
    b2 = np.eye(8, dtype=complex)  # memory becomes (reveal, b, commitment)
    povm = {"0": np.zeros((8, 8), dtype=complex), "1": np.zeros((8, 8), dtype=complex)}
    for a in range(2):
        proj = np.outer(COMMIT_STATES[a], COMMIT_STATES[a].conj())
        ea = np.zeros((2, 2))
        ea[a, a] = 1.0
        for b in range(2):
            eb = np.zeros((2, 2))
            eb[b, b] = 1.0
            povm[str(a ^ b)] += kron(kron(ea, eb), proj)
    povm["abort"] = np.eye(8, dtype=complex) - povm["0"] - povm["1"]
    return CoStrategyDescription(profile, (1, 4, 8), np.array([[1.0]]), (b1, b2), povm)


def coinflip_reps() -> tuple[MeasuringRep, MeasuringRep]:
    return (
        represent_strategy(coinflip_alice_description()),
        represent_costrategy(coinflip_bob_description()),
    )


def xor_profile() -> SpaceProfile:
    return SpaceProfile.of_dims([1, 2], [2, 1])


def xor_alice_description() -> StrategyDescription:
    """Alice announces a random bit in the clear (kept classically correlated
    with her memory), receives Bob's bit, outputs the xor."""
    profile = xor_profile()
    a1 = np.zeros((4, 1), dtype=complex)
    for a in range(2):
        a1[a * 2 + a, 0] = 1.0 / np.sqrt(2.0)
    a2 = np.zeros((4, 4), dtype=complex)  # (x, m) -> memory (m, x)
    for x in range(2):
        for m in range(2):
            a2[m * 2 + x, x * 2 + m] = 1.0
    povm = {}
    for out in range(2):
        p = np.zeros((4, 4), dtype=complex)
        for m in range(2):
            for x in range(2):
                if m ^ x == out:
                    p[m * 2 + x, m * 2 + x] = 1.0
        povm[str(out)] = p
    povm["abort"] = np.zeros((4, 4), dtype=complex)
    return StrategyDescription(profile, (2, 4), (a1, a2), povm)


def xor_bob_description() -> CoStrategyDescription:
    """Bob receives Alice's bit, replies with a random bit, outputs the xor."""
    profile = xor_profile()
    b1 = np.zeros((8, 2), dtype=complex)  # send b, keep (b, a)
    for a in range(2):
        for b in range(2):
            b1[b * 4 + b * 2 + a, a] = 1.0 / np.sqrt(2.0)
    b2 = np.eye(4, dtype=complex)
    povm = {"0": np.zeros((4, 4), dtype=complex), "1": np.zeros((4, 4), dtype=complex)}
    for b in range(2):
        for a in range(2):
            idx = b * 2 + a
            povm[str(a ^ b)][idx, idx] = 1.0
    povm["abort"] = np.zeros((4, 4), dtype=complex)
    return CoStrategyDescription(profile, (1, 4, 4), np.array([[1.0]]), (b1, b2), povm)


def xor_reps() -> tuple[MeasuringRep, MeasuringRep]:
    return (
        represent_strategy(xor_alice_description()),
        represent_costrategy(xor_bob_description()),
    )


# ---------------------------------------------------------------------------
# one-turn referees (players answer one qubit each, referee sends nothing)


def _one_turn_referee(outcomes: dict[str, np.ndarray],
                      payoff: dict[str, float]) -> Referee:
    a1, b1 = Space("A1", 1), Space("B1", 1)
    c1, d1 = Space("C1", 2), Space("D1", 2)
    space = SpaceList.of(c1, d1, a1, b1)
    return Referee(
        alice_inputs=SpaceList.of(a1),
        alice_outputs=SpaceList.of(c1),
        bob_inputs=SpaceList.of(b1),
        bob_outputs=SpaceList.of(d1),
        outcomes={lab: HermOp(space, m) for lab, m in outcomes.items()},
        payoff=payoff,
    )


def referee_coin_ignoring() -> Referee:
    """Discards both answers and declares each outcome with probability 1/2."""
    half = np.eye(4, dtype=complex) / 2.0
    return _one_turn_referee({"a": half, "b": half}, {"a": 1.0, "b": 0.0})


def referee_alice_controlled() -> Referee:
    """Alice wins iff her qubit answer measures |0>; Bob is irrelevant."""
    qa = kron(np.diag([1.0, 0.0]), np.eye(2)).astype(complex)
    qb = kron(np.diag([0.0, 1.0]), np.eye(2)).astype(complex)
    return _one_turn_referee({"a": qa, "b": qb}, {"a": 1.0, "b": 0.0})


def referee_matching_pennies(payoff: dict[str, float] | None = None) -> Referee:
    """Measures both answers in the computational basis; Alice wins iff the
    bits agree."""
    qa = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
    qb = np.diag([0.0, 1.0, 1.0, 0.0]).astype(complex)
    return _one_turn_referee({"a": qa, "b": qb},
                             payoff or {"a": 1.0, "b": 0.0})


def random_referee(seed: int) -> Referee:
    """Random one-turn referee with all player factors of dimension 2 and a
    win/lose payoff."""
    from .strategy import random_costrategy

    coarse = SpaceProfile.of_dims([4], [4])
    rep = represent_costrategy(random_costrategy(coarse, 2, seed))
    a1, b1 = Space("A1", 2), Space("B1", 2)
    c1, d1 = Space("C1", 2), Space("D1", 2)
    space = SpaceList.of(c1, d1, a1, b1)
    return Referee(
        alice_inputs=SpaceList.of(a1),
        alice_outputs=SpaceList.of(c1),
        bob_inputs=SpaceList.of(b1),
        bob_outputs=SpaceList.of(d1),
        outcomes={lab: HermOp(space, op.matrix) for lab, op in rep.outcomes.items()},
        payoff={"0": 1.0, "1": 0.0},
    )


def referee_state_discrimination() -> Referee:
    """Sends Alice |0> or |+> uniformly at random (the chosen bit kept in
    memory) and declares her the winner iff her answer qubit measures to the
    bit; Bob gets no message and no say.  Alice's optimal win probability is
    the binary discrimination bound (2 + sqrt 2)/4."""
    profile = SpaceProfile.of_dims([2], [2])
    rho0 = np.zeros((4, 4), dtype=complex)  # cq state on X1 (x) W0
    for bit, phi in enumerate(COMMIT_STATES):
        vec_bit = np.zeros(2)
        vec_bit[bit] = 1.0
        joint = np.kron(phi, vec_bit)
        rho0 += 0.5 * np.outer(joint, joint.conj())
    b1 = np.eye(4, dtype=complex)  # keep (answer, bit): W1 = Y1 (x) W0
    match = np.zeros((4, 4), dtype=complex)
    for bit in range(2):
        match[bit * 2 + bit, bit * 2 + bit] = 1.0
    desc = CoStrategyDescription(profile, (2, 4), rho0, (b1,),
                                 {"a": match, "b": np.eye(4) - match})
    rep = represent_costrategy(desc)
    a1, b1s = Space("A1", 2), Space("B1", 1)
    c1, d1 = Space("C1", 2), Space("D1", 1)
    space = SpaceList.of(c1, d1, a1, b1s)
    return Referee(
        alice_inputs=SpaceList.of(a1),
        alice_outputs=SpaceList.of(c1),
        bob_inputs=SpaceList.of(b1s),
        bob_outputs=SpaceList.of(d1),
        outcomes={lab: HermOp(space, op.matrix) for lab, op in rep.outcomes.items()},
        payoff={"a": 1.0, "b": 0.0},
    )


def random_referee_two_turn(seed: int) -> Referee:
    """Random two-turn referee: silent rounds (dim-1 messages to the players)
    with qubit answers from each player in both rounds."""
    from .strategy import random_costrategy

    coarse = SpaceProfile.of_dims([1, 1], [4, 4])
    rep = represent_costrategy(random_costrategy(coarse, 2, seed))
    ai = SpaceList.of(Space("A1", 1), Space("A2", 1))
    bi = SpaceList.of(Space("B1", 1), Space("B2", 1))
    ao = SpaceList.of(Space("C1", 2), Space("C2", 2))
    bo = SpaceList.of(Space("D1", 2), Space("D2", 2))
    space = SpaceList.of(ao.factors[0], bo.factors[0], ao.factors[1], bo.factors[1],
                         ai.factors[0], bi.factors[0], ai.factors[1], bi.factors[1])
    return Referee(
        alice_inputs=ai, alice_outputs=ao, bob_inputs=bi, bob_outputs=bo,
        outcomes={lab: HermOp(space, op.matrix) for lab, op in rep.outcomes.items()},
        payoff={"0": 1.0, "1": 0.0},
    )


def write_fixtures(out_dir: str, seed: int) -> list[str]:
    """Write every shipped fixture as a JSON file; fully deterministic per
    seed (which only touches the randomized entries)."""
    import os

    from . import serialize
    from .strategy import random_strategy
    from .tensor import HermOp as _HermOp

    os.makedirs(out_dir, exist_ok=True)
    alice_rep, bob_rep = coinflip_reps()
    xor_alice, xor_bob = xor_reps()
    sample_profile = SpaceProfile.of_dims([2, 2], [2, 2])
    sample = represent_strategy(random_strategy(sample_profile, 0, seed))
    doubled = _HermOp(sample.op.space, 2.0 * sample.op.matrix)
    measuring = represent_strategy(
        random_strategy(SpaceProfile.of_dims([2], [2]), 2, seed + 1)
    )

    docs = {
        "coinflip_alice_desc.json":
            serialize.strategy_description_to_json(coinflip_alice_description()),
        "coinflip_bob_desc.json":
            serialize.costrategy_description_to_json(coinflip_bob_description()),
        "coinflip_alice_rep.json": serialize.rep_to_json(alice_rep),
        "coinflip_bob_rep.json": serialize.rep_to_json(bob_rep),
        "xor_alice_rep.json": serialize.rep_to_json(xor_alice),
        "xor_bob_rep.json": serialize.rep_to_json(xor_bob),
        "referee_coin_ignoring.json": serialize.referee_to_json(referee_coin_ignoring()),
        "referee_matching_pennies.json": serialize.referee_to_json(referee_matching_pennies()),
        "referee_alice_controlled.json": serialize.referee_to_json(referee_alice_controlled()),
        "referee_state_discrimination.json":
            serialize.referee_to_json(referee_state_discrimination()),
        "referee_random.json": serialize.referee_to_json(random_referee(seed)),
        "sample_profile.json": serialize.profile_to_json(sample_profile),
        "sample_rep_valid.json": serialize.matrix_to_json(sample.op.matrix),
        "sample_rep_doubled.json": serialize.matrix_to_json(doubled.matrix),
        "sample_measuring_rep.json": serialize.rep_to_json(measuring),
    }
    for name, doc in docs.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
            fh.write(serialize.dumps_canonical(doc))
            fh.write("\n")
    return sorted(docs)
