"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
are produced; every tolerance is pinned here, nothing is calibrated later.
"""

import time

import numpy as np

from qstrat.fixtures import coinflip_reps, random_referee, referee_alice_controlled, \
    referee_coin_ignoring, referee_matching_pennies
from qstrat.games import game_value, max_forced_output, minmax_check
from qstrat.interaction import distribution_via_reps, simulate_interaction
from qstrat.sdp import export_sdpa, parse_sdpa, solve, solve_real
from qstrat.strategy import (
    KIND_STRATEGY,
    SpaceProfile,
    random_costrategy,
    random_strategy,
    represent_costrategy,
    represent_strategy,
    synthesize,
    validate,
)
from qstrat.tensor import HermOp, Space, SpaceList, kron, partial_trace, vec

from test_games import matrix_game_value, net_search_force_max
from test_sdp import eigmax_toy, trace_toy


def _report(num: int, name: str, ok: bool, detail: str):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num} [{name}]: {status} ({detail})")
    assert ok, f"criterion {num} [{name}] failed: {detail}"


def _rand_matrix(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def test_criterion_1_vec_identities():
    """All four vec-calculus identities on 1000 randomized instances."""
    rng = np.random.default_rng(101)
    start = time.monotonic()
    worst = 0.0
    for _ in range(1000):
        dx, dy = (int(d) for d in rng.integers(2, 5, size=2))
        dz = dx  # guarantees an isometry dx -> dy*dz exists

        # 1: (A (x) B) vec(M) = vec(A M B^T)
        a = _rand_matrix(rng, dy, dy)
        b = _rand_matrix(rng, dx, dx)
        m = _rand_matrix(rng, dy, dx)
        worst = max(worst, float(np.max(np.abs(kron(a, b) @ vec(m) - vec(a @ m @ b.T)))))

        # 2: both partial traces of vec(A) vec(B)*; the non-Hermitian outer
        # product is split into Hermitian parts so the library op applies
        a2 = _rand_matrix(rng, dy, dx)
        b2 = _rand_matrix(rng, dy, dx)
        gram = vec(a2) @ vec(b2).conj().T
        space = SpaceList.of(Space("Y", dy), Space("X", dx))
        h1 = HermOp(space, (gram + gram.conj().T) / 2)
        h2 = HermOp(space, (gram - gram.conj().T) / 2j)
        tr_x = partial_trace(h1, {"X"}).matrix + 1j * partial_trace(h2, {"X"}).matrix
        tr_y = partial_trace(h1, {"Y"}).matrix + 1j * partial_trace(h2, {"Y"}).matrix
        worst = max(worst, float(np.max(np.abs(tr_x - a2 @ b2.conj().T))))
        worst = max(worst, float(np.max(np.abs(tr_y - (b2.conj().T @ a2).T))))

        # 3: vec(I)* (A (x) B) vec(I) = tr(A B^T)
        g = _rand_matrix(rng, dx, dx)
        h = _rand_matrix(rng, dx, dx)
        w = vec(np.eye(dx))
        worst = max(worst, float(abs((w.conj().T @ kron(g, h) @ w)[0, 0]
                                     - np.trace(g @ h.T))))

        # 4: the memory-traced Gram of an isometry equals the Choi sum of the
        # channel it defines
        q, _ = np.linalg.qr(_rand_matrix(rng, dy * dz, dx))
        choi = np.zeros((dy * dx, dy * dx), dtype=complex)
        for i in range(dx):
            for j in range(dx):
                eij = np.zeros((dx, dx), dtype=complex)
                eij[i, j] = 1.0
                lifted = (q @ eij @ q.conj().T).reshape(dy, dz, dy, dz)
                choi += kron(np.einsum("azbz->ab", lifted), eij)
        ch1 = HermOp(SpaceList.of(Space("Y", dy), Space("Z", dz), Space("X", dx)),
                     vec(q) @ vec(q).conj().T)
        got = partial_trace(ch1, {"Z"}).matrix
        worst = max(worst, float(np.max(np.abs(got - choi))))
    elapsed = time.monotonic() - start
    ok = worst <= 1e-10 and elapsed < 5.0
    _report(1, "vec identities", ok, f"max error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_interaction_equivalence():
    """Representation inner products match direct simulation on 100 pairs."""
    rng = np.random.default_rng(202)
    start = time.monotonic()
    worst_gap = 0.0
    worst_total = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        profile = SpaceProfile.of_dims(
            [int(d) for d in rng.integers(1, 4, size=n)],
            [int(d) for d in rng.integers(1, 4, size=n)],
        )
        seed = int(rng.integers(1 << 31))
        sdesc = random_strategy(profile, int(rng.integers(1, 4)), seed)
        cdesc = random_costrategy(profile, int(rng.integers(1, 4)), seed + 1)
        via_reps = distribution_via_reps(represent_strategy(sdesc),
                                         represent_costrategy(cdesc))
        simulated = simulate_interaction(sdesc, cdesc)
        worst_gap = max(worst_gap, via_reps.max_gap(simulated))
        worst_total = max(worst_total, abs(via_reps.total() - 1.0),
                          abs(simulated.total() - 1.0))
    elapsed = time.monotonic() - start
    ok = worst_gap <= 1e-8 and worst_total <= 1e-8 and elapsed < 60.0
    _report(2, "interaction equivalence", ok,
            f"max entry gap {worst_gap:.2e}, max total error {worst_total:.2e}, "
            f"{elapsed:.1f}s")


def test_criterion_3_representation_round_trip():
    """represent -> validate -> synthesize -> represent on 50 random plans,
    with corrupted operators rejected."""
    rng = np.random.default_rng(303)
    start = time.monotonic()
    worst_residual = 0.0
    worst_round_trip = 0.0
    rejected = 0
    corrupt_cases = 0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        profile = SpaceProfile.of_dims(
            [int(d) for d in rng.integers(1, 3, size=n)],
            [int(d) for d in rng.integers(1, 3, size=n)],
        )
        rep = represent_strategy(random_strategy(profile, 0, int(rng.integers(1 << 31))))
        report = validate(rep.op, profile, KIND_STRATEGY, tol=1e-8)
        assert report.valid
        worst_residual = max(worst_residual, report.psd_residual,
                             report.max_level_residual)
        again = represent_strategy(synthesize(rep))
        worst_round_trip = max(worst_round_trip,
                               float(np.max(np.abs(again.op.matrix - rep.op.matrix))))

        doubled = HermOp(rep.op.space, 2.0 * rep.op.matrix)
        corrupt_cases += 1
        rejected += not validate(doubled, profile, KIND_STRATEGY, tol=1e-8).valid
        bumped = rep.op.matrix.copy()
        bumped[0, 0] += 1e-3
        corrupt_cases += 1
        rejected += not validate(HermOp(rep.op.space, bumped), profile,
                                 KIND_STRATEGY, tol=1e-8).valid
    elapsed = time.monotonic() - start
    ok = (worst_residual <= 1e-8 and worst_round_trip <= 1e-6
          and rejected == corrupt_cases and elapsed < 120.0)
    _report(3, "representation round trip", ok,
            f"max residual {worst_residual:.2e}, max round-trip gap "
            f"{worst_round_trip:.2e}, {rejected}/{corrupt_cases} corrupted rejected, "
            f"{elapsed:.1f}s")


def test_criterion_4_forced_output_duality():
    """Primal and dual forced-output values agree; the one-turn qubit case
    matches a brute-force net over pure co-strategies."""
    rng = np.random.default_rng(404)
    start = time.monotonic()
    worst_pd = 0.0
    worst_net = 0.0
    net_cases = 0
    for case in range(25):
        if case < 5:
            profile = SpaceProfile.of_dims([2], [2])
            rep = represent_strategy(random_strategy(profile, 2, int(rng.integers(1 << 31))))
        else:
            n = int(rng.integers(1, 3))
            profile = SpaceProfile.of_dims(
                [int(d) for d in rng.integers(1, 3, size=n)],
                [int(d) for d in rng.integers(1, 3, size=n)],
            )
            seed = int(rng.integers(1 << 31))
            if rng.integers(2):
                rep = represent_strategy(random_strategy(profile, 2, seed))
            else:
                rep = represent_costrategy(random_costrategy(profile, 2, seed))
        outcome = rep.labels[int(rng.integers(len(rep.labels)))]
        primal = max_forced_output(rep, outcome, "primal")
        dual = max_forced_output(rep, outcome, "dual")
        worst_pd = max(worst_pd, abs(primal.probability - dual.probability))
        if (rep.kind == KIND_STRATEGY and rep.profile.turns == 1
                and rep.profile.inputs.dims == (2,) and rep.profile.outputs.dims == (2,)):
            net_cases += 1
            net = net_search_force_max(rep.outcomes[outcome])
            worst_net = max(worst_net, abs(primal.probability - net))
    elapsed = time.monotonic() - start
    ok = worst_pd <= 1e-5 and worst_net <= 1e-3 and net_cases >= 5
    _report(4, "forced-output duality", ok,
            f"max primal-dual gap {worst_pd:.2e}, max net-search gap {worst_net:.2e} "
            f"over {net_cases} net cases, {elapsed:.1f}s")


def test_criterion_5_coinflip_constants():
    """The shipped commitment protocol: honest agreement exactly 1/2, and the
    forcing products and maxima clear the 1/2 and 1/sqrt(2) floors."""
    alice, bob = coinflip_reps()
    a0 = float(np.vdot(alice.outcomes["0"].matrix, bob.outcomes["0"].matrix).real)
    a1 = float(np.vdot(alice.outcomes["1"].matrix, bob.outcomes["1"].matrix).real)
    agreement_ok = abs(a0 - 0.5) <= 1e-9 and abs(a1 - 0.5) <= 1e-9
    floor = 1.0 / np.sqrt(2.0)
    detail = [f"agreement ({a0:.12f}, {a1:.12f})"]
    ok = agreement_ok
    for b in ("0", "1"):
        pa = max_forced_output(alice, b, "dual").probability
        pb = max_forced_output(bob, b, "dual").probability
        ok = ok and pa * pb >= 0.5 - 1e-6 and max(pa, pb) >= floor - 1e-6
        detail.append(f"b={b}: pA={pa:.9f} pB={pb:.9f} product={pa * pb:.9f}")
    _report(5, "coin-flip constants", ok, "; ".join(detail))


def test_criterion_6_game_values():
    """Named referees hit their analytic values and random referees satisfy
    the seat-swap equality."""
    start = time.monotonic()
    ignore = game_value(referee_coin_ignoring()).value
    controlled = game_value(referee_alice_controlled()).value
    pennies = game_value(referee_matching_pennies()).value
    oracle = matrix_game_value(np.array([[1.0, 0.0], [0.0, 1.0]]))
    worst_swap = 0.0
    for seed in range(601, 611):
        maximin, minimax = minmax_check(random_referee(seed))
        worst_swap = max(worst_swap, abs(maximin - minimax))
    elapsed = time.monotonic() - start
    ok = (abs(ignore - 0.5) <= 1e-6 and abs(controlled - 1.0) <= 1e-6
          and abs(pennies - oracle) <= 1e-5 and worst_swap <= 1e-5
          and elapsed < 600.0)
    _report(6, "game values", ok,
            f"ignore {ignore:.8f}, controlled {controlled:.8f}, pennies {pennies:.8f} "
            f"vs oracle {oracle:.8f}, max swap gap {worst_swap:.2e}, {elapsed:.1f}s")


def test_criterion_7_sdp_engine():
    """Toy instances solved to tolerance; SDPA exports are byte-deterministic
    and re-solve to the same objective after parsing back."""
    details = []
    ok = True
    for name, toy in (("trace", trace_toy()), ("eigmax", eigmax_toy())):
        sol = solve(toy, gap_tol=1e-7)
        ok = ok and sol.status == "optimal" and sol.duality_gap <= 1e-7
        text1 = export_sdpa(toy)
        text2 = export_sdpa(toy)
        ok = ok and text1 == text2
        res = solve_real(parse_sdpa(text1))
        sign = 1.0 if toy.sense == "min" else -1.0
        round_trip_gap = abs(sign * res.pobj - sol.objective_value)
        ok = ok and res.status == "optimal" and round_trip_gap <= 1e-6
        details.append(f"{name}: gap {sol.duality_gap:.2e}, "
                       f"round-trip gap {round_trip_gap:.2e}")
    _report(7, "sdp engine", ok, "; ".join(details))
