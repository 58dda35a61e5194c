import math
from fractions import Fraction

import numpy as np
import pytest

from antsearch.algorithms import (
    UniformProgram,
    boost_exponent,
    build_from_spec,
    build_nonuniform,
    build_nonuniform_search,
    coin_automaton,
    compile_uniform,
    covering_phase,
    expected_iteration_moves,
    hit_probability_per_iteration,
    iteration_hit_move,
    sample_walk_length,
    search_automaton,
    search_visit_probability,
    uniform_halt_state,
    uniform_kappa,
    uniform_rho,
    walk_automaton,
    walk_length_pmf,
)
from antsearch.automaton import Action, chi, validate
from antsearch.chain_analysis import absorption_probabilities
from antsearch.engine import build_tables, run_batch
from antsearch.experiments import ExperimentConfig, run_experiment
from antsearch.grid_sim import TargetSpec
from antsearch.rng import WalkerStream, stream_keys

from helpers import expected_moves_oracle, visit_probability_oracle


# ---------------------------------------------------------------------------
# coin

def test_coin_tails_probability_exact():
    for k in range(0, 9):
        for ell in range(1, 5):
            a = coin_automaton(k, ell)
            ports = build_from_spec(f"coin:k={k},l={ell}")[1]["ports"]
            probs = absorption_probabilities(a, [ports["tails"]])
            assert probs[a.start] == Fraction(1, 2 ** (k * ell))


def test_coin_fragment_bits():
    for k, want in [(1, 0), (2, 1), (3, 2), (4, 2), (8, 3)]:
        info = build_from_spec(f"coin:k={k},l=1")[1]
        assert info["fragment"]["b"] == want
    for k in (2, 4, 8):
        info = build_from_spec(f"coin:k={k},l=2")[1]
        assert info["fragment"]["b"] == math.ceil(math.log2(k))


def test_coin_empirical_tails_rate():
    # engine route: walkers halt in a port state; tails frequency matches
    k, ell = 3, 2
    a = coin_automaton(k, ell)
    tails = build_from_spec(f"coin:k={k},l={ell}")[1]["ports"]["tails"]
    tables = build_tables(a)
    N = 100_000
    keys = stream_keys(23, np.arange(N, dtype=np.uint64), np.zeros(N, dtype=np.uint64))
    res = run_batch(
        tables,
        keys,
        np.arange(N, dtype=np.int64),
        np.ones(N, dtype=np.int64),
        np.ones(N, dtype=np.int64),
        budget=1,
        step_cap=10**6,
    )
    assert (res.moves == 0).all()
    p = 2.0 ** -(k * ell)
    freq = float((res.state == tails).mean())
    assert abs(freq - p) <= 5 * math.sqrt(p * (1 - p) / N)


# ---------------------------------------------------------------------------
# one-iteration law of the direct machine vs exact DP vs closed form

def test_iteration_hit_probability_matches_dp():
    for D in (2, 3, 4):
        a = build_nonuniform(D)
        for x in range(-D, D + 1):
            for y in range(-D, D + 1):
                if (x, y) == (0, 0):
                    continue
                closed = hit_probability_per_iteration(D, (x, y))
                dp = visit_probability_oracle(a, (x, y), box=D)
                assert closed == dp, (D, x, y)


def test_iteration_hit_probability_validates():
    with pytest.raises(ValueError):
        hit_probability_per_iteration(4, (0, 0))
    with pytest.raises(ValueError):
        hit_probability_per_iteration(4, (5, 0))
    with pytest.raises(ValueError):
        hit_probability_per_iteration(1, (1, 1))  # D must be >= 2


def test_iteration_hit_probability_pins():
    assert hit_probability_per_iteration(2, (1, 0)) == Fraction(1, 8)
    assert hit_probability_per_iteration(2, (0, 1)) == Fraction(1, 4)


def test_expected_iteration_moves_matches_solve():
    for D in (2, 3, 4, 8, 16):
        assert expected_iteration_moves(D) == Fraction(2 * (D - 1))
        assert expected_moves_oracle(build_nonuniform(D)) == Fraction(2 * (D - 1))


def test_per_iteration_floor_tight_at_corner():
    # worst cell of the square is the corner; the floor 1/(64 D) is met
    for D in (2, 4, 8):
        worst = min(
            hit_probability_per_iteration(D, (x, y))
            for x in range(-D, D + 1)
            for y in range(-D, D + 1)
            if (x, y) != (0, 0)
        )
        assert worst >= Fraction(1, 64 * D)
        assert worst == hit_probability_per_iteration(D, (D, D))


# ---------------------------------------------------------------------------
# walk and search fragments vs exact DP

def test_walk_length_pmf_exact_values():
    for k, ell in [(1, 1), (2, 1), (1, 2), (3, 2)]:
        q = Fraction(1, 2 ** (k * ell))
        for i in range(0, 5):
            assert walk_length_pmf(k, ell, i) == (1 - q) ** i * q
    # floor over {0..2^(k ell)} with equality at k*ell = 1
    assert walk_length_pmf(1, 1, 2) == Fraction(1, 8) == Fraction(1, 2 ** (1 + 2))
    with pytest.raises(ValueError):
        walk_length_pmf(1, 1, -1)


def test_walk_machine_length_law():
    # lengths of the compiled walk machine follow the closed-form pmf
    k, ell = 2, 1
    a = walk_automaton(k, ell, "up")
    tables = build_tables(a)
    N = 50_000
    keys = stream_keys(31, np.arange(N, dtype=np.uint64), np.zeros(N, dtype=np.uint64))
    res = run_batch(
        tables,
        keys,
        np.arange(N, dtype=np.int64),
        np.full(N, 7, dtype=np.int64),
        np.full(N, 7, dtype=np.int64),
        budget=100_000,
        step_cap=10**7,
    )
    for i in range(4):
        p = float(walk_length_pmf(k, ell, i))
        freq = float((res.moves == i).mean())
        assert abs(freq - p) <= 5 * math.sqrt(p * (1 - p) / N)
    # the walk went straight up: everyone ends on the y-axis
    assert (res.x == 0).all()
    assert (res.y == res.moves).all()


def test_search_visit_probability_matches_dp():
    for k, ell in [(1, 1), (2, 1), (1, 2), (3, 1)]:
        a = search_automaton(k, ell)
        R = 2 ** (k * ell)
        for x in range(-R, R + 1):
            for y in range(-R, R + 1):
                if (x, y) == (0, 0):
                    continue
                closed = search_visit_probability(k, ell, x, y)
                dp = visit_probability_oracle(a, (x, y), box=max(abs(x), abs(y), 1))
                assert closed == dp, (k, ell, x, y)


def test_search_visit_probability_outside_square():
    # positive probability beyond the nominal radius, still matching the DP
    k, ell = 1, 1
    a = search_automaton(k, ell)
    for target in [(3, 0), (0, -4), (2, 2)]:
        closed = search_visit_probability(k, ell, *target)
        assert closed > 0
        assert closed == visit_probability_oracle(a, target, box=max(map(abs, target)))


def test_search_visit_origin_is_one():
    assert search_visit_probability(2, 1, 0, 0) == 1


def test_area_visit_floor_small():
    for k, ell in [(1, 1), (2, 1)]:
        R = 2 ** (k * ell)
        floor = Fraction(1, 2 ** (k * ell + 6))
        worst = min(
            search_visit_probability(k, ell, x, y)
            for x in range(-R, R + 1)
            for y in range(-R, R + 1)
        )
        assert worst >= floor
        if k * ell == 1:
            assert worst == Fraction(1, 128)  # corner meets the floor exactly


def test_nonuniform_search_iteration_law_matches_plain():
    # with 2^(k ell) = D the boosted searcher has the plain machine's law
    a = build_nonuniform_search(2, 1)
    for x in range(-2, 3):
        for y in range(-2, 3):
            if (x, y) == (0, 0):
                continue
            dp = visit_probability_oracle(a, (x, y), box=max(abs(x), abs(y)))
            assert dp == hit_probability_per_iteration(2, (x, y))


def test_nonuniform_search_shape():
    info = build_from_spec("nonuniform-search:D=256,l=2")[1]
    assert info["boost_k"] == 4
    assert info["stop_probability"] == Fraction(1, 256)
    a = build_nonuniform_search(256, 2)
    assert a.n_states == 4 * 4 + 6


# ---------------------------------------------------------------------------
# uniform algorithm: compiled machine vs procedural program

def test_uniform_compile_shape():
    a = compile_uniform(1, 4, 4, 8)
    assert a.n_states == 246
    assert chi(a).b == 8
    halt = uniform_halt_state(1, 4, 4, 8)
    assert a.labels[halt] is Action.NONE
    assert a.rows[halt] == ((halt, Fraction(1)),)
    assert validate(a).ok


def test_uniform_parameter_pins():
    assert covering_phase(4, 1) == 2
    assert covering_phase(16, 2) == 2
    assert boost_exponent(256, 2) == 4
    assert uniform_kappa(3, 1, 4, 4) == 4 + max(3 - 2, 0)
    assert uniform_rho(3, 1, 4, 4) == 2 ** uniform_kappa(3, 1, 4, 4)


def test_sample_walk_length_inverse_cdf():
    # u below q gives 0; just above gives 1; deep tail grows
    q = Fraction(1, 4)
    assert sample_walk_length(q, 0.1) == 0
    assert sample_walk_length(q, 0.25) == 1
    assert sample_walk_length(q, 0.4375) == 2  # 1 - (3/4)^2 = 0.4375
    assert sample_walk_length(q, 0.999999) > 10


def test_iteration_hit_move_cases():
    # vertical-axis target: hit during the vertical leg
    assert iteration_hit_move(3, 5, 0, 3) == 3
    assert iteration_hit_move(-2, 5, 0, -2) == 2
    assert iteration_hit_move(2, 5, 0, 3) is None
    # off-axis target: vertical leg must end level with it
    assert iteration_hit_move(3, 4, 4, 3) == 7
    assert iteration_hit_move(3, 3, 4, 3) is None  # horizontal leg too short
    assert iteration_hit_move(3, -4, 4, 3) is None  # wrong direction
    with pytest.raises(ValueError):
        iteration_hit_move(1, 1, 0, 0)


def test_uniform_program_agrees_with_compiled_machine():
    # same algorithm, two implementations: distributional agreement on the
    # find rate and the mean cost of found runs
    ell, n, K, cap = 1, 4, 4, 8
    D = 4
    budget = 3000
    trials = 2000
    a = compile_uniform(ell, n, K, cap)
    cfg = ExperimentConfig(
        automaton=a,
        target=TargetSpec.fixed(D, D),
        trials=trials,
        budget=budget,
        master_seed=41,
        n=1,
        algorithm="uniform",
    )
    row = run_experiment(cfg).row

    prog = UniformProgram(ell, n, K)
    found = 0
    costs = []
    for trial in range(trials):
        run = prog.run((D, D), budget, WalkerStream(77, trial, 0), max_phase=cap)
        if run.found:
            found += 1
            costs.append(run.moves)
    rate_prog = found / trials
    rate_mach = row["find_rate"]
    # five-sigma band using the larger of the two binomial errors
    p = max(rate_prog, rate_mach)
    sigma = math.sqrt(p * (1 - p) / trials)
    assert abs(rate_prog - rate_mach) <= 5 * max(sigma, 1e-9) * math.sqrt(2)

    mean_prog = float(np.mean(costs))
    found_moves = [r["m_moves"] for r in run_experiment(cfg).records if r["found"]]
    mean_mach = float(np.mean(found_moves))
    spread = float(np.std(found_moves, ddof=1)) / math.sqrt(len(found_moves))
    spread_p = float(np.std(costs, ddof=1)) / math.sqrt(len(costs))
    assert abs(mean_prog - mean_mach) <= 5 * (spread + spread_p)


def test_uniform_program_budget_truncation():
    # a run that would find at move m > budget reports budget exhaustion
    prog = UniformProgram(1, 1, 2)
    run = prog.run((3, 3), budget=2, stream=WalkerStream(3, 0, 0), max_rounds=10_000)
    assert not run.found
    assert run.moves <= 2


# ---------------------------------------------------------------------------
# spec strings

def test_build_from_spec_errors():
    with pytest.raises(ValueError, match="unknown algorithm kind"):
        build_from_spec("teleport:D=4")
    with pytest.raises(ValueError, match="missing required parameter"):
        build_from_spec("nonuniform")
    with pytest.raises(ValueError, match="must be an integer"):
        build_from_spec("nonuniform:D=four")
    with pytest.raises(ValueError, match="key=value"):
        build_from_spec("nonuniform:4")
    with pytest.raises(ValueError, match="no parameters"):
        build_from_spec("walkbaseline:D=4")


def test_build_from_spec_walk_direction():
    for d in ("up", "down", "left", "right"):
        a, info = build_from_spec(f"walk:k=1,l=1,dir={d}")
        assert validate(a).ok
    with pytest.raises(ValueError):
        build_from_spec("walk:k=1,l=1,dir=diagonal")
