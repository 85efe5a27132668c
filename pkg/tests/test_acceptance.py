"""Acceptance criteria at their stated scale and tolerance.

Each test prints one ``criterion N [PASS|FAIL]`` line, repeated in the
terminal summary. Criterion 4 runs 250 spreading simulations on graphs of up
to 10^5 vertices and takes a couple of minutes.
"""

import itertools
import math

import networkx as nx
import numpy as np
import pytest

from ktree_rumor import experiments as ex
from ktree_rumor.barriers import seed_barrier, verify_barrier
from ktree_rumor.graphs import Graph, force_barrier, generate, is_perfect_elimination_order
from ktree_rumor.highways import build_highway_forest, forest_problems, verify_forest_clique_bound
from ktree_rumor.pushpull import run_push_pull
from ktree_rumor.schedules import upper_schedule
from ktree_rumor.structure import (
    clustering_coefficient,
    diameter,
    draft_labels,
    exact_expansion,
    heuristic_expansion,
    max_degree,
    neighborhood_edge_counts,
)
from ktree_rumor.urns import (
    UrnSpec,
    clique_urn_matrix,
    degree_from_clique_count,
    survival_upper_bound_holds,
    urn_distribution,
    urn_mean_variance,
    urn_sample_many,
    urn_survival_probability,
)

from oracles import brute_expansion, mean_var, urn_paths

pytestmark = pytest.mark.acceptance


def test_criterion_1_deterministic_identities(report_line):
    failures = []
    checked = 0
    for family, k, steps, seed in itertools.product(
        ("ktree", "apollonian"), (2, 3, 4), (10, 100, 1000), range(100)
    ):
        if family == "apollonian" and k == 2:
            continue
        g = generate(family, k, steps, seed)
        tag = (family, k, steps, seed)
        if family == "ktree":
            if g.num_cliques != k * steps + 1:
                failures.append((tag, "clique count"))
            tri = neighborhood_edge_counts(g)
            if not (2 * tri == (k - 1) * (2 * g.degrees - k)).all():
                failures.append((tag, "neighbourhood edges"))
            if clustering_coefficient(g) < 0.5:
                failures.append((tag, "cc"))
        elif g.num_active_cliques != (k - 1) * steps + 1:
            failures.append((tag, "active count"))
        for m in {1, steps // 2, steps}:
            f = build_highway_forest(g, m)
            if forest_problems(g, f) or verify_forest_clique_bound(g, f):
                failures.append((tag, f"forest at m={m}"))
        if g.n <= 200:
            order = list(range(g.n - 1, -1, -1))
            if not is_perfect_elimination_order(g, order):
                failures.append((tag, "elimination order"))
        checked += 1
    report_line(1, "deterministic identities", not failures, f"{checked} instances, {len(failures)} failures {failures[:3]}")
    assert not failures


def test_criterion_2_urn_oracles(report_line):
    mismatches = 0
    specs = 0
    for total in range(1, 9):
        for a in range(total + 1):
            for s in (1, 2, 3):
                for n in range(11):
                    b = total - a
                    dist = urn_paths(a, b, ((s, 0), (0, s)), n)
                    specs += 1
                    if urn_distribution(UrnSpec.polya(a, b, s, n)) != dist:
                        mismatches += 1
                    if urn_mean_variance(a, b, s, n) != mean_var(dist):
                        mismatches += 1
                    if a and urn_survival_probability(a, b, s, n) != dist.get(a, 0):
                        mismatches += 1
                    if a and not survival_upper_bound_holds(a, b, s, n):
                        mismatches += 1
    rng = np.random.default_rng(2)
    trials = 100_000
    worst = 0.0
    mc_specs = [UrnSpec.polya(a, t - a, s, 10) for t in range(1, 9) for a in range(t + 1) for s in (1, 2)]
    mc_specs += [UrnSpec(a, t - a, clique_urn_matrix(k), 10) for t in range(1, 9) for a in range(t + 1) for k in (2, 3)]
    for spec in mc_specs:
        exact = urn_distribution(spec)
        mean = float(sum(x * p for x, p in exact.items()))
        var = float(sum((x - mean) ** 2 * p for x, p in exact.items()))
        est = urn_sample_many(spec, trials, rng).mean()
        if var == 0:
            worst = max(worst, 0.0 if est == mean else math.inf)
        else:
            worst = max(worst, abs(est - mean) / math.sqrt(var / trials))
    ok = mismatches == 0 and worst <= 4
    report_line(2, "urn oracle equivalence", ok,
                f"{specs} exact specs, {mismatches} mismatches; {len(mc_specs)} Monte Carlo means, worst {worst:.2f} SE")
    assert ok


def test_criterion_3_degree_as_urn(report_line):
    k, j, steps, seeds = 2, 10, 500, 10_000
    x = k + j - 1
    degs = np.array([generate("ktree", k, steps, s).degree(x) for s in range(seeds)], dtype=float)
    spec = UrnSpec(k, k * j + 1 - k, clique_urn_matrix(k), steps - j)
    urn = degree_from_clique_count(urn_sample_many(spec, seeds, 99), k).astype(float)
    se = math.sqrt(degs.var(ddof=1) / seeds + urn.var(ddof=1) / seeds)
    z = abs(degs.mean() - urn.mean()) / se
    report_line(3, "degree as urn", z <= 4,
                f"graph mean {degs.mean():.3f}, urn mean {urn.mean():.3f}, |diff| = {z:.2f} SE")
    assert z <= 4


def test_criterion_4_dichotomy(report_line):
    cfg = ex.ExperimentConfig(
        family="ktree", k=2, sizes=[1000, 3000, 10_000, 30_000, 100_000], trials=50,
        master_seed=2024, metrics=[], out="unused",
    )
    records = ex.run_spread(cfg)
    rows = [
        {
            "family": r.family, "k": str(r.k), "n": str(r.n), "censored": "1" if r.censored else "0",
            "rounds_to_all": str(r.rounds_to_all), "rounds_to_99pct": "" if r.rounds_to_99pct is None else str(r.rounds_to_99pct),
        }
        for r in records
    ]
    rep = ex.report_from_rows(rows)
    a_ok = rep.beta_99.slope < 0.05
    b_ok = rep.beta_all.slope > 0.05 and rep.median_ratio_last > 5
    detail = (
        f"beta_99 = {rep.beta_99.slope:.3f} +- {rep.beta_99.stderr:.3f} (needs < 0.05); "
        f"beta_all = {rep.beta_all.slope:.3f} +- {rep.beta_all.stderr:.3f} (needs > 0.05); "
        f"median all/99 ratio at 1e5 = {rep.median_ratio_last:.2f} (needs > 5); "
        f"medians 99% {rep.median_99}, all {rep.median_all}"
    )
    report_line(4, "dichotomy reproduction", a_ok and b_ok, detail)
    assert a_ok and b_ok, detail


def test_criterion_5_barriers(report_line):
    rejected = 0
    total = 0
    for k in (2, 3, 4):
        for steps in range(k, 201):
            for seed in range(50):
                g = force_barrier(k, steps, seed)
                total += 1
                if verify_barrier(g, range(k), range(k, 2 * k)) is None:
                    rejected += 1
    rng = np.random.default_rng(5)
    ratios = []
    for _ in range(100):
        g = force_barrier(2, 10_000, rng)
        w = seed_barrier(g)
        t = run_push_pull(g, int(rng.integers(g.n)), rng=rng, check_connected=False)
        ratios.append(t.rounds_executed / w.s)
    med = float(np.median(ratios))
    ok = rejected == 0 and med >= 0.5
    report_line(5, "barrier machinery", ok,
                f"{total - rejected}/{total} forced barriers verified; median rounds_to_all/s = {med:.2f} "
                f"(>= 0.5 in {np.mean(np.array(ratios) >= 0.5):.0%} of runs)")
    assert ok


def test_criterion_6_structural_envelopes(report_line):
    steps, seeds = 10_000, 30
    ln = math.log(steps)
    worst = {"diameter": 0.0, "draft": 0.0, "height": 0.0}
    fails = []
    delta_ok = {}
    for k in (2, 3):
        inside = 0
        for seed in range(seeds):
            g = generate("ktree", k, steps, seed)
            d = diameter(g)
            vd, _ = draft_labels(g)
            sch = upper_schedule(steps, k)
            forest = build_highway_forest(g, sch.m)
            worst["diameter"] = max(worst["diameter"], d / ln)
            worst["draft"] = max(worst["draft"], vd.max() / ln)
            height_cap = 8 * math.log(max(sch.m, 2))
            worst["height"] = max(worst["height"], forest.max_height / math.log(max(sch.m, 2)))
            if d > 8 * ln or vd.max() > 8 * ln or forest.max_height > height_cap:
                fails.append((k, seed))
            inside += max_degree(g) <= k + 2 * ln * steps ** (1 - 1 / k)
        delta_ok[k] = inside
    ok = not fails and all(v >= 27 for v in delta_ok.values())
    report_line(6, "structural envelopes", ok,
                f"max diameter/ln n = {worst['diameter']:.2f}, max draft/ln n = {worst['draft']:.2f}, "
                f"max forest height/ln m = {worst['height']:.2f} (caps 8); "
                f"degree envelope held in {delta_ok} of {seeds} seeds")
    assert ok


def test_criterion_7_expansion(report_line):
    rng = np.random.default_rng(7)
    compared = mismatches = 0
    for i in range(100):
        family = ("ktree", "apollonian")[i % 2]
        k = int(rng.integers(2, 5)) if family == "ktree" else int(rng.integers(3, 5))
        steps = int(rng.integers(0, 11 - k))
        g = generate(family, k, steps, int(rng.integers(2**31)))
        if g.n < 2 or not g.is_connected():
            continue
        rep = exact_expansion(g)
        compared += 1
        if (rep.vertex_expansion, rep.conductance) != brute_expansion(g.adj):
            mismatches += 1
    n = 10_000
    phi_cap, alpha_cap = 10 * math.log(n) / math.sqrt(n), 10 * 2 / n
    good = 0
    worst_phi = worst_alpha = 0.0
    for seed in range(30):
        rep = heuristic_expansion(generate("ktree", 2, n, seed))
        worst_phi = max(worst_phi, float(rep.conductance))
        worst_alpha = max(worst_alpha, float(rep.vertex_expansion))
        good += rep.conductance <= phi_cap and rep.vertex_expansion <= alpha_cap
    ok = mismatches == 0 and compared > 0 and good >= 27
    report_line(7, "expansion", ok,
                f"{compared} small graphs, {mismatches} mismatches; witnesses within caps in {good}/30 seeds "
                f"(worst phi {worst_phi:.4f} vs {phi_cap:.4f}, worst alpha {worst_alpha:.5f} vs {alpha_cap:.5f})")
    assert ok


def test_criterion_8_protocol_micro_oracles(report_line):
    k2 = Graph.from_edges(2, [(0, 1)])
    p3 = Graph.from_edges(3, [(0, 1), (1, 2)])
    star = Graph.from_edges(9, [(0, i) for i in range(1, 9)])
    a = all(run_push_pull(k2, s % 2, rng=s).rounds_executed == 1 for s in range(1000))
    b = all(run_push_pull(p3, 0, rng=s).rounds_executed == 2 for s in range(1000))
    c = all(run_push_pull(star, 0, rng=s).rounds_executed == 1 for s in range(1000))
    report_line(8, "protocol micro-oracles", a and b and c, f"K2 {a}, 3-path {b}, star {c} over 1000 seeds each")
    assert a and b and c
