"""The integers with generators {+-1, +-2}, loaded as an explicit ball.

This Cayley graph has genuinely non-unique geodesics (1+2 and 2+1 both
reach 3), so unlike the built-in families its flowers project to distinct
points and the averaged chains spread mass: f(e, 40) is (1/2, 1/2) on
{19, 20}. It is the main exercise of the rational-averaging machinery,
the non-singleton difference norms, and the grouped identity residuals.
"""

import random
from fractions import Fraction

import pytest

import hypaction as H
from hypaction import chains
from hypaction.errors import ExactnessError

STEPS = [1, -1, 2, -2]


def line2_ball_json(radius):
    gens = [
        {"label": "p", "inverse": 1},
        {"label": "P", "inverse": 0},
        {"label": "q", "inverse": 3},
        {"label": "Q", "inverse": 2},
    ]
    verts = list(range(-2 * radius, 2 * radius + 1))
    edges = []
    for n in verts:
        for gi, s in enumerate(STEPS):
            if -2 * radius <= n + s <= 2 * radius:
                edges.append([str(n), gi, str(n + s)])
    return {
        "generators": gens,
        "basepoint": "0",
        "radius": radius,
        "vertices": [str(n) for n in verts],
        "edges": edges,
    }


def endpoint(w):
    return sum(STEPS[x] for x in w)


@pytest.fixture(scope="module")
def line2():
    return H.ball_from_json(line2_ball_json(22), delta=1)


@pytest.fixture(scope="module")
def line2_engine(line2):
    return H.ChainEngine(line2)


@pytest.fixture(scope="module")
def by_endpoint(line2):
    return {endpoint(w): w for w in H.build_ball(line2, 21).words}


def test_metric_is_ceil_half(line2, by_endpoint):
    for n, w in by_endpoint.items():
        assert len(w) == (abs(n) + 1) // 2


def test_delta_one_certifies(line2):
    ball = H.build_ball(line2, 8)
    report = H.certify_delta(ball, 1, 800, seed=3, exhaustive_radius=4)
    assert report.passed
    assert report.max_deviation == 1  # genuinely not 0-fine


def test_flower_spreads(line2, line2_engine, by_endpoint):
    fl = line2_engine.flower((), by_endpoint[40])
    assert sorted(endpoint(m) for m in fl.members) == [39, 40]


def test_f_spreads_mass(line2, line2_engine, by_endpoint):
    half = Fraction(1, 2)
    f = line2_engine.f_chain((), by_endpoint[40])
    assert {endpoint(w): c for w, c in f.items()} == {19: half, 20: half}
    assert chains.coefficient_sum(f) == 1
    f39 = line2_engine.f_chain((), by_endpoint[39])
    assert {endpoint(w): c for w, c in f39.items()} == {19: half, 20: half}
    fneg = line2_engine.f_chain((), by_endpoint[-40])
    assert {endpoint(w): c for w, c in fneg.items()} == {-19: half, -20: half}


def test_literal_matches_engine(line2, line2_engine, by_endpoint):
    for n in (40, 39, -40, 31, 20, 7):
        w = by_endpoint[n]
        assert line2_engine.f_chain_literal((), w) == line2_engine.f_chain((), w)


def test_convexity_and_support(line2, line2_engine, by_endpoint):
    rng = random.Random(5)
    q = line2_engine.q
    ten = line2_engine.ten_delta
    pairs = 0
    for _ in range(200):
        nb = rng.randint(-10, 10)
        na = rng.randint(-10, 10)
        b, a = by_endpoint[nb], by_endpoint[na]
        try:
            f = line2_engine.f_chain(b, a, store=False)
        except ExactnessError:
            continue
        pairs += 1
        assert chains.coefficient_sum(f) == 1
        assert all(c > 0 for c in f.values())
        d = H.distance(line2, a, b)
        if d <= ten:
            assert f == {a: Fraction(1)}
        else:
            center = q.q_point(b, a, ten)
            for w in f:
                assert H.distance(line2, b, w) == ten
                assert H.distance(line2, center, w) <= 1
    assert pairs > 100


def test_equivariance_literal(line2, line2_engine, by_endpoint):
    rng = random.Random(6)
    for _ in range(60):
        g = by_endpoint[rng.randint(-3, 3)]
        b = by_endpoint[rng.randint(-6, 6)]
        a = by_endpoint[rng.randint(-6, 6)]
        lhs = line2_engine.f_chain_literal(line2.multiply(g, b), line2.multiply(g, a))
        rhs = H.translate(line2, g, line2_engine.f_chain_literal(b, a))
        assert lhs == rhs


def test_h_normalization_multi_entry(line2, line2_engine, by_endpoint):
    for p in (2.0, 3.0, 4.5):
        h = line2_engine.h_chain((), by_endpoint[40], p)
        assert len(h.f) == 2
        assert abs(H.norm_p(h.coefficients(), p) - 1.0) < 1e-12
        # two equal halves: norm is (2 (1/2)^p)^(1/p)
        assert h.norm == pytest.approx((2 * 0.5 ** p) ** (1 / p))


def test_cocycle_identity_grouped(line2, line2_engine, by_endpoint):
    coc = H.Cocycle(line2_engine, 3.0)
    window = H.build_ball(line2, 2)
    rng = random.Random(7)
    for _ in range(10):
        g = by_endpoint[rng.randint(-4, 4)]
        k = by_endpoint[rng.randint(-4, 4)]
        rep = coc.verify_identity(g, k, window, audit_fraction=0.3, seed=9)
        assert rep.residual_zero
        assert rep.audited > 0


def test_disjoint_supports_and_properness(line2, line2_engine, by_endpoint):
    coc = H.Cocycle(line2_engine, 3.0)
    g = by_endpoint[40]
    gamma = by_endpoint[20]
    assert coc.disjoint_support_check(g, gamma)
    assert coc.properness_count(g) == 1  # the single admissible midpoint at d = 20


def test_b_at_spread_difference(line2, line2_engine, by_endpoint):
    coc = H.Cocycle(line2_engine, 3.0)
    g = by_endpoint[4]
    gamma = by_endpoint[-18]
    val = coc.diff_norm_pow(g, gamma)
    dense = coc.b_at(g, gamma)
    assert val == pytest.approx(sum(abs(c) ** 3.0 for c in dense.values()))


def test_windowed_norm_and_fits(line2, line2_engine):
    ball8 = H.build_ball(line2, 8)
    ups = H.estimate_upsilon(ball8)
    assert ups == 5.0  # 4r + 1 vertices within radius r, maximal at r = 1
    rho_of_p, fits = H.rho_fitter(line2_engine, ball8, 400, seed=11)
    sel = H.select_p(ups, rho_of_p)
    assert sel.rho_used ** sel.p * ups < 0.5
    coc = H.Cocycle(line2_engine, sel.p)
    g = H.build_ball(line2, 2).words[3]
    res = coc.norm(g, mode="window", window_ball=ball8, fit=fits[sel.p], upsilon=ups)
    assert res.lower > 0
    assert res.tail_bound > 0
    assert not res.exact


def test_windowed_norm_margin_refusal(line2, line2_engine, by_endpoint):
    coc = H.Cocycle(line2_engine, 3.0)
    ball12 = H.build_ball(line2, 12)

    class AnyFit:
        base = 0.3
        constant = 2.0

    with pytest.raises(ExactnessError):
        coc.norm(by_endpoint[40], mode="window", window_ball=ball12,
                 fit=AnyFit(), upsilon=5.0)


def test_exact_mode_unavailable(line2, line2_engine, by_endpoint):
    coc = H.Cocycle(line2_engine, 3.0)
    with pytest.raises(ExactnessError):
        coc.norm(by_endpoint[6], mode="exact")


def test_cli_verify_on_line2(tmp_path):
    import json

    from hypaction.cli import main

    path = tmp_path / "line2.json"
    path.write_text(json.dumps(line2_ball_json(22)))
    out = tmp_path / "report.json"
    code = main(["verify", "--group", f"ball:{path}", "--radius", "4",
                 "--samples", "150", "--seed", "3", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
