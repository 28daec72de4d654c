import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tribilliard.errors import AdmissibilityError, InsufficientData
from tribilliard.geometry import (Combinatorics, KiteFrame, RotationLabel, cross, dist,
                                  kite_moves_from_edges, length_comparability, make_triangle,
                                  random_combinatorics, random_orbit_samples, side_role,
                                  standard_kite, triangle_unfold, unfold_sequence, unfold_step)

TWO_PI = 2 * math.pi


def angle_pairs():
    return st.tuples(st.floats(0.05, 1.5), st.floats(0.05, 1.5)).filter(
        lambda ab: ab[0] + ab[1] < math.pi - 0.05)


def combinatorics(max_len=12):
    return st.lists(st.sampled_from(["A+", "A-", "B+", "B-"]), max_size=max_len).map(_drop_reversals)


def _drop_reversals(labels):
    out = []
    for s in labels:
        mv = RotationLabel.parse(s)
        if out and out[-1].pivot == mv.pivot and out[-1].sign == -mv.sign:
            continue
        out.append(mv)
    return Combinatorics(tuple(out))


def close(p, q, tol=1e-12):
    return abs(p[0] - q[0]) < tol and abs(p[1] - q[1]) < tol


def test_equilateral_is_admissible():
    s = make_triangle(math.pi / 3, math.pi / 3, 0.1)
    assert s.gamma == pytest.approx(math.pi / 3)
    a, b, c = s.vertices()
    assert dist(a, b) == pytest.approx(1.0)
    assert dist(a, c) == pytest.approx(1.0)
    assert dist(b, c) == pytest.approx(1.0)


@pytest.mark.parametrize("args", [(0.05, math.pi / 3, 0.1), (1.5, 1.7, 0.01), (math.pi / 3, 0.1, 0.1),
                                  (float("nan"), 1.0, 0.1), (1.0, 1.0, 0.0)])
def test_inadmissible_shapes(args):
    with pytest.raises(AdmissibilityError):
        make_triangle(*args)


def test_admissibility_error_is_value_error():
    with pytest.raises(ValueError):
        make_triangle(0.05, 1.0, 0.1)


def test_standard_kite(equilateral):
    k = standard_kite(equilateral)
    assert k.alpha_vertex == (0.0, 0.0)
    assert k.beta_vertex == (1.0, 0.0)
    assert k.kite_angle == 0.0
    upper, lower = k.side_vertices
    assert upper[1] > 0 > lower[1]
    assert close(upper, (lower[0], -lower[1]))


@given(angle_pairs())
def test_standard_kite_side_vertex_is_ray_intersection(ab):
    a, b = ab
    s = make_triangle(a, b, 0.01)
    upper = standard_kite(s).side_vertices[0]
    # rays from (0,0) at angle a and from (1,0) at angle pi - b
    t = math.sin(b) / math.sin(a + b)
    assert close(upper, (t * math.cos(a), t * math.sin(a)), 1e-12)
    u = math.sin(a) / math.sin(a + b)
    assert close(upper, (1 - u * math.cos(b), u * math.sin(b)), 1e-12)


def test_alpha_pivot_step(irrational):
    a = irrational.alpha
    f = unfold_step(standard_kite(irrational), RotationLabel("A", 1), irrational)
    assert f.kite_angle == pytest.approx(2 * a)
    assert close(f.beta_vertex, (math.cos(2 * a), math.sin(2 * a)))
    assert f.alpha_vertex == (0.0, 0.0)


def test_beta_pivot_negative_step(irrational):
    b = irrational.beta
    f = unfold_step(standard_kite(irrational), RotationLabel("B", -1), irrational)
    assert close(f.alpha_vertex, (1 - math.cos(2 * b), math.sin(2 * b)))
    assert f.beta_vertex == (1.0, 0.0)


@given(angle_pairs(), combinatorics())
def test_unfold_step_is_isometry(ab, comb):
    s = make_triangle(*ab, 0.01)
    frames = unfold_sequence(s, comb)
    ref = frames[0].points()
    for f in frames[1:]:
        pts = f.points()
        for i in range(4):
            for j in range(i + 1, 4):
                assert abs(dist(pts[i], pts[j]) - dist(ref[i], ref[j])) < 1e-12
        assert abs(dist(f.alpha_vertex, f.beta_vertex) - 1) < 1e-12
        d = math.atan2(f.beta_vertex[1] - f.alpha_vertex[1], f.beta_vertex[0] - f.alpha_vertex[0])
        assert abs(math.remainder(d - f.kite_angle, TWO_PI)) < 1e-12


@given(angle_pairs(), combinatorics())
def test_side_vertices_symmetric_about_diagonal(ab, comb):
    s = make_triangle(*ab, 0.01)
    f = unfold_sequence(s, comb)[-1]
    plus, minus = f.side_vertices
    a, b = f.alpha_vertex, f.beta_vertex
    assert abs(cross(a, b, plus) + cross(a, b, minus)) < 1e-12
    mid = ((plus[0] + minus[0]) / 2, (plus[1] + minus[1]) / 2)
    assert abs(cross(a, b, mid)) < 1e-12


def test_unfold_sequence_base_cases(irrational):
    assert unfold_sequence(irrational, Combinatorics()) == [standard_kite(irrational)]
    mv = RotationLabel("B", 1)
    frames = unfold_sequence(irrational, Combinatorics((mv,)))
    assert len(frames) == 2
    assert frames[1] == unfold_step(standard_kite(irrational), mv, irrational)


def test_kite_angle_additivity_length_10(irrational):
    rng = random.Random(7)
    for _ in range(50):
        comb = random_combinatorics(rng, 10)
        total = sum(mv.amount(irrational) for mv in comb.moves)
        got = unfold_sequence(irrational, comb)[-1].kite_angle
        assert abs(math.remainder(got - total, TWO_PI)) < 1e-12


def test_combinatorics_rejects_immediate_reversal():
    with pytest.raises(ValueError):
        Combinatorics.parse("A+ A-")
    Combinatorics.parse("A+ A+ B- A-")  # repeated pivots are allowed


def test_combinatorics_json_roundtrip():
    c = Combinatorics.parse("A+ B- B- A+")
    assert c.to_json() == ["A+", "B-", "B-", "A+"]
    assert Combinatorics.from_json(c.to_json()) == c
    assert c.kites == 5
    assert c.frequency() == (4, -4)


def test_rotation_label_parse_errors():
    for bad in ("C+", "A", "A*", "A+-"):
        with pytest.raises(ValueError):
            RotationLabel.parse(bad)


def test_kite_frame_json_roundtrip(irrational):
    f = unfold_sequence(irrational, Combinatorics.parse("A+ B+"))[-1]
    assert KiteFrame.from_json(f.to_json()) == f


@given(angle_pairs(), st.lists(st.integers(0, 2), max_size=14))
def test_triangle_frames_are_kite_halves(ab, raw):
    edges = [e for i, e in enumerate(raw) if i == 0 or e != raw[i - 1]]
    s = make_triangle(*ab, 0.01)
    tri = triangle_unfold(s, edges)
    moves = kite_moves_from_edges(edges)
    comb = Combinatorics(tuple(m for m in moves if m is not None))
    kites = unfold_sequence(s, comb)
    k = 0
    for i, frame in enumerate(tri):
        assert frame.parity == (1 if i % 2 == 0 else -1)
        kite = kites[k]
        a, b, c = frame.vertices
        assert close(a, kite.alpha_vertex, 1e-9)
        assert close(b, kite.beta_vertex, 1e-9)
        assert close(c, kite.side_vertices[side_role(frame.parity)], 1e-9)
        if i < len(edges) and moves[i] is not None:
            k += 1


def test_triangle_unfold_keeps_labels_and_flips_parity(irrational):
    frames = triangle_unfold(irrational, [0, 1, 2, 0])
    assert [f.parity for f in frames] == [1, -1, 1, -1, 1]
    for f, e in zip(frames, [0, 1, 2, 0]):
        g = f.reflect(e)
        for i in range(3):
            if i != e:
                assert g.vertices[i] == f.vertices[i]
    with pytest.raises(ValueError):
        triangle_unfold(irrational, [3])


def test_length_comparability_unit_segment():
    assert length_comparability([(1, 1.0)]).d_hat == 1.0


def test_length_comparability_measured(equilateral):
    samples = random_orbit_samples(equilateral, 100, 50, seed=3)
    comp = length_comparability(samples)
    assert 1.0 <= comp.d_hat < math.inf
    assert comp.used == 100


def test_length_comparability_empty():
    with pytest.raises(InsufficientData):
        length_comparability([])
    with pytest.raises(InsufficientData):
        length_comparability([(3, 2.0)], min_reflections=5)
