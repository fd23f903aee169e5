"""Phrasing graph bounds, successor selection, and playback timeline."""

from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pace_align.speech import (
    GraphError,
    PhraseVertex,
    PhrasingGraph,
    SpeechState,
    advance_playhead,
    estimate_audio_etc,
    load_graph,
    select_next_vertex,
)


def make_graph(durations, edges, start=0, natural_path=None):
    vertices = {i: PhraseVertex(i, f"phrase {i}", d) for i, d in durations.items()}
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
    for succs in adj.values():
        succs.sort()
    return PhrasingGraph(vertices, adj, start, natural_path=natural_path)


def enumerate_paths(graph: PhrasingGraph, u: int):
    """Oracle: total durations of every walk u -> terminal, by DFS."""
    if graph.is_terminal(u):
        return [graph.duration(u)]
    return [graph.duration(u) + rest
            for v in graph.successors(u)
            for rest in enumerate_paths(graph, v)]


@pytest.fixture
def diamond():
    return make_graph({0: 1.0, 1: 2.0, 2: 5.0, 3: 1.0},
                      [(0, 1), (0, 2), (1, 3), (2, 3)])


# -- bounds ------------------------------------------------------------------


def test_bounds_single_terminal():
    g = make_graph({0: 2.0}, [])
    assert g.t_min[0] == g.t_max[0] == 2.0


def test_bounds_chain():
    g = make_graph({0: 1.0, 1: 2.0, 2: 3.0}, [(0, 1), (1, 2)])
    assert g.t_min[0] == g.t_max[0] == 6.0


def test_bounds_diamond(diamond):
    assert diamond.t_min[0] == 4.0
    assert diamond.t_max[0] == 7.0


@st.composite
def random_dag(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    durations = {i: draw(st.floats(0.5, 5.0)) for i in range(n)}
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if draw(st.booleans())]
    return make_graph(durations, edges)


@given(random_dag())
@settings(max_examples=60, deadline=None)
def test_bounds_match_path_enumeration(g):
    for u in g.vertices:
        totals = enumerate_paths(g, u)
        assert g.t_min[u] == pytest.approx(min(totals), rel=1e-12)
        assert g.t_max[u] == pytest.approx(max(totals), rel=1e-12)


def test_cycle_rejected():
    with pytest.raises(GraphError):
        make_graph({0: 1.0, 1: 1.0}, [(0, 1), (1, 0)])


def test_nonpositive_duration_rejected():
    with pytest.raises(GraphError):
        make_graph({0: 0.0}, [])


def test_edge_to_unknown_vertex_rejected():
    with pytest.raises(GraphError):
        make_graph({0: 1.0}, [(0, 7)])


# -- successor selection -----------------------------------------------------


def test_select_by_midpoint_distance():
    # successors: 1 with bounds (2, 2), 2 with bounds (4, 6)
    g = make_graph({0: 1.0, 1: 2.0, 2: 4.0, 3: 2.0}, [(0, 1), (0, 2), (2, 3)])
    assert (g.t_min[1], g.t_max[1]) == (2.0, 2.0)
    assert (g.t_min[2], g.t_max[2]) == (6.0, 6.0)
    assert select_next_vertex(g, 0, 2.0) == 1
    assert select_next_vertex(g, 0, 5.2) == 2


def test_select_terminal_returns_none(diamond):
    assert select_next_vertex(diamond, 3, 1.0) is None


def test_select_ties_to_smallest_id():
    g = make_graph({0: 1.0, 1: 2.0, 2: 2.0}, [(0, 1), (0, 2)])
    assert select_next_vertex(g, 0, 3.0) == 1


@given(random_dag(), st.floats(0.1, 30.0))
@settings(max_examples=80, deadline=None)
def test_select_matches_exhaustive_argmin(g, t_hat_x):
    for u in g.vertices:
        got = select_next_vertex(g, u, t_hat_x)
        succs = g.successors(u)
        if not succs:
            assert got is None
            continue
        costs = {v: abs(t_hat_x - 0.5 * (g.t_min[v] + g.t_max[v])) for v in succs}
        best = min(costs.values())
        assert got == min(v for v, c in costs.items() if c == best)


def test_longer_branch_wins_as_motion_estimate_grows(diamond):
    # branch midpoints: via 1 -> 3.0, via 2 -> 6.0; crossover at 4.5
    assert select_next_vertex(diamond, 0, 4.0) == 1
    assert select_next_vertex(diamond, 0, 5.0) == 2


# -- audio ETC ---------------------------------------------------------------


def test_etc_terminal_remainder(diamond):
    state = SpeechState(current_vertex=3, playhead_s=0.5)
    assert estimate_audio_etc(diamond, state, 1.0) == pytest.approx(0.5)


def test_etc_chain():
    g = make_graph({0: 1.0, 1: 2.0, 2: 3.0}, [(0, 1), (1, 2)])
    assert estimate_audio_etc(g, SpeechState(0), 1.0) == pytest.approx(6.0)


def test_etc_greedy_diamond(diamond):
    assert estimate_audio_etc(diamond, SpeechState(0), 2.0) == pytest.approx(4.0)


def test_etc_pinned_path_overrides_heuristic(diamond):
    pinned = {0: 2, 2: 3}
    # heuristic at t_hat_x = 2 would go through vertex 1 (total 4)
    got = estimate_audio_etc(diamond, SpeechState(0), 2.0, pinned=pinned)
    assert got == pytest.approx(1.0 + 5.0 + 1.0)


def test_etc_continuous_in_playhead(diamond):
    state = SpeechState(0)
    prev = estimate_audio_etc(diamond, state, 2.0)
    for _ in range(400):
        advance_playhead(diamond, state, 1.0, 0.002, 2.0)
        cur = estimate_audio_etc(diamond, state, 2.0)
        if state.committed_path[-1] == 0:
            assert prev - cur == pytest.approx(0.002, abs=1e-9)
        prev = cur


# -- playback timeline -------------------------------------------------------


def test_playhead_finishes_after_exact_tick_count():
    g = make_graph({0: 2.0}, [])
    state = SpeechState(0)
    ticks = 0
    while not state.finished:
        advance_playhead(g, state, 1.0, 0.002, 1.0)
        ticks += 1
    assert ticks == 1000


def test_playhead_slow_audio_stretches_wall_time():
    g = make_graph({0: 2.0}, [])
    state = SpeechState(0)
    ticks = 0
    while not state.finished:
        advance_playhead(g, state, 0.8, 0.002, 1.0)
        ticks += 1
    assert ticks == 1250  # 2 s / 0.8 = 2.5 s of wall time


def test_playhead_varying_pace_matches_integrated_pace(rng):
    g = make_graph({0: 3.0}, [])
    state = SpeechState(0)
    dt = 0.002
    a_log = []
    while not state.finished:
        a = float(1.0 + 0.3 * np.sin(2.0 * np.pi * 0.5 * len(a_log) * dt))
        a_log.append(a)
        advance_playhead(g, state, a, dt, 1.0)
    consumed = float(np.sum(np.asarray(a_log) * dt))  # left Riemann of the step signal
    assert consumed == pytest.approx(3.0, abs=2 * dt)


def test_rollover_carries_excess(diamond):
    state = SpeechState(0)
    # one huge tick consumes clip 0 (1 s) and bites into the successor
    advance_playhead(diamond, state, 1.0, 1.3, 2.0)
    assert state.committed_path == [0, 1]
    assert state.playhead_s == pytest.approx(0.3, abs=1e-9)


def test_final_state_pins_playhead_to_duration(diamond):
    state = SpeechState(3, playhead_s=0.9)
    advance_playhead(diamond, state, 1.0, 0.5, 1.0)
    assert state.finished
    assert state.playhead_s == pytest.approx(1.0)
    advance_playhead(diamond, state, 1.0, 0.5, 1.0)  # no-op once finished
    assert state.playhead_s == pytest.approx(1.0)


def test_committed_path_ignores_audio_pace(diamond):
    paths = []
    for a in (0.7, 1.0, 1.3):
        state = SpeechState(0)
        while not state.finished:
            advance_playhead(diamond, state, a, 0.002, 5.0)
        paths.append(tuple(state.committed_path))
    assert len(set(paths)) == 1


def test_pinned_walk_fallback_is_smallest_id(diamond):
    assert diamond.pinned_successors() == {0: 1, 1: 3}


def test_natural_path_validation():
    g = make_graph({0: 1.0, 1: 2.0, 2: 5.0, 3: 1.0},
                   [(0, 1), (0, 2), (1, 3), (2, 3)], natural_path=[0, 2, 3])
    assert g.pinned_successors() == {0: 2, 2: 3}
    with pytest.raises(GraphError):
        make_graph({0: 1.0, 1: 2.0}, [(0, 1)], natural_path=[1])
    with pytest.raises(GraphError):
        make_graph({0: 1.0, 1: 2.0}, [(0, 1)], natural_path=[0])


def test_load_graph_roundtrip(tmp_path):
    doc = {
        "start": 0,
        "vertices": [
            {"id": 0, "text": "reach forward", "duration_s": 1.5, "audio": None},
            {"id": 1, "text": "and touch the mark", "duration_s": 2.0, "audio": None},
        ],
        "edges": [[0, 1]],
    }
    f = tmp_path / "graph.json"
    f.write_text(json.dumps(doc))
    g = load_graph(f)
    assert g.start == 0
    assert g.vertices[1].text == "and touch the mark"
    assert g.t_min[0] == pytest.approx(3.5)


def test_load_graph_rejects_duplicate_ids(tmp_path):
    doc = {
        "start": 0,
        "vertices": [
            {"id": 0, "text": "a", "duration_s": 1.0},
            {"id": 0, "text": "b", "duration_s": 2.0},
        ],
        "edges": [],
    }
    f = tmp_path / "dup.json"
    f.write_text(json.dumps(doc))
    with pytest.raises(GraphError):
        load_graph(f)
