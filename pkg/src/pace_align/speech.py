"""Phrasing graph and speech timeline.

A phrasing graph is a DAG whose vertices are speakable phrases with known
durations; any root-to-terminal walk is one valid way to say the message.
The timeline consumes clips at the audio pace and, at each clip boundary,
picks the successor whose remaining-duration envelope best matches the
estimated remaining motion time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "PhraseVertex",
    "PhrasingGraph",
    "SpeechState",
    "load_graph",
    "select_next_vertex",
    "estimate_audio_etc",
    "advance_playhead",
    "GraphError",
]


class GraphError(ValueError):
    """Raised for malformed phrasing graphs."""


@dataclass(frozen=True)
class PhraseVertex:
    id: int
    text: str
    duration_s: float
    audio_ref: str | None = None


@dataclass
class PhrasingGraph:
    """Validated DAG of phrases with precomputed path-duration bounds.

    t_min[u] / t_max[u] are the shortest / longest total speaking time of
    any walk from u (inclusive) to a terminal, filled by a reverse
    topological sweep.  Immutable after construction.
    """

    vertices: dict[int, PhraseVertex]
    edges: dict[int, list[int]]          # successors, sorted by id
    start: int
    natural_path: list[int] | None = None
    t_min: dict[int, float] = field(init=False)
    t_max: dict[int, float] = field(init=False)

    def __post_init__(self):
        if self.start not in self.vertices:
            raise GraphError(f"start vertex {self.start} not defined")
        for u, succs in self.edges.items():
            if u not in self.vertices:
                raise GraphError(f"edge from unknown vertex {u}")
            for v in succs:
                if v not in self.vertices:
                    raise GraphError(f"edge to unknown vertex {v}")
        for v in self.vertices.values():
            if not (v.duration_s > 0.0):
                raise GraphError(f"vertex {v.id}: duration must be positive")
        order = self._topological_order()
        self.t_min, self.t_max = self._bounds(order)
        unreachable = [u for u in self.vertices if u not in self.t_min]
        if unreachable:
            raise GraphError(f"vertices cannot reach a terminal: {unreachable}")
        if self.natural_path is not None:
            self._validate_walk(self.natural_path)

    def successors(self, u: int) -> list[int]:
        return self.edges.get(u, [])

    def is_terminal(self, u: int) -> bool:
        return not self.edges.get(u)

    @property
    def terminals(self) -> list[int]:
        return sorted(u for u in self.vertices if self.is_terminal(u))

    def duration(self, u: int) -> float:
        return self.vertices[u].duration_s

    def _topological_order(self) -> list[int]:
        indeg = {u: 0 for u in self.vertices}
        for succs in self.edges.values():
            for v in succs:
                indeg[v] += 1
        frontier = sorted(u for u, k in indeg.items() if k == 0)
        order: list[int] = []
        while frontier:
            u = frontier.pop(0)
            order.append(u)
            for v in self.edges.get(u, []):
                indeg[v] -= 1
                if indeg[v] == 0:
                    frontier.append(v)
            frontier.sort()
        if len(order) != len(self.vertices):
            stuck = sorted(set(self.vertices) - set(order))
            raise GraphError(f"phrasing graph contains a cycle through {stuck}")
        return order

    def _bounds(self, order: list[int]):
        t_min: dict[int, float] = {}
        t_max: dict[int, float] = {}
        for u in reversed(order):
            d = self.duration(u)
            succs = self.edges.get(u, [])
            if not succs:
                t_min[u] = t_max[u] = d
            else:
                reach = [v for v in succs if v in t_min]
                if not reach:
                    continue  # cannot reach a terminal; caught by caller
                t_min[u] = d + min(t_min[v] for v in reach)
                t_max[u] = d + max(t_max[v] for v in reach)
        return t_min, t_max

    def _validate_walk(self, path: list[int]):
        if not path or path[0] != self.start:
            raise GraphError("natural path must begin at the start vertex")
        for u, v in zip(path, path[1:]):
            if v not in self.edges.get(u, []):
                raise GraphError(f"natural path uses missing edge {u} -> {v}")
        if not self.is_terminal(path[-1]):
            raise GraphError("natural path must end at a terminal vertex")

    def pinned_successors(self) -> dict[int, int]:
        """Successor map for pinned-path schemes.

        Uses the authored natural path when present; otherwise the walk that
        always takes the smallest-id successor.
        """
        if self.natural_path is not None:
            return dict(zip(self.natural_path, self.natural_path[1:]))
        path = [self.start]
        while not self.is_terminal(path[-1]):
            path.append(self.successors(path[-1])[0])
        return dict(zip(path, path[1:]))


@dataclass
class SpeechState:
    """Playback cursor over the graph.

    playhead_s counts seconds of the current clip consumed at base pace;
    the audio pace only scales how fast it advances per wall-clock tick.
    """

    current_vertex: int
    playhead_s: float = 0.0
    finished: bool = False
    committed_path: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.committed_path:
            self.committed_path = [self.current_vertex]


def load_graph(path: str | Path) -> PhrasingGraph:
    """Load the JSON graph format:
    { "start": id, "vertices": [{"id", "text", "duration_s", "audio": path|null}],
      "edges": [[u, v], ...], "natural_path": [ids]? }
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise GraphError(f"cannot read graph {path}: {e}") from e
    try:
        vertices = {
            int(v["id"]): PhraseVertex(
                id=int(v["id"]),
                text=str(v["text"]),
                duration_s=float(v["duration_s"]),
                audio_ref=v.get("audio"),
            )
            for v in doc["vertices"]
        }
        if len(vertices) != len(doc["vertices"]):
            raise GraphError(f"{path}: duplicate vertex ids")
        edges: dict[int, list[int]] = {}
        for u, v in doc["edges"]:
            edges.setdefault(int(u), []).append(int(v))
        for succs in edges.values():
            succs.sort()
        start = int(doc["start"])
        natural = doc.get("natural_path")
        natural = [int(u) for u in natural] if natural is not None else None
    except (KeyError, TypeError, ValueError) as e:
        raise GraphError(f"malformed graph {path}: {e}") from e
    return PhrasingGraph(vertices, edges, start, natural_path=natural)


def select_next_vertex(graph: PhrasingGraph, current: int, t_hat_x: float) -> int | None:
    """Successor whose (t_min + t_max)/2 midpoint is nearest t_hat_x.

    None when current is terminal.  Ties break to the smallest id.  By
    design this reads neither pace: traversal depending on p or a would
    feed back into the ETCs it is trying to match.
    """
    succs = graph.successors(current)
    if not succs:
        return None
    best_id, best_cost = None, None
    for v in succs:  # sorted by id, so first strict improvement wins ties
        cost = abs(t_hat_x - 0.5 * (graph.t_min[v] + graph.t_max[v]))
        if best_cost is None or cost < best_cost:
            best_id, best_cost = v, cost
    return best_id


def estimate_audio_etc(
    graph: PhrasingGraph,
    state: SpeechState,
    t_hat_x: float,
    pinned: dict[int, int] | None = None,
) -> float:
    """Remaining speaking time at base pace from the current playhead.

    Remainder of the current clip plus durations along the projected path:
    the pinned successor map when given, otherwise the selection heuristic
    applied greedily with the same t_hat_x at every hop.
    """
    if state.finished:
        return 0.0
    u = state.current_vertex
    total = graph.duration(u) - state.playhead_s
    while True:
        v = pinned.get(u) if pinned is not None else select_next_vertex(graph, u, t_hat_x)
        if v is None:
            return total
        total += graph.duration(v)
        u = v


def advance_playhead(
    graph: PhrasingGraph,
    state: SpeechState,
    a: float,
    dt: float,
    t_hat_x: float,
    pinned: dict[int, int] | None = None,
) -> None:
    """Consume a*dt seconds of clip time, rolling over at clip boundaries.

    Excess consumed time carries into the next clip so the timeline has no
    gaps.  The successor comes from the pinned map when given, else from
    the selection heuristic with the latest t_hat_x.  Crossing uses a 1 ns
    slack so accumulated rounding cannot delay a boundary by a tick.
    """
    if state.finished:
        return
    state.playhead_s += a * dt
    while state.playhead_s >= graph.duration(state.current_vertex) - 1e-9:
        u = state.current_vertex
        v = pinned.get(u) if pinned is not None else select_next_vertex(graph, u, t_hat_x)
        if v is None:
            state.playhead_s = graph.duration(u)
            state.finished = True
            return
        state.playhead_s = max(state.playhead_s - graph.duration(u), 0.0)
        state.current_vertex = v
        state.committed_path.append(v)
