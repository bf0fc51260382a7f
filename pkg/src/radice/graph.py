"""Causal graph with lagged directed edges and contemporaneous undirected edges.

A directed edge ``(u, v, lag)`` means "u at time t - lag causes v at time t".
Only lag-0 relations may be undirected, and the lag-0 directed edges must form
a DAG.  Path queries ignore lags: a path is a sequence of vertices where each
hop is backed by at least one directed edge of any lag.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

DEFAULT_PATH_LIMIT = 10_000


class GraphError(ValueError):
    pass


class CycleError(GraphError):
    """Inserting a lag-0 edge would close a contemporaneous cycle."""


def _pair(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


@dataclass
class PathSearch:
    """Result of :meth:`CausalGraph.enumerate_paths`."""

    paths: list[tuple[str, ...]]
    truncated: bool


class CausalGraph:
    """Mutable causal graph; use :meth:`copy` to branch a value."""

    def __init__(self, vertices: Iterable[str] = (),
                 directed: Iterable[tuple[str, str, int]] = (),
                 undirected: Iterable[tuple[str, str]] = ()):
        self._vertices: list[str] = []
        self._vset: set[str] = set()
        self._directed: set[tuple[str, str, int]] = set()
        self._undirected: set[tuple[str, str]] = set()
        for v in vertices:
            self.add_vertex(v)
        for u, v, lag in directed:
            self.add_directed(u, v, lag)
        for u, v in undirected:
            self.add_undirected(u, v)

    # -- construction -------------------------------------------------------

    def add_vertex(self, v: str) -> None:
        if not v:
            raise GraphError("vertex name must be non-empty")
        if v not in self._vset:
            self._vertices.append(v)
            self._vset.add(v)

    def _check(self, *vs: str) -> None:
        for v in vs:
            if v not in self._vset:
                raise GraphError(f"unknown vertex {v!r}")

    def add_directed(self, u: str, v: str, lag: int = 0) -> None:
        """Insert ``u -> v`` at ``lag``; raises :class:`CycleError` on a lag-0 cycle."""
        self._check(u, v)
        lag = int(lag)
        if lag < 0:
            raise GraphError("lag must be non-negative")
        if lag == 0:
            if u == v:
                raise CycleError(f"self-loop {u!r} at lag 0")
            if _pair(u, v) in self._undirected:
                raise GraphError(f"{u!r}-{v!r} is already undirected")
            if (u, v, 0) not in self._directed and self._reaches0(v, u):
                raise CycleError(f"{u!r} -> {v!r} closes a lag-0 cycle")
        self._directed.add((u, v, lag))

    def would_create_cycle(self, u: str, v: str) -> bool:
        self._check(u, v)
        return u == v or self._reaches0(v, u)

    def add_undirected(self, u: str, v: str) -> None:
        self._check(u, v)
        if u == v:
            raise GraphError("undirected self-loop")
        if (u, v, 0) in self._directed or (v, u, 0) in self._directed:
            raise GraphError(f"{u!r}-{v!r} already has a lag-0 directed edge")
        self._undirected.add(_pair(u, v))

    def remove_directed(self, u: str, v: str, lag: int) -> None:
        self._directed.discard((u, v, lag))

    def remove_undirected(self, u: str, v: str) -> None:
        self._undirected.discard(_pair(u, v))

    def copy(self) -> "CausalGraph":
        g = CausalGraph(self._vertices)
        g._directed = set(self._directed)
        g._undirected = set(self._undirected)
        return g

    # -- views ---------------------------------------------------------------

    @property
    def vertices(self) -> list[str]:
        return list(self._vertices)

    @property
    def directed_edges(self) -> list[tuple[str, str, int]]:
        return sorted(self._directed)

    @property
    def undirected_edges(self) -> list[tuple[str, str]]:
        return sorted(self._undirected)

    def __contains__(self, v: str) -> bool:
        return v in self._vset

    def has_directed(self, u: str, v: str, lag: int | None = None) -> bool:
        if lag is None:
            return any(e[0] == u and e[1] == v for e in self._directed)
        return (u, v, lag) in self._directed

    def has_undirected(self, u: str, v: str) -> bool:
        return _pair(u, v) in self._undirected

    def successors(self, u: str) -> list[str]:
        """Distinct heads of directed edges leaving ``u`` (any lag), sorted."""
        return sorted({b for a, b, _ in self._directed if a == u})

    def _adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {v: set() for v in self._vertices}
        for a, b, _ in self._directed:
            adj[a].add(b)
        return adj

    def _reaches0(self, src: str, dst: str) -> bool:
        succ: dict[str, list[str]] = {}
        for a, b, lag in self._directed:
            if lag == 0:
                succ.setdefault(a, []).append(b)
        stack, seen = [src], {src}
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            for y in succ.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    def lag0_topological_order(self) -> list[str] | None:
        """Kahn order of the lag-0 sub-graph, or ``None`` if it has a cycle."""
        indeg = {v: 0 for v in self._vertices}
        succ: dict[str, list[str]] = {v: [] for v in self._vertices}
        for a, b in {(a, b) for a, b, lag in self._directed if lag == 0}:
            indeg[b] += 1
            succ[a].append(b)
        ready = sorted(v for v, d in indeg.items() if d == 0)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for w in sorted(succ[v]):
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
            ready.sort()
        return order if len(order) == len(self._vertices) else None

    def is_lag0_acyclic(self) -> bool:
        return self.lag0_topological_order() is not None

    # -- paths -----------------------------------------------------------------

    def has_causal_path(self, src: str, dst: str) -> bool:
        """True iff a directed path (any lags, at least one hop) leads ``src`` to ``dst``."""
        self._check(src, dst)
        adj = self._adjacency()
        stack, seen = list(adj[src]), set()
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            if x not in seen:
                seen.add(x)
                stack.extend(adj[x])
        return False

    def ancestors(self, v: str) -> set[str]:
        """Vertices with a directed path into ``v``."""
        self._check(v)
        pred: dict[str, set[str]] = {x: set() for x in self._vertices}
        for a, b, _ in self._directed:
            pred[b].add(a)
        out: set[str] = set()
        stack = list(pred[v])
        while stack:
            x = stack.pop()
            if x not in out:
                out.add(x)
                stack.extend(pred[x])
        return out

    def descendants(self, v: str) -> set[str]:
        self._check(v)
        adj = self._adjacency()
        out: set[str] = set()
        stack = list(adj[v])
        while stack:
            x = stack.pop()
            if x not in out:
                out.add(x)
                stack.extend(adj[x])
        return out

    def iter_paths(self, src: str, dst: str) -> Iterator[tuple[str, ...]]:
        """Vertex-simple directed paths in lexicographic order of vertex sequence."""
        self._check(src, dst)
        if src == dst:
            return
        adj = {v: sorted(s) for v, s in self._adjacency().items()}
        useful = self.ancestors(dst) | {dst}
        if src not in useful:
            return
        path = [src]
        on_path = {src}
        stack = [iter(adj[src])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt in on_path or nxt not in useful:
                continue
            if nxt == dst:
                yield tuple(path) + (dst,)
                continue
            path.append(nxt)
            on_path.add(nxt)
            stack.append(iter(adj[nxt]))

    def enumerate_paths(self, src: str, dst: str, limit: int = DEFAULT_PATH_LIMIT) -> PathSearch:
        paths: list[tuple[str, ...]] = []
        for p in self.iter_paths(src, dst):
            if len(paths) == limit:
                return PathSearch(paths, True)
            paths.append(p)
        return PathSearch(paths, False)

    # -- comparison and serialization --------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CausalGraph):
            return NotImplemented
        return (set(self._vertices) == set(other._vertices)
                and self._directed == other._directed
                and self._undirected == other._undirected)

    def __repr__(self) -> str:
        return (f"CausalGraph({len(self._vertices)} vertices, {len(self._directed)} directed, "
                f"{len(self._undirected)} undirected)")

    def to_dict(self) -> dict:
        return {
            "vertices": list(self._vertices),
            "directed": [[u, v, lag] for u, v, lag in self.directed_edges],
            "undirected": [[u, v] for u, v in self.undirected_edges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CausalGraph":
        try:
            return cls(d["vertices"],
                       [(u, v, int(lag)) for u, v, lag in d.get("directed", [])],
                       [(u, v) for u, v in d.get("undirected", [])])
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed graph document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CausalGraph":
        return cls.from_dict(json.loads(text))

    def to_dot(self, name: str = "G", styles: dict[str, str] | None = None) -> str:
        """Graphviz source; ``styles`` maps vertex -> extra node attributes."""
        styles = styles or {}
        lines = [f"digraph {_dot_id(name)} {{", "  rankdir=LR;"]
        for v in self._vertices:
            extra = styles.get(v)
            lines.append(f"  {_dot_id(v)}" + (f" [{extra}];" if extra else ";"))
        for u, v, lag in self.directed_edges:
            lines.append(f'  {_dot_id(u)} -> {_dot_id(v)} [label="{lag}"];')
        for u, v in self.undirected_edges:
            lines.append(f'  {_dot_id(u)} -> {_dot_id(v)} [dir=none, label="0"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


_DOT_NODE = re.compile(r'^\s*("(?:[^"\\]|\\.)*")\s*(?:\[.*\])?;$')
_DOT_EDGE = re.compile(r'^\s*("(?:[^"\\]|\\.)*")\s*->\s*("(?:[^"\\]|\\.)*")\s*\[(.*)\];$')


def from_dot(text: str) -> CausalGraph:
    """Parse the DOT written by :meth:`CausalGraph.to_dot` (not general DOT)."""
    g = CausalGraph()
    edges = []
    for line in text.splitlines():
        m = _DOT_EDGE.match(line)
        if m:
            attrs = m.group(3)
            lag = re.search(r'label="(\d+)"', attrs)
            edges.append((_dot_unquote(m.group(1)), _dot_unquote(m.group(2)),
                          int(lag.group(1)) if lag else 0, "dir=none" in attrs))
            continue
        m = _DOT_NODE.match(line)
        if m:
            g.add_vertex(_dot_unquote(m.group(1)))
    for u, v, lag, undirected in edges:
        if undirected:
            g.add_undirected(u, v)
        else:
            g.add_directed(u, v, lag)
    return g


def _dot_unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


def _dot_id(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'
