"""Feedback-driven search for null directions.

The search space is a ternary tree over the angular range [-90, 90].
Every node owns a sector and a set of candidate nulls spread evenly over
it (half-step inset, so sector edges are never nulled directly); leaves
carry the sector center as their single null.  Descending one level needs
one over-the-air feedback round, so a depth-4 tree costs 4 rounds of
fanout tests instead of scanning a whole angle grid.

Wide nulls at the top of the tree blanket a sector; each level narrows
the blanket until a single sharp null remains.  The candidate with the
lowest measured INR anywhere along the way is remembered, so the final
choice may be an inner node rather than a leaf.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .beamforming import ArrayGeometry, lcmv_weights
from .channel import InrReport

NodeId = tuple[int, ...]

ROOT_SECTOR = (-90.0, 90.0)


class DofExhaustedError(RuntimeError):
    """Joint null set would exceed the array's degrees of freedom."""

    def __init__(self, accommodated: list[int], excluded: list[int], limit: int):
        self.accommodated = accommodated
        self.excluded = excluded
        self.limit = limit
        super().__init__(
            f"joint nulls exceed {limit} degrees of freedom; "
            f"accommodated users {accommodated}, could not serve {excluded}"
        )


@dataclass(frozen=True)
class NullConfig:
    """One candidate precoding: a beam plus a set of nulls inside a sector."""

    node_id: NodeId
    beam_angle_deg: float
    null_angles_deg: tuple[float, ...]
    sector: tuple[float, float]

    def __post_init__(self) -> None:
        a, b = self.sector
        if b < a:
            raise ValueError("sector bounds out of order")
        for x in self.null_angles_deg:
            if not a <= x <= b:
                raise ValueError(f"null {x} outside sector [{a}, {b}]")

    @property
    def level(self) -> int:
        return len(self.node_id)

    @property
    def label(self) -> str:
        return ".".join(str(i) for i in self.node_id)


def default_null_schedule(k_antennas: int, depth: int = 4) -> tuple[int, ...]:
    """Nulls per level for a given array size.

    Inner levels get 2*(levels below) nulls capped at K-2 (one degree of
    freedom always stays with the beam), the leaf level exactly one.
    Gives (6, 4, 2, 1) for K=8 and (2, 2, 2, 1) for K=4.
    """
    if depth < 1:
        raise ValueError("tree depth must be at least 1")
    cap = k_antennas - 2
    if cap < 1:
        raise ValueError(f"{k_antennas} antennas leave no freedom for nulls")
    counts = [min(cap, 2 * (depth - 1 - lev)) for lev in range(depth - 1)]
    return tuple(counts) + (1,)


def _evenly_inset(a: float, b: float, n: int) -> tuple[float, ...]:
    step = (b - a) / n
    return tuple(a + step * (i + 0.5) for i in range(n))


@dataclass
class SearchTree:
    """Precomputed candidate configs for every node of the search tree."""

    geometry: ArrayGeometry
    beam_angle_deg: float
    fanout: int
    depth: int
    nulls_per_level: tuple[int, ...]
    nodes: dict[NodeId, NullConfig] = field(repr=False)
    weights: dict[NodeId, np.ndarray] = field(repr=False)
    root_sector: tuple[float, float] = ROOT_SECTOR

    def children(self, node_id: NodeId) -> list[NodeId]:
        if len(node_id) >= self.depth:
            return []
        return [node_id + (i,) for i in range(self.fanout)]

    def level_ids(self, level: int) -> list[NodeId]:
        if not 1 <= level <= self.depth:
            raise IndexError(f"level {level} outside 1..{self.depth}")
        return sorted(n for n in self.nodes if len(n) == level)

    def is_leaf(self, node_id: NodeId) -> bool:
        return len(node_id) == self.depth

    @property
    def leaf_ids(self) -> list[NodeId]:
        return self.level_ids(self.depth)


def build_tree(
    geom: ArrayGeometry,
    beam_angle_deg: float,
    fanout: int = 3,
    depth: int = 4,
    nulls_per_level: Sequence[int] | None = None,
    root_sector: tuple[float, float] = ROOT_SECTOR,
) -> SearchTree:
    """Build the search tree and solve the weights of every node up front.

    Weight solves at traversal time would eat into the 2 ms test slots, so
    everything is precomputed.  A beam angle that coincides exactly with
    any candidate null makes that node's constraints rank deficient; the
    error propagates from here.
    """
    if fanout < 2:
        raise ValueError("fanout must be at least 2")
    schedule = (
        default_null_schedule(geom.k_antennas, depth)
        if nulls_per_level is None
        else tuple(int(n) for n in nulls_per_level)
    )
    if len(schedule) != depth:
        raise ValueError("null schedule length must equal tree depth")
    if schedule[-1] != 1:
        raise ValueError("leaf level must place exactly one null")
    if any(n < 1 for n in schedule):
        raise ValueError("every level needs at least one null")
    if max(schedule) > geom.k_antennas - 2:
        raise ValueError(
            f"schedule {schedule} exceeds the {geom.k_antennas - 2} nulls "
            f"available with a beam constraint"
        )
    lo, hi = root_sector
    if not (-90.0 <= lo < hi <= 90.0):
        raise ValueError("root sector must be a nonempty range inside [-90, 90]")

    nodes: dict[NodeId, NullConfig] = {}
    weights: dict[NodeId, np.ndarray] = {}

    def grow(node_id: NodeId, a: float, b: float) -> None:
        level = len(node_id)
        if level > 0:
            cfg = NullConfig(
                node_id=node_id,
                beam_angle_deg=beam_angle_deg,
                null_angles_deg=_evenly_inset(a, b, schedule[level - 1]),
                sector=(a, b),
            )
            nodes[node_id] = cfg
            weights[node_id] = lcmv_weights(geom, beam_angle_deg, cfg.null_angles_deg)
        if level < depth:
            w = (b - a) / fanout
            for i in range(fanout):
                grow(node_id + (i,), a + i * w, a + (i + 1) * w)

    grow((), lo, hi)
    return SearchTree(
        geometry=geom,
        beam_angle_deg=beam_angle_deg,
        fanout=fanout,
        depth=depth,
        nulls_per_level=schedule,
        nodes=nodes,
        weights=weights,
        root_sector=root_sector,
    )


# ---------------------------------------------------------------------------
# tree traversal

Evaluator = Callable[[NullConfig, np.ndarray], InrReport]


@dataclass
class SearchState:
    """Progress of one user's descent.

    ``frontier`` lists the nodes to test next; ``pending`` is True until
    their measurements are recorded.  ``best`` tracks the lowest aggregate
    INR over everything tested so far, inner nodes included.
    """

    frontier: list[NodeId]
    level: int
    pending: bool = True
    tested: list[tuple[NullConfig, InrReport]] = field(default_factory=list)
    best: tuple[NullConfig, InrReport] | None = None
    done: bool = False
    last_winner: NodeId | None = None

    @property
    def best_config(self) -> NullConfig:
        if self.best is None:
            raise RuntimeError("nothing tested yet")
        return self.best[0]


def start_search(tree: SearchTree) -> SearchState:
    return SearchState(frontier=tree.level_ids(1), level=1)


def record_results(
    state: SearchState, tree: SearchTree, reports: Sequence[InrReport]
) -> SearchState:
    """Attach the frontier's measurements to the state."""
    if state.done:
        raise RuntimeError("search already finished")
    if not state.pending:
        raise RuntimeError("frontier results were already recorded")
    if len(reports) != len(state.frontier):
        raise ValueError("one report per frontier node required")
    tested = list(state.tested)
    best = state.best
    for node_id, rep in zip(state.frontier, reports):
        cfg = tree.nodes[node_id]
        tested.append((cfg, rep))
        if best is None or rep.aggregate < best[1].aggregate:
            best = (cfg, rep)
    return replace(state, tested=tested, best=best, pending=False)


def advance(state: SearchState, tree: SearchTree, feedback: int) -> SearchState:
    """Descend into the frontier child named by the feedback index.

    ``feedback`` is the position, within the just-tested frontier, of the
    node with the lowest measured INR.  Only the ranking crosses the
    cross-technology channel, never the raw values.
    """
    if state.done:
        raise RuntimeError("search already finished")
    if state.pending:
        raise RuntimeError("frontier has not been tested yet")
    if not 0 <= feedback < len(state.frontier):
        raise IndexError(f"feedback {feedback} outside the tested frontier")
    winner = state.frontier[feedback]
    children = tree.children(winner)
    if not children:
        return replace(state, done=True, last_winner=winner, frontier=[])
    return replace(
        state,
        frontier=children,
        level=state.level + 1,
        pending=True,
        last_winner=winner,
    )


def min_inr_index(reports: Sequence[InrReport]) -> int:
    """Index of the lowest aggregate INR; ties break toward the lower index."""
    best, arg = None, 0
    for i, rep in enumerate(reports):
        if best is None or rep.aggregate < best:
            best, arg = rep.aggregate, i
    return arg


def run_tree_search(tree: SearchTree, evaluate: Evaluator) -> SearchState:
    """Drive a full descent; returns the finished state."""
    state = start_search(tree)
    while not state.done:
        reports = [evaluate(tree.nodes[n], tree.weights[n]) for n in state.frontier]
        state = record_results(state, tree, reports)
        state = advance(state, tree, min_inr_index(reports))
    return state


# ---------------------------------------------------------------------------
# linear baseline

LINEAR_GRID_SIZE = 165
LINEAR_GRID_RANGE = (-82.0, 82.0)


def default_linear_grid() -> tuple[float, ...]:
    lo, hi = LINEAR_GRID_RANGE
    return tuple(np.linspace(lo, hi, LINEAR_GRID_SIZE))


def linear_search(
    geom: ArrayGeometry,
    grid_angles: Sequence[float],
    beam_angle_deg: float,
    evaluate: Evaluator,
) -> tuple[NullConfig, InrReport, list[tuple[NullConfig, InrReport]]]:
    """Exhaustive single-null scan over ``grid_angles``.

    The baseline the tree is measured against: every angle is one tested
    config, one feedback summarizes the whole scan.  Ties break toward the
    lower grid index.
    """
    if not grid_angles:
        raise ValueError("linear search needs a nonempty grid")
    tested: list[tuple[NullConfig, InrReport]] = []
    for i, ang in enumerate(grid_angles):
        cfg = NullConfig(
            node_id=(i,),
            beam_angle_deg=beam_angle_deg,
            null_angles_deg=(float(ang),),
            sector=(float(ang), float(ang)),
        )
        w = lcmv_weights(geom, beam_angle_deg, cfg.null_angles_deg)
        tested.append((cfg, evaluate(cfg, w)))
    arg = min_inr_index([rep for _, rep in tested])
    return tested[arg][0], tested[arg][1], tested


# ---------------------------------------------------------------------------
# multi-user

MultiUserEvaluator = Callable[[int, NullConfig, np.ndarray], InrReport]


@dataclass
class MultiUserPlan:
    """Outcome of a parallel search for several users on one tree."""

    states: list[SearchState]
    visited_per_level: list[list[NodeId]]
    joint_null_angles: tuple[float, ...]
    per_user_best: list[tuple[NullConfig, InrReport]]

    @property
    def visited_count(self) -> int:
        return sum(len(v) for v in self.visited_per_level)


def _join_nulls(
    bests: Sequence[tuple[NullConfig, InrReport]], limit: int
) -> tuple[float, ...]:
    joint: list[float] = []
    accommodated: list[int] = []
    for u, (cfg, _) in enumerate(bests):
        fresh = [a for a in cfg.null_angles_deg if a not in joint]
        if len(joint) + len(fresh) > limit:
            raise DofExhaustedError(
                accommodated=accommodated,
                excluded=list(range(u, len(bests))),
                limit=limit,
            )
        joint.extend(fresh)
        accommodated.append(u)
    return tuple(joint)


def multi_user_search(
    states: list[SearchState],
    tree: SearchTree,
    evaluate: MultiUserEvaluator,
) -> MultiUserPlan:
    """Descend the tree for every user at once, sharing test slots.

    Per level the union of all users' frontiers is tested; a node shared
    by several users costs one slot because every node measures the same
    transmission.  Each user then descends into its own winner.  The final
    joint configuration is the union of the per-user best null sets, users
    served in input order until the array runs out of freedom (the beam
    keeps one degree), in which case the error names who still fit.

    Power correction is unavailable here: one correction cannot equalize
    several users' channels at once, so plain weights are used throughout.
    """
    if not states:
        raise ValueError("need at least one user")
    states = list(states)
    visited_per_level: list[list[NodeId]] = []
    for _ in range(tree.depth):
        frontier_union = sorted({n for st in states if not st.done for n in st.frontier})
        if not frontier_union:
            break
        visited_per_level.append(frontier_union)
        measured: dict[tuple[int, NodeId], InrReport] = {}
        for node_id in frontier_union:
            cfg, w = tree.nodes[node_id], tree.weights[node_id]
            for u in range(len(states)):
                measured[(u, node_id)] = evaluate(u, cfg, w)
        for u, st in enumerate(states):
            if st.done:
                continue
            reports = [measured[(u, n)] for n in st.frontier]
            st = record_results(st, tree, reports)
            states[u] = advance(st, tree, min_inr_index(reports))
    bests = [st.best for st in states]
    if any(b is None for b in bests):
        raise RuntimeError("search ended with an untested user")
    joint = _join_nulls(bests, limit=tree.geometry.k_antennas - 2)
    return MultiUserPlan(
        states=states,
        visited_per_level=visited_per_level,
        joint_null_angles=joint,
        per_user_best=list(bests),
    )
