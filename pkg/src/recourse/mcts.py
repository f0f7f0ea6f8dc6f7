"""Directive generation: Monte-Carlo tree search over action sequences that
move the factual state to (near) its counterfactual and flip the decision.

The search tree hangs off a dummy root carrying the factual state; every
other node records the action that produced its state. Rollouts descend by
UCT, expand the reached leaf, simulate with uniform random actions, and back
the reward up to the root. A run owns its tree; independent runs (other
seeds or instances) can proceed concurrently.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

import numpy as np

from .data import FeatureSchema, Instance, LinearClassifier, NUMERIC, predict
from .errors import (
    AlreadyExpanded,
    NoChildren,
    NoDirectiveFound,
    NotActionableFeature,
    TerminalNode,
)


@dataclass(frozen=True)
class Action:
    """One lever: either an absolute level assignment or a level delta on an
    actionable ordinal/categorical feature."""

    id: str
    feature: str
    set_level: int | None = None
    delta: int | None = None
    cost: float = 1.0
    description: str = ""

    def __post_init__(self):
        if (self.set_level is None) == (self.delta is None):
            raise ValueError(f"action {self.id!r} needs exactly one of set_level/delta")
        if self.cost <= 0:
            raise ValueError(f"action {self.id!r} cost must be positive")


def validate_action(a: Action, schema: FeatureSchema) -> None:
    spec = schema.feature(a.feature)
    if not spec.actionable:
        raise NotActionableFeature(f"feature {a.feature!r} is not actionable")
    if spec.kind == NUMERIC:
        raise NotActionableFeature(
            f"feature {a.feature!r} is numeric; actions act on levels"
        )
    if a.set_level is not None and not 0 <= a.set_level < len(spec.levels):
        raise ValueError(
            f"action {a.id!r} sets level {a.set_level}, feature has {len(spec.levels)}"
        )


def apply_action(x: Instance, a: Action, schema: FeatureSchema) -> Instance:
    """New instance with the action's feature changed; delta effects clamp at
    the level boundaries (possibly a no-op). The input is untouched."""
    validate_action(a, schema)
    j = schema.index(a.feature)
    spec = schema.features[j]
    if a.set_level is not None:
        new_level = a.set_level
    else:
        new_level = min(len(spec.levels) - 1, max(0, x.values[j] + a.delta))
    values = list(x.values)
    values[j] = new_level
    return Instance(tuple(values))


@dataclass(frozen=True)
class MctsConfig:
    alpha: float = 0.5
    beta: float = 0.5
    delta: float = 5.0
    gamma: float = 0.8
    horizon: int = 3
    num_rollouts: int = 1000
    uct_c: float = math.sqrt(2.0)
    max_depth: int = 10
    seed: int = 0
    prune_noop_children: bool = False
    discount_per_step: bool = False  # reward (a+b)*gamma^steps instead of (a+b)*gamma

    def __post_init__(self):
        positive = ("alpha", "beta", "delta", "gamma", "num_rollouts", "max_depth")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.uct_c < 0:
            raise ValueError("uct_c must be >= 0")

    def terminal_reward(self, steps_from_root: int) -> float:
        base = self.alpha + self.beta
        if self.discount_per_step:
            return base * self.gamma**steps_from_root
        return base * self.gamma


class _SearchContext:
    """Shared per-run state: classifier, goal, action set, and memo caches for
    encoded vectors and labels keyed by instance values."""

    def __init__(self, f: LinearClassifier, c: Instance, actions: tuple):
        self.f = f
        self.c = c
        self.schema = f.schema
        self.actions = actions
        self._labels: dict = {}
        self._encoded: dict = {}
        self.target_label = self.label(c)

    def label(self, x: Instance) -> int:
        got = self._labels.get(x.values)
        if got is None:
            got = predict(self.f, x).label
            self._labels[x.values] = got
        return got

    def encoded(self, x: Instance) -> np.ndarray:
        got = self._encoded.get(x.values)
        if got is None:
            got = self.f.encoding.encode(x)
            self._encoded[x.values] = got
        return got

    def is_terminal(self, x: Instance) -> bool:
        return self.label(x) == self.target_label

    def cf_distance(self, x: Instance) -> float:
        return float(np.linalg.norm(self.encoded(self.c) - self.encoded(x)))


class SearchNode:
    """Tree node: the action taken, the resulting state, and its Q/N stats."""

    __slots__ = ("ctx", "action", "state", "q", "n", "children", "parent", "depth", "terminal")

    def __init__(self, ctx: _SearchContext, action: Action | None, state: Instance,
                 parent: "SearchNode | None"):
        self.ctx = ctx
        self.action = action
        self.state = state
        self.parent = parent
        self.depth = 0 if parent is None else parent.depth + 1
        self.q = 0.0
        self.n = 0
        self.children: list[SearchNode] = []
        self.terminal = ctx.is_terminal(state)

    @property
    def counterfactual(self) -> Instance:
        return self.ctx.c

    def __repr__(self):
        a = self.action.id if self.action else "root"
        return f"SearchNode({a}, q={self.q:.3g}, n={self.n}, terminal={self.terminal})"


def build_root(x: Instance, f: LinearClassifier, c: Instance,
               actions=()) -> SearchNode:
    """Dummy root node: no action, factual state, references to c and f."""
    x.validate(f.schema)
    c.validate(f.schema)
    return SearchNode(_SearchContext(f, c, tuple(actions)), None, x, None)


def uct_select(node: SearchNode, c: float, rng: random.Random) -> SearchNode:
    """Descend by UCT (Q/N + c*sqrt(ln N_parent / N_child)) until a leaf.

    Unvisited children are taken before any visited sibling; exact value ties
    break through the run's RNG.
    """
    if not node.children:
        raise NoChildren("uct_select needs a node with children")
    while node.children and not node.terminal:
        unvisited = [ch for ch in node.children if ch.n == 0]
        if unvisited:
            node = unvisited[rng.randrange(len(unvisited))]
            continue
        log_parent = math.log(node.n)
        best_value = -math.inf
        best: list[SearchNode] = []
        for ch in node.children:
            value = ch.q / ch.n + c * math.sqrt(log_parent / ch.n)
            if value > best_value:
                best_value, best = value, [ch]
            elif value == best_value:
                best.append(ch)
        node = best[rng.randrange(len(best))]
    return node


def expand(node: SearchNode, actions, prune_noop: bool = False) -> None:
    """Attach one child per action (state = action applied to the node's
    state); no-op children from boundary clamping are kept unless pruned."""
    if node.terminal:
        raise TerminalNode("terminal nodes are not expanded")
    if node.children:
        raise AlreadyExpanded("node already has children")
    for a in actions:
        state = apply_action(node.state, a, node.ctx.schema)
        if prune_noop and state.values == node.state.values:
            continue
        node.children.append(SearchNode(node.ctx, a, state, node))


def simulate(leaf: SearchNode, cfg: MctsConfig, rng: random.Random) -> float:
    """Random descent from the leaf until a terminal state or the depth cap.

    At a terminal state the reward is (alpha+beta)*gamma when the encoded
    Euclidean distance to the counterfactual is within delta (the decision is
    flipped there by definition of terminal), else 0; running out of moves or
    depth also returns 0.
    """
    ctx = leaf.ctx
    state = leaf.state
    steps = 0
    while True:
        if ctx.is_terminal(state):
            if ctx.cf_distance(state) <= cfg.delta:
                return cfg.terminal_reward(leaf.depth + steps)
            return 0.0
        if steps >= cfg.max_depth:
            return 0.0
        actions = ctx.actions
        if cfg.prune_noop_children:
            actions = tuple(
                a for a in actions
                if apply_action(state, a, ctx.schema).values != state.values
            )
        if not actions:
            return 0.0
        state = apply_action(state, actions[rng.randrange(len(actions))], ctx.schema)
        steps += 1


def backpropagate(node: SearchNode, reward: float) -> None:
    """N += 1 and Q += reward for the node and every ancestor up to the root."""
    while node is not None:
        node.n += 1
        node.q += reward
        node = node.parent


def do_rollout(node: SearchNode, cfg: MctsConfig, rng: random.Random) -> None:
    """One search episode from the given node: select, expand, simulate,
    backpropagate."""
    leaf = uct_select(node, cfg.uct_c, rng) if node.children else node
    if not leaf.terminal and not leaf.children:
        expand(leaf, leaf.ctx.actions, prune_noop=cfg.prune_noop_children)
    reward = simulate(leaf, cfg, rng)
    backpropagate(leaf, reward)


def _choose(node: SearchNode, rng: random.Random) -> "SearchNode | None":
    """Best mean-reward child (ties via RNG); None when nothing is visited."""
    visited = [ch for ch in node.children if ch.n > 0]
    if not visited:
        return None
    best_value = max(ch.q / ch.n for ch in visited)
    best = [ch for ch in visited if ch.q / ch.n == best_value]
    return best[rng.randrange(len(best))]


@dataclass(frozen=True)
class DirectivePlan:
    actions: tuple[Action, ...]
    final_state: Instance
    total_cost: float
    cf_distance: float
    flipped: bool

    def to_dict(self, schema: FeatureSchema) -> dict:
        from .data import instance_to_dict

        return {
            "actions": [
                {
                    "id": a.id,
                    "feature": a.feature,
                    **({"set_level": a.set_level} if a.set_level is not None else {}),
                    **({"delta": a.delta} if a.delta is not None else {}),
                    "cost": a.cost,
                    "description": a.description,
                }
                for a in self.actions
            ],
            "final_state": instance_to_dict(self.final_state, schema),
            "total_cost": self.total_cost,
            "cf_distance": self.cf_distance,
            "flipped": self.flipped,
        }


def _extract_plans(root: SearchNode, rng: random.Random) -> list[DirectivePlan]:
    plans = []
    stack = list(root.children)
    while stack:
        node = stack.pop()
        if node.terminal:
            path = []
            cur = node
            while cur.action is not None:
                path.append(cur.action)
                cur = cur.parent
            path.reverse()
            plans.append(
                DirectivePlan(
                    actions=tuple(path),
                    final_state=node.state,
                    total_cost=sum(a.cost for a in path),
                    cf_distance=node.ctx.cf_distance(node.state),
                    flipped=True,
                )
            )
        else:
            stack.extend(node.children)
    rng.shuffle(plans)  # seeded random tie-break, then stable sort by cost
    plans.sort(key=lambda p: p.total_cost)
    return plans


def run_search(
    x: Instance,
    f: LinearClassifier,
    actions,
    c: Instance,
    cfg: MctsConfig,
    rng: random.Random | None = None,
) -> SearchNode:
    """Build and explore the search tree (horizon x num_rollouts episodes);
    returns the root for inspection or plan extraction.

    Between episodes the exploration pointer commits to the best mean-reward
    child; once it reaches a terminal (or unexplored) node it restarts at the
    root so the full rollout budget is always spent.
    """
    actions = tuple(actions)
    if not f.schema.actionable_features:
        raise NotActionableFeature("schema marks no feature as actionable")
    for a in actions:
        validate_action(a, f.schema)
    rng = rng if rng is not None else random.Random(cfg.seed)
    root = build_root(x, f, c, actions)
    if not root.terminal and actions:
        for _ in range(cfg.horizon):
            node = root
            for _ in range(cfg.num_rollouts):
                if node is None or node.terminal:
                    node = root
                do_rollout(node, cfg, rng)
                node = _choose(node, rng)
    return root


def generate_directives(
    x: Instance,
    f: LinearClassifier,
    actions,
    c: Instance,
    cfg: MctsConfig = MctsConfig(),
) -> list[DirectivePlan]:
    """Run the search and return up to `horizon` root-to-terminal action
    plans, cheapest first (cost ties randomized by the run's seed).
    Deterministic for a fixed seed."""
    actions = tuple(actions)
    if not actions:
        raise NoDirectiveFound("the action set is empty")
    rng = random.Random(cfg.seed)
    root = run_search(x, f, actions, c, cfg, rng)
    plans = _extract_plans(root, rng)
    if not plans:
        raise NoDirectiveFound(
            "no action sequence flipped the decision within the rollout budget"
        )
    return plans[: cfg.horizon]


# --- action catalog wire format ---


def actions_from_dict(doc: dict, schema: FeatureSchema) -> tuple[Action, ...]:
    """Catalog JSON: {"actions": [{"id", "feature", "set_level"|"delta",
    "cost", "description"}]}; set_level accepts a level name or index."""
    out = []
    for rec in doc["actions"]:
        set_level = rec.get("set_level")
        if isinstance(set_level, str):
            set_level = schema.feature(rec["feature"]).level_index(set_level)
        a = Action(
            id=rec["id"],
            feature=rec["feature"],
            set_level=set_level,
            delta=rec.get("delta"),
            cost=float(rec.get("cost", 1.0)),
            description=rec.get("description", ""),
        )
        validate_action(a, schema)
        out.append(a)
    return tuple(out)


def load_actions(path, schema: FeatureSchema) -> tuple[Action, ...]:
    with open(path, encoding="utf-8") as fh:
        return actions_from_dict(json.load(fh), schema)
