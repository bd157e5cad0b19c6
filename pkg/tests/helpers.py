"""Shared generators for randomized policy/key trials."""

from __future__ import annotations

import random
from typing import Set, Tuple

from lcws.policy import AccessNode, AccessTree, satisfies


def random_policy(rng: random.Random, max_depth: int = 6, max_leaves: int = 40) -> str:
    """Random policy text within depth and leaf budgets."""
    counter = [0]

    def fresh_attr() -> str:
        counter[0] += 1
        return f"attr{counter[0]:03d}"

    def gen(depth_left: int, leaf_budget: int) -> Tuple[str, int]:
        if depth_left <= 1 or leaf_budget <= 1 or rng.random() < 0.30:
            return fresh_attr(), 1
        arity = rng.randint(2, min(4, leaf_budget))
        parts = []
        used = 0
        for slot in range(arity):
            remaining = leaf_budget - used - (arity - slot - 1)
            text, n = gen(depth_left - 1, max(1, remaining))
            parts.append(text)
            used += n
        kind = rng.random()
        if kind < 0.45:
            return "(" + " AND ".join(parts) + ")", used
        if kind < 0.80:
            return "(" + " OR ".join(parts) + ")", used
        k = rng.randint(1, arity)
        return f"({k} of (" + ", ".join(parts) + "))", used

    text, _ = gen(max_depth, max_leaves)
    return text


def satisfying_attrs(tree: AccessTree, rng: random.Random) -> Set[str]:
    """A minimal-ish attribute set that satisfies the tree: every gate is
    met through a random choice of exactly threshold children."""

    def pick(node: AccessNode) -> Set[str]:
        if node.is_leaf:
            return {node.attribute}
        chosen = rng.sample(list(node.children), node.threshold)
        out: Set[str] = set()
        for child in chosen:
            out |= pick(child)
        return out

    attrs = pick(tree.root)
    assert satisfies(tree, attrs)
    return attrs


def unsatisfying_attrs(tree: AccessTree, rng: random.Random) -> Set[str]:
    """A non-empty attribute set that fails the tree's policy."""
    leaf_attrs = sorted(tree.leaf_attributes())
    for _ in range(64):
        subset = {a for a in leaf_attrs if rng.random() < 0.3}
        if rng.random() < 0.3:
            subset.add("foreign:" + str(rng.randrange(1000)))
        if subset and not satisfies(tree, subset):
            return subset
    return {"foreign:fallback"}
