"""Discrete belief networks with exact inference.

A network is a DAG of nodes, each carrying a conditional probability
table (CPT) over its states given its parents' states.  Observed states
("findings") are hard evidence; inference returns exact posterior
marginals for every node.

Two independent inference routes are provided: variable elimination
(`infer_marginals`, the production path) and brute-force enumeration of
the joint (`enumerate_joint`, the oracle).  Both run on plain Python
numbers, so networks built from `fractions.Fraction` CPTs give exact
rational posteriors.

CPT row order: rows enumerate the parent-state combinations in
row-major order with the FIRST listed parent varying slowest.  A node
with no parents has exactly one row.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, TypeAlias

from .errors import (
    DomainError,
    ImpossibleFindingsError,
    NetworkValidationError,
    StateSpaceTooLargeError,
)

__all__ = [
    "Node",
    "Network",
    "Posterior",
    "Cpt",
    "FORMAT_KEY",
    "build_network",
    "infer_marginals",
    "query_conditional",
    "enumerate_joint",
    "box_testimony_network",
    "builtin_network",
    "BUILTIN_EXAMPLES",
    "network_from_json",
    "network_to_json",
    "network_to_dict",
    "findings_from_json",
    "findings_to_json",
]

Number = int | float | Fraction
Cpt: TypeAlias = tuple[tuple[Number, ...], ...]
Findings: TypeAlias = Mapping[str, str]

FORMAT_KEY = "veritas-net/1"
ROW_SUM_TOLERANCE = 1e-9
ENUMERATION_LIMIT = 10_000_000


@dataclass(frozen=True)
class Node:
    """One network variable: its states, parents, and CPT rows."""

    id: str
    states: tuple[str, ...]
    parents: tuple[str, ...] = ()
    cpt: Cpt = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(
            self, "cpt", tuple(tuple(row) for row in self.cpt)
        )

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise DomainError(
                f"node {self.id!r} has no state {state!r}; states are {self.states}"
            ) from None


@dataclass(frozen=True)
class Network:
    """A validated DAG of nodes; construct via `build_network`."""

    nodes: tuple[Node, ...]
    topological_order: tuple[str, ...] = field(repr=False)

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise DomainError(f"no node {node_id!r} in network")

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)


@dataclass(frozen=True)
class Posterior:
    """Marginal distribution per node given the findings used to compute it."""

    marginals: dict[str, dict[str, Number]]

    def __getitem__(self, node_id: str) -> dict[str, Number]:
        return self.marginals[node_id]

    def prob(self, node_id: str, state: str) -> Number:
        return self.marginals[node_id][state]

    def as_dict(self) -> dict[str, dict[str, float]]:
        return {
            node: {state: float(p) for state, p in dist.items()}
            for node, dist in self.marginals.items()
        }


def _expected_rows(node: Node, by_id: Mapping[str, Node]) -> int:
    count = 1
    for pid in node.parents:
        count *= len(by_id[pid].states)
    return count


def _validate(nodes: Sequence[Node]) -> list[str]:
    problems: list[str] = []
    by_id: dict[str, Node] = {}
    for n in nodes:
        if not n.id:
            problems.append("node with empty id")
        if n.id in by_id:
            problems.append(f"duplicate node id {n.id!r}")
        by_id[n.id] = n
        if len(n.states) < 2:
            problems.append(f"node {n.id!r} needs at least 2 states")
        if len(set(n.states)) != len(n.states):
            problems.append(f"node {n.id!r} has duplicate state labels")
        for pid in n.parents:
            if pid not in {m.id for m in nodes}:
                problems.append(f"node {n.id!r} references unknown parent {pid!r}")
        if len(set(n.parents)) != len(n.parents):
            problems.append(f"node {n.id!r} lists a parent twice")

    # cycle check (Kahn) over the resolvable part of the graph
    indeg = {n.id: 0 for n in nodes}
    children = defaultdict(list)
    for n in nodes:
        for pid in n.parents:
            if pid in indeg:
                indeg[n.id] += 1
                children[pid].append(n.id)
    queue = [nid for nid, d in indeg.items() if d == 0]
    seen = 0
    while queue:
        nid = queue.pop()
        seen += 1
        for child in children[nid]:
            indeg[child] -= 1
            if indeg[child] == 0:
                queue.append(child)
    if seen != len(indeg):
        cyclic = sorted(nid for nid, d in indeg.items() if d > 0)
        problems.append(f"cycle through nodes {cyclic}")
        return problems  # CPT shape checks assume a resolvable graph

    for n in nodes:
        if any(pid not in by_id for pid in n.parents):
            continue
        expected = _expected_rows(n, by_id)
        if len(n.cpt) != expected:
            problems.append(
                f"node {n.id!r} needs {expected} cpt rows "
                f"(one per parent-state combination), got {len(n.cpt)}"
            )
            continue
        for i, row in enumerate(n.cpt):
            if len(row) != len(n.states):
                problems.append(
                    f"node {n.id!r} cpt row {i} has {len(row)} entries "
                    f"for {len(n.states)} states"
                )
                continue
            if any(not 0 <= v <= 1 for v in row):
                problems.append(f"node {n.id!r} cpt row {i} has entries outside [0, 1]")
            elif abs(sum(row) - 1) > ROW_SUM_TOLERANCE:
                problems.append(
                    f"node {n.id!r} cpt row {i} sums to {float(sum(row)):.12g}, not 1"
                )
    return problems


def _topological_order(nodes: Sequence[Node]) -> tuple[str, ...]:
    remaining = {n.id: set(n.parents) for n in nodes}
    order: list[str] = []
    while remaining:
        ready = sorted(nid for nid, deps in remaining.items() if not deps)
        for nid in ready:
            order.append(nid)
            del remaining[nid]
        for deps in remaining.values():
            deps.difference_update(ready)
    return tuple(order)


def build_network(spec: Mapping | Iterable[Node]) -> Network:
    """Validate a network description and return the immutable Network.

    Accepts either an iterable of `Node` or a mapping in the JSON file
    shape (``{"nodes": [{"id": ..., "states": ..., "parents": ...,
    "cpt": ...}]}``).  Every structural problem found is reported at
    once in the raised `NetworkValidationError`; CPT rows are rejected,
    never renormalized.
    """
    if isinstance(spec, Mapping):
        try:
            raw = spec["nodes"]
            nodes = [
                Node(
                    id=str(item["id"]),
                    states=tuple(str(s) for s in item["states"]),
                    parents=tuple(str(p) for p in item.get("parents", ())),
                    cpt=tuple(tuple(row) for row in item["cpt"]),
                )
                for item in raw
            ]
        except (KeyError, TypeError) as exc:
            raise NetworkValidationError([f"malformed network description: {exc}"])
    else:
        nodes = list(spec)
    problems = _validate(nodes)
    if problems:
        raise NetworkValidationError(problems)
    return Network(tuple(nodes), _topological_order(nodes))


# ---------------------------------------------------------------------------
# Factors and variable elimination


@dataclass
class _Factor:
    vars: tuple[str, ...]
    cards: tuple[int, ...]
    values: list[Number]  # row-major over vars

    @property
    def size(self) -> int:
        return math.prod(self.cards)


def _node_factor(net: Network, node: Node) -> _Factor:
    """CPT as a factor over (parents..., node), honoring row order."""
    scope = node.parents + (node.id,)
    cards = tuple(
        len(net.node(v).states) for v in scope
    )
    values: list[Number] = []
    for row in node.cpt:
        values.extend(row)
    return _Factor(scope, cards, values)


def _reduce(f: _Factor, var: str, idx: int) -> _Factor:
    """Slice a factor to one state of var, dropping var from the scope."""
    if var not in f.vars:
        return f
    axis = f.vars.index(var)
    new_vars = f.vars[:axis] + f.vars[axis + 1:]
    new_cards = f.cards[:axis] + f.cards[axis + 1:]
    inner = math.prod(f.cards[axis + 1:])
    block = f.cards[axis] * inner
    values = []
    for outer_start in range(0, len(f.values), block):
        start = outer_start + idx * inner
        values.extend(f.values[start:start + inner])
    return _Factor(new_vars, new_cards, values)


def _multiply(a: _Factor, b: _Factor) -> _Factor:
    if not a.vars:
        scalar = a.values[0]
        return _Factor(b.vars, b.cards, [scalar * v for v in b.values])
    if not b.vars:
        return _multiply(b, a)
    vars_out = a.vars + tuple(v for v in b.vars if v not in a.vars)
    card_of = dict(zip(a.vars, a.cards)) | dict(zip(b.vars, b.cards))
    cards_out = tuple(card_of[v] for v in vars_out)
    a_pos = [vars_out.index(v) for v in a.vars]
    b_pos = [vars_out.index(v) for v in b.vars]
    values = []
    for combo in itertools.product(*(range(c) for c in cards_out)):
        ia = 0
        for pos, card in zip(a_pos, a.cards):
            ia = ia * card + combo[pos]
        ib = 0
        for pos, card in zip(b_pos, b.cards):
            ib = ib * card + combo[pos]
        values.append(a.values[ia] * b.values[ib])
    return _Factor(vars_out, cards_out, values)


def _marginalize(f: _Factor, var: str) -> _Factor:
    axis = f.vars.index(var)
    new_vars = f.vars[:axis] + f.vars[axis + 1:]
    new_cards = f.cards[:axis] + f.cards[axis + 1:]
    inner = math.prod(f.cards[axis + 1:])
    block = f.cards[axis] * inner
    values = [0] * math.prod(new_cards) if new_cards else [0]
    out = 0
    for outer_start in range(0, len(f.values), block):
        for j in range(inner):
            total = 0
            for k in range(f.cards[axis]):
                total += f.values[outer_start + k * inner + j]
            values[out] = total
            out += 1
    return _Factor(new_vars, new_cards, values)


def _elimination_order(
    scopes: list[tuple[str, ...]], keep: set[str]
) -> list[str]:
    """Min-degree ordering over the factor interaction graph."""
    neighbors: dict[str, set[str]] = defaultdict(set)
    for scope in scopes:
        for v in scope:
            neighbors[v].update(set(scope) - {v})
    active = set(neighbors) - keep
    order = []
    while active:
        v = min(active, key=lambda u: (len(neighbors[u] & active), u))
        order.append(v)
        linked = neighbors[v] - {v}
        for u in linked:
            neighbors[u].update(linked - {u})
            neighbors[u].discard(v)
        active.remove(v)
    return order


def _validate_findings(net: Network, findings: Findings) -> dict[str, int]:
    observed: dict[str, int] = {}
    for node_id, state in findings.items():
        node = net.node(node_id)  # raises DomainError for unknown node
        observed[node_id] = node.state_index(state)
    return observed


def _ve_factor(
    net: Network, observed: Mapping[str, int], targets: tuple[str, ...]
) -> _Factor:
    """Unnormalized factor over targets after eliminating everything else."""
    factors = []
    for node in net.nodes:
        f = _node_factor(net, node)
        for var, idx in observed.items():
            f = _reduce(f, var, idx)
        factors.append(f)
    keep = set(targets)
    order = _elimination_order([f.vars for f in factors], keep)
    for var in order:
        touching = [f for f in factors if var in f.vars]
        rest = [f for f in factors if var not in f.vars]
        merged = touching[0]
        for f in touching[1:]:
            merged = _multiply(merged, f)
        factors = rest + [_marginalize(merged, var)]
    result = _Factor((), (), [1])
    for f in factors:
        result = _multiply(result, f)
    # align scope order with the requested targets
    for want in targets:
        if want not in result.vars:
            raise AssertionError(f"target {want!r} lost during elimination")
    if result.vars != targets:
        card_of = dict(zip(result.vars, result.cards))
        cards = tuple(card_of[v] for v in targets)
        values = []
        for combo in itertools.product(*(range(c) for c in cards)):
            at = dict(zip(targets, combo))
            idx = 0
            for v, c in zip(result.vars, result.cards):
                idx = idx * c + at[v]
            values.append(result.values[idx])
        result = _Factor(targets, cards, values)
    return result


def infer_marginals(net: Network, findings: Findings) -> Posterior:
    """Exact posterior marginals for every node, by variable elimination.

    Finding nodes get point mass on the observed state.  Raises
    `ImpossibleFindingsError` if the findings have probability zero.
    """
    observed = _validate_findings(net, findings)
    norm = _ve_factor(net, observed, ()).values[0]
    if norm == 0:
        raise ImpossibleFindingsError(dict(findings))
    marginals: dict[str, dict[str, Number]] = {}
    for node in net.nodes:
        if node.id in observed:
            idx = observed[node.id]
            marginals[node.id] = {
                s: (1 if i == idx else 0) for i, s in enumerate(node.states)
            }
            continue
        f = _ve_factor(net, observed, (node.id,))
        z = sum(f.values)
        marginals[node.id] = {
            s: f.values[i] / z for i, s in enumerate(node.states)
        }
    return Posterior(marginals)


def query_conditional(
    net: Network, target_node: str, target_state: str, findings: Findings
) -> Number:
    """P(target_node = target_state | findings), exact."""
    node = net.node(target_node)
    idx = node.state_index(target_state)
    observed = _validate_findings(net, findings)
    if target_node in observed:
        return 1 if observed[target_node] == idx else 0
    f = _ve_factor(net, observed, (target_node,))
    z = sum(f.values)
    if z == 0:
        raise ImpossibleFindingsError(dict(findings))
    return f.values[idx] / z


def enumerate_joint(net: Network, findings: Findings) -> Posterior:
    """Posterior marginals by brute-force enumeration of the full joint.

    The independent oracle for `infer_marginals`: one nested loop over
    every joint assignment, nothing clever.  Rational CPTs give exact
    rational posteriors.  Refuses joint state spaces above 10**7.
    """
    space = math.prod(len(n.states) for n in net.nodes)
    if space > ENUMERATION_LIMIT:
        raise StateSpaceTooLargeError(
            f"joint has {space} states, above the {ENUMERATION_LIMIT} limit"
        )
    observed = _validate_findings(net, findings)
    order = [net.node(nid) for nid in net.topological_order]
    position = {node.id: i for i, node in enumerate(order)}
    parent_slots = {
        node.id: [
            (position[p], len(net.node(p).states)) for p in node.parents
        ]
        for node in order
    }
    ranges = [
        (observed[node.id],) if node.id in observed else range(len(node.states))
        for node in order
    ]
    totals: list[list[Number]] = [[0] * len(node.states) for node in order]
    norm: Number = 0
    for assignment in itertools.product(*ranges):
        p: Number = 1
        for i, node in enumerate(order):
            row = 0
            for pos, card in parent_slots[node.id]:
                row = row * card + assignment[pos]
            p *= node.cpt[row][assignment[i]]
            if p == 0:
                break
        if p == 0:
            continue
        norm += p
        for i in range(len(order)):
            totals[i][assignment[i]] += p
    if norm == 0:
        raise ImpossibleFindingsError(dict(findings))
    marginals: dict[str, dict[str, Number]] = {}
    for node in net.nodes:
        i = position[node.id]
        if node.id in observed:
            idx = observed[node.id]
            marginals[node.id] = {
                s: (1 if j == idx else 0) for j, s in enumerate(node.states)
            }
        else:
            marginals[node.id] = {
                s: totals[i][j] / norm for j, s in enumerate(node.states)
            }
    return Posterior(marginals)


# ---------------------------------------------------------------------------
# The box-and-testimony builtin


def box_testimony_network(
    n_extractions: int = 5,
    p_truth: Number = Fraction(5, 6),
    n_balls_b2_white: int = 1,
    n_balls: int = 13,
) -> Network:
    """Two box compositions, repeated draws, and a fallible witness per draw.

    Box B1 holds only white balls; B2 holds ``n_balls_b2_white`` white
    out of ``n_balls``.  Each extraction node Ei reports the drawn
    color; each testimony node EiT repeats it truthfully with
    probability ``p_truth``.  Priors on the boxes are even.
    """
    if n_extractions < 1:
        raise DomainError(f"n_extractions must be >= 1, got {n_extractions}")
    if not 0 <= p_truth <= 1:
        raise DomainError(f"p_truth must be in [0, 1], got {p_truth}")
    if not 1 <= n_balls:
        raise DomainError(f"n_balls must be >= 1, got {n_balls}")
    if not 0 <= n_balls_b2_white <= n_balls:
        raise DomainError(
            f"n_balls_b2_white must be in [0, {n_balls}], got {n_balls_b2_white}"
        )
    p_white_b2 = Fraction(n_balls_b2_white, n_balls)
    half = Fraction(1, 2)
    nodes = [Node("Box", ("B1", "B2"), (), ((half, half),))]
    for i in range(1, n_extractions + 1):
        nodes.append(
            Node(
                f"E{i}",
                ("W", "B"),
                ("Box",),
                ((1, 0), (p_white_b2, 1 - p_white_b2)),
            )
        )
        nodes.append(
            Node(
                f"E{i}T",
                ("W", "B"),
                (f"E{i}",),
                ((p_truth, 1 - p_truth), (1 - p_truth, p_truth)),
            )
        )
    return build_network(nodes)


_BUILTIN_PATTERN = re.compile(r"^box-testimony-(\d+)$")
BUILTIN_EXAMPLES = ("box-testimony-1", "box-testimony-5")


def builtin_network(name: str) -> Network:
    """Resolve a builtin network name like ``box-testimony-5``.

    The trailing integer is the number of draw/witness pairs.
    """
    m = _BUILTIN_PATTERN.match(name)
    if not m:
        raise DomainError(
            f"unknown builtin network {name!r}; expected box-testimony-N"
        )
    n = int(m.group(1))
    if not 1 <= n <= 50:
        raise DomainError(f"builtin extraction count must be 1..50, got {n}")
    return box_testimony_network(n_extractions=n)


# ---------------------------------------------------------------------------
# File formats


def network_to_dict(net: Network) -> dict:
    return {
        "format": FORMAT_KEY,
        "nodes": [
            {
                "id": n.id,
                "states": list(n.states),
                "parents": list(n.parents),
                "cpt": [[float(v) for v in row] for row in n.cpt],
            }
            for n in net.nodes
        ],
    }


def network_to_json(net: Network, indent: int | None = 2) -> str:
    return json.dumps(network_to_dict(net), indent=indent)


def network_from_json(text: str) -> Network:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkValidationError([f"not valid JSON: {exc}"])
    if not isinstance(data, dict) or data.get("format") != FORMAT_KEY:
        raise NetworkValidationError(
            [f'missing or unsupported "format" key (expected "{FORMAT_KEY}")']
        )
    return build_network(data)


def findings_to_json(findings: Findings, indent: int | None = 2) -> str:
    return json.dumps({"format": FORMAT_KEY, "findings": dict(findings)}, indent=indent)


def findings_from_json(text: str) -> dict[str, str]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkValidationError([f"not valid JSON: {exc}"])
    if not isinstance(data, dict) or data.get("format") != FORMAT_KEY:
        raise NetworkValidationError(
            [f'missing or unsupported "format" key (expected "{FORMAT_KEY}")']
        )
    findings = data.get("findings")
    if not isinstance(findings, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in findings.items()
    ):
        raise NetworkValidationError(['"findings" must map node ids to state labels'])
    return findings
