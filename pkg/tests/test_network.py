"""Belief-network construction, validation, and exact inference."""

from __future__ import annotations

import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veritas.errors import (
    DomainError,
    ImpossibleFindingsError,
    NetworkValidationError,
    StateSpaceTooLargeError,
)
from veritas.network import (
    Node,
    box_testimony_network,
    build_network,
    enumerate_joint,
    findings_from_json,
    findings_to_json,
    infer_marginals,
    network_from_json,
    network_to_dict,
    network_to_json,
    query_conditional,
)


@pytest.fixture(scope="module")
def box_net():
    return box_testimony_network()


# ---------------------------------------------------------------------------
# Golden posteriors for the box-and-witness network (exact rationals)


def test_prior_marginals_without_findings(box_net):
    post = enumerate_joint(box_net, {})
    assert post.prob("Box", "B1") == F(1, 2)
    assert post.prob("E1", "W") == F(7, 13)
    assert post.prob("E1T", "W") == F(41, 78)


def test_single_testimony_updates_box_to_65_82(box_net):
    post = infer_marginals(box_net, {"E1T": "W"})
    assert post.prob("Box", "B1") == F(65, 82)
    assert post.prob("E1", "W") == F(35, 41)
    # the testimony node itself is pinned
    assert post.prob("E1T", "W") == 1
    assert post.prob("E1T", "B") == 0


def test_two_confirming_testimonies(box_net):
    post = infer_marginals(box_net, {"E1T": "W", "E2T": "W"})
    assert post.prob("E1", "W") == F(2155, 2257)


def test_mixed_testimony_posteriors(box_net):
    findings = {"E1T": "W", "E2T": "W", "E3T": "B"}
    post = infer_marginals(box_net, findings)
    assert post.prob("Box", "B1") == F(54925, 72554)
    assert post.prob("E1", "W") == F(30055, 36277)
    assert post.prob("E3", "B") == F(8670, 36277)
    # every extraction still looks majority white, the contradicted one least so
    assert post.prob("E1", "W") > post.prob("E3", "W") > F(1, 2)


def test_black_draw_falsifies_all_white_box(box_net):
    findings = {"E1T": "W", "E2T": "W", "E3T": "B", "E4": "B"}
    post = infer_marginals(box_net, findings)
    assert post.prob("Box", "B1") == 0
    assert post.prob("Box", "B2") == 1
    assert post.prob("E1", "B") == F(12, 17)
    assert post.prob("E3", "B") == F(60, 61)
    assert post.prob("E3", "W") == F(1, 61)
    assert post.prob("E5", "W") == F(1, 13)


def test_testimony_of_black_matches_direct_channel_arithmetic(box_net):
    # 13 * (1/6) / (1 + 12 * (5/6)) reduced: the fallible denial is weaker
    # evidence against the all-white box than a seen black ball would be.
    post = infer_marginals(box_net, {"E1T": "B"})
    assert post.prob("Box", "B1") == F(13, 74)
    odds = post.prob("Box", "B1") / post.prob("Box", "B2")
    assert odds == F(13, 61)


def test_conditional_independence_given_the_box(box_net):
    # Once the box is known, one draw says nothing about the next.
    p = query_conditional(box_net, "E2", "W", {"E1": "W", "Box": "B2"})
    assert p == F(1, 13)
    assert query_conditional(box_net, "E2", "W", {"Box": "B2"}) == F(1, 13)


def test_query_conditional_of_observed_node_is_point_mass(box_net):
    assert query_conditional(box_net, "E1", "W", {"E1": "W"}) == 1
    assert query_conditional(box_net, "E1", "B", {"E1": "W"}) == 0


def test_marginals_sum_to_one_exactly(box_net):
    post = infer_marginals(box_net, {"E1T": "W", "E3T": "B"})
    for node, dist in post.marginals.items():
        assert sum(dist.values()) == 1, node


def test_elimination_matches_enumeration_exactly(box_net):
    for findings in (
        {},
        {"E1T": "W"},
        {"E1T": "W", "E2T": "W", "E3T": "B"},
        {"E1": "B", "E2T": "W"},
        {"Box": "B2"},
    ):
        fast = infer_marginals(box_net, findings)
        slow = enumerate_joint(box_net, findings)
        assert fast.marginals == slow.marginals, findings


def test_impossible_findings_raise(box_net):
    with pytest.raises(ImpossibleFindingsError):
        infer_marginals(box_net, {"Box": "B1", "E1": "B"})
    with pytest.raises(ImpossibleFindingsError):
        enumerate_joint(box_net, {"Box": "B1", "E1": "B"})
    with pytest.raises(ImpossibleFindingsError):
        query_conditional(box_net, "E2", "W", {"Box": "B1", "E1": "B"})


def test_unknown_node_or_state_in_findings(box_net):
    with pytest.raises(DomainError):
        infer_marginals(box_net, {"E9": "W"})
    with pytest.raises(DomainError):
        infer_marginals(box_net, {"E1": "Purple"})


# ---------------------------------------------------------------------------
# Builder parameterization


def test_builder_shape_and_parameters():
    net = box_testimony_network(n_extractions=2)
    assert net.node_ids == ("Box", "E1", "E1T", "E2", "E2T")
    tiny = box_testimony_network(n_extractions=1, p_truth=F(9, 10))
    assert tiny.node("E1T").cpt == ((F(9, 10), F(1, 10)), (F(1, 10), F(9, 10)))


def test_builder_rejects_bad_parameters():
    with pytest.raises(DomainError):
        box_testimony_network(n_extractions=0)
    with pytest.raises(DomainError):
        box_testimony_network(p_truth=1.2)
    with pytest.raises(DomainError):
        box_testimony_network(n_balls_b2_white=14)
    with pytest.raises(DomainError):
        box_testimony_network(n_balls=0)


def test_builder_degenerate_compositions():
    all_black_b2 = box_testimony_network(n_balls_b2_white=0)
    post = infer_marginals(all_black_b2, {"E1": "B"})
    assert post.prob("Box", "B2") == 1

    both_all_white = box_testimony_network(n_balls_b2_white=13)
    assert infer_marginals(both_all_white, {"E1": "W"}).prob("Box", "B1") == F(1, 2)
    with pytest.raises(ImpossibleFindingsError):
        infer_marginals(both_all_white, {"E1": "B"})


@given(
    n_extractions=st.integers(min_value=1, max_value=4),
    n_white=st.integers(min_value=0, max_value=13),
)
@settings(max_examples=40, deadline=None)
def test_single_white_draw_posterior_closed_form(n_extractions, n_white):
    net = box_testimony_network(n_extractions=n_extractions, n_balls_b2_white=n_white)
    p2 = F(n_white, 13)
    assert query_conditional(net, "Box", "B1", {"E1": "W"}) == 1 / (1 + p2)


# ---------------------------------------------------------------------------
# Structural validation


def _node_dicts():
    return [
        {"id": "A", "states": ["a0", "a1"], "parents": [], "cpt": [[0.3, 0.7]]},
        {
            "id": "B",
            "states": ["b0", "b1"],
            "parents": ["A"],
            "cpt": [[0.5, 0.5], [0.9, 0.1]],
        },
    ]


def test_build_from_mapping():
    net = build_network({"nodes": _node_dicts()})
    assert net.node_ids == ("A", "B")
    post = infer_marginals(net, {})
    assert post.prob("B", "b0") == pytest.approx(0.3 * 0.5 + 0.7 * 0.9)


def test_validation_collects_every_problem_at_once():
    nodes = [
        Node("A", ("x",), (), ((1.0,),)),                # one state
        Node("A", ("x", "y"), (), ((0.5, 0.5),)),         # duplicate id
        Node("B", ("x", "x"), ("Ghost",), ((0.5, 0.5),)), # dup states, missing parent
    ]
    with pytest.raises(NetworkValidationError) as err:
        build_network(nodes)
    text = str(err.value)
    for fragment in ("at least 2 states", "duplicate node id", "duplicate state labels", "unknown parent"):
        assert fragment in text


def test_row_sums_are_rejected_not_renormalized():
    nodes = [Node("A", ("x", "y"), (), ((0.2, 0.2),))]
    with pytest.raises(NetworkValidationError, match="sums to 0.4"):
        build_network(nodes)


def test_row_sum_tolerance_accepts_float_noise():
    third = 1 / 3
    nodes = [Node("A", ("x", "y", "z"), (), ((third, third, third),))]
    build_network(nodes)  # 3 * (1/3) is off by an ulp, inside tolerance


def test_entries_outside_unit_interval_rejected():
    nodes = [Node("A", ("x", "y"), (), ((1.5, -0.5),))]
    with pytest.raises(NetworkValidationError, match="outside"):
        build_network(nodes)


def test_wrong_row_count_rejected():
    nodes = [
        Node("A", ("x", "y"), (), ((0.5, 0.5),)),
        Node("B", ("x", "y"), ("A",), ((0.5, 0.5),)),  # needs 2 rows
    ]
    with pytest.raises(NetworkValidationError, match="needs 2 cpt rows"):
        build_network(nodes)


def test_cycles_rejected():
    nodes = [
        Node("A", ("x", "y"), ("B",), ((0.5, 0.5), (0.5, 0.5))),
        Node("B", ("x", "y"), ("A",), ((0.5, 0.5), (0.5, 0.5))),
    ]
    with pytest.raises(NetworkValidationError, match="cycle"):
        build_network(nodes)


def test_first_parent_varies_slowest_in_cpt_rows():
    # A has 2 states, B has 3; C's rows must run (a0,b0)(a0,b1)(a0,b2)(a1,b0)...
    rows = [
        [1.0, 0.0], [0.9, 0.1], [0.8, 0.2],
        [0.1, 0.9], [0.2, 0.8], [0.3, 0.7],
    ]
    net = build_network(
        [
            Node("A", ("a0", "a1"), (), ((0.5, 0.5),)),
            Node("B", ("b0", "b1", "b2"), (), ((F(1, 3),) * 3,)),
            Node("C", ("c0", "c1"), ("A", "B"), tuple(tuple(r) for r in rows)),
        ]
    )
    assert query_conditional(net, "C", "c0", {"A": "a1", "B": "b1"}) == 0.2
    assert query_conditional(net, "C", "c0", {"A": "a0", "B": "b2"}) == 0.8


def test_declaration_order_does_not_matter():
    shuffled = build_network(
        [
            Node("C", ("c0", "c1"), ("A",), ((0.9, 0.1), (0.2, 0.8))),
            Node("A", ("a0", "a1"), (), ((0.25, 0.75),)),
        ]
    )
    post = infer_marginals(shuffled, {})
    assert post.prob("C", "c0") == pytest.approx(0.25 * 0.9 + 0.75 * 0.2)


def test_enumeration_refuses_oversized_state_spaces():
    nodes = [
        Node(f"N{i}", ("0", "1"), (), ((0.5, 0.5),)) for i in range(24)
    ]
    net = build_network(nodes)
    with pytest.raises(StateSpaceTooLargeError):
        enumerate_joint(net, {})


# ---------------------------------------------------------------------------
# Dual-route agreement on randomized networks


def _random_network(rng: random.Random):
    n_nodes = rng.randint(2, 8)
    cards = [rng.randint(2, 4) for _ in range(n_nodes)]
    while 1 < n_nodes and _joint_size(cards) > 4096:
        cards[cards.index(max(cards))] = 2
    nodes = []
    for i in range(n_nodes):
        states = tuple(f"s{k}" for k in range(cards[i]))
        pool = list(range(i))
        rng.shuffle(pool)
        parents = tuple(f"v{j}" for j in sorted(pool[: rng.randint(0, min(3, i))]))
        n_rows = 1
        for p in parents:
            n_rows *= cards[int(p[1:])]
        cpt = tuple(_random_row(rng, cards[i]) for _ in range(n_rows))
        nodes.append(Node(f"v{i}", states, parents, cpt))
    return build_network(nodes)


def _joint_size(cards):
    size = 1
    for c in cards:
        size *= c
    return size


def _random_row(rng: random.Random, width: int):
    raw = [rng.random() + 0.01 for _ in range(width)]
    if rng.random() < 0.15:
        raw[rng.randrange(width)] = 0.0  # exercise hard zeros
    total = sum(raw)
    row = [v / total for v in raw]
    row[-1] = max(0.0, 1.0 - sum(row[:-1]))  # force the row sum exact
    return tuple(row)


def _random_findings(rng: random.Random, net):
    findings = {}
    for node in net.nodes:
        if rng.random() < 0.3:
            findings[node.id] = rng.choice(node.states)
    return findings


def test_elimination_agrees_with_enumeration_on_random_dags():
    rng = random.Random(20240817)
    checked = 0
    for _ in range(200):
        net = _random_network(rng)
        findings = _random_findings(rng, net)
        try:
            slow = enumerate_joint(net, findings)
        except ImpossibleFindingsError:
            with pytest.raises(ImpossibleFindingsError):
                infer_marginals(net, findings)
            continue
        fast = infer_marginals(net, findings)
        for node_id, dist in slow.marginals.items():
            for state, p in dist.items():
                assert fast.prob(node_id, state) == pytest.approx(p, abs=1e-9)
        checked += 1
    assert checked > 100  # most random findings should be possible


# ---------------------------------------------------------------------------
# File formats


def test_network_json_round_trip(box_net):
    text = network_to_json(box_net)
    again = network_from_json(text)
    assert again.node_ids == box_net.node_ids
    # CPTs go through floats, so compare inference numerically
    a = infer_marginals(box_net, {"E1T": "W"})
    b = infer_marginals(again, {"E1T": "W"})
    assert b.prob("Box", "B1") == pytest.approx(a.prob("Box", "B1"), abs=1e-12)


def test_network_json_requires_format_key(box_net):
    stripped = network_to_dict(box_net)
    del stripped["format"]
    with pytest.raises(NetworkValidationError, match="format"):
        network_from_json(json.dumps(stripped))
    with pytest.raises(NetworkValidationError, match="JSON"):
        network_from_json("{not json")


def test_findings_json_round_trip():
    findings = {"E1T": "W", "E3T": "B"}
    assert findings_from_json(findings_to_json(findings)) == findings
    with pytest.raises(NetworkValidationError, match="format"):
        findings_from_json(json.dumps({"findings": findings}))
    bad = {"format": "veritas-net/1", "findings": {"E1": 3}}
    with pytest.raises(NetworkValidationError, match="state labels"):
        findings_from_json(json.dumps(bad))


def test_posterior_as_dict_is_json_ready(box_net):
    post = infer_marginals(box_net, {"E1T": "W"})
    plain = post.as_dict()
    assert isinstance(plain["Box"]["B1"], float)
    assert plain["Box"]["B1"] == pytest.approx(65 / 82)
    json.dumps(plain)
