import itertools
import math

import numpy as np
import pytest

from formrelax.bn import (
    BayesNet,
    Cpt,
    Dag,
    StructureSearchConfig,
    bic_score,
    enumerate_joint,
    fit_cpts,
    infer,
    learn_structure,
    learn_structure_detailed,
)
from formrelax.bn.scoring import family_score
from formrelax.bn.graph import EncodedTable
from formrelax.errors import EmptyData, JointTooLarge


def worked_example_net() -> BayesNet:
    """Three binary nodes: type -> revenue, type -> tax, revenue -> tax.

    States are (Required, Optional) in the order (yes, no) used throughout;
    the tables are the fixture for the hand-derived posterior of 0.6.
    """
    dag = Dag(
        nodes=("company_type", "revenue", "tax_id"),
        parents={
            "company_type": (),
            "revenue": ("company_type",),
            "tax_id": ("company_type", "revenue"),
        },
    )
    states = {
        "company_type": ["Required", "Optional"],
        "revenue": ["Required", "Optional"],
        "tax_id": ["Required", "Optional"],
    }
    cpts = {
        "company_type": Cpt("company_type", (), np.array([[0.2, 0.8]])),
        "revenue": Cpt(
            "revenue",
            ("company_type",),
            np.array([[0.4, 0.6], [0.1, 0.9]]),
        ),
        "tax_id": Cpt(
            "tax_id",
            ("company_type", "revenue"),
            np.array([[0.9, 0.1], [0.4, 0.6], [0.4, 0.6], [0.1, 0.9]]),
        ),
    }
    return BayesNet(dag=dag, cpts=cpts, state_spaces=states)


def random_net(rng, max_nodes=6, max_states=4) -> BayesNet:
    n = int(rng.integers(1, max_nodes + 1))
    nodes = tuple(f"n{i}" for i in range(n))
    parents = {}
    for j in range(n):
        pool = list(nodes[:j])
        rng.shuffle(pool)
        parents[nodes[j]] = tuple(sorted(pool[: rng.integers(0, min(3, j) + 1)]))
    dag = Dag(nodes=nodes, parents=parents)
    states = {node: [f"s{k}" for k in range(rng.integers(2, max_states + 1))] for node in nodes}
    cpts = {}
    for node in nodes:
        q = 1
        for p in parents[node]:
            q *= len(states[p])
        table = rng.dirichlet(np.ones(len(states[node])), size=q)
        cpts[node] = Cpt(node, parents[node], table)
    return BayesNet(dag=dag, cpts=cpts, state_spaces=states)


class TestDag:
    def test_cycle_rejected(self):
        with pytest.raises(ValueError):
            Dag(nodes=("a", "b"), parents={"a": ("b",), "b": ("a",)})

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            Dag(nodes=("a",), parents={"a": ("a",)})

    def test_topological_order(self):
        dag = Dag(nodes=("a", "b", "c"), parents={"b": ("a",), "c": ("b",)})
        order = dag.topological_order()
        assert order.index("a") < order.index("b") < order.index("c")


class TestBicScore:
    def test_single_binary_node_all_one_state(self):
        rows = [{"x": "s0"} for _ in range(4)]
        table = EncodedTable.from_rows(rows, state_spaces={"x": ["s0", "s1"]})
        dag = Dag(nodes=("x",), parents={})
        # LL = 4 ln(1) = 0, penalty = (2-1) * ln(4)/2
        assert bic_score(dag, table) == pytest.approx(-math.log(4) / 2)

    def test_independent_nodes_edge_never_pays(self):
        rows = [
            {"x": x, "y": y}
            for x, y in [
                ("0", "0"), ("0", "0"), ("0", "1"), ("0", "1"),
                ("1", "0"), ("1", "0"), ("1", "1"), ("1", "1"),
            ]
        ]
        empty = Dag(nodes=("x", "y"), parents={})
        edge = Dag(nodes=("x", "y"), parents={"y": ("x",)})
        # hand count: LL identical (perfect independence), penalty differs
        # by one extra parameter: (2-1)*2 - (2-1)*1 = 1 unit of ln(8)/2
        s_empty, s_edge = bic_score(empty, rows), bic_score(edge, rows)
        assert s_edge - s_empty == pytest.approx(-math.log(8) / 2)
        assert s_edge < s_empty

    def test_hand_counted_values(self):
        rows = [
            {"x": x, "y": y}
            for x, y in [
                ("0", "0"), ("0", "0"), ("0", "1"), ("0", "1"),
                ("1", "0"), ("1", "0"), ("1", "1"), ("1", "1"),
            ]
        ]
        empty = Dag(nodes=("x", "y"), parents={})
        expected = 2 * (8 * math.log(0.5) - math.log(8) / 2)
        assert bic_score(empty, rows) == pytest.approx(expected)

    def test_decomposability(self):
        rng = np.random.default_rng(5)
        rows = [
            {"a": str(rng.integers(0, 2)), "b": str(rng.integers(0, 3)), "c": str(rng.integers(0, 2))}
            for _ in range(60)
        ]
        dag = Dag(nodes=("a", "b", "c"), parents={"b": ("a",), "c": ("a", "b")})
        table = EncodedTable.from_rows(rows, nodes=["a", "b", "c"])
        total = bic_score(dag, table)
        parts = sum(family_score(table, n, dag.parents[n]) for n in dag.nodes)
        assert total == pytest.approx(parts)

    def test_empty_data(self):
        dag = Dag(nodes=("x",), parents={})
        with pytest.raises(EmptyData):
            bic_score(dag, [])


class TestLearnStructure:
    def test_copied_field_gets_an_edge(self):
        rng = np.random.default_rng(0)
        rows = []
        for _ in range(100):
            v = str(rng.integers(0, 2))
            rows.append({"x": v, "y": v})
        dag = learn_structure(rows, StructureSearchConfig(seed=1))
        assert dag.edges() in ([("x", "y")], [("y", "x")])

    def test_independent_fields_stay_unconnected(self):
        rng = np.random.default_rng(42)
        rows = [
            {"a": str(rng.integers(0, 2)), "b": str(rng.integers(0, 2)), "c": str(rng.integers(0, 2))}
            for _ in range(300)
        ]
        table = EncodedTable.from_rows(rows, nodes=["a", "b", "c"])
        # scoring oracle: every single-edge dag scores below the empty graph
        empty_score = bic_score(Dag(nodes=("a", "b", "c"), parents={}), table)
        for x, y in itertools.permutations(("a", "b", "c"), 2):
            single = Dag(nodes=("a", "b", "c"), parents={y: (x,)})
            assert bic_score(single, table) < empty_score
        dag = learn_structure(table, StructureSearchConfig(seed=2))
        assert dag.edges() == []

    def test_single_field(self):
        rows = [{"only": "a"}, {"only": "b"}]
        dag = learn_structure(rows, StructureSearchConfig())
        assert dag.nodes == ("only",) and dag.edges() == []

    def test_monotone_traces(self):
        rng = np.random.default_rng(3)
        rows = []
        for _ in range(200):
            a = rng.integers(0, 2)
            b = (a + rng.integers(0, 2)) % 3
            c = rng.integers(0, 2)
            rows.append({"a": str(a), "b": str(b), "c": str(c)})
        result = learn_structure_detailed(rows, StructureSearchConfig(seed=4))
        for trace in result.traces:
            assert all(s2 >= s1 for s1, s2 in zip(trace, trace[1:]))

    def test_deterministic_for_seed(self):
        rng = np.random.default_rng(9)
        rows = [
            {"a": str(rng.integers(0, 3)), "b": str(rng.integers(0, 2)), "c": str(rng.integers(0, 2))}
            for _ in range(150)
        ]
        cfg = StructureSearchConfig(seed=77, restarts=4)
        assert learn_structure(rows, cfg) == learn_structure(rows, cfg)

    def test_reversal_can_be_disabled(self):
        rng = np.random.default_rng(0)
        rows = []
        for _ in range(100):
            v = str(rng.integers(0, 2))
            rows.append({"x": v, "y": v})
        cfg = StructureSearchConfig(seed=1, enable_reversal=False)
        dag = learn_structure(rows, cfg)
        assert dag.edges() in ([("x", "y")], [("y", "x")])

    def test_max_parents_respected(self):
        rng = np.random.default_rng(8)
        rows = []
        for _ in range(400):
            bits = [str(rng.integers(0, 2)) for _ in range(4)]
            parity = str(sum(map(int, bits)) % 2)
            rows.append(dict({f"b{i}": v for i, v in enumerate(bits)}, parity=parity))
        cfg = StructureSearchConfig(seed=0, max_parents=2)
        dag = learn_structure(rows, cfg)
        assert all(len(ps) <= 2 for ps in dag.parents.values())


class TestFitCpts:
    def test_worked_tables_recovered_without_smoothing(self):
        # counts engineered to reproduce the fixture tables exactly
        data = [{"t": "Required"}] * 2 + [{"t": "Optional"}] * 8
        dag = Dag(nodes=("t",), parents={})
        net = fit_cpts(dag, data, laplace_alpha=0.0)
        required = net.state_spaces["t"].index("Required")
        assert net.cpts["t"].table[0][required] == pytest.approx(0.2)
        assert net.cpts["t"].table[0].sum() == pytest.approx(1.0)

    def test_unseen_parent_configuration_uniform(self):
        rows = [{"p": "a", "c": "x"}, {"p": "a", "c": "y"}]
        dag = Dag(nodes=("p", "c"), parents={"c": ("p",)})
        net = fit_cpts(
            dag,
            rows,
            laplace_alpha=1.0,
            state_spaces={"p": ["a", "b"], "c": ["x", "y"]},
        )
        row_b = net.cpts["c"].table[1]
        assert row_b == pytest.approx([0.5, 0.5])

    def test_alpha_zero_degenerate(self):
        rows = [{"x": "only"} for _ in range(5)]
        dag = Dag(nodes=("x",), parents={})
        net = fit_cpts(dag, rows, laplace_alpha=0.0, state_spaces={"x": ["only", "other"]})
        assert net.cpts["x"].table[0] == pytest.approx([1.0, 0.0])

    def test_rows_normalized(self):
        rng = np.random.default_rng(2)
        rows = [
            {"a": str(rng.integers(0, 3)), "b": str(rng.integers(0, 4))}
            for _ in range(50)
        ]
        dag = Dag(nodes=("a", "b"), parents={"b": ("a",)})
        net = fit_cpts(dag, rows)
        assert np.allclose(net.cpts["b"].table.sum(axis=1), 1.0, atol=1e-9)

    def test_fitted_net_reproduces_empirical_conditionals(self):
        # pins the row-major parent coding end to end: counting, fitting,
        # elimination, and enumeration must all agree with raw frequencies
        rng = np.random.default_rng(31)
        rows = [
            {
                "a": f"a{rng.integers(0, 2)}",
                "b": f"b{rng.integers(0, 3)}",
                "c": f"c{rng.integers(0, 2)}",
            }
            for _ in range(500)
        ]
        dag = Dag(nodes=("a", "b", "c"), parents={"c": ("a", "b")})
        net = fit_cpts(dag, rows, laplace_alpha=0.0)
        for a in ("a0", "a1"):
            for b in ("b0", "b1", "b2"):
                matching = [r for r in rows if r["a"] == a and r["b"] == b]
                empirical = sum(r["c"] == "c1" for r in matching) / len(matching)
                ve = infer(net, {"a": a, "b": b}, "c").prob_of("c1")
                brute = enumerate_joint(net, {"a": a, "b": b}, "c").prob_of("c1")
                assert ve == pytest.approx(empirical, abs=1e-12)
                assert brute == pytest.approx(empirical, abs=1e-12)


class TestInfer:
    def test_worked_posterior(self):
        net = worked_example_net()
        posterior = infer(net, {"company_type": "Required"}, "tax_id")
        assert posterior.prob_of("Required") == pytest.approx(0.6, abs=1e-12)

    def test_empty_evidence_gives_prior(self):
        net = worked_example_net()
        posterior = infer(net, {}, "company_type")
        assert posterior.probs == pytest.approx([0.2, 0.8], abs=1e-12)

    def test_posterior_sums_to_one(self):
        net = worked_example_net()
        for ev in [{}, {"revenue": "Optional"}, {"company_type": "Optional", "revenue": "Required"}]:
            posterior = infer(net, ev, "tax_id")
            assert posterior.probs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_zero_probability_evidence_flagged(self):
        dag = Dag(nodes=("x", "y", "z"), parents={"y": ("x",)})
        cpts = {
            "x": Cpt("x", (), np.array([[1.0, 0.0]])),
            "y": Cpt("y", ("x",), np.array([[1.0, 0.0], [0.0, 1.0]])),
            "z": Cpt("z", (), np.array([[0.5, 0.5]])),
        }
        states = {"x": ["0", "1"], "y": ["0", "1"], "z": ["0", "1"]}
        net = BayesNet(dag=dag, cpts=cpts, state_spaces=states)
        evidence = {"x": "0", "y": "1"}  # impossible under the tables
        ve = infer(net, evidence, "z")
        brute = enumerate_joint(net, evidence, "z")
        assert ve.zero_evidence and brute.zero_evidence
        assert ve.probs == pytest.approx([0.5, 0.5])
        assert brute.probs == pytest.approx([0.5, 0.5])

    def test_query_in_evidence_rejected(self):
        net = worked_example_net()
        with pytest.raises(ValueError):
            infer(net, {"tax_id": "Required"}, "tax_id")

    def test_marginalization_consistency(self):
        net = worked_example_net()
        # joint over (tax_id, revenue) given company_type: summing revenue out
        # must give the direct posterior
        direct = infer(net, {"company_type": "Required"}, "tax_id")
        total = np.zeros(2)
        for i, rev in enumerate(["Required", "Optional"]):
            sub = infer(
                net, {"company_type": "Required", "revenue": rev}, "tax_id"
            )
            weight = infer(net, {"company_type": "Required"}, "revenue").probs[i]
            total += sub.probs * weight
        assert total == pytest.approx(direct.probs, abs=1e-12)


class TestEnumerationOracle:
    def test_matches_on_worked_example_single_evidence(self):
        net = worked_example_net()
        for node in net.dag.nodes:
            for state in net.state_spaces[node]:
                for query in net.dag.nodes:
                    if query == node:
                        continue
                    a = infer(net, {node: state}, query)
                    b = enumerate_joint(net, {node: state}, query)
                    assert a.probs == pytest.approx(b.probs, abs=1e-9)

    def test_single_node_prior(self):
        net = worked_example_net()
        posterior = enumerate_joint(net, {}, "company_type")
        assert posterior.probs == pytest.approx([0.2, 0.8])

    def test_joint_too_large(self):
        rng = np.random.default_rng(0)
        nodes = tuple(f"n{i}" for i in range(21))
        dag = Dag(nodes=nodes, parents={})
        cpts = {
            n: Cpt(n, (), rng.dirichlet(np.ones(2), size=1)) for n in nodes
        }
        net = BayesNet(
            dag=dag, cpts=cpts, state_spaces={n: ["0", "1"] for n in nodes}
        )
        with pytest.raises(JointTooLarge):
            enumerate_joint(net, {}, "n0")

    def test_equivalence_on_random_nets(self):
        rng = np.random.default_rng(2024)
        for _ in range(30):
            net = random_net(rng)
            nodes = list(net.dag.nodes)
            query = nodes[rng.integers(0, len(nodes))]
            others = [n for n in nodes if n != query]
            rng.shuffle(others)
            n_ev = int(rng.integers(0, len(others) + 1))
            evidence = {
                n: net.state_spaces[n][rng.integers(0, len(net.state_spaces[n]))]
                for n in others[:n_ev]
            }
            a = infer(net, evidence, query)
            b = enumerate_joint(net, evidence, query)
            assert a.probs == pytest.approx(b.probs, abs=1e-9)
