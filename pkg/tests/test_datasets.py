import json

import numpy as np
import pytest

from smpnet.datasets import (
    Dataset,
    Record,
    generate_cycle_dataset,
    generate_multitask_dataset,
    permute_record,
    read_dataset,
    recheck_labels,
    write_dataset,
)
from smpnet.errors import ContractError, DatasetParseError, GenerationError
from smpnet.graph import Permutation
from smpnet.oracles import count_k_cycles, multitask_targets


@pytest.fixture(scope="module")
def cycles4():
    return generate_cycle_dataset(4, 12, 200, seed=0)


def test_cycle_balance_small():
    d = generate_cycle_dataset(4, 12, 10, seed=0)
    assert sum(r.label for r in d) == 5
    assert d.task == "cycles4"


@pytest.mark.parametrize("count", [1, 7, 31])
def test_cycle_balance_odd(count):
    d = generate_cycle_dataset(4, 8, count, seed=2)
    pos = sum(r.label for r in d)
    assert abs(pos - (count - pos)) <= 1


def test_cycle_labels_recheck(cycles4):
    assert recheck_labels(cycles4) == []
    for r in cycles4:
        assert r.label == int(count_k_cycles(r.graph, 4) > 0)
        assert r.graph.n == 12


def test_cycle_classes_look_alike(cycles4):
    pos = [r.graph for r in cycles4 if r.label]
    neg = [r.graph for r in cycles4 if not r.label]
    deg_pos = np.mean([g.d_avg for g in pos])
    deg_neg = np.mean([g.d_avg for g in neg])
    assert abs(deg_pos - deg_neg) / max(deg_pos, deg_neg) < 0.05
    # both classes contain cycles, so "has any cycle" is not a shortcut
    assert all(g.m >= g.n - count_components(g) + 1 for g in pos + neg)


def count_components(g):
    parent = list(range(g.n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for i, j in g.edges:
        parent[find(i)] = find(j)
    return len({find(i) for i in range(g.n)})


@pytest.mark.parametrize("k", [6, 8])
def test_longer_cycles(k):
    d = generate_cycle_dataset(k, 16, 20, seed=1)
    assert recheck_labels(d) == []


def test_cycle_argument_errors():
    with pytest.raises(ContractError):
        generate_cycle_dataset(5, 12, 10, 0)
    with pytest.raises(ContractError):
        generate_cycle_dataset(6, 5, 10, 0)


def test_infeasible_balance_reports_ratio():
    # on 8 nodes an 8-cycle is a Hamiltonian cycle, which drags positive degrees up
    with pytest.raises(GenerationError, match="positive"):
        generate_cycle_dataset(8, 8, 40, seed=0)


def test_cycle_determinism(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_dataset(generate_cycle_dataset(4, 12, 30, seed=5), a)
    write_dataset(generate_cycle_dataset(4, 12, 30, seed=5), b)
    assert a.read_bytes() == b.read_bytes()
    write_dataset(generate_cycle_dataset(4, 12, 30, seed=6), b)
    assert a.read_bytes() != b.read_bytes()


def test_multitask_labels_and_features():
    d = generate_multitask_dataset(40, 5, 24, seed=0)
    assert recheck_labels(d) == []
    for r in d:
        assert 5 <= r.graph.n <= 24
        assert r.graph.c_x == 2
        assert r.graph.x[:, 0].sum() == 1.0
        src = int(np.argmax(r.graph.x[:, 0]))
        assert r.label == multitask_targets(r.graph, src, r.graph.x[:, 1])


def test_multitask_fixed_size():
    d = generate_multitask_dataset(20, 5, 5, seed=1)
    assert {r.graph.n for r in d} == {5}


def test_multitask_size_errors():
    with pytest.raises(ContractError):
        generate_multitask_dataset(5, 2, 6, 0)
    with pytest.raises(ContractError):
        generate_multitask_dataset(5, 8, 6, 0)


@pytest.mark.parametrize("task", ["cycles", "multitask"])
def test_round_trip(tmp_path, task):
    d = generate_cycle_dataset(4, 12, 20, 3) if task == "cycles" else generate_multitask_dataset(20, 5, 12, 3)
    path = tmp_path / "d.jsonl"
    write_dataset(d, path)
    assert read_dataset(path) == d


def test_read_without_sidecar(tmp_path):
    path = tmp_path / "plain.jsonl"
    path.write_text('{"n": 3, "edges": [[0, 1]], "label": 0}\n')
    d = read_dataset(path)
    assert d.task == "cycles" and len(d) == 1


def test_edges_normalised_on_read(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"n": 3, "edges": [[2, 1], [1, 0], [0, 1]], "label": 1}\n')
    assert read_dataset(path).records[0].graph.edges == ((0, 1), (1, 2))


@pytest.mark.parametrize(
    "line, msg",
    [
        ('{"n": 3, "label": 0}', "edges"),
        ('{"n": 3, "edges": [[0, 3]], "label": 0}', "out of range"),
        ("{not json", "invalid JSON"),
    ],
)
def test_parse_errors_carry_line_number(tmp_path, line, msg):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"n": 2, "edges": [[0, 1]], "label": 1}\n\n' + line + "\n")
    with pytest.raises(DatasetParseError, match=msg) as info:
        read_dataset(path)
    assert info.value.lineno == 3
    assert "line 3" in str(info.value)


def test_subset_and_permute_record():
    d = generate_multitask_dataset(5, 6, 6, 0)
    sub = d.subset([4, 0])
    assert isinstance(sub, Dataset) and sub.records[0] == d.records[4]
    r = d.records[0]
    perm = Permutation.random(6, np.random.default_rng(0))
    p = permute_record(r, perm)
    src = int(np.argmax(p.graph.x[:, 0]))
    ref = multitask_targets(p.graph, src, p.graph.x[:, 1])
    np.testing.assert_array_equal(p.label.dist, ref.dist)
    np.testing.assert_array_equal(p.label.ecc, ref.ecc)
    np.testing.assert_allclose(p.label.lap, ref.lap, atol=1e-12)
    assert p.label.radius == pytest.approx(ref.radius, abs=1e-8)
    assert isinstance(p, Record)


def test_sidecar_metadata(tmp_path):
    path = tmp_path / "d.jsonl"
    write_dataset(generate_cycle_dataset(4, 12, 4, 9), path)
    meta = json.loads((tmp_path / "d.jsonl.meta.json").read_text())
    assert meta["task"] == "cycles4" and meta["seed"] == 9 and meta["count"] == 4
    assert len(path.read_text().splitlines()) == 4
