import math

import numpy as np
import pytest

from prodtail import (
    GrowingTree,
    grow_uniform_attachment,
    log_phi_all,
    log_phi_direct,
    root_finding_trial,
    substream,
    top_k_central,
)


def path3():
    return GrowingTree(3, np.array([0, 0, 1, 2]))


def star4():
    return GrowingTree(4, np.array([0, 0, 1, 1, 1]))


def test_path_hand_values():
    tree = path3()
    assert log_phi_direct(tree, 2) == pytest.approx(0.0, abs=1e-15)
    assert log_phi_direct(tree, 1) == pytest.approx(math.log(2.0), rel=1e-12)
    assert log_phi_direct(tree, 3) == pytest.approx(math.log(2.0), rel=1e-12)
    table = log_phi_all(tree)
    assert table.log_phi[2] == 0.0
    assert table.log_phi[1] == table.log_phi[3] == math.log(2.0)
    # exact tie between the endpoints breaks toward the smaller label
    assert top_k_central(table, 3) == [2, 1, 3]
    assert top_k_central(table, 1) == [2]


def test_star_hand_values():
    tree = star4()
    assert log_phi_direct(tree, 1) == pytest.approx(0.0, abs=1e-15)
    assert log_phi_direct(tree, 2) == pytest.approx(math.log(3.0), rel=1e-12)
    table = log_phi_all(tree)
    assert top_k_central(table, 1) == [1]
    assert table.log_phi[3] == pytest.approx(math.log(3.0), rel=1e-12)


def test_growth_shapes_and_validation():
    rng = substream(5, "grow")
    single = grow_uniform_attachment(1, rng)
    assert single.n == 1
    pair = grow_uniform_attachment(2, rng)
    assert pair.parent[2] == 1
    with pytest.raises(ValueError):
        grow_uniform_attachment(0, rng)
    with pytest.raises(ValueError):
        GrowingTree(3, np.array([0, 0, 1, 3]))  # parent[3] must be < 3
    with pytest.raises(ValueError):
        GrowingTree(2, np.array([0, 0]))  # wrong length


def test_growth_uniform_frequencies():
    rng = substream(5, "grow-freq")
    n_trees = 30_000
    hits = 0
    for _ in range(n_trees):
        tree = grow_uniform_attachment(3, rng)
        hits += int(tree.parent[3] == 1)
    rate = hits / n_trees
    se = math.sqrt(0.25 / n_trees)
    assert abs(rate - 0.5) < 4.0 * se


def test_reroot_matches_direct():
    rng = substream(9, "reroot-unit")
    for _ in range(40):
        n = int(rng.integers(1, 65))
        tree = grow_uniform_attachment(n, rng)
        table = log_phi_all(tree)
        for v in range(1, n + 1):
            direct = log_phi_direct(tree, v)
            assert table.log_phi[v] == pytest.approx(direct, rel=1e-9, abs=1e-9)
        assert (table.log_phi[1:] >= 0.0).all()


def test_centroid_property():
    # the score minimizer never leaves a component larger than n/2
    rng = substream(9, "centroid")
    for _ in range(20):
        n = int(rng.integers(2, 200))
        tree = grow_uniform_attachment(n, rng)
        table = log_phi_all(tree)
        v = top_k_central(table, 1)[0]
        sizes = table.subtree_size
        components = [int(sizes[w]) for w in range(2, n + 1) if tree.parent[w] == v]
        if v != 1:
            components.append(n - int(sizes[v]))
        assert max(components) <= n / 2


def test_subtree_size_conservation():
    rng = substream(9, "sizes")
    for _ in range(10):
        n = int(rng.integers(1, 33))
        tree = grow_uniform_attachment(n, rng)
        table = log_phi_all(tree)
        depth = np.zeros(n + 1, dtype=int)
        for v in range(2, n + 1):
            depth[v] = depth[tree.parent[v]] + 1
        assert int(table.subtree_size[2:].sum()) == int(depth.sum())


def test_top_k_validation():
    table = log_phi_all(path3())
    with pytest.raises(ValueError):
        top_k_central(table, 0)
    with pytest.raises(ValueError):
        top_k_central(table, 4)
    assert len(top_k_central(table, 3)) == 3


def test_log_phi_direct_invalid_vertex():
    with pytest.raises(ValueError):
        log_phi_direct(path3(), 0)
    with pytest.raises(ValueError):
        log_phi_direct(path3(), 4)


def test_trial_k_equals_n():
    res = root_finding_trial(20, 20, 25, substream(4, "trial-full"))
    assert res.rate == 1.0
    assert res.std_error == 0.0
    assert res.successes == 25


def test_trial_two_vertices():
    # both vertices tie on the 2-path; the label tie-break always picks 1
    res = root_finding_trial(2, 1, 500, substream(4, "trial-pair"))
    assert res.rate == 1.0


def test_trial_validation():
    rng = substream(4, "trial-bad")
    with pytest.raises(ValueError):
        root_finding_trial(10, 0, 5, rng)
    with pytest.raises(ValueError):
        root_finding_trial(10, 11, 5, rng)
    with pytest.raises(ValueError):
        root_finding_trial(10, 2, 0, rng)


def test_degenerate_sizes():
    one = log_phi_all(grow_uniform_attachment(1, substream(4, "deg")))
    assert one.log_phi[1] == 0.0
    assert top_k_central(one, 1) == [1]
    two = log_phi_all(GrowingTree(2, np.array([0, 0, 1])))
    assert two.log_phi[1] == two.log_phi[2] == 0.0
