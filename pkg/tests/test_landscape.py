import json

import numpy as np
import pytest

from conftest import all_strings, brute_fitness, brute_locus_value
from nkcollab.landscape import (
    NkModel,
    as_solution,
    fitness,
    fitness_many,
    flip_delta,
    from_dict,
    generate_model,
    load_model,
    local_score,
    locus_value,
    locus_values,
    save_model,
    to_dict,
)

# brute-force enumeration of the (n=4, k=1, seed=42) model, frozen
SEED42_FITNESS = {
    (0, 0, 0, 0): 0.608487461240412,
    (0, 0, 0, 1): 0.6425112591091882,
    (0, 0, 1, 0): 0.6767542352024328,
    (0, 0, 1, 1): 0.7107780330712089,
    (0, 1, 0, 0): 0.4948713430920721,
    (0, 1, 0, 1): 0.534584052976927,
    (0, 1, 1, 0): 0.4688704991976292,
    (0, 1, 1, 1): 0.5085832090824841,
    (1, 0, 0, 0): 0.4173823182344787,
    (1, 0, 0, 1): 0.4514061161032549,
    (1, 0, 1, 0): 0.48564909219649954,
    (1, 0, 1, 1): 0.5196728900652757,
    (1, 1, 0, 0): 0.5644349237364201,
    (1, 1, 0, 1): 0.604147633621275,
    (1, 1, 1, 0): 0.5384340798419771,
    (1, 1, 1, 1): 0.5781467897268321,
}


def test_seed42_all_strings(small_model):
    assert small_model.neighbors.tolist() == [[1], [3], [1], [1]]
    for bits, expected in SEED42_FITNESS.items():
        assert fitness(small_model, bits) == pytest.approx(expected, abs=1e-15)


def test_seed42_local_score_pair(small_model):
    zeros = [0, 0, 0, 0]
    direct = (brute_locus_value(small_model, zeros, 0) + brute_locus_value(small_model, zeros, 2)) / 2
    assert local_score(small_model, zeros, {0, 2}) == pytest.approx(direct, abs=1e-15)
    assert direct == pytest.approx(0.6146979720719818, abs=1e-15)


@pytest.mark.parametrize("n,k,seed", [(1, 0, 3), (5, 0, 1), (6, 2, 7), (8, 3, 11), (10, 9, 2), (12, 4, 5)])
def test_exhaustive_against_brute_force(n, k, seed):
    m = generate_model(n, k, seed)
    sols = np.array(all_strings(n))
    got = fitness_many(m, sols)
    want = np.array([brute_fitness(m, s) for s in sols])
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-14)
    assert ((got >= 0) & (got <= 1)).all()


def test_paper_scale_shape():
    m = generate_model(250, 7, 1)
    assert m.payoff_tables.shape == (250, 256)
    assert m.neighbors.shape == (250, 7)
    for i, row in enumerate(m.neighbors):
        assert len(set(row.tolist())) == 7 and i not in row


def test_single_locus_model():
    m = generate_model(1, 0, 9)
    assert fitness(m, [0]) == m.payoff_tables[0, 0]
    assert fitness(m, [1]) == m.payoff_tables[0, 1]


def test_constant_tables_give_half():
    m = NkModel(3, 1, np.array([[1], [2], [0]]), np.full((3, 4), 0.5))
    assert fitness(m, [1, 0, 1]) == 0.5


def test_same_seed_identical_model():
    a, b = generate_model(30, 5, 77), generate_model(30, 5, 77)
    assert a == b
    assert a.payoff_tables.tobytes() == b.payoff_tables.tobytes()
    assert generate_model(30, 5, 78) != a


def test_neighbors_cover_all_other_loci():
    # uniform choice among the other n-1 loci: every locus but i shows up for some seed
    seen = np.zeros((6, 6), dtype=int)
    for seed in range(200):
        m = generate_model(6, 2, seed)
        for i in range(6):
            seen[i, m.neighbors[i]] += 1
    assert (np.diag(seen) == 0).all()
    off = seen[~np.eye(6, dtype=bool)]
    assert off.min() > 0.6 * off.mean()


@pytest.mark.parametrize("n,k", [(0, 0), (3, 3), (3, -1)])
def test_rejects_bad_parameters(n, k):
    with pytest.raises(ValueError):
        generate_model(n, k, 0)


def test_validation_of_model_fields():
    with pytest.raises(ValueError):
        NkModel(2, 1, np.array([[0], [0]]), np.zeros((2, 4)))
    with pytest.raises(ValueError):
        NkModel(2, 1, np.array([[1], [0]]), np.full((2, 4), 1.5))
    with pytest.raises(ValueError):
        NkModel(2, 1, np.array([[1], [0]]), np.zeros((2, 3)))


def test_length_mismatch_and_bad_bits(small_model):
    with pytest.raises(ValueError):
        fitness(small_model, [0, 1, 0])
    with pytest.raises(ValueError):
        fitness(small_model, [0, 1, 2, 0])
    with pytest.raises(IndexError):
        locus_value(small_model, [0, 0, 0, 0], 4)
    with pytest.raises(ValueError):
        local_score(small_model, [0, 0, 0, 0], set())


def test_k0_locus_depends_on_own_bit_only():
    m = generate_model(5, 0, 4)
    rng = np.random.default_rng(0)
    for _ in range(20):
        s = rng.integers(0, 2, 5)
        for i in range(5):
            assert locus_value(m, s, i) == m.payoff_tables[i, s[i]]


def test_locality_and_mean(rng):
    m = generate_model(20, 4, 8)
    for _ in range(50):
        s = rng.integers(0, 2, 20).astype(np.uint8)
        i = int(rng.integers(20))
        outside = sorted(set(range(20)) - {i} - set(m.neighbors[i].tolist()))
        j = int(rng.choice(outside))
        t = s.copy()
        t[j] ^= 1
        assert locus_value(m, s, i) == locus_value(m, t, i)
        vals = locus_values(m, s)
        assert vals[i] == brute_locus_value(m, s, i)
        assert np.mean(vals) == pytest.approx(fitness(m, s), abs=1e-15)
        assert local_score(m, s, range(20)) == pytest.approx(fitness(m, s), abs=1e-15)
        assert local_score(m, s, {i}) == locus_value(m, s, i)


def test_fitness_is_pure(small_model):
    s = np.array([1, 0, 1, 1], dtype=np.uint8)
    first = fitness(small_model, s)
    for _ in range(5):
        assert fitness(small_model, s) == first
    assert s.tolist() == [1, 0, 1, 1]


@pytest.mark.parametrize("n,k,seed", [(16, 3, 0), (40, 7, 1), (64, 10, 2)])
def test_flip_delta_matches_recomputation(n, k, seed):
    m = generate_model(n, k, seed)
    rng = np.random.default_rng(seed)
    s = rng.integers(0, 2, n).astype(np.uint8)
    value = fitness(m, s) * n
    for _ in range(1000):
        j = int(rng.integers(n))
        d = flip_delta(m, s, j)
        s[j] ^= 1
        full = fitness(m, s) * n
        assert d == pytest.approx(full - value, abs=1e-12)
        value += d
        assert value == pytest.approx(full, abs=1e-12)


def test_dependents_map(rng):
    m = generate_model(12, 3, 6)
    ptr, locus, mask = m.dependents
    for j in range(12):
        readers = sorted(i for i in range(12) if j == i or j in m.neighbors[i])
        assert sorted(locus[ptr[j]:ptr[j + 1]].tolist()) == readers


def test_round_trip_json(tmp_path):
    m = generate_model(25, 6, 2024)
    path = tmp_path / "model.json"
    save_model(m, path)
    back = load_model(path)
    assert back == m
    assert back.payoff_tables.tobytes() == m.payoff_tables.tobytes()
    assert from_dict(json.loads(json.dumps(to_dict(m)))) == m


def test_model_arrays_are_read_only():
    m = generate_model(5, 2, 0)
    with pytest.raises(ValueError):
        m.payoff_tables[0, 0] = 0.3


def test_as_solution_dtype():
    s = as_solution([True, False, True], 3)
    assert s.dtype == np.uint8 and s.tolist() == [1, 0, 1]
