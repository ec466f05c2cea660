import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kkps.errors import IndexOutOfRange, NonPositive, OrderingViolation, ParamError
from kkps.model import (
    InitDist,
    ModelParams,
    SaturationWarning,
    build_world,
    generate_world,
    load_world,
    save_world,
    utility_matrix,
    utility_of,
    validate_params,
    world_from_dict,
    world_to_dict,
)
from oracles import utility_triple_sum


def test_validate_unsaturated_no_warning():
    p = ModelParams(k=80, m=750, n=1500, a=20, b=5)
    with warnings.catch_warnings():
        warnings.simplefilter("error", SaturationWarning)
        assert validate_params(p) is p
    assert not p.saturates


def test_validate_saturated_b_warns_but_passes():
    p = ModelParams(k=80, m=750, n=1500, a=20, b=20)
    with pytest.warns(SaturationWarning):
        assert validate_params(p) is p
    assert p.saturates


def test_validate_k_above_m():
    with pytest.raises(OrderingViolation) as exc:
        validate_params(ModelParams(k=5, m=3, n=10, a=2, b=1))
    assert exc.value.values == {"k": 5, "m": 3}
    assert "k <= m" in str(exc.value)


@pytest.mark.parametrize("kw, ineq", [
    (dict(k=2, m=11, n=10, a=2, b=1), "m <= n"),
    (dict(k=2, m=3, n=10, a=2, b=3), "b <= a"),
    (dict(k=2, m=3, n=10, a=11, b=1), "a <= n"),
])
def test_validate_other_orderings(kw, ineq):
    with pytest.raises(OrderingViolation, match=ineq):
        validate_params(ModelParams(**kw))


@pytest.mark.parametrize("field", ["k", "m", "n", "a", "b"])
def test_validate_nonpositive(field):
    kw = dict(k=2, m=3, n=10, a=2, b=1)
    kw[field] = 0
    with pytest.raises(NonPositive):
        validate_params(ModelParams(**kw))


def test_validate_rejects_unknown_scope():
    with pytest.raises(ParamError):
        validate_params(ModelParams(k=2, m=3, n=10, a=2, b=1, scope="nearby"))


def test_nu_rounds_half_up():
    assert ModelParams(k=80, m=750, n=1500, a=1, b=1).nu == 19  # 18.75
    assert ModelParams(k=160, m=750, n=1500, a=1, b=1).nu == 9  # 9.375
    assert ModelParams(k=120, m=750, n=1500, a=1, b=1).nu == 13  # 12.5


def test_generate_nnz_small():
    p = ModelParams(k=2, m=4, n=6, a=1, b=1)
    world = generate_world(p, np.random.default_rng(0))
    assert world.nnz_utility() == 12


def test_generate_k1_ones():
    p = ModelParams(k=1, m=2, n=3, a=1, b=1, q_dist="ones")
    world = generate_world(p, np.random.default_rng(0))
    np.testing.assert_array_equal(world.D, [[1, 1, 1]])
    np.testing.assert_array_equal(world.R, [[1], [1]])
    np.testing.assert_array_equal(world.U, np.ones((2, 3)))


def test_injected_matrices(hand_world):
    np.testing.assert_array_equal(hand_world.U, [[0.5, 0, 1.5, 0], [0, 8, 0, 0]])
    assert list(hand_world.topic_of) == [0, 1]


def test_utility_of(hand_world):
    assert utility_of(hand_world, 0, 2) == 1.5
    assert utility_of(hand_world, 0, 1) == 0.0
    with pytest.raises(IndexOutOfRange):
        utility_of(hand_world, 2, 0)
    with pytest.raises(IndexOutOfRange):
        utility_of(hand_world, 0, -1)


def test_utility_of_k1_world():
    world = generate_world(ModelParams(k=1, m=2, n=3, a=1, b=1, q_dist="ones"),
                           np.random.default_rng(3))
    assert all(utility_of(world, i, d) == 1 for i in range(2) for d in range(3))


def test_build_world_rejects_multi_topic_users():
    with pytest.raises(ParamError):
        build_world([[1, 0], [0, 1]], [[1, 1]])


def test_topic_sizes_balanced():
    p = ModelParams(k=80, m=750, n=1500, a=1, b=1)
    world = generate_world(p, np.random.default_rng(5))
    sizes = np.bincount(world.topic_of, minlength=80)
    assert sizes.min() == 750 // 80 and sizes.max() == -(-750 // 80)
    assert world.nnz_utility() == 750 * 19


small_params = st.builds(
    lambda k, dm, dn, seed: ModelParams(k=k, m=k + dm, n=k + dm + dn, a=1, b=1, seed=seed),
    st.integers(1, 4), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2**32),
)


@settings(max_examples=60, deadline=None)
@given(small_params)
def test_world_invariants(p):
    world = generate_world(p, np.random.default_rng(p.seed))
    nu = p.nu
    assert all(np.count_nonzero(row) == nu for row in world.D)
    assert all(np.count_nonzero(row) == 1 for row in world.R)
    assert world.nnz_utility() == p.m * nu
    relevant = world.D[world.topic_of] > 0
    np.testing.assert_array_equal(world.U > 0, relevant)
    # triple-sum oracle over every topic
    np.testing.assert_allclose(world.U, utility_triple_sum(world.D.tolist(), world.R.tolist()),
                               rtol=0, atol=0)
    np.testing.assert_array_equal(world.U, utility_matrix(world.D, world.R))
    assert ((world.D == 0) | ((world.D > 0) & (world.D <= 1))).all()


def test_generate_is_deterministic():
    p = ModelParams(k=7, m=30, n=60, a=1, b=1)
    w1 = generate_world(p, np.random.default_rng(11))
    w2 = generate_world(p, np.random.default_rng(11))
    for name in ("D", "R", "topic_of", "U"):
        assert getattr(w1, name).tobytes() == getattr(w2, name).tobytes()


def test_world_json_roundtrip(tmp_path):
    p = ModelParams(k=3, m=5, n=9, a=1, b=1)
    world = generate_world(p, np.random.default_rng(2))
    path = tmp_path / "w.json"
    save_world(world, path)
    back = load_world(path)
    for name in ("D", "R", "topic_of", "U"):
        assert getattr(back, name).tobytes() == getattr(world, name).tobytes()
    d = world_to_dict(world)
    assert d["format"] == "kkps-world/1"
    assert all(len(t) == 3 for t in d["D"] + d["R"])
    assert len(d["D"]) == 3 * p.nu and len(d["R"]) == 5
    bad = dict(d, topic_of=[0] * 5)
    with pytest.raises(ParamError):
        world_from_dict(bad)


def test_init_dist_parse():
    assert InitDist.parse("poisson:3") == InitDist("poisson", lam=3.0)
    assert InitDist.parse("normal:5,2") == InitDist("normal", mu=5.0, sigma=2.0)
    assert InitDist.parse("uniform") == InitDist()
    assert InitDist.parse("normal:4,1").label() == "normal:4,1"
