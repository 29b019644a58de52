"""Antisymmetric tensor fields: index machinery, evaluation, serialization."""

import math

import numpy as np
import pytest

from kyano.fields import AntisymTensorField, levi_civita


def test_levi_civita_3():
    eps = levi_civita(3)
    assert eps[0, 1, 2] == 1.0
    assert eps[1, 0, 2] == -1.0
    assert eps[2, 0, 1] == 1.0
    assert eps[0, 0, 1] == 0.0
    assert np.count_nonzero(eps) == 6


def test_levi_civita_norm():
    # eps contracted with itself counts the permutations
    for n in range(2, 6):
        eps = levi_civita(n)
        assert np.einsum(eps, range(n), eps, range(n)) == math.factorial(n)


def test_levi_civita_read_only():
    eps = levi_civita(4)
    with pytest.raises(ValueError):
        eps[0, 1, 2, 3] = 5.0


def test_antisymmetry_exact_rank2():
    field = AntisymTensorField(3, 2, {"12": "x3", "13": "-x2", "23": "x1"})
    rng = np.random.default_rng(0)
    for _ in range(20):
        pt = rng.uniform(-2, 2, 3)
        f = field.values_at(pt)
        assert np.array_equal(f, -f.T)


def test_antisymmetry_exact_rank3():
    field = AntisymTensorField(4, 3, {(0, 1, 2): "x4", (1, 2, 3): "x1"})
    f = field.values_at([1.0, 2.0, 3.0, 4.0])
    for a in range(2):
        assert np.array_equal(f, -f.swapaxes(a, a + 1))
    assert f[0, 1, 2] == 4.0
    assert f[1, 0, 2] == -4.0
    assert f[2, 0, 1] == 4.0


def test_string_and_tuple_keys_agree():
    by_string = AntisymTensorField(3, 2, {"12": "x1"})
    by_tuple = AntisymTensorField(3, 2, {(0, 1): "x1"})
    pt = [0.5, 0.0, 0.0]
    assert np.array_equal(by_string.values_at(pt), by_tuple.values_at(pt))


def test_comma_keys_for_wide_dims():
    field = AntisymTensorField(11, 2, {"1,11": "2"})
    f = field.values_at(np.zeros(11))
    assert f[0, 10] == 2.0 and f[10, 0] == -2.0
    key, _ = next(iter(field.to_dict()["components"].items()))
    assert key == "1,11"


def test_keys_must_increase():
    with pytest.raises(ValueError):
        AntisymTensorField(3, 2, {"21": "x1"})
    with pytest.raises(ValueError):
        AntisymTensorField(3, 2, {"11": "x1"})


def test_key_out_of_range():
    with pytest.raises(ValueError):
        AntisymTensorField(3, 2, {"14": "x1"})


def test_constant_field_validates_antisymmetry():
    good = np.array([[0.0, 2.0], [-2.0, 0.0]])
    f = AntisymTensorField.constant(2, 2, good)
    assert np.array_equal(f.values_at([9.9, -3.0]), good)
    bad = np.array([[0.0, 2.0], [2.0, 0.0]])
    with pytest.raises(ValueError):
        AntisymTensorField.constant(2, 2, bad)


def test_numeric_components():
    f = AntisymTensorField(4, 2, {(0, 1): 1.0, (2, 3): 1.0})
    v = f.values_at(np.zeros(4))
    assert v[0, 1] == 1.0 and v[2, 3] == 1.0 and v[1, 0] == -1.0


def test_callable_components_not_serializable():
    f = AntisymTensorField(3, 2, {(0, 1): lambda pt: pt[2]})
    assert f.values_at([0, 0, 7.0])[0, 1] == 7.0
    assert not f.is_serializable
    with pytest.raises(ValueError):
        f.to_dict()


def test_json_roundtrip():
    field = AntisymTensorField(3, 2, {"12": "x3", "13": "-x2", "23": "x1"})
    clone = AntisymTensorField.from_dict(field.to_dict())
    rng = np.random.default_rng(1)
    for _ in range(10):
        pt = rng.uniform(-1, 1, 3)
        assert np.array_equal(field.values_at(pt), clone.values_at(pt))


def test_from_dict_without_schema_tag():
    obj = {"dim": 3, "rank": 2, "components": {"12": "x1"}}
    f = AntisymTensorField.from_dict(obj)
    assert f.values_at([2.0, 0, 0])[0, 1] == 2.0


def test_jacobian_matches_finite_differences():
    field = AntisymTensorField(3, 2, {"12": "x1*x3", "13": "sin(x2)", "23": "x1^2"})
    rng = np.random.default_rng(2)
    h = 1e-6
    for _ in range(5):
        pt = rng.uniform(-1, 1, 3)
        jac = field.jacobian_at(pt)
        for a in range(3):
            up, dn = pt.copy(), pt.copy()
            up[a] += h
            dn[a] -= h
            fd = (field.values_at(up) - field.values_at(dn)) / (2 * h)
            assert np.abs(jac[a] - fd).max() < 1e-8


def test_rank_bounds():
    with pytest.raises(ValueError):
        AntisymTensorField(3, 4, {})
    with pytest.raises(ValueError):
        AntisymTensorField(3, 0, {})
