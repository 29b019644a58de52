"""KY machinery: pairs, residuals, Killing tensors, symplectic forms,
catalog fields, and the ansatz solver."""

import math

import numpy as np
import pytest

from kyano import geometry, kysym
from kyano.errors import SymplecticRejection
from kyano.fields import AntisymTensorField, levi_civita


def taub_nut_points(count, seed=0, m=1.0):
    spec = geometry.taub_nut(m)
    return spec, geometry.sample_points(spec, count, np.random.default_rng(seed))


# -- flat pair and reconstruction -------------------------------------------


def test_flat_pair_unit_z():
    f, ft = kysym.flat_ky_pair(3, (0.0, 0.0, 1.0), (0.0, 1.0, 0.0))
    expected_f = np.zeros((3, 3))
    expected_f[0, 1], expected_f[1, 0] = 1.0, -1.0
    assert np.array_equal(f, expected_f)
    assert ft[0, 2] == -1.0 and ft[2, 0] == 1.0
    assert np.count_nonzero(ft) == 2


def test_flat_pair_n4_pattern():
    f, _ = kysym.flat_ky_pair(4, (1.0, 0.0, 0.0, 0.0), np.zeros(4))
    assert np.array_equal(f, levi_civita(4)[0])


def test_flat_pair_dimension_mismatch():
    with pytest.raises(ValueError):
        kysym.flat_ky_pair(3, (1.0, 0.0), (0.0, 0.0, 0.0))


def test_reconstruction_examples():
    f, _ = kysym.flat_ky_pair(3, (0.0, 0.0, 1.0), np.zeros(3))
    assert np.array_equal(kysym.reconstruct_position(f), [0.0, 0.0, 1.0])
    assert np.array_equal(
        kysym.reconstruct_position(np.zeros((3, 3))), np.zeros(3)
    )
    f, _ = kysym.flat_ky_pair(3, (2.0, -1.0, 0.5), np.zeros(3))
    assert np.abs(kysym.reconstruct_position(f) - [2.0, -1.0, 0.5]).max() <= 1e-15


@pytest.mark.parametrize("n", (2, 3, 4, 5, 6))
def test_reconstruction_roundtrip(n):
    rng = np.random.default_rng(n)
    for _ in range(200):
        x = rng.uniform(-5, 5, n)
        p = rng.uniform(-5, 5, n)
        f, ft = kysym.flat_ky_pair(n, x, p)
        assert np.abs(kysym.reconstruct_position(f) - x).max() <= 1e-15 * 5
        assert np.abs(kysym.reconstruct_momentum(ft) - p).max() <= 1e-15 * 5


def test_reconstruction_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        kysym.reconstruct_position(np.ones((3, 3)))


# -- residuals ----------------------------------------------------------------


def test_flat_linear_field_is_ky():
    field = kysym.flat_ky_position_field(3)
    flat = geometry.flat(3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        R = kysym.ky_residual(flat, field, rng.uniform(-2, 2, 3))
        assert np.abs(R).max() <= 1e-14


def test_non_ky_field_residual_component():
    # f_12 = x1: R_112 = 2 * d_1 f_12 = 2
    field = AntisymTensorField(3, 2, {"12": "x1"})
    R = kysym.ky_residual(geometry.flat(3), field, [0.2, 0.4, 0.9])
    assert R[0, 0, 1] == 2.0


def test_constant_field_covariantly_constant():
    field = AntisymTensorField.constant(
        3, 2, np.array([[0.0, 1.0, -2.0], [-1.0, 0.0, 3.0], [2.0, -3.0, 0.0]])
    )
    D = kysym.covariant_constancy_residual(geometry.flat(3), field, [1.0, 2.0, 3.0])
    assert np.count_nonzero(D) == 0


def test_linear_field_not_covariantly_constant():
    field = kysym.flat_ky_position_field(3)
    D = kysym.covariant_constancy_residual(geometry.flat(3), field, [0.5, 0.5, 0.5])
    assert np.array_equal(D, levi_civita(3))


def test_closedness_residual_flat_pair():
    field = kysym.flat_ky_position_field(3)
    c = kysym.closedness_residual(field, [0.1, 0.2, 0.3])
    # d(eps . x) has the totally antisymmetric cyclic sum 3*eps
    assert np.array_equal(c, 3.0 * levi_civita(3))


# -- Killing tensors ----------------------------------------------------------


def test_killing_from_ky_unit_z():
    field = kysym.flat_ky_position_field(3)
    K = kysym.killing_from_ky(geometry.flat(3), field, [0.0, 0.0, 1.0])
    assert np.abs(K - np.diag([-1.0, -1.0, 0.0])).max() < 1e-15


def test_killing_from_ky_origin():
    field = kysym.flat_ky_position_field(3)
    K = kysym.killing_from_ky(geometry.flat(3), field, np.zeros(3))
    assert np.count_nonzero(K) == 0


def test_killing_from_ky_ground_truth():
    field = kysym.flat_ky_position_field(3)
    flat = geometry.flat(3)
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = rng.uniform(-2, 2, 3)
        K = kysym.killing_from_ky(flat, field, x)
        assert np.array_equal(K, K.T)
        expected = np.outer(x, x) - float(x @ x) * np.eye(3)
        assert np.abs(K - expected).max() < 1e-13


def test_killing_equation_flat():
    field = kysym.flat_ky_position_field(3)
    flat = geometry.flat(3)
    rng = np.random.default_rng(2)
    for _ in range(20):
        res = kysym.killing_equation_residual(flat, field, rng.uniform(-2, 2, 3))
        assert np.abs(res).max() <= 1e-8


def test_killing_equation_taub_nut():
    spec, pts = taub_nut_points(10, seed=3)
    for index in (1, 2, 3):
        field = kysym.taubnut_ky_field(index, 1.0)
        for pt in pts:
            res = kysym.killing_equation_residual(spec, field, pt)
            assert np.abs(res).max() <= 1e-8


# -- nondegeneracy -------------------------------------------------------------


def test_nondegeneracy_odd_dimension_zero():
    field = kysym.flat_ky_position_field(3)
    det = kysym.nondegeneracy(field, geometry.flat(3), [0.3, 0.1, 0.9])
    assert abs(det) < 1e-15  # odd antisymmetric: zero up to roundoff


def test_nondegeneracy_block_form():
    f = np.zeros((4, 4))
    f[0, 1], f[1, 0], f[2, 3], f[3, 2] = 1.0, -1.0, 1.0, -1.0
    field = AntisymTensorField.constant(4, 2, f)
    assert kysym.nondegeneracy(field, geometry.flat(4), np.zeros(4)) == 1.0


def test_nondegeneracy_taub_nut():
    spec, pts = taub_nut_points(5, seed=4)
    field = kysym.taubnut_ky_field(1, 1.0)
    for pt in pts:
        assert abs(kysym.nondegeneracy(field, spec, pt)) > 1e-6


# -- verify_field ---------------------------------------------------------------


def test_verify_field_flags():
    flat = geometry.flat(3)
    pts = geometry.sample_points(flat, 20, np.random.default_rng(5))
    rep = kysym.verify_field(flat, kysym.flat_ky_position_field(3), pts)
    assert rep.is_ky
    assert not rep.is_covariant_constant
    assert not rep.is_nondegenerate  # odd dimension
    assert rep.n_points == 20
    d = rep.to_dict()
    for key in ("max_ky_residual", "max_cc_residual", "min_abs_det",
                "is_ky", "is_covariant_constant", "is_nondegenerate"):
        assert key in d

    bad = AntisymTensorField(3, 2, {"12": "x1"})
    rep = kysym.verify_field(flat, bad, pts)
    assert not rep.is_ky
    assert rep.max_ky_residual == 2.0


# -- symplectic structure --------------------------------------------------------


def test_symplectic_accepts_constant_block():
    f = np.zeros((4, 4))
    f[0, 1], f[1, 0], f[2, 3], f[3, 2] = 1.0, -1.0, 1.0, -1.0
    field = AntisymTensorField.constant(4, 2, f)
    form = kysym.symplectic_from_ky(geometry.flat(4), field)
    assert form.min_abs_det == 1.0
    pt = [0.1, 0.2, 0.3, 0.4]
    assert np.abs(form.matrix_at(pt) @ form.inverse_at(pt) - np.eye(4)).max() < 1e-14


def test_symplectic_rejects_odd_dimension():
    with pytest.raises(SymplecticRejection) as ei:
        kysym.symplectic_from_ky(geometry.flat(3), kysym.flat_ky_position_field(3))
    assert ei.value.reason == "odd-dimension"


def test_symplectic_rejects_degenerate():
    field = AntisymTensorField(4, 2, {"12": "1"})
    with pytest.raises(SymplecticRejection) as ei:
        kysym.symplectic_from_ky(geometry.flat(4), field)
    assert ei.value.reason == "degenerate"


def test_symplectic_rejects_non_covariant_constant():
    field = AntisymTensorField(4, 2, {"12": "1 + x1^2", "34": "1"})
    with pytest.raises(SymplecticRejection) as ei:
        kysym.symplectic_from_ky(geometry.flat(4), field)
    assert ei.value.reason == "not-covariant-constant"


def test_symplectic_rejects_not_closed():
    # with the covariant-constancy gate relaxed, closedness still catches
    # a two-form whose exterior derivative does not vanish
    field = AntisymTensorField(4, 2, {"12": "x3", "34": "1"})
    points = [np.array([a, b, c, d]) for a, b, c, d in
              ((0.5, 0.5, 0.5, 0.5), (1.0, -1.0, 0.8, 0.2), (0.2, 0.9, -0.7, 0.4))]
    with pytest.raises(SymplecticRejection) as ei:
        kysym.symplectic_from_ky(geometry.flat(4), field, points=points, cc_tol=10.0)
    assert ei.value.reason == "not-closed"


def test_symplectic_rejects_rank_mismatch():
    field = AntisymTensorField(4, 3, {(0, 1, 2): "1"})
    with pytest.raises(ValueError):
        kysym.symplectic_from_ky(geometry.flat(4), field)


def test_symplectic_accepts_taub_nut():
    spec = geometry.taub_nut(1.0)
    form = kysym.symplectic_from_ky(spec, kysym.taubnut_ky_field(1, 1.0))
    assert form.max_cc_residual <= 1e-8
    assert form.min_abs_det > 1e-6


# -- printed constant-curvature fields -------------------------------------------


def test_constcurv_printed_value():
    f = kysym.constcurv_ky(1, (1.0, math.pi / 2, math.pi / 2), 0.0)
    assert abs(f[0, 1] - 1.0 / 16.0) < 1e-15
    assert f[1, 0] == -f[0, 1]


def test_constcurv_momentum_twin_scale():
    # the printed twin of the (1,2) component carries factor 16, not 1/16
    pt = (1.0, math.pi / 2, math.pi / 2)
    pos = kysym.constcurv_ky_field(1, 0.0).values_at(pt)
    mom = kysym.constcurv_ky_field(1, 0.0, momentum=True).values_at(pt)
    assert abs(mom[0, 1] / pos[0, 1] - 256.0) < 1e-12


CONSTCURV_BOX = [(0.4, 1.6), (0.4, math.pi - 0.4), (0.2, 2 * math.pi - 0.2)]


def constcurv_chart_points(count, seed):
    rng = np.random.default_rng(seed)
    return [
        np.array([rng.uniform(lo, hi) for lo, hi in CONSTCURV_BOX])
        for _ in range(count)
    ]


@pytest.mark.parametrize("index", (1, 2, 3))
@pytest.mark.parametrize("momentum", (False, True), ids=("position", "momentum"))
def test_printed_constcurv_fields_fail_ky(index, momentum):
    # frozen measurement: the printed components do not satisfy the KY
    # equation for the printed metric, for any of the six fields
    K = 1.0
    spec = geometry.const_curvature3_spherical(K)
    field = kysym.constcurv_ky_field(index, K, momentum=momentum)
    pts = constcurv_chart_points(20, seed=index)
    rep = kysym.verify_field(spec, field, pts)
    assert not rep.is_ky
    assert rep.max_ky_residual > 1e-3


# -- Taub-NUT fields ---------------------------------------------------------------


def test_taubnut_antisymmetry():
    rng = np.random.default_rng(6)
    for index in (1, 2, 3):
        pt = [rng.uniform(0.5, 2.5), rng.uniform(0.3, 2.8),
              rng.uniform(0, 2 * math.pi), rng.uniform(0, 4 * math.pi)]
        f = kysym.taubnut_ky(index, pt, 1.0)
        assert np.array_equal(f, -f.T)


@pytest.mark.parametrize("index", (1, 2, 3))
def test_taubnut_covariant_constancy(index):
    spec, pts = taub_nut_points(20, seed=7)
    field = kysym.taubnut_ky_field(index, 1.0)
    rep = kysym.verify_field(spec, field, pts)
    assert rep.max_cc_residual <= 1e-8
    assert rep.is_ky
    assert rep.min_abs_det > 1e-6


def test_alternate_normalization_fails():
    # frozen measurement: with the 16 m^2 fiber coefficient the printed
    # two-forms are not covariantly constant; 4 m^2 is the validated choice
    spec = geometry.taub_nut(1.0, fiber_scale=4.0)
    pts = geometry.sample_points(spec, 10, np.random.default_rng(8))
    field = kysym.taubnut_ky_field(1, 1.0)
    rep = kysym.verify_field(spec, field, pts)
    assert rep.max_cc_residual > 0.1


def test_taubnut_m_to_zero_limit():
    # the fiber term carries the only psi components; they vanish with m
    pt = [1.3, 1.1, 0.7, 2.0]
    for index in (1, 2, 3):
        f = kysym.taubnut_ky(index, pt, 0.0)
        assert np.count_nonzero(f[3, :]) == 0
        assert np.count_nonzero(f[:, 3]) == 0
        f_half = kysym.taubnut_ky(index, pt, 0.0)
        assert np.array_equal(f, f_half)


# -- dual symmetry ------------------------------------------------------------------


def test_dual_symmetry_flat():
    flat = geometry.flat(3)
    dual = geometry.dual_metric(flat)
    pts = geometry.sample_points(flat, 25, np.random.default_rng(9))
    rep_x = kysym.verify_field(flat, kysym.flat_ky_position_field(3), pts)
    rep_p = kysym.verify_field(dual, kysym.flat_ky_momentum_field(3), pts)
    assert abs(rep_x.max_ky_residual - rep_p.max_ky_residual) <= 1e-12
    assert abs(rep_x.max_cc_residual - rep_p.max_cc_residual) <= 1e-12


def test_dual_symmetry_taub_nut():
    spec, pts = taub_nut_points(10, seed=10)
    dual = geometry.dual_metric(spec)
    field = kysym.taubnut_ky_field(2, 1.0)
    rep_x = kysym.verify_field(spec, field, pts)
    rep_p = kysym.verify_field(dual, field, pts)
    assert abs(rep_x.max_ky_residual - rep_p.max_ky_residual) <= 1e-12
    assert abs(rep_x.max_cc_residual - rep_p.max_cc_residual) <= 1e-12


# -- ansatz solver -------------------------------------------------------------------


def fresh_residual_max(spec, fields, count=50, seed=99, box=None):
    worst = 0.0
    if box is None:
        pts = geometry.sample_points(spec, count, np.random.default_rng(seed))
    else:
        rng = np.random.default_rng(seed)
        pts = [np.array([rng.uniform(lo, hi) for lo, hi in box])
               for _ in range(count)]
    for field in fields:
        for pt in pts:
            worst = max(
                worst, float(np.abs(kysym.ky_residual(spec, field, pt)).max())
            )
    return worst


def test_ansatz_flat2_constant_form():
    fields = kysym.ky_solve_ansatz(geometry.flat(2), ["1"])
    assert len(fields) == 1
    v = fields[0].values_at([0.7, -0.3])
    assert abs(abs(v[0, 1]) - 1.0) < 1e-12


def test_ansatz_flat3_dimension_and_residuals():
    flat = geometry.flat(3)
    dims = set()
    for seed in (0, 1, 2):
        fields = kysym.ky_solve_ansatz(
            flat, ["1", "x1", "x2", "x3"], rng=np.random.default_rng(seed)
        )
        dims.add(len(fields))
        assert fresh_residual_max(flat, fields, seed=seed + 100) <= 1e-8
    # measured null-space dimension: three constant forms plus eps.x
    assert dims == {4}


def test_ansatz_const_curvature_dimension():
    K = 1.0
    spec = geometry.const_curvature3(K)
    u = f"(1 + {K!r}*(x1^2 + x2^2 + x3^2)/4)"
    basis = [f"1/{u}^2"]
    basis += [f"x{k}/{u}^3" for k in (1, 2, 3)]
    basis += [f"x{k}*x{l}/{u}^3" for k in (1, 2, 3) for l in (1, 2, 3) if l >= k]
    fields = kysym.ky_solve_ansatz(spec, basis, rng=np.random.default_rng(0))
    assert len(fields) == 4
    assert fresh_residual_max(spec, fields) <= 1e-8


def test_ansatz_underdetermined_warns():
    flat = geometry.flat(3)
    basis = ["1", "x1", "x2", "x3", "x1^2", "x2^2", "x3^2",
             "x1*x2", "x1*x3", "x2*x3"]  # 30 unknowns, 27 equations
    with pytest.warns(UserWarning):
        kysym.ky_solve_ansatz(flat, basis, points=[np.array([0.3, 0.7, -0.2])])


def test_ansatz_empty_basis():
    with pytest.raises(ValueError):
        kysym.ky_solve_ansatz(geometry.flat(3), [])
