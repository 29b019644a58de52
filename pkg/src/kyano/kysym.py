"""Killing-Yano tensors: construction, verification, and derived structures.

A rank-r antisymmetric field f is Killing-Yano (KY) when the symmetrized
covariant derivative vanishes: D_(l f_m) rest = 0.  Covariant constancy
(D f = 0) is strictly stronger.  From any rank-2 KY tensor, f g^{-1} f is
a symmetric Killing tensor whose quadratic form in momenta is conserved
along geodesics; covariant-constant non-degenerate KY tensors on
even-dimensional manifolds double as symplectic forms.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import expr as exprmod
from . import geometry
from .errors import SymplecticRejection
from .expr import Expression
from .fields import AntisymTensorField, levi_civita
from .geometry import MetricSpec

# ---------------------------------------------------------------------------
# flat-space pair of rank-(n-1) tensors


def flat_ky_pair(n: int, x: Sequence[float], p: Sequence[float]):
    """Rank-(n-1) pair on flat phase space: f from x, its twin from p.

    f_{i1..i(n-1)} = eps_{k i1..i(n-1)} x_k and the same contraction with p.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if x.shape != (n,) or p.shape != (n,):
        raise ValueError(f"x and p must have shape ({n},)")
    eps = levi_civita(n)
    f = np.tensordot(x, eps, axes=(0, 0))
    ft = np.tensordot(p, eps, axes=(0, 0))
    return f, ft


def _reconstruct_vector(f: np.ndarray) -> np.ndarray:
    rank = f.ndim
    n = f.shape[0] if rank else 0
    if rank == 0 or f.shape != (n,) * rank or rank != n - 1:
        raise ValueError("expected a rank-(n-1) array over an n-dimensional chart")
    scale = max(1.0, float(np.abs(f).max()))
    for a in range(rank - 1):
        if float(np.abs(f + f.swapaxes(a, a + 1)).max()) > 1e-12 * scale:
            raise ValueError("input array is not antisymmetric")
    eps = levi_civita(n)
    return np.tensordot(eps, f, axes=rank) / math.factorial(rank)


def reconstruct_position(f: np.ndarray) -> np.ndarray:
    """x_k = eps_{k j1..j(n-1)} f_{j1..j(n-1)} / (n-1)!; exact inverse of
    the pair construction."""
    return _reconstruct_vector(f)


def reconstruct_momentum(ft: np.ndarray) -> np.ndarray:
    return _reconstruct_vector(ft)


def _flat_ky_field(n: int) -> AntisymTensorField:
    eps = levi_civita(n)
    comps = {}
    for idx in itertools.combinations(range(n), n - 1):
        k = next(iter(set(range(n)) - set(idx)))
        sign = eps[(k,) + idx]
        src = f"x{k + 1}" if sign > 0 else f"-x{k + 1}"
        comps[idx] = exprmod.parse_expression(src, n)
    return AntisymTensorField(n, n - 1, comps)


def flat_ky_position_field(n: int) -> AntisymTensorField:
    """The pair's position member as a field (components linear in x)."""
    return _flat_ky_field(n)


def flat_ky_momentum_field(n: int) -> AntisymTensorField:
    """Momentum twin; same functional form over the momentum chart."""
    return _flat_ky_field(n)


# ---------------------------------------------------------------------------
# residuals


def covariant_constancy_residual(
    spec: MetricSpec, field: AntisymTensorField, point: Sequence[float]
) -> np.ndarray:
    """D_l f_{m n ...}; zero for covariant-constant fields."""
    if spec.components is None:
        return field.jacobian_at(point)
    return geometry.covariant_derivative_2form(spec, field, point)


def ky_residual(
    spec: MetricSpec, field: AntisymTensorField, point: Sequence[float]
) -> np.ndarray:
    """R[l, m, rest] = D_l f_{m rest} + D_m f_{l rest}; zero iff KY at the point."""
    D = covariant_constancy_residual(spec, field, point)
    return D + D.swapaxes(0, 1)


def closedness_residual(field: AntisymTensorField, point: Sequence[float]) -> np.ndarray:
    """Antisymmetrized derivative d_[l f_mn]; zero for closed two-forms."""
    if field.rank != 2:
        raise ValueError("closedness check is implemented for rank-2 fields")
    jac = field.jacobian_at(point)
    return jac + jac.transpose(2, 0, 1) + jac.transpose(1, 2, 0)


def killing_from_ky(
    spec: MetricSpec, field: AntisymTensorField, point: Sequence[float]
) -> np.ndarray:
    """Symmetric Killing tensor K = f g^{-1} f from a rank-2 KY tensor."""
    f = field.values_at(point)
    ginv = geometry.inverse_metric_at(spec, point)
    K = f @ ginv @ f
    return 0.5 * (K + K.T)


def killing_tensor_jet(
    spec: MetricSpec, field: AntisymTensorField, point: Sequence[float]
):
    """K and its coordinate partials dK[a, m, n] = d_a K_mn."""
    f = field.values_at(point)
    df = field.jacobian_at(point)
    if spec.components is None:
        g = np.eye(spec.dim)
        dg = np.zeros((spec.dim,) * 3)
    else:
        g, dg = geometry.metric_components_at(spec, point, order=1)
    ginv = geometry._invert(g)
    dginv = -np.einsum("li,aij,js->als", ginv, dg, ginv)
    K = f @ ginv @ f
    dK = (
        np.einsum("aml,ls,sn->amn", df, ginv, f)
        + np.einsum("ml,als,sn->amn", f, dginv, f)
        + np.einsum("ml,ls,asn->amn", f, ginv, df)
    )
    return 0.5 * (K + K.T), 0.5 * (dK + dK.swapaxes(1, 2))


def killing_equation_residual(
    spec: MetricSpec, field: AntisymTensorField, point: Sequence[float]
) -> np.ndarray:
    """Symmetrized covariant derivative D_(a K_mn); zero for Killing tensors."""
    K, dK = killing_tensor_jet(spec, field, point)
    gamma = geometry.christoffel_at(spec, point)
    DK = (
        dK
        - np.einsum("sam,sn->amn", gamma, K)
        - np.einsum("san,ms->amn", gamma, K)
    )
    return (DK + DK.transpose(1, 2, 0) + DK.transpose(2, 0, 1)) / 3.0


def nondegeneracy(
    field: AntisymTensorField, spec: MetricSpec, point: Sequence[float]
) -> float:
    """det f at the point; the field is non-degenerate there iff |det| > 1e-12."""
    if field.rank != 2:
        raise ValueError("nondegeneracy is defined for rank-2 fields")
    if field.dim != spec.dim:
        raise ValueError("field and metric dimensions differ")
    geometry.metric_at(spec, point)  # domain check only
    return float(np.linalg.det(field.values_at(point)))


# ---------------------------------------------------------------------------
# verification report


@dataclass(frozen=True)
class KYReport:
    """Residual maxima and flags from sampling a field over a metric."""

    n_points: int
    max_ky_residual: float
    max_cc_residual: float
    min_abs_det: float
    max_abs_det: float
    ky_tol: float
    cc_tol: float
    det_tol: float

    @property
    def is_ky(self) -> bool:
        return self.max_ky_residual <= self.ky_tol

    @property
    def is_covariant_constant(self) -> bool:
        return self.max_cc_residual <= self.cc_tol

    @property
    def is_nondegenerate(self) -> bool:
        return self.min_abs_det > self.det_tol

    def to_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "max_ky_residual": self.max_ky_residual,
            "max_cc_residual": self.max_cc_residual,
            "min_abs_det": self.min_abs_det,
            "max_abs_det": self.max_abs_det,
            "is_ky": self.is_ky,
            "is_covariant_constant": self.is_covariant_constant,
            "is_nondegenerate": self.is_nondegenerate,
            "tolerances": {"ky": self.ky_tol, "cc": self.cc_tol, "det": self.det_tol},
        }


def verify_field(
    spec: MetricSpec,
    field: AntisymTensorField,
    points: Sequence[Sequence[float]],
    ky_tol: float = 1e-10,
    cc_tol: float = 1e-8,
    det_tol: float = 1e-12,
) -> KYReport:
    """Evaluate KY and covariant-constancy residuals over sample points."""
    max_ky = 0.0
    max_cc = 0.0
    min_det = math.inf
    max_det = 0.0
    count = 0
    for pt in points:
        count += 1
        D = covariant_constancy_residual(spec, field, pt)
        max_cc = max(max_cc, float(np.abs(D).max()))
        max_ky = max(max_ky, float(np.abs(D + D.swapaxes(0, 1)).max()))
        if field.rank == 2:
            d = abs(float(np.linalg.det(field.values_at(pt))))
            min_det = min(min_det, d)
            max_det = max(max_det, d)
    if not count:
        raise ValueError("verify_field needs at least one sample point")
    if math.isinf(min_det):
        min_det = 0.0
    return KYReport(
        n_points=count,
        max_ky_residual=max_ky,
        max_cc_residual=max_cc,
        min_abs_det=min_det,
        max_abs_det=max_det,
        ky_tol=ky_tol,
        cc_tol=cc_tol,
        det_tol=det_tol,
    )


# ---------------------------------------------------------------------------
# symplectic structure from a covariant-constant KY tensor


@dataclass(frozen=True)
class SymplecticForm:
    """A rank-2 field accepted as a symplectic form, with its check record."""

    spec: MetricSpec
    field: AntisymTensorField
    n_points: int
    max_cc_residual: float
    max_closedness_residual: float
    min_abs_det: float

    def matrix_at(self, point: Sequence[float]) -> np.ndarray:
        return self.field.values_at(point)

    def inverse_at(self, point: Sequence[float]) -> np.ndarray:
        return np.linalg.inv(self.matrix_at(point))


def symplectic_from_ky(
    spec: MetricSpec,
    field: AntisymTensorField,
    points: Optional[Sequence[Sequence[float]]] = None,
    rng: Optional[np.random.Generator] = None,
    n_points: int = 30,
    cc_tol: float = 1e-8,
    closed_tol: float = 1e-10,
    det_tol: float = 1e-12,
) -> SymplecticForm:
    """Promote a covariant-constant non-degenerate two-form to a symplectic
    form, or raise :class:`SymplecticRejection` naming the failed check."""
    if field.rank != 2:
        raise ValueError("symplectic candidates must be rank-2 fields")
    if spec.dim % 2 != 0:
        raise SymplecticRejection("odd-dimension", f"dim {spec.dim} is odd")
    if points is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        points = geometry.sample_points(spec, n_points, rng)
    points = [np.asarray(pt, dtype=float) for pt in points]
    min_det = math.inf
    for pt in points:
        min_det = min(min_det, abs(float(np.linalg.det(field.values_at(pt)))))
    if min_det <= det_tol:
        raise SymplecticRejection("degenerate", f"min |det f| = {min_det:.3e}")
    max_cc = 0.0
    for pt in points:
        D = covariant_constancy_residual(spec, field, pt)
        max_cc = max(max_cc, float(np.abs(D).max()))
    if max_cc > cc_tol:
        raise SymplecticRejection(
            "not-covariant-constant", f"max |D f| = {max_cc:.3e}"
        )
    max_closed = 0.0
    for pt in points:
        max_closed = max(max_closed, float(np.abs(closedness_residual(field, pt)).max()))
    if max_closed > closed_tol:
        raise SymplecticRejection("not-closed", f"max |d f| = {max_closed:.3e}")
    return SymplecticForm(
        spec=spec,
        field=field,
        n_points=len(points),
        max_cc_residual=max_cc,
        max_closedness_residual=max_closed,
        min_abs_det=min_det,
    )


# ---------------------------------------------------------------------------
# catalog tensors in explicit charts


def _constcurv_sources(K: float, momentum: bool) -> dict[tuple[int, int], str]:
    """Two-form components in the spherical chart, exactly as printed in the
    standard reference tables; x1 is r (or p on the momentum chart)."""
    k = f"({K!r})"
    u2 = f"(1 + {k}*x1^2/4)^2"
    if momentum:
        first = f"16*x1*sin(x3)/{u2}"
    else:
        first = f"x1*sin(x3)/(16*{u2})"
    return {
        (0, 1): first,
        (0, 2): f"x1*sin(2*x2)*cos(x3)/(32*{u2})",
        (1, 2): f"x1^2*sin(x2)^2*cos(x3)*({k}*x1^2 - 4)/((4 + {k}*x1^2)*{u2})",
    }


def constcurv_ky_field(
    index: int, K: float, momentum: bool = False
) -> AntisymTensorField:
    """Single-component two-form number ``index`` (1, 2, or 3) from the
    printed constant-curvature table; component slots are (r,theta),
    (r,phi), (theta,phi) respectively.

    These are reproduced verbatim for measurement; as single-component
    fields they do not satisfy the KY equation (see the verification
    report), their relative normalizations being mutually inconsistent.
    """
    if index not in (1, 2, 3):
        raise ValueError("index must be 1, 2, or 3")
    sources = _constcurv_sources(float(K), momentum)
    slot = [(0, 1), (0, 2), (1, 2)][index - 1]
    return AntisymTensorField(3, 2, {slot: sources[slot]})


def constcurv_ky(index: int, point: Sequence[float], K: float) -> np.ndarray:
    """Printed constant-curvature two-form evaluated at (r, theta, phi)."""
    return constcurv_ky_field(index, K).values_at(point)


def _taubnut_component(i: int, mu: int, nu: int, coords, m: float):
    """Entry (mu, nu) of f_i = 4m (dpsi + cos th dphi) ^ dx_i
    - (1 + 2m/r) eps_ijk dx_j ^ dx_k, pulled back to (r, theta, phi, psi)."""
    from . import dual

    r, th, ph = coords[0], coords[1], coords[2]
    sth, cth = dual.sin(th), dual.cos(th)
    sph, cph = dual.sin(ph), dual.cos(ph)
    # rows: differentials of x = r sth cph, y = r sth sph, z = r cth
    J = (
        (sth * cph, r * cth * cph, -(r * sth * sph), 0.0),
        (sth * sph, r * cth * sph, r * sth * cph, 0.0),
        (cth, -(r * sth), 0.0, 0.0),
    )
    sigma = (0.0, 0.0, cth, 1.0)
    V = 1.0 + (2.0 * m) / r
    out = 4.0 * m * (sigma[mu] * J[i][nu] - sigma[nu] * J[i][mu])
    j, k = [(1, 2), (2, 0), (0, 1)][i]
    wedge = J[j][mu] * J[k][nu] - J[j][nu] * J[k][mu]
    return out - V * (2.0 * wedge)


def taubnut_ky_field(index: int, m: float) -> AntisymTensorField:
    """Two-form f_index (index in 1..3) on the Taub-NUT chart (r, theta,
    phi, psi); covariantly constant for the fiber_scale=2 metric."""
    if index not in (1, 2, 3):
        raise ValueError("index must be 1, 2, or 3")
    m = float(m)
    comps = {}
    for mu, nu in itertools.combinations(range(4), 2):
        def comp(coords, mu=mu, nu=nu):
            return _taubnut_component(index - 1, mu, nu, coords, m)

        comps[(mu, nu)] = comp
    return AntisymTensorField(4, 2, comps)


def taubnut_ky(index: int, point: Sequence[float], m: float) -> np.ndarray:
    return taubnut_ky_field(index, m).values_at(point)


# ---------------------------------------------------------------------------
# linear ansatz solver


def ky_solve_ansatz(
    spec: MetricSpec,
    basis: Sequence,
    points: Optional[Sequence[Sequence[float]]] = None,
    rel_threshold: float = 1e-8,
    rng: Optional[np.random.Generator] = None,
) -> list[AntisymTensorField]:
    """Solve the KY equation within span{phi_b(x) dx^i ^ dx^j}.

    ``basis`` lists scalar expressions (strings or parsed).  The KY residual
    is linear in the unknown coefficients; sampling it at admissible points
    gives a linear system whose null space (singular values below
    ``rel_threshold`` times the largest) spans the solutions.  Returns one
    field per null direction; coefficients are orthonormal as vectors.
    """
    n = spec.dim
    parsed: list[Expression] = []
    for b in basis:
        parsed.append(exprmod.parse_expression(b, n) if isinstance(b, str) else b)
    if not parsed:
        raise ValueError("ansatz basis must not be empty")
    pairs = list(itertools.combinations(range(n), 2))
    nb = len(parsed)
    unknowns = len(pairs) * nb
    if points is None:
        count = max(4, (2 * unknowns) // (n ** 3) + 4)
        rng = rng if rng is not None else np.random.default_rng(12345)
        points = geometry.sample_points(spec, count, rng)
    points = [np.asarray(pt, dtype=float) for pt in points]
    if len(points) * n ** 3 < unknowns:
        warnings.warn(
            "fewer residual equations than unknowns; the null space may be inflated",
            stacklevel=2,
        )
    rows = np.zeros((len(points) * n ** 3, unknowns))
    for pi, pt in enumerate(points):
        gamma = geometry.christoffel_at(spec, pt)
        jets = [exprmod.eval1(phi, [float(v) for v in pt]) for phi in parsed]
        for ai, (a, b) in enumerate(pairs):
            for bi, jet in enumerate(jets):
                f = np.zeros((n, n))
                f[a, b], f[b, a] = jet.value, -jet.value
                df = np.zeros((n, n, n))
                df[:, a, b], df[:, b, a] = jet.gradient, -jet.gradient
                D = (
                    df
                    - np.einsum("slm,sn->lmn", gamma, f)
                    - np.einsum("sln,ms->lmn", gamma, f)
                )
                R = D + D.swapaxes(0, 1)
                rows[pi * n ** 3:(pi + 1) * n ** 3, ai * nb + bi] = R.ravel()
    _, svals, vh = np.linalg.svd(rows, full_matrices=True)
    if svals.size == 0 or svals[0] == 0.0:
        mask = np.ones(vh.shape[0], dtype=bool)
    else:
        mask = np.ones(vh.shape[0], dtype=bool)
        mask[: svals.size] = svals <= rel_threshold * svals[0]
    fields = []
    for coeffs in vh[mask]:
        comps = {}
        for ai, (a, b) in enumerate(pairs):
            terms = [
                (float(coeffs[ai * nb + bi]), parsed[bi])
                for bi in range(nb)
                if coeffs[ai * nb + bi] != 0.0
            ]
            if not terms:
                continue

            def comp(coords, terms=tuple(terms)):
                acc = 0.0
                for c, e in terms:
                    acc = acc + c * exprmod.evaluate(e, coords)
                return acc

            comps[(a, b)] = comp
        fields.append(AntisymTensorField(n, 2, comps))
    return fields
