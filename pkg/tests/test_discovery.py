import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfi_lab import catalog, fields
from qfi_lab.discovery import (BD_OPERATOR, LFI_OPERATOR, TRIVIAL_KT, DiscoveryOptions, Integral3Operator,
                               KTParams, KVParams, LVecParams, assemble_report, bd_residual,
                               collocation_points, integral3_residuals, integral3_scan, kt_first_integral,
                               lfi_residual, loop_integral, nullspace_solve, reconstruct_scalar,
                               split_trivial)
from qfi_lab.errors import InsufficientPoints, PathThroughSingularity, SingularPoint, ValidationFailed
from qfi_lab.fields import PotentialSpec
from qfi_lab.integrals import evaluate, flow_derivative

from conftest import annulus_points, states_for

coef = st.floats(-3.0, 3.0)


def inst(name, **params):
    return catalog.instantiate(name, params).potential


def subspace_angle(A, B):
    """Largest principal angle between the row spaces of A and B."""
    qa = np.linalg.qr(np.asarray(A).T)[0]
    qb = np.linalg.qr(np.asarray(B).T)[0]
    s = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return float(np.arccos(np.clip(s.min(), -1.0, 1.0)))


# --- residual examples ----------------------------------------------------------

@pytest.mark.parametrize("name", ["Vs1", "V27", "V3b", "V28"])
def test_trivial_kt_is_always_a_solution(name):
    spec = catalog.instantiate(name).potential
    p = KTParams(A=1.0, B=1.0)
    for x, y in annulus_points(spec, 20, seed=1):
        assert bd_residual(p, spec, x, y) == pytest.approx(0.0, abs=1e-12)


def test_separable_a_direction():
    spec = inst("V27")
    for x, y in annulus_points(spec, 20, seed=2):
        assert bd_residual(KTParams(A=1.0), spec, x, y) == pytest.approx(0.0, abs=1e-12)


def test_isotropic_gamma_direction():
    spec = inst("V3b", k=0.7)
    assert bd_residual(KTParams(gamma=1.0), spec, 1.0, 2.0) == pytest.approx(0.0, abs=1e-12)
    # alpha alone leaves 3 k^2 (b y - a x) = -3 k^2 x
    assert bd_residual(KTParams(alpha=1.0), spec, 1.0, 2.0) == pytest.approx(-3 * 0.49, rel=1e-12)


def test_rotation_lfi_for_isotropic():
    spec = inst("V3b")
    for x, y in annulus_points(spec, 20, seed=3):
        assert lfi_residual(KVParams(b3=1.0), spec, x, y) == pytest.approx(0.0, abs=1e-12)


def test_translation_lfi_for_linear_potential():
    # V3 with F = 0 is linear, so translations give a constant s
    e = catalog.instantiate("V3")
    spec = e.potential
    x, y = 0.7, -0.4
    Vx, Vy = fields.evaluate(spec, x, y)[1]
    p = KVParams(b1=1.0, s=Vx)
    assert lfi_residual(p, spec, x, y) == pytest.approx(0.0, abs=1e-14)


def test_integral3_constant_vector_for_v3b():
    k = 0.8
    spec = inst("V3b", k=k)
    p = LVecParams(a4=1.0, lam=k)
    for x, y in annulus_points(spec, 20, seed=4):
        np.testing.assert_allclose(integral3_residuals(p, spec, x, y), 0.0, atol=1e-12)
    wrong = LVecParams(a4=1.0, lam=2.0 * k)
    assert abs(integral3_residuals(wrong, spec, 1.0, 1.0)[0]) > 1e-3


@settings(max_examples=30)
@given(st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=6, max_size=6), coef)
def test_bd_residual_linear(u, v, c):
    spec = inst("Vs1")
    x, y = 1.1, -0.6
    pu, pv = KTParams(*u), KTParams(*v)
    pw = KTParams.from_array(np.array(u) + c * np.array(v))
    lhs = bd_residual(pw, spec, x, y)
    rhs = bd_residual(pu, spec, x, y) + c * bd_residual(pv, spec, x, y)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@settings(max_examples=30)
@given(st.lists(coef, min_size=8, max_size=8), st.floats(0.1, 3.0))
def test_operator_rows_match_residuals(a, lam):
    spec = inst("V3a")
    x, y = 0.9, 1.3
    p = LVecParams.from_array(a, lam)
    j = spec.jet(x, y)
    X, Y, J = np.array([x]), np.array([y]), _stack([j])
    rows = Integral3Operator(lam).rows(J, X, Y)
    np.testing.assert_allclose(rows @ p.as_array(), integral3_residuals(p, spec, x, y), rtol=1e-9, atol=1e-9)
    kt = KTParams(*a[:6])
    np.testing.assert_allclose(BD_OPERATOR.rows(J, X, Y) @ kt.as_array(), [bd_residual(kt, spec, x, y)],
                               rtol=1e-9, atol=1e-9)
    kv = KVParams(*a[:4])
    np.testing.assert_allclose(LFI_OPERATOR.rows(J, X, Y) @ kv.as_array(), [lfi_residual(kv, spec, x, y)],
                               rtol=1e-9, atol=1e-9)


def _stack(jets):
    keys = ("v", "dx", "dy", "dxx", "dxy", "dyy")
    return SimpleNamespace(**{k: np.array([getattr(j, k) for j in jets]) for k in keys})


def test_killing_tensor_of_vector():
    p = LVecParams(alpha=1.0, beta=2.0, A=3.0, B=4.0, a1=5.0, a3=7.0)
    kt = p.killing_tensor()
    assert (kt.alpha, kt.beta, kt.gamma, kt.A, kt.B, kt.C) == (1.0, 2.0, 0.0, 3.0, 4.0, 6.0)
    assert not p.overlaps_integral1()
    assert LVecParams(A=1.0, a1=2.0, a3=2.0).overlaps_integral1()


# --- nullspaces -----------------------------------------------------------------

def test_collocation_points_respect_annulus():
    spec = inst("Vs1")
    x, y = collocation_points(spec, 50)
    r = np.hypot(x, y)
    assert len(x) == 50
    assert np.all((r >= 0.3) & (r <= 3.0))
    assert all(spec.singular_distance(a, b) >= 0.1 for a, b in zip(x, y))
    x2, _ = collocation_points(spec, 50)
    np.testing.assert_array_equal(x, x2)


@pytest.mark.parametrize("spec, dim", [
    (fields.free(), 6),
    (fields.separable_polynomial(), 2),
    (fields.generic_asymmetric(), 1),
])
def test_bd_dimensions_for_builtins(spec, dim):
    res = nullspace_solve(BD_OPERATOR, spec)
    assert res.dimension == dim
    assert res.validated
    assert np.all(res.residual_norms <= 1e-8 * (1 + res.derivative_scale))


def test_bd_dimension_vs1():
    res = nullspace_solve(BD_OPERATOR, inst("Vs1", k=1, b=1, c=1))
    assert res.dimension == 3
    has, triv, rest = split_trivial(res.basis)
    assert has and len(rest) == 2
    np.testing.assert_allclose(triv[0], TRIVIAL_KT)


def test_lfi_dimensions():
    assert nullspace_solve(LFI_OPERATOR, fields.free()).dimension == 3
    assert nullspace_solve(LFI_OPERATOR, inst("V3b")).dimension == 1
    assert nullspace_solve(LFI_OPERATOR, fields.generic_asymmetric()).dimension == 0


def test_basis_orthonormal_and_validated_on_heldout():
    res = nullspace_solve(BD_OPERATOR, inst("Vs2"))
    B = res.basis
    np.testing.assert_allclose(B @ B.T, np.eye(len(B)), atol=1e-12)
    assert res.n_heldout == 2 * res.n_points
    assert res.as_dict()["dimension"] == len(B)


def test_insufficient_points():
    with pytest.raises(InsufficientPoints):
        nullspace_solve(BD_OPERATOR, inst("Vs1"), n_points=5)


def test_loose_tolerance_fails_heldout_check():
    with pytest.raises(ValidationFailed) as info:
        nullspace_solve(BD_OPERATOR, fields.generic_asymmetric(), tol=0.5)
    assert info.value.result.validated is False


def test_rescaling_keeps_span():
    base = inst("Vs1")
    doubled = PotentialSpec("2Vs1", lambda X, Y: 2.0 * base.func(X, Y), {}, base.distance)
    a = nullspace_solve(BD_OPERATOR, base).basis
    b = nullspace_solve(BD_OPERATOR, doubled).basis
    assert a.shape == b.shape
    assert subspace_angle(a, b) <= 1e-8


def test_split_trivial_without_metric():
    has, triv, rest = split_trivial(np.array([[1.0, 0, 0, 0, 0, 0]]))
    assert not has and len(triv) == 0 and len(rest) == 1


# --- scalar reconstruction ---------------------------------------------------------

def test_reconstruct_separable():
    e = catalog.instantiate("V27")
    F1 = e.params["F1"]
    for x, y in [(0.5, 0.3), (-1.2, 2.0), (2.0, -1.0)]:
        G = reconstruct_scalar(KTParams(A=1.0), e.potential, (0.0, 0.0), (x, y))
        assert G == pytest.approx(2.0 * (F1(x) - F1(0.0)), rel=1e-12, abs=1e-12)


def test_reconstruct_trivial_is_potential_difference():
    spec = inst("Vs1")
    base = (1.0, 1.0)
    for x, y in annulus_points(spec, 10, seed=6):
        try:
            G = reconstruct_scalar(KTParams(A=0.5, B=0.5), spec, base, (x, y))
        except PathThroughSingularity:
            continue
        assert G == pytest.approx(spec.value(x, y) - spec.value(*base), rel=1e-10, abs=1e-10)


def test_loop_integral_vanishes_for_solution():
    spec = inst("Vs1")
    res = nullspace_solve(BD_OPERATOR, spec)
    _, _, rest = split_trivial(res.basis)
    for v in rest:
        p = KTParams.from_array(v)
        square = [(0.75, 0.75), (1.25, 0.75), (1.25, 1.25), (0.75, 1.25)]
        assert abs(loop_integral(p, spec, square)) <= 1e-9


def test_loop_integral_detects_non_solution():
    spec = inst("Vs1")
    square = [(0.75, 0.75), (1.25, 0.75), (1.25, 1.25), (0.75, 1.25)]
    assert abs(loop_integral(KTParams(alpha=1.0), spec, square)) > 1e-4


def test_singular_target_rejected():
    spec = inst("V3b")
    spec_sing = inst("Vs1")
    with pytest.raises(SingularPoint):
        reconstruct_scalar(KTParams(A=1.0), spec_sing, (1.0, 1.0), (0.0, 0.0))
    assert reconstruct_scalar(KTParams(A=1.0), spec, (1.0, 1.0), (1.0, 1.0)) == 0.0


def test_reconstructed_fi_is_conserved():
    spec = inst("Vs1")
    res = nullspace_solve(BD_OPERATOR, spec)
    _, _, rest = split_trivial(res.basis)
    I = kt_first_integral("K", KTParams.from_array(rest[0]), spec, (1.0, 1.0))
    for s in states_for(spec, 40, seed=7):
        if s.x < 0.2 or s.y < 0.2:
            continue  # stay in the base point's quadrant, clear of the singular axes
        assert abs(flow_derivative(I, spec, s)) <= 1e-8 * (1 + abs(evaluate(I, s)))


# --- integral-3 scan -------------------------------------------------------------

@pytest.mark.parametrize("k", [1.0, 0.5])
def test_scan_finds_v3b_rate(k):
    hits = integral3_scan(inst("V3b", k=k))
    lams = sorted(h.lam for h in hits)
    assert any(abs(l - k) <= 1e-6 for l in lams)
    hit = min(hits, key=lambda h: abs(h.lam - k))
    assert hit.validated and len(hit.basis) >= 1
    assert not all(hit.overlap)


def test_scan_reports_nothing_for_generic_separable():
    assert integral3_scan(fields.separable_polynomial()) == []


def test_scan_grid_validation():
    with pytest.raises(ValueError):
        integral3_scan(inst("V3b"), lambda_grid=[])
    with pytest.raises(ValueError):
        integral3_scan(inst("V3b"), lambda_grid=[-1.0, 1.0])


def test_scan_coarse_grid_far_from_rate():
    assert integral3_scan(inst("V3b", k=1.0), lambda_grid=[0.3, 0.7]) == []


# --- reports ---------------------------------------------------------------------

@pytest.mark.parametrize("name", ["Vs1", "Vs2"])
def test_superintegrable_verdict(name):
    rep = assemble_report(inst(name), DiscoveryOptions(scan=False))
    assert rep.verdict == "superintegrable-candidate"
    assert rep.kt_trivial_present
    assert len(rep.reconstructed) == 2
    assert all(r.validated for r in rep.reconstructed)


def test_generic_verdict():
    rep = assemble_report(fields.generic_asymmetric(), DiscoveryOptions(scan=False))
    assert rep.verdict == "none"
    assert len(rep.kt_basis) == 1 and rep.lfi_basis == []


def test_separable_verdict():
    rep = assemble_report(fields.separable_polynomial(), DiscoveryOptions(scan=False))
    assert rep.verdict == "integrable-candidate"


def test_report_dict_is_deterministic():
    a = assemble_report(inst("Vs1"), DiscoveryOptions(scan=False)).to_dict()
    b = assemble_report(inst("Vs1"), DiscoveryOptions(scan=False)).to_dict()
    assert a == b
    assert a["schema_version"] == 1
