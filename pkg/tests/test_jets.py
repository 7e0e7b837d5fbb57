"""Jet algebra against finite differences: the derivatives must be exact."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ahmass import jets as J
from ahmass.chart import chart_jacobian_jets, to_cartesian


def fd_check(jet_fn, coords, tol=1e-7):
    jet = jet_fn(coords)
    eps = 1e-6
    for a in range(coords.shape[1]):
        cp, cm = coords.copy(), coords.copy()
        cp[:, a] += eps
        cm[:, a] -= eps
        jp, jm = jet_fn(cp), jet_fn(cm)
        assert np.abs((jp.val - jm.val) / (2 * eps) - jet.grad[:, a]).max() < tol
        for b in range(coords.shape[1]):
            fd = (jp.grad[:, b] - jm.grad[:, b]) / (2 * eps)
            assert np.abs(fd - jet.hess[:, a, b]).max() < tol


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 30.0), st.floats(0.2, 2.9), st.floats(0.0, 6.2))
def test_algebra_matches_finite_differences(r, th, ph):
    coords = np.array([[r, th, ph]])

    def build(c):
        rj, tj, pj = J.coordinate_jets(c)
        return (rj * rj + 1.0).reciprocal() * J.jsin(tj) + J.jexp(
            J.jcos(pj) * 0.3) - J.jsqrt(rj + 2.0) / (tj + 5.0)

    fd_check(build, coords)


def test_power_and_where():
    coords = np.array([[2.0, 1.0, 0.5], [7.0, 2.0, 1.0]])
    rj = J.coordinate_jets(coords)[0]
    p = rj ** -2.5
    assert np.allclose(p.val, coords[:, 0] ** -2.5)
    assert np.allclose(p.grad[:, 0], -2.5 * coords[:, 0] ** -3.5)
    mask = coords[:, 0] > 3
    sel = J.jet_where(mask, rj, rj * 0.0)
    assert sel.val[0] == 0.0 and sel.val[1] == 7.0


def test_smooth_bump_support_and_smoothness():
    coords = np.linspace(0.5, 8.0, 200)[:, None] * np.array([[1.0, 0, 0]]) \
        + np.array([[0.0, 1.0, 1.0]])
    rj = J.coordinate_jets(coords)[0]
    bump = J.smooth_bump(rj, 2.0, 6.0)
    r = coords[:, 0]
    outside = (r <= 2.0) | (r >= 6.0)
    assert np.all(bump.val[outside] == 0.0)
    assert np.all(bump.grad[outside] == 0.0)
    assert bump.val.max() <= 1.0 + 1e-12
    fd_check(lambda c: J.smooth_bump(J.coordinate_jets(c)[0], 2.0, 6.0),
             coords[(r > 2.05) & (r < 5.95)][:20], tol=1e-4)


def test_chart_jacobian_jets_match_cartesian_map():
    rng = np.random.default_rng(5)
    coords = np.column_stack([rng.uniform(1, 10, 40), rng.uniform(0.3, 2.8, 40),
                              rng.uniform(0, 6.2, 40)])
    jac = chart_jacobian_jets(coords)
    eps = 1e-6
    for a in range(3):
        cp, cm = coords.copy(), coords.copy()
        cp[:, a] += eps
        cm[:, a] -= eps
        fd = (to_cartesian(cp) - to_cartesian(cm)) / (2 * eps)
        for c in range(3):
            assert np.abs(fd[:, c] - jac[a][c].val).max() < 1e-8
