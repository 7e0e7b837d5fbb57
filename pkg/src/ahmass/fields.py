"""Scalar and symmetric 2-tensor fields with chart derivatives.

Fields either carry exact jets (assembled from the jet algebra) or wrap a
plain callable and differentiate it by nested central differences with the
step rule delta_r = 1e-5 * (1 + r) in the radial coordinate and 1e-5 in the
angles.  Tensor fields expose ``component_arrays(coords) -> (h, dh, ddh)``
with the same index layout as metric families.
"""

from __future__ import annotations

import numpy as np

from . import jets as J
from .chart import as_coords, unit_vector_jets

FD_ANGLE_STEP = 1e-5
FD_RADIAL_SCALE = 1e-5


# -- scalar fields -------------------------------------------------------------

class ScalarField:
    """Scalar field backed by a jet-valued function of coordinate rows."""

    def __init__(self, jet_fn, support=None, asymptotic_tag=("compact",)):
        self._jet_fn = jet_fn
        self.support = support
        self.asymptotic_tag = asymptotic_tag

    def jet(self, coords) -> J.Jet:
        return self._jet_fn(as_coords(coords))

    def value(self, coords):
        return self.jet(coords).val

    def gradient(self, coords):
        return self.jet(coords).grad

    def chart_hessian(self, coords):
        return self.jet(coords).hess

    def __add__(self, other):
        return ScalarField(lambda c: self.jet(c) + other.jet(c),
                           asymptotic_tag=self.asymptotic_tag)

    def __mul__(self, scale: float):
        return ScalarField(lambda c: self.jet(c) * scale, support=self.support,
                           asymptotic_tag=self.asymptotic_tag)

    __rmul__ = __mul__


def constant_field(value: float) -> ScalarField:
    return ScalarField(lambda c: J.constant(value, c.shape[0], c.shape[1]))


def radial_bump_field(r_lo: float, r_hi: float, amplitude: float = 1.0) -> ScalarField:
    """Smooth compactly supported radial bump on the annulus (r_lo, r_hi)."""
    def fn(coords):
        r = J.coordinate_jets(coords)[0]
        return J.smooth_bump(r, r_lo, r_hi) * amplitude
    return ScalarField(fn, support=(r_lo, r_hi), asymptotic_tag=("compact",))


def poly_bump_jet(rjet: J.Jet, lo: float, hi: float, power: int = 7) -> J.Jet:
    """(1 - t^2)^power on the affine image of (lo, hi), zero outside.

    Polynomial inside the support, C^(power-1) across the edges: quadrature
    segments aligned with (lo, hi) integrate it exactly, which keeps the
    integration-by-parts self-tests at machine accuracy.
    """
    t = (rjet - 0.5 * (lo + hi)) * (2.0 / (hi - lo))
    inside = np.abs(t.val) < 1.0
    w = 1.0 - t * t
    wp = w
    for _ in range(power - 1):
        wp = wp * w
    zero = J.constant(0.0, t.val.shape[0], t.dim)
    return J.jet_where(inside, wp, zero)


def random_compact_scalar(rng, r_lo: float, r_hi: float, n: int,
                          amplitude: float = 1.0) -> ScalarField:
    """Polynomial radial bump times a random quadratic in the unit components."""
    c0 = rng.uniform(-1, 1)
    c1 = rng.uniform(-1, 1, size=n)
    c2 = rng.uniform(-1, 1, size=(n, n))
    c2 = 0.5 * (c2 + c2.T)

    def fn(coords):
        u = unit_vector_jets(coords)
        poly = J.constant(c0, coords.shape[0], coords.shape[1])
        for i in range(n):
            poly = poly + c1[i] * u[i]
            for k in range(n):
                poly = poly + c2[i, k] * (u[i] * u[k])
        r = J.coordinate_jets(coords)[0]
        return poly_bump_jet(r, r_lo, r_hi) * poly * amplitude

    return ScalarField(fn, support=(r_lo, r_hi), asymptotic_tag=("compact",))


class RadialProfile:
    """Radial function with first and second derivatives: profile(r) -> (v, d1, d2)."""

    def __init__(self, fn, description=None):
        self._fn = fn
        self._description = description or {"kind": "callable"}

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self._fn(r)

    def describe(self):
        return self._description

    def __mul__(self, other: "RadialProfile"):
        def fn(r):
            a, da, dda = self(r)
            b, db, ddb = other(r)
            return a * b, da * b + a * db, dda * b + 2 * da * db + a * ddb
        return RadialProfile(fn, {"kind": "product"})

    def __add__(self, other):
        if isinstance(other, RadialProfile):
            def fn(r):
                a, da, dda = self(r)
                b, db, ddb = other(r)
                return a + b, da + db, dda + ddb
            return RadialProfile(fn, {"kind": "sum"})
        shift = float(other)

        def fn(r):
            a, da, dda = self(r)
            return a + shift, da, dda
        return RadialProfile(fn, {"kind": "shifted"})

    __radd__ = __add__

    def as_field(self) -> ScalarField:
        def jet_fn(coords):
            npts, dim = coords.shape
            v, d1, d2 = self(coords[:, 0])
            grad = np.zeros((npts, dim))
            grad[:, 0] = d1
            hess = np.zeros((npts, dim, dim))
            hess[:, 0, 0] = d2
            return J.Jet(np.asarray(v, dtype=float), grad, hess)
        return ScalarField(jet_fn, asymptotic_tag=("radial",))


def constant_profile(value: float) -> RadialProfile:
    def fn(r):
        z = np.zeros_like(r)
        return np.full_like(r, value), z, z
    return RadialProfile(fn, {"kind": "constant", "value": value})


def power_tail_profile(amp: float, rate: float, onset: float = 5.0,
                       switch_power: int = 4) -> RadialProfile:
    """amp * (1 - exp(-(r/onset)^p)) * r^(-rate): smooth everywhere, ~ r^(-rate) tail."""
    def fn(r):
        jet_r = J.Jet(r, np.ones((r.size, 1)), np.zeros((r.size, 1, 1)))
        sw = J.smooth_switch(jet_r, onset, switch_power)
        out = sw * (jet_r ** (-rate)) * amp
        return out.val, out.grad[:, 0], out.hess[:, 0, 0]
    return RadialProfile(fn, {"kind": "power_tail", "amp": amp, "rate": rate,
                              "onset": onset})


def profile_from_dict(doc: dict) -> RadialProfile:
    kind = doc.get("kind")
    if kind == "constant":
        extra = set(doc) - {"kind", "value"}
        if extra:
            raise ValueError(f"unknown profile keys: {sorted(extra)}")
        return constant_profile(float(doc["value"]))
    if kind == "power_tail":
        extra = set(doc) - {"kind", "amp", "rate", "onset"}
        if extra:
            raise ValueError(f"unknown profile keys: {sorted(extra)}")
        return power_tail_profile(float(doc["amp"]), float(doc["rate"]),
                                  float(doc.get("onset", 5.0)))
    raise ValueError(f"unknown radial profile kind {kind!r}")


# -- symmetric 2-tensor fields ---------------------------------------------------

class SymmetricTensorField:
    """Base: symmetric 2-tensor with chart components and two derivatives."""

    analytic = True
    support = None

    def component_arrays(self, coords):
        raise NotImplementedError

    def describe(self):
        return {"kind": "callable"}


class JetTensorField(SymmetricTensorField):
    """Components given as jet functions in a dict {(i, j): fn(coords) -> Jet}."""

    def __init__(self, n: int, jet_entries: dict, support=None, description=None):
        self.n = n
        self.entries = jet_entries
        self.support = support
        self._description = description or {"kind": "jet_components"}

    def component_arrays(self, coords):
        coords = as_coords(coords)
        npts, n = coords.shape
        h = np.zeros((npts, n, n))
        dh = np.zeros((npts, n, n, n))
        ddh = np.zeros((npts, n, n, n, n))
        for (i, k), fn in self.entries.items():
            jet = fn(coords)
            for a, b in ((i, k), (k, i)) if i != k else ((i, k),):
                h[:, a, b] = jet.val
                dh[:, :, a, b] = jet.grad
                ddh[:, :, :, a, b] = jet.hess
        return h, dh, ddh

    def describe(self):
        return self._description


class ScaledMetricField(SymmetricTensorField):
    """h = u * g for a scalar field u and metric spec g (used by trace identities)."""

    def __init__(self, spec, u: ScalarField):
        self.spec = spec
        self.u = u
        self.support = u.support

    def component_arrays(self, coords):
        coords = as_coords(coords)
        g, dg, ddg = self.spec.component_jets(coords)
        jet = self.u.jet(coords)
        v, gr, he = jet.val, jet.grad, jet.hess
        # d_a (u g_ij) = u_a g_ij + u g_ij,a and the symmetric product rule above it
        h = v[:, None, None] * g
        dh = v[:, None, None, None] * dg + gr[:, :, None, None] * g[:, None]
        ddh = (he[:, :, :, None, None] * g[:, None, None]
               + np.einsum("pa,pbij->pabij", gr, dg)
               + np.einsum("pb,paij->pabij", gr, dg)
               + v[:, None, None, None, None] * ddg)
        return h, dh, ddh


class ScaledTensorField(SymmetricTensorField):
    """Constant multiple of another tensor field."""

    def __init__(self, base: SymmetricTensorField, scale: float):
        self.base = base
        self.scale = float(scale)
        self.support = base.support
        self.analytic = base.analytic

    def component_arrays(self, coords):
        h, dh, ddh = self.base.component_arrays(coords)
        return self.scale * h, self.scale * dh, self.scale * ddh

    def describe(self):
        return {"kind": "scaled", "scale": self.scale, "base": self.base.describe()}


class MetricDeviationField(SymmetricTensorField):
    """h = g - g0 as a tensor field (both metric specs on the same chart)."""

    def __init__(self, spec, base_spec):
        self.spec = spec
        self.base = base_spec

    def component_arrays(self, coords):
        coords = as_coords(coords)
        g, dg, ddg = self.spec.component_jets(coords)
        g0, dg0, ddg0 = self.base.component_jets(coords)
        return g - g0, dg - dg0, ddg - ddg0


class FrameComponentField(SymmetricTensorField):
    """Tensor given by frame components kappa(e_i, e_j) as jet functions.

    Chart components are h_ab = kappa_ab / (c_a c_b) with the background frame
    coefficients; the reciprocal coefficients 1/c_1 = (1+r^2)^(-1/2) and
    1/c_{k+1} = r prod_{j<k} sin(theta_j) are assembled as jets.
    """

    def __init__(self, n: int, kappa_entries: dict, support=None, description=None):
        self.n = n
        self.entries = kappa_entries
        self.support = support
        self._description = description or {"kind": "frame_components"}

    @staticmethod
    def _inv_frame_jets(coords):
        cj = J.coordinate_jets(coords)
        r = cj[0]
        inv = [(1.0 + r * r) ** -0.5]
        running = r
        inv.append(running)
        for k in range(2, coords.shape[1]):
            running = running * J.jsin(cj[k - 1])
            inv.append(running)
        return inv

    def component_arrays(self, coords):
        coords = as_coords(coords)
        npts, n = coords.shape
        inv = self._inv_frame_jets(coords)
        h = np.zeros((npts, n, n))
        dh = np.zeros((npts, n, n, n))
        ddh = np.zeros((npts, n, n, n, n))
        for (i, k), fn in self.entries.items():
            jet = fn(coords) * inv[i] * inv[k]
            for a, b in ((i, k), (k, i)) if i != k else ((i, k),):
                h[:, a, b] = jet.val
                dh[:, :, a, b] = jet.grad
                ddh[:, :, :, a, b] = jet.hess
        return h, dh, ddh

    def describe(self):
        return self._description


class FiniteDifferenceTensorField(SymmetricTensorField):
    """Wraps a components callable; derivatives by nested central differences."""

    analytic = False

    def __init__(self, n: int, comps_fn, support=None, description=None):
        self.n = n
        self.comps_fn = comps_fn
        self.support = support
        self._description = description or {"kind": "finite_difference"}

    def _steps(self, coords):
        steps = np.full(coords.shape, FD_ANGLE_STEP)
        steps[:, 0] = FD_RADIAL_SCALE * (1.0 + coords[:, 0])
        return steps

    def component_arrays(self, coords):
        coords = as_coords(coords)
        npts, n = coords.shape
        f0 = np.asarray(self.comps_fn(coords))
        steps = self._steps(coords)
        dh = np.zeros((npts, n, n, n))
        ddh = np.zeros((npts, n, n, n, n))
        shifted = {}

        def ev(offsets):
            key = tuple(offsets.items())
            if key not in shifted:
                pts = coords.copy()
                for axis, mult in offsets.items():
                    pts[:, axis] += mult * steps[:, axis]
                shifted[key] = np.asarray(self.comps_fn(pts))
            return shifted[key]

        for a in range(n):
            da = steps[:, a][:, None, None]
            dh[:, a] = (ev({a: 1}) - ev({a: -1})) / (2.0 * da)
            ddh[:, a, a] = (ev({a: 1}) - 2.0 * f0 + ev({a: -1})) / da ** 2
            for b in range(a + 1, n):
                db = steps[:, b][:, None, None]
                mixed = (ev({a: 1, b: 1}) - ev({a: 1, b: -1})
                         - ev({a: -1, b: 1}) + ev({a: -1, b: -1})) / (4.0 * da * db)
                ddh[:, a, b] = mixed
                ddh[:, b, a] = mixed
        return f0, dh, ddh

    def describe(self):
        return self._description


class AxisConcentratedPerturbation(FrameComponentField):
    """Decaying frame bump concentrated around a Cartesian axis direction.

    kappa(e_1, e_1) = amp * switch(r) * r^(-rate) * exp(width * (x_hat . axis - 1));
    all other frame components vanish.  Rotating the chart by R maps this field
    to the same field with axis R . axis, which is what the mass-vector
    equivariance checks exercise.
    """

    def __init__(self, n: int, axis, amp: float = 1e-2, rate: float = 2.5,
                 width: float = 6.0, onset: float = 4.0):
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        self.axis, self.amp, self.rate = axis, float(amp), float(rate)
        self.width, self.onset = float(width), float(onset)

        def kappa11(coords):
            r = J.coordinate_jets(coords)[0]
            u = unit_vector_jets(coords)
            dot = sum((axis[i] * u[i] for i in range(n)), J.constant(0.0, *coords.shape))
            radial = J.smooth_switch(r, onset) * (r ** (-rate)) * amp
            return radial * J.jexp((dot - 1.0) * width)

        super().__init__(n, {(0, 0): kappa11},
                         description={"kind": "axis_bump", "axis": list(axis),
                                      "amp": amp, "rate": rate, "width": width,
                                      "onset": onset})

    def rotated(self, R: np.ndarray) -> "AxisConcentratedPerturbation":
        return AxisConcentratedPerturbation(len(self.axis), R @ self.axis,
                                            self.amp, self.rate, self.width,
                                            self.onset)


class CartesianTensorField(SymmetricTensorField):
    """Tensor prescribed by Cartesian components H_cd(x), pulled back to the chart.

    Chart components are h_ab = sum_cd (dx_c/da)(dx_d/db) H_cd; the Jacobian
    jets come from closed-form trig monomials, so a field smooth in Cartesian
    terms stays smooth across the chart poles.
    """

    def __init__(self, n: int, entries: dict, support=None, description=None):
        self.n = n
        self.entries = entries  # {(c, d): fn(coords) -> Jet}, c <= d
        self.support = support
        self._description = description or {"kind": "cartesian_components"}

    def component_arrays(self, coords):
        from .chart import chart_jacobian_jets
        coords = as_coords(coords)
        npts, n = coords.shape
        jac = chart_jacobian_jets(coords)
        h = np.zeros((npts, n, n))
        dh = np.zeros((npts, n, n, n))
        ddh = np.zeros((npts, n, n, n, n))
        H = {}
        for (c, d), fn in self.entries.items():
            H[(c, d)] = fn(coords)
        for a in range(n):
            for b in range(a, n):
                total = None
                for (c, d), jet in H.items():
                    term = jac[a][c] * jac[b][d] * jet
                    if c != d:
                        term = term + jac[a][d] * jac[b][c] * jet
                    total = term if total is None else total + term
                for i, k in ((a, b), (b, a)) if a != b else ((a, b),):
                    h[:, i, k] = total.val
                    dh[:, :, i, k] = total.grad
                    ddh[:, :, :, i, k] = total.hess
        return h, dh, ddh

    def describe(self):
        return self._description


def random_compact_tensor(rng, n: int, r_lo: float, r_hi: float,
                          amplitude: float = 1.0) -> CartesianTensorField:
    """Random symmetric Cartesian-component bump supported in (r_lo, r_hi).

    Entries carry a (1+r^2)^(-1) factor so that ``amplitude`` calibrates the
    size of the background-frame components rather than the Euclidean ones
    (frame components of a Euclidean-bounded tensor grow like r^2).
    """
    coeff = rng.uniform(-1, 1, size=(n, n))
    coeff = 0.5 * (coeff + coeff.T)
    lin = rng.uniform(-1, 1, size=(n, n, n))

    entries = {}
    for c in range(n):
        for d in range(c, n):
            def fn(coords, c=c, d=d):
                r = J.coordinate_jets(coords)[0]
                u = unit_vector_jets(coords)
                ang = J.constant(coeff[c, d], *coords.shape)
                for q in range(n):
                    ang = ang + lin[c, d, q] * u[q]
                return (poly_bump_jet(r, r_lo, r_hi) * ang * amplitude
                        * (1.0 + r * r).reciprocal())
            entries[(c, d)] = fn
    return CartesianTensorField(n, entries, support=(r_lo, r_hi),
                                description={"kind": "random_cartesian_bump"})


def perturbation_from_dict(doc: dict, n: int) -> SymmetricTensorField:
    kind = doc.get("kind")
    if kind == "axis_bump":
        extra = set(doc) - {"kind", "axis", "amp", "rate", "width", "onset"}
        if extra:
            raise ValueError(f"unknown perturbation keys: {sorted(extra)}")
        return AxisConcentratedPerturbation(
            n, np.asarray(doc["axis"], dtype=float), float(doc.get("amp", 1e-2)),
            float(doc.get("rate", 2.5)), float(doc.get("width", 6.0)),
            float(doc.get("onset", 4.0)))
    raise ValueError(f"unknown perturbation kind {kind!r}")
