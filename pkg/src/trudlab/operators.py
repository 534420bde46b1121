"""Radial evaluation of the degenerate diffusion operators.

Two parabolic operators are implemented in their radial forms:

    trudinger_residual:  Delta_p u - (p-1) u^{p-2} u_t      (finite p)
                         Delta_inf u - 3 u^2 u_t            (infinity)
    log_form_residual:   Delta_p v + (p-1)|Dv|^p - (p-1) v_t
                         Delta_inf v + |Dv|^4 - 3 v_t

with Delta_p u = |u'|^{p-2}((p-1)u'' + (n-1)u'/r) and Delta_inf u = (u')^2 u''.
If u = exp(v) > 0, the first residual equals u^{p-1} (u^3 for infinity) times
the second evaluated at v; `log_transform_consistency` measures that identity.

Profiles supply exact derivative callbacks; grid fields are audited with
finite differences (`fd_residual_on_field`).  All evaluators broadcast over
numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .exponent import Exponent
from .grids import SpaceTimeField


class DomainError(ValueError):
    """Evaluation point outside the declared domain."""


class UnsupportedExponentError(ValueError):
    """Operation not defined for this exponent branch."""


class EvaluationError(RuntimeError):
    """Derivative callbacks failed or the operator value is unbounded."""


class SpaceTimePoint(NamedTuple):
    r: float
    t: float


@dataclass(frozen=True)
class PowerOrigin:
    """Marks a profile behaving like coefficient * r**exponent near r = 0.

    The exponent gamma in (1, 2) makes the second derivative blow up at the
    axis while the operator value stays finite; the evaluators return that
    finite limit instead of feeding inf into the formulas.
    """

    exponent: float
    coefficient: float


@dataclass(frozen=True)
class RadialProfile:
    """Radial function with exact first/second derivative callbacks on [0, R].

    origin is None for profiles that are C^2 at the axis (d1(0) = 0 required
    by symmetry), or a PowerOrigin flag for r**gamma-type behaviour.
    """

    value: Callable
    d1: Callable
    d2: Callable
    R: float
    origin: PowerOrigin | None = None


@dataclass(frozen=True)
class SpaceTimeFunction:
    """Space-time function u(r, t) with analytic derivative callbacks.

    origin_coefficient gives the (possibly time-dependent) coefficient of the
    leading r**origin_exponent term near the axis.
    """

    value: Callable
    dr: Callable
    drr: Callable
    dt: Callable
    R: float = np.inf
    origin_exponent: float | None = None
    origin_coefficient: Callable | None = None

    def at_time(self, t: float) -> RadialProfile:
        origin = None
        if self.origin_exponent is not None:
            origin = PowerOrigin(self.origin_exponent, float(self.origin_coefficient(t)))
        return RadialProfile(
            value=lambda r, t=t: self.value(r, t),
            d1=lambda r, t=t: self.dr(r, t),
            d2=lambda r, t=t: self.drr(r, t),
            R=self.R,
            origin=origin,
        )


def separable_function(profile: RadialProfile, time_factor: Callable,
                       time_factor_prime: Callable) -> SpaceTimeFunction:
    """u(r, t) = profile(r) * time_factor(t) with derived callbacks."""
    origin_exp = None
    origin_coeff = None
    if profile.origin is not None:
        origin_exp = profile.origin.exponent
        base = profile.origin.coefficient
        origin_coeff = lambda t: base * time_factor(t)
    return SpaceTimeFunction(
        value=lambda r, t: profile.value(r) * time_factor(t),
        dr=lambda r, t: profile.d1(r) * time_factor(t),
        drr=lambda r, t: profile.d2(r) * time_factor(t),
        dt=lambda r, t: profile.value(r) * time_factor_prime(t),
        R=profile.R,
        origin_exponent=origin_exp,
        origin_coefficient=origin_coeff,
    )


def log_of(u: SpaceTimeFunction) -> SpaceTimeFunction:
    """v = log u with derivatives pushed through (u must be positive)."""
    return SpaceTimeFunction(
        value=lambda r, t: np.log(u.value(r, t)),
        dr=lambda r, t: u.dr(r, t) / u.value(r, t),
        drr=lambda r, t: u.drr(r, t) / u.value(r, t) - (u.dr(r, t) / u.value(r, t)) ** 2,
        dt=lambda r, t: u.dt(r, t) / u.value(r, t),
        R=u.R,
    )


def grad_factor(q, p: float):
    """|q|^{p-2} with the p = 2 convention |q|^0 = 1 (also at q = 0)."""
    q = np.asarray(q, dtype=float)
    if p == 2.0:
        return np.ones_like(q)
    return np.abs(q) ** (p - 2.0)


def _power_origin_plap(origin: PowerOrigin, p: float, n: int) -> float:
    """Limit of Delta_p (c r^gamma) at r = 0."""
    gamma, c = origin.exponent, origin.coefficient
    if c == 0.0:
        return 0.0
    t_exp = gamma * (p - 1.0) - p
    if t_exp > 0:
        return 0.0
    if t_exp < 0:
        raise EvaluationError(
            f"p-Laplacian of r^{gamma:g} profile is unbounded at the origin for p={p:g}")
    bracket = (p - 1.0) * (gamma - 1.0) + (n - 1.0)
    return abs(c * gamma) ** (p - 2.0) * (c * gamma) * bracket


def _power_origin_inflap(origin: PowerOrigin) -> float:
    """Limit of (u')^2 u'' at r = 0 for u = c r^gamma."""
    gamma, c = origin.exponent, origin.coefficient
    if c == 0.0:
        return 0.0
    t_exp = 3.0 * gamma - 4.0
    if t_exp > 0:
        return 0.0
    if t_exp < 0:
        raise EvaluationError(
            f"infinity-Laplacian of r^{gamma:g} profile is unbounded at the origin")
    return c ** 3 * gamma ** 3 * (gamma - 1.0)


def _check_domain(r, R: float):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > R * (1 + 1e-12)):
        raise DomainError(f"radius outside [0, {R:g}]")
    return r


def eval_p_laplacian_radial(profile: RadialProfile, p: Exponent, n: int, r):
    """Delta_p of a radial profile: |v'|^{p-2}((p-1)v'' + (n-1)v'/r).

    At r = 0 smooth profiles use the symmetric limit (n-1)v'/r -> (n-1)v''(0);
    power-flagged profiles return the closed-form constant of the r^{p/(p-1)}
    calculus (0 when the power is supercritical).
    """
    if p.is_infinity:
        raise UnsupportedExponentError(
            "p-Laplacian needs finite p; use eval_inf_laplacian_radial")
    pf = p.p
    r = _check_domain(r, profile.R)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.empty_like(r)
    at_axis = r == 0.0
    off = ~at_axis
    if np.any(off):
        ro = r[off]
        v1 = np.asarray(profile.d1(ro), dtype=float)
        v2 = np.asarray(profile.d2(ro), dtype=float)
        out[off] = grad_factor(v1, pf) * ((pf - 1.0) * v2 + (n - 1.0) * v1 / ro)
    if np.any(at_axis):
        if profile.origin is not None:
            out[at_axis] = _power_origin_plap(profile.origin, pf, n)
        else:
            v1 = float(profile.d1(0.0))
            v2 = float(profile.d2(0.0))
            out[at_axis] = grad_factor(v1, pf) * ((pf - 1.0) + (n - 1.0)) * v2
    return float(out[0]) if scalar else out


def eval_inf_laplacian_radial(profile: RadialProfile, r):
    """Delta_inf of a radial profile: (u'(r))^2 u''(r), with the axis rule."""
    r = _check_domain(r, profile.R)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    out = np.empty_like(r)
    at_axis = r == 0.0
    off = ~at_axis
    if np.any(off):
        ro = r[off]
        v1 = np.asarray(profile.d1(ro), dtype=float)
        v2 = np.asarray(profile.d2(ro), dtype=float)
        out[off] = v1 ** 2 * v2
    if np.any(at_axis):
        if profile.origin is not None:
            out[at_axis] = _power_origin_inflap(profile.origin)
        else:
            out[at_axis] = float(profile.d1(0.0)) ** 2 * float(profile.d2(0.0))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# parabolic residuals


def _trudinger_terms_finite(u: SpaceTimeFunction, p: float, n: int, r, t):
    prof_plap = np.empty(np.broadcast(r, t).shape)
    r_b = np.broadcast_to(r, prof_plap.shape).astype(float)
    t_b = np.broadcast_to(t, prof_plap.shape).astype(float)
    at_axis = r_b == 0.0
    off = ~at_axis
    if np.any(off):
        v1 = np.asarray(u.dr(r_b[off], t_b[off]), dtype=float)
        v2 = np.asarray(u.drr(r_b[off], t_b[off]), dtype=float)
        prof_plap[off] = grad_factor(v1, p) * ((p - 1.0) * v2 + (n - 1.0) * v1 / r_b[off])
    if np.any(at_axis):
        for idx in np.argwhere(at_axis):
            prof = u.at_time(float(t_b[tuple(idx)]))
            prof_plap[tuple(idx)] = eval_p_laplacian_radial(prof, Exponent.finite(p), n, 0.0)
    uval = np.asarray(u.value(r_b, t_b), dtype=float)
    ut = np.asarray(u.dt(r_b, t_b), dtype=float)
    time_term = (p - 1.0) * grad_factor(uval, p) * ut
    return prof_plap, time_term


def _trudinger_terms_infinity(u: SpaceTimeFunction, r, t):
    shape = np.broadcast(r, t).shape
    dinf = np.empty(shape)
    r_b = np.broadcast_to(r, shape).astype(float)
    t_b = np.broadcast_to(t, shape).astype(float)
    at_axis = r_b == 0.0
    off = ~at_axis
    if np.any(off):
        v1 = np.asarray(u.dr(r_b[off], t_b[off]), dtype=float)
        v2 = np.asarray(u.drr(r_b[off], t_b[off]), dtype=float)
        dinf[off] = v1 ** 2 * v2
    if np.any(at_axis):
        for idx in np.argwhere(at_axis):
            prof = u.at_time(float(t_b[tuple(idx)]))
            dinf[tuple(idx)] = eval_inf_laplacian_radial(prof, 0.0)
    uval = np.asarray(u.value(r_b, t_b), dtype=float)
    ut = np.asarray(u.dt(r_b, t_b), dtype=float)
    return dinf, 3.0 * uval ** 2 * ut


def trudinger_residual_grid(u: SpaceTimeFunction, p: Exponent, n: int, r, t):
    """Vectorized Trudinger residual; returns (residual, term-magnitude scale)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if p.is_finite:
        spatial, time_term = _trudinger_terms_finite(u, p.p, n, r, t)
    else:
        spatial, time_term = _trudinger_terms_infinity(u, r, t)
    return spatial - time_term, np.abs(spatial) + np.abs(time_term)


def trudinger_residual(u: SpaceTimeFunction, p: Exponent, n: int, pt) -> float:
    """Delta_p u - (p-1) u^{p-2} u_t at one point (Delta_inf u - 3 u^2 u_t)."""
    pt = SpaceTimePoint(*pt)
    try:
        res, _ = trudinger_residual_grid(u, p, n, pt.r, pt.t)
    except (DomainError, UnsupportedExponentError, EvaluationError):
        raise
    except Exception as exc:  # derivative callbacks are caller-supplied
        raise EvaluationError(f"derivative callbacks failed at {pt}: {exc}") from exc
    return float(np.asarray(res).flat[0])


def _log_form_terms_finite(v: SpaceTimeFunction, p: float, n: int, r, t):
    spatial, _ = _trudinger_terms_finite(v, p, n, r, t)  # Delta_p v only needs dr/drr
    shape = np.broadcast(r, t).shape
    r_b = np.broadcast_to(r, shape).astype(float)
    t_b = np.broadcast_to(t, shape).astype(float)
    # the |u|^{p-2} u_t factor inside _trudinger_terms is wrong for the log form;
    # recompute the two first-order terms directly.
    v1 = np.empty(shape)
    off = r_b != 0.0
    if np.any(off):
        v1[off] = np.asarray(v.dr(r_b[off], t_b[off]), dtype=float)
    v1[~off] = 0.0  # radial symmetry
    grad_term = (p - 1.0) * np.abs(v1) ** p
    vt = np.asarray(v.dt(r_b, t_b), dtype=float)
    time_term = (p - 1.0) * vt
    return spatial, grad_term, time_term


def _log_form_terms_infinity(v: SpaceTimeFunction, r, t):
    dinf, _ = _trudinger_terms_infinity(v, r, t)
    shape = np.broadcast(r, t).shape
    r_b = np.broadcast_to(r, shape).astype(float)
    t_b = np.broadcast_to(t, shape).astype(float)
    v1 = np.empty(shape)
    off = r_b != 0.0
    if np.any(off):
        v1[off] = np.asarray(v.dr(r_b[off], t_b[off]), dtype=float)
    v1[~off] = 0.0
    vt = np.asarray(v.dt(r_b, t_b), dtype=float)
    return dinf, v1 ** 4, 3.0 * vt


def log_form_residual_grid(v: SpaceTimeFunction, p: Exponent, n: int, r, t):
    """Vectorized log-form residual; returns (residual, term-magnitude scale)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if p.is_finite:
        spatial, grad_term, time_term = _log_form_terms_finite(v, p.p, n, r, t)
    else:
        spatial, grad_term, time_term = _log_form_terms_infinity(v, r, t)
    res = spatial + grad_term - time_term
    return res, np.abs(spatial) + grad_term + np.abs(time_term)


def log_form_residual(v: SpaceTimeFunction, p: Exponent, n: int, pt) -> float:
    """Delta_p v + (p-1)|Dv|^p - (p-1) v_t (Delta_inf v + |Dv|^4 - 3 v_t)."""
    pt = SpaceTimePoint(*pt)
    try:
        res, _ = log_form_residual_grid(v, p, n, pt.r, pt.t)
    except (DomainError, UnsupportedExponentError, EvaluationError):
        raise
    except Exception as exc:
        raise EvaluationError(f"derivative callbacks failed at {pt}: {exc}") from exc
    return float(np.asarray(res).flat[0])


def log_transform_consistency(u: SpaceTimeFunction, p: Exponent, n: int,
                              points) -> float:
    """Max over sample points of |Trudinger(u) - u^w * log_form(log u)|.

    w = p - 1 for finite p, 3 for infinity.  The identity is algebraic, so the
    deviation must sit at rounding scale when analytic derivatives are used.
    points is an (r, t) pair of arrays (or an iterable of pairs).
    """
    if isinstance(points, tuple) and len(points) == 2:
        r, t = np.asarray(points[0], float), np.asarray(points[1], float)
    else:
        pts = np.asarray(list(points), dtype=float)
        r, t = pts[:, 0], pts[:, 1]
    uval = np.asarray(u.value(r, t), dtype=float)
    if np.any(uval <= 0.0):
        raise EvaluationError("log transform needs a positive function on all samples")
    v = log_of(u)
    gamma, _ = trudinger_residual_grid(u, p, n, r, t)
    gform, _ = log_form_residual_grid(v, p, n, r, t)
    weight = uval ** (p.p - 1.0) if p.is_finite else uval ** 3
    return float(np.max(np.abs(gamma - weight * gform)))


# ---------------------------------------------------------------------------
# finite-difference residual audit on grid fields


def _flux(q, p: Exponent):
    if p.is_finite:
        return np.abs(q) ** (p.p - 2.0) * q if p.p != 2.0 else q
    return q ** 3 / 3.0


def fd_laplacian_grid(values: np.ndarray, grid, p: Exponent, n: int) -> np.ndarray:
    """Discrete Delta_p (Delta_inf) per spatial node, boundary column excluded.

    Interior nodes use the second-order central form; the axis uses the
    one-sided symmetry-corrected flux stencil (2n/h) |u_r|^{p-2} u_r at r=h/2,
    which stays consistent for the degenerate r^{p/(p-1)} profiles.
    """
    u = np.atleast_2d(values)
    h = grid.h
    r = grid.r
    out = np.empty((u.shape[0], grid.count - 1))
    # axis node
    q0 = (u[:, 1] - u[:, 0]) / h
    if p.is_finite:
        out[:, 0] = (2.0 * n / h) * _flux(q0, p)
    else:
        out[:, 0] = (2.0 / h) * _flux(q0, p)
    # interior nodes 1 .. count-2, central differences
    ur = (u[:, 2:] - u[:, :-2]) / (2.0 * h)
    urr = (u[:, 2:] - 2.0 * u[:, 1:-1] + u[:, :-2]) / h ** 2
    if p.is_finite:
        pf = p.p
        out[:, 1:] = grad_factor(ur, pf) * ((pf - 1.0) * urr + (n - 1.0) * ur / r[1:-1])
    else:
        out[:, 1:] = ur ** 2 * urr
    return out if values.ndim == 2 else out[0]


def fd_residual_on_field(field: SpaceTimeField, p: Exponent, n: int) -> np.ndarray:
    """Trudinger residual of a sampled field by finite differences.

    Central second-order stencils in r (symmetry-corrected at the axis),
    first-order backward differences in t.  Returns residuals at time levels
    1..end for all spatial nodes except the r = R boundary column.
    """
    if field.grid.count < 3 or field.times.size < 2:
        raise DomainError("field needs at least 3 spatial nodes and 2 time levels")
    u = field.values
    spatial = fd_laplacian_grid(u[1:], field.grid, p, n)
    dt = np.diff(field.times)[:, None]
    ut = (u[1:, :-1] - u[:-1, :-1]) / dt
    uval = u[1:, :-1]
    if p.is_finite:
        time_term = (p.p - 1.0) * grad_factor(uval, p.p) * ut
    else:
        time_term = 3.0 * uval ** 2 * ut
    return spatial - time_term
