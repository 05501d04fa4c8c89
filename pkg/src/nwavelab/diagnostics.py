"""Quantitative checks tied to the estimates the scheme is supposed to honor.

Each check either measures a number (norms, tails, moduli, distances) or
produces a Report with a pass/fail verdict at an explicit tolerance:

* oleinik_margin: the one-sided slope bound (u^(q-1))_x <= 1/t.
* decay_fit: L^p decay exponents -(1/q)(1 - 1/p), plus the explicit sup
  bound (q ||phi||_1 / ((q-1) t))^(1/q) snapshot by snapshot.
* entropy_residual: the Kruzkov-type inequality tested against one smooth
  bump test function, midpoint in space and trapezoid in time.
* check_nonlocal_comparison: the pointwise inequality at a maximum of w,
      z L(z^b w)(x0) - b/(b+1) w L(z^(b+1))(x0) <= A_z(x0) w(x0),
  with A_z(x0) <= 0; both sides evaluated from the same discrete operator.
* nwave_distance: t^((1/q)(1-1/p)) || u(t) - w_M(t) ||_p, the quantity whose
  decay expresses convergence to the N-wave.

Fields are zero-extended, so every continuum inequality quoted above is
applied to fields that genuinely exist on all of R; the checks are then
legitimate up to rounding, not up to discretization courtesy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .flux import flux, validate_q
from .grid import GridFunction, grid_function
from .kernels import Kernel, convolve, rescale
from .nonlocal_op import apply_L
from .profiles import NWave, nwave_sample

__all__ = [
    "Report",
    "lp_norm",
    "oleinik_margin",
    "decay_fit",
    "energy_report",
    "sup_norm_bound_report",
    "tail_mass",
    "l1_modulus",
    "nwave_distance",
    "EntropyTestCase",
    "entropy_residual",
    "ComparisonCase",
    "check_nonlocal_comparison",
    "random_smooth_field",
]


@dataclass
class Report:
    """Outcome of one named check."""

    name: str
    verdict: str  # "pass" | "fail" | "informational"
    values: dict = field(default_factory=dict)
    tolerance: float | None = None
    detail: str = ""

    def __post_init__(self):
        if self.verdict not in ("pass", "fail", "informational"):
            raise ValueError(f"bad verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def line(self) -> str:
        shown = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.values.items())
        tol = f" (tol {self.tolerance:g})" if self.tolerance is not None else ""
        tail = f"  [{self.detail}]" if self.detail else ""
        return f"{self.verdict.upper():<6} {self.name}: {shown}{tol}{tail}"


def lp_norm(u: GridFunction, p: float, window: tuple | None = None) -> float:
    """||u||_p with cell-average quadrature; window=(x_lo, x_hi) restricts."""
    if p != np.inf and p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    v = u.values
    if window is not None:
        x = u.centers
        v = v[(x >= window[0]) & (x <= window[1])]
    if v.size == 0:
        return 0.0
    if p == np.inf:
        return float(np.max(np.abs(v)))
    return float((np.sum(np.abs(v) ** p) * u.dx) ** (1.0 / p))


def oleinik_margin(u: GridFunction, q: float, t: float, tol_scheme: float) -> Report:
    """max forward difference of u^(q-1), scaled by t; passes iff <= 1 + tol.

    Genuinely negative values are a usage error (the one-sided bound
    concerns nonnegative solutions) and raise rather than being clipped.
    Cells within rounding noise of zero (no lower than -1e-12 times the
    field amplitude; the FFT convolution path leaves that much) are treated
    as exactly zero, since u^(q-1) amplifies subnormal junk.
    """
    validate_q(q)
    if not t > 0:
        raise ValueError(f"need t > 0, got {t}")
    floor = 1e-12 * max(1.0, float(np.max(np.abs(u.values))))
    if np.min(u.values) < -floor:
        raise ValueError(
            f"oleinik margin needs a nonnegative field; min is {np.min(u.values):g}"
        )
    v = np.maximum(u.values, 0.0) ** (q - 1.0)
    m = float(np.max(np.diff(v)) / u.dx) if u.n > 1 else 0.0
    margin = m * t
    return Report(
        name=f"oleinik margin at t={t:g}",
        verdict="pass" if margin <= 1.0 + tol_scheme else "fail",
        values={"margin": margin, "excess": margin - 1.0},
        tolerance=tol_scheme,
    )


def decay_fit(traj, p: float, tol: float = 0.1, sup_tol: float = 1e-10) -> Report:
    """Least-squares log-log slope of ||u(t)||_p over the last time decade.

    Needs at least 5 snapshots spanning a decade.  Target slope is
    -(1/q)(1 - 1/p).  For p = inf the explicit amplitude bound
    (q ||phi||_1 / ((q-1) t))^(1/q) is also enforced at every snapshot
    (worst excess reported); for p = 1 the target slope is 0 and the norm
    must stay below ||phi||_1.
    """
    q = traj.params.q
    times = np.asarray(traj.times)
    if len(times) < 5 or times[-1] < 10.0 * times[0]:
        raise ValueError("decay fit needs >= 5 snapshots spanning a decade")
    norms = np.array([lp_norm(s, p) for s in traj.snapshots])
    sel = times >= times[-1] / 10.0 * (1.0 - 1e-12)
    if sel.sum() < 5:
        raise ValueError("decay fit needs >= 5 snapshots in the last decade")
    slope = float(np.polyfit(np.log(times[sel]), np.log(norms[sel]), 1)[0])
    target = -(1.0 / q) if p == np.inf else -(1.0 / q) * (1.0 - 1.0 / p)
    values = {"slope": slope, "target": target}
    ok = abs(slope - target) <= tol

    phi_l1 = lp_norm(traj.initial, 1)
    if p == np.inf:
        bounds = (q * phi_l1 / ((q - 1.0) * times)) ** (1.0 / q)
        excess = float(np.max(norms - bounds))
        values["sup_excess"] = excess
        ok = ok and excess <= sup_tol
    if p == 1:
        values["l1_growth"] = float(np.max(norms) - phi_l1)
        ok = ok and values["l1_growth"] <= sup_tol
    return Report(
        name=f"decay exponent p={p:g} q={q:g}",
        verdict="pass" if ok else "fail",
        values=values,
        tolerance=tol,
    )


def energy_report(traj, tol: float = 1e-10) -> Report:
    """Scheme never creates L^2 energy: for consecutive snapshots (t=0 in),

        ||u(t2)||_2^2 + dissipation(t1, t2) <= ||u(t1)||_2^2 + tol,

    where dissipation is the nonlocal Dirichlet integral the run
    accumulated.  Consecutive pairs imply all pairs by telescoping.
    Reports the worst energy gain.
    """
    norms2 = [lp_norm(traj.initial, 2) ** 2] + [lp_norm(s, 2) ** 2 for s in traj.snapshots]
    diss = [0.0] + [d for _, d in traj.dissipation_history]
    gains = [
        norms2[i] + (diss[i] - diss[i - 1]) - norms2[i - 1]
        for i in range(1, len(norms2))
    ]
    worst = float(max(gains))
    return Report(
        name="energy dissipation",
        verdict="pass" if worst <= tol else "fail",
        values={"worst_gain": worst, "dissipated": diss[-1]},
        tolerance=tol,
    )


def sup_norm_bound_report(traj, tol: float = 1e-10) -> Report:
    """||u(t)||_inf <= (q ||phi||_1 / ((q-1) t))^(1/q) at every snapshot.

    The amplitude bound for nonnegative data; the initial datum must be
    nonnegative (to rounding).
    """
    if float(np.min(traj.initial.values)) < -1e-12:
        raise ValueError("the amplitude bound concerns nonnegative data")
    q = traj.params.q
    phi_l1 = lp_norm(traj.initial, 1)
    worst = -np.inf
    for t, u in zip(traj.times, traj.snapshots):
        bound = (q * phi_l1 / ((q - 1.0) * t)) ** (1.0 / q)
        worst = max(worst, lp_norm(u, np.inf) - bound)
    return Report(
        name="amplitude bound",
        verdict="pass" if worst <= tol else "fail",
        values={"worst_excess": float(worst)},
        tolerance=tol,
    )


def tail_mass(u: GridFunction, r: float) -> float:
    """int_{|x| > 2R} |u| dx."""
    if not r > 0:
        raise ValueError(f"need R > 0, got {r}")
    x = u.centers
    sel = np.abs(x) > 2.0 * r
    return float(np.sum(np.abs(u.values[sel])) * u.dx)


def l1_modulus(u: GridFunction, h: float) -> float:
    """int |u(x + h) - u(x)| dx for a grid-aligned shift h."""
    if h < 0:
        raise ValueError(f"need h >= 0, got {h}")
    m_real = h / u.dx
    m = int(round(m_real))
    if abs(m_real - m) > 1e-9 * max(1.0, m_real):
        raise ValueError(f"shift {h:g} is not a multiple of dx={u.dx:g}")
    if m == 0:
        return 0.0
    w = np.pad(u.values, (m, m))
    return float(np.sum(np.abs(w[m:] - w[:-m])) * u.dx)


def nwave_distance(u: GridFunction, nw: NWave, t: float, p: float) -> float:
    """t^((1/q)(1-1/p)) || u - w_M(t) ||_p on u's grid."""
    w = nwave_sample(nw, t, u.x_min, u.dx, u.n)
    inv_p = 0.0 if p == np.inf else 1.0 / p
    scale = t ** ((1.0 / nw.q) * (1.0 - inv_p))
    return scale * lp_norm(u.with_values(u.values - w.values), p)


# ---------------------------------------------------------------------------
# Kruzkov entropy residual


def _bump(s: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside; peak value 1."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0 - 1e-12
    safe = np.where(inside, s, 0.0)
    with np.errstate(over="ignore"):
        out = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe ** 2)), 0.0)
    return out


def _bump_prime(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0 - 1e-12
    safe = np.where(inside, s, 0.0)
    return np.where(inside, _bump(s) * (-2.0 * safe) / (1.0 - safe ** 2) ** 2, 0.0)


@dataclass(frozen=True)
class EntropyTestCase:
    """A Kruzkov constant k and a tensor-product bump test function.

    phi(t, x) = bump((t - t_center)/t_halfwidth) * bump((x - x_center)/x_halfwidth),
    smooth and compactly supported in (0, inf) x R (so t_center > t_halfwidth).
    """

    k: float
    t_center: float
    t_halfwidth: float
    x_center: float
    x_halfwidth: float

    def __post_init__(self):
        if not (self.t_halfwidth > 0 and self.x_halfwidth > 0):
            raise ValueError("bump halfwidths must be positive")
        if not self.t_center - self.t_halfwidth > 0:
            raise ValueError("test function must be supported in positive times")

    def phi(self, t: float, x: np.ndarray) -> np.ndarray:
        return _bump((t - self.t_center) / self.t_halfwidth) * _bump(
            (x - self.x_center) / self.x_halfwidth
        )

    def phi_t(self, t: float, x: np.ndarray) -> np.ndarray:
        return (
            _bump_prime((t - self.t_center) / self.t_halfwidth)
            / self.t_halfwidth
            * _bump((x - self.x_center) / self.x_halfwidth)
        )

    def phi_x(self, t: float, x: np.ndarray) -> np.ndarray:
        return (
            _bump((t - self.t_center) / self.t_halfwidth)
            * _bump_prime((x - self.x_center) / self.x_halfwidth)
            / self.x_halfwidth
        )


def entropy_residual(
    times,
    snapshots,
    q: float,
    case: EntropyTestCase,
    tol_quad: float,
    alpha: float = 0.0,
    lam: float = 1.0,
    kernel: Kernel | None = None,
) -> Report:
    """Residual of the Kruzkov-type inequality for one (k, phi) pair.

    R = intint |u-k| phi_t + sgn(u-k)(f(u)-f(k)) phi_x dx dt
        - alpha lam^q intint (|u-k| - sgn(u-k) (J_lam*(u-k))) phi dx dt,

    midpoint in space, trapezoid over the snapshot times; passes iff
    R >= -tol_quad.  alpha = 0 drops the nonlocal term (the pure
    conservation-law form, e.g. for the closed-form N-wave).  sgn(0) = 0.
    J_lam*(u-k) is evaluated as J_lam*u - k, exact for the zero-extended u
    because the kernel has unit mass.
    """
    validate_q(q)
    times = np.asarray(times, dtype=float)
    if len(times) != len(snapshots) or len(times) < 2:
        raise ValueError("need matching times and snapshots, at least two")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    inside = (times > case.t_center - case.t_halfwidth) & (
        times < case.t_center + case.t_halfwidth
    )
    if inside.sum() < 5:
        raise ValueError(
            "snapshot schedule too sparse across the test function's time support"
        )
    if alpha > 0.0 and kernel is None:
        raise ValueError("nonlocal form needs the kernel")
    j_lam = rescale(kernel, lam) if (alpha > 0.0 and lam != 1.0) else kernel

    k = case.k
    fk = flux(k, q)
    integrand = np.zeros(len(times))
    for i, (t, u) in enumerate(zip(times, snapshots)):
        if not inside[i]:
            continue
        x = u.centers
        v = u.values
        sgn = np.sign(v - k)
        a = np.sum(
            (np.abs(v - k) * case.phi_t(t, x) + sgn * (flux(v, q) - fk) * case.phi_x(t, x))
        ) * u.dx
        b = 0.0
        if alpha > 0.0:
            conv = convolve(j_lam, u).values - k
            b = (
                alpha
                * lam ** q
                * np.sum((np.abs(v - k) - sgn * conv) * case.phi(t, x))
                * u.dx
            )
        integrand[i] = a - b
    residual = float(np.trapezoid(integrand, times))
    return Report(
        name=f"entropy residual k={k:g}",
        verdict="pass" if residual >= -tol_quad else "fail",
        values={"residual": residual},
        tolerance=tol_quad,
    )


# ---------------------------------------------------------------------------
# Pointwise nonlocal comparison at a maximum


@dataclass(frozen=True)
class ComparisonCase:
    """Inputs for the pointwise comparison inequality.

    z >= 0 bounded, w bounded with its maximum at index x0 (the global
    maximum of the zero-extended field, so w[x0] >= 0 is required), and
    exponent beta >= 0.  Ties in the maximum resolve to the lowest index.
    """

    beta: float
    z: GridFunction
    w: GridFunction
    x0: int

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        self.z.require_same_geometry(self.w, "z and w")
        if not np.all(np.isfinite(self.z.values)) or not np.all(np.isfinite(self.w.values)):
            raise ValueError("z and w must be finite")
        if np.min(self.z.values) < 0:
            raise ValueError("z must be nonnegative")
        if not 0 <= self.x0 < self.w.n:
            raise ValueError("x0 out of range")
        wmax = float(np.max(self.w.values))
        if self.w.values[self.x0] < wmax:
            raise ValueError("x0 must attain the maximum of w")
        if int(np.argmax(self.w.values)) != self.x0:
            raise ValueError("ties in the maximum must resolve to the lowest index")
        if self.w.values[self.x0] < 0:
            raise ValueError("the zero-extended w attains its maximum off-grid; invalid case")

    @classmethod
    def at_argmax(cls, beta: float, z: GridFunction, w: GridFunction) -> "ComparisonCase":
        return cls(beta=beta, z=z, w=w, x0=int(np.argmax(w.values)))


def check_nonlocal_comparison(kernel: Kernel, case: ComparisonCase, tol: float = 1e-10) -> Report:
    """Verify A_z(x0) <= tol and LHS <= A_z(x0) w(x0) + tol at w's maximum.

    LHS = z(x0) L(z^b w)(x0) - b/(b+1) w(x0) L(z^(b+1))(x0) and

    A_z(x0) = sum_k J_k dx [ z(x0) z^b(x0 - k dx) - b/(b+1) z^(b+1)(x0 - k dx)
                             - 1/(b+1) z^(b+1)(x0) ],

    with z^b extended by 0^b off-grid (1 when b = 0, matching the continuum
    convention z^0 == 1).
    """
    b = case.beta
    z, w, x0 = case.z, case.w, case.x0
    zb = z.values ** b
    zb1 = z.values ** (b + 1.0)
    l_zbw = apply_L(kernel, z.with_values(zb * w.values)).values[x0]
    l_zb1 = apply_L(kernel, z.with_values(zb1)).values[x0]
    lhs = z.values[x0] * l_zbw - b / (b + 1.0) * w.values[x0] * l_zb1

    yi = x0 - kernel.offsets
    valid = (yi >= 0) & (yi < z.n)
    pad_b = 1.0 if b == 0.0 else 0.0
    zb_y = np.where(valid, zb[np.clip(yi, 0, z.n - 1)], pad_b)
    zb1_y = np.where(valid, zb1[np.clip(yi, 0, z.n - 1)], 0.0)
    wgt = kernel.weights
    a_z = float(
        np.dot(wgt, z.values[x0] * zb_y - b / (b + 1.0) * zb1_y)
        - (1.0 / (b + 1.0)) * zb1[x0] * wgt.sum()
    )
    rhs = a_z * w.values[x0]
    ok = (a_z <= tol) and (lhs <= rhs + tol)
    return Report(
        name=f"nonlocal comparison beta={b:g}",
        verdict="pass" if ok else "fail",
        values={"a_z": a_z, "lhs": float(lhs), "rhs": float(rhs)},
        tolerance=tol,
    )


# ---------------------------------------------------------------------------
# Random smooth fields for randomized checks


def random_smooth_field(
    rng: np.random.Generator,
    x_min: float,
    dx: float,
    n: int,
    amplitude: float = 1.0,
    nonnegative: bool = False,
    n_bumps: int = 3,
    margin_cells: int = 0,
) -> GridFunction:
    """A few random Gaussian bumps, tapered to zero near the boundary.

    The taper guarantees the zero-extended field is smooth-ish across the
    domain edge and that its global extrema sit inside the grid, which the
    comparison checks rely on.
    """
    x = x_min + (np.arange(n) + 0.5) * dx
    span = n * dx
    values = np.zeros(n)
    for _ in range(n_bumps):
        c = x_min + span * rng.uniform(0.25, 0.75)
        width = span * rng.uniform(0.03, 0.15)
        a = amplitude * rng.uniform(-1.0, 1.0)
        values += a * np.exp(-(((x - c) / width) ** 2))
    if nonnegative:
        values = np.abs(values)
    margin = max(margin_cells, n // 16, 2)
    taper = np.ones(n)
    ramp = 0.5 - 0.5 * np.cos(np.pi * (np.arange(margin) + 0.5) / margin)
    taper[:margin] = ramp
    taper[n - margin:] = ramp[::-1]
    return grid_function(values * taper, x_min, dx)
