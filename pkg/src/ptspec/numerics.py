"""Shared numerical kernels.

Gamma function, adaptive quadrature, bracketed root refinement, a complex
second-order ODE integrator with overflow rescaling, and a dense complex
eigensolver.  Everything here is a pure function of its inputs and safe to
call concurrently.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.optimize


class BracketError(ValueError):
    """Root bracket is invalid (no sign change between the endpoints)."""


class ConvergenceError(RuntimeError):
    """An iteration failed to converge; carries the best estimate so far."""

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass
class OdeState:
    """Solution sample of psi'' + q(x) psi = 0 at position x.

    The true solution value is y * exp(log_scale); log_scale accumulates the
    rescalings applied while integrating through steeply growing regions.
    """

    x: float
    y: complex
    yp: complex
    log_scale: float = 0.0

    @property
    def value(self):
        return self.y * math.exp(self.log_scale)

    @property
    def derivative(self):
        return self.yp * math.exp(self.log_scale)


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    residual_norm: float
    vectors: np.ndarray | None = field(default=None, repr=False)


# Lanczos rational approximation, g = 7, 9 coefficients.  Relative error is
# below 1e-14 on the window used here (arguments in (0.5, 20]); arguments in
# (0, 0.5) are lifted by the recurrence gamma(x) = gamma(x+1)/x.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x):
    """Gamma function for positive real arguments."""
    if not x > 0:
        raise ValueError(f"gamma: argument must be positive, got {x}")
    if x < 0.5:
        return gamma(x + 1.0) / x
    z = x - 1.0
    a = _LANCZOS_C[0]
    for i in range(1, 9):
        a += _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * a


def log_gamma(x):
    """log(gamma(x)) for positive x; arguments here are O(1), so the plain
    log of the Lanczos value loses nothing."""
    return math.log(gamma(x))


def integrate(f, a, b, spec=QuadratureSpec()):
    """Adaptive quadrature of f over [a, b].

    Backed by QUADPACK (scipy.integrate.quad); integrable endpoint
    singularities in the derivative, as for sqrt(1 - s^N) at s -> 1, are
    handled by the extrapolating subdivision.  Raises ConvergenceError with
    the best estimate attached when the subdivision limit is exhausted.
    """
    out = scipy.integrate.quad(
        f, a, b,
        epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, full_output=1,
    )
    result, _abserr, _info = out[0], out[1], out[2]
    if len(out) > 3:
        raise ConvergenceError(
            f"quadrature did not converge on [{a}, {b}]: {out[3]}",
            best_estimate=result,
        )
    return result


def refine_root(f, lo, hi, tol):
    """Refine a bracketed root of f to width <= tol.

    Safeguarded bisection/inverse-interpolation (Brent) that never steps
    outside [lo, hi].  The endpoints must straddle a sign change.  A NaN from
    f aborts with the offending abscissa named.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")

    def checked(x):
        v = f(x)
        if math.isnan(v):
            raise ValueError(f"refine_root: f({x!r}) evaluated to NaN")
        return v

    flo, fhi = checked(lo), checked(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(
            f"refine_root: f({lo}) = {flo} and f({hi}) = {fhi} have the same sign"
        )
    return scipy.optimize.brentq(checked, lo, hi, xtol=tol, rtol=8.9e-16)


# Dormand-Prince 5(4) embedded pair.
_DP_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0)
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
)
_DP_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
         11.0 / 84.0)
# b - bhat, including the FSAL stage
_DP_E = (71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
         -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


def propagate_ode(q, x0, x1, init, rescale_threshold=1e100, local_tol=1e-10):
    """Integrate psi'' + q(x) psi = 0 from x0 to x1 (either direction).

    init is (psi(x0), psi'(x0)).  Adaptive Dormand-Prince 5(4) stepping with
    per-step relative error target local_tol.  Whenever max(|y|, |y'|)
    exceeds rescale_threshold both components are multiplied by the same
    positive factor and log_scale absorbs its logarithm, so the zeros and
    sign structure of the solution are preserved through forbidden-region
    growth far beyond double-precision range.
    """
    if not rescale_threshold > 1.0:
        raise ValueError("rescale_threshold must exceed 1")
    y, yp = complex(init[0]), complex(init[1])
    log_scale = 0.0
    x = float(x0)
    x1 = float(x1)
    if x1 == x:
        return OdeState(x, y, yp, log_scale)
    sgn = 1.0 if x1 > x else -1.0
    h = sgn * min(1e-3, abs(x1 - x) / 10.0)

    def rhs(xx, w, wp):
        qq = complex(q(xx))
        if cmath.isnan(qq):
            raise ValueError(f"propagate_ode: q({xx!r}) evaluated to NaN")
        return wp, -qq * w

    while sgn * (x1 - x) > 0.0:
        if abs(h) > abs(x1 - x):
            h = x1 - x
        ks = [rhs(x, y, yp)]
        for i in range(1, 6):
            ty, typ = y, yp
            for j, a in enumerate(_DP_A[i]):
                ty += h * a * ks[j][0]
                typ += h * a * ks[j][1]
            ks.append(rhs(x + _DP_C[i] * h, ty, typ))
        ny, nyp = y, yp
        for i in range(6):
            ny += h * _DP_B[i] * ks[i][0]
            nyp += h * _DP_B[i] * ks[i][1]
        ks.append(rhs(x + h, ny, nyp))
        ey = eyp = 0.0j
        for i in range(7):
            ey += h * _DP_E[i] * ks[i][0]
            eyp += h * _DP_E[i] * ks[i][1]
        sy = local_tol * max(abs(y), abs(ny)) + 1e-300
        syp = local_tol * max(abs(yp), abs(nyp)) + 1e-300
        err = max(abs(ey) / sy, abs(eyp) / syp)
        if err <= 1.0:
            x += h
            y, yp = ny, nyp
            m = max(abs(y), abs(yp))
            if m > rescale_threshold:
                y /= m
                yp /= m
                log_scale += math.log(m)
        fac = 0.9 * err ** -0.2 if err > 0.0 else 5.0
        h *= min(5.0, max(0.2, fac))
        if abs(h) < 1e-14 * max(1.0, abs(x)):
            raise ConvergenceError(
                f"propagate_ode: step size underflow at x = {x}",
                best_estimate=OdeState(x, y, yp, log_scale),
            )
    return OdeState(x, y, yp, log_scale)


def eig_dense_complex(M, want_vectors=True):
    """All eigenvalues of a dense complex matrix.

    LAPACK Hessenberg + shifted-QR underneath; exactly-real input is routed
    through the real driver, which keeps real spectra exactly real and
    conjugate pairs exact.  residual_norm is max_i ||Mv_i - lambda_i v_i|| /
    (||M|| ||v_i||) when vectors are computed, else eps * n as a
    backward-error proxy.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if M.shape[0] < 1:
        raise ValueError("matrix dimension must be >= 1")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    work = M
    if np.iscomplexobj(M) and not M.imag.any():
        work = M.real
    try:
        if want_vectors:
            vals, vecs = np.linalg.eig(work)
        else:
            vals = np.linalg.eigvals(work)
            vecs = None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    vals = vals.astype(complex)
    n = M.shape[0]
    if vecs is not None:
        vecs = vecs.astype(complex)
        norm = np.linalg.norm(M, 2) if n <= 64 else np.linalg.norm(M, 1)
        if norm == 0.0:
            residual = 0.0
        else:
            R = M @ vecs - vecs * vals[np.newaxis, :]
            residual = float(
                np.max(np.linalg.norm(R, axis=0)
                       / (norm * np.linalg.norm(vecs, axis=0)))
            )
    else:
        residual = float(np.finfo(float).eps * n)
    return EigenResult(eigenvalues=vals, residual_norm=residual, vectors=vecs)
