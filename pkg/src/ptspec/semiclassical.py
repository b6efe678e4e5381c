"""Closed-form two-turning-point quantization and its quadrature oracle.

Three level formulas share one template,

    E_n = [ Gamma(3/2 + 1/N) sqrt(pi) (n + 1/2) / (D Gamma(1 + 1/N)) ]^(2N/(N+2)),

differing only in the factor D: sin(pi/N) for the original minimal-pair
formula, the piecewise sin((2K+1) pi/N) for the maximal-pair formula, and
D = 1 for the Hermitian well |x|^N.  The action-integral route evaluates the
same quantization condition by adaptive quadrature instead of the Gamma
closed form and serves as an independent oracle for it.
"""

import math
from dataclasses import dataclass

from . import numerics
from .potential import N_MAX, N_MIN, delta_mxtp

METHOD_BB = "BB"
METHOD_MXTP = "MXTP"
METHOD_HERMITIAN = "HERMITIAN"
METHOD_ACTION = "ACTION_NUMERIC"


@dataclass(frozen=True)
class WkbEnergy:
    n: int
    N: float
    E: float
    method: str


def _check_n(n):
    if n < 0 or n != int(n):
        raise ValueError(f"quantum number must be a non-negative integer, got {n}")


def _level(N, n, log_delta):
    # log-domain evaluation: the exponent 2N/(N+2) amplifies rounding in the
    # ratio, so assemble the log first
    log_ratio = (
        numerics.log_gamma(1.5 + 1.0 / N)
        + 0.5 * math.log(math.pi)
        + math.log(n + 0.5)
        - log_delta
        - numerics.log_gamma(1.0 + 1.0 / N)
    )
    return math.exp(2.0 * N / (N + 2.0) * log_ratio)


def energy_bb(N, n):
    """Minimal-pair complex WKB level; analytic in N for N >= 2."""
    if not N >= 2.0:
        raise ValueError(f"energy_bb requires N >= 2, got {N}")
    _check_n(n)
    E = _level(N, n, math.log(math.sin(math.pi / N)))
    return WkbEnergy(n=n, N=N, E=E, method=METHOD_BB)


def energy_mxtp(N, n):
    """Maximal-pair complex WKB level.

    Coincides with energy_bb on [2, 4] and with energy_hermitian at
    N = 6, 10; its derivative in N jumps at N = 4 and N = 8 where the
    maximal-pair index switches.
    """
    if not (N_MIN <= N <= N_MAX):
        raise ValueError(f"energy_mxtp requires {N_MIN} <= N <= {N_MAX}, got {N}")
    _check_n(n)
    E = _level(N, n, math.log(delta_mxtp(N)))
    return WkbEnergy(n=n, N=N, E=E, method=METHOD_MXTP)


def energy_hermitian(N, n):
    """WKB level of the Hermitian well |x|^N; tends to (2n+1)^2 pi^2 / 16
    as N grows."""
    if not N >= 1.0:
        raise ValueError(f"energy_hermitian requires N >= 1, got {N}")
    _check_n(n)
    E = _level(N, n, 0.0)
    return WkbEnergy(n=n, N=N, E=E, method=METHOD_HERMITIAN)


_ACTION_QUAD = numerics.QuadratureSpec(abs_tol=1e-13, rel_tol=1e-13,
                                       max_subdivisions=200)


def action_integral(N, E):
    """Semiclassical action between the maximal turning pair,

        I = 2 E^(1/2 + 1/N) Delta(N) * integral_0^1 sqrt(1 - s^N) ds,

    with the integral done by adaptive quadrature rather than its Gamma
    closed form.  This is the quadrature side of the dual-route check."""
    if not E > 0:
        raise ValueError(f"action_integral requires E > 0, got {E}")
    I0 = numerics.integrate(lambda s: math.sqrt(max(0.0, 1.0 - s ** N)),
                            0.0, 1.0, _ACTION_QUAD)
    return 2.0 * E ** (0.5 + 1.0 / N) * delta_mxtp(N) * I0


def invert_action(N, n):
    """Solve action_integral(N, E) = pi (n + 1/2) for E by bracketed root
    refinement; agrees with energy_mxtp to the quadrature tolerance."""
    _check_n(n)
    target = math.pi * (n + 0.5)
    # the action scales as E^(1/2 + 1/N) exactly, so one quadrature suffices
    action_at_unit = action_integral(N, 1.0)
    power = 0.5 + 1.0 / N
    f = lambda E: action_at_unit * E ** power - target
    guess = energy_mxtp(N, n).E
    lo, hi = 0.7 * guess, 1.4 * guess
    for _ in range(60):
        if f(lo) < 0.0 < f(hi):
            break
        if f(lo) >= 0.0:
            lo *= 0.7
        if f(hi) <= 0.0:
            hi *= 1.4
    else:
        raise numerics.BracketError(
            f"invert_action: could not bracket level n = {n} at N = {N}")
    E = numerics.refine_root(f, lo, hi, tol=1e-11 * guess)
    return WkbEnergy(n=n, N=N, E=E, method=METHOD_ACTION)


def left_right_derivative(N_star, n, h=1e-5):
    """One-sided dE_n/dN of the maximal-pair formula on each side of N_star,
    Richardson-extrapolated (h and h/2), returned as (left, right).

    At the isolated points N = 4, 8 the two slopes differ; at interior
    points they agree to the extrapolation error.
    """
    if not (N_MIN + 2 * h <= N_star <= N_MAX - 2 * h):
        raise ValueError(
            f"left_right_derivative needs N_star in "
            f"[{N_MIN + 2 * h}, {N_MAX - 2 * h}], got {N_star}")
    E0 = energy_mxtp(N_star, n).E

    def one_sided(step, side):
        return side * (E0 - energy_mxtp(N_star - side * step, n).E) / step

    left = 2.0 * one_sided(h / 2, +1) - one_sided(h, +1)
    right = 2.0 * one_sided(h / 2, -1) - one_sided(h, -1)
    return left, right
