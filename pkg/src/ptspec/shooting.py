"""Dirichlet spectrum by real-line shooting.

The Schrodinger equation psi'' + [E + (ix)^N] psi = 0 is integrated from the
origin out to x = +/- d for the fundamental pair u (u(0)=1, u'(0)=0) and
v (v(0)=0, v'(0)=1).  Imposing psi(+/-d) = 0 on A u + B v gives the
eigenvalue condition

    F(E) = u(E, d) v(E, -d) - u(E, -d) v(E, d) = 0,

which is real for real E whenever the potential is exactly PT symmetric;
the imaginary residue of F is therefore a live diagnostic of the branch
rule.  Eigenvalues are located by scanning F over an energy grid seeded by
the semiclassical level spacing, refining each sign change, and certifying
every root against a re-solve at 1.2 d.

u and v are propagated together and share every rescaling step, so the
determinant keeps its zero set through forbidden-region growth that can
exceed exp(7000).
"""

import math
from dataclasses import dataclass, field

from . import numerics, semiclassical
from .numerics import OdeState
from .potential import PotentialSpec, phase_factor

# half-width of the disclaimer window around the flat-top barrier exponents
IP_WINDOW = 0.15
_IP_POINTS = (4.0, 8.0)


def is_near_ip(N):
    """True when N sits inside the unreliable window around N = 4 or 8."""
    return any(abs(N - p) < IP_WINDOW for p in _IP_POINTS)


@dataclass(frozen=True)
class ShootingOptions:
    d: float | None = None            # None -> choose_d at scan_E_max
    scan_E_max: float = 20.0
    scan_resolution: float | None = None   # None -> adaptive from level spacing
    root_tol: float = 1e-6
    d_convergence_tol: float = 1e-2
    local_ode_tol: float = 1e-10
    rescale_threshold: float = 1e100
    levels: int | None = None         # stop after this many eigenvalues

    def __post_init__(self):
        if self.scan_E_max <= 0:
            raise ValueError("scan_E_max must be positive")
        for name in ("root_tol", "d_convergence_tol", "local_ode_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class MissFunctionTrace:
    samples: list = field(default_factory=list)  # (E, F, im_residual)


@dataclass(frozen=True)
class DirichletEigenvalue:
    n: int
    E: float
    d_used: float
    d_shift_change: float
    converged: bool


def _pair_kernel_py(N, E, x_target, rtol, rescale_threshold,
                    ph_re, ph_im):
    """Propagate the fundamental pair from 0 to x_target with shared
    rescaling.  (ix)^N on this side is |x|^N * (ph_re + i ph_im).

    Returns (u, up, v, vp, log_scale, steps, status); status -1 flags a
    step-size underflow.
    """
    sgn = 1.0 if x_target > 0.0 else -1.0
    ph = complex(ph_re, ph_im)
    u = 1.0 + 0.0j
    up = 0.0 + 0.0j
    v = 0.0 + 0.0j
    vp = 1.0 + 0.0j
    log_scale = 0.0
    x = 0.0
    h = sgn * min(1e-3, abs(x_target) / 10.0)
    nsteps = 0
    while True:
        rem = x_target - x
        if sgn * rem <= 0.0:
            break
        if abs(h) > abs(rem):
            h = rem
        q1 = E + abs(x) ** N * ph
        k1u = up
        k1up = -q1 * u
        k1v = vp
        k1vp = -q1 * v
        xa = x + 0.2 * h
        q = E + abs(xa) ** N * ph
        tu = u + h * (0.2 * k1u)
        tup = up + h * (0.2 * k1up)
        tv = v + h * (0.2 * k1v)
        tvp = vp + h * (0.2 * k1vp)
        k2u = tup
        k2up = -q * tu
        k2v = tvp
        k2vp = -q * tv
        xa = x + 0.3 * h
        q = E + abs(xa) ** N * ph
        tu = u + h * (0.075 * k1u + 0.225 * k2u)
        tup = up + h * (0.075 * k1up + 0.225 * k2up)
        tv = v + h * (0.075 * k1v + 0.225 * k2v)
        tvp = vp + h * (0.075 * k1vp + 0.225 * k2vp)
        k3u = tup
        k3up = -q * tu
        k3v = tvp
        k3vp = -q * tv
        xa = x + 0.8 * h
        q = E + abs(xa) ** N * ph
        a41 = 44.0 / 45.0
        a42 = -56.0 / 15.0
        a43 = 32.0 / 9.0
        tu = u + h * (a41 * k1u + a42 * k2u + a43 * k3u)
        tup = up + h * (a41 * k1up + a42 * k2up + a43 * k3up)
        tv = v + h * (a41 * k1v + a42 * k2v + a43 * k3v)
        tvp = vp + h * (a41 * k1vp + a42 * k2vp + a43 * k3vp)
        k4u = tup
        k4up = -q * tu
        k4v = tvp
        k4vp = -q * tv
        xa = x + (8.0 / 9.0) * h
        q = E + abs(xa) ** N * ph
        a51 = 19372.0 / 6561.0
        a52 = -25360.0 / 2187.0
        a53 = 64448.0 / 6561.0
        a54 = -212.0 / 729.0
        tu = u + h * (a51 * k1u + a52 * k2u + a53 * k3u + a54 * k4u)
        tup = up + h * (a51 * k1up + a52 * k2up + a53 * k3up + a54 * k4up)
        tv = v + h * (a51 * k1v + a52 * k2v + a53 * k3v + a54 * k4v)
        tvp = vp + h * (a51 * k1vp + a52 * k2vp + a53 * k3vp + a54 * k4vp)
        k5u = tup
        k5up = -q * tu
        k5v = tvp
        k5vp = -q * tv
        xa = x + h
        q6 = E + abs(xa) ** N * ph
        a61 = 9017.0 / 3168.0
        a62 = -355.0 / 33.0
        a63 = 46732.0 / 5247.0
        a64 = 49.0 / 176.0
        a65 = -5103.0 / 18656.0
        tu = u + h * (a61 * k1u + a62 * k2u + a63 * k3u + a64 * k4u + a65 * k5u)
        tup = up + h * (a61 * k1up + a62 * k2up + a63 * k3up + a64 * k4up
                        + a65 * k5up)
        tv = v + h * (a61 * k1v + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v)
        tvp = vp + h * (a61 * k1vp + a62 * k2vp + a63 * k3vp + a64 * k4vp
                        + a65 * k5vp)
        k6u = tup
        k6up = -q6 * tu
        k6v = tvp
        k6vp = -q6 * tv
        b1 = 35.0 / 384.0
        b3 = 500.0 / 1113.0
        b4 = 125.0 / 192.0
        b5 = -2187.0 / 6784.0
        b6 = 11.0 / 84.0
        nu = u + h * (b1 * k1u + b3 * k3u + b4 * k4u + b5 * k5u + b6 * k6u)
        nup = up + h * (b1 * k1up + b3 * k3up + b4 * k4up + b5 * k5up
                        + b6 * k6up)
        nv = v + h * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v)
        nvp = vp + h * (b1 * k1vp + b3 * k3vp + b4 * k4vp + b5 * k5vp
                        + b6 * k6vp)
        k7u = nup
        k7up = -q6 * nu
        k7v = nvp
        k7vp = -q6 * nv
        e1 = 71.0 / 57600.0
        e3 = -71.0 / 16695.0
        e4 = 71.0 / 1920.0
        e5 = -17253.0 / 339200.0
        e6 = 22.0 / 525.0
        e7 = -1.0 / 40.0
        eu = h * (e1 * k1u + e3 * k3u + e4 * k4u + e5 * k5u + e6 * k6u
                  + e7 * k7u)
        eup = h * (e1 * k1up + e3 * k3up + e4 * k4up + e5 * k5up + e6 * k6up
                   + e7 * k7up)
        ev = h * (e1 * k1v + e3 * k3v + e4 * k4v + e5 * k5v + e6 * k6v
                  + e7 * k7v)
        evp = h * (e1 * k1vp + e3 * k3vp + e4 * k4vp + e5 * k5vp + e6 * k6vp
                   + e7 * k7vp)
        su = rtol * max(abs(u), abs(nu)) + 1e-300
        sup = rtol * max(abs(up), abs(nup)) + 1e-300
        sv = rtol * max(abs(v), abs(nv)) + 1e-300
        svp = rtol * max(abs(vp), abs(nvp)) + 1e-300
        err = max(max(abs(eu) / su, abs(eup) / sup),
                  max(abs(ev) / sv, abs(evp) / svp))
        if err <= 1.0:
            x = x + h
            u, up, v, vp = nu, nup, nv, nvp
            nsteps += 1
            m = max(max(abs(u), abs(up)), max(abs(v), abs(vp)))
            if m > rescale_threshold:
                f = 1.0 / m
                u *= f
                up *= f
                v *= f
                vp *= f
                log_scale += math.log(m)
        fac = 0.9 * err ** -0.2 if err > 0.0 else 5.0
        if fac > 5.0:
            fac = 5.0
        if fac < 0.2:
            fac = 0.2
        h = h * fac
        if abs(h) < 1e-14 * max(1.0, abs(x)):
            return u, up, v, vp, log_scale, nsteps, -1
    return u, up, v, vp, log_scale, nsteps, 0


try:
    import numba

    _pair_kernel = numba.njit(cache=True, nogil=True)(_pair_kernel_py)
except ImportError:  # pragma: no cover - numba is a declared dependency
    _pair_kernel = _pair_kernel_py


def fundamental_pair(spec, E, d, side, opts=ShootingOptions()):
    """Integrate the fundamental pair u, v from the origin to side * d.

    Both solutions advance through the same adaptive steps and share every
    rescaling, so the pair carries a single log_scale and their Wronskian
    u v' - u' v equals exp(-2 log_scale) in stored units.
    """
    if d <= 0:
        raise ValueError("d must be positive")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    sgn = 1.0 if side == "right" else -1.0
    ph = phase_factor(spec.N, 1 if sgn > 0 else -1)
    u, up, v, vp, ls, _steps, status = _pair_kernel(
        float(spec.N), float(E), sgn * float(d),
        opts.local_ode_tol, opts.rescale_threshold, ph.real, ph.imag)
    if status != 0:
        raise numerics.ConvergenceError(
            f"shooting integration failed (step underflow) at "
            f"N = {spec.N}, E = {E}, side = {side}")
    x_end = sgn * d
    return (OdeState(x_end, u, up, ls), OdeState(x_end, v, vp, ls))


def choose_d(spec, E_max):
    """Matching distance: three turning-point radii, floored at 6 and capped
    at 10.  The floor and cap are configuration, not physics."""
    if not E_max > 0:
        raise ValueError("E_max must be positive")
    return min(max(3.0 * E_max ** (1.0 / spec.N), 6.0), 10.0)


# weight of the floor term in the imaginary-residue normalization; keeps the
# diagnostic finite at the zeros of F where |D| itself vanishes
_IM_EPS = 1e-2


def miss_function(spec, E, d, opts=ShootingOptions(), form="determinant"):
    """The Dirichlet matching function at energy E.

    form="determinant": F = Re(D)/scale with
        D = u(d) v(-d) - u(-d) v(d),  scale = max(|u(d)v(-d)|, |u(-d)v(d)|).
    form="ratio": F = Re(u(d)/v(d) - u(-d)/v(-d)), the equivalent ratio
    condition (same zeros wherever v(d) != 0).

    Returns (F, im_residual) where im_residual measures how far D strays
    from the real axis relative to its scale; exact PT symmetry makes it
    vanish for real E.
    """
    ur, vr = fundamental_pair(spec, E, d, "right", opts)
    ul, vl = fundamental_pair(spec, E, d, "left", opts)
    D = ur.y * vl.y - ul.y * vr.y
    scale = max(abs(ur.y * vl.y), abs(ul.y * vr.y)) + 1e-300
    im_residual = abs(D.imag) / (abs(D) + _IM_EPS * scale)
    if form == "determinant":
        return D.real / scale, im_residual
    if form == "ratio":
        if vr.y == 0 or vl.y == 0:
            return math.inf, im_residual
        R = ur.y / vr.y - ul.y / vl.y
        return R.real, im_residual
    raise ValueError(f"unknown miss-function form {form!r}")


def _scan_step(N, E_max, resolution):
    """Grid spacing: half the smallest semiclassical level spacing below
    E_max, floored at 0.05."""
    if resolution is not None:
        return float(resolution)
    levels = []
    n = 0
    while n < 200:
        e = semiclassical.energy_mxtp(N, n).E
        levels.append(e)
        if e > E_max:
            break
        n += 1
    gaps = [b - a for a, b in zip(levels, levels[1:])]
    if not gaps:
        gaps = [E_max]
    return max(0.05, min(gaps) / 2.0)


def _expected_count(N, E_max):
    n = 0
    while n < 200 and semiclassical.energy_mxtp(N, n).E <= E_max:
        n += 1
    return n


def scan_ceiling(N, levels):
    """Energy ceiling that comfortably covers the first `levels` Dirichlet
    eigenvalues (the semiclassical ladder runs slightly below the Dirichlet
    one, so the next rung up is a safe cap)."""
    return semiclassical.energy_mxtp(N, levels).E * 1.05 + 1.0


def find_eigenvalues(spec, opts=ShootingOptions(), trace=None):
    """Scan (0, scan_E_max], bracket the sign changes of F, refine each root,
    and certify it against a re-solve at 1.2 d.

    Near the flat-top barrier exponents the roots exist but drift with d;
    they are returned with converged=False rather than suppressed.  If the
    scan finds fewer sign changes than the semiclassical ladder predicts it
    is repeated on a twice-finer grid (twice at most), which matters close
    to the isolated points where box states crowd the spectrum.
    """
    N = spec.N
    E_max = opts.scan_E_max
    d = opts.d if opts.d is not None else choose_d(spec, E_max)
    step = _scan_step(N, E_max, opts.scan_resolution)
    expected = _expected_count(N, E_max)

    def run_scan(h):
        grid = []
        E = h * 0.5
        while E <= E_max:
            grid.append(E)
            E += h
        vals = [miss_function(spec, E, d, opts) for E in grid]
        if trace is not None:
            trace.samples.extend(
                (E, F, im) for E, (F, im) in zip(grid, vals))
        roots = []
        for i in range(len(grid) - 1):
            F0, F1 = vals[i][0], vals[i + 1][0]
            if F0 == 0.0:
                roots.append(grid[i])
            elif F0 * F1 < 0.0:
                roots.append(numerics.refine_root(
                    lambda E: miss_function(spec, E, d, opts)[0],
                    grid[i], grid[i + 1], opts.root_tol))
        return roots

    roots = run_scan(step)
    for _ in range(2):
        if len(roots) >= expected or opts.scan_resolution is not None:
            break
        step /= 2.0
        roots = run_scan(step)

    out = []
    d_big = 1.2 * d
    for n, E in enumerate(sorted(roots)):
        if opts.levels is not None and n >= opts.levels:
            break
        shifted = _refine_near(spec, E, d_big, opts)
        if shifted is None:
            out.append(DirichletEigenvalue(
                n=n, E=E, d_used=d, d_shift_change=math.inf, converged=False))
        else:
            change = abs(E - shifted)
            out.append(DirichletEigenvalue(
                n=n, E=E, d_used=d, d_shift_change=change,
                converged=change <= opts.d_convergence_tol))
    return out


def _refine_near(spec, E0, d, opts):
    """Re-locate the root nearest E0 at a different matching distance; None
    when no sign change appears in a progressively widened window."""
    f = lambda E: miss_function(spec, E, d, opts)[0]
    w = max(20.0 * opts.root_tol, 0.01)
    for _ in range(4):
        lo, hi = max(E0 - w, 1e-12), E0 + w
        try:
            if f(lo) * f(hi) < 0.0:
                return numerics.refine_root(f, lo, hi, opts.root_tol)
        except numerics.ConvergenceError:
            return None
        w *= 4.0
    return None
