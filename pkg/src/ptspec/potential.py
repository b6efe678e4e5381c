"""The complex PT-symmetric power potential V(x) = -(ix)^N.

Branch-correct evaluation on the real line, enumeration of the classical
turning points -(ix)^N = E in the complex plane, and selection of the
maximal turning pair (the PT pair whose real part is largest in magnitude).

Units are fixed to 2*mu = hbar^2 = 1 throughout, so the Schrodinger operator
is -d^2/dx^2 + V(x) and the harmonic case N = 2 has levels 2n + 1.

On the real line the branch is V(x) = -|x|^N exp(i N (pi/2) sign(x)) with
V(0) = 0; for integer N this coincides with the direct complex power, and it
enforces the PT conjugation V(-x) = conj(V(x)) bit-exactly, which the
realness of the shooting determinant depends on.
"""

import cmath
import math
import warnings
from dataclasses import dataclass

N_MIN, N_MAX = 2.0, 12.0

# candidate root indices; the three-regime selection (k = 0, 1, 2) covers
# exponents up to 12, and k = 3 would first tie at N = 12
_K_CANDIDATES = (0, 1, 2)


@dataclass(frozen=True)
class PotentialSpec:
    """Exponent N of V(x) = -(ix)^N with the fixed 2*mu = hbar^2 = 1 units."""

    N: float

    def __post_init__(self):
        if not (self.N >= 1.0 and math.isfinite(self.N)):
            raise ValueError(f"exponent N must be finite and >= 1, got {self.N}")
        if not (N_MIN <= self.N <= N_MAX):
            warnings.warn(
                f"N = {self.N} is outside [{N_MIN}, {N_MAX}]; exact PT "
                "symmetry of the spectrum is only established for N >= 2",
                stacklevel=3,
            )


@dataclass(frozen=True)
class TurningPoint:
    k: int
    x: complex
    residual: float


@dataclass(frozen=True)
class TurningPair:
    """PT pair (-conj(x), x) of turning points; delta = Re(right)/E^(1/N)."""

    left: complex
    right: complex
    k: int
    delta: float


def phase_factor(N, sign):
    """exp(i N (pi/2) sign) with exact values snapped at integer N.

    The snapping keeps the Hermitian cases (even phase residue sin(N pi/2)
    ~ 1e-16 otherwise) exactly real, so parity and realness checks hold to
    machine precision.
    """
    if sign == 0:
        return 1.0 + 0.0j
    if N == math.floor(N):
        quarter = int(N) % 4 if sign > 0 else (-int(N)) % 4
        return (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)[quarter]
    a = 0.5 * math.pi * N * (1.0 if sign > 0 else -1.0)
    return complex(math.cos(a), math.sin(a))


def evaluate_potential(spec, x):
    """V(x) = -(ix)^N on the real line, with V(0) = 0."""
    if x == 0.0:
        return 0.0 + 0.0j
    s = 1 if x > 0 else -1
    return -(abs(x) ** spec.N) * phase_factor(spec.N, s)


def _branch_power(z, N):
    """Principal-branch z^N; integer exponents use exact repeated squaring."""
    if N == math.floor(N):
        return z ** int(N)
    return cmath.exp(N * cmath.log(z))


def residual_of(spec, E, x):
    """|-(ix)^N - E| under the module's branch rule."""
    return abs(-_branch_power(1j * x, spec.N) - E)


def _candidate(spec, E, k):
    # x_k = -i E^(1/N) exp(i (2k+1) pi / N)
    r = E ** (1.0 / spec.N)
    theta = (2 * k + 1) * math.pi / spec.N
    return r * complex(math.sin(theta), -math.cos(theta))


def turning_point_candidates(spec, E):
    """All k = 0, 1, 2 candidates and their PT partners, split into the ones
    that satisfy -(ix)^N = E under the branch rule and the ones that do not.

    For non-integer N the formal roots with 2k + 1 > N land on the wrong
    sheet and must be discarded; that is what the residual check does.
    """
    if not E > 0:
        raise ValueError(f"turning points require E > 0, got {E}")
    tol = 1e-10 * max(1.0, E)
    valid, rejected = [], []
    for k in _K_CANDIDATES:
        x = _candidate(spec, E, k)
        members = [x]
        partner = -x.conjugate()
        if abs(partner - x) > 1e-14 * abs(x):
            members.append(partner)
        for m in members:
            res = residual_of(spec, E, m)
            point = TurningPoint(k=k, x=m, residual=res)
            (valid if res <= tol else rejected).append(point)
    return valid, rejected


def turning_points(spec, E):
    """Turning points of -(ix)^N = E that pass the branch residual check.

    Formal roots on the wrong sheet are excluded; use
    turning_point_candidates to inspect what was rejected and why.
    """
    valid, _ = turning_point_candidates(spec, E)
    return valid


def _pairs(spec, E):
    """Distinct PT pairs among the valid candidates, keyed by lowest k.

    Purely imaginary roots (zero real part) do not form a pair.
    """
    valid, _ = turning_point_candidates(spec, E)
    scale = E ** (1.0 / spec.N)
    pairs = {}
    for pt in valid:
        if abs(pt.x.real) <= 1e-12 * scale:
            continue
        right = pt.x if pt.x.real > 0 else -pt.x.conjugate()
        key = (round(right.real / scale, 10), round(right.imag / scale, 10))
        if key not in pairs:
            pairs[key] = TurningPair(
                left=-right.conjugate(),
                right=right,
                k=pt.k,
                delta=right.real / scale,
            )
        else:
            # same geometric pair reachable from two k values: keep lowest k
            if pt.k < pairs[key].k:
                pairs[key] = TurningPair(
                    left=-right.conjugate(), right=right,
                    k=pt.k, delta=right.real / scale,
                )
    return list(pairs.values())


def select_maximal_pair(spec, E):
    """The PT pair whose |Re| is largest; ties go to the larger k.

    The tie-break makes the selection left-continuous at N = 4 and N = 8,
    where two distinct pairs share the same |Re|.
    """
    pairs = _pairs(spec, E)
    if not pairs:
        raise ValueError(f"no turning pairs found for N = {spec.N}, E = {E}")
    best = pairs[0]
    for p in pairs[1:]:
        if p.delta > best.delta * (1.0 + 1e-12):
            best = p
        elif abs(p.delta - best.delta) <= 1e-12 * best.delta and p.k > best.k:
            best = p
    return best


def minimal_pair(spec, E):
    """The k = 0 pair x = E^(1/N) exp(-i pi (1/2 - 1/N)); it feeds the
    original two-turning-point quantization formula and coincides with the
    maximal pair exactly on N in [2, 4]."""
    if not E > 0:
        raise ValueError(f"turning points require E > 0, got {E}")
    r = E ** (1.0 / spec.N)
    right = r * cmath.exp(-1j * math.pi * (0.5 - 1.0 / spec.N))
    return TurningPair(
        left=-right.conjugate(),
        right=right,
        k=0,
        delta=right.real / r,
    )


def delta_mxtp(N):
    """sin((2K+1) pi / N) with K = 0 on [2, 4], 1 on (4, 8], 2 on (8, 12].

    Continuous in N; its derivative jumps at N = 4 and N = 8, which is the
    mechanism behind the non-analytic isolated points of the spectrum.
    """
    if not (N_MIN <= N <= N_MAX):
        raise ValueError(f"delta_mxtp requires {N_MIN} <= N <= {N_MAX}, got {N}")
    if N <= 4.0:
        K = 0
    elif N <= 8.0:
        K = 1
    else:
        K = 2
    return math.sin((2 * K + 1) * math.pi / N)
