"""Constraint analysis for Newtonian dynamics driven by two time parameters.

A force tensor F^i_{jk}(x) (space index i up, the two time indices j, k down)
drives the momenta p^i_j through d p^i_j / d t_k = F^i_{kj}.  Demanding that
the coordinates be twice continuously differentiable in (t1, t2) turns the
force derivatives into a homogeneous linear system for the velocities.  This
module builds that system for one, two and three space dimensions, evaluates
the determinant fields that decide whether genuinely two-time motion is
possible, extracts the characteristic direction each coordinate is forced to
follow, and provides a reference integrator for the rank-one force family
F^i_{jk} = c_j c_k G^i(x), the constructive family on which all constraints
are satisfied.

Closed-form field expressions from nested 2x2 determinants are evaluated
exactly as published alongside a null-space oracle; whenever the two routes
disagree the report carries both candidates instead of silently preferring
either.  Verdicts are always driven by the null-space route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import (
    ComplexCharacteristicError,
    DegeneratePointError,
    DomainError,
    EvaluationError,
    Grid2T,
    SmallMatrix,
    Tolerances,
    TruncationError,
    determinant,
    null_space,
)

__all__ = [
    "ForceTensorField",
    "GaugeConnection",
    "VelocityPair",
    "OrbitRelation",
    "CharacteristicField",
    "Verdict",
    "ParallelFieldReport",
    "ConstraintReport",
    "TrajectorySurface",
    "rank_one_force",
    "polynomial_force_1d",
    "affine_force",
    "zero_force",
    "consistency_residual_1d",
    "orbit_relation_1d",
    "characteristic_field_1d",
    "integrate_rank_one_1d",
    "build_constraint_matrix",
    "admissibility_determinant",
    "parallel_fields_2d",
    "parallel_fields_3d",
    "curl_residual",
    "classify",
]

CROSS_VALIDATION_TOL = 1e-8


# ---------------------------------------------------------------------------
# domain types and force builders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForceTensorField:
    """A force tensor field x -> F^i_{jk}(x) in d space dimensions.

    ``eval`` receives a scalar position for d=1 and a length-d array
    otherwise, and must return an array of shape (2, 2) resp. (d, 2, 2).
    The force must be autonomous: it never sees t1 or t2.
    """

    d: int
    eval: callable
    symmetric_flag: bool = True

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise DomainError(f"spatial dimension must be 1, 2 or 3, got {self.d}")

    def tensor_at(self, x) -> np.ndarray:
        """Force tensor at a position, always shaped (d, 2, 2)."""
        if self.d == 1:
            pos = float(np.asarray(x).reshape(()))
            out = np.asarray(self.eval(pos), dtype=float)
            if out.shape == (2, 2):
                out = out[None, :, :]
        else:
            pos = np.asarray(x, dtype=float).reshape(self.d)
            out = np.asarray(self.eval(pos), dtype=float)
        if out.shape != (self.d, 2, 2):
            raise DomainError(f"force eval returned shape {out.shape}, expected {(self.d, 2, 2)}")
        if not np.all(np.isfinite(out)):
            raise EvaluationError(f"force tensor non-finite at {x!r}")
        return out

    def derivative_tensor(self, x, tol: Tolerances = Tolerances()) -> np.ndarray:
        """Central-difference derivatives T[i, j, k, m] = dF^i_{jk}/dx^m."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        step = tol.step_for(x)
        cols = []
        for m in range(self.d):
            e = np.zeros(self.d)
            e[m] = step
            hi = self.tensor_at(x + e)
            lo = self.tensor_at(x - e)
            cols.append((hi - lo) / (2.0 * step))
        return np.stack(cols, axis=-1)

    def symmetry_defect(self, points, tol: Tolerances = Tolerances()) -> float:
        """Max |F^i_{12} - F^i_{21}| over sample points (0 when symmetric)."""
        worst = 0.0
        for x in points:
            t = self.tensor_at(x)
            worst = max(worst, float(np.max(np.abs(t[:, 0, 1] - t[:, 1, 0]))))
        return worst


@dataclass(frozen=True)
class GaugeConnection:
    """Gauge pair x -> (A_1, A_2); only meaningful for one space dimension."""

    d: int
    eval: callable

    def __post_init__(self):
        if self.d != 1:
            raise DomainError("gauge connections are only supported for d = 1")

    def values_at(self, x: float) -> np.ndarray:
        a = np.asarray(self.eval(float(x)), dtype=float).reshape(2)
        if not np.all(np.isfinite(a)):
            raise EvaluationError(f"gauge connection non-finite at {x}")
        return a


@dataclass(frozen=True)
class VelocityPair:
    """Momenta p^i_j arranged as a (d, 2) array."""

    p: np.ndarray

    def __init__(self, p):
        arr = np.atleast_2d(np.asarray(p, dtype=float))
        if arr.shape[1] != 2:
            raise DomainError(f"velocity pair must have shape (d, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("velocity pair must be finite")
        object.__setattr__(self, "p", arr)


@dataclass(frozen=True)
class OrbitRelation:
    """Orbit data at one phase-space point: Phi(x), the squared momentum
    ratio, and their mismatch."""

    phi: float
    ratio_squared: float
    residual: float


@dataclass(frozen=True)
class CharacteristicField:
    """Per-coordinate characteristic directions in the (t1, t2) plane."""

    vectors: tuple
    degenerate: tuple

    def __iter__(self):
        return iter(self.vectors)


class Verdict(str, Enum):
    NO_TWO_TIME_MOTION = "no_two_time_motion"
    EFFECTIVE_ONE_TIME = "effective_one_time"
    TWO_TIME_ADMISSIBLE = "two_time_admissible"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ParallelFieldReport:
    """Closed-form fields next to their null-space cross-check.

    ``appendix`` holds the published determinant expressions evaluated as
    printed; ``oracle`` holds unit field directions recovered from the kernel
    of the velocity system (None when the kernel leaves a coordinate
    unconstrained or motionless).  ``discrepancy`` is non-None whenever the
    two routes disagree beyond CROSS_VALIDATION_TOL, and carries both.
    """

    d: int
    appendix: tuple
    oracle: tuple
    oracle_status: tuple
    kernel_dim: int
    orthogonality_residual: float | None
    discrepancy: str | None


@dataclass(frozen=True)
class ConstraintReport:
    determinant_value: float
    kernel_dim: int
    fields: CharacteristicField
    curl_residuals: tuple | None
    parallelism_defect: float
    verdict: Verdict
    orthogonality_residual: float | None = None
    discrepancy: str | None = None


def rank_one_force(c, g, d: int = 1) -> ForceTensorField:
    """Force family F^i_{jk} = c_j c_k G^i(x).

    For d=1, ``g`` is a scalar map; otherwise it maps a position to a
    length-d array.  Every admissibility constraint holds identically on
    this family.
    """
    c = np.asarray(c, dtype=float).reshape(2)
    cc = np.outer(c, c)
    if d == 1:
        return ForceTensorField(1, lambda x: cc * float(g(x)))
    def evaluate(pos):
        gv = np.asarray(g(np.asarray(pos, dtype=float)), dtype=float).reshape(d)
        return np.einsum("i,jk->ijk", gv, cc)
    return ForceTensorField(d, evaluate)


def polynomial_force_1d(coeffs: dict) -> ForceTensorField:
    """d=1 force with polynomial components.

    ``coeffs`` maps "11", "12", "22" (and optionally "21") to polynomial
    coefficient sequences in numpy's highest-power-first order.  A missing
    "21" mirrors "12".
    """
    polys = {key: np.asarray(val, dtype=float) for key, val in coeffs.items()}
    if "21" not in polys and "12" in polys:
        polys["21"] = polys["12"]
    symmetric = np.array_equal(polys.get("12", np.zeros(1)), polys.get("21", np.zeros(1)))

    def evaluate(x):
        out = np.zeros((2, 2))
        for (j, k), key in (((0, 0), "11"), ((0, 1), "12"), ((1, 0), "21"), ((1, 1), "22")):
            if key in polys:
                out[j, k] = np.polyval(polys[key], x)
        return out

    return ForceTensorField(1, evaluate, symmetric_flag=symmetric)


def affine_force(d: int, linear, const=None, symmetrize: bool = True) -> ForceTensorField:
    """Force affine in position: F^i_{jk}(x) = const[i,j,k] + linear[i,j,k,m] x^m.

    Affine forces realize any prescribed derivative tensor exactly, which
    makes them the natural probes for the determinant and field checks.
    """
    lin = np.asarray(linear, dtype=float).reshape(d, 2, 2, d)
    con = np.zeros((d, 2, 2)) if const is None else np.asarray(const, dtype=float).reshape(d, 2, 2)
    if symmetrize:
        lin = 0.5 * (lin + lin.transpose(0, 2, 1, 3))
        con = 0.5 * (con + con.transpose(0, 2, 1))
    if d == 1:
        return ForceTensorField(1, lambda x: con[0] + lin[0, :, :, 0] * x)
    def evaluate(pos):
        return con + np.einsum("ijkm,m->ijk", lin, np.asarray(pos, dtype=float))
    return ForceTensorField(d, evaluate)


def zero_force(d: int) -> ForceTensorField:
    return affine_force(d, np.zeros((d, 2, 2, d)))


# ---------------------------------------------------------------------------
# one space dimension
# ---------------------------------------------------------------------------

def _primes_1d(F: ForceTensorField, x: float, tol: Tolerances) -> np.ndarray:
    """Matrix of x-derivatives F'_{jk} at a point, shape (2, 2)."""
    if F.d != 1:
        raise DomainError("this operation needs a one-dimensional force")
    return F.derivative_tensor(x, tol)[0, :, :, 0]


def consistency_residual_1d(F: ForceTensorField, A: GaugeConnection | None,
                            x: float, tol: Tolerances = Tolerances()) -> float:
    """|F'_11 F'_22 - F'_12 F'_21| at x; zero is necessary for two-time motion."""
    fp = _primes_1d(F, x, tol)
    return abs(fp[0, 0] * fp[1, 1] - fp[0, 1] * fp[1, 0])


def orbit_relation_1d(F: ForceTensorField, A: GaugeConnection | None, x: float,
                      p, tol: Tolerances = Tolerances()) -> OrbitRelation:
    """Evaluate the orbit function Phi(x) against the squared momentum ratio.

    Phi = F'_11 F'_12 / (F'_21 F'_22) must equal ((p1-A1)/(p2-A2))^2 along
    any consistent motion.  The ratio is invariant under rescaling p.
    """
    fp = _primes_1d(F, x, tol)
    scale = max(1.0, float(np.max(np.abs(fp)))) ** 2
    denom = fp[1, 0] * fp[1, 1]
    if abs(denom) <= tol.abs_tol * scale:
        which = "F'_21" if abs(fp[1, 0]) <= abs(fp[1, 1]) else "F'_22"
        raise DegeneratePointError(f"{which} vanishes at x={x}; orbit function undefined")
    phi = fp[0, 0] * fp[0, 1] / denom

    if isinstance(p, VelocityPair):
        p1, p2 = p.p[0]
    else:
        p1, p2 = np.asarray(p, dtype=float).reshape(2)
    a1, a2 = (0.0, 0.0) if A is None else A.values_at(x)
    pscale = max(1.0, abs(p1 - a1), abs(p2 - a2))
    if abs(p2 - a2) <= tol.abs_tol * pscale:
        raise DegeneratePointError(f"p2 - A2 vanishes at x={x}; momentum ratio undefined")
    ratio_sq = ((p1 - a1) / (p2 - a2)) ** 2
    return OrbitRelation(phi=float(phi), ratio_squared=float(ratio_sq),
                         residual=float(abs(ratio_sq - phi)))


def characteristic_field_1d(F: ForceTensorField, x: float,
                            tol: Tolerances = Tolerances()) -> CharacteristicField:
    """Direction (sqrt(F'_22 F'_21), -sqrt(F'_11 F'_12)) along which x(t1,t2)
    is constant.

    Negative radicands mean the characteristic direction is not real and
    raise instead of being silently absolutized; a zero field is returned
    with its degenerate flag set.
    """
    fp = _primes_1d(F, x, tol)
    scale = max(1.0, float(np.max(np.abs(fp)))) ** 2
    r1 = fp[1, 1] * fp[1, 0]
    r2 = fp[0, 0] * fp[0, 1]
    thresh = tol.abs_tol * scale
    if r1 < -thresh or r2 < -thresh:
        bad = "F'_22*F'_21" if r1 < -thresh else "F'_11*F'_12"
        raise ComplexCharacteristicError(
            f"radicand {bad} = {min(r1, r2):.3e} < 0 at x={x}: complex characteristics")
    vec = np.array([math.sqrt(max(r1, 0.0)), -math.sqrt(max(r2, 0.0))])
    degenerate = bool(np.linalg.norm(vec) <= math.sqrt(thresh))
    return CharacteristicField(vectors=(vec,), degenerate=(degenerate,))


# ---------------------------------------------------------------------------
# rank-one reference integrator
# ---------------------------------------------------------------------------

class _RankOneSolution:
    """Dense solution of X'' = g(X) with fixed-step classical RK4 knots.

    Queries between knots take a single partial RK4 step from the knot at or
    below the target, so evaluation error stays at the knot accuracy.
    """

    def __init__(self, g, x0: float, v0: float, s_min: float, s_max: float,
                 step: float, blowup: float):
        self.g = g
        self.x0 = float(x0)
        self.v0 = float(v0)
        self.blowup = float(blowup)
        self.step = float(step)
        knots = [0.0]
        xs = [self.x0]
        vs = [self.v0]
        for target, direction in ((s_max, +1.0), (s_min, -1.0)):
            if direction * target <= 0:
                continue
            n = max(1, int(math.ceil(abs(target) / step)))
            h = target / n
            s, x, v = 0.0, self.x0, self.v0
            seg_s, seg_x, seg_v = [], [], []
            for _ in range(n):
                x, v = self._rk4(x, v, h)
                s += h
                if not (math.isfinite(x) and abs(x) <= blowup):
                    raise TruncationError(
                        f"trajectory exceeded |x| <= {blowup:g} near s={s:.6g}", last_valid=s - h)
                seg_s.append(s)
                seg_x.append(x)
                seg_v.append(v)
            knots.extend(seg_s)
            xs.extend(seg_x)
            vs.extend(seg_v)
        order = np.argsort(knots)
        self.knot_s = np.asarray(knots)[order]
        self.knot_x = np.asarray(xs)[order]
        self.knot_v = np.asarray(vs)[order]

    def _rk4(self, x, v, h):
        g = self.g
        k1x, k1v = v, g(x)
        k2x, k2v = v + 0.5 * h * k1v, g(x + 0.5 * h * k1x)
        k3x, k3v = v + 0.5 * h * k2v, g(x + 0.5 * h * k2x)
        k4x, k4v = v + h * k3v, g(x + h * k3x)
        return (x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x),
                v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v))

    def evaluate(self, s):
        """X and X' at arbitrary parameters inside the integrated range."""
        s_arr = np.asarray(s, dtype=float)
        flat = np.atleast_1d(s_arr).ravel()
        lo, hi = self.knot_s[0], self.knot_s[-1]
        if np.any(flat < lo - 1e-12) or np.any(flat > hi + 1e-12):
            raise DomainError(f"query outside integrated range [{lo:g}, {hi:g}]")
        idx = np.clip(np.searchsorted(self.knot_s, flat, side="right") - 1,
                      0, len(self.knot_s) - 1)
        h = flat - self.knot_s[idx]
        x, v = self.knot_x[idx], self.knot_v[idx]
        g = self.g
        k1x, k1v = v, g(x)
        k2x, k2v = v + 0.5 * h * k1v, g(x + 0.5 * h * k1x)
        k3x, k3v = v + 0.5 * h * k2v, g(x + 0.5 * h * k2x)
        k4x, k4v = v + h * k3v, g(x + h * k3x)
        xo = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        vo = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        return xo.reshape(s_arr.shape), vo.reshape(s_arr.shape)


@dataclass(frozen=True)
class TrajectorySurface:
    """Sampled surface x(t1, t2) = X(c1 t1 + c2 t2) plus a dense evaluator."""

    grid: Grid2T
    c: np.ndarray
    values: np.ndarray
    velocity: np.ndarray
    solution: _RankOneSolution = field(repr=False)

    def s_of(self, t1, t2):
        return self.c[0] * np.asarray(t1, dtype=float) + self.c[1] * np.asarray(t2, dtype=float)

    def position(self, t1, t2):
        """x at arbitrary (t1, t2), not restricted to grid points."""
        return self.solution.evaluate(self.s_of(t1, t2))[0]

    def momenta(self, t1, t2):
        """(p1, p2) = (c1 X', c2 X') at arbitrary (t1, t2)."""
        v = self.solution.evaluate(self.s_of(t1, t2))[1]
        return self.c[0] * v, self.c[1] * v


def _vectorized_scalar_map(g):
    probe = np.asarray(g(np.array([0.0, 0.5])))
    if probe.shape == (2,):
        return lambda x: np.asarray(g(x), dtype=float)
    vec = np.vectorize(g, otypes=[float])
    return lambda x: vec(x)


def integrate_rank_one_1d(g, c, x0: float, v0: float, grid: Grid2T,
                          step: float | None = None,
                          tol: Tolerances = Tolerances(),
                          blowup: float = 1e6) -> TrajectorySurface:
    """Reference solution for the rank-one family F_{jk} = c_j c_k g(x).

    Substituting p_j = c_j X' reduces the two-time system to X''(s) = g(X)
    along s = c1 t1 + c2 t2.  Integrated with fixed-step RK4; the step is
    accepted once halving it changes the solution by less than rel_tol.
    """
    c = np.asarray(c, dtype=float).reshape(2)
    if np.allclose(c, 0.0):
        raise DomainError("rank-one direction c must be nonzero")
    gv = _vectorized_scalar_map(g)

    t1v, t2v = grid.t1_values, grid.t2_values
    s_grid = np.add.outer(c[0] * t1v, c[1] * t2v)
    s_min = min(0.0, float(s_grid.min()))
    s_max = max(0.0, float(s_grid.max()))
    span = max(s_max - s_min, 1e-6)

    h = step if step is not None else min(1e-2, span / 256.0)
    sol = _RankOneSolution(gv, x0, v0, s_min, s_max, h, blowup)
    for _ in range(12):
        finer = _RankOneSolution(gv, x0, v0, s_min, s_max, h / 2.0, blowup)
        probe = sol.knot_s
        xa, _ = sol.evaluate(probe)
        xb, _ = finer.evaluate(probe)
        scale = max(1.0, float(np.max(np.abs(xb))))
        if float(np.max(np.abs(xa - xb))) < tol.rel_tol * scale:
            sol = finer
            break
        h /= 2.0
        sol = finer
    values, vel = sol.evaluate(s_grid)
    return TrajectorySurface(grid=grid, c=c, values=values, velocity=vel, solution=sol)


# ---------------------------------------------------------------------------
# two and three space dimensions
# ---------------------------------------------------------------------------

def _row_order(d: int):
    if d == 2:
        return [(i, k) for i in range(2) for k in range(2)]
    return [(i, k) for k in range(2) for i in range(3)]


def _constraint_matrix_from_tensor(T: np.ndarray, d: int) -> np.ndarray:
    rows = []
    for (i, k) in _row_order(d):
        row = []
        for m in range(d):
            row.append(T[i, 1, k, m])
            row.append(-T[i, 0, k, m])
        rows.append(row)
    return np.asarray(rows)


def build_constraint_matrix(F: ForceTensorField, x,
                            tol: Tolerances = Tolerances()) -> SmallMatrix:
    """The homogeneous velocity system: 4x4 for d=2, 6x6 for d=3.

    Row r, for d=2, pairs (space index i, time index k) with i outermost;
    for d=3 the k blocks come first.  Column 2m+j holds F^i_{2k,x^m} for
    j=0 and -F^i_{1k,x^m} for j=1, acting on (p^1_1, p^1_2, p^2_1, ...).
    """
    if F.d == 1:
        raise DomainError("dimension 1 is handled by the *_1d operations")
    T = F.derivative_tensor(x, tol)
    return SmallMatrix.from_array(_constraint_matrix_from_tensor(T, F.d))


def admissibility_determinant(F: ForceTensorField, x,
                              tol: Tolerances = Tolerances()) -> float:
    """Determinant of the velocity system; it must vanish for any force
    that is to allow nonzero two-time velocities."""
    return float(determinant(build_constraint_matrix(F, x, tol)))


def _det2(a, b, c, d):
    return a * d - b * c


def _appendix_fields_2d(T: np.ndarray):
    """The published 2x2-determinant fields for d=2, exactly as printed."""
    def f(i, j, k, m):
        return T[i, j - 1, k - 1, m]
    x, y = 0, 1
    al = _det2(f(0, 2, 1, x), f(0, 2, 1, y), f(1, 2, 1, x), f(1, 2, 1, y))
    be = _det2(f(0, 1, 1, x), f(0, 1, 2, x), f(1, 1, 1, x), f(1, 2, 1, x))
    ga = _det2(f(0, 2, 1, y), f(0, 2, 2, y), f(0, 2, 1, x), f(0, 2, 2, x))
    de = _det2(f(0, 2, 1, x), f(0, 1, 2, x), f(0, 2, 1, x), f(0, 2, 2, x))
    alt = -al
    bet = _det2(f(0, 1, 1, y), f(0, 2, 1, y), f(1, 1, 1, y), f(1, 2, 1, y))
    gat = -ga
    det_ = _det2(f(0, 1, 1, y), f(0, 1, 2, y), f(0, 2, 1, y), f(0, 2, 2, y))
    alp = _det2(f(0, 2, 1, x), f(0, 1, 1, y), f(1, 2, 1, x), f(1, 1, 1, y))
    gap = _det2(f(0, 1, 1, y), f(0, 1, 2, y), f(0, 2, 1, x), f(0, 2, 2, x))
    altp = _det2(f(1, 2, 1, y), f(1, 1, 1, x), f(0, 2, 1, y), f(0, 1, 1, x))
    gatp = _det2(f(0, 2, 2, y), f(0, 1, 2, x), f(0, 2, 1, y), f(0, 1, 1, x))
    C = np.array([_det2(alt, bet, gat, det_), _det2(altp, bet, gatp, det_)])
    D = np.array([_det2(al, be, ga, de), _det2(alp, be, gap, de)])
    return C, D


def _chain_field(M: np.ndarray, use_printed_column: bool) -> np.ndarray:
    """Successive-elimination field for the first coordinate of a 6x6 system.

    The nested determinants eliminate the trailing velocity components one
    at a time.  The published first stage pairs column 1 with row 6; pairing
    column 6 instead makes each stage a genuine elimination step, and that
    corrected variant is what the null-space oracle confirms.
    """
    c = M
    P = 0 if use_printed_column else 5
    A1 = np.empty((5, 5))
    for m in range(5):
        for n in range(5):
            A1[m, n] = c[m, n] * c[5, P] - c[m, P] * c[5, n]
    A2 = np.empty((4, 4))
    for m in range(4):
        for n in range(4):
            A2[m, n] = A1[m, n] * A1[4, 4] - A1[m, 4] * A1[4, n]
    A3 = np.empty((3, 3))
    for m in range(3):
        for n in range(3):
            A3[m, n] = A2[m, n] * A2[3, 3] - A2[m, 3] * A2[3, n]
    return np.array([A3[1, j] * A3[2, 2] - A3[1, 2] * A3[2, j] for j in range(2)])


def _appendix_fields_3d(T: np.ndarray, variant: str = "corrected"):
    """Chain fields for all three coordinates via space-axis relabeling."""
    if variant not in ("corrected", "printed"):
        raise DomainError(f"unknown chain variant {variant!r}")
    use_printed = variant == "printed"
    fields = []
    for perm in ((0, 1, 2), (1, 0, 2), (2, 1, 0)):
        Tp = T[list(perm)][:, :, :, list(perm)]
        Mp = _constraint_matrix_from_tensor(Tp, 3)
        fields.append(_chain_field(Mp, use_printed))
    return tuple(fields)


def _kernel_directions(kernel: list, d: int, tol: Tolerances):
    """Per-coordinate velocity directions spanned by the kernel.

    Returns (status, unit_field) pairs: the field is the 90-degree rotation
    of the velocity span when that span is one-dimensional.
    """
    out = []
    if not kernel:
        return [("no-kernel", None)] * d
    K = np.stack(kernel, axis=1)
    for i in range(d):
        block = K[2 * i:2 * i + 2, :].T
        norms = np.linalg.norm(block)
        if norms <= tol.abs_tol:
            out.append(("zero-velocity", None))
            continue
        _, s, vt = np.linalg.svd(block)
        if s.size > 1 and s[1] > 1e-8 * s[0]:
            out.append(("unconstrained", None))
        else:
            u = vt[0]
            out.append(("direction", np.array([u[1], -u[0]])))
    return out


def _cross_validate(appendix, kernel, d: int):
    """Worst normalized |field_i . (p^i_1, p^i_2)| over all kernel vectors."""
    if not kernel:
        return None
    worst = 0.0
    for i in range(d):
        f = appendix[i]
        nf = np.linalg.norm(f)
        if nf == 0.0:
            return math.inf
        for v in kernel:
            block = v[2 * i:2 * i + 2]
            nb = np.linalg.norm(block)
            if nb <= 1e-14:
                continue
            worst = max(worst, abs(float(f @ block)) / (nf * nb))
    return worst


def _field_report(F: ForceTensorField, x, tol: Tolerances, variant: str) -> ParallelFieldReport:
    T = F.derivative_tensor(x, tol)
    M = _constraint_matrix_from_tensor(T, F.d)
    kernel = null_space(M, tol)
    if F.d == 2:
        appendix = _appendix_fields_2d(T)
    else:
        appendix = _appendix_fields_3d(T, variant)
    dirs = _kernel_directions(kernel, F.d, tol)
    residual = _cross_validate(appendix, kernel, F.d)
    discrepancy = None
    if residual is not None and not (residual < CROSS_VALIDATION_TOL):
        parts = []
        for i in range(F.d):
            status, vec = dirs[i]
            oracle_txt = np.array2string(vec, precision=6) if vec is not None else status
            parts.append(f"coordinate {i + 1}: printed={np.array2string(appendix[i], precision=6)} "
                         f"oracle={oracle_txt}")
        discrepancy = (f"printed determinant fields fail kernel cross-validation "
                       f"(residual {residual:.3e}); " + "; ".join(parts))
    return ParallelFieldReport(
        d=F.d,
        appendix=tuple(np.asarray(a, dtype=float) for a in appendix),
        oracle=tuple(vec for _, vec in dirs),
        oracle_status=tuple(status for status, _ in dirs),
        kernel_dim=len(kernel),
        orthogonality_residual=residual,
        discrepancy=discrepancy,
    )


def parallel_fields_2d(F: ForceTensorField, x,
                       tol: Tolerances = Tolerances()) -> ParallelFieldReport:
    """Published fields restricting x and y evolution, cross-validated
    against the kernel of the velocity system."""
    if F.d != 2:
        raise DomainError(f"parallel_fields_2d needs d=2, got d={F.d}")
    return _field_report(F, x, tol, "corrected")


def parallel_fields_3d(F: ForceTensorField, x, tol: Tolerances = Tolerances(),
                       variant: str = "corrected") -> ParallelFieldReport:
    """Chain fields for the three coordinates.

    ``variant="printed"`` keeps the published first-stage column pairing;
    the default pairs the pivot column instead, which is the variant the
    null-space oracle confirms on admissible forces.
    """
    if F.d != 3:
        raise DomainError(f"parallel_fields_3d needs d=3, got d={F.d}")
    return _field_report(F, x, tol, variant)


def curl_residual(field_on_surface, grid: Grid2T) -> float:
    """Max |d(field_2)/dt1 - d(field_1)/dt2| over interior grid points."""
    if grid.n1 < 3 or grid.n2 < 3:
        raise DomainError("curl residual needs at least a 3x3 grid")
    t1v, t2v = grid.t1_values, grid.t2_values
    f1 = np.empty((grid.n1, grid.n2))
    f2 = np.empty((grid.n1, grid.n2))
    for i, t1 in enumerate(t1v):
        for j, t2 in enumerate(t2v):
            vec = np.asarray(field_on_surface(t1, t2), dtype=float).reshape(2)
            f1[i, j], f2[i, j] = vec
    d1f2 = (f2[2:, 1:-1] - f2[:-2, 1:-1]) / (2.0 * grid.d1)
    d2f1 = (f1[1:-1, 2:] - f1[1:-1, :-2]) / (2.0 * grid.d2)
    return float(np.max(np.abs(d1f2 - d2f1)))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def _pairwise_defect(directions) -> float:
    defined = [v for v in directions if v is not None]
    worst = 0.0
    for a in range(len(defined)):
        for b in range(a + 1, len(defined)):
            u, w = defined[a], defined[b]
            cross = abs(u[0] * w[1] - u[1] * w[0])
            worst = max(worst, float(cross / (np.linalg.norm(u) * np.linalg.norm(w))))
    return worst


def classify(F: ForceTensorField, x, trajectory: TrajectorySurface | None = None,
             tol: Tolerances = Tolerances(), curl_tol: float = 1e-4) -> ConstraintReport:
    """Full admissibility verdict for a force at a point.

    Full-rank velocity system: no two-time motion.  Rank-deficient with all
    characteristic directions parallel: effectively one time.  Rank-deficient
    with genuinely different directions (and curl-free fields where a
    trajectory makes that measurable): two-time admissible.  Vanishing
    fields: degenerate.
    """
    if F.d == 1:
        fp = _primes_1d(F, x, tol)
        M = np.array([[fp[1, 0], -fp[0, 0]], [fp[1, 1], -fp[0, 1]]])
        det_val = float(determinant(M))
        kernel = null_space(M, tol)
        kdim = len(kernel)
        if kdim == 0:
            fields = CharacteristicField(vectors=(np.zeros(2),), degenerate=(True,))
            return ConstraintReport(det_val, 0, fields, None, 0.0,
                                    Verdict.NO_TWO_TIME_MOTION)
        fields = characteristic_field_1d(F, x, tol)
        if fields.degenerate[0]:
            return ConstraintReport(det_val, kdim, fields, None, 0.0, Verdict.DEGENERATE)
        curls = _curls_along(fields_map_1d(F, tol), trajectory, 1)
        verdict = Verdict.EFFECTIVE_ONE_TIME
        if curls is not None and max(curls) > curl_tol:
            verdict = Verdict.DEGENERATE
        return ConstraintReport(det_val, kdim, fields, curls, 0.0, verdict)

    pf = _field_report(F, x, tol, "corrected")
    M = build_constraint_matrix(F, x, tol)
    det_val = float(determinant(M))
    if pf.kernel_dim == 0:
        fields = CharacteristicField(vectors=tuple(np.zeros(2) for _ in range(F.d)),
                                     degenerate=tuple(True for _ in range(F.d)))
        return ConstraintReport(det_val, 0, fields, None, 0.0,
                                Verdict.NO_TWO_TIME_MOTION,
                                pf.orthogonality_residual, pf.discrepancy)

    vectors, degenerate = [], []
    for status, vec in zip(pf.oracle_status, pf.oracle):
        if status == "direction":
            vectors.append(vec)
            degenerate.append(False)
        else:
            vectors.append(np.zeros(2))
            degenerate.append(True)
    fields = CharacteristicField(vectors=tuple(vectors), degenerate=tuple(degenerate))
    defined = [v for v, dgn in zip(vectors, degenerate) if not dgn]
    defect = _pairwise_defect(defined)

    curls = _curls_along(fields_map_nd(F, tol), trajectory, F.d)
    if not defined:
        verdict = Verdict.DEGENERATE
    elif defect <= CROSS_VALIDATION_TOL:
        verdict = Verdict.EFFECTIVE_ONE_TIME
    elif curls is None or max(curls) <= curl_tol:
        verdict = Verdict.TWO_TIME_ADMISSIBLE
    else:
        verdict = Verdict.DEGENERATE
    return ConstraintReport(det_val, pf.kernel_dim, fields, curls, defect, verdict,
                            pf.orthogonality_residual, pf.discrepancy)


def fields_map_1d(F: ForceTensorField, tol: Tolerances):
    def at(position):
        return characteristic_field_1d(F, float(position), tol).vectors
    return at


def fields_map_nd(F: ForceTensorField, tol: Tolerances):
    def at(position):
        report = _field_report(F, position, tol, "corrected")
        return tuple(v if v is not None else np.zeros(2) for v in report.oracle)
    return at


def _curls_along(fields_at, trajectory, d: int):
    if trajectory is None:
        return None
    residuals = []
    for i in range(d):
        def component(t1, t2, _i=i):
            return fields_at(trajectory.position(t1, t2))[_i]
        residuals.append(curl_residual(component, trajectory.grid))
    return tuple(residuals)
