"""Unitary evolution with two commuting generators in a shared eigenbasis.

Observables evolve element by element: each matrix element picks up the
phase exp(i (d1 t1 + d2 t2) / hbar) built from the level-spacing pair
(d1, d2) of the two generator spectra.  That spacing pair fixes a direction
in the (t1, t2) plane along which the element is constant, so every element
follows a single effective time of its own.  Fluctuation traces, the
visibility classifier for the spacing-weighted elapsed time, and the
angle-width bound quantify when a genuinely two-time signal could survive
in second moments.

Sign conventions: second moments are stored as the nonnegative variance
<x^2> - <x>^2.  The mixed second derivative of an evolved element equals
x^{nm}(t) (i d1 / hbar)(i d2 / hbar), carrying the minus sign of the
double-commutator acceleration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import DomainError, Grid2T, TimePlanePoint, Tolerances

__all__ = [
    "TwoTimeQuantumSystem",
    "SpacingPair",
    "ElementCharacteristic",
    "StateVector",
    "FluctuationTrace",
    "UncertaintyBudget",
    "AngleWidthReport",
    "Visibility",
    "UncertaintyDomainError",
    "check_generator_consistency",
    "evolve_element",
    "evolve_matrix",
    "element_characteristic",
    "rotate_times",
    "inverse_rotate_times",
    "variance_trace",
    "uncertainty_visibility",
    "angle_and_width",
]

HERMITICITY_ATOL = 1e-12


class UncertaintyDomainError(DomainError):
    """The elapsed time is too short for the angle construction."""


@dataclass(frozen=True)
class TwoTimeQuantumSystem:
    """Spectra of the two generators plus an observable in their shared basis.

    E1, E2 list the eigenvalues of the generators (which must commute, hence
    the shared basis); X0 is the Hermitian observable matrix at time zero.
    """

    E1: np.ndarray
    E2: np.ndarray
    X0: np.ndarray

    def __init__(self, E1, E2, X0):
        e1 = np.asarray(E1, dtype=float)
        e2 = np.asarray(E2, dtype=float)
        x0 = np.asarray(X0, dtype=complex)
        n = e1.size
        if n < 2:
            raise DomainError(f"need at least 2 levels, got {n}")
        if e2.size != n or x0.shape != (n, n):
            raise DomainError(f"shape mismatch: E1 {e1.shape}, E2 {e2.shape}, X0 {x0.shape}")
        if not (np.all(np.isfinite(e1)) and np.all(np.isfinite(e2))):
            raise DomainError("spectra must be finite")
        scale = max(1.0, float(np.max(np.abs(x0))))
        if np.max(np.abs(x0 - x0.conj().T)) > HERMITICITY_ATOL * scale:
            raise DomainError("X0 must be Hermitian to 1e-12")
        object.__setattr__(self, "E1", e1)
        object.__setattr__(self, "E2", e2)
        object.__setattr__(self, "X0", x0)

    @property
    def n_levels(self) -> int:
        return self.E1.size

    def spacing(self, n: int, m: int) -> "SpacingPair":
        return SpacingPair(d1=float(self.E1[n] - self.E1[m]),
                           d2=float(self.E2[n] - self.E2[m]), n=n, m=m)

    def spacing_matrices(self):
        d1 = np.subtract.outer(self.E1, self.E1)
        d2 = np.subtract.outer(self.E2, self.E2)
        return d1, d2


@dataclass(frozen=True)
class SpacingPair:
    """Level-spacing pair (E1^n - E1^m, E2^n - E2^m) for one element."""

    d1: float
    d2: float
    n: int
    m: int

    def swapped(self) -> "SpacingPair":
        return SpacingPair(-self.d1, -self.d2, self.m, self.n)


@dataclass(frozen=True)
class ElementCharacteristic:
    """Per-element direction data: the plane field (d2, -d1), its norm and
    the rotation angle theta with cos = d1/norm, sin = d2/norm."""

    field: np.ndarray
    norm: float
    theta: float
    degenerate: bool


@dataclass(frozen=True)
class StateVector:
    """Unit-norm state expressed in the shared eigenbasis."""

    psi: np.ndarray

    def __init__(self, psi):
        arr = np.asarray(psi, dtype=complex).ravel()
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"state must have unit norm, got {norm!r}")
        object.__setattr__(self, "psi", arr)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        arr = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise DomainError("cannot normalize the zero vector")
        return cls(arr / norm)


@dataclass(frozen=True)
class FluctuationTrace:
    """Sampled first and second moments of an observable over a grid."""

    grid: Grid2T
    mean: np.ndarray
    second_moment: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True)
class UncertaintyBudget:
    """Inputs for visibility and angle-width estimates.

    dE1, dE2 are representative level spacings of the two generators;
    ddE1, ddE2 their fluctuations across the populated pairs; t the elapsed
    point in the time plane.
    """

    dE1: float
    dE2: float
    ddE1: float
    ddE2: float
    t: TimePlanePoint
    hbar: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0:
            raise DomainError("hbar must be positive")
        vals = (self.dE1, self.dE2, self.ddE1, self.ddE2)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("budget entries must be finite")


@dataclass(frozen=True)
class AngleWidthReport:
    """Angle between the time vector and the spacing vector with its width.

    dphi_exact diverges at the domain boundary (singular=True there);
    dphi_lowest_order keeps only the leading power of hbar; bound is the
    constant-free estimate that survives when hbar drops out.
    """

    phi: float
    dphi_exact: float
    dphi_lowest_order: float
    bound: float
    singular: bool = False


class Visibility(str, Enum):
    FROZEN = "frozen"
    THRESHOLD = "threshold"
    OSCILLATING = "oscillating"


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def check_generator_consistency(H1, H2, tol: Tolerances = Tolerances()) -> float:
    """Max entry magnitude of [H1, H2]; time-independent generator pairs
    must commute before they can define a shared-basis system."""
    h1 = np.asarray(H1, dtype=complex)
    h2 = np.asarray(H2, dtype=complex)
    if h1.shape != h2.shape or h1.ndim != 2 or h1.shape[0] != h1.shape[1]:
        raise DomainError(f"need equal square matrices, got {h1.shape} and {h2.shape}")
    for name, h in (("H1", h1), ("H2", h2)):
        scale = max(1.0, float(np.max(np.abs(h))))
        if np.max(np.abs(h - h.conj().T)) > 1e-10 * scale:
            raise DomainError(f"{name} is not Hermitian")
    comm = h1 @ h2 - h2 @ h1
    return float(np.max(np.abs(comm)))


def evolve_element(sys: TwoTimeQuantumSystem, n: int, m: int,
                   at: TimePlanePoint, hbar: float = 1.0) -> complex:
    """Element n, m of the evolved observable; its modulus never changes."""
    if hbar <= 0:
        raise DomainError("hbar must be positive")
    sp = sys.spacing(n, m)
    phase = (sp.d1 * at.t1 + sp.d2 * at.t2) / hbar
    return complex(sys.X0[n, m] * np.exp(1j * phase))


def evolve_matrix(sys: TwoTimeQuantumSystem, at: TimePlanePoint,
                  hbar: float = 1.0) -> np.ndarray:
    """Whole evolved observable matrix at one time-plane point."""
    if hbar <= 0:
        raise DomainError("hbar must be positive")
    d1, d2 = sys.spacing_matrices()
    return sys.X0 * np.exp(1j * (d1 * at.t1 + d2 * at.t2) / hbar)


def element_characteristic(sys: TwoTimeQuantumSystem, n: int, m: int) -> ElementCharacteristic:
    """Plane direction (d2, -d1) picked by element (n, m), with its angle."""
    sp = sys.spacing(n, m)
    norm = math.hypot(sp.d1, sp.d2)
    fieldvec = np.array([sp.d2, -sp.d1])
    if norm == 0.0:
        return ElementCharacteristic(field=fieldvec, norm=0.0, theta=0.0, degenerate=True)
    theta = math.atan2(sp.d2, sp.d1)
    return ElementCharacteristic(field=fieldvec, norm=norm, theta=theta, degenerate=False)


def rotate_times(ec: ElementCharacteristic, at: TimePlanePoint) -> tuple:
    """Rotated coordinates (tau1, tau2); the element depends on tau1 only."""
    if ec.degenerate:
        raise DomainError("degenerate characteristic has no rotation angle")
    ct, st = math.cos(ec.theta), math.sin(ec.theta)
    return (ct * at.t1 + st * at.t2, -st * at.t1 + ct * at.t2)


def inverse_rotate_times(ec: ElementCharacteristic, tau1: float, tau2: float) -> TimePlanePoint:
    """Time-plane point with the given rotated coordinates."""
    if ec.degenerate:
        raise DomainError("degenerate characteristic has no rotation angle")
    ct, st = math.cos(ec.theta), math.sin(ec.theta)
    return TimePlanePoint(ct * tau1 - st * tau2, st * tau1 + ct * tau2)


def variance_trace(sys: TwoTimeQuantumSystem, psi: StateVector, grid: Grid2T,
                   hbar: float = 1.0) -> FluctuationTrace:
    """First and second moments of the evolved observable over a grid.

    The second moment comes from the matrix square of the evolved
    observable, so degenerate element pairs contribute their constant terms
    exactly.
    """
    if hbar <= 0:
        raise DomainError("hbar must be positive")
    v = psi.psi
    if v.size != sys.n_levels:
        raise DomainError(f"state has {v.size} amplitudes for {sys.n_levels} levels")
    d1, d2 = sys.spacing_matrices()
    mean = np.empty((grid.n1, grid.n2), dtype=complex)
    second = np.empty((grid.n1, grid.n2), dtype=complex)
    for i, t1 in enumerate(grid.t1_values):
        for j, t2 in enumerate(grid.t2_values):
            xt = sys.X0 * np.exp(1j * (d1 * t1 + d2 * t2) / hbar)
            xv = xt @ v
            mean[i, j] = np.vdot(v, xv)
            second[i, j] = np.vdot(xv, xv)
    variance = second.real - mean.real ** 2
    if np.max(np.abs(mean.imag)) > 1e-10:
        raise DomainError("mean acquired an imaginary part; X0 is not Hermitian enough")
    if np.min(variance) < -1e-10:
        raise DomainError("variance went negative; X0 is not Hermitian enough")
    return FluctuationTrace(grid=grid, mean=mean, second_moment=second.real, variance=variance)


def uncertainty_visibility(budget: UncertaintyBudget, margin_low: float = 0.1) -> Visibility:
    """Classify whether the evolved phase can complete an oscillation.

    The swept phase is |dE1 t1 + dE2 t2| / hbar: below margin_low of a full
    turn nothing moves (frozen); at or past a full turn the element
    oscillates; in between sits the threshold regime.
    """
    s = abs(budget.dE1 * budget.t.t1 + budget.dE2 * budget.t.t2) / budget.hbar
    if s < 2.0 * math.pi * margin_low:
        return Visibility.FROZEN
    if s >= 2.0 * math.pi:
        return Visibility.OSCILLATING
    return Visibility.THRESHOLD


def angle_and_width(budget: UncertaintyBudget) -> AngleWidthReport:
    """Angle between the elapsed-time vector and the spacing vector, and the
    spread of that angle induced by spacing fluctuations.

    Requires t * sqrt(dE1^2 + dE2^2) >= hbar; the exact width diverges at
    equality (reported singular).  The constant-free bound dominates the
    exact width once the angle passes 45 degrees.
    """
    de = math.hypot(budget.dE1, budget.dE2)
    if de == 0.0:
        raise UncertaintyDomainError("both level spacings vanish; no angle defined")
    t = math.hypot(budget.t.t1, budget.t.t2)
    q = t * de
    hbar = budget.hbar
    if q < hbar * (1.0 - 1e-12):
        raise UncertaintyDomainError(
            f"t*sqrt(dE1^2+dE2^2) = {q:.6g} < hbar = {hbar:.6g}: "
            "cos(phi) would exceed 1")
    num = budget.dE1 * budget.ddE1 + budget.dE2 * budget.ddE2
    bound = num / de ** 2
    lowest = hbar * num / (t * de ** 3)
    if abs(q - hbar) <= 1e-12 * hbar:
        return AngleWidthReport(phi=0.0, dphi_exact=math.inf,
                                dphi_lowest_order=lowest, bound=bound, singular=True)
    phi = math.acos(hbar / q)
    exact = hbar * num / (de ** 2 * math.sqrt(q * q - hbar * hbar))
    return AngleWidthReport(phi=phi, dphi_exact=exact,
                            dphi_lowest_order=lowest, bound=bound)
