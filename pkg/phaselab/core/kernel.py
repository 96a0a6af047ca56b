"""Reduced two-level model of the four-phase Grover kernel.

Everything here lives in the invariant plane spanned by the marked
superposition ``|w~>`` and the unmarked superposition ``|r~>``, written
as the column basis ``(1, 0)`` and ``(0, 1)``. The uniform initial state
is ``|s> = (sqrt(M/N), sqrt((N-M)/N))``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np
import numpy.typing as npt

from .errors import DegenerateKernelError, DomainError, NoOscillationError

__all__ = (
    "PhaseSet",
    "ProblemSpec",
    "ReducedState",
    "Kernel2",
    "EigenSystem",
    "TraceReconciliation",
    "Alignment",
    "make_phase_set",
    "named_phase_set",
    "PHASE_FAMILIES",
    "initial_reduced_state",
    "build_kernel",
    "eigensystem",
    "matching_defect",
    "is_matched",
    "angle_form_defect",
    "trace_reconciliation",
    "eigenvector_formula",
    "asymptotic_g1",
    "reduced_amplitudes",
    "evolve_probability",
    "spectral_probability",
    "approximate_probability",
    "predicted_peak_m",
    "matched_peak_closed_form",
    "g1_alignment",
)

log = logging.getLogger("phaselab.kernel")

ComplexVector = npt.NDArray[np.complex128]
ComplexMatrix = npt.NDArray[np.complex128]

TWO_PI = 2.0 * math.pi
#: Default absolute tolerance on ``|alpha*delta - beta*gamma|``.
MATCH_TOLERANCE = 1e-9
#: ``|(Tr G)^2 - 4 Det G|`` below this flags a degenerate kernel.
DEGENERACY_TOLERANCE = 1e-12
#: Overlaps closer than this count as a tie when labelling eigenbranches.
TIE_TOLERANCE = 1e-12
#: Components smaller than this are skipped when fixing the eigenvector gauge.
GAUGE_TOLERANCE = 1e-12
#: Closed-form eigenvectors are only evaluated above this denominator magnitude.
FORMULA_DENOMINATOR_TOLERANCE = 1e-9


def _normalize_angle(value: float) -> float:
    angle = math.fmod(value, TWO_PI)
    if angle < 0.0:
        angle += TWO_PI
    # fmod of a tiny negative number lands exactly on 2pi after the shift
    if angle >= TWO_PI:
        angle = 0.0
    return angle


def _principal_angle(value: float) -> float:
    """Wrap ``value`` into ``(-pi, pi]``."""
    angle = math.remainder(value, TWO_PI)
    if angle <= -math.pi:
        angle += TWO_PI
    return angle


@dataclass(frozen=True)
class PhaseSet:
    """The four rotation phases of the generalized kernel.

    ``theta1``/``theta2`` rotate the marked and unmarked superpositions,
    ``phi1``/``phi2`` rotate the initial state and its orthogonal
    complement. The unit-modulus exponentials are derived from the
    stored angles and never set independently.
    """

    theta1: float
    theta2: float
    phi1: float
    phi2: float
    alpha: complex = field(init=False, repr=False)
    beta: complex = field(init=False, repr=False)
    gamma: complex = field(init=False, repr=False)
    delta: complex = field(init=False, repr=False)

    def __post_init__(self) -> None:
        exponentials = np.exp(1j * np.array(self.angles, dtype=np.float64))
        for name, value in zip(("alpha", "beta", "gamma", "delta"), exponentials):
            object.__setattr__(self, name, complex(value))

    @property
    def angles(self) -> Tuple[float, float, float, float]:
        return (self.theta1, self.theta2, self.phi1, self.phi2)

    @property
    def exponentials(self) -> Tuple[complex, complex, complex, complex]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    def shifted(self, a: float, b: float) -> PhaseSet:
        """Return the phase set with ``a`` added to both thetas and ``b`` to both phis."""
        return make_phase_set(self.theta1 + a, self.theta2 + a, self.phi1 + b, self.phi2 + b)


@dataclass(frozen=True)
class ProblemSpec:
    """Database size ``N`` and number of marked items ``M``."""

    n_total: int
    m_marked: int

    def __post_init__(self) -> None:
        for name in ("n_total", "m_marked"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise DomainError(f"{name} must be an integer, got {type(value).__name__}")
        if self.m_marked < 1 or self.m_marked > self.n_total - 1:
            raise DomainError(
                f"Need 1 <= M <= N-1 for a two-dimensional search plane,"
                f" got N={self.n_total}, M={self.m_marked}"
            )

    @property
    def marked_fraction(self) -> float:
        return self.m_marked / self.n_total

    @property
    def amplitude_w(self) -> float:
        return math.sqrt(self.m_marked / self.n_total)

    @property
    def amplitude_r(self) -> float:
        return math.sqrt((self.n_total - self.m_marked) / self.n_total)

    @property
    def s_vector(self) -> npt.NDArray[np.float64]:
        return np.array([self.amplitude_w, self.amplitude_r], dtype=np.float64)


@dataclass(frozen=True)
class ReducedState:
    """A normalized state of the search plane in the ``{|w~>, |r~>}`` basis."""

    a_w: complex
    a_r: complex

    def __post_init__(self) -> None:
        norm_sq = abs(self.a_w) ** 2 + abs(self.a_r) ** 2
        if abs(norm_sq - 1.0) > 1e-10:
            raise DomainError(f"Reduced state is not normalized (|psi|^2 = {norm_sq!r})")

    @property
    def vector(self) -> ComplexVector:
        return np.array([self.a_w, self.a_r], dtype=np.complex128)

    @property
    def marked_probability(self) -> float:
        return abs(self.a_w) ** 2


@dataclass(frozen=True)
class Kernel2:
    """The kernel ``G = -G2 G1`` restricted to the search plane.

    Attributes
    ----------
    g : numpy.ndarray
        The 2x2 kernel.
    g1, g2 : numpy.ndarray
        The selective phase rotation and the phased diffusion.
    trace_g, det_g : complex
        Trace and determinant of the assembled ``g``.
    k_scalar : complex
        ``N(gamma*beta - alpha*delta) - M(alpha + beta)(gamma - delta)``.
    """

    phases: PhaseSet
    spec: ProblemSpec
    g: ComplexMatrix = field(repr=False)
    g1: ComplexMatrix = field(repr=False)
    g2: ComplexMatrix = field(repr=False)
    trace_g: complex
    det_g: complex
    k_scalar: complex

    @property
    def discriminant(self) -> complex:
        return self.trace_g * self.trace_g - 4.0 * self.det_g


@dataclass(frozen=True)
class EigenSystem:
    """Closed-form eigensystem of a `Kernel2`.

    ``g1_vec`` is the eigenvector with the larger overlap ``|<w~|g>|``;
    ``branch_sign`` records whether ``xi1`` came from the ``+`` (``1``)
    or the ``-`` (``-1``) root of the characteristic quadratic.
    ``delta_lambda`` is ``lambda1 - lambda2`` wrapped into ``(-pi, pi]``.
    """

    xi1: complex
    xi2: complex
    lambda1: float
    lambda2: float
    delta_lambda: float
    g1_vec: ComplexVector = field(repr=False)
    g2_vec: ComplexVector = field(repr=False)
    degenerate: bool
    branch_sign: int = 1


class TraceReconciliation(NamedTuple):
    computed: complex
    printed: complex
    corrected: complex

    @property
    def printed_deviation(self) -> float:
        return abs(self.computed - self.printed)

    @property
    def corrected_deviation(self) -> float:
        return abs(self.computed - self.corrected)


class Alignment(NamedTuple):
    overlap_w: float
    product_overlap: float


def make_phase_set(theta1: float, theta2: float, phi1: float, phi2: float) -> PhaseSet:
    """Build a `PhaseSet` from four angles in radians.

    Angles are normalized into ``[0, 2pi)``.

    Raises
    ------
    DomainError
        If any angle is not a finite real number.
    """
    angles = []
    for name, value in zip(("theta1", "theta2", "phi1", "phi2"), (theta1, theta2, phi1, phi2)):
        try:
            number = float(value)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"{name} must be a real number, got {value!r}") from exc
        if not math.isfinite(number):
            raise DomainError(f"{name} must be finite, got {number!r}")
        angles.append(_normalize_angle(number))
    return PhaseSet(*angles)


def _grover(_angle: float) -> Tuple[float, float, float, float]:
    return (math.pi, 0.0, math.pi, 0.0)


def _long(angle: float) -> Tuple[float, float, float, float]:
    return (angle, 0.0, angle, 0.0)


def _galindo(angle: float) -> Tuple[float, float, float, float]:
    return (math.pi, angle, math.pi, angle)


def _optimal(angle: float) -> Tuple[float, float, float, float]:
    return (math.pi + angle, angle, math.pi + angle, angle)


PHASE_FAMILIES = {
    # alpha = gamma = -1, beta = delta = 1
    "grover": _grover,
    # alpha = gamma = e^{i angle}, beta = delta = 1
    "long": _long,
    # alpha = gamma = -1, beta = delta = e^{i angle}
    "galindo": _galindo,
    # the Grover point under a common offset on all four angles
    "optimal": _optimal,
}


def named_phase_set(name: str, angle: float = math.pi) -> PhaseSet:
    """Return a phase set from one of the named parameter families.

    ``grover`` ignores ``angle``. ``long`` rotates the marked and
    initial states by ``angle`` and leaves their complements alone;
    ``galindo`` keeps the two inversions and rotates both complements
    by ``angle``. ``optimal`` adds ``angle`` to all four Grover angles.
    Every family satisfies the matching condition.
    """
    try:
        family = PHASE_FAMILIES[name]
    except KeyError:
        raise DomainError(
            f"Unknown phase family {name!r} (expected one of: {', '.join(PHASE_FAMILIES)})"
        ) from None
    return make_phase_set(*family(float(angle)))


def initial_reduced_state(spec: ProblemSpec) -> ReducedState:
    return ReducedState(complex(spec.amplitude_w), complex(spec.amplitude_r))


def build_kernel(phases: PhaseSet, spec: ProblemSpec) -> Kernel2:
    """Assemble ``G = -G2 G1`` in the ``{|w~>, |r~>}`` basis."""
    alpha, beta, gamma, delta = phases.exponentials
    s = spec.s_vector
    g1 = np.diag(np.array([alpha, beta], dtype=np.complex128))
    g2 = delta * np.eye(2, dtype=np.complex128) + (gamma - delta) * np.outer(s, s)
    g = -(g2 @ g1)
    n, m = spec.n_total, spec.m_marked
    k_scalar = n * (gamma * beta - alpha * delta) - m * (alpha + beta) * (gamma - delta)
    kernel = Kernel2(
        phases=phases,
        spec=spec,
        g=g,
        g1=g1,
        g2=g2,
        trace_g=complex(np.trace(g)),
        det_g=complex(np.linalg.det(g)),
        k_scalar=complex(k_scalar),
    )
    log.debug("Built kernel for %s, N=%d, M=%d: Tr G = %r", phases, n, m, kernel.trace_g)
    return kernel


def _null_vector(g: ComplexMatrix, xi: complex) -> Optional[ComplexVector]:
    # Both rows of (G - xi I) give a candidate; take the better conditioned one.
    from_first_row = np.array([g[0, 1], xi - g[0, 0]], dtype=np.complex128)
    from_second_row = np.array([xi - g[1, 1], g[1, 0]], dtype=np.complex128)
    candidate = max((from_first_row, from_second_row), key=np.linalg.norm)
    norm = np.linalg.norm(candidate)
    if norm < 1e-14:
        return None
    return candidate / norm


def _fix_gauge(vector: ComplexVector) -> ComplexVector:
    for component in vector:
        magnitude = abs(component)
        if magnitude > GAUGE_TOLERANCE:
            return vector * (component.conjugate() / magnitude)
    return vector


def _eigenphase(xi: complex) -> float:
    angle = math.atan2(xi.imag, xi.real)
    return math.pi if angle <= -math.pi else angle


def eigensystem(kernel: Kernel2) -> EigenSystem:
    """Closed-form eigenvalues and canonical eigenvectors of ``kernel``.

    The eigenvalues solve ``xi^2 - Tr G xi + Det G = 0`` on the computed
    trace and determinant. Degenerate kernels are a scalar multiple of the
    identity and get the canonical basis as eigenvectors.
    """
    trace, det = kernel.trace_g, kernel.det_g
    discriminant = trace * trace - 4.0 * det
    root = complex(np.sqrt(discriminant))
    xi_plus = 0.5 * (trace + root)
    xi_minus = 0.5 * (trace - root)

    basis = np.eye(2, dtype=np.complex128)
    if abs(discriminant) < DEGENERACY_TOLERANCE:
        lam1, lam2 = _eigenphase(xi_plus), _eigenphase(xi_minus)
        return EigenSystem(
            xi1=xi_plus,
            xi2=xi_minus,
            lambda1=lam1,
            lambda2=lam2,
            delta_lambda=_principal_angle(lam1 - lam2),
            g1_vec=basis[0],
            g2_vec=basis[1],
            degenerate=True,
        )

    vec_plus = _null_vector(kernel.g, xi_plus)
    vec_minus = _null_vector(kernel.g, xi_minus)
    if vec_plus is None or vec_minus is None:
        raise DegenerateKernelError(
            f"Eigenvectors are numerically undefined (|disc| = {abs(discriminant):.3g})"
        )

    branch_sign = 1
    xi1, xi2, g1_vec, g2_vec = xi_plus, xi_minus, vec_plus, vec_minus
    if abs(vec_minus[0]) > abs(vec_plus[0]) + TIE_TOLERANCE:
        branch_sign = -1
        xi1, xi2, g1_vec, g2_vec = xi_minus, xi_plus, vec_minus, vec_plus

    lam1, lam2 = _eigenphase(xi1), _eigenphase(xi2)
    return EigenSystem(
        xi1=xi1,
        xi2=xi2,
        lambda1=lam1,
        lambda2=lam2,
        delta_lambda=_principal_angle(lam1 - lam2),
        g1_vec=_fix_gauge(g1_vec),
        g2_vec=_fix_gauge(g2_vec),
        degenerate=False,
        branch_sign=branch_sign,
    )


def matching_defect(phases: PhaseSet) -> float:
    """``|alpha*delta - beta*gamma|``, zero exactly when the phases match."""
    return abs(phases.alpha * phases.delta - phases.beta * phases.gamma)


def is_matched(phases: PhaseSet, tol: float = MATCH_TOLERANCE) -> bool:
    return matching_defect(phases) < tol


def angle_form_defect(phases: PhaseSet) -> float:
    """``(theta1 - theta2) - (phi1 - phi2)`` wrapped into ``(-pi, pi]``."""
    return _principal_angle((phases.theta1 - phases.theta2) - (phases.phi1 - phases.phi2))


def trace_reconciliation(kernel: Kernel2) -> TraceReconciliation:
    """Compare the assembled trace with the two closed forms.

    ``printed`` carries the ``N(gamma*beta - alpha*delta)`` term as it is
    usually quoted; ``corrected`` carries ``N(alpha*delta + beta*gamma)``,
    which is what the product ``-G2 G1`` actually has on its diagonal.
    """
    alpha, beta, gamma, delta = kernel.phases.exponentials
    n, m = kernel.spec.n_total, kernel.spec.m_marked
    mixed = m * (alpha - beta) * (gamma - delta)
    printed = -(mixed + n * (gamma * beta - alpha * delta)) / n
    corrected = -(mixed + n * (alpha * delta + beta * gamma)) / n
    return TraceReconciliation(kernel.trace_g, complex(printed), complex(corrected))


def eigenvector_formula(kernel: Kernel2, branch_sign: int) -> Optional[ComplexVector]:
    """Closed-form (un-normalized) eigenvector for the given root sign.

    Returns ``[-(k + s*N*sqrt(disc)) / (2 alpha (gamma - delta) sqrt(M(N-M))), 1]``
    for ``s = branch_sign``, or `None` when the denominator vanishes. The
    leading minus follows from solving the second row of ``G - xi I``.
    """
    alpha, _, gamma, delta = kernel.phases.exponentials
    n, m = kernel.spec.n_total, kernel.spec.m_marked
    denominator = 2.0 * alpha * (gamma - delta) * math.sqrt(m * (n - m))
    if abs(denominator) <= FORMULA_DENOMINATOR_TOLERANCE:
        return None
    root = complex(np.sqrt(kernel.discriminant))
    numerator = kernel.k_scalar + branch_sign * n * root
    return np.array([-numerator / denominator, 1.0], dtype=np.complex128)


def asymptotic_g1(phases: PhaseSet, spec: ProblemSpec) -> Optional[ComplexVector]:
    """Normalized large-``N`` form of ``|g1>`` for ``M << N``.

    ``[(alpha*delta - beta*gamma) / (alpha (gamma - delta)) sqrt(N/M), 1]``;
    `None` when ``gamma == delta``.
    """
    alpha, beta, gamma, delta = phases.exponentials
    if abs(gamma - delta) <= FORMULA_DENOMINATOR_TOLERANCE:
        return None
    lead = (alpha * delta - beta * gamma) / (alpha * (gamma - delta))
    lead *= math.sqrt(spec.n_total / spec.m_marked)
    vector = np.array([lead, 1.0], dtype=np.complex128)
    return _fix_gauge(vector / np.linalg.norm(vector))


def reduced_amplitudes(kernel: Kernel2, m_max: int) -> ComplexMatrix:
    """Reduced states after ``0..m_max`` applications, one row per iteration."""
    if m_max < 0:
        raise DomainError(f"m_max must be non-negative, got {m_max}")
    states = np.empty((m_max + 1, 2), dtype=np.complex128)
    state = kernel.spec.s_vector.astype(np.complex128)
    states[0] = state
    g = kernel.g
    for step in range(1, m_max + 1):
        state = g @ state
        states[step] = state
    return states


def evolve_probability(phases: PhaseSet, spec: ProblemSpec, m: int) -> float:
    """Success probability ``|<w~|G^m|s>|^2`` from the m-th power of the kernel."""
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    if m == 0:
        return spec.m_marked / spec.n_total
    kernel = build_kernel(phases, spec)
    # binary powering, no per-step history
    amplitude = (np.linalg.matrix_power(kernel.g, int(m)) @ spec.s_vector)[0]
    return min(1.0, abs(amplitude) ** 2)


def _spectral_amplitude(kernel: Kernel2, system: EigenSystem, m: int) -> complex:
    a_w = kernel.spec.amplitude_w
    # eigenvalues are unit modulus, so powers go through the phases
    power_1 = complex(np.exp(1j * m * system.lambda1))
    if system.degenerate:
        return power_1 * a_w
    power_2 = complex(np.exp(1j * m * system.lambda2))
    g1 = system.g1_vec
    projection = g1[0] * np.vdot(g1, kernel.spec.s_vector)
    return power_2 * a_w + (power_1 - power_2) * complex(projection)


def spectral_probability(phases: PhaseSet, spec: ProblemSpec, m: int) -> float:
    """Success probability through the eigendecomposition of the kernel.

    ``<w~|G^m|s> = xi2^m (sqrt(M/N) + ((xi1/xi2)^m - 1) <w~|g1><g1|s>)``.
    """
    if m < 0:
        raise DomainError(f"m must be non-negative, got {m}")
    if m == 0:
        return spec.m_marked / spec.n_total
    kernel = build_kernel(phases, spec)
    amplitude = _spectral_amplitude(kernel, eigensystem(kernel), m)
    return min(1.0, abs(amplitude) ** 2)


def approximate_probability(phases: PhaseSet, spec: ProblemSpec, m: int) -> float:
    """``sin^2(m * dlambda / 2)``, the large-``N`` approximation for matched phases."""
    system = eigensystem(build_kernel(phases, spec))
    return math.sin(0.5 * m * system.delta_lambda) ** 2


def predicted_peak_m(
    phases: PhaseSet, spec: ProblemSpec, tol: float = MATCH_TOLERANCE
) -> float:
    """Real-valued iteration count of the first probability peak, ``pi / |dlambda|``.

    Raises
    ------
    NoOscillationError
        If the phases violate the matching condition or the kernel is degenerate.
    """
    if not is_matched(phases, tol):
        raise NoOscillationError(
            f"No oscillation to predict: phases are not matched"
            f" (|alpha*delta - beta*gamma| = {matching_defect(phases):.3g})"
        )
    system = eigensystem(build_kernel(phases, spec))
    if system.degenerate or system.delta_lambda == 0.0:
        raise NoOscillationError("No oscillation to predict: the kernel is degenerate")
    return math.pi / abs(system.delta_lambda)


def matched_peak_closed_form(
    phases: PhaseSet, spec: ProblemSpec, tol: float = MATCH_TOLERANCE
) -> float:
    """``(pi/2) sqrt(N/M) / (2 |sin((phi1 - phi2)/2)|)`` for matched phases.

    Large-``N`` estimate of `predicted_peak_m`; reported next to it, never
    used in its place.
    """
    if not is_matched(phases, tol):
        raise NoOscillationError("The closed form only holds for matched phases")
    half_gap = abs(math.sin(0.5 * (phases.phi1 - phases.phi2)))
    if half_gap < FORMULA_DENOMINATOR_TOLERANCE:
        raise NoOscillationError("No oscillation to predict: phi1 == phi2")
    return 0.5 * math.pi * math.sqrt(spec.n_total / spec.m_marked) / (2.0 * half_gap)


def g1_alignment(phases: PhaseSet, spec: ProblemSpec) -> Alignment:
    """``|<w~|g1>|`` and ``|<w~|g1><g1|s>|`` for the branch-labelled ``g1``.

    Raises
    ------
    DegenerateKernelError
        If the kernel has a repeated eigenvalue.
    """
    system = eigensystem(build_kernel(phases, spec))
    if system.degenerate:
        raise DegenerateKernelError("g1 is undefined for a degenerate kernel")
    g1 = system.g1_vec
    overlap_w = abs(g1[0])
    product = abs(g1[0] * np.vdot(g1, spec.s_vector))
    return Alignment(float(overlap_w), float(product))
