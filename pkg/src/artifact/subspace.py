"""Exact four-dimensional model of the two-oracle search operator.

The search space splits into four classes: items only in A, items only in B,
common items (the targets) and items in neither set. Uniform superpositions
over those classes, ``|a>, |b>, |t>, |p>``, span a subspace that every
operator used here preserves, so the whole algorithm reduces to 4x4 real
matrices acting on the class amplitudes ``(alpha, beta, gamma, delta)``.

Basis ordering is always ``(a, b, t, p)``; ``gamma`` is the target amplitude.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ModelError",
    "DegenerateDecompositionError",
    "SetProfile",
    "AmplitudeVector",
    "SubspaceOperator",
    "ClosedFormParts",
    "EigenSystem",
    "round_half_up",
    "amplitudes_from_profile",
    "build_reflection_matrices",
    "closed_form_search_matrix",
    "build_search_operator",
    "closed_form_parts",
    "eigenphases_closed_form",
    "eigen_decomposition_numeric",
    "initial_state_coefficients",
    "tabulated_coefficients",
    "overlap_after_iterations_analytic",
    "overlap_after_iterations_exact",
    "overlap_trajectory_exact",
    "asymptotic_eigenphase",
    "optimal_iteration_count",
    "analyze",
]

A, B, T, P = 0, 1, 2, 3
_CHECKER = np.array([[(-1) ** (i + j) for j in range(4)] for i in range(4)], dtype=float)


class ModelError(RuntimeError):
    """An analytic identity failed numerically; points at a bug upstream."""


class DegenerateDecompositionError(ValueError):
    """The closed-form eigenvector construction does not apply to this profile."""


def round_half_up(x: float) -> int:
    """Round to nearest, ties away from zero (``round`` would go to even)."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SetProfile:
    """Cardinalities of the four disjoint item classes."""

    n_total: int
    count_a_only: int
    count_b_only: int
    count_common: int
    count_neither: int

    def __post_init__(self):
        counts = (self.count_a_only, self.count_b_only, self.count_common, self.count_neither)
        if self.n_total < 1:
            raise ValueError(f"n_total must be >= 1, got {self.n_total}")
        if any(c < 0 for c in counts):
            raise ValueError(f"class counts must be non-negative, got {counts}")
        if sum(counts) != self.n_total:
            raise ValueError(f"class counts {counts} sum to {sum(counts)}, expected n_total={self.n_total}")

    @classmethod
    def from_counts(cls, n_total: int, a_only: int, b_only: int, common: int) -> "SetProfile":
        return cls(n_total, a_only, b_only, common, n_total - a_only - b_only - common)

    @property
    def size_a(self) -> int:
        return self.count_a_only + self.count_common

    @property
    def size_b(self) -> int:
        return self.count_b_only + self.count_common

    def counts(self) -> tuple[int, int, int, int]:
        """Class sizes in basis order (a, b, t, p)."""
        return (self.count_a_only, self.count_b_only, self.count_common, self.count_neither)


@dataclass(frozen=True)
class AmplitudeVector:
    alpha: float
    beta: float
    gamma: float
    delta: float
    tol: Tolerances = field(default=DEFAULT, repr=False, compare=False)

    def __post_init__(self):
        c = self.as_array()
        if np.any(c < 0) or np.any(c > 1):
            raise ValueError(f"amplitudes must lie in [0, 1], got {tuple(c)}")
        err = abs(float(c @ c) - 1.0)
        if err > self.tol.normalization:
            raise ValueError(f"amplitudes are not normalized (|sum of squares - 1| = {err:.3e})")

    @classmethod
    def from_abg(cls, alpha: float, beta: float, gamma: float) -> "AmplitudeVector":
        """Fill in delta so the vector is normalized."""
        rest = 1.0 - alpha * alpha - beta * beta - gamma * gamma
        if rest < -1e-15:
            raise ValueError("alpha^2 + beta^2 + gamma^2 exceeds 1")
        return cls(alpha, beta, gamma, math.sqrt(max(rest, 0.0)))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta], dtype=float)


@dataclass(frozen=True)
class SubspaceOperator:
    entries: np.ndarray
    label: str

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def orthogonality_defect(self) -> float:
        m = self.entries
        return float(np.abs(m.T @ m - np.eye(4)).max())

    def checkerboard_defect(self) -> float:
        """Largest violation of ``M^T_ij = (-1)^(i+j) M_ij``."""
        m = self.entries
        return float(np.abs(m.T - _CHECKER * m).max())

    def to_row_major(self) -> list[float]:
        return [float(v) for v in self.entries.ravel(order="C")]


@dataclass(frozen=True)
class ClosedFormParts:
    r: float
    l1: float
    l2: float
    chi: float
    zeta: float
    eta: float

    @property
    def cos_plus(self) -> float:
        return self.chi + math.sqrt(self.zeta + self.eta)

    @property
    def cos_minus(self) -> float:
        return self.chi - math.sqrt(self.zeta + self.eta)


@dataclass(frozen=True)
class EigenSystem:
    """Eigendecomposition of V.

    ``diag`` holds normalized eigenvectors as columns, ordered for the
    eigenvalues ``(e^{i th+}, e^{-i th+}, e^{i th-}, e^{-i th-})`` so that
    ``diag^H V diag`` is diagonal. The slope/normalizer fields are ``None``
    when the degenerate fallback produced the eigenvectors.
    """

    theta_plus: float
    theta_minus: float
    diag: np.ndarray
    degenerate: bool = False
    g: Optional[float] = None
    h: Optional[float] = None
    g_minus: Optional[float] = None
    h_minus: Optional[float] = None
    x: Optional[float] = None
    y: Optional[float] = None
    sigma: Optional[complex] = None
    kappa: Optional[complex] = None

    @property
    def eigenvalues(self) -> np.ndarray:
        tp, tm = self.theta_plus, self.theta_minus
        return np.exp(1j * np.array([tp, -tp, tm, -tm]))

    def diagonalization_defect(self, V: SubspaceOperator) -> float:
        D = self.diag
        return float(np.abs(D.conj().T @ V.entries @ D - np.diag(self.eigenvalues)).max())

    def unitarity_defect(self) -> float:
        D = self.diag
        return float(np.abs(D.conj().T @ D - np.eye(4)).max())


def amplitudes_from_profile(profile: SetProfile) -> AmplitudeVector:
    if profile.n_total <= 0:
        raise ValueError("n_total must be positive")
    n = profile.n_total
    a, b, t, p = (math.sqrt(c / n) for c in profile.counts())
    return AmplitudeVector(a, b, t, p)


def _coerce_amplitudes(obj: Union[AmplitudeVector, SetProfile]) -> AmplitudeVector:
    return amplitudes_from_profile(obj) if isinstance(obj, SetProfile) else obj


def build_reflection_matrices(amps: AmplitudeVector):
    """Return ``(I_A, I_B, I_s)`` restricted to the class subspace."""
    c = amps.as_array()
    ia = SubspaceOperator(np.diag([-1.0, 1.0, -1.0, 1.0]), "I_A")
    ib = SubspaceOperator(np.diag([1.0, -1.0, -1.0, 1.0]), "I_B")
    i_s = SubspaceOperator(np.eye(4) - 2.0 * np.outer(c, c), "I_s")
    return ia, ib, i_s


def closed_form_search_matrix(amps: AmplitudeVector) -> np.ndarray:
    """Entry table of ``V = I_s I_B I_s I_A`` written in terms of r and l_k."""
    a, b, g, d = amps.alpha, amps.beta, amps.gamma, amps.delta
    r = b * b + g * g
    l1, l2 = 1.0 - r, 1.0 - 2.0 * r
    return np.array(
        [
            [8 * a * a * r - 1, 4 * a * b * l2, -4 * a * g * l2, -8 * a * d * r],
            [-4 * a * b * l2, 8 * b * b * l1 - 1, -8 * b * g * l1, 4 * b * d * l2],
            [-4 * a * g * l2, 8 * b * g * l1, 1 - 8 * g * g * l1, 4 * g * d * l2],
            [8 * a * d * r, 4 * b * d * l2, -4 * g * d * l2, 1 - 8 * d * d * r],
        ]
    )


def build_search_operator(amps: AmplitudeVector, tol: Tolerances = DEFAULT) -> SubspaceOperator:
    """V as the product of the reflection matrices, checked against the entry table.

    The product is returned. Raises :class:`ModelError` listing the offending
    entries if the table disagrees by more than ``tol.closed_form``.
    """
    ia, ib, i_s = build_reflection_matrices(amps)
    product = i_s.entries @ ib.entries @ i_s.entries @ ia.entries
    diff = np.abs(product - closed_form_search_matrix(amps))
    if diff.max() > tol.closed_form:
        bad = [(int(i) + 1, int(j) + 1, float(diff[i, j])) for i, j in zip(*np.nonzero(diff > tol.closed_form))]
        raise ModelError(f"closed-form V disagrees with the reflection product at (row, col, |diff|) {bad}")
    return SubspaceOperator(product, "V")


def closed_form_parts(amps: AmplitudeVector) -> ClosedFormParts:
    a2, b2, g2 = amps.alpha**2, amps.beta**2, amps.gamma**2
    r = b2 + g2
    chi = 4 * (a2 + g2) * (b2 + g2) - 4 * g2
    zeta = (1 - 4 * (b2 + g2) * (a2 - g2) - 4 * g2) ** 2
    eta = (4 * amps.alpha * amps.gamma * (2 * b2 + 2 * g2 - 1)) ** 2
    return ClosedFormParts(r=r, l1=1 - r, l2=1 - 2 * r, chi=chi, zeta=zeta, eta=eta)


def _checked_cosine(value: float, tol: Tolerances) -> float:
    excess = abs(value) - 1.0
    if excess > tol.arccos_error:
        raise ModelError(f"cosine {value!r} lies outside [-1, 1] by {excess:.3e}")
    if excess > tol.arccos_clamp:
        warnings.warn(f"clamping cosine {value!r} ({excess:.3e} outside [-1, 1])", RuntimeWarning, stacklevel=3)
    return min(1.0, max(-1.0, value))


def eigenphases_closed_form(amps: AmplitudeVector, tol: Tolerances = DEFAULT):
    """Return ``(parts, theta_plus, theta_minus)`` from the chi/zeta/eta expressions.

    The angles are taken through half-angle forms that avoid the cancellation
    in ``arccos`` near 0 and pi, using the exact identities
    ``(1 - chi)^2 - (zeta + eta) = 16 gamma^2 delta^2`` and
    ``(1 + chi)^2 - (zeta + eta) = 16 alpha^2 beta^2``.
    """
    parts = closed_form_parts(amps)
    root = math.sqrt(parts.zeta + parts.eta)
    cos_p = _checked_cosine(parts.chi + root, tol)
    cos_m = _checked_cosine(parts.chi - root, tol)

    den_p = 1.0 - parts.chi + root
    if den_p > 1e-8:
        one_minus = 16.0 * (amps.gamma * amps.delta) ** 2 / den_p
        theta_p = 2.0 * math.asin(min(1.0, math.sqrt(one_minus / 2.0)))
    else:
        theta_p = math.acos(cos_p)
    den_m = 1.0 + parts.chi + root
    if den_m > 1e-8:
        one_plus = 16.0 * (amps.alpha * amps.beta) ** 2 / den_m
        theta_m = math.pi - 2.0 * math.asin(min(1.0, math.sqrt(one_plus / 2.0)))
    else:
        theta_m = math.acos(cos_m)
    return parts, theta_p, theta_m


def _sym2_eigenvalues(a: float, b: float, d: float) -> tuple[float, float]:
    """Eigenvalues (larger first) of the symmetric matrix [[a, b], [b, d]]."""
    mean = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), b)
    return mean + rad, mean - rad


def _slopes(a: float, b: float, d: float) -> tuple[float, float]:
    """Eigenvector slopes ``(lam - a)/b`` of [[a, b], [b, d]], larger eigenvalue first.

    One of ``lam+ - a`` and ``lam- - a`` cancels badly when ``b`` is small;
    it is recovered from the other through ``(lam+ - a)(lam- - a) = -b^2``.
    """
    half = 0.5 * (d - a)
    rad = math.hypot(half, b)
    if half >= 0:
        up = half + rad
        down = -b * b / up
    else:
        down = half - rad
        up = -b * b / down
    return up / b, down / b


def _null_space(m: np.ndarray, count: int) -> np.ndarray:
    """Orthonormal basis (columns) for the ``count`` smallest singular directions."""
    _, _, vh = np.linalg.svd(m)
    return vh[-count:].conj().T if count else np.zeros((m.shape[0], 0))


def _fallback_decomposition(V: np.ndarray, theta_p: float, theta_m: float, tol: Tolerances) -> np.ndarray:
    """Eigenvectors from null spaces, arranged in conjugate pairs.

    Non-real eigenvalues pair an eigenvector with its conjugate. Eigenvalues
    +1 and -1 of a rotation in four dimensions have even multiplicity, and
    their real eigenspace is paired as ``(u1 +- i u2)/sqrt(2)``.
    """
    same = abs(theta_p - theta_m) < 1e-7
    thetas = [theta_p] if same else [theta_p, theta_m]
    mult = 2 if same else 1
    columns: list[np.ndarray] = []
    for theta in thetas:
        real_eig = math.sin(theta) < 1e-7
        if real_eig:
            lam = 1.0 if theta < 1.0 else -1.0
            basis = _null_space(V - lam * np.eye(4), 2 * mult).real
            basis, _ = np.linalg.qr(basis)
            for k in range(mult):
                u1, u2 = basis[:, 2 * k], basis[:, 2 * k + 1]
                psi = (u1 + 1j * u2) / math.sqrt(2.0)
                columns.append([psi, psi.conj()])
        else:
            basis = _null_space(V.astype(complex) - np.exp(1j * theta) * np.eye(4), mult)
            for k in range(mult):
                psi = basis[:, k]
                # fix the global phase so the first sizeable component is real
                lead = psi[np.argmax(np.abs(psi) > 1e-8)]
                psi = psi * (abs(lead) / lead)
                columns.append([psi, psi.conj()])
    flat = [vec for pair in columns for vec in pair]
    return np.column_stack(flat)


def eigen_decomposition_numeric(V: SubspaceOperator, tol: Tolerances = DEFAULT) -> EigenSystem:
    """Diagonalize V through its two symmetric 2x2 blocks.

    The checkerboard sign pattern makes ``(V + V^T)/2`` block diagonal on the
    odd (1, 3) and even (2, 4) coordinates; both blocks carry the cosines of
    the eigenphases. The odd/even eigenvector slopes ``g``/``h`` then build
    the diagonalizer directly. Profiles with a vanishing off-diagonal block
    entry take the generic path and leave the slope fields as ``None``.
    """
    if V.label != "V":
        raise ValueError(f"expected the search operator, got {V.label!r}")
    m = V.entries
    if V.orthogonality_defect() > tol.orthogonality or V.checkerboard_defect() > tol.orthogonality:
        raise ModelError("operator is not an orthogonal matrix with the checkerboard symmetry")

    odd = _sym2_eigenvalues(m[0, 0], m[0, 2], m[2, 2])
    even = _sym2_eigenvalues(m[1, 1], m[1, 3], m[3, 3])
    gap = max(abs(odd[0] - even[0]), abs(odd[1] - even[1]))
    if gap > tol.eigen:
        raise ModelError(f"odd and even blocks have different eigenvalues (gap {gap:.3e})")
    cos_p = _checked_cosine(odd[0], tol)
    cos_m = _checked_cosine(odd[1], tol)
    # angles from the unit-modulus eigenvalues directly keep accuracy near 0 and pi
    angles = np.sort(np.abs(np.angle(np.linalg.eigvals(m))))
    theta_p, theta_m = float(angles[0]), float(angles[-1])
    if abs(math.cos(theta_p) - cos_p) > 1e-8 or abs(math.cos(theta_m) - cos_m) > 1e-8:
        raise ModelError("block cosines disagree with the eigenvalues of V")

    v13, v24 = m[0, 2], m[1, 3]
    degenerate = (
        abs(v13) < tol.degenerate_offdiag
        or abs(v24) < tol.degenerate_offdiag
        or math.sin(theta_p) < 1e-7
        or math.sin(theta_m) < 1e-7
    )
    if degenerate:
        D = _fallback_decomposition(m, theta_p, theta_m, tol)
        sys = EigenSystem(theta_p, theta_m, D, degenerate=True)
    else:
        g, g_minus = _slopes(m[0, 0], v13, m[2, 2])
        h, h_minus = _slopes(m[1, 1], v24, m[3, 3])
        x = 1.0 / math.sqrt(2.0 * (1.0 + g * g))
        y = 1.0 / math.sqrt(2.0 * (1.0 + h * h))
        # The imaginary-part equations tie the even components to the odd ones,
        # which fixes the sign of y: i y (V_k2 + V_k4 h) = i sin(th+) psi_k.
        row1 = m[0, 1] + m[0, 3] * h
        row3 = (m[2, 1] + m[2, 3] * h) * g
        y = math.copysign(y, row1 if abs(row1) >= abs(row3) else row3)
        D = np.array(
            [
                [x, x, g * x, g * x],
                [1j * y, -1j * y, 1j * h * y, -1j * h * y],
                [g * x, g * x, -x, -x],
                [1j * h * y, -1j * h * y, -1j * y, 1j * y],
            ]
        )
        sys = EigenSystem(theta_p, theta_m, D, False, g, h, g_minus, h_minus, x, y)

    defect = sys.diagonalization_defect(V)
    if defect > tol.eigen or sys.unitarity_defect() > tol.eigen:
        raise ModelError(f"eigenvector matrix fails to diagonalize V (defect {defect:.3e})")
    return sys


def initial_state_coefficients(sys: EigenSystem, amps: AmplitudeVector, tol: Tolerances = DEFAULT):
    """Project the source state on the eigenbasis; returns ``(sigma, kappa)``.

    sigma is the weight on the ``e^{i th+}`` eigenvector and kappa on the
    ``e^{i th-}`` one; their conjugates weigh the partner eigenvectors.
    """
    s = amps.as_array()
    D = sys.diag
    coeffs = D.conj().T @ s
    sigma, kappa = complex(coeffs[0]), complex(coeffs[2])
    rebuilt = D @ np.array([sigma, sigma.conjugate(), kappa, kappa.conjugate()])
    err = float(np.abs(rebuilt - s).max())
    if err > tol.eigen:
        raise ModelError(f"eigenbasis expansion does not reproduce |s> (error {err:.3e})")
    return sigma, kappa


def tabulated_coefficients(sys: EigenSystem, amps: AmplitudeVector):
    """sigma and kappa from their tabulated closed forms, for comparison only.

    The kappa expression is transcribed literally, including its ``alpha*delta``
    term; the projection in :func:`initial_state_coefficients` instead gives
    ``x (g alpha - gamma) - i y (h beta - delta)``. Use this to report the
    mismatch, never to drive the model.
    """
    if sys.degenerate:
        raise DegenerateDecompositionError("slopes g, h are undefined on the degenerate path")
    a, b, g_, d = amps.alpha, amps.beta, amps.gamma, amps.delta
    x, y, g, h = sys.x, sys.y, sys.g, sys.h
    sigma = x * (a + g * g_) - 1j * y * (b + h * d)
    kappa = x * (a * d - g_) - 1j * y * (h * b - d)
    return complex(sigma), complex(kappa)


def overlap_after_iterations_analytic(sys: EigenSystem, q):
    """``<t|V^q|s>`` from the eigenphases; ``q`` may be an int or an array."""
    if sys.degenerate:
        raise DegenerateDecompositionError("analytic overlap needs the non-degenerate decomposition")
    if sys.sigma is None or sys.kappa is None:
        raise ValueError("EigenSystem lacks sigma/kappa; build it with analyze()")
    q_arr = np.asarray(q)
    if np.any(q_arr < 0):
        raise ValueError("iteration count must be non-negative")
    sig, kap = sys.sigma, sys.kappa
    val = 2 * sys.g * sys.x * abs(sig) * np.cos(np.angle(sig) + q_arr * sys.theta_plus) - 2 * sys.x * abs(
        kap
    ) * np.cos(np.angle(kap) + q_arr * sys.theta_minus)
    return float(val) if np.ndim(val) == 0 else val


def _evolve(V: np.ndarray, v: np.ndarray, q: int, every: int, record: bool):
    out = np.empty(q + 1) if record else None
    if record:
        out[0] = v[T]
    for k in range(1, q + 1):
        v = V @ v
        if k % every == 0:
            v = v / math.sqrt(v @ v)
        if record:
            out[k] = v[T]
    return v, out


def overlap_after_iterations_exact(V: SubspaceOperator, amps: AmplitudeVector, q: int, tol: Tolerances = DEFAULT) -> float:
    """Target coordinate of ``V^q (alpha, beta, gamma, delta)`` by repeated application."""
    if q < 0:
        raise ValueError("iteration count must be non-negative")
    v, _ = _evolve(V.entries, amps.as_array(), int(q), tol.renormalize_every, record=False)
    return float(v[T])


def overlap_trajectory_exact(V: SubspaceOperator, amps: AmplitudeVector, q_max: int, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Target coordinate after 0, 1, ..., q_max applications of V."""
    _, out = _evolve(V.entries, amps.as_array(), int(q_max), tol.renormalize_every, record=True)
    return out


def asymptotic_eigenphase(amps: AmplitudeVector, tol: Tolerances = DEFAULT) -> float:
    """Leading-order rotation angle of V for a small target amplitude."""
    a, b, g = amps.alpha, amps.beta, amps.gamma
    if g > tol.asymptotic_gamma_max:
        raise ValueError(f"gamma={g} is outside the small-gamma regime (<= {tol.asymptotic_gamma_max})")
    if a > tol.asymptotic_ab_max or b > tol.asymptotic_ab_max:
        warnings.warn(
            f"alpha={a:.4g}, beta={b:.4g}: expansion assumes both <= {tol.asymptotic_ab_max}",
            RuntimeWarning,
            stacklevel=2,
        )
    return 4.0 * g * math.sqrt((1 - a * a - b * b) / (1 - 4 * a * a * b * b))


def optimal_iteration_count(amps: AmplitudeVector) -> tuple[int, int]:
    """Return ``(iterations, queries)``; each V application costs two queries."""
    if amps.gamma <= 0:
        raise ValueError("gamma = 0: the sets have no common element to amplify")
    iterations = round_half_up(math.pi / (8.0 * amps.gamma))
    return iterations, 2 * iterations


def analyze(source: Union[AmplitudeVector, SetProfile], tol: Tolerances = DEFAULT) -> EigenSystem:
    """Build V, diagonalize it and attach the source-state coefficients."""
    amps = _coerce_amplitudes(source)
    V = build_search_operator(amps, tol)
    sys = eigen_decomposition_numeric(V, tol)
    sigma, kappa = initial_state_coefficients(sys, amps, tol)
    return replace(sys, sigma=sigma, kappa=kappa)
