"""Two-qubit state classification.

Two criteria drive everything: the Horodecki necessary-and-sufficient
condition for CHSH violation (sum of the two largest eigenvalues of
T^T T above 1, with T the Pauli correlation matrix), and the hashing
sufficient condition for one-way distillability (a marginal entropy
exceeding the global entropy).  A state passing the second but not the
first is flagged as a nonlocal resource: it cannot violate CHSH on its
own, yet many copies in a three-party network can.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import DensityMatrix, partial_trace, von_neumann_entropy

# Boundary cases (M = 1, entropy ties) classify negative.
TIE_TOLERANCE = 1e-9

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# sigma_i (x) sigma_j stacked as a (9, 4, 4) array, row-major in (i, j).
PAULI_KRON = np.stack([np.kron(a, b) for a in PAULI for b in PAULI])


@dataclass(frozen=True)
class CorrelationMatrix:
    """3x3 real matrix T with T_ij = Tr[rho (sigma_i (x) sigma_j)]."""

    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.shape != (3, 3):
            raise ValueError(f"expected 3x3 matrix, got {t.shape}")
        if np.max(np.abs(t)) > 1 + 1e-10:
            raise ValueError("correlation entries must lie in [-1, 1]")
        t.flags.writeable = False
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class Classification:
    """Per-state record of the CHSH and distillability criteria."""

    m_value: float
    chsh_max: float
    s_a: float
    s_b: float
    s_ab: float
    violates_chsh: bool
    hashing_distillable: bool
    nonlocal_resource: bool


def _require_two_qubit(rho: DensityMatrix):
    if rho.dims != (2, 2):
        raise ValueError(f"expected a two-qubit state, got dims {rho.dims}")


def correlation_matrix(rho: DensityMatrix) -> CorrelationMatrix:
    _require_two_qubit(rho)
    vals = np.einsum("kab,ba->k", PAULI_KRON, rho.matrix)
    if np.max(np.abs(vals.imag)) > 1e-10:
        raise ValueError("correlation entries carry an imaginary residue")
    return CorrelationMatrix(vals.real.reshape(3, 3))


def horodecki_m(rho: DensityMatrix) -> float:
    """M(rho): sum of the two largest eigenvalues of T^T T.

    The state violates CHSH iff M > 1; the maximal CHSH value is
    2 sqrt(M).
    """
    t = correlation_matrix(rho).t
    w = np.linalg.eigvalsh(t.T @ t)
    return float(w[-1] + w[-2])


def hashing_criterion(rho: DensityMatrix, cut=None):
    """Entropic one-way distillability check on a bipartition.

    Returns (s_a, s_b, s_ab, distillable) in bits.  ``cut`` names the
    subsystem indices of the first party; default is the first half of
    a two-factor state.
    """
    n = len(rho.dims)
    if cut is None:
        if n != 2:
            raise ValueError("cut is required for states with != 2 subsystems")
        cut = {0}
    cut = set(int(i) for i in cut)
    rest = set(range(n)) - cut
    if not cut or not rest or not cut <= set(range(n)):
        raise ValueError(f"invalid bipartition {sorted(cut)} of {n} subsystems")
    s_a = von_neumann_entropy(partial_trace(rho, cut))
    s_b = von_neumann_entropy(partial_trace(rho, rest))
    s_ab = von_neumann_entropy(rho)
    return s_a, s_b, s_ab, bool(max(s_a, s_b) - s_ab > TIE_TOLERANCE)


def classify(rho: DensityMatrix) -> Classification:
    """Full two-qubit classification: CHSH first, hashing if no violation."""
    _require_two_qubit(rho)
    m = horodecki_m(rho)
    s_a, s_b, s_ab, distillable = hashing_criterion(rho)
    violates = bool(m > 1 + TIE_TOLERANCE)
    return Classification(
        m_value=m,
        chsh_max=float(2 * np.sqrt(max(m, 0.0))),
        s_a=s_a,
        s_b=s_b,
        s_ab=s_ab,
        violates_chsh=violates,
        hashing_distillable=distillable,
        nonlocal_resource=(not violates) and distillable,
    )


def classify_batch(mats: np.ndarray):
    """Vectorized `classify` over a stack of two-qubit matrices (n, 4, 4).

    Returns a dict of arrays with the Classification fields.  Used by the
    Monte Carlo harness; agrees with `classify` entry by entry.
    """
    mats = np.asarray(mats, dtype=complex)
    n = mats.shape[0]
    corr = np.einsum("kab,nba->nk", PAULI_KRON, mats).real.reshape(n, 3, 3)
    tt = np.einsum("nji,njk->nik", corr, corr)
    w = np.linalg.eigvalsh(tt)
    m = w[:, -1] + w[:, -2]

    def entropy(stack):
        ev = np.linalg.eigvalsh(stack)
        ev = np.clip(ev, 0.0, None)
        safe = np.where(ev > 1e-14, ev, 1.0)
        return -np.sum(ev * np.log2(safe), axis=-1)

    t = mats.reshape(n, 2, 2, 2, 2)
    rho_a = np.trace(t, axis1=2, axis2=4)
    rho_b = np.trace(t, axis1=1, axis2=3)
    s_a = entropy(rho_a)
    s_b = entropy(rho_b)
    s_ab = entropy(mats)
    violates = m > 1 + TIE_TOLERANCE
    distillable = np.maximum(s_a, s_b) - s_ab > TIE_TOLERANCE
    return {
        "m_value": m,
        "chsh_max": 2 * np.sqrt(np.clip(m, 0.0, None)),
        "s_a": s_a,
        "s_b": s_b,
        "s_ab": s_ab,
        "violates_chsh": violates,
        "hashing_distillable": distillable,
        "nonlocal_resource": ~violates & distillable,
    }


def chsh_value(rho: DensityMatrix, a, a2, b, b2) -> float:
    """CHSH combination E(a,b) + E(a,b') + E(a',b) - E(a',b') for explicit
    Bloch measurement directions, with E(a,b) = a^T T b."""
    vecs = [np.asarray(v, dtype=float) for v in (a, a2, b, b2)]
    for v in vecs:
        if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-10:
            raise ValueError("measurement settings must be unit 3-vectors")
    a, a2, b, b2 = vecs
    t = correlation_matrix(rho).t
    return float(a @ t @ b + a @ t @ b2 + a2 @ t @ b - a2 @ t @ b2)


def maximize_chsh(rho: DensityMatrix, restarts: int = 10, rounds: int = 100,
                  tol: float = 1e-12, seed: int = 7):
    """Numerically maximized CHSH value with the optimal settings.

    Alternating closed-form updates: given (b, b'), the best a and a'
    align with T(b + b') and T(b - b'); symmetrically for (b, b') given
    (a, a').  Serves as an independent oracle for 2 sqrt(M).
    """
    t = correlation_matrix(rho).t
    rng = np.random.default_rng(seed)

    def unit(v):
        nv = np.linalg.norm(v)
        return v / nv if nv > 1e-15 else np.array([1.0, 0.0, 0.0])

    best_val, best_settings = -np.inf, None
    for _ in range(restarts):
        b = unit(rng.standard_normal(3))
        b2 = unit(rng.standard_normal(3))
        val = -np.inf
        for _ in range(rounds):
            a = unit(t @ (b + b2))
            a2 = unit(t @ (b - b2))
            b = unit(t.T @ (a + a2))
            b2 = unit(t.T @ (a - a2))
            new = a @ t @ (b + b2) + a2 @ t @ (b - b2)
            if new - val < tol:
                val = new
                break
            val = new
        if val > best_val:
            best_val, best_settings = val, (a, a2, b, b2)
    return float(best_val), best_settings
