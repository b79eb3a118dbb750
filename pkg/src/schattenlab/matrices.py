"""Dense complex matrix substrate: Schatten and lp norms, duality maps,
positivity tests, and the shared matrix JSON schema.

Every Schatten quantity goes through the SVD; there is no separate eigenvalue
path for Hermitian inputs (uniformity over speed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ExponentError,
    InvalidInputError,
    UndefinedDirectionError,
)

__all__ = [
    "PExponent",
    "SingularSpectrum",
    "singular_values",
    "schatten_norm",
    "lp_norm",
    "duality_map_vector",
    "duality_map_matrix",
    "is_psd",
    "haar_unitary",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class PExponent:
    """An exponent p in [1, inf] with its Hoelder conjugate.

    Infinity is represented exactly by ``math.inf``; the conjugate of 1 is
    inf and vice versa.
    """

    p: float

    def __post_init__(self):
        p = self.p
        if not (p >= 1.0):  # also rejects NaN
            raise ExponentError(f"exponent must satisfy 1 <= p <= inf, got {p!r}")

    @property
    def conjugate(self) -> float:
        p = self.p
        if p == 1.0:
            return math.inf
        if math.isinf(p):
            return 1.0
        return p / (p - 1.0)

    @property
    def is_finite(self) -> bool:
        return not math.isinf(self.p)

    @classmethod
    def parse(cls, text: str) -> "PExponent":
        t = text.strip().lower()
        if t in ("inf", "infinity", "oo"):
            return cls(math.inf)
        return cls(float(t))


def check_exponent(p: float) -> float:
    """Validate p in [1, inf] and return it as a float."""
    return PExponent(float(p)).p


def conjugate_exponent(p: float) -> float:
    return PExponent(float(p)).conjugate


@dataclass
class SingularSpectrum:
    """Full SVD of a matrix: M = left @ diag(values) @ right."""

    values: np.ndarray  # nonincreasing, >= 0
    left: np.ndarray
    right: np.ndarray  # this is V^*, as returned by LAPACK

    def reconstruct(self) -> np.ndarray:
        k = len(self.values)
        return (self.left[:, :k] * self.values) @ self.right[:k, :]


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise InvalidInputError(f"expected a 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError("matrix has non-finite entries")
    return M


def singular_values(M) -> SingularSpectrum:
    """Full SVD with nonincreasing singular values."""
    M = _as_matrix(M)
    U, s, Vh = np.linalg.svd(M)
    return SingularSpectrum(values=s, left=U, right=Vh)


def schatten_norm(M, p: float) -> float:
    """Schatten p-norm (sum of p-th powers of singular values)^(1/p); operator
    norm for p = inf."""
    p = check_exponent(p)
    M = _as_matrix(M)
    s = np.linalg.svd(M, compute_uv=False)
    if math.isinf(p):
        return float(s[0]) if s.size else 0.0
    return float(np.sum(s**p) ** (1.0 / p))


def lp_norm(v, p: float) -> float:
    """lp norm of a complex vector; max modulus for p = inf."""
    p = check_exponent(p)
    v = np.asarray(v, dtype=complex).ravel()
    a = np.abs(v)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float(np.sum(a**p) ** (1.0 / p))


def _phase(v: np.ndarray) -> np.ndarray:
    # phase of 0 is defined as 0, which keeps the duality identities intact
    a = np.abs(v)
    out = np.zeros_like(v)
    nz = a > 0
    out[nz] = v[nz] / a[nz]
    return out


def duality_map_vector(v, p: float) -> np.ndarray:
    """Norming functional of v in lp: w with ||w||_{p*} = 1 and
    Re<w, v> = ||v||_p.  Requires 1 < p < inf and v != 0."""
    p = check_exponent(p)
    if p == 1.0 or math.isinf(p):
        raise ExponentError("duality map needs 1 < p < inf")
    v = np.asarray(v, dtype=complex).ravel()
    n = lp_norm(v, p)
    if n == 0.0:
        raise UndefinedDirectionError("duality map of the zero vector")
    return _phase(v) * np.abs(v) ** (p - 1.0) / n ** (p - 1.0)


def duality_map_matrix(M, p: float) -> np.ndarray:
    """Schatten analogue of the vector duality map, via M = U S V*  ->
    U S^{p-1} V* / ||M||_p^{p-1}."""
    p = check_exponent(p)
    if p == 1.0 or math.isinf(p):
        raise ExponentError("duality map needs 1 < p < inf")
    M = _as_matrix(M)
    U, s, Vh = np.linalg.svd(M)
    n = float(np.sum(s**p) ** (1.0 / p))
    if n == 0.0:
        raise UndefinedDirectionError("duality map of the zero matrix")
    k = len(s)
    return (U[:, :k] * s ** (p - 1.0)) @ Vh[:k, :] / n ** (p - 1.0)


def is_psd(M, tol: float | None = None) -> bool:
    """True iff M is Hermitian within tol and its minimum eigenvalue is
    >= -tol.  Default tol is 1e-9 relative to the Frobenius norm."""
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError("is_psd needs a square matrix")
    scale = float(np.linalg.norm(M))
    if tol is None:
        tol = 1e-9 * max(scale, 1.0)
    if np.abs(M - M.conj().T).max(initial=0.0) > tol:
        return False
    w = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    return bool(w.min(initial=0.0) >= -tol)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


# --- shared JSON schema -----------------------------------------------------


def matrix_to_json(M) -> dict:
    """{"rows": n, "cols": m, "data": [[re, im], ...]} in row-major order."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise InvalidInputError("matrix JSON schema is for 2-d matrices")
    data = [[float(z.real), float(z.imag)] for z in M.ravel()]
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]), "data": data}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed matrix JSON: {exc}") from exc
    if len(data) != rows * cols:
        raise InvalidInputError(
            f"matrix JSON of shape {rows}x{cols} needs {rows * cols} entries, got {len(data)}"
        )
    flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    return flat.reshape(rows, cols)
