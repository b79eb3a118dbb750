"""Polynomials of shift operators: truncations of the right shift on l^p, the
diagonal shift on Schatten space, norm profiles, the extremal-coefficient
classification, and the scalar-vs-block norm gap search.

Conventions.  ``toeplitz_of(P, n)`` is the lower-triangular banded Toeplitz
matrix of P applied to the n-truncated right shift.  ``sigma_matrix(P, n)``
is the n^2 x n^2 row-major vectorization of X -> sum_k a_k S^k X S*^k, the
polynomial of the truncated diagonal (NW to SE) shift acting on n x n
matrices.  All norm routines return witness-certified lower bounds of the
corresponding truncated operator norms; truncated values increase with n
towards the infinite-dimensional norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import ExponentError, InvalidInputError
from .matrices import check_exponent
from .pnorm import (
    BlockOperator,
    MatrixSpaceOperator,
    PNormConfig,
    PNormEstimate,
    estimate_pnorm,
    exact_pnorm_special,
    mixed_norm,
)

__all__ = [
    "Polynomial",
    "shift_matrix",
    "toeplitz_of",
    "sigma_apply",
    "sigma_matrix",
    "sigma_conjugation_check",
    "poly_norm",
    "poly_vector_norm",
    "sigma_norm",
    "sup_circle",
    "classify_extremal",
    "ExtremalVerdict",
    "NormProfile",
    "compute_profile",
    "gap_search",
    "GapCandidate",
]


@dataclass(frozen=True)
class Polynomial:
    """A complex polynomial a_0 + a_1 z + ... + a_deg z^deg."""

    coeffs: tuple

    def __init__(self, coeffs):
        arr = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
        # strip trailing zeros; the zero polynomial keeps a single 0
        nz = np.nonzero(arr)[0]
        arr = arr[: nz[-1] + 1] if nz.size else arr[:1]
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in arr))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def __call__(self, z):
        # Horner evaluation
        acc = np.zeros_like(np.asarray(z, dtype=complex))
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def abs_coeff_sum(self) -> float:
        return float(np.sum(np.abs(self.array)))

    @classmethod
    def from_string(cls, text: str) -> "Polynomial":
        """Parse comma-separated coefficients, lowest degree first.
        Imaginary parts may use 'i' or 'j': e.g. "1,-0.5+0.25i,2i"."""
        toks = [t.strip() for t in text.split(",") if t.strip()]
        if not toks:
            raise InvalidInputError("empty polynomial string")
        try:
            return cls([complex(t.replace("i", "j")) for t in toks])
        except ValueError as exc:
            raise InvalidInputError(f"bad coefficient in {text!r}: {exc}") from exc

    def to_string(self) -> str:
        parts = []
        for c in self.coeffs:
            if c.imag == 0:
                parts.append(repr(c.real))
            else:
                parts.append(f"{c.real!r}{c.imag:+}i")
        return ",".join(parts)


def shift_matrix(n: int, kind: str = "right") -> np.ndarray:
    """Truncated shift matrices: 'right' has ones on the first subdiagonal
    (S e_j = e_{j+1}), 'left' is its adjoint, 'cyclic' wraps around."""
    if n < 1:
        raise InvalidInputError("shift truncation needs n >= 1")
    S = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    if kind == "right":
        S[idx + 1, idx] = 1.0
    elif kind == "left":
        S[idx, idx + 1] = 1.0
    elif kind == "cyclic":
        S[(idx + 1) % n, idx] = 1.0
        S[0, n - 1] = 1.0
    else:
        raise InvalidInputError(f"unknown shift kind {kind!r}")
    return S


def toeplitz_of(P: Polynomial, n: int) -> np.ndarray:
    """P evaluated at the n-truncated right shift: lower-triangular banded
    Toeplitz with entry (i, j) = a_{i-j}."""
    if n < 1:
        raise InvalidInputError("truncation needs n >= 1")
    col = np.zeros(n, dtype=complex)
    a = P.array
    col[: min(n, a.size)] = a[: min(n, a.size)]
    return scipy.linalg.toeplitz(col, np.zeros(n, dtype=complex))


def sigma_apply(X: np.ndarray, P: Polynomial) -> np.ndarray:
    """Direct evaluation of sum_k a_k S^k X S*^k (diagonal shift polynomial)."""
    X = np.asarray(X, dtype=complex)
    n = X.shape[0]
    out = np.zeros_like(X)
    for k, a in enumerate(P.coeffs):
        if k >= n:
            break
        if k == 0:
            out += a * X
        else:
            out[k:, k:] += a * X[:-k, :-k]
    return out


def sigma_matrix(P: Polynomial, n: int) -> np.ndarray:
    """Row-major vectorization of X -> sum_k a_k S^k X S*^k as an n^2 x n^2
    matrix (vec(A X B) = kron(A, B^T) vec(X))."""
    S = shift_matrix(n, "right")
    mat = np.zeros((n * n, n * n), dtype=complex)
    Sk = np.eye(n, dtype=complex)
    for k, a in enumerate(P.coeffs):
        if k > 0:
            Sk = Sk @ S
        if a != 0:
            mat += a * np.kron(Sk, Sk.conj())
    return mat


def theta_shift(A: np.ndarray) -> np.ndarray:
    """Two-sided diagonal shift on a finite index window, zero-filling the
    entries that enter from outside the window."""
    A = np.asarray(A, dtype=complex)
    out = np.zeros_like(A)
    out[1:, 1:] = A[:-1, :-1]
    return out


def sigma_conjugation_check(A: np.ndarray) -> float:
    """Residual of the identity theta(A) = S A S^{-1} on the interior of a
    two-sided window.

    On the window the invertible model of S is the cyclic shift; conjugation
    by it agrees with the zero-filled diagonal shift except at the boundary,
    so the residual is measured with the first and last row/column excluded.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError("window must be square")
    n = A.shape[0]
    if n < 3:
        raise InvalidInputError("window too small: need size >= 3")
    C = shift_matrix(n, "cyclic")
    diff = theta_shift(A) - C @ A @ C.conj().T
    return float(np.linalg.norm(diff[1:-1, 1:-1]))


# --- norm computations -------------------------------------------------------


def _is_special(p: float) -> bool:
    return p == 1.0 or p == 2.0 or math.isinf(p)


def poly_norm(
    P: Polynomial, p: float, n: int, config: PNormConfig | None = None
) -> PNormEstimate:
    """Certified lower bound of ||P(S)||_{l^p -> l^p} at truncation n."""
    p = check_exponent(p)
    T = toeplitz_of(P, n)
    if _is_special(p):
        return exact_pnorm_special(T, p)
    return estimate_pnorm(BlockOperator(T, 1), p, config)


def _lift_scalar_witness(w: np.ndarray, m: int) -> np.ndarray:
    """Embed a scalar witness a into blocks X_j = a_j E_00: the mixed norm and
    the image norm both match the scalar quantities exactly."""
    n = w.shape[0]
    out = np.zeros((n, m, m), dtype=complex)
    out[:, 0, 0] = w[:, 0, 0]
    return out


def poly_vector_norm(
    P: Polynomial,
    p: float,
    n: int,
    m: int,
    config: PNormConfig | None = None,
) -> PNormEstimate:
    """Certified lower bound of ||P(S) (x) Id_{S^p_m}|| on l^p_n(S^p_m).

    For p in {1, 2, inf} the block norm coincides with the scalar norm.  For
    other p the power iteration is warm-started from the scalar witness, so
    the block estimate always dominates the scalar estimate.
    """
    p = check_exponent(p)
    if m < 1:
        raise InvalidInputError("block size m must be >= 1")
    T = toeplitz_of(P, n)
    if m == 1:
        return poly_norm(P, p, n, config)
    if _is_special(p):
        est = exact_pnorm_special(T, p)
        return PNormEstimate(
            value=est.value,
            witness=_lift_scalar_witness(est.witness, m),
            iterations=0,
            converged=True,
            restarts_used=0,
            p=p,
        )
    scalar = poly_norm(P, p, n, config)
    warm = [_lift_scalar_witness(scalar.witness, m)]
    return estimate_pnorm(BlockOperator(T, m), p, config, warm_starts=warm)


def sigma_norm(
    P: Polynomial, p: float, n: int, config: PNormConfig | None = None
) -> PNormEstimate:
    """Certified lower bound of ||P(sigma_n)||_{S^p_n -> S^p_n} where sigma_n
    is the truncated diagonal shift on n x n matrices.

    The scalar shift sits inside sigma_n on the diagonal, so the power
    iteration is warm-started from the diagonal embedding of the scalar
    witness: the sigma estimate always dominates the scalar estimate.
    """
    p = check_exponent(p)
    if p == 1.0 or math.isinf(p):
        raise ExponentError("sigma_norm supports 1 < p < inf")
    mat = sigma_matrix(P, n)
    if p == 2.0:
        value = float(np.linalg.svd(mat, compute_uv=False)[0])
        _, _, Vh = np.linalg.svd(mat)
        w = Vh[0].conj().reshape(1, n, n)
        w = w / mixed_norm(w, 2.0)
        return PNormEstimate(
            value=value, witness=w, iterations=0, converged=True, restarts_used=0, p=p
        )
    scalar = poly_norm(P, p, n, config)
    diag_embed = np.zeros((1, n, n), dtype=complex)
    np.fill_diagonal(diag_embed[0], scalar.witness[:, 0, 0])
    return estimate_pnorm(
        MatrixSpaceOperator(mat, n), p, config, warm_starts=[diag_embed]
    )


def sup_circle(P: Polynomial, grid: int = 1 << 16) -> float:
    """max_{|z|=1} |P(z)| via an FFT evaluation on a dense grid plus local
    refinement around the best grid point."""
    a = P.array
    if a.size == 1:
        return float(abs(a[0]))
    padded = np.zeros(max(grid, a.size), dtype=complex)
    padded[: a.size] = a
    vals = np.abs(np.fft.fft(padded))
    k = int(np.argmax(vals))
    best = float(vals[k])
    theta0 = 2 * np.pi * k / padded.size
    h = 2 * np.pi / padded.size

    def neg(t):
        return -abs(P(np.exp(1j * t)))

    res = scipy.optimize.minimize_scalar(
        neg, bounds=(theta0 - h, theta0 + h), method="bounded",
        options={"xatol": 1e-14},
    )
    return max(best, float(-res.fun))


@dataclass(frozen=True)
class ExtremalVerdict:
    verdict: str  # "same-sign" | "alternating" | "neither"
    predicted_norm: float | None


def classify_extremal(P: Polynomial) -> ExtremalVerdict:
    """Classify a real polynomial with all-nonzero coefficients: if the signs
    are constant or strictly alternating, every truncated shift norm attains
    the coefficient l1 sum; otherwise it stays strictly below."""
    a = P.array
    if np.any(a.imag != 0):
        raise InvalidInputError("extremal classification needs real coefficients")
    if np.any(a.real == 0):
        raise InvalidInputError("extremal classification needs all coefficients nonzero")
    prods = a.real[:-1] * a.real[1:]
    if prods.size == 0 or np.all(prods > 0):
        verdict = "same-sign"
    elif np.all(prods < 0):
        verdict = "alternating"
    else:
        verdict = "neither"
    predicted = P.abs_coeff_sum() if verdict != "neither" else None
    return ExtremalVerdict(verdict, predicted)


# --- profiles ----------------------------------------------------------------

DEFAULT_LADDER = (8, 16, 32, 64, 128)


@dataclass
class NormProfile:
    polynomial: Polynomial
    p: float
    m: int
    entries: list = field(default_factory=list)  # (n, value, converged)

    def to_json(self) -> dict:
        return {
            "poly": self.polynomial.to_string(),
            "p": "inf" if math.isinf(self.p) else self.p,
            "m": self.m,
            "entries": [
                {"n": n, "value": v, "converged": c} for (n, v, c) in self.entries
            ],
        }

    def to_csv(self) -> str:
        lines = ["n,value,converged"]
        for n, v, c in self.entries:
            lines.append(f"{n},{v!r},{str(c).lower()}")
        return "\n".join(lines) + "\n"


def compute_profile(
    P: Polynomial,
    p: float,
    ns=DEFAULT_LADDER,
    m: int = 1,
    config: PNormConfig | None = None,
    kind: str = "shift",
) -> NormProfile:
    """Norm estimates over a truncation ladder.  Each level warm-starts from
    the zero-padded witness of the previous level, which makes the profile
    nondecreasing (each truncation embeds isometrically in the next)."""
    profile = NormProfile(P, check_exponent(p), m)
    prev_witness = None
    for n in sorted(ns):
        warm = []
        if prev_witness is not None and not _is_special(p):
            grown = np.zeros((n, prev_witness.shape[1], prev_witness.shape[1]), dtype=complex)
            grown[: prev_witness.shape[0]] = prev_witness
            warm.append(grown)
        if kind == "shift":
            if _is_special(p) or m == 1:
                est = poly_vector_norm(P, p, n, m, config)
            else:
                scalar = poly_norm(P, p, n, config)
                warm.append(_lift_scalar_witness(scalar.witness, m))
                est = estimate_pnorm(
                    BlockOperator(toeplitz_of(P, n), m), p, config, warm_starts=warm
                )
        elif kind == "sigma":
            if not _is_special(p) and prev_witness is not None:
                n0 = prev_witness.shape[1]
                grown = np.zeros((1, n, n), dtype=complex)
                grown[0, :n0, :n0] = prev_witness[0]
                est = estimate_pnorm(
                    MatrixSpaceOperator(sigma_matrix(P, n), n),
                    p,
                    config,
                    warm_starts=[grown],
                )
            else:
                est = sigma_norm(P, p, n, config)
        else:
            raise InvalidInputError(f"unknown profile kind {kind!r}")
        profile.entries.append((n, est.value, est.converged))
        prev_witness = est.witness
    return profile


# --- gap search ----------------------------------------------------------------


@dataclass
class GapCandidate:
    coeffs: np.ndarray
    scalar_value: float
    block_value: float
    block_witness: np.ndarray
    block_m: int
    n: int

    @property
    def gap(self) -> float:
        return self.block_value - self.scalar_value

    def to_json(self) -> dict:
        from .pnorm import blockvector_to_json

        return {
            "poly": Polynomial(self.coeffs).to_string(),
            "degree": int(len(self.coeffs) - 1),
            "scalar_value": self.scalar_value,
            "block_value": self.block_value,
            "gap": self.gap,
            "m": self.block_m,
            "n": self.n,
            "witness": blockvector_to_json(self.block_witness),
        }


GAP_SEARCH_CAVEAT = (
    "heuristic, not certified: the scalar estimate is a lower bound of the "
    "untruncated scalar norm, so a positive reported gap is evidence, not a proof"
)


def gap_search(
    p: float,
    degree: int,
    budget: int,
    n: int = 24,
    m: int = 2,
    seed: int = 0,
    config: PNormConfig | None = None,
    top: int = 10,
) -> list[GapCandidate]:
    """Random-plus-perturbative search over coefficient vectors (normalized to
    unit coefficient l1 sum) maximizing block_value - scalar_value.

    Rejected at p = 2, where the scalar and block norms agree for every
    polynomial.  Ranking is by gap, ties broken by smaller degree.
    """
    p = check_exponent(p)
    if p == 2.0:
        raise ExponentError(
            "gap search is pointless at p = 2: the scalar and block norms coincide"
        )
    if p == 1.0 or math.isinf(p):
        raise ExponentError("gap search needs 1 < p < inf, p != 2")
    if degree < 2:
        raise InvalidInputError("gap search needs degree >= 2 (degree 1 has no gap)")
    cfg = config or PNormConfig(restarts=6, max_iters=300, tol=1e-10, seed=seed)
    rng = np.random.default_rng(seed)
    results: list[GapCandidate] = []

    def evaluate(coeffs: np.ndarray):
        coeffs = coeffs / np.sum(np.abs(coeffs))
        P = Polynomial(coeffs)
        sc = poly_norm(P, p, n, cfg)
        bl = poly_vector_norm(P, p, n, m, cfg)
        results.append(
            GapCandidate(
                coeffs=P.array,
                scalar_value=sc.value,
                block_value=bl.value,
                block_witness=bl.witness,
                block_m=m,
                n=n,
            )
        )

    half = budget // 2
    for _ in range(half):
        d = int(rng.integers(2, degree + 1))
        c = rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)
        evaluate(c)
    # perturb the current leaders with shrinking jitter
    for i in range(budget - half):
        results.sort(key=lambda r: (-r.gap, len(r.coeffs)))
        base = results[min(i % 3, len(results) - 1)].coeffs
        jitter = 0.3 / (1 + i / 10)
        c = base + jitter * (
            rng.standard_normal(base.size) + 1j * rng.standard_normal(base.size)
        )
        evaluate(c)
    results.sort(key=lambda r: (-r.gap, len(r.coeffs)))
    return results[:top]
