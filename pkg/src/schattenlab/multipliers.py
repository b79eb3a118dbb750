"""Schur multipliers on matrix algebras and Fourier multipliers on finite
group algebras: entrywise application, positivity/unitality certificates,
Gram factorizations, the two-by-two contractive embedding, and the transfer
from group symbols to Schur matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AxiomError,
    CertificationError,
    InvalidInputError,
    PreconditionError,
)
from .matrices import is_psd

__all__ = [
    "SchurMultiplier",
    "Certification",
    "GramFactorization",
    "schur_apply",
    "certify",
    "gram_factorize",
    "embed_two_by_two",
    "FiniteGroup",
    "make_group",
    "regular_rep",
    "group_trace",
    "fourier_apply",
    "herz_schur_transfer",
    "FourierSymbol",
    "certify_symbol",
]

UNITAL_TOL = 1e-12


@dataclass
class GramFactorization:
    """Vectors e_1..e_n in R^r with <e_i, e_j> = a_ij up to the residual;
    r is the numerical rank (the quotient by the kernel of the form)."""

    vectors: np.ndarray  # (n, r)
    residual: float

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]


@dataclass
class Certification:
    unital: bool
    cp: bool
    selfadjoint: bool
    contractive_witness: GramFactorization | None


@dataclass
class SchurMultiplier:
    """Entrywise multiplier B -> [a_ij b_ij] with cached certificates."""

    A: np.ndarray
    certification: Certification

    @classmethod
    def from_matrix(cls, A) -> "SchurMultiplier":
        A = np.asarray(A)
        return cls(A=A, certification=certify(A))

    def apply(self, B) -> np.ndarray:
        return schur_apply(self.A, B)


def schur_apply(A, B) -> np.ndarray:
    """Entrywise product [a_ij b_ij]."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise InvalidInputError(f"shape mismatch {A.shape} vs {B.shape}")
    return A * B


def certify(A) -> Certification:
    """Unitality (unit diagonal), complete positivity (PSD), selfadjointness
    (real entries); for unital CP input, the Gram factorization doubles as a
    complete-contractivity witness."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError("Schur symbol must be a square matrix")
    unital = bool(np.abs(np.diagonal(A) - 1.0).max(initial=0.0) <= UNITAL_TOL)
    cp = is_psd(A)
    selfadjoint = not np.iscomplexobj(A) or bool(np.all(A.imag == 0))
    witness = None
    if cp and unital:
        witness = gram_factorize(A)
    return Certification(
        unital=unital, cp=cp, selfadjoint=selfadjoint, contractive_witness=witness
    )


def gram_factorize(A, tol: float = 1e-10) -> GramFactorization:
    """Factor a real PSD matrix as A = E E^T via the symmetric eigensystem,
    dropping eigenvalues below tol * lambda_max (the quotient by the kernel).
    Eigendecomposition rather than Cholesky: inputs may be rank deficient."""
    A = np.asarray(A, dtype=float)
    if not is_psd(A, tol=max(tol, 1e-9) * max(float(np.linalg.norm(A)), 1.0)):
        raise CertificationError("gram_factorize needs a PSD symmetric real matrix")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    lam_max = float(w.max(initial=0.0))
    keep = w > tol * max(lam_max, 1.0e-300)
    E = V[:, keep] * np.sqrt(w[keep])
    if E.shape[1] == 0:
        E = np.zeros((A.shape[0], 1))
    residual = float(np.abs(E @ E.T - A).max())
    return GramFactorization(vectors=E, residual=residual)


def embed_two_by_two(h, k) -> SchurMultiplier:
    """Two-by-two embedding of a contractive factorization a_ij = <h_i, k_j>:
    the Gram matrix of the stacked family (h_1..h_n, k_1..k_n) is unital CP,
    and its upper-right block is the contractive multiplier."""
    h = np.atleast_2d(np.asarray(h, dtype=float))
    k = np.atleast_2d(np.asarray(k, dtype=float))
    if h.shape != k.shape:
        raise InvalidInputError("h and k families must have matching shapes")
    norms = np.concatenate([np.linalg.norm(h, axis=1), np.linalg.norm(k, axis=1)])
    if np.abs(norms - 1.0).max() > 1e-10:
        raise PreconditionError("all vectors must have unit norm (within 1e-10)")
    L = np.vstack([h, k])
    F = L @ L.T
    mult = SchurMultiplier.from_matrix(F)
    if not (mult.certification.cp and mult.certification.unital):
        raise CertificationError("embedding failed to certify unital CP")
    return mult


# --- finite groups ------------------------------------------------------------


@dataclass
class FiniteGroup:
    """Finite group as a Cayley table over indices 0..N-1; 0 is the identity."""

    order: int
    table: np.ndarray  # table[a, b] = index of a*b
    inverse: np.ndarray

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])


def _validate_table(table: np.ndarray) -> FiniteGroup:
    N = table.shape[0]
    if table.shape != (N, N):
        raise AxiomError("Cayley table must be square")
    if table.min() < 0 or table.max() >= N:
        raise AxiomError("Cayley table entries out of range")
    rng_row = np.arange(N)
    if not (np.array_equal(table[0], rng_row) and np.array_equal(table[:, 0], rng_row)):
        raise AxiomError("element 0 must be the identity")
    # associativity on the full table
    left = table[table, :]  # (a,b,c) -> (a*b)*c
    right = table[:, table]  # (a,b,c) -> a*(b*c)
    if not np.array_equal(left, right):
        raise AxiomError("Cayley table is not associative")
    inverse = np.full(N, -1, dtype=int)
    for a in range(N):
        hits = np.where(table[a] == 0)[0]
        if hits.size != 1 or table[hits[0], a] != 0:
            raise AxiomError(f"element {a} lacks a two-sided inverse")
        inverse[a] = hits[0]
    return FiniteGroup(order=N, table=table.astype(int), inverse=inverse)


def make_group(kind: str, n: int | None = None, table=None) -> FiniteGroup:
    """Build a group: 'cyclic' of order n, 'dihedral' of order 2n, or an
    explicit Cayley 'table' (validated against the group axioms)."""
    if kind == "cyclic":
        if n is None or n < 1:
            raise InvalidInputError("cyclic group needs n >= 1")
        idx = np.arange(n)
        tab = (idx[:, None] + idx[None, :]) % n
        return _validate_table(tab)
    if kind == "dihedral":
        if n is None or n < 1:
            raise InvalidInputError("dihedral group needs n >= 1")
        # element (i, j) = r^i s^j with index i + n*j
        tab = np.zeros((2 * n, 2 * n), dtype=int)
        for i1 in range(n):
            for j1 in range(2):
                for i2 in range(n):
                    for j2 in range(2):
                        i = (i1 + (i2 if j1 == 0 else -i2)) % n
                        j = j1 ^ j2
                        tab[i1 + n * j1, i2 + n * j2] = i + n * j
        return _validate_table(tab)
    if kind == "table":
        if table is None:
            raise InvalidInputError("explicit group needs a table")
        return _validate_table(np.asarray(table, dtype=int))
    raise InvalidInputError(f"unknown group kind {kind!r}")


def group_from_json(obj: dict) -> FiniteGroup:
    kind = obj.get("kind")
    if kind == "table":
        return make_group("table", table=obj["table"])
    return make_group(kind, n=int(obj["n"]))


def regular_rep(G: FiniteGroup, g: int) -> np.ndarray:
    """Left-translation permutation matrix: lambda(g) eps_h = eps_{gh}."""
    lam = np.zeros((G.order, G.order), dtype=complex)
    for h in range(G.order):
        lam[G.mul(g, h), h] = 1.0
    return lam


def group_trace(G: FiniteGroup, X) -> complex:
    """Canonical trace <eps_e, X eps_e>: picks the identity coefficient."""
    X = np.asarray(X)
    return complex(X[0, 0])


def fourier_apply(G: FiniteGroup, t, x) -> np.ndarray:
    """Coefficient-wise multiplication in the translation basis."""
    t = np.asarray(t)
    x = np.asarray(x)
    if t.shape != (G.order,) or x.shape != (G.order,):
        raise InvalidInputError("symbol and coefficients must have length |G|")
    return t * x


def herz_schur_transfer(G: FiniteGroup, t) -> SchurMultiplier:
    """Schur matrix a_{g,h} = t_{g h^{-1}} indexed by group elements."""
    t = np.asarray(t, dtype=float)
    if t.shape != (G.order,):
        raise InvalidInputError("symbol must have length |G|")
    A = t[G.table[:, G.inverse]]
    return SchurMultiplier.from_matrix(A)


@dataclass
class FourierSymbol:
    """A real function on a finite group with positivity metadata."""

    group: FiniteGroup
    t: np.ndarray
    unital: bool
    positive_definite: bool


def certify_symbol(G: FiniteGroup, t) -> FourierSymbol:
    """Unitality is t_e = 1; positive definiteness is PSD of [t_{g^{-1} h}]."""
    t = np.asarray(t, dtype=float)
    if t.shape != (G.order,):
        raise InvalidInputError("symbol must have length |G|")
    M = t[G.table[G.inverse, :]]
    return FourierSymbol(
        group=G,
        t=t,
        unital=bool(abs(t[0] - 1.0) <= UNITAL_TOL),
        positive_definite=is_psd(M),
    )


def symbol_gram_matrix(G: FiniteGroup, t) -> np.ndarray:
    """[t_{g^{-1} h}]_{g,h}: the Gram matrix of the symbol's inner-product
    space on the group elements."""
    t = np.asarray(t, dtype=float)
    return t[G.table[G.inverse, :]]
