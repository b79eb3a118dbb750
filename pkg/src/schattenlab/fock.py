"""Finite-dimensional antisymmetric Fock space over R^d.

The 2^d basis states are subsets of modes, indexed by bitmask (the empty set,
index 0, is the vacuum).  Creation operators follow the standard sign
convention so that prepending a mode picks up one sign per occupied mode of
lower index; the canonical anticommutation relations hold exactly in integer
arithmetic and are verified at build time.

Also provides the combinatorial side: pair partitions with crossing numbers,
the crossing-signed Wick sum for vacuum moments of field-operator products,
and the q-deformed inner product of simple tensors (a q-weighted permanent).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._kernels import q_permanent, wick_signed_sum
from .errors import InvalidInputError, ResourceError

__all__ = [
    "FockSpace",
    "FieldOperator",
    "build_fock",
    "omega",
    "vacuum_trace",
    "field_apply",
    "vacuum_moment",
    "PairPartition",
    "crossing_number",
    "enumerate_pair_partitions",
    "double_factorial",
    "wick_trace",
    "wick_vs_matrix_check",
    "q_gram",
    "q_gram_matrix",
]

MAX_MODES = 14
DENSE_DIM_LIMIT = 1 << 10  # omega() returns dense matrices up to this size


@dataclass
class FockSpace:
    """Antisymmetric Fock space with sparse creation matrices."""

    d: int
    creation: list  # d csr matrices of size 2^d
    annihilation: list  # adjoints, precomputed

    @property
    def dim(self) -> int:
        return 1 << self.d

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v


@dataclass
class FieldOperator:
    """omega(v) = sum_i v_i (l_i + l_i*), Hermitian; a symmetry when |v| = 1."""

    vector: np.ndarray
    matrix: object  # ndarray for small spaces, csr_matrix otherwise


def _creation_matrix(d: int, i: int) -> sp.csr_matrix:
    dim = 1 << d
    states = np.arange(dim)
    src = states[(states >> i) & 1 == 0]
    dst = src | (1 << i)
    below = src & ((1 << i) - 1)
    # parity of the occupied modes below i
    signs = np.ones(len(src), dtype=np.int64)
    b = below.copy()
    par = np.zeros(len(src), dtype=np.int64)
    while np.any(b):
        par ^= b & 1
        b >>= 1
    signs[par == 1] = -1
    return sp.csr_matrix(
        (signs.astype(complex), (dst, src)), shape=(dim, dim)
    )


def build_fock(d: int, verify: bool = True) -> FockSpace:
    """Construct the 2^d-dimensional space with creation matrices; checks the
    anticommutation relations (exact in integer arithmetic) unless disabled."""
    if not (1 <= d <= MAX_MODES):
        raise ResourceError(f"mode count d={d} outside 1..{MAX_MODES}")
    creation = [_creation_matrix(d, i) for i in range(d)]
    annihilation = [c.conj().T.tocsr() for c in creation]
    F = FockSpace(d=d, creation=creation, annihilation=annihilation)
    if verify:
        eye = sp.identity(F.dim, dtype=complex, format="csr")
        worst = 0.0
        for i in range(d):
            for j in range(i, d):
                li, lj = creation[i], creation[j]
                r1 = li @ lj + lj @ li
                r2 = annihilation[i] @ lj + lj @ annihilation[i]
                if i == j:
                    r2 = r2 - eye
                worst = max(worst, _sparse_absmax(r1), _sparse_absmax(r2))
        if worst > 1e-12:
            raise AssertionError(f"CAR relations violated: residual {worst}")
    return F


def _sparse_absmax(A) -> float:
    A = A.tocoo()
    return float(np.abs(A.data).max(initial=0.0))


def omega(F: FockSpace, v) -> FieldOperator:
    """Field operator of a real vector."""
    v = np.asarray(v, dtype=float if not np.iscomplexobj(v) else complex)
    if np.iscomplexobj(v):
        if np.any(v.imag != 0):
            raise InvalidInputError("field operators need real vectors")
        v = v.real
    if v.shape != (F.d,):
        raise InvalidInputError(f"vector of length {v.shape} does not fit d={F.d}")
    acc = sp.csr_matrix((F.dim, F.dim), dtype=complex)
    for i, c in enumerate(v):
        if c != 0.0:
            acc = acc + c * (F.creation[i] + F.annihilation[i])
    mat = acc.toarray() if F.dim <= DENSE_DIM_LIMIT else acc
    return FieldOperator(vector=v, matrix=mat)


def vacuum_trace(F: FockSpace, X) -> complex:
    """<Omega, X Omega>: the (0, 0) entry."""
    if sp.issparse(X):
        if X.shape != (F.dim, F.dim):
            raise InvalidInputError("operator does not match the Fock dimension")
        return complex(X.tocsr()[0, 0])
    X = np.asarray(X)
    if X.shape != (F.dim, F.dim):
        raise InvalidInputError("operator does not match the Fock dimension")
    return complex(X[0, 0])


def field_apply(F: FockSpace, v: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """omega(v) psi without materializing the field matrix."""
    out = np.zeros_like(psi)
    for i, c in enumerate(v):
        if c != 0.0:
            out += c * (F.creation[i] @ psi + F.annihilation[i] @ psi)
    return out


def vacuum_moment(F: FockSpace, vectors) -> complex:
    """<Omega, omega(f_1) ... omega(f_m) Omega> via right-to-left application."""
    psi = F.vacuum()
    for v in reversed(list(vectors)):
        psi = field_apply(F, np.asarray(v, dtype=float), psi)
    return complex(psi[0])


# --- pair partitions ---------------------------------------------------------


@dataclass(frozen=True)
class PairPartition:
    """k disjoint ordered pairs (i, j), i < j, covering {0, ..., 2k-1}."""

    pairs: tuple
    crossings: int


def crossing_number(pairs) -> int:
    """Number of crossing pair-pairs: (a, b), (c, d) with a < c < b < d."""
    c = 0
    ps = list(pairs)
    for x in range(len(ps)):
        a, b = ps[x]
        for y in range(x + 1, len(ps)):
            cc, dd = ps[y]
            lo, hi = (a, b)
            if (lo < cc < hi < dd) or (cc < lo < dd < hi):
                c += 1
    return c


def _gen_pairings(free: tuple):
    if not free:
        yield ()
        return
    head = free[0]
    rest = free[1:]
    for idx in range(len(rest)):
        partner = rest[idx]
        remaining = rest[:idx] + rest[idx + 1 :]
        for tail in _gen_pairings(remaining):
            yield ((head, partner),) + tail


def double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def enumerate_pair_partitions(k: int) -> list[PairPartition]:
    """All (2k-1)!! pairings of {0, ..., 2k-1} in lexicographic order, each
    with its crossing number."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    if 2 * k > 16:
        raise ResourceError("pair-partition enumeration capped at 2k <= 16")
    out = [
        PairPartition(pairs=pairs, crossings=crossing_number(pairs))
        for pairs in _gen_pairings(tuple(range(2 * k)))
    ]
    return out


# --- Wick formula --------------------------------------------------------------


def wick_trace(vectors) -> float:
    """Crossing-signed pair-partition sum of vacuum moments:

        sum over pairings V of (-1)^{c(V)} prod_{(i,j) in V} <f_i, f_j>.

    Odd-length inputs return 0 (every pairing term is empty).  Vectors must
    be real and share a common dimension.
    """
    vs = np.atleast_2d(np.asarray(list(vectors), dtype=float))
    if vs.shape[0] % 2:
        return 0.0
    if vs.shape[0] > 20:
        raise ResourceError("wick_trace capped at 20 vectors")
    gram = vs @ vs.T
    return float(wick_signed_sum(gram.astype(complex)).real)


def wick_vs_matrix_check(F: FockSpace, vectors) -> float:
    """|combinatorial Wick sum - matrix vacuum moment| for the same vectors."""
    vs = [np.asarray(v, dtype=float) for v in vectors]
    comb = wick_trace(vs)
    direct = vacuum_moment(F, vs)
    return float(abs(comb - direct))


# --- q-deformed inner products ---------------------------------------------------

MAX_Q_TENSOR_DEGREE = 8


def q_gram(hs, ks, q: float) -> complex:
    """q-inner product of simple tensors h_1 x ... x h_n and k_1 x ... x k_n:

        sum over permutations s of q^{inv(s)} prod_i <h_i, k_{s(i)}>.

    q must lie in [-1, 1); q = 1 is rejected (no quotient structure there).
    """
    if not (-1.0 <= q < 1.0):
        raise InvalidInputError("q must lie in [-1, 1)")
    hs = np.atleast_2d(np.asarray(hs, dtype=complex))
    ks = np.atleast_2d(np.asarray(ks, dtype=complex))
    if hs.shape != ks.shape:
        raise InvalidInputError("tensor factors must have matching shapes")
    n = hs.shape[0]
    if n > MAX_Q_TENSOR_DEGREE:
        raise ResourceError(f"tensor degree capped at {MAX_Q_TENSOR_DEGREE}")
    M = hs.conj() @ ks.T
    return complex(q_permanent(M, q))


def q_gram_matrix(tensors, q: float) -> np.ndarray:
    """Gram matrix of a family of simple tensors of common degree."""
    tensors = [np.atleast_2d(np.asarray(t, dtype=complex)) for t in tensors]
    degrees = {t.shape[0] for t in tensors}
    if len(degrees) != 1:
        raise InvalidInputError("all tensors in the family must share one degree")
    f = len(tensors)
    G = np.zeros((f, f), dtype=complex)
    for a in range(f):
        for b in range(a, f):
            G[a, b] = q_gram(tensors[a], tensors[b], q)
            G[b, a] = np.conj(G[a, b])
    return G


# --- second quantization of mode permutations -----------------------------------


def mode_permutation_unitary(F: FockSpace, perm) -> tuple[np.ndarray, np.ndarray]:
    """Second quantization of a permutation of the modes.

    Returns (targets, signs): the unitary maps basis state ``mask`` to
    ``signs[mask] * e_{targets[mask]}``, the sign being the parity of the
    permutation that re-sorts the image modes (wedge reordering).
    """
    perm = np.asarray(perm, dtype=int)
    if sorted(perm.tolist()) != list(range(F.d)):
        raise InvalidInputError("mode map must be a permutation of 0..d-1")
    dim = F.dim
    targets = np.zeros(dim, dtype=np.int64)
    signs = np.ones(dim, dtype=np.int8)
    for mask in range(dim):
        occ = [i for i in range(F.d) if (mask >> i) & 1]
        imgs = [int(perm[i]) for i in occ]
        inv = 0
        for a in range(len(imgs)):
            for b in range(a + 1, len(imgs)):
                if imgs[a] > imgs[b]:
                    inv += 1
        t = 0
        for i in imgs:
            t |= 1 << i
        targets[mask] = t
        signs[mask] = -1 if inv % 2 else 1
    return targets, signs


def signed_permutation_conjugate(
    Y: np.ndarray, targets: np.ndarray, signs: np.ndarray
) -> np.ndarray:
    """Conjugate Y by the signed basis permutation U: returns U Y U^*."""
    out = np.empty_like(Y)
    sc = signs.astype(Y.dtype)
    out[np.ix_(targets, targets)] = (sc[:, None] * sc[None, :]) * Y
    return out
