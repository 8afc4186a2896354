"""Concrete categories: finite relations, matrices over R or C, and their CPM doubling."""
from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from . import numeric as nm
from .numeric import DEFAULT_TOL, ScalarKind, Tolerance
from .theory import I, Layer, Morphism, SystemObject, TheoryInstance


def gaussian(shape, rng: np.random.Generator, scalar: ScalarKind) -> np.ndarray:
    if scalar is ScalarKind.COMPLEX:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return rng.standard_normal(shape)


def random_isometry(rows: int, cols: int, rng: np.random.Generator, scalar: ScalarKind) -> np.ndarray:
    if rows < cols:
        raise ValueError("an isometry needs rows >= cols")
    return nm.orthonormalize(gaussian((rows, cols), rng, scalar))


def random_unitary(d: int, rng: np.random.Generator, scalar: ScalarKind) -> np.ndarray:
    return random_isometry(d, d, rng, scalar)


def random_permutation_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    perm = rng.permutation(d)
    p = np.zeros((d, d))
    p[perm, np.arange(d)] = 1
    return p


class RelInstance(TheoryInstance):
    """Sets and relations.  A relation ``R: A -> B`` is a boolean matrix with
    ``R[b, a]`` true iff ``a`` is related to ``b``."""

    tag = "rel"
    scalar = ScalarKind.BOOLEAN
    layer = Layer.SINGLE
    has_discarding = True
    max_enumerated_entries = 9

    def embed(self, data, dom, cod):
        return Morphism(dom, cod, np.asarray(data) != 0, self.scalar, self.layer)

    def discard(self, a):
        return self.morphism(np.ones((1, a.dim), dtype=bool), a, I)

    def mixed(self, a):
        return self.morphism(np.ones((a.dim, 1), dtype=bool), I, a)

    def sample_morphism(self, dom, cod, rng):
        return self.morphism(rng.random((cod.dim, dom.dim)) < 0.5, dom, cod)

    def sample_pure_morphism(self, dom, cod, rng):
        data = np.zeros((cod.dim, dom.dim), dtype=bool)
        if rng.random() < 0.9:
            data[rng.integers(cod.dim), rng.integers(dom.dim)] = True
        return self.morphism(data, dom, cod)

    def sample_invertible(self, a, rng):
        return self.embed(random_permutation_matrix(a.dim, rng), a, a)

    def enumerate_morphisms(self, dom, cod) -> Iterator[Morphism] | None:
        n = dom.dim * cod.dim
        if n > self.max_enumerated_entries:
            return None
        shape = (cod.dim, dom.dim)
        return (
            self.morphism(np.array(bits, dtype=bool).reshape(shape), dom, cod)
            for bits in itertools.product((False, True), repeat=n)
        )


class MatInstance(TheoryInstance):
    """Matrices over the reals or complex numbers; the pure layer under CPM."""

    has_discarding = False

    def __init__(self, scalar: ScalarKind = ScalarKind.COMPLEX, tol: Tolerance = DEFAULT_TOL):
        super().__init__(tol)
        if scalar is ScalarKind.BOOLEAN:
            raise ValueError("Mat needs a field; use RelInstance for booleans")
        self.scalar = scalar
        self.layer = Layer.SINGLE
        self.tag = "matc" if scalar is ScalarKind.COMPLEX else "matr"

    def embed(self, data, dom, cod):
        return self.morphism(data, dom, cod)

    def sample_morphism(self, dom, cod, rng):
        return self.morphism(gaussian((cod.dim, dom.dim), rng, self.scalar), dom, cod)

    sample_pure_morphism = sample_morphism

    def sample_invertible(self, a, rng):
        return self.embed(random_permutation_matrix(a.dim, rng), a, a)


def cpm_lift(f: Morphism) -> Morphism:
    """Doubling ``F -> (X |-> F X F^dagger)``; the superoperator is ``kron(F, conj F)``."""
    if f.layer is not Layer.SINGLE:
        raise ValueError("cpm_lift expects a single-layer morphism")
    data = nm.kron(f.data, f.scalar.conj(f.data))
    return Morphism(f.dom, f.cod, data, f.scalar, Layer.DOUBLED)


def lift_matrix(data, dom: SystemObject, cod: SystemObject, scalar: ScalarKind) -> Morphism:
    return cpm_lift(Morphism(dom, cod, data, scalar))


def doubled_tensor_reorder(n_factors_left: int, n_factors_right: int, dims) -> np.ndarray:
    """Permutation taking ``(L, L-bar, R, R-bar)`` coordinates to ``(L, R, L-bar, R-bar)``.

    ``dims`` lists the factor dimensions of the left object followed by those
    of the right one.
    """
    dims = list(dims)
    if len(dims) != n_factors_left + n_factors_right:
        raise ValueError("dims must list every factor of both sides")
    dl = int(np.prod(dims[:n_factors_left], dtype=np.int64))
    dr = int(np.prod(dims[n_factors_left:], dtype=np.int64))
    return nm.wire_permutation([0, 2, 1, 3], [dl, dl, dr, dr])


def choi(m: Morphism) -> np.ndarray:
    """Choi matrix with ``C[(i,k),(j,l)] = S[(i,j),(k,l)]`` (outputs ``i,j``; inputs ``k,l``)."""
    if m.layer is not Layer.DOUBLED:
        raise ValueError("choi expects a doubled morphism")
    do, di = m.cod.dim, m.dom.dim
    return m.data.reshape(do, do, di, di).transpose(0, 2, 1, 3).reshape(do * di, do * di)


def superop_from_choi(c: np.ndarray, dom: SystemObject, cod: SystemObject, scalar: ScalarKind) -> Morphism:
    do, di = cod.dim, dom.dim
    s = np.asarray(c).reshape(do, di, do, di).transpose(0, 2, 1, 3).reshape(do * do, di * di)
    return Morphism(dom, cod, s, scalar, Layer.DOUBLED)


def choi_rank(m: Morphism, tol: Tolerance = DEFAULT_TOL) -> int:
    return nm.numerical_rank(choi(m), tol)


def kraus_operators(m: Morphism, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Canonical (orthogonal) Kraus operators read off the Choi eigendecomposition."""
    vals, vecs = nm.eig_psd(choi(m), tol)
    do, di = m.cod.dim, m.dom.dim
    return [np.sqrt(v) * vecs[:, i].reshape(do, di) for i, v in enumerate(vals) if v > 0]


def density_matrix(state: Morphism) -> np.ndarray:
    if state.layer is not Layer.DOUBLED or not state.is_state:
        raise ValueError("expected a doubled state")
    d = state.cod.dim
    return state.data.reshape(d, d)


def underlying_vector(state: Morphism, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """A vector ``w`` with ``state = lift(w)``, for a state of Choi rank at most one.

    Taken from the column of the largest diagonal entry, so the phase is
    fixed by making that entry positive real.
    """
    rho = density_matrix(state)
    diag = np.real(np.diagonal(rho))
    j = int(np.argmax(diag))
    if diag[j] <= tol.absolute:
        return np.zeros(rho.shape[0], dtype=rho.dtype)
    return rho[:, j] / np.sqrt(diag[j])


class CpmInstance(TheoryInstance):
    """Completely positive maps between matrix algebras, as superoperators.

    A morphism ``A -> B`` is a ``(dim B**2, dim A**2)`` matrix acting on
    row-major vectorised operators.  Discarding is the trace row and the
    completely mixed state is the vectorised identity.
    """

    has_discarding = True
    layer = Layer.DOUBLED

    def __init__(self, scalar: ScalarKind = ScalarKind.COMPLEX, tol: Tolerance = DEFAULT_TOL):
        super().__init__(tol)
        self.base = MatInstance(scalar, tol)
        self.scalar = scalar
        self.tag = "cpm-c" if scalar is ScalarKind.COMPLEX else "cpm-r"

    def embed(self, data, dom, cod):
        return lift_matrix(data, dom, cod, self.scalar)

    def lift(self, f: Morphism) -> Morphism:
        return cpm_lift(f)

    def discard(self, a):
        return self.morphism(np.eye(a.dim, dtype=self.scalar.dtype).reshape(1, -1), a, I)

    def mixed(self, a):
        return self.morphism(np.eye(a.dim, dtype=self.scalar.dtype).reshape(-1, 1), I, a)

    def state_from_density(self, rho, a: SystemObject) -> Morphism:
        return self.morphism(np.asarray(rho).reshape(-1, 1), I, a)

    def from_kraus(self, kraus, dom: SystemObject, cod: SystemObject) -> Morphism:
        data = sum(nm.kron(k, self.scalar.conj(k)) for k in kraus)
        return self.morphism(data, dom, cod)

    def sample_morphism(self, dom, cod, rng):
        # channel from a Stinespring isometry A -> B @ E
        da, db = dom.dim, cod.dim
        lo = -(-da // db)
        k = int(rng.integers(lo, max(lo, da * db) + 1))
        v = random_isometry(db * k, da, rng, self.scalar)
        kraus = [v.reshape(db, k, da)[:, j, :] for j in range(k)]
        return self.from_kraus(kraus, dom, cod)

    def sample_cp(self, dom, cod, rng, rank: int | None = None) -> Morphism:
        """A CP map with Gaussian Kraus operators (not trace preserving)."""
        k = int(rng.integers(1, dom.dim * cod.dim + 1)) if rank is None else rank
        kraus = [gaussian((cod.dim, dom.dim), rng, self.scalar) for _ in range(k)]
        return self.from_kraus(kraus, dom, cod)

    def sample_pure_morphism(self, dom, cod, rng):
        return self.embed(gaussian((cod.dim, dom.dim), rng, self.scalar), dom, cod)

    def sample_pure_causal_state(self, a, rng) -> Morphism:
        w = gaussian((a.dim, 1), rng, self.scalar)
        return self.embed(w / np.linalg.norm(w), I, a)

    def sample_invertible(self, a, rng):
        return self.embed(random_permutation_matrix(a.dim, rng), a, a)

    def sample_unitary(self, a, rng) -> tuple[np.ndarray, Morphism]:
        u = random_unitary(a.dim, rng, self.scalar)
        return u, self.embed(u, a, a)


def oracle_adjoint(inst: TheoryInstance, f: Morphism) -> Morphism:
    """Ground-truth dagger: relational converse, Hermitian adjoint, or the
    Hilbert-Schmidt adjoint of a superoperator (which equals lifting ``F^dagger``)."""
    data = f.scalar.conj(f.data).T
    return Morphism(f.cod, f.dom, data, f.scalar, f.layer)


INSTANCE_TAGS = ("rel", "matc", "matr", "cpm-c", "cpm-r")


def make_instance(tag: str, tol: Tolerance = DEFAULT_TOL) -> TheoryInstance:
    if tag == "rel":
        return RelInstance(tol)
    if tag == "matc":
        return MatInstance(ScalarKind.COMPLEX, tol)
    if tag == "matr":
        return MatInstance(ScalarKind.REAL, tol)
    if tag == "cpm-c":
        return CpmInstance(ScalarKind.COMPLEX, tol)
    if tag == "cpm-r":
        return CpmInstance(ScalarKind.REAL, tol)
    raise ValueError(f"unknown instance {tag!r}; expected one of {', '.join(INSTANCE_TAGS)}")
