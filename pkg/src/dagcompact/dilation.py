"""Dilations, purification, and extending a state dagger from pure states to all states.

A dilation of a state ``rho`` of ``A`` is a state of ``A @ E`` whose marginal
on ``A`` is ``rho``.  If every state has a dilation inside a subcategory that
already carries a state dagger, the dagger of ``rho`` is defined as the
dagger of the dilation with the ancilla fed the completely mixed state.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numeric as nm
from .instances import CpmInstance, choi_rank, cpm_lift, underlying_vector
from .numeric import ScalarKind
from .report import Check, VerificationReport
from .state_dagger import StateDagger
from .theory import (
    I,
    Layer,
    Morphism,
    Sampler,
    SystemObject,
    TheoryInstance,
    apply_local,
    apply_local_dom,
    discard_factors,
    distance,
)


@dataclass(frozen=True)
class DilationStructure:
    """A subcategory ``D`` (as a membership test) and a way to dilate any state into it."""

    ambient: TheoryInstance
    pure_member: Callable[[Morphism], bool]
    dilate: Callable[[Morphism], tuple[Morphism, SystemObject]]


def _split(sigma: Morphism, a: SystemObject) -> SystemObject:
    n = len(a)
    if sigma.cod[:n] != a:
        raise nm.ShapeError(f"{sigma.cod} does not start with {a}")
    return sigma.cod[n:]


def marginal(sigma: Morphism, a: SystemObject, inst: TheoryInstance) -> Morphism:
    """Discard everything of ``sigma`` after the leading factors ``a``."""
    e = _split(sigma, a)
    return discard_factors(sigma, list(range(len(a), len(a) + len(e))), inst)


def is_dilation(sigma: Morphism, rho: Morphism, inst: TheoryInstance) -> bool:
    if not (sigma.is_state and rho.is_state):
        raise nm.ShapeError("is_dilation compares states")
    return inst.eq(marginal(sigma, rho.cod, inst), rho)


def purify(rho: Morphism, inst: CpmInstance, ancilla_dim: int | None = None) -> tuple[Morphism, SystemObject]:
    """Minimal purification ``w = sum_i sqrt(l_i) v_i (x) e_i`` from the eigendecomposition.

    The ancilla has dimension equal to the numerical rank, or ``ancilla_dim``
    when given (padding with zero columns).  The zero state purifies to the
    zero state with the unit as ancilla.
    """
    a = rho.cod
    d = a.dim
    vals, vecs = nm.eig_psd(rho.data.reshape(d, d), inst.tol)
    r = int(np.count_nonzero(vals))
    if r == 0 and ancilla_dim is None:
        return inst.zero(I, a), I
    k = r if ancilla_dim is None else ancilla_dim
    if k < r:
        raise ValueError(f"ancilla dimension {k} is below the rank {r}")
    w = np.zeros((d, k), dtype=inst.scalar.dtype)
    w[:, :r] = vecs[:, :r] * np.sqrt(vals[:r])[None, :]
    e = SystemObject.of(k)
    return inst.embed(w.reshape(-1, 1), I, a @ e), e


def _vector(psi: Morphism, inst: TheoryInstance) -> np.ndarray:
    if psi.layer is Layer.SINGLE:
        return psi.data.ravel()
    if choi_rank(psi, inst.tol) > 1:
        raise ValueError("connecting_iso needs pure states")
    return underlying_vector(psi, inst.tol)


def _complement(x: np.ndarray) -> np.ndarray:
    n, r = x.shape
    if r == n:
        return np.zeros((n, 0), dtype=x.dtype)
    if r == 0:
        return np.eye(n, dtype=x.dtype)
    q, _ = np.linalg.qr(x, mode="complete")
    return q[:, r:]


def connecting_iso(psi: Morphism, phi: Morphism, a: SystemObject, inst: TheoryInstance) -> np.ndarray:
    """Unitary ``U`` on the ancilla with ``(id_A (x) U) psi = phi``.

    ``psi`` and ``phi`` are purifications of the same state of ``a``, given as
    single-layer vectors (the phase is then matched exactly) or as doubled
    pure states.  ``U`` sends the ancilla vectors paired with each eigenvector
    of the common marginal to each other and is completed on the
    complement by the unitary closest to the identity.
    """
    e, e2 = _split(psi, a), _split(phi, a)
    if e.dim != e2.dim:
        raise ValueError(f"ancilla dimensions differ: {e.dim} vs {e2.dim}")
    da, de = a.dim, e.dim
    p = _vector(psi, inst).reshape(da, de)
    q = _vector(phi, inst).reshape(da, de)
    rho_p, rho_q = p @ np.conj(p.T), q @ np.conj(q.T)
    if not nm.approx_eq(rho_p, rho_q, inst.tol):
        raise ValueError("the two states have different marginals")
    vals, vecs = nm.eig_psd((rho_p + rho_q) / 2, inst.tol)
    r = int(np.count_nonzero(vals))
    s = np.sqrt(vals[:r])
    x = (p.T @ np.conj(vecs[:, :r])) / s[None, :]
    y = (q.T @ np.conj(vecs[:, :r])) / s[None, :]
    xc, yc = _complement(x), _complement(y)
    u = y @ np.conj(x.T)
    if xc.shape[1]:
        u = u + yc @ _polar(np.conj(yc.T) @ xc) @ np.conj(xc.T)
    # x and y are orthonormal only up to rounding
    u = _polar(u)
    if inst.scalar is not ScalarKind.COMPLEX:
        u = u.real
    res = nm.residual(p @ u.T, q)
    if res > inst.tol.absolute + inst.tol.relative * max(1.0, nm.frobenius(q)):
        raise ArithmeticError(f"connecting unitary leaves residual {res:.3e}")
    return u


def _polar(m: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(m)
    return w @ vh


def transport(psi: Morphism, u: np.ndarray, a: SystemObject, inst: TheoryInstance) -> Morphism:
    """``(id_A (x) U) psi`` with ``U`` applied on the ancilla (lifted on the doubled layer)."""
    e = _split(psi, a)
    g = Morphism(e, e, u, psi.scalar)
    if psi.layer is Layer.DOUBLED:
        g = cpm_lift(g)
    return apply_local(g, psi, len(a))


def extend_state_dagger(sd_d: StateDagger, ds: DilationStructure) -> StateDagger:
    """State dagger on every state: ``sd_D(psi) . (id_A (x) mixed_E)`` for a dilation ``psi``."""
    inst = ds.ambient

    def fn(rho: Morphism) -> Morphism:
        psi, e = ds.dilate(rho)
        if not ds.pure_member(psi):
            raise ValueError(f"dilation of {rho!r} is not in the subcategory")
        eff = sd_d(psi)
        if e.is_unit:
            return eff
        return apply_local_dom(eff, inst.mixed(e), len(rho.cod))

    return StateDagger(fn, f"extended({sd_d.label})")


def cpm_purification(inst: CpmInstance) -> DilationStructure:
    return DilationStructure(inst, lambda f: choi_rank(f, inst.tol) <= 1, lambda rho: purify(rho, inst))


def rel_diagonal_dilation(rho: Morphism, inst: TheoryInstance) -> tuple[Morphism, SystemObject]:
    """Dilate a subset ``S`` of ``A`` to ``{(a, a) : a in S}`` on ``A @ A``."""
    a = rho.cod
    data = np.zeros((a.dim, a.dim), dtype=bool)
    idx = np.flatnonzero(rho.data.ravel())
    data[idx, idx] = True
    e = SystemObject.of(a.dim)
    return inst.morphism(data.reshape(-1, 1), I, a @ e), e


def rel_dilations(inst: TheoryInstance) -> DilationStructure:
    # every relation is in D here, so the diagonal dilation always qualifies
    return DilationStructure(inst, lambda f: True, lambda rho: rel_diagonal_dilation(rho, inst))


def check_dag_resp_state(sd_d: StateDagger, ds: DilationStructure, sampler: Sampler) -> VerificationReport:
    """Dilations with equal marginals must have equal extended effects.

    CPM: pure states of ``A @ E`` against their images under a random ancilla
    unitary.  Rel: every pair of states of ``A @ E`` with the same marginal,
    for carriers with at most nine joint points.
    """
    inst = ds.ambient
    rep = VerificationReport("dag-resp-state", inst.tag, sampler.seed, inst.tol)
    ch = Check("equal_marginals", "dilations with equal marginals give equal effects")

    def extended(psi: Morphism, a: SystemObject) -> Morphism:
        e = _split(psi, a)
        eff = sd_d(psi)
        return eff if e.is_unit else apply_local_dom(eff, inst.mixed(e), len(a))

    if inst.scalar is ScalarKind.BOOLEAN:
        for da, de in itertools.product(sampler.dims, repeat=2):
            a, e = SystemObject.of(da), SystemObject.of(de)
            states = inst.enumerate_morphisms(I, a @ e)
            if states is None:
                continue
            groups: dict[bytes, list[Morphism]] = {}
            for psi in states:
                if not ds.pure_member(psi):
                    continue
                groups.setdefault(marginal(psi, a, inst).data.tobytes(), []).append(psi)
            for members in groups.values():
                ref = extended(members[0], a)
                for psi in members[1:]:
                    got = extended(psi, a)
                    ch.record(inst.eq(got, ref), distance(got, ref), psi=members[0], phi=psi)
    else:
        rng = sampler.rng
        for _ in range(sampler.cases):
            a, e = sampler.obj(), sampler.obj()
            psi = inst.sample_pure_morphism(I, a @ e, rng)
            u, _ = inst.sample_unitary(e, rng)
            phi = transport(psi, u, a, inst)
            lhs, rhs = extended(psi, a), extended(phi, a)
            ch.record(inst.eq(lhs, rhs), distance(lhs, rhs), psi=psi, phi=phi)
    rep.add(ch)
    return rep
