"""Kernels and cokernels in Rel and CPM, split kernels, pure exclusion, and the
sharp effect recovered from kernels.

A kernel of ``f: A -> B`` is ``k: K -> A`` with ``f . g = 0`` exactly when
``g = k . h`` for a unique ``h``.  In Rel it includes the points with empty
image; in CPM it is the doubled isometric inclusion of the null space of
``f*(1)``.  An empty kernel is carried by a one-point object with the zero map.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import numeric as nm
from .axioms import (
    extended_sharp,
    graph_size,
    is_pure,
    is_trivial,
    pre_dual_marginals,
    pure_state_spanning_set,
    sample_pure_causal,
    sharp_effect,
)
from .instances import CpmInstance, oracle_adjoint
from .numeric import ScalarKind
from .report import Check, VerificationReport
from .theory import (
    I,
    Morphism,
    Sampler,
    SystemObject,
    TheoryInstance,
    apply_local,
    compose,
    distance,
    tensor,
)


@dataclass(frozen=True)
class KernelPresentation:
    """``inclusion: K -> A`` and its split partner ``A -> K``.

    For a kernel the universal map is ``inclusion``; for a cokernel it is
    ``partner``.  ``empty`` marks the zero map on a one-point carrier;
    ``basis`` holds the orthonormal columns behind a CPM inclusion.
    """

    inclusion: Morphism
    partner: Morphism
    empty: bool = False
    cokernel: bool = False
    basis: np.ndarray | None = None

    @property
    def morphism(self) -> Morphism:
        return self.partner if self.cokernel else self.inclusion

    @property
    def carrier(self) -> SystemObject:
        return self.inclusion.dom


def _is_rel(inst: TheoryInstance) -> bool:
    return inst.scalar is ScalarKind.BOOLEAN


def _check_supported(inst: TheoryInstance) -> None:
    if not (_is_rel(inst) or isinstance(inst, CpmInstance)):
        raise TypeError(f"kernels are only computed in Rel and CPM, not {inst.tag}")


def _rel_subset(a: SystemObject, points: np.ndarray, inst: TheoryInstance, cokernel: bool) -> KernelPresentation:
    n = len(points)
    k = SystemObject.of(max(n, 1))
    data = np.zeros((a.dim, k.dim), dtype=bool)
    data[points, np.arange(n)] = True
    inc = inst.morphism(data, k, a)
    return KernelPresentation(inc, inst.morphism(data.T, a, k), n == 0, cokernel)


def _cpm_subspace(a: SystemObject, q: np.ndarray, inst: CpmInstance, cokernel: bool) -> KernelPresentation:
    n = q.shape[1]
    k = SystemObject.of(max(n, 1))
    if n == 0:
        inc = inst.zero(k, a)
        return KernelPresentation(inc, inst.zero(a, k), True, cokernel)
    return KernelPresentation(inst.embed(q, k, a), inst.embed(np.conj(q.T), a, k), False, cokernel, q)


def _null_space(h: np.ndarray, inst: TheoryInstance) -> np.ndarray:
    vals, vecs = nm.eig_psd(h, inst.tol)
    return vecs[:, vals == 0]


def heisenberg_unit(f: Morphism) -> np.ndarray:
    """``f*(1)``: the operator ``M`` with ``Tr f(X) = Tr(M X)``."""
    d = f.dom.dim
    row = np.eye(f.cod.dim, dtype=f.data.dtype).reshape(1, -1) @ f.data
    return row.reshape(d, d).T


def schrodinger_unit(f: Morphism) -> np.ndarray:
    """``f(1)`` as a matrix."""
    d = f.cod.dim
    return (f.data @ np.eye(f.dom.dim, dtype=f.data.dtype).reshape(-1, 1)).reshape(d, d)


def kernel(f: Morphism, inst: TheoryInstance) -> KernelPresentation:
    _check_supported(inst)
    if _is_rel(inst):
        return _rel_subset(f.dom, np.flatnonzero(~f.data.any(axis=0)), inst, False)
    return _cpm_subspace(f.dom, _null_space(heisenberg_unit(f), inst), inst, False)


def cokernel(f: Morphism, inst: TheoryInstance) -> KernelPresentation:
    """The projection onto what ``f`` misses; the inclusion is its split partner."""
    _check_supported(inst)
    if _is_rel(inst):
        return _rel_subset(f.cod, np.flatnonzero(~f.data.any(axis=1)), inst, True)
    return _cpm_subspace(f.cod, _null_space(schrodinger_unit(f), inst), inst, True)


def same_subobject(k1: KernelPresentation, k2: KernelPresentation, inst: TheoryInstance) -> bool:
    """Whether two split inclusions agree up to a causal isomorphism of carriers."""
    if k1.empty or k2.empty:
        return k1.empty and k2.empty
    if k1.carrier.dim != k2.carrier.dim:
        return False
    u = compose(k2.partner, k1.inclusion)
    v = compose(k1.partner, k2.inclusion)
    return (
        inst.eq(compose(k2.inclusion, u), k1.inclusion)
        and inst.eq(compose(v, u), inst.id(k1.carrier))
        and inst.eq(compose(inst.discard(k2.carrier), u), inst.discard(k1.carrier))
    )


# universal property --------------------------------------------------------------


def _all_relations(rows: int, cols: int) -> np.ndarray:
    n = rows * cols
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n)[::-1][None, :]) & 1
    return bits.astype(bool).reshape(-1, rows, cols)


def _codes(mats: np.ndarray) -> np.ndarray:
    flat = mats.reshape(len(mats), -1).astype(np.int64)
    return flat @ (1 << np.arange(flat.shape[1])[::-1])


def _rel_universal(f: Morphism, kp: KernelPresentation, xdims, check: Check) -> None:
    fa, ka = f.data.astype(np.int64), kp.inclusion.data.astype(np.int64)
    for dx in xdims:
        g = _all_relations(f.dom.dim, dx)
        killed = ~np.einsum("ba,nax->nbx", fa, g.astype(np.int64)).astype(bool).any(axis=(1, 2))
        if kp.empty:
            factors = ~g.any(axis=(1, 2))
            ok = killed == factors
            bad = np.flatnonzero(~ok)
            check.record(not bad.size, float(bad.size), note=f"empty kernel, source {dx}")
            continue
        h = _all_relations(kp.carrier.dim, dx)
        kh = np.einsum("ak,nkx->nax", ka, h.astype(np.int64)) > 0
        counts = np.bincount(_codes(kh), minlength=2 ** (f.dom.dim * dx))
        c = counts[_codes(g)]
        ok = np.where(killed, c == 1, c == 0)
        bad = np.flatnonzero(~ok)
        check.record(not bad.size, float(bad.size), note=f"source {dx}: {bad.size} relations break the factorisation")


def check_kernel_universal(
    f: Morphism,
    kp: KernelPresentation,
    inst: TheoryInstance,
    sampler: Sampler | None = None,
    xdims=(1, 2, 3),
) -> VerificationReport:
    """Rel: every ``g`` into ``dom f`` from carriers in ``xdims``.  CPM: maps into the
    kernel factor through it, arbitrary maps only when annihilated."""
    rep = VerificationReport("kernel-universal", inst.tag, 0 if sampler is None else sampler.seed, inst.tol)
    ann = Check("annihilates", "f after its kernel is zero")
    fac = Check("factorisation", "annihilated maps factor uniquely through the kernel")
    z = compose(f, kp.inclusion)
    ann.record(inst.is_zero(z), distance(z, inst.zero(z.dom, z.cod)), f=f, k=kp.inclusion)
    if _is_rel(inst):
        _rel_universal(f, kp, xdims, fac)
    else:
        sampler = Sampler(inst, xdims, 20) if sampler is None else sampler
        a = f.dom
        for _ in range(sampler.cases):
            x = sampler.obj()
            if not kp.empty:
                g = compose(kp.inclusion, inst.sample_cp(x, kp.carrier, sampler.rng))
                h = compose(kp.partner, g)
                kill = inst.is_zero(compose(f, g))
                back = compose(kp.inclusion, h)
                fac.record(kill and inst.eq(back, g), distance(back, g), f=f, g=g)
            # an arbitrary map factors exactly when it is annihilated
            g = inst.sample_cp(x, a, sampler.rng)
            kill = inst.is_zero(compose(f, g))
            through = (not kp.empty) and inst.eq(compose(kp.inclusion, compose(kp.partner, g)), g)
            fac.record(kill == (through or (kp.empty and inst.is_zero(g))), note="random map", f=f, g=g)
        if not kp.empty:
            split = compose(kp.partner, kp.inclusion)
            fac.record(inst.eq(split, inst.id(kp.carrier)), distance(split, inst.id(kp.carrier)), note="unique h")
    rep.add(ann)
    rep.add(fac)
    return rep


# split kernels ---------------------------------------------------------------------


def _sample_map(inst: TheoryInstance, sampler: Sampler, a: SystemObject, b: SystemObject) -> Morphism:
    """A map with a nontrivial kernel more often than a generic sample would have."""
    rng = sampler.rng
    if _is_rel(inst):
        data = rng.random((b.dim, a.dim)) < 0.4
        return inst.morphism(data, a, b)
    r = int(rng.integers(0, a.dim + 1))
    q = nm.orthonormalize(inst.base.sample_morphism(SystemObject.of(a.dim), SystemObject.of(a.dim), rng).data)[:, :r]
    f = inst.sample_cp(a, b, rng)
    proj = inst.embed(q @ np.conj(q.T), a, a)
    return compose(f, proj)


def _rel_partial_bijections(a: SystemObject, k: SystemObject, inst: TheoryInstance):
    for image in itertools.permutations(range(a.dim), k.dim):
        data = np.zeros((k.dim, a.dim), dtype=bool)
        data[np.arange(k.dim), list(image)] = True
        yield inst.morphism(data, a, k)


def check_split_kernels(inst: TheoryInstance, sampler: Sampler) -> VerificationReport:
    rep = VerificationReport("split-kernels", inst.tag, sampler.seed, inst.tol)
    causal = Check("causal", "kernel inclusion is causal")
    cocausal = Check("cocausal", "partner is co-causal")
    split = Check("split", "partner after inclusion is the identity")
    proj = Check("projector", "inclusion after partner is a self-adjoint idempotent fixing the kernel")
    unique = Check("unique_partner", "co-causal cokernels splitting the inclusion are the partner")
    idem = Check("image_idempotence", "kernel of the cokernel of a kernel is the kernel")
    rng = sampler.rng
    for _ in range(sampler.cases):
        a, b = sampler.obj(), sampler.obj()
        f = _sample_map(inst, sampler, a, b)
        kp = kernel(f, inst)
        again = kernel(cokernel(kp.inclusion, inst).partner, inst)
        idem.record(same_subobject(kp, again, inst), f=f)
        if kp.empty:
            continue
        k, p = kp.inclusion, kp.partner
        c = compose(inst.discard(a), k)
        causal.record(inst.eq(c, inst.discard(kp.carrier)), distance(c, inst.discard(kp.carrier)), k=k)
        c = compose(p, inst.mixed(a))
        cocausal.record(inst.eq(c, inst.mixed(kp.carrier)), distance(c, inst.mixed(kp.carrier)), k=k)
        s = compose(p, k)
        split.record(inst.eq(s, inst.id(kp.carrier)), distance(s, inst.id(kp.carrier)), k=k)
        pr = compose(k, p)
        ok = inst.eq(compose(pr, pr), pr) and inst.eq(oracle_adjoint(inst, pr), pr) and inst.eq(compose(pr, k), k)
        proj.record(ok, distance(compose(pr, pr), pr), k=k)
        if _is_rel(inst):
            candidates = list(_rel_partial_bijections(a, kp.carrier, inst))
        else:
            q = kp.basis
            z = inst.base.sample_morphism(a, kp.carrier, rng).data
            comp = np.eye(a.dim) - q @ np.conj(q.T)
            phase = np.exp(1j * rng.uniform(0, 2 * np.pi)) if inst.scalar is ScalarKind.COMPLEX else -1.0
            candidates = [
                inst.embed(phase * np.conj(q.T), a, kp.carrier),
                inst.embed(np.conj(q.T) + 0.1 * z @ comp, a, kp.carrier),
            ]
        for e in candidates:
            if inst.eq(compose(e, k), inst.id(kp.carrier)) and inst.eq(compose(e, inst.mixed(a)), inst.mixed(kp.carrier)):
                unique.record(inst.eq(e, p), distance(e, p), k=k, e=e)
    for ch in (causal, cocausal, split, proj, unique, idem):
        rep.add(ch)
    return rep


# pure exclusion and sharpness ---------------------------------------------------------


def pure_exclusion_witness(psi: Morphism, inst: TheoryInstance) -> Morphism:
    """A nonzero effect that sends the pure state ``psi`` to zero."""
    a = psi.cod
    if is_trivial(a, inst):
        raise ValueError(f"{a} is trivial; no exclusion witness exists")
    if not is_pure(psi, inst) or inst.is_zero(psi):
        raise ValueError("pure_exclusion_witness needs a nonzero pure state")
    if _is_rel(inst):
        return inst.morphism(~psi.data.T, a, I)
    d = a.dim
    rho = psi.data.reshape(d, d)
    q = _null_space(rho, inst)
    comp = q @ np.conj(q.T)
    return inst.morphism(comp.T.reshape(1, -1), a, I)


def pure_exclusion_witness_dual(e: Morphism, inst: TheoryInstance) -> Morphism:
    """A nonzero state that the pure effect ``e`` sends to zero."""
    a = e.dom
    if is_trivial(a, inst):
        raise ValueError(f"{a} is trivial; no exclusion witness exists")
    if not is_pure(e, inst) or inst.is_zero(e):
        raise ValueError("pure_exclusion_witness_dual needs a nonzero pure effect")
    if _is_rel(inst):
        return inst.morphism(~e.data.T, I, a)
    d = a.dim
    m = e.data.reshape(d, d).T
    q = _null_space(m, inst)
    return inst.morphism((q @ np.conj(q.T)).reshape(-1, 1), I, a)


def sharp_from_kernels(psi: Morphism, inst: TheoryInstance) -> Morphism:
    """The split partner of the image kernel ``ker(coker psi)``, corrected by the
    causal isomorphism between that kernel and ``psi``."""
    if not inst.eq(compose(inst.discard(psi.cod), psi), inst.id(I)) or graph_size(psi, inst) > 1:
        raise ValueError("sharp_from_kernels needs a causal pure state")
    kp = kernel(cokernel(psi, inst).partner, inst)
    chi = compose(kp.partner, psi)
    if kp.carrier.dim != 1 or not inst.eq(compose(kp.inclusion, chi), psi):
        raise ArithmeticError("state is not its image kernel")
    if not inst.eq(compose(inst.discard(kp.carrier), chi), inst.id(I)):
        raise ArithmeticError("comparison map is not causal")
    v = chi.data[0, 0]
    inv = inst.morphism(np.array([[True if _is_rel(inst) else 1.0 / v]]), kp.carrier, I)
    return compose(inv, kp.partner)


def check_sharp_from_kernels(inst: TheoryInstance, sampler: Sampler) -> VerificationReport:
    rep = VerificationReport("sharp-from-kernels", inst.tag, sampler.seed, inst.tol)
    ch = Check("agrees_with_sharp", "kernel partner equals the sharp effect")
    for _ in range(sampler.cases):
        a = sampler.obj()
        psi = sample_pure_causal(inst, a, sampler.rng)
        x, y = sharp_from_kernels(psi, inst), sharp_effect(psi, inst)
        ch.record(inst.eq(x, y), distance(x, y), psi=psi)
    rep.add(ch)
    return rep


def check_pure_exclusion(inst: TheoryInstance, sampler: Sampler) -> VerificationReport:
    rep = VerificationReport("pure-exclusion", inst.tag, sampler.seed, inst.tol)
    st = Check("states", "pure states of nontrivial objects are excluded by a nonzero effect")
    ef = Check("effects", "pure effects of nontrivial objects exclude a nonzero state")
    for _ in range(sampler.cases):
        a = sampler.obj()
        if is_trivial(a, inst):
            continue
        psi = sample_pure_causal(inst, a, sampler.rng)
        e = pure_exclusion_witness(psi, inst)
        z = compose(e, psi)
        st.record(not inst.is_zero(e) and inst.is_zero(z), distance(z, inst.zero(I, I)), psi=psi)
        eff = extended_sharp(psi, inst)
        s = pure_exclusion_witness_dual(eff, inst)
        z = compose(eff, s)
        ef.record(not inst.is_zero(s) and inst.is_zero(z), distance(z, inst.zero(I, I)), e=eff)
    rep.add(st)
    rep.add(ef)
    return rep


# kernel composition and zero propagation ----------------------------------------------


def check_kernel_composition(inst: TheoryInstance, sampler: Sampler) -> VerificationReport:
    """Tensors of kernels are kernels, cokernels keep pure states pure, and the
    dagger of a state pushed through a partner is the pulled-back dagger."""
    rep = VerificationReport("kernel-composition", inst.tag, sampler.seed, inst.tol)
    tens = Check("tensor_kernel", "tensor of kernels is the kernel of its cokernel")
    pure = Check("cokernel_pure", "cokernels send pure states to pure states")
    exch = Check("exchange", "dagger of a state through a partner is the dagger composed with the inclusion")
    for _ in range(sampler.cases):
        a, b = sampler.obj(), sampler.obj()
        f1, f2 = _sample_map(inst, sampler, a, b), _sample_map(inst, sampler, b, a)
        k1, k2 = kernel(f1, inst), kernel(f2, inst)
        if not (k1.empty or k2.empty):
            kt = KernelPresentation(tensor(k1.inclusion, k2.inclusion), tensor(k1.partner, k2.partner))
            c = cokernel(kt.inclusion, inst).partner
            rp = check_kernel_universal(c, kt, inst, Sampler(inst, sampler.dims, 3, sampler.seed), xdims=(1, 2))
            ok = rp.passed and same_subobject(kt, kernel(c, inst), inst)
            tens.record(ok, rp.max_residual, f=f1, g=f2)
        psi = sample_pure_causal(inst, a, sampler.rng)
        cp = cokernel(f2, inst)
        if not cp.empty:
            pure.record(bool(is_pure(compose(cp.partner, psi), inst)), psi=psi, c=cp.partner)
        x = sampler.obj()
        for kp in (k2, KernelPresentation(inst.id(a), inst.id(a))):
            if kp.empty:
                continue
            chi = sample_pure_causal(inst, x @ kp.inclusion.cod, sampler.rng)
            lhs = extended_sharp(apply_local(kp.partner, chi, len(x)), inst)
            rhs = compose(extended_sharp(chi, inst), tensor(inst.id(x), kp.inclusion))
            exch.record(inst.eq(lhs, rhs), distance(lhs, rhs), psi=chi, k=kp.inclusion)
    for ch in (tens, pure, exch):
        rep.add(ch)
    return rep


def check_zero_propagation(inst: TheoryInstance, sampler: Sampler) -> VerificationReport:
    """``discard . f = 0`` forces ``f = 0``; discarding is never zero."""
    rep = VerificationReport("zero-propagation", inst.tag, sampler.seed, inst.tol)
    ch = Check("discard_detects_zero", "a map killed by discarding is zero")
    nz = Check("discard_nonzero", "discarding and completely mixed states are nonzero")
    if _is_rel(inst):
        for da, db in itertools.product(sampler.dims, repeat=2):
            rels = _all_relations(db, da)
            killed = ~rels.any(axis=1).any(axis=1)
            zero = ~rels.any(axis=(1, 2))
            bad = np.flatnonzero(killed & ~zero)
            ch.cases += len(rels) - 1
            ch.record(not bad.size, float(bad.size), note=f"{da} -> {db}")
    else:
        for k in range(sampler.cases):
            a, b = sampler.obj(), sampler.obj()
            f = inst.zero(a, b) if k % 10 == 0 else inst.sample_cp(a, b, sampler.rng)
            killed = inst.is_zero(compose(inst.discard(b), f))
            ch.record((not killed) or inst.is_zero(f), f=f)
    for a in sampler.objects():
        ok = not inst.is_zero(inst.discard(a)) and not inst.is_zero(inst.mixed(a))
        nz.record(ok)
    rep.add(ch)
    rep.add(nz)
    return rep


# discarding is determined by pure states ------------------------------------------------


def operator_basis(d: int, scalar: ScalarKind) -> list[np.ndarray]:
    """Orthonormal basis of Hermitian (complex) or symmetric (real) ``d x d`` matrices."""
    out = []
    for i in range(d):
        m = np.zeros((d, d), dtype=scalar.dtype)
        m[i, i] = 1
        out.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=scalar.dtype)
            m[i, j] = m[j, i] = 1 / np.sqrt(2)
            out.append(m)
            if scalar is ScalarKind.COMPLEX:
                m = np.zeros((d, d), dtype=complex)
                m[i, j], m[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
                out.append(m)
    return out


def effects_fixing_pure_states(a: SystemObject, inst: TheoryInstance) -> tuple[np.ndarray, int]:
    """Least-squares operator ``E`` with ``Tr(E rho) = 1`` on the spanning set, and the
    rank of that linear system."""
    d = a.dim
    basis = operator_basis(d, inst.scalar)
    states = [s.data.reshape(d, d) for s in pure_state_spanning_set(a, inst)]
    m = np.array([[np.real(np.trace(b @ rho)) for b in basis] for rho in states])
    coef, *_ = np.linalg.lstsq(m, np.ones(len(states)), rcond=None)
    e = sum(c * b for c, b in zip(coef, basis))
    return e, int(np.linalg.matrix_rank(m, tol=1e-10))


def check_predual_from_purification(inst: TheoryInstance, objects, seed: int = 0) -> VerificationReport:
    rep = VerificationReport("predual-from-purification", inst.tag, seed, inst.tol)
    uniq = Check("discard_unique", "discarding is the only effect sending every causal pure state to one")
    marg = Check("both_marginals", "the pre-dual purifies the completely mixed state on both legs")
    for a in objects:
        e, rank = effects_fixing_pure_states(a, inst)
        want = len(operator_basis(a.dim, inst.scalar))
        res = nm.residual(e, np.eye(a.dim))
        uniq.record(rank == want and res <= inst.tol.absolute, res, note=f"rank {rank} of {want}")
        r1, r2 = pre_dual_marginals(a, inst)
        marg.record(max(r1, r2) <= inst.tol.absolute, max(r1, r2))
    rep.add(uniq)
    rep.add(marg)
    return rep
