"""State daggers and the dagger they generate.

A state dagger sends each state ``psi: I -> A`` to an effect ``A -> I``.
Given duals whose caps are the images of their crossed cups, the whole
dagger is recovered by bending: name ``f`` into a state, send it to an
effect, and bend that effect back into a morphism ``cod f -> dom f``.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

from .numeric import ScalarKind
from .report import Check, VerificationReport
from .theory import (
    I,
    DaggerStructure,
    DualPresentation,
    Morphism,
    Sampler,
    SystemObject,
    TheoryInstance,
    _tdot,
    check_dagger_compact,
    check_dagger_functor,
    compose,
    distance,
    discard_compatible,
    discard_compat_residuals,
    name,
    primed_cup,
    standard_dual,
    tensor,
    tensor_dual,
    from_wires,
    to_wires,
)

Duals = Callable[[SystemObject], DualPresentation]


class StateDagger:
    """A named assignment of effects to states."""

    def __init__(self, fn: Callable[[Morphism], Morphism], label: str):
        self.fn = fn
        self.label = label

    def __call__(self, psi: Morphism) -> Morphism:
        if not psi.is_state:
            raise ValueError(f"state dagger applied to non-state {psi!r}")
        e = self.fn(psi)
        if e.dom != psi.cod or not e.is_effect:
            raise ValueError(f"state dagger {self.label} returned {e!r} for {psi!r}")
        return e

    def __repr__(self) -> str:
        return f"StateDagger({self.label})"


def conjugate_transpose(inst: TheoryInstance) -> StateDagger:
    label = "relational-transpose" if inst.scalar is ScalarKind.BOOLEAN else "conjugate-transpose"
    return StateDagger(lambda psi: Morphism(psi.cod, I, psi.scalar.conj(psi.data).T, psi.scalar, psi.layer), label)


def plain_transpose(inst: TheoryInstance) -> StateDagger:
    """Transpose without conjugation: a deliberately wrong choice over C."""
    return StateDagger(lambda psi: Morphism(psi.cod, I, psi.data.T, psi.scalar, psi.layer), "plain-transpose")


def standard_duals(inst: TheoryInstance) -> Duals:
    return lru_cache(maxsize=None)(lambda a: standard_dual(a, inst))


def _objects(sampler: Sampler) -> tuple[SystemObject, SystemObject]:
    return sampler.obj(), sampler.obj()


def check_state_dagger(sd: StateDagger, inst: TheoryInstance, sampler: Sampler) -> VerificationReport:
    rep = VerificationReport("state-dagger", inst.tag, sampler.seed, inst.tol)
    unit = Check("unit", "state dagger of the empty state is the identity scalar")
    tens = Check("tensor", "state dagger is multiplicative over tensor")
    scal = Check("scalar_exchange", "dagger of an inner product is the swapped inner product")
    part = Check("partial_exchange", "dagger of a partially composed state")
    coh = Check("coherence", "state dagger commutes with coherence isomorphisms")

    one = inst.id(I)
    lhs = sd(one)
    unit.record(inst.eq(lhs, one), distance(lhs, one))
    for _ in range(sampler.cases):
        a, b = _objects(sampler)
        psi, phi = sampler.state(a), sampler.state(b)
        lhs = sd(tensor(psi, phi))
        rhs = tensor(sd(psi), sd(phi))
        tens.record(inst.eq(lhs, rhs), distance(lhs, rhs), psi=psi, phi=phi)

        chi = sampler.state(a)
        lhs = sd(compose(sd(chi), psi))
        rhs = compose(sd(psi), chi)
        scal.record(inst.eq(lhs, rhs), distance(lhs, rhs), psi=psi, phi=chi)

        big = sampler.state(a @ b)
        lhs = sd(compose(tensor(inst.id(a), sd(phi)), big))
        rhs = compose(sd(big), tensor(inst.id(a), phi))
        part.record(inst.eq(lhs, rhs), distance(lhs, rhs), psi=big, phi=phi)

        c = sampler.obj()
        for label, gamma, gamma_inv in inst.coherence_isos(a, b, c):
            s = sampler.state(gamma.dom)
            lhs = sd(compose(gamma, s))
            rhs = compose(sd(s), gamma_inv)
            coh.record(inst.eq(lhs, rhs), distance(lhs, rhs), note=label, psi=s)
    for ch in (unit, tens, scal, part, coh):
        rep.add(ch)
    return rep


def state_dagger_dual_residual(sd: StateDagger, d: DualPresentation, inst: TheoryInstance) -> float:
    return distance(sd(primed_cup(d, inst)), d.cap)


def check_state_dagger_dual(sd: StateDagger, d: DualPresentation, inst: TheoryInstance) -> bool:
    """Whether the cap equals the state dagger of the crossed cup."""
    return inst.eq(sd(primed_cup(d, inst)), d.cap)


def derive_dagger(f: Morphism, sd: StateDagger, duals: Duals, inst: TheoryInstance) -> Morphism:
    """``f^dagger = (id_A (x) sd(name f)) . (cup'_A (x) id_B)`` for ``f: A -> B``."""
    a, b = f.dom, f.cod
    d = duals(a)
    e = sd(name(f, d, inst))
    cp = primed_cup(d, inst)
    na, nd = len(a), len(d.dual)
    # contract the A* wires of cup' with the A* wires of e; left with (A, B) = cod, dom
    t = _tdot(to_wires(cp), to_wires(e), (list(range(na, na + nd)), list(range(nd))))
    return from_wires(t, b, a, f.scalar, f.layer)


def codomain_side(f: Morphism, f_dag: Morphism, sd: StateDagger, dual_b: DualPresentation, inst: TheoryInstance) -> tuple[Morphism, Morphism]:
    """Both sides of the defining equation of ``f^dagger`` written with a dual of ``cod f``:
    ``sd((f^dagger (x) id_B*) . cup'_B) = cap_B . (f (x) id_B*)``."""
    bd = dual_b.dual
    lhs = sd(compose(tensor(f_dag, inst.id(bd)), primed_cup(dual_b, inst)))
    rhs = compose(dual_b.cap, tensor(f, inst.id(bd)))
    return lhs, rhs


def derive_global_dagger(
    sd: StateDagger,
    duals: Duals,
    inst: TheoryInstance,
    sampler: Sampler,
    oracle: Callable[[Morphism], Morphism] | None = None,
    provenance: str = "derived",
    tensor_dims: Sequence[int] | None = None,
    discarding: bool = True,
) -> tuple[DaggerStructure, VerificationReport]:
    """Wrap :func:`derive_dagger` as a dagger and verify it.

    The report covers injectivity of ``sd``, the functor laws, agreement
    with ``sd`` on states, the composite-dual construction, compatibility
    with discarding when the instance has it, and (given ``oracle``)
    agreement with a ground-truth dagger.  ``tensor_dims`` is passed on to
    :func:`check_dagger_functor`.  ``discarding=False`` skips the checks
    involving completely mixed states, for subcategories that lack them.
    """
    discarding = discarding and inst.has_discarding
    dg = DaggerStructure(lambda f: derive_dagger(f, sd, duals, inst), provenance)
    rep = VerificationReport("derived-dagger", inst.tag, sampler.seed, inst.tol)

    inj = Check("injective", "the state dagger is injective")
    states_ok = Check("agrees_on_states", "derived dagger restricts to the state dagger")
    sd_dual = Check("state_dagger_duals", "chosen duals are state dagger duals")
    comp_dual = Check("composite_duals", "crossed tensor of state dagger duals is one")
    cod_side = Check("codomain_side", "defining equation holds with a codomain dual")
    disc_ok = Check("discard_compatible", "sd(mixed) is discarding and duals respect it")
    agree = Check("oracle", "derived dagger equals the reference adjoint")

    objs = sampler.objects()
    for a in objs:
        d = duals(a)
        sd_dual.record(check_state_dagger_dual(sd, d, inst), state_dagger_dual_residual(sd, d, inst), cup=d.cup, cap=d.cap)
        for b in objs:
            td = tensor_dual(duals(a), duals(b), inst)
            comp_dual.record(check_state_dagger_dual(sd, td, inst), state_dagger_dual_residual(sd, td, inst), cup=td.cup)
        if discarding:
            md = sd(inst.mixed(a))
            ok = inst.eq(md, inst.discard(a)) and discard_compatible(d, inst)
            disc_ok.record(ok, max([distance(md, inst.discard(a))] + discard_compat_residuals(d, inst)))
    if not discarding:
        disc_ok.skip("no discarding")

    enumerated = sampler.exhaustive()
    if enumerated is not None:
        by_obj: dict[SystemObject, list[tuple[Morphism, Morphism]]] = {}
        for a in objs:
            by_obj[a] = [(s, sd(s)) for s in inst.enumerate_morphisms(I, a)]
        for pairs in by_obj.values():
            for i, (s, es) in enumerate(pairs):
                for t, et in pairs[i + 1:]:
                    inj.record(not inst.eq(es, et), note="distinct states with equal images", psi=s, phi=t)
        morphs = list(enumerated)
    else:
        for _ in range(sampler.cases):
            a = sampler.obj()
            s, t = sampler.state(a), sampler.state(a)
            same = inst.eq(s, t)
            inj.record(same or not inst.eq(sd(s), sd(t)), psi=s, phi=t)
        morphs = list(sampler.morphisms())

    for f in morphs:
        fd = dg(f)
        if oracle is not None:
            ref = oracle(f)
            agree.record(inst.eq(fd, ref), distance(fd, ref), f=f)
        lhs, rhs = codomain_side(f, fd, sd, duals(f.cod), inst)
        cod_side.record(inst.eq(lhs, rhs), distance(lhs, rhs), f=f)
        if f.is_state:
            lhs, rhs = fd, sd(f)
            states_ok.record(inst.eq(lhs, rhs), distance(lhs, rhs), psi=f)
    for a in objs:
        s = sampler.state(a)
        states_ok.record(inst.eq(dg(s), sd(s)), distance(dg(s), sd(s)), psi=s)
    if oracle is None:
        agree.skip("no reference adjoint supplied")

    for ch in (inj, sd_dual, comp_dual, disc_ok):
        rep.add(ch)
    rep.extend(check_dagger_functor(dg, inst, sampler, tensor_dims), prefix="functor.")
    rep.extend(check_dagger_compact(dg, duals, inst, objs, sampler.seed, discarding), prefix="compact.")
    for ch in (states_ok, cod_side, agree):
        rep.add(ch)
    return dg, rep


def dual_independence(
    sd: StateDagger,
    duals: Duals,
    alt_duals: Duals,
    inst: TheoryInstance,
    morphisms: Sequence[Morphism],
    seed: int = 0,
) -> VerificationReport:
    """Compare the dagger derived from two families of state dagger duals."""
    rep = VerificationReport("dual-independence", inst.tag, seed, inst.tol)
    ch = Check("dual_choice", "derived dagger is independent of the chosen dual")
    for f in morphisms:
        x = derive_dagger(f, sd, duals, inst)
        y = derive_dagger(f, sd, alt_duals, inst)
        ch.record(inst.eq(x, y), distance(x, y), f=f)
    rep.add(ch)
    return rep
