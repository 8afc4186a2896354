"""Symmetric monoidal categories with discarding, realised on dense matrices.

Objects are ordered lists of wire factors; morphisms are matrices shaped
``(dim cod, dim dom)``.  On the doubled layer each object of dimension ``d``
carries ``d**2`` coordinates laid out as ``(ket multi-index, bra multi-index)``,
i.e. the row-major vectorisation of a ``d x d`` operator.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from . import numeric as nm
from .numeric import DEFAULT_TOL, ScalarKind, Tolerance
from .report import Check, VerificationReport


class Factor(NamedTuple):
    dim: int
    dual: bool = False


@dataclass(frozen=True)
class SystemObject:
    factors: tuple[Factor, ...] = ()

    def __post_init__(self):
        fs = tuple(Factor(int(f[0]), bool(f[1])) for f in self.factors)
        if any(f.dim < 1 for f in fs):
            raise ValueError("factor dimensions must be positive")
        object.__setattr__(self, "factors", fs)

    @classmethod
    def of(cls, *dims: int) -> "SystemObject":
        return cls(tuple(Factor(d) for d in dims))

    @classmethod
    def unit(cls) -> "SystemObject":
        return cls(())

    @property
    def dims(self) -> list[int]:
        return [f.dim for f in self.factors]

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def is_unit(self) -> bool:
        return not self.factors

    def __len__(self) -> int:
        return len(self.factors)

    def __matmul__(self, other: "SystemObject") -> "SystemObject":
        return SystemObject(self.factors + other.factors)

    def dual(self) -> "SystemObject":
        # factorwise, order preserved
        return SystemObject(tuple(Factor(f.dim, not f.dual) for f in self.factors))

    def __getitem__(self, item) -> "SystemObject":
        if isinstance(item, slice):
            return SystemObject(self.factors[item])
        return SystemObject((self.factors[item],))

    def __repr__(self) -> str:
        if not self.factors:
            return "I"
        return " @ ".join(f"{f.dim}{'*' if f.dual else ''}" for f in self.factors)


I = SystemObject.unit()


class Layer(enum.Enum):
    SINGLE = "single"
    DOUBLED = "doubled"

    def extent(self, obj: SystemObject) -> int:
        return obj.dim if self is Layer.SINGLE else obj.dim ** 2


class BoundaryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Morphism:
    dom: SystemObject
    cod: SystemObject
    data: np.ndarray
    scalar: ScalarKind
    layer: Layer = Layer.SINGLE

    def __post_init__(self):
        raw = np.asarray(self.data)
        if np.iscomplexobj(raw) and self.scalar is not ScalarKind.COMPLEX:
            if np.any(np.abs(raw.imag) > 1e-12):
                raise ValueError(f"complex entries in a {self.scalar.value} morphism")
            raw = raw.real
        data = np.array(raw, dtype=self.scalar.dtype, copy=True)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        shape = (self.layer.extent(self.cod), self.layer.extent(self.dom))
        if data.shape != shape:
            raise nm.ShapeError(f"data shape {data.shape} does not match {shape} for {self.dom} -> {self.cod}")
        if data.dtype != bool and not np.all(np.isfinite(data)):
            raise ValueError("morphism entries must be finite")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def is_state(self) -> bool:
        return self.dom.is_unit

    @property
    def is_effect(self) -> bool:
        return self.cod.is_unit

    @property
    def is_scalar(self) -> bool:
        return self.dom.is_unit and self.cod.is_unit

    def with_data(self, data) -> "Morphism":
        return Morphism(self.dom, self.cod, data, self.scalar, self.layer)

    def scaled(self, r) -> "Morphism":
        if self.scalar is ScalarKind.BOOLEAN:
            return self.with_data(self.data & bool(r))
        return self.with_data(self.data * r)

    def value(self):
        """The entry of a scalar morphism."""
        if not self.is_scalar:
            raise BoundaryError("not a scalar")
        return self.data[0, 0]

    def to_dict(self) -> dict:
        flat = self.data.ravel()
        if self.scalar is ScalarKind.COMPLEX:
            entries = [[float(z.real), float(z.imag)] for z in flat]
        elif self.scalar is ScalarKind.REAL:
            entries = [float(x) for x in flat]
        else:
            entries = [bool(x) for x in flat]
        return {
            "scalar": self.scalar.value,
            "layer": self.layer.value,
            "dom": [{"dim": f.dim, "dual": f.dual} for f in self.dom.factors],
            "cod": [{"dim": f.dim, "dual": f.dual} for f in self.cod.factors],
            "data": entries,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Morphism":
        scalar = ScalarKind(d["scalar"])
        layer = Layer(d["layer"])
        dom = SystemObject(tuple(Factor(f["dim"], f["dual"]) for f in d["dom"]))
        cod = SystemObject(tuple(Factor(f["dim"], f["dual"]) for f in d["cod"]))
        if scalar is ScalarKind.COMPLEX:
            flat = np.array([complex(re, im) for re, im in d["data"]], dtype=complex)
        else:
            flat = np.array(d["data"], dtype=scalar.dtype)
        shape = (layer.extent(cod), layer.extent(dom))
        return cls(dom, cod, flat.reshape(shape), scalar, layer)

    def __repr__(self) -> str:
        return f"Morphism({self.dom} -> {self.cod}, {self.layer.value}, {self.scalar.value})"


def _same_kind(f: Morphism, g: Morphism) -> None:
    if f.layer is not g.layer or f.scalar is not g.scalar:
        raise BoundaryError(f"cannot combine {f!r} with {g!r}")


def compose(g: Morphism, f: Morphism) -> Morphism:
    """``g`` after ``f``."""
    _same_kind(f, g)
    if f.cod != g.dom:
        raise BoundaryError(f"cod {f.cod} of first map does not match dom {g.dom} of second")
    return Morphism(f.dom, g.cod, nm.matmul(g.data, f.data), f.scalar, f.layer)


def compose_all(*fs: Morphism) -> Morphism:
    """``compose_all(h, g, f)`` is ``h . g . f``."""
    out = fs[-1]
    for g in reversed(fs[:-1]):
        out = compose(g, out)
    return out


def _doubled_gather(left: SystemObject, right: SystemObject) -> np.ndarray:
    dl, dr = left.dim, right.dim
    return nm.permutation_indices([0, 2, 1, 3], [dl, dl, dr, dr])


def tensor(f: Morphism, g: Morphism) -> Morphism:
    _same_kind(f, g)
    data = nm.kron(f.data, g.data)
    if f.layer is Layer.DOUBLED:
        rows = _doubled_gather(f.cod, g.cod)
        cols = _doubled_gather(f.dom, g.dom)
        data = data[rows][:, cols]
    return Morphism(f.dom @ g.dom, f.cod @ g.cod, data, f.scalar, f.layer)


def tensor_all(*fs: Morphism) -> Morphism:
    out = fs[0]
    for g in fs[1:]:
        out = tensor(out, g)
    return out


def permutation_data(perm: Sequence[int], dom: SystemObject, layer: Layer) -> np.ndarray:
    p = nm.wire_permutation(perm, dom.dims) if dom.factors else np.ones((1, 1), dtype=np.int64)
    if layer is Layer.DOUBLED:
        p = nm.kron(p, p)
    return p


def factor_permutation(dom: SystemObject, perm: Sequence[int], scalar: ScalarKind, layer: Layer) -> Morphism:
    """The wire crossing sending factor ``i`` of ``dom`` to slot ``perm[i]``."""
    slots = [None] * len(dom)
    for i, p in enumerate(perm):
        slots[p] = dom.factors[i]
    cod = SystemObject(tuple(slots))
    data = permutation_data(perm, dom, layer)
    if scalar is ScalarKind.BOOLEAN:
        data = data.astype(bool)
    return Morphism(dom, cod, data, scalar, layer)


def distance(f: Morphism, g: Morphism) -> float:
    if f.dom != g.dom or f.cod != g.cod:
        raise BoundaryError(f"cannot compare {f!r} with {g!r}")
    return nm.residual(f.data, g.data)


def close(f: Morphism, g: Morphism, tol: Tolerance = DEFAULT_TOL) -> bool:
    if f.dom != g.dom or f.cod != g.cod:
        return False
    return nm.approx_eq(f.data, g.data, tol)


def wire_extents(obj: SystemObject, layer: Layer) -> list[int]:
    return obj.dims if layer is Layer.SINGLE else [d * d for d in obj.dims]


def to_wires(m: Morphism) -> np.ndarray:
    """View a morphism as a tensor with one axis per wire: codomain factors, then domain factors.

    Doubled wires get a single axis of extent ``d**2`` holding the (ket, bra)
    pair of that factor.
    """
    cd, dd = m.cod.dims, m.dom.dims
    if m.layer is Layer.SINGLE:
        return m.data.reshape(cd + dd)
    nc, nd = len(cd), len(dd)
    t = m.data.reshape(cd + cd + dd + dd)
    order = [x for i in range(nc) for x in (i, nc + i)]
    order += [x for i in range(nd) for x in (2 * nc + i, 2 * nc + nd + i)]
    return t.transpose(order).reshape([d * d for d in cd] + [d * d for d in dd])


def from_wires(t: np.ndarray, dom: SystemObject, cod: SystemObject, scalar: ScalarKind, layer: Layer) -> Morphism:
    cd, dd = cod.dims, dom.dims
    if layer is Layer.SINGLE:
        return Morphism(dom, cod, np.asarray(t).reshape(cod.dim, dom.dim), scalar, layer)
    nc, nd = len(cd), len(dd)
    pairs = [x for d in cd for x in (d, d)] + [x for d in dd for x in (d, d)]
    t = np.asarray(t).reshape(pairs)
    order = [2 * i for i in range(nc)] + [2 * i + 1 for i in range(nc)]
    order += [2 * nc + 2 * i for i in range(nd)] + [2 * nc + 2 * i + 1 for i in range(nd)]
    data = t.transpose(order).reshape(cod.dim ** 2, dom.dim ** 2)
    return Morphism(dom, cod, data, scalar, layer)


def _tdot(a: np.ndarray, b: np.ndarray, axes) -> np.ndarray:
    if a.dtype == bool and b.dtype == bool:
        return np.tensordot(a.astype(np.int64), b.astype(np.int64), axes=axes) > 0
    return np.tensordot(a, b, axes=axes)


def apply_local(f: Morphism, m: Morphism, offset: int) -> Morphism:
    """``(id (x) f (x) id) . m`` with ``f`` acting on ``cod m`` from factor ``offset``.

    Evaluated by contraction, never forming the identity tensor products.
    """
    _same_kind(f, m)
    k, n = len(f.dom), len(m.cod)
    if m.cod[offset:offset + k] != f.dom:
        raise BoundaryError(f"{f.dom} does not match factors {offset}.. of {m.cod}")
    q = len(f.cod)
    t = _tdot(to_wires(f), to_wires(m), (list(range(q, q + k)), list(range(offset, offset + k))))
    rest = n - k
    order = list(range(q, q + offset)) + list(range(q)) + list(range(q + offset, q + rest)) + list(range(q + rest, t.ndim))
    cod = m.cod[:offset] @ f.cod @ m.cod[offset + k:]
    return from_wires(t.transpose(order), m.dom, cod, m.scalar, m.layer)


def apply_local_dom(m: Morphism, g: Morphism, offset: int) -> Morphism:
    """``m . (id (x) g (x) id)`` with ``g`` feeding ``dom m`` from factor ``offset``."""
    _same_kind(g, m)
    k, n, p = len(g.cod), len(m.cod), len(m.dom)
    if m.dom[offset:offset + k] != g.cod:
        raise BoundaryError(f"{g.cod} does not match factors {offset}.. of {m.dom}")
    s = len(g.dom)
    t = _tdot(to_wires(m), to_wires(g), (list(range(n + offset, n + offset + k)), list(range(k))))
    # axes now: m.cod (n), m.dom minus the k (p - k), g.dom (s)
    left = list(range(n, n + offset))
    right = list(range(n + offset, n + p - k))
    gdom = list(range(n + p - k, n + p - k + s))
    order = list(range(n)) + left + gdom + right
    dom = m.dom[:offset] @ g.dom @ m.dom[offset + k:]
    return from_wires(t.transpose(order), dom, m.cod, m.scalar, m.layer)


def permute_state(psi: Morphism, perm: Sequence[int]) -> Morphism:
    """Reorder the output wires of a state: factor ``i`` moves to slot ``perm[i]``."""
    t = to_wires(psi)
    inverse = list(np.argsort(perm))
    cod = SystemObject(tuple(psi.cod.factors[i] for i in inverse))
    return from_wires(t.transpose(inverse), psi.dom, cod, psi.scalar, psi.layer)


def permute_effect(e: Morphism, perm: Sequence[int]) -> Morphism:
    """Reorder the input wires of an effect: factor ``i`` moves to slot ``perm[i]``."""
    t = to_wires(e)
    inverse = list(np.argsort(perm))
    dom = SystemObject(tuple(e.dom.factors[i] for i in inverse))
    return from_wires(t.transpose(inverse), dom, e.cod, e.scalar, e.layer)


def _group_perm(sizes: Sequence[int], order: Sequence[int]) -> list[int]:
    # factor-level permutation placing block b at block position order[b]
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    new_sizes = [0] * len(sizes)
    for b, o in enumerate(order):
        new_sizes[o] = sizes[b]
    new_starts = np.concatenate([[0], np.cumsum(new_sizes)]).astype(int)
    perm = [0] * int(starts[-1])
    for b, o in enumerate(order):
        for j in range(sizes[b]):
            perm[starts[b] + j] = int(new_starts[o]) + j
    return perm


class NoDiscardingError(TypeError):
    pass


class TheoryInstance:
    """A concrete symmetric monoidal category.

    Subclasses supply ``embed`` (how a plain matrix becomes a morphism),
    the discarding structure when there is one, and seeded samplers.
    """

    tag: str = ""
    scalar: ScalarKind = ScalarKind.COMPLEX
    layer: Layer = Layer.SINGLE
    has_discarding: bool = False
    has_zero: bool = True

    def __init__(self, tol: Tolerance = DEFAULT_TOL):
        self.tol = tol

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.tag})"

    # structure
    def embed(self, data, dom: SystemObject, cod: SystemObject) -> Morphism:
        raise NotImplementedError

    def morphism(self, data, dom: SystemObject, cod: SystemObject) -> Morphism:
        """Wrap raw layer data directly."""
        return Morphism(dom, cod, data, self.scalar, self.layer)

    def id(self, a: SystemObject) -> Morphism:
        n = self.layer.extent(a)
        return self.morphism(np.eye(n, dtype=self.scalar.dtype), a, a)

    def compose(self, g: Morphism, f: Morphism) -> Morphism:
        return compose(g, f)

    def tensor(self, f: Morphism, g: Morphism) -> Morphism:
        return tensor(f, g)

    def swap(self, a: SystemObject, b: SystemObject) -> Morphism:
        na, nb = len(a), len(b)
        perm = [nb + i for i in range(na)] + list(range(nb))
        return factor_permutation(a @ b, perm, self.scalar, self.layer)

    def associator(self, a: SystemObject, b: SystemObject, c: SystemObject) -> Morphism:
        # tensor data is strictly associative; the isomorphism is still a genuine morphism
        return self.id(a @ b @ c)

    def left_unitor(self, a: SystemObject) -> Morphism:
        return self.id(I @ a)

    def right_unitor(self, a: SystemObject) -> Morphism:
        return self.id(a @ I)

    def coherence_isos(self, a: SystemObject, b: SystemObject, c: SystemObject) -> list[tuple[str, Morphism, Morphism]]:
        """``(label, iso, inverse)`` triples for every coherence map on these objects."""
        return [
            ("associator", self.associator(a, b, c), self.associator(a, b, c)),
            ("left_unitor", self.left_unitor(a), self.left_unitor(a)),
            ("right_unitor", self.right_unitor(a), self.right_unitor(a)),
            ("swap", self.swap(a, b), self.swap(b, a)),
        ]

    def discard(self, a: SystemObject) -> Morphism:
        raise NoDiscardingError(f"{self.tag} has no discarding")

    def mixed(self, a: SystemObject) -> Morphism:
        raise NoDiscardingError(f"{self.tag} has no completely mixed states")

    def zero(self, a: SystemObject, b: SystemObject) -> Morphism:
        shape = (self.layer.extent(b), self.layer.extent(a))
        return self.morphism(np.zeros(shape, dtype=self.scalar.dtype), a, b)

    def scalar_embed(self, value) -> Morphism:
        return self.morphism(np.array([[value]], dtype=self.scalar.dtype), I, I)

    def eq(self, f: Morphism, g: Morphism, tol: Tolerance | None = None) -> bool:
        return close(f, g, tol or self.tol)

    def is_zero(self, f: Morphism) -> bool:
        return self.eq(f, self.zero(f.dom, f.cod))

    # sampling
    def sample_morphism(self, dom: SystemObject, cod: SystemObject, rng: np.random.Generator) -> Morphism:
        raise NotImplementedError

    def sample_state(self, a: SystemObject, rng: np.random.Generator) -> Morphism:
        return self.sample_morphism(I, a, rng)

    def sample_effect(self, a: SystemObject, rng: np.random.Generator) -> Morphism:
        return self.sample_morphism(a, I, rng)

    def sample_invertible(self, a: SystemObject, rng: np.random.Generator) -> Morphism:
        """A random unitary (permutation in Rel) used to re-present duals."""
        raise NotImplementedError

    def enumerate_morphisms(self, dom: SystemObject, cod: SystemObject) -> Iterator[Morphism] | None:
        return None


@dataclass
class Sampler:
    """Seeded source of test objects and morphisms for one instance.

    ``pure`` restricts morphism sampling to the instance's pure maps when it
    has a notion of them (used to sample the pure subcategory of a CPM
    category).
    """

    inst: TheoryInstance
    dims: Sequence[int] = (1, 2, 3)
    cases: int = 100
    seed: int = 0
    pure: bool = False

    def __post_init__(self):
        self.dims = list(self.dims)
        self.rng = np.random.default_rng(self.seed)

    def obj(self) -> SystemObject:
        return SystemObject.of(int(self.rng.choice(self.dims)))

    def objects(self) -> list[SystemObject]:
        return [SystemObject.of(d) for d in self.dims]

    def morphism(self, dom: SystemObject | None = None, cod: SystemObject | None = None) -> Morphism:
        dom = self.obj() if dom is None else dom
        cod = self.obj() if cod is None else cod
        if self.pure:
            return self.inst.sample_pure_morphism(dom, cod, self.rng)
        return self.inst.sample_morphism(dom, cod, self.rng)

    def state(self, a: SystemObject | None = None) -> Morphism:
        return self.morphism(I, self.obj() if a is None else a)

    def effect(self, a: SystemObject | None = None) -> Morphism:
        return self.morphism(self.obj() if a is None else a, I)

    def invertible(self, a: SystemObject) -> Morphism:
        return self.inst.sample_invertible(a, self.rng)

    def exhaustive(self) -> Iterator[Morphism] | None:
        """Every morphism between the sampler's objects, when the instance can enumerate them."""
        objs = self.objects()
        if any(self.inst.enumerate_morphisms(a, b) is None for a in objs for b in objs):
            return None

        def gen():
            for a in objs:
                for b in objs:
                    yield from self.inst.enumerate_morphisms(a, b)

        return gen()

    def morphisms(self, n: int | None = None) -> Iterator[Morphism]:
        for _ in range(self.cases if n is None else n):
            yield self.morphism()


# duals -----------------------------------------------------------------------


class SnakeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DualPresentation:
    obj: SystemObject
    dual: SystemObject
    cup: Morphism  # state of dual @ obj
    cap: Morphism  # effect of obj @ dual


def snake_maps(d: DualPresentation) -> tuple[Morphism, Morphism]:
    """``(cap (x) id_A) . (id_A (x) cup)`` and ``(id_A* (x) cap) . (cup (x) id_A*)``."""
    a, ad = d.obj, d.dual
    n = len(a)
    cup, cap = to_wires(d.cup), to_wires(d.cap)
    # cup wires (A*, A), cap wires (A, A*)
    first = _tdot(cup, cap, (list(range(n)), list(range(n, 2 * n))))
    second = _tdot(cap, cup, (list(range(n)), list(range(n, 2 * n))))
    return (
        from_wires(first, a, a, d.cup.scalar, d.cup.layer),
        from_wires(second, ad, ad, d.cup.scalar, d.cup.layer),
    )


def snake_residuals(d: DualPresentation, inst: TheoryInstance) -> tuple[float, float]:
    first, second = snake_maps(d)
    return distance(first, inst.id(d.obj)), distance(second, inst.id(d.dual))


def snakes_hold(d: DualPresentation, inst: TheoryInstance, tol: Tolerance | None = None) -> bool:
    first, second = snake_maps(d)
    return inst.eq(first, inst.id(d.obj), tol) and inst.eq(second, inst.id(d.dual), tol)


def standard_dual(a: SystemObject, inst: TheoryInstance) -> DualPresentation:
    """The dual whose cup is the delta vector ``sum_i |i>|i>`` over the full multi-index."""
    ad = a.dual()
    delta = np.eye(a.dim, dtype=inst.scalar.dtype).reshape(-1, 1)
    cup = inst.embed(delta, I, ad @ a)
    cap = inst.embed(delta.T, a @ ad, I)
    d = DualPresentation(a, ad, cup, cap)
    if not snakes_hold(d, inst):
        raise SnakeError(f"snake equations fail for the standard dual of {a}")
    return d


def tensor_dual(d1: DualPresentation, d2: DualPresentation, inst: TheoryInstance) -> DualPresentation:
    """Dual of ``A @ B`` assembled from duals of ``A`` and ``B`` with a crossing."""
    a, ad, b, bd = d1.obj, d1.dual, d2.obj, d2.dual
    sizes = [len(ad), len(a), len(bd), len(b)]
    # (A*, A, B*, B) -> (A*, B*, A, B) and (A, A*, B, B*) -> (A, B, A*, B*)
    cup = permute_state(tensor(d1.cup, d2.cup), _group_perm(sizes, [0, 2, 1, 3]))
    cap = permute_effect(tensor(d1.cap, d2.cap), _group_perm([len(a), len(ad), len(b), len(bd)], [0, 2, 1, 3]))
    return DualPresentation(a @ b, ad @ bd, cup, cap)


def transformed_dual(d: DualPresentation, q: Morphism, q_inv: Morphism, inst: TheoryInstance) -> DualPresentation:
    """Re-present a dual through an invertible ``q`` on the dual object.

    With ``q`` a permutation this is a basis-permuted dual; with a diagonal
    phase it is a phase-twisted one.  Snakes are preserved for any invertible
    ``q``.
    """
    cup = compose(tensor(q, inst.id(d.obj)), d.cup)
    cap = compose(d.cap, tensor(inst.id(d.obj), q_inv))
    return DualPresentation(d.obj, d.dual, cup, cap)


def primed_cup(d: DualPresentation, inst: TheoryInstance) -> Morphism:
    """State of ``A @ A*``: the cup followed by a crossing."""
    na, nd = len(d.obj), len(d.dual)
    return permute_state(d.cup, [na + i for i in range(nd)] + list(range(na)))


def primed_cap(d: DualPresentation, inst: TheoryInstance) -> Morphism:
    """Effect of ``A* @ A``: a crossing followed by the cap."""
    return compose(d.cap, inst.swap(d.dual, d.obj))


def name(f: Morphism, d: DualPresentation, inst: TheoryInstance) -> Morphism:
    """Bend the input of ``f`` into a state of ``dom(f)* @ cod(f)``."""
    if d.obj != f.dom:
        raise BoundaryError(f"dual presents {d.obj}, morphism has domain {f.dom}")
    return apply_local(f, d.cup, len(d.dual))


def unname(chi: Morphism, d: DualPresentation, inst: TheoryInstance) -> Morphism:
    """Inverse of :func:`name`: turn a state of ``A* @ B`` back into ``A -> B``."""
    n = len(d.dual)
    if chi.cod[:n] != d.dual:
        raise BoundaryError(f"state {chi.cod} does not start with {d.dual}")
    b = chi.cod[n:]
    na = len(d.obj)
    # cap wires (A, A*) against the A* wires of chi; what is left is (A, B)
    t = _tdot(to_wires(d.cap), to_wires(chi), (list(range(na, na + n)), list(range(n))))
    t = t.transpose(list(range(na, t.ndim)) + list(range(na)))
    return from_wires(t, d.obj, b, chi.scalar, chi.layer)


def is_causal(f: Morphism, inst: TheoryInstance, tol: Tolerance | None = None) -> bool:
    return inst.eq(compose(inst.discard(f.cod), f), inst.discard(f.dom), tol)


def is_cocausal(f: Morphism, inst: TheoryInstance, tol: Tolerance | None = None) -> bool:
    return inst.eq(compose(f, inst.mixed(f.dom)), inst.mixed(f.cod), tol)


def discard_factors(state: Morphism, positions: Sequence[int], inst: TheoryInstance) -> Morphism:
    """Apply discarding to the listed factors of a state (a marginal)."""
    cod = state.cod
    keep = [i for i in range(len(cod)) if i not in set(positions)]
    kept = SystemObject(tuple(cod.factors[i] for i in keep))
    dims = cod.dims
    if state.layer is Layer.SINGLE:
        row = inst.discard(SystemObject(tuple(cod.factors[i] for i in positions))).data
        out = nm.partial_contract(state.data, dims, keep, row)
    else:
        n = len(dims)
        ext = dims + dims
        dropped = sorted(positions)
        d_drop = int(np.prod([dims[i] for i in dropped], dtype=np.int64))
        row = np.eye(d_drop, dtype=state.data.dtype).ravel()
        out = nm.partial_contract(state.data, ext, keep + [n + i for i in keep], row)
    return Morphism(I, kept, out.reshape(-1, 1), state.scalar, state.layer)


# daggers ---------------------------------------------------------------------


@dataclass(frozen=True)
class DaggerStructure:
    fn: Callable[[Morphism], Morphism]
    provenance: str = "oracle"

    def __call__(self, f: Morphism) -> Morphism:
        return self.fn(f)


def _pair_objects(sampler: Sampler) -> tuple[SystemObject, SystemObject, SystemObject]:
    return sampler.obj(), sampler.obj(), sampler.obj()


def check_dagger_functor(
    dg: DaggerStructure,
    inst: TheoryInstance,
    sampler: Sampler,
    tensor_dims: Sequence[int] | None = None,
) -> VerificationReport:
    """Functor laws of ``dg`` on sampled morphisms.

    ``tensor_dims`` restricts the objects used for the tensor and coherence
    laws, whose composite objects grow multiplicatively.
    """
    tol = inst.tol
    rep = VerificationReport("dagger-functor", inst.tag, sampler.seed, tol)
    inv = Check("involution", "dagger is involutive")
    ident = Check("identity", "dagger preserves identities")
    comp = Check("composition", "dagger reverses composition")
    tens = Check("tensor", "dagger preserves tensor")
    unit = Check("coherence_unitary", "coherence isomorphisms are unitary")
    small = list(sampler.dims if tensor_dims is None else tensor_dims)

    def small_obj():
        return SystemObject.of(int(sampler.rng.choice(small)))

    for _ in range(sampler.cases):
        a, b, c = _pair_objects(sampler)
        f = sampler.morphism(a, b)
        g = sampler.morphism(b, c)
        fd = dg(f)
        ffd = dg(fd)
        inv.record(inst.eq(ffd, f), distance(ffd, f), f=f)
        ida = dg(inst.id(a))
        ident.record(inst.eq(ida, inst.id(a)), distance(ida, inst.id(a)))
        lhs = dg(compose(g, f))
        rhs = compose(fd, dg(g))
        comp.record(inst.eq(lhs, rhs), distance(lhs, rhs), f=f, g=g)
        if tensor_dims is None:
            f1, h = f, sampler.morphism(c, a)
        else:
            f1, h = sampler.morphism(small_obj(), small_obj()), sampler.morphism(small_obj(), small_obj())
        lhs = dg(tensor(f1, h))
        rhs = tensor(dg(f1), dg(h))
        tens.record(inst.eq(lhs, rhs), distance(lhs, rhs), f=f1, g=h)
    objs = [SystemObject.of(d) for d in small]
    for a in objs:
        for b in objs:
            for label, gamma, gamma_inv in inst.coherence_isos(a, b, objs[0]):
                gd = dg(gamma)
                ok = inst.eq(gd, gamma_inv)
                unit.record(ok, distance(gd, gamma_inv), note=label, iso=gamma)
    for c in (inv, ident, comp, tens, unit):
        rep.add(c)
    return rep


def discard_compat_residuals(d: DualPresentation, inst: TheoryInstance) -> list[float]:
    """Compatibility of a dual with discarding: one leg of the cup (cap)
    discarded (fed the mixed state) leaves the mixed state (discarding) on
    the other leg."""
    a, ad = d.obj, d.dual
    out = []
    out.append(distance(compose(tensor(inst.discard(ad), inst.id(a)), d.cup), inst.mixed(a)))
    out.append(distance(compose(tensor(inst.id(ad), inst.discard(a)), d.cup), inst.mixed(ad)))
    out.append(distance(compose(d.cap, tensor(inst.mixed(a), inst.id(ad))), inst.discard(ad)))
    out.append(distance(compose(d.cap, tensor(inst.id(a), inst.mixed(ad))), inst.discard(a)))
    return out


def discard_compatible(d: DualPresentation, inst: TheoryInstance) -> bool:
    a, ad = d.obj, d.dual
    return (
        inst.eq(compose(tensor(inst.discard(ad), inst.id(a)), d.cup), inst.mixed(a))
        and inst.eq(compose(tensor(inst.id(ad), inst.discard(a)), d.cup), inst.mixed(ad))
        and inst.eq(compose(d.cap, tensor(inst.mixed(a), inst.id(ad))), inst.discard(ad))
        and inst.eq(compose(d.cap, tensor(inst.id(a), inst.mixed(ad))), inst.discard(a))
    )


def check_dagger_compact(
    dg: DaggerStructure,
    duals: Callable[[SystemObject], DualPresentation],
    inst: TheoryInstance,
    objects: Sequence[SystemObject],
    seed: int = 0,
    discarding: bool = True,
) -> VerificationReport:
    rep = VerificationReport("dagger-compact", inst.tag, seed, inst.tol)
    discarding = discarding and inst.has_discarding
    snake = Check("snakes", "snake equations")
    dd = Check("dagger_dual", "cap is the dagger of the crossed cup")
    disc = Check("mixed_dagger", "discarding is the dagger of the completely mixed state")
    compat = Check("duals_discard", "duals compatible with discarding")
    for a in objects:
        d = duals(a)
        r1, r2 = snake_residuals(d, inst)
        snake.record(snakes_hold(d, inst), max(r1, r2), cup=d.cup, cap=d.cap)
        lhs = dg(primed_cup(d, inst))
        dd.record(inst.eq(lhs, d.cap), distance(lhs, d.cap), cup=d.cup, cap=d.cap)
        if discarding:
            md = dg(inst.mixed(a))
            disc.record(inst.eq(md, inst.discard(a)), distance(md, inst.discard(a)))
            compat.record(discard_compatible(d, inst), max(discard_compat_residuals(d, inst)), cup=d.cup, cap=d.cap)
    if not discarding:
        disc.skip("no discarding")
        compat.skip("no discarding")
    for c in (snake, dd, disc, compat):
        rep.add(c)
    return rep


def check_monoidal_laws(inst: TheoryInstance, sampler: Sampler) -> VerificationReport:
    """Interchange, swap naturality and involution, and the discard/mixed laws."""
    rep = VerificationReport("monoidal", inst.tag, sampler.seed, inst.tol)
    inter = Check("interchange", "interchange law")
    nat = Check("swap_naturality", "naturality of the swap")
    invol = Check("swap_involution", "swap after swap is the identity")
    dlaw = Check("discard_monoidal", "discarding is monoidal")
    mlaw = Check("mixed_monoidal", "completely mixed states are monoidal")
    for _ in range(sampler.cases):
        a, b, c = _pair_objects(sampler)
        d = sampler.obj()
        f1, g1 = sampler.morphism(a, b), sampler.morphism(b, c)
        f2, g2 = sampler.morphism(c, d), sampler.morphism(d, a)
        lhs = tensor(compose(g1, f1), compose(g2, f2))
        rhs = compose(tensor(g1, g2), tensor(f1, f2))
        inter.record(inst.eq(lhs, rhs), distance(lhs, rhs), f1=f1, g1=g1, f2=f2, g2=g2)
        lhs = compose(inst.swap(b, d), tensor(f1, f2))
        rhs = compose(tensor(f2, f1), inst.swap(a, c))
        nat.record(inst.eq(lhs, rhs), distance(lhs, rhs), f=f1, g=f2)
        ss = compose(inst.swap(b, a), inst.swap(a, b))
        invol.record(inst.eq(ss, inst.id(a @ b)), distance(ss, inst.id(a @ b)))
        if inst.has_discarding:
            lhs, rhs = inst.discard(a @ b), tensor(inst.discard(a), inst.discard(b))
            dlaw.record(inst.eq(lhs, rhs), distance(lhs, rhs))
            lhs, rhs = inst.mixed(a @ b), tensor(inst.mixed(a), inst.mixed(b))
            mlaw.record(inst.eq(lhs, rhs), distance(lhs, rhs))
    if inst.has_discarding:
        one = inst.id(I)
        dlaw.record(inst.eq(inst.discard(I), one), distance(inst.discard(I), one))
        mlaw.record(inst.eq(inst.mixed(I), one), distance(inst.mixed(I), one))
    else:
        dlaw.skip("no discarding")
        mlaw.skip("no discarding")
    for c in (inter, nat, invol, dlaw, mlaw):
        rep.add(c)
    return rep
