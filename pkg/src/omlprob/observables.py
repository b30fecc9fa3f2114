"""Finite-spectrum observables, conditional expectation, and sums.

An observable assigns pairwise-orthogonal nonzero elements, joining to the
top, to distinct rational spectrum values. Non-compatible observables have
no pointwise sum; the order-sensitive combination goes through conditional
expectation onto the second observable's range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .errors import OmlprobError
from .lattice import Element, ElementRef, FiniteOml, MalformedInput, same_lattice
from .rationals import as_rational
from .states import SMap, State, ZERO, canonical_fallback

ONE = Fraction(1)


class NotOrthogonal(OmlprobError):
    pass


class JoinNotTop(OmlprobError):
    pass


class DuplicateSpectrumValue(OmlprobError):
    pass


class NotBoolean(OmlprobError):
    """Element set is not a Boolean subalgebra."""


class NotCompatible(OmlprobError):
    """Pointwise sum requested for observables that are not compatible."""


class ZeroMassConditioner(OmlprobError):
    """Conditioning atom has mass 0 and fallbacks were forbidden."""


@dataclass(frozen=True)
class RangeAlgebra:
    """Boolean subalgebra given by its member and atom index sets."""

    lattice: FiniteOml
    members: frozenset
    atoms: tuple

    def contains(self, el: ElementRef) -> bool:
        return self.lattice.index_of(el) in self.members

    def atom_elements(self) -> tuple:
        return tuple(self.lattice.elements[i] for i in self.atoms)

    def member_elements(self) -> tuple:
        return tuple(self.lattice.elements[i] for i in sorted(self.members))

    def __le__(self, other: "RangeAlgebra") -> bool:
        return self.members <= other.members


class Observable:
    """Map from distinct spectrum values to orthogonal elements joining to 1.

    Build through validate_observable; support is kept sorted by value.
    """

    def __init__(self, lattice: FiniteOml, support: tuple):
        self.lattice = lattice
        self.support = support  # ((Fraction, Element), ...) sorted by value
        self._range: Optional[RangeAlgebra] = None

    def __call__(self, value) -> Element:
        v = as_rational(value)
        for val, el in self.support:
            if val == v:
                return el
        raise KeyError(f"{v} is not in the spectrum")

    def __eq__(self, other) -> bool:
        return (isinstance(other, Observable)
                and same_lattice(self.lattice, other.lattice)
                and self.support == other.support)

    def __repr__(self) -> str:
        pairs = ", ".join(f"{v}@{e.name}" for v, e in self.support)
        return f"Observable({pairs})"

    def spectrum(self) -> tuple:
        return tuple(v for v, _ in self.support)

    def range_algebra(self) -> RangeAlgebra:
        """Closure of the support elements: all joins of support subsets."""
        if self._range is None:
            lat = self.lattice
            els = [e.index for _, e in self.support]
            members = set()
            for mask in range(1 << len(els)):
                acc = lat.bottom.index
                for k in range(len(els)):
                    if mask >> k & 1:
                        acc = lat._join[acc][els[k]]
                members.add(acc)
            self._range = RangeAlgebra(lat, frozenset(members), tuple(sorted(els)))
        return self._range


def validate_observable(lattice: FiniteOml, support) -> Observable:
    """Check distinct values, orthogonality, and that the join is the top.

    `support` is an iterable of (spectrum value, element) pairs. The bottom
    element may not appear: it would name a value the observable can never
    attain, and the support would no longer list the atoms of its range.
    """
    pairs = []
    for value, el in support:
        try:
            v = as_rational(value)
        except ValueError as exc:
            raise MalformedInput(f"spectrum value: {exc}", witness=value) from None
        pairs.append((v, lattice.element(el)))
    if not pairs:
        raise MalformedInput("an observable needs a non-empty support")
    seen = {}
    for v, el in pairs:
        if v in seen:
            raise DuplicateSpectrumValue(f"spectrum value {v} appears twice",
                                         witness=v)
        seen[v] = el
    for _, el in pairs:
        if el.index == lattice.bottom.index:
            raise MalformedInput("the bottom element cannot carry a spectrum value",
                                 witness=el.name)
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            a, b = pairs[i][1], pairs[j][1]
            if not lattice.is_orthogonal(a, b):
                raise NotOrthogonal(f"support elements {a.name!r} and {b.name!r} "
                                    f"are not orthogonal", witness=(a.name, b.name))
    joined = lattice.join_all(el for _, el in pairs)
    if joined.index != lattice.top.index:
        raise JoinNotTop(f"support joins to {joined.name!r}, not the top",
                         witness=joined.name)
    return Observable(lattice, tuple(sorted(pairs, key=lambda p: p[0])))


def indicator(lattice: FiniteOml, el: ElementRef) -> Observable:
    """Two-point observable: 1 on `el`, 0 on its complement."""
    e = lattice.element(el)
    return validate_observable(lattice, [(1, e), (0, lattice.ortho(e))])


def constant(lattice: FiniteOml, value) -> Observable:
    return validate_observable(lattice, [(value, lattice.top)])


def subalgebra(lattice: FiniteOml, members: Iterable[ElementRef]) -> RangeAlgebra:
    """Validate a member set as a Boolean subalgebra and find its atoms."""
    idxs = {lattice.index_of(m) for m in members}
    names = lattice.names
    for need in (lattice.bottom.index, lattice.top.index):
        if need not in idxs:
            raise NotBoolean(f"subalgebra must contain {names[need]!r}",
                             witness=names[need])
    for i in idxs:
        if lattice._ortho[i] not in idxs:
            raise NotBoolean(f"not closed under complement at {names[i]!r}",
                             witness=names[i])
    for i in idxs:
        for j in idxs:
            if lattice._meet[i][j] not in idxs or lattice._join[i][j] not in idxs:
                raise NotBoolean(f"not closed under meet/join at "
                                 f"({names[i]!r}, {names[j]!r})",
                                 witness=(names[i], names[j]))
            if not lattice._compat[i] >> j & 1:
                raise NotBoolean(f"members {names[i]!r} and {names[j]!r} "
                                 f"are not compatible", witness=(names[i], names[j]))
    low = lattice._low
    nonzero = [i for i in sorted(idxs) if i != lattice.bottom.index]
    atoms = tuple(i for i in nonzero
                  if not any(j != i and low[i] >> j & 1 for j in nonzero))
    return RangeAlgebra(lattice, frozenset(idxs), atoms)


def observables_compatible(x: Observable, y: Observable) -> bool:
    """True when every pair of support elements is compatible.

    Elements compatible with a fixed element form a subalgebra, so
    compatibility of the generators carries over to the whole ranges.
    """
    return all(x.lattice.is_compatible(a, b)
               for _, a in x.support for _, b in y.support)


def distribution(m: State, x: Observable) -> dict:
    """Spectrum value -> probability mass under the state."""
    return {v: m(el) for v, el in x.support}


def expectation(p: Union[SMap, State], x: Observable) -> Fraction:
    """Spectrum values weighted by the diagonal state (or a given state)."""
    m = p.mu() if isinstance(p, SMap) else p
    return sum((v * m(el) for v, el in x.support), ZERO)


def _as_range(lattice: FiniteOml, B) -> RangeAlgebra:
    if isinstance(B, RangeAlgebra):
        if not same_lattice(B.lattice, lattice):
            raise MalformedInput("subalgebra belongs to a different lattice")
        return B
    if isinstance(B, Observable):
        if not same_lattice(B.lattice, lattice):
            raise MalformedInput("observable belongs to a different lattice")
        return B.range_algebra()
    return subalgebra(lattice, B)


def _conditional_slice(p: SMap, atom: int, fallback) -> tuple:
    """f(.|atom) as a value tuple; fallback policy decides the zero-mass case."""
    lat = p.lattice
    mass = p._rows[atom][atom]
    if mass != ZERO:
        return tuple(p._rows[i][atom] / mass for i in range(len(lat.elements)))
    if fallback == "forbid":
        raise ZeroMassConditioner(
            f"conditioning element {lat.elements[atom].name!r} has mass 0",
            witness=lat.elements[atom].name)
    if isinstance(fallback, Mapping):
        state = fallback.get(lat.elements[atom].name)
        if state is None:
            state = fallback.get(atom)
        if state is not None:
            return state._values if isinstance(state, State) else \
                tuple(as_rational(state[e.name]) for e in lat.elements)
    return canonical_fallback(lat, atom)._values


def _merge_support(lattice: FiniteOml, means: list) -> list:
    """Join atoms that share a value; observables need distinct spectra."""
    groups = {}
    for value, el in means:
        groups.setdefault(value, []).append(el)
    return [(value, lattice.join_all(els)) for value, els in groups.items()]


def conditional_expectation(p: SMap, x: Observable, B,
                            fallback="canonical") -> Observable:
    """Project `x` onto the subalgebra `B`.

    The result carries, on each atom a of B, the mean of x under f(.|a);
    atoms with equal means merge into one support element. `B` may be a
    RangeAlgebra, an observable (its range is used), or an element list.
    `fallback` is "canonical", "forbid" (raise on zero-mass atoms), or a
    mapping from atom name to a state for it.
    """
    lat = p.lattice
    alg = _as_range(lat, B)
    means = []
    for a in alg.atoms:
        slice_a = _conditional_slice(p, a, fallback)
        mean = sum((v * slice_a[el.index] for v, el in x.support), ZERO)
        means.append((mean, lat.elements[a]))
    return validate_observable(lat, _merge_support(lat, means))


def oplus(p: SMap, x: Observable, y: Observable, fallback="canonical") -> Observable:
    """Order-sensitive sum: E_p(x | R(y)) + y, formed inside R(y).

    The range of the result is contained in R(y); it collapses further when
    distinct atoms of R(y) end up with the same value.
    """
    lat = p.lattice
    if not same_lattice(lat, x.lattice) or not same_lattice(lat, y.lattice):
        raise MalformedInput("observables and s-map must share one lattice")
    means = []
    for value, el in y.support:
        slice_a = _conditional_slice(p, el.index, fallback)
        mean = sum((v * slice_a[e.index] for v, e in x.support), ZERO)
        means.append((mean + value, el))
    return validate_observable(lat, _merge_support(lat, means))


def sum_compatible(x: Observable, y: Observable) -> Observable:
    """Pointwise sum over the common refinement of two compatible ranges."""
    lat = x.lattice
    if not observables_compatible(x, y):
        bad = next(((a.name, b.name) for _, a in x.support for _, b in y.support
                    if not lat.is_compatible(a, b)), None)
        raise NotCompatible("observables are not compatible", witness=bad)
    pieces = []
    for vx, ex in x.support:
        for vy, ey in y.support:
            cell = lat.meet(ex, ey)
            if cell.index != lat.bottom.index:
                pieces.append((vx + vy, cell))
    return validate_observable(lat, _merge_support(lat, pieces))


def oplus_in_subalgebra(p: SMap, x: Observable, y: Observable, B=None,
                        fallback="canonical") -> Observable:
    """Symmetrized variant: E_p(x|B) + E_p(y|B), summed inside B.

    B defaults to R(y). This realizes the subalgebra-indexed sum the
    surrounding results refer to; both projections land in B, so their
    pointwise sum exists.
    """
    alg = _as_range(p.lattice, y if B is None else B)
    return sum_compatible(conditional_expectation(p, x, alg, fallback),
                          conditional_expectation(p, y, alg, fallback))


@dataclass(frozen=True)
class SumCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class SumPropertyReport:
    checks: tuple
    annotations: tuple

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> SumCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_oplus_properties(p: SMap, x: Observable, y: Observable,
                           B=None) -> SumPropertyReport:
    """Verify the summability laws for one observable pair.

    e1: compatible arguments give compatible sums either way round (vacuous
    otherwise). e2/e3 for the subalgebra variant are checked under this
    artifact's definition of the B-indexed sum. e4 is the double-sum
    identity over both supports.
    """
    lat = p.lattice
    mu = p.mu()
    checks = []
    annotations = []
    for _, el in y.support:
        if mu(el) == ZERO:
            annotations.append(f"conditioning element {el.name!r} has mass 0; "
                               f"canonical fallback used")

    if observables_compatible(x, y):
        ok = observables_compatible(oplus(p, x, y), oplus(p, y, x))
        checks.append(SumCheck("e1_compatible_sums", ok))
    else:
        checks.append(SumCheck("e1_compatible_sums", True,
                               detail="arguments not compatible; vacuous"))

    alg = _as_range(lat, y if B is None else B)
    zxy = oplus_in_subalgebra(p, x, y, alg)
    zyx = oplus_in_subalgebra(p, y, x, alg)
    checks.append(SumCheck("e2_subalgebra_symmetry", zxy == zyx,
                           detail="under the artifact definition of the "
                                  "subalgebra-indexed sum"))

    total = expectation(p, x) + expectation(p, y)
    checks.append(SumCheck("e3_expectation_additivity",
                           expectation(p, oplus(p, x, y)) == total))
    checks.append(SumCheck("e3_subalgebra_expectation",
                           expectation(p, zxy) == total,
                           detail="under the artifact definition of the "
                                  "subalgebra-indexed sum"))

    double = sum((
        (vx + vy) * p._rows[ex.index][ey.index]
        for vx, ex in x.support for vy, ey in y.support), ZERO)
    checks.append(SumCheck("e4_double_sum_identity", double == total))
    return SumPropertyReport(tuple(checks), tuple(annotations))
