"""States, s-maps, and conditional states with exact arithmetic.

Every probability is a Fraction and every axiom (additivity, the s-map
conditions s1-s3, the conditional-state mixture law) is an equality
checked exhaustively at construction time. No tolerances anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

from .errors import OmlprobError
from .lattice import ElementRef, FiniteOml, MalformedInput, same_lattice
from .rationals import as_rational

ZERO = Fraction(0)
ONE = Fraction(1)


class OutOfRange(OmlprobError):
    pass


class NotNormalized(OmlprobError):
    pass


class AdditivityViolated(OmlprobError):
    pass


class S1Violated(OmlprobError):
    pass


class S2Violated(OmlprobError):
    """Nonzero value on an orthogonal pair."""


class S3Violated(OmlprobError):
    """Additivity over an orthogonal join fails in one argument."""


class P2Violated(OmlprobError):
    """Some p(a, b) exceeds its diagonal bound p(a, a)."""


class DecompositionMismatch(OmlprobError):
    """Two atom decompositions of the same element disagree on a value."""


class MissingAtomPair(OmlprobError):
    pass


class C1Violated(OmlprobError):
    """Some slice f(.|b) is not a state."""


class C2Violated(OmlprobError):
    pass


class C3Violated(OmlprobError):
    """Mixture law over an orthogonal family of conditioners fails."""


class NoFallbackState(OmlprobError):
    """No usable state with mass 1 on the requested element."""


def _full_values(lattice: FiniteOml, raw: Mapping, what: str) -> tuple:
    n = len(lattice.elements)
    out = [None] * n
    for key, value in raw.items():
        try:
            idx = lattice.index_of(key)
        except KeyError as exc:
            raise MalformedInput(f"{what}: {exc.args[0]}", witness=key) from None
        try:
            out[idx] = as_rational(value)
        except ValueError as exc:
            raise MalformedInput(f"{what} at {lattice.elements[idx].name!r}: {exc}",
                                 witness=lattice.elements[idx].name) from None
    missing = [lattice.elements[i].name for i in range(n) if out[i] is None]
    if missing:
        raise MalformedInput(f"{what}: missing entries for {missing}",
                             witness=tuple(missing))
    return tuple(out)


def _check_state_values(lattice: FiniteOml, vals: tuple) -> None:
    for e in lattice.elements:
        v = vals[e.index]
        if v < ZERO or v > ONE:
            raise OutOfRange(f"value at {e.name!r} is {v}, outside [0, 1]",
                             witness=(e.name, v))
    top_value = vals[lattice.top.index]
    if top_value != ONE:
        raise NotNormalized(f"value at the top is {top_value}, not 1", witness=top_value)
    join = lattice._join
    for i, j in lattice.orthogonal_pairs():
        k = join[i][j]
        if vals[k] != vals[i] + vals[j]:
            ni, nj, nk = (lattice.elements[x].name for x in (i, j, k))
            raise AdditivityViolated(
                f"m({nk}) = {vals[k]} but m({ni}) + m({nj}) = {vals[i] + vals[j]}",
                witness=(ni, nj))


class State:
    """Normalized [0,1]-valued map on a lattice, additive on orthogonal pairs.

    Build through validate_state; instances are immutable.
    """

    def __init__(self, lattice: FiniteOml, values: tuple):
        self.lattice = lattice
        self._values = values

    def __call__(self, el: ElementRef) -> Fraction:
        return self._values[self.lattice.index_of(el)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, State)
                and same_lattice(self.lattice, other.lattice)
                and self._values == other._values)

    def __repr__(self) -> str:
        return f"State({len(self._values)} values)"

    def as_dict(self) -> dict:
        return {e.name: self._values[e.index] for e in self.lattice.elements}


def validate_state(lattice: FiniteOml, values) -> State:
    """Check normalization and additivity over every orthogonal pair."""
    if isinstance(values, State):
        if not same_lattice(values.lattice, lattice):
            raise MalformedInput("state belongs to a different lattice")
        vals = values._values
    else:
        vals = _full_values(lattice, values, "state values")
    _check_state_values(lattice, vals)
    return State(lattice, vals)


class SMap:
    """Bivariate map on L x L: a possibly non-symmetric joint distribution.

    Build through validate_smap or extend_smap_from_atom_table. The
    order of arguments carries meaning: p(a, b) and p(b, a) may differ.
    """

    def __init__(self, lattice: FiniteOml, rows: tuple):
        self.lattice = lattice
        self._rows = rows
        self._mu: Optional[State] = None

    def __call__(self, a: ElementRef, b: ElementRef) -> Fraction:
        return self._rows[self.lattice.index_of(a)][self.lattice.index_of(b)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, SMap)
                and same_lattice(self.lattice, other.lattice)
                and self._rows == other._rows)

    def __repr__(self) -> str:
        return f"SMap({len(self._rows)}x{len(self._rows)})"

    def mu(self) -> State:
        """Diagonal state a -> p(a, a); equals p(a, 1) and p(1, a)."""
        if self._mu is None:
            self._mu = State(self.lattice, tuple(self._rows[i][i]
                                                 for i in range(len(self._rows))))
        return self._mu

    def as_dict(self) -> dict:
        names = self.lattice.names
        return {na: {nb: self._rows[i][j] for j, nb in enumerate(names)}
                for i, na in enumerate(names)}


def _validate_rows(lattice: FiniteOml, rows: tuple) -> SMap:
    # scale to a common denominator once; all later checks are integer
    # equalities on exact values
    n = len(lattice.elements)
    den = 1
    for row in rows:
        for v in row:
            den = math.lcm(den, v.denominator)
    scaled = [[v.numerator * (den // v.denominator) for v in row] for row in rows]
    names = lattice.names

    for i in range(n):
        for j in range(n):
            if not 0 <= scaled[i][j] <= den:
                raise OutOfRange(
                    f"p({names[i]}, {names[j]}) = {rows[i][j]}, outside [0, 1]",
                    witness=(names[i], names[j], rows[i][j]))
    t = lattice.top.index
    if scaled[t][t] != den:
        raise S1Violated(f"p(1, 1) = {rows[t][t]}, not 1", witness=rows[t][t])
    for i, j in lattice.orthogonal_pairs():
        for a, b in ((i, j), (j, i)):
            if scaled[a][b]:
                raise S2Violated(
                    f"{names[a]!r} is orthogonal to {names[b]!r} but "
                    f"p({names[a]}, {names[b]}) = {rows[a][b]}, not 0",
                    witness=(names[a], names[b]))
    for i, j, k in lattice.additive_triples():
        for b in range(n):
            if scaled[k][b] != scaled[i][b] + scaled[j][b]:
                raise S3Violated(
                    f"p({names[k]}, {names[b]}) = {rows[k][b]} but "
                    f"p({names[i]}, .) + p({names[j]}, .) = {rows[i][b] + rows[j][b]}",
                    witness=((names[i], names[j]), names[b]))
            if scaled[b][k] != scaled[b][i] + scaled[b][j]:
                raise S3Violated(
                    f"p({names[b]}, {names[k]}) = {rows[b][k]} but "
                    f"p(., {names[i]}) + p(., {names[j]}) = {rows[b][i] + rows[b][j]}",
                    witness=(names[b], (names[i], names[j])))
    for i in range(n):
        # s2 + s3 force the marginal identity; a failure here is a bug
        assert scaled[i][i] == scaled[i][t] == scaled[t][i]
    for i in range(n):
        for j in range(n):
            if scaled[i][j] > scaled[i][i]:
                raise P2Violated(
                    f"p({names[i]}, {names[j]}) = {rows[i][j]} exceeds "
                    f"p({names[i]}, {names[i]}) = {rows[i][i]}",
                    witness=(names[i], names[j]))
    return SMap(lattice, rows)


def validate_smap(lattice: FiniteOml, table) -> SMap:
    """Check s1-s3 exhaustively on a full table, plus the p2 consequence.

    `table` maps first-argument element to a mapping over second-argument
    elements, or is an already-built SMap to re-validate.
    """
    if isinstance(table, SMap):
        if not same_lattice(table.lattice, lattice):
            raise MalformedInput("s-map belongs to a different lattice")
        return _validate_rows(lattice, table._rows)
    n = len(lattice.elements)
    raw_rows = [None] * n
    for key, row in table.items():
        try:
            idx = lattice.index_of(key)
        except KeyError as exc:
            raise MalformedInput(f"s-map row: {exc.args[0]}", witness=key) from None
        raw_rows[idx] = row
    missing = [lattice.elements[i].name for i in range(n) if raw_rows[i] is None]
    if missing:
        raise MalformedInput(f"s-map table: missing rows for {missing}",
                             witness=tuple(missing))
    rows = tuple(_full_values(lattice, raw_rows[i],
                              f"s-map row {lattice.elements[i].name!r}")
                 for i in range(n))
    return _validate_rows(lattice, rows)


def extend_smap_from_atom_table(lattice: FiniteOml, atom_pair_values,
                                marginal) -> SMap:
    """Grow a full s-map from values on atom pairs plus an atom marginal.

    Every element's value is the sum of atom-pair values over its atom
    decompositions; elements decomposing in more than one block (the glued
    parts of a pasted lattice) must give the same sum either way. The atom
    table's diagonal must repeat the marginal.
    """
    atom_idx = list(lattice._atom_indices)
    atom_set = set(atom_idx)
    names = lattice.names

    tbl = {}
    for key, row in atom_pair_values.items():
        u = lattice.index_of(key)
        if u not in atom_set:
            raise MalformedInput(f"atom table row {names[u]!r} is not an atom",
                                 witness=names[u])
        for inner, value in row.items():
            v = lattice.index_of(inner)
            if v not in atom_set:
                raise MalformedInput(f"atom table column {names[v]!r} is not an atom",
                                     witness=names[v])
            try:
                tbl[(u, v)] = as_rational(value)
            except ValueError as exc:
                raise MalformedInput(
                    f"atom table at ({names[u]}, {names[v]}): {exc}",
                    witness=(names[u], names[v])) from None
    for u in atom_idx:
        for v in atom_idx:
            if (u, v) not in tbl:
                raise MissingAtomPair(f"no value for atom pair ({names[u]}, {names[v]})",
                                      witness=(names[u], names[v]))

    if isinstance(marginal, State):
        marg = {u: marginal._values[u] for u in atom_idx}
        extra = {}
    else:
        marg, extra = {}, {}
        for key, value in marginal.items():
            idx = lattice.index_of(key)
            try:
                (marg if idx in atom_set else extra)[idx] = as_rational(value)
            except ValueError as exc:
                raise MalformedInput(f"marginal at {names[idx]!r}: {exc}",
                                     witness=names[idx]) from None
        missing = [names[u] for u in atom_idx if u not in marg]
        if missing:
            raise MalformedInput(f"marginal: missing atoms {missing}",
                                 witness=tuple(missing))
    for u in atom_idx:
        if tbl[(u, u)] != marg[u]:
            raise DecompositionMismatch(
                f"atom table diagonal at {names[u]!r} is {tbl[(u, u)]} "
                f"but the marginal says {marg[u]}",
                witness=(names[u], tbl[(u, u)], marg[u]))

    n = len(lattice.elements)
    decs = [tuple(tuple(sorted(d)) for d in lattice.atom_decompositions(i))
            for i in range(n)]
    rows = []
    for x in range(n):
        row = []
        for y in range(n):
            sums = [[sum((tbl[(u, v)] for u in dx for v in dy), ZERO)
                     for dy in decs[y]] for dx in decs[x]]
            first = sums[0][0]
            for r, by_dy in enumerate(sums):
                for c, s in enumerate(by_dy):
                    if s == first:
                        continue
                    if sums[0][c] != s:
                        raise DecompositionMismatch(
                            f"decompositions of {names[x]!r} disagree at "
                            f"p({names[x]}, {names[y]}): {sums[0][c]} vs {s}",
                            witness=(names[x], sums[0][c], s))
                    raise DecompositionMismatch(
                        f"decompositions of {names[y]!r} disagree at "
                        f"p({names[x]}, {names[y]}): {by_dy[0]} vs {s}",
                        witness=(names[y], by_dy[0], s))
            row.append(first)
        rows.append(tuple(row))

    for idx, value in extra.items():
        if rows[idx][idx] != value:
            raise DecompositionMismatch(
                f"marginal at {names[idx]!r} is {value} but the atom table "
                f"extends to {rows[idx][idx]}",
                witness=(names[idx], value, rows[idx][idx]))
    return _validate_rows(lattice, tuple(rows))


def canonical_fallback(lattice: FiniteOml, b: ElementRef) -> State:
    """Deterministic state with mass 1 on `b`.

    Mass is spread uniformly over b's atom decomposition in the first block
    containing it; each further block keeps whatever its already-determined
    shared elements dictate and spreads the remainder uniformly over its
    other atoms.
    """
    bi = lattice.index_of(b)
    name = lattice.elements[bi].name
    if bi == lattice.bottom.index:
        raise NoFallbackState("no state puts mass 1 on the bottom element",
                              witness=name)
    dec = set(lattice.atom_decompositions(bi)[0])
    seed = next(blk for blk in lattice.blocks
                if bi in blk.members and dec <= blk.members)
    order = [seed] + [blk for blk in lattice.blocks if blk is not seed]

    val = {}
    up = lattice._up
    for pos, blk in enumerate(order):
        batoms = lattice.block_atoms(blk)
        if pos == 0:
            share = Fraction(1, len(dec))
            for u in batoms:
                val[u] = share if u in dec else ZERO
        else:
            known = sum((val[u] for u in batoms if u in val), ZERO)
            rest = [u for u in batoms if u not in val]
            leftover = ONE - known
            if leftover < ZERO or (not rest and leftover != ZERO):
                raise NoFallbackState(
                    f"canonical state for {name!r} cannot balance a block "
                    f"(leftover mass {leftover})", witness=name)
            for u in rest:
                val[u] = leftover / len(rest)
        for e in blk.members:
            v = sum((val[u] for u in batoms if up[u] >> e & 1), ZERO)
            if e in val and val[e] != v:
                raise NoFallbackState(
                    f"canonical state for {name!r} is inconsistent on the "
                    f"shared element {lattice.elements[e].name!r}", witness=name)
            val[e] = v
    try:
        state = validate_state(lattice, val)
    except OmlprobError as exc:
        raise NoFallbackState(f"canonical state for {name!r} failed validation: {exc}",
                              witness=name) from exc
    if state(bi) != ONE:
        raise NoFallbackState(f"canonical state for {name!r} carries mass "
                              f"{state(bi)} on it, not 1", witness=name)
    return state


class ConditionalState:
    """Table f(a|b) over conditioners b != 0; every slice is a state.

    fallback_states maps the name of each zero-mass conditioner to the
    state that was chosen for its slice.
    """

    def __init__(self, lattice: FiniteOml, cols: tuple, fallback_states: dict):
        self.lattice = lattice
        self._cols = cols  # cols[b] = tuple over a of f(a|b); None at the bottom
        self.fallback_states = fallback_states

    def __call__(self, a: ElementRef, b: ElementRef) -> Fraction:
        ib = self.lattice.index_of(b)
        if ib == self.lattice.bottom.index:
            raise MalformedInput("cannot condition on the bottom element")
        return self._cols[ib][self.lattice.index_of(a)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, ConditionalState)
                and same_lattice(self.lattice, other.lattice)
                and self._cols == other._cols)

    def __repr__(self) -> str:
        return f"ConditionalState({len(self._cols)} conditioners)"

    def as_dict(self) -> dict:
        names = self.lattice.names
        return {nb: {na: self._cols[j][i] for i, na in enumerate(names)}
                for j, nb in enumerate(names) if self._cols[j] is not None}


def validate_conditional_state(lattice: FiniteOml, values,
                               fallback_states: Optional[dict] = None) -> ConditionalState:
    """Check c1 (slices are states), c2 (f(b|b) = 1), and the mixture law c3.

    `values` maps conditioner b to a mapping a -> f(a|b), for every b
    except the bottom; or is a ConditionalState to re-validate.
    """
    n = len(lattice.elements)
    bottom = lattice.bottom.index
    names = lattice.names
    if isinstance(values, ConditionalState):
        if not same_lattice(values.lattice, lattice):
            raise MalformedInput("conditional state belongs to a different lattice")
        cols = values._cols
        fallback_states = dict(values.fallback_states) if fallback_states is None \
            else fallback_states
    else:
        raw = [None] * n
        for key, col in values.items():
            idx = lattice.index_of(key)
            if idx == bottom:
                raise MalformedInput("the bottom element cannot be a conditioner")
            raw[idx] = col
        missing = [names[i] for i in range(n) if raw[i] is None and i != bottom]
        if missing:
            raise MalformedInput(f"conditional table: missing conditioners {missing}",
                                 witness=tuple(missing))
        cols = tuple(None if i == bottom
                     else _full_values(lattice, raw[i], f"slice given {names[i]!r}")
                     for i in range(n))

    for j in range(n):
        if j == bottom:
            continue
        try:
            _check_state_values(lattice, cols[j])
        except (OutOfRange, NotNormalized, AdditivityViolated) as exc:
            raise C1Violated(f"slice f(.|{names[j]}) is not a state: {exc}",
                             witness=(names[j], exc.witness)) from exc
        if cols[j][j] != ONE:
            raise C2Violated(f"f({names[j]}|{names[j]}) = {cols[j][j]}, not 1",
                             witness=names[j])

    join = lattice._join
    for family in lattice.orthogonal_families():
        v = bottom
        for i in family:
            v = join[v][i]
        col_v = cols[v]
        weights = [cols[v][i] for i in family]
        for b in range(n):
            mix = sum((cols[i][b] * w for i, w in zip(family, weights)), ZERO)
            if col_v[b] != mix:
                fam_names = tuple(names[i] for i in family)
                raise C3Violated(
                    f"f({names[b]}|{names[v]}) = {col_v[b]} but the mixture over "
                    f"{fam_names} gives {mix}",
                    witness=(names[b], fam_names))
    return ConditionalState(lattice, cols, dict(fallback_states or {}))


def conditional_from_smap(p: SMap, fallback: Optional[Mapping] = None) -> ConditionalState:
    """Slice an s-map into f(a|b) = p(a, b) / p(b, b).

    Zero-mass conditioners take the state supplied in `fallback` (a mapping
    from element to State or raw state values) or, absent that, the
    canonical fallback. The result is fully re-validated (c1-c3).
    """
    lat = p.lattice
    n = len(lat.elements)
    bottom = lat.bottom.index
    mu = p.mu()
    fb_by_index = {}
    for key, st in (fallback or {}).items():
        fb_by_index[lat.index_of(key)] = st

    cols = [None] * n
    fallback_states = {}
    for j in range(n):
        if j == bottom:
            continue
        mass = mu._values[j]
        if mass != ZERO:
            cols[j] = tuple(p._rows[i][j] / mass for i in range(n))
            continue
        if j in fb_by_index:
            m_b = fb_by_index[j]
            if not isinstance(m_b, State):
                m_b = validate_state(lat, m_b)
            if m_b(j) != ONE:
                raise NoFallbackState(
                    f"supplied fallback for {lat.elements[j].name!r} carries mass "
                    f"{m_b(j)} on it, not 1", witness=lat.elements[j].name)
        else:
            m_b = canonical_fallback(lat, j)
        cols[j] = m_b._values
        fallback_states[lat.elements[j].name] = m_b
    return validate_conditional_state(lat, ConditionalState(lat, tuple(cols),
                                                            fallback_states))


def smap_from_conditional(f: ConditionalState) -> SMap:
    """Rebuild an s-map as p(a, b) = f(a|b) f(b|1); validates the result."""
    lat = f.lattice
    n = len(lat.elements)
    bottom, top = lat.bottom.index, lat.top.index
    prior = f._cols[top]
    rows = tuple(tuple(ZERO if j == bottom else f._cols[j][i] * prior[j]
                       for j in range(n))
                 for i in range(n))
    return _validate_rows(lat, rows)


@dataclass(frozen=True)
class IndependenceResult:
    """Outcome of the product test p(b, a) = p(b, b) p(a, a).

    `indeterminate` marks a zero-mass conditioning element, where the
    conditional-state formulation depends on the fallback choice.
    """

    independent: bool
    lhs: Fraction
    rhs: Fraction
    indeterminate: bool = False
    note: Optional[str] = None

    def __bool__(self) -> bool:
        return self.independent


def is_independent(p: SMap, b: ElementRef, a: ElementRef) -> IndependenceResult:
    """Whether `b` is independent of `a` under p (order matters)."""
    lat = p.lattice
    ib, ia = lat.index_of(b), lat.index_of(a)
    mu = p.mu()
    lhs = p._rows[ib][ia]
    rhs = mu._values[ib] * mu._values[ia]
    if mu._values[ia] == ZERO:
        return IndependenceResult(lhs == rhs, lhs, rhs, indeterminate=True,
                                  note="conditioning element has zero mass; the "
                                       "conditional verdict depends on the fallback state")
    return IndependenceResult(lhs == rhs, lhs, rhs)


@dataclass(frozen=True)
class CausalityReport:
    """Exhaustive order-sensitivity scan of an s-map.

    causal_witnesses: unordered pairs with p(a, b) != p(b, a), both values.
    dependence_witnesses: pairs where exactly one direction passes the
    product test; the stated values are the failing direction's sides.
    jauch_piron_notes: pairs of elements both carrying mass 1.
    annotations: pairs skipped as fallback-dependent (zero mass).
    """

    classification: str
    causal_witnesses: tuple
    dependence_witnesses: tuple
    jauch_piron_notes: tuple
    annotations: tuple

    @property
    def is_causal(self) -> bool:
        return self.classification in ("causal", "strongly_causal")


def classify_causality(p: SMap) -> CausalityReport:
    """Classify an s-map as symmetric, causal, or strongly causal.

    Scans every unordered pair of elements other than the bounds: the
    bounds satisfy p(x, 1) = p(1, x) = p(x, x) and p(x, 0) = 0 on any
    validated s-map, so they can witness nothing.
    """
    lat = p.lattice
    names = lat.names
    n = len(names)
    skip = {lat.bottom.index, lat.top.index}
    mu = p.mu()._values
    rows = p._rows

    causal = []
    one_way = []
    annotations = []
    for i in range(n):
        if i in skip:
            continue
        for j in range(i + 1, n):
            if j in skip:
                continue
            if rows[i][j] != rows[j][i]:
                causal.append((names[i], names[j], rows[i][j], rows[j][i]))
            if mu[i] == ZERO or mu[j] == ZERO:
                annotations.append(
                    f"pair ({names[i]}, {names[j]}) skipped in the dependence scan: "
                    f"zero mass makes the verdict fallback-dependent")
                continue
            ind_ij = rows[i][j] == mu[i] * mu[j]  # i independent of j
            ind_ji = rows[j][i] == mu[j] * mu[i]
            if ind_ij != ind_ji:
                if ind_ji:
                    direction = f"{names[j]} independent of {names[i]}"
                    lhs, rhs = rows[i][j], mu[i] * mu[j]
                else:
                    direction = f"{names[i]} independent of {names[j]}"
                    lhs, rhs = rows[j][i], mu[j] * mu[i]
                one_way.append((names[i], names[j], direction, lhs, rhs))

    heavy = [i for i in range(n) if mu[i] == ONE]
    jp_notes = tuple((names[i], names[j]) for i in heavy for j in heavy if i <= j)

    if not causal:
        classification = "symmetric"
    elif one_way:
        classification = "strongly_causal"
    else:
        classification = "causal"
    return CausalityReport(classification, tuple(causal), tuple(one_way),
                           jp_notes, tuple(annotations))


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    witness: Optional[tuple] = None
    detail: str = ""


@dataclass(frozen=True)
class SMapPropertyReport:
    checks: tuple

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> PropertyCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_smap_properties(p: SMap) -> SMapPropertyReport:
    """Report on the derived s-map properties.

    Covers: the diagonal is a state; p(a, b) <= p(a, a); compatible pairs
    reduce to the meet's mass; the product test matches the conditional
    formulation wherever the conditioner has mass; and pairs of mass-1
    elements force symmetry (the Jauch-Piron property).
    """
    lat = p.lattice
    names = lat.names
    n = len(names)
    rows = p._rows
    mu = p.mu()._values
    checks = []

    try:
        _check_state_values(lat, mu)
        checks.append(PropertyCheck("diagonal_is_state", True))
    except (OutOfRange, NotNormalized, AdditivityViolated) as exc:
        checks.append(PropertyCheck("diagonal_is_state", False, witness=(exc.witness,),
                                    detail=str(exc)))

    bad = next(((names[i], names[j]) for i in range(n) for j in range(n)
                if rows[i][j] > rows[i][i]), None)
    checks.append(PropertyCheck("first_argument_bound", bad is None, witness=bad))

    bad = None
    for i in range(n):
        for j in range(n):
            if lat._compat[i] >> j & 1 and rows[i][j] != mu[lat._meet[i][j]]:
                bad = (names[i], names[j], rows[i][j], mu[lat._meet[i][j]])
                break
        if bad:
            break
    checks.append(PropertyCheck("compatible_pairs_reduce_to_meet", bad is None,
                                witness=bad))

    bad = None
    for i in range(n):
        for j in range(n):
            if mu[j] == ZERO:
                continue
            via_conditional = rows[i][j] / mu[j] == mu[i]
            via_product = rows[i][j] == mu[i] * mu[j]
            if via_conditional != via_product:
                bad = (names[i], names[j])
                break
        if bad:
            break
    checks.append(PropertyCheck("independence_formulations_agree", bad is None,
                                witness=bad))

    bad = None
    heavy = [i for i in range(n) if mu[i] == ONE]
    for i in heavy:
        for j in heavy:
            if rows[i][j] != ONE or rows[j][i] != ONE:
                bad = (names[i], names[j], rows[i][j], rows[j][i])
                break
        if bad:
            break
        asym = next((k for k in range(n) if rows[i][k] != rows[k][i]), None)
        if asym is not None:
            bad = (names[i], names[asym], rows[i][asym], rows[asym][i])
            break
    checks.append(PropertyCheck("jauch_piron", bad is None, witness=bad,
                                detail="" if bad is None else
                                "a mass-1 element fails to symmetrize"))
    return SMapPropertyReport(tuple(checks))
