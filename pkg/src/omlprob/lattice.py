"""Finite orthomodular lattices: validation, Boolean algebras, horizontal sums.

A lattice is given by explicit tables (an order relation and a complement
map) over a fixed element list, and every axiom is checked exhaustively at
construction time. Validated instances are immutable and safe to share;
all queries afterwards are table lookups.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence, Union

from .errors import OmlprobError

BOTTOM_NAME = "0"
TOP_NAME = "1"


class MalformedInput(OmlprobError):
    """Raw tables are structurally unusable (shape, names, indices)."""


class NotALattice(OmlprobError):
    """Order table is not a bounded lattice (order axiom or missing meet/join)."""


class OrthoNotInvolution(OmlprobError):
    pass


class OrthoNotAntitone(OmlprobError):
    pass


class ComplementNotUnique(OmlprobError):
    """The designated complement fails, or is not the only candidate."""


class OrthomodularLawViolated(OmlprobError):
    pass


class BlockNotBoolean(OmlprobError):
    pass


class TooFewBlocks(OmlprobError):
    pass


class TrivialBlock(OmlprobError):
    """A summand with fewer than two atoms would collapse onto {0, 1}."""


class DuplicateAtomName(OmlprobError):
    pass


class Element(NamedTuple):
    index: int
    name: str

    def __str__(self) -> str:
        return self.name


ElementRef = Union[int, str, Element]


@dataclass(frozen=True)
class Block:
    """Maximal set of pairwise compatible elements, stored as indices."""

    members: frozenset
    is_boolean: bool


class HorizontalSumCheck(NamedTuple):
    is_sum: bool
    witness: Optional[tuple]  # (block_i, block_j, shared element names) when not a sum


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class FiniteOml:
    """A validated finite orthomodular lattice.

    Do not call the constructor directly; build instances through
    `validate_oml`, `boolean_algebra` or `horizontal_sum`.
    """

    def __init__(self, elements, low, up, ortho, meet, join, bottom, top,
                 atom_indices, compat, blocks, block_names):
        self.elements: tuple = elements
        self._name_to_index = {e.name: e.index for e in elements}
        self._low = low      # low[i] = bitmask of {j : j <= i}
        self._up = up        # up[i] = bitmask of {j : i <= j}
        self._ortho = ortho
        self._meet = meet
        self._join = join
        self.bottom: Element = elements[bottom]
        self.top: Element = elements[top]
        self._atom_indices: tuple = atom_indices
        self.atoms: tuple = tuple(elements[i] for i in atom_indices)
        self._compat = compat  # compat[i] = bitmask of elements compatible with i
        self.blocks: tuple = blocks
        self.block_names: tuple = block_names  # aligned with blocks, entries may be None
        self._decompositions = self._compute_decompositions()
        self._ortho_pairs = self._compute_ortho_pairs()
        self._additive_pairs = tuple(
            (i, j, self._meet_join(i, j)) for i, j in self._ortho_pairs
            if i != bottom and j != bottom and i != j
        )
        self._families: Optional[tuple] = None

    # -- lookups ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"FiniteOml({len(self.elements)} elements, {len(self.blocks)} blocks)"

    def index_of(self, el: ElementRef) -> int:
        if isinstance(el, Element):
            if self.elements[el.index] is not el and self.elements[el.index].name != el.name:
                raise KeyError(f"element {el!r} does not belong to this lattice")
            return el.index
        if isinstance(el, int):
            if not 0 <= el < len(self.elements):
                raise KeyError(f"element index {el} out of range")
            return el
        try:
            return self._name_to_index[el]
        except KeyError:
            raise KeyError(f"no element named {el!r}") from None

    def element(self, el: ElementRef) -> Element:
        return self.elements[self.index_of(el)]

    @property
    def names(self) -> tuple:
        return tuple(e.name for e in self.elements)

    # -- order and operations --------------------------------------------

    def leq(self, a: ElementRef, b: ElementRef) -> bool:
        return bool(self._up[self.index_of(a)] >> self.index_of(b) & 1)

    def meet(self, a: ElementRef, b: ElementRef) -> Element:
        return self.elements[self._meet[self.index_of(a)][self.index_of(b)]]

    def join(self, a: ElementRef, b: ElementRef) -> Element:
        return self.elements[self._join[self.index_of(a)][self.index_of(b)]]

    def _meet_join(self, i: int, j: int) -> int:
        return self._join[i][j]

    def join_all(self, els: Iterable[ElementRef]) -> Element:
        acc = self.bottom.index
        for el in els:
            acc = self._join[acc][self.index_of(el)]
        return self.elements[acc]

    def ortho(self, a: ElementRef) -> Element:
        return self.elements[self._ortho[self.index_of(a)]]

    def is_orthogonal(self, a: ElementRef, b: ElementRef) -> bool:
        i, j = self.index_of(a), self.index_of(b)
        return bool(self._up[i] >> self._ortho[j] & 1)

    def is_compatible(self, a: ElementRef, b: ElementRef) -> bool:
        i, j = self.index_of(a), self.index_of(b)
        return bool(self._compat[i] >> j & 1)

    def atom_decompositions(self, a: ElementRef):
        """Distinct sets of pairwise-orthogonal atoms joining to `a`.

        One entry per block that decomposes `a` differently; the bottom
        element yields a single empty set.
        """
        return self._decompositions[self.index_of(a)]

    def block_members(self, block: Block) -> tuple:
        return tuple(self.elements[i] for i in sorted(block.members))

    def block_name(self, position: int) -> Optional[str]:
        return self.block_names[position]

    # -- derived structure -----------------------------------------------

    def _compute_decompositions(self) -> tuple:
        out = []
        for i in range(len(self.elements)):
            if i == self.bottom.index:
                out.append((frozenset(),))
                continue
            seen = []
            for blk in self.blocks:
                if i not in blk.members:
                    continue
                d = frozenset(u for u in self._atom_indices
                              if u in blk.members and self._up[u] >> i & 1)
                joined = self.bottom.index
                for u in sorted(d):
                    joined = self._join[joined][u]
                if joined == i and d not in seen:
                    seen.append(d)
            out.append(tuple(seen))
        return tuple(out)

    def _compute_ortho_pairs(self) -> tuple:
        # unordered orthogonal pairs, bottom included; (0, 0) is the only
        # self-orthogonal pair in any orthomodular lattice
        pairs = []
        n = len(self.elements)
        for i in range(n):
            for j in range(i, n):
                if self._up[i] >> self._ortho[j] & 1:
                    pairs.append((i, j))
        return tuple(pairs)

    def orthogonal_families(self) -> tuple:
        """All sets of two or more pairwise-orthogonal nonzero elements.

        Cached after the first call; used for exhaustive mixture-law checks.
        """
        if self._families is not None:
            return self._families
        n = len(self.elements)
        ortho_mask = [0] * n
        for i in range(n):
            for j in range(n):
                if i != j and j != self.bottom.index and self._up[i] >> self._ortho[j] & 1:
                    ortho_mask[i] |= 1 << j
        families = []

        def extend(chosen: tuple, allowed: int, start: int) -> None:
            if len(chosen) >= 2:
                families.append(chosen)
            m = allowed & ~((1 << start) - 1)
            for v in _bits(m):
                extend(chosen + (v,), allowed & ortho_mask[v], v + 1)

        for first in range(n):
            if first != self.bottom.index:
                extend((first,), ortho_mask[first], first + 1)
        self._families = tuple(families)
        return self._families

    def orthogonal_pairs(self) -> tuple:
        """Unordered orthogonal index pairs (i <= j), bottom included."""
        return self._ortho_pairs

    def additive_triples(self) -> tuple:
        """(i, j, index of i v j) for distinct nonzero orthogonal pairs."""
        return self._additive_pairs

    def block_atoms(self, block: Block) -> tuple:
        return tuple(u for u in self._atom_indices if u in block.members)

    # -- serialization helpers -------------------------------------------

    def leq_table(self) -> list:
        n = len(self.elements)
        return [[bool(self._up[i] >> j & 1) for j in range(n)] for i in range(n)]

    def ortho_table(self) -> dict:
        return {e.name: self.elements[self._ortho[e.index]].name for e in self.elements}


def _structural_equal(a: FiniteOml, b: FiniteOml) -> bool:
    return (a is b) or (a.names == b.names and a._up == b._up and a._ortho == b._ortho)


def same_lattice(a: FiniteOml, b: FiniteOml) -> bool:
    """True when two lattice objects describe the same element tables."""
    return _structural_equal(a, b)


def validate_oml(element_names: Sequence[str],
                 leq: Sequence[Sequence],
                 ortho: Union[Mapping[str, str], Sequence[ElementRef]],
                 block_names: Optional[Mapping[str, Iterable[str]]] = None) -> FiniteOml:
    """Check every orthomodular-lattice axiom on explicit tables.

    `leq[i][j]` states that element i is below element j. `ortho` maps each
    element to its complement, by name or by index. Raises a subclass of
    OmlprobError naming the first violated axiom, with a witness.
    """
    n = len(element_names)
    if n < 2:
        raise NotALattice("need at least two elements (bottom and top distinct)")
    names = [str(x) for x in element_names]
    if len(set(names)) != n:
        dupes = sorted({x for x in names if names.count(x) > 1})
        raise MalformedInput(f"duplicate element names: {dupes}", witness=tuple(dupes))
    if len(leq) != n or any(len(row) != n for row in leq):
        raise MalformedInput(f"leq table must be {n}x{n}")

    up = [0] * n
    for i in range(n):
        for j in range(n):
            if leq[i][j]:
                up[i] |= 1 << j
    low = [0] * n
    for i in range(n):
        for j in _bits(up[i]):
            low[j] |= 1 << i

    for i in range(n):
        if not up[i] >> i & 1:
            raise NotALattice(f"order not reflexive at {names[i]!r}", witness=names[i])
    for i in range(n):
        for j in _bits(up[i]):
            if i != j and up[j] >> i & 1:
                raise NotALattice(f"order not antisymmetric at ({names[i]!r}, {names[j]!r})",
                                  witness=(names[i], names[j]))
            if up[j] & ~up[i]:
                k = next(_bits(up[j] & ~up[i]))
                raise NotALattice(
                    f"order not transitive: {names[i]!r} <= {names[j]!r} <= {names[k]!r}",
                    witness=(names[i], names[j], names[k]))

    full = (1 << n) - 1
    bottoms = [i for i in range(n) if up[i] == full]
    tops = [i for i in range(n) if low[i] == full]
    if len(bottoms) != 1 or len(tops) != 1:
        raise NotALattice("order must have a unique least and greatest element")
    bottom, top = bottoms[0], tops[0]

    for reserved, which in ((BOTTOM_NAME, bottom), (TOP_NAME, top)):
        if reserved in names and names.index(reserved) != which:
            raise MalformedInput(
                f"name {reserved!r} is reserved for the {'least' if which == bottom else 'greatest'} element",
                witness=reserved)

    by_low = {low[i]: i for i in range(n)}
    by_up = {up[i]: i for i in range(n)}
    meet = [[0] * n for _ in range(n)]
    join = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m = by_low.get(low[i] & low[j])
            if m is None:
                raise NotALattice(f"pair ({names[i]!r}, {names[j]!r}) has no meet",
                                  witness=(names[i], names[j]))
            v = by_up.get(up[i] & up[j])
            if v is None:
                raise NotALattice(f"pair ({names[i]!r}, {names[j]!r}) has no join",
                                  witness=(names[i], names[j]))
            meet[i][j] = meet[j][i] = m
            join[i][j] = join[j][i] = v

    if isinstance(ortho, Mapping):
        missing = [x for x in names if x not in ortho]
        if missing:
            raise MalformedInput(f"ortho map missing entries for {missing}", witness=tuple(missing))
        try:
            omap = [names.index(str(ortho[x])) for x in names]
        except ValueError:
            bad = [str(ortho[x]) for x in names if str(ortho[x]) not in names]
            raise MalformedInput(f"ortho map targets unknown elements {bad}", witness=tuple(bad)) from None
    else:
        if len(ortho) != n:
            raise MalformedInput(f"ortho sequence must have {n} entries")
        omap = []
        for x in ortho:
            omap.append(names.index(x) if isinstance(x, str) else int(x))

    for i in range(n):
        if omap[omap[i]] != i:
            raise OrthoNotInvolution(f"complement of complement of {names[i]!r} is not itself",
                                     witness=names[i])
    for i in range(n):
        for j in _bits(up[i]):
            if i != j and not up[omap[j]] >> omap[i] & 1:
                raise OrthoNotAntitone(
                    f"{names[i]!r} <= {names[j]!r} but complements are not reversed",
                    witness=(names[i], names[j]))
    for i in range(n):
        if join[i][omap[i]] != top:
            raise ComplementNotUnique(
                f"{names[omap[i]]!r} does not complement {names[i]!r} (join is not the top)",
                witness=names[i])
    # involution makes the complement map a bijection, so the candidate
    # with ortho(c) = a is unique once the join law above holds

    for i in range(n):
        for j in _bits(up[i]):
            if join[i][meet[omap[i]][j]] != j:
                raise OrthomodularLawViolated(
                    f"{names[i]!r} <= {names[j]!r} but {names[j]!r} != "
                    f"{names[i]!r} v ({names[i]!r}' ^ {names[j]!r})",
                    witness=(names[i], names[j]))

    atom_indices = tuple(i for i in range(n)
                         if i != bottom and low[i] == (1 << bottom | 1 << i))

    compat = [0] * n
    for i in range(n):
        for j in range(i, n):
            ok = (join[meet[i][j]][meet[i][omap[j]]] == i
                  and join[meet[i][j]][meet[omap[i]][j]] == j)
            if ok:
                compat[i] |= 1 << j
                compat[j] |= 1 << i

    blocks = _enumerate_blocks(names, compat, meet, join, omap, n)
    resolved_names = _resolve_block_names(names, blocks, block_names)

    elements = tuple(Element(i, names[i]) for i in range(n))
    return FiniteOml(elements, tuple(low), tuple(up), tuple(omap),
                     tuple(tuple(r) for r in meet), tuple(tuple(r) for r in join),
                     bottom, top, atom_indices, tuple(compat), blocks, resolved_names)


def _enumerate_blocks(names, compat, meet, join, omap, n):
    adj = [compat[i] & ~(1 << i) for i in range(n)]
    cliques: list = []

    def expand(r: int, p: int, x: int) -> None:
        if not p and not x:
            cliques.append(r)
            return
        pivot = max(_bits(p | x), key=lambda v: (adj[v] & p).bit_count())
        for v in _bits(p & ~adj[pivot]):
            vb = 1 << v
            expand(r | vb, p & adj[v], x & adj[v])
            p &= ~vb
            x |= vb

    expand(0, (1 << n) - 1, 0)
    cliques.sort(key=lambda m: tuple(_bits(m)))

    blocks = []
    for mask in cliques:
        members = tuple(_bits(mask))
        for a in members:
            if not mask >> omap[a] & 1:
                raise BlockNotBoolean(f"block not closed under complement at {names[a]!r}",
                                      witness=names[a])
            for b in members:
                if not (mask >> meet[a][b] & 1 and mask >> join[a][b] & 1):
                    raise BlockNotBoolean(
                        f"block not closed under meet/join at ({names[a]!r}, {names[b]!r})",
                        witness=(names[a], names[b]))
        for a in members:
            for b in members:
                for c in members:
                    if meet[a][join[b][c]] != join[meet[a][b]][meet[a][c]]:
                        raise BlockNotBoolean(
                            "block fails distributivity at "
                            f"({names[a]!r}, {names[b]!r}, {names[c]!r})",
                            witness=(names[a], names[b], names[c]))
        blocks.append(Block(members=frozenset(members), is_boolean=True))
    return tuple(blocks)


def _resolve_block_names(names, blocks, block_names):
    if not block_names:
        return (None,) * len(blocks)
    atom_sets = {label: frozenset(str(a) for a in atoms)
                 for label, atoms in block_names.items()}
    resolved = []
    for blk in blocks:
        member_names = frozenset(names[i] for i in blk.members)
        match = [label for label, atoms in atom_sets.items() if atoms <= member_names]
        resolved.append(match[0] if len(match) == 1 else None)
    return tuple(resolved)


def _composite_name(atom_names: Sequence[str], subset: Sequence[int], total: int) -> str:
    k = len(subset)
    if k == 0:
        return BOTTOM_NAME
    if k == total:
        return TOP_NAME
    if k == 1:
        return atom_names[subset[0]]
    if k == total - 1:
        missing = next(i for i in range(total) if i not in subset)
        return atom_names[missing] + "'"
    return "|".join(atom_names[i] for i in subset)


def boolean_algebra(atom_names: Sequence[str]) -> FiniteOml:
    """Powerset algebra over the given atoms.

    Complements of atoms are auto-named with a trailing prime; other
    composite elements join their atom names with '|'. The labels '0' and
    '1' are reserved for the bounds.
    """
    atoms = [str(a) for a in atom_names]
    if not atoms:
        raise MalformedInput("a Boolean algebra needs at least one atom")
    if len(set(atoms)) != len(atoms):
        dupes = sorted({a for a in atoms if atoms.count(a) > 1})
        raise DuplicateAtomName(f"duplicate atom names: {dupes}", witness=tuple(dupes))
    for a in atoms:
        if a in (BOTTOM_NAME, TOP_NAME):
            raise MalformedInput(f"atom may not use reserved name {a!r}", witness=a)
        if "|" in a:
            raise MalformedInput(f"atom name {a!r} may not contain '|'", witness=a)

    k = len(atoms)
    subsets = sorted(range(1 << k), key=lambda s: (s.bit_count(), s))
    names = [_composite_name(atoms, tuple(_bits(s)), k) for s in subsets]
    if len(set(names)) != len(names):
        dupes = sorted({x for x in names if names.count(x) > 1})
        raise DuplicateAtomName(
            f"atom names collide with generated element names: {dupes}", witness=tuple(dupes))
    pos = {s: i for i, s in enumerate(subsets)}
    n = len(subsets)
    leq = [[False] * n for _ in range(n)]
    for i, s in enumerate(subsets):
        for j, t in enumerate(subsets):
            leq[i][j] = (s & ~t) == 0
    full = (1 << k) - 1
    ortho = [pos[full ^ s] for s in subsets]
    return validate_oml(names, leq, ortho)


def horizontal_sum(summands: Sequence[FiniteOml],
                   names: Optional[Sequence[str]] = None) -> FiniteOml:
    """Glue Boolean algebras at their bounds, keeping interiors disjoint.

    Every summand must be a Boolean algebra with at least two atoms, and
    interior element names must not collide across summands.
    """
    if len(summands) < 2:
        raise TooFewBlocks("a horizontal sum needs at least two summands")
    if names is not None and len(names) != len(summands):
        raise MalformedInput("one name per summand expected")
    for pos, b in enumerate(summands):
        if len(b.blocks) != 1:
            raise BlockNotBoolean(f"summand {pos} is not a Boolean algebra", witness=pos)
        if len(b.atoms) < 2:
            raise TrivialBlock(f"summand {pos} has fewer than two atoms", witness=pos)

    out_names = [BOTTOM_NAME]
    origin = []  # (summand position, index inside summand) for interior elements
    for pos, b in enumerate(summands):
        for e in b.elements:
            if e.index in (b.bottom.index, b.top.index):
                continue
            if e.name in out_names:
                raise DuplicateAtomName(
                    f"element name {e.name!r} appears in more than one summand",
                    witness=e.name)
            out_names.append(e.name)
            origin.append((pos, e.index))
    out_names.append(TOP_NAME)

    n = len(out_names)
    bottom, top = 0, n - 1
    leq = [[False] * n for _ in range(n)]
    for j in range(n):
        leq[bottom][j] = True
        leq[j][top] = True
        leq[j][j] = True
    local = {}  # (summand pos, local index) -> global index
    for g, (pos, li) in enumerate(origin, start=1):
        local[(pos, li)] = g
    for g1, (p1, i1) in enumerate(origin, start=1):
        for g2, (p2, i2) in enumerate(origin, start=1):
            if p1 == p2 and summands[p1].leq(i1, i2):
                leq[g1][g2] = True

    ortho = [0] * n
    ortho[bottom], ortho[top] = top, bottom
    for g, (pos, li) in enumerate(origin, start=1):
        b = summands[pos]
        co = b._ortho[li]
        ortho[g] = top if co == b.top.index else (bottom if co == b.bottom.index else local[(pos, co)])

    block_labels = None
    if names is not None:
        block_labels = {}
        for pos, (label, b) in enumerate(zip(names, summands)):
            block_labels[str(label)] = [e.name for e in b.atoms]

    return validate_oml(out_names, leq, ortho, block_names=block_labels)


def horizontal_sum_from_atoms(spec: Sequence) -> FiniteOml:
    """Build a horizontal sum from (block name, atom names) pairs."""
    labels = [str(label) for label, _ in spec]
    if len(set(labels)) != len(labels):
        raise MalformedInput("block names must be distinct", witness=tuple(labels))
    summands = [boolean_algebra(atoms) for _, atoms in spec]
    return horizontal_sum(summands, names=labels)


def is_horizontal_sum(lat: FiniteOml) -> HorizontalSumCheck:
    """Decide whether the blocks pairwise share only the bounds.

    A single Boolean block is reported as not a horizontal sum; the witness
    on failure names two blocks and the extra shared elements.
    """
    if len(lat.blocks) < 2:
        return HorizontalSumCheck(False, None)
    bounds = {lat.bottom.index, lat.top.index}
    for i in range(len(lat.blocks)):
        for j in range(i + 1, len(lat.blocks)):
            shared = lat.blocks[i].members & lat.blocks[j].members
            if shared != bounds:
                witness = (i, j, tuple(lat.elements[k].name for k in sorted(shared)))
                return HorizontalSumCheck(False, witness)
    return HorizontalSumCheck(True, None)


def is_distributive(lat: FiniteOml) -> bool:
    """Exhaustive distributivity test over all element triples."""
    n = len(lat.elements)
    meet, join = lat._meet, lat._join
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if meet[a][join[b][c]] != join[meet[a][b]][meet[a][c]]:
                    return False
    return True
