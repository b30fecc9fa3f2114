"""Seeded random lattices, s-maps, and observables for property suites.

Instances are exact by construction: block marginals are integer
compositions of one common denominator, and every ordered cross-block pair
gets an integer transportation table with those marginals, so assembled
atom tables always extend to valid s-maps. The two tables of an ordered
block pair are sampled independently, which makes order-dependent
instances the normal case rather than a corner case.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .lattice import FiniteOml, horizontal_sum_from_atoms
from .observables import Observable, validate_observable
from .states import SMap, extend_smap_from_atom_table

_BLOCK_LETTERS = "abcdefgh"
_DENOMINATORS = (8, 12, 20, 24, 30)


@lru_cache(maxsize=None)
def block_skeleton(shape: tuple) -> FiniteOml:
    """Horizontal sum with the given per-block atom counts, cached by shape."""
    spec = [(f"B{i + 1}", [f"{_BLOCK_LETTERS[i]}{j + 1}" for j in range(k)])
            for i, k in enumerate(shape)]
    return horizontal_sum_from_atoms(spec)


def random_shape(rng: random.Random, max_blocks: int = 4,
                 max_atoms: int = 4) -> tuple:
    """2..max_blocks blocks of 2..max_atoms atoms, sorted for cache reuse."""
    return tuple(sorted(rng.randint(2, max_atoms)
                        for _ in range(rng.randint(2, max_blocks))))


def _composition(rng: random.Random, total: int, parts: int) -> list:
    """Non-negative integers summing to `total`, zeros included."""
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    prev, out = 0, []
    for c in cuts + [total]:
        out.append(c - prev)
        prev = c
    return out


def _transport(rng: random.Random, row_sums: list, col_sums: list) -> list:
    """Random integer matrix with the given row and column sums.

    A shuffled corner rule reaches one vertex of the transportation
    polytope; 2x2 exchange moves then walk the interior.
    """
    nr, nc = len(row_sums), len(col_sums)
    cells = [[0] * nc for _ in range(nr)]
    row_order = list(range(nr))
    col_order = list(range(nc))
    rng.shuffle(row_order)
    rng.shuffle(col_order)
    left_r = list(row_sums)
    left_c = list(col_sums)
    ri = ci = 0
    while ri < nr and ci < nc:
        r, c = row_order[ri], col_order[ci]
        step = min(left_r[r], left_c[c])
        cells[r][c] += step
        left_r[r] -= step
        left_c[c] -= step
        if left_r[r] == 0:
            ri += 1
        if left_c[c] == 0:
            ci += 1
    if nr >= 2 and nc >= 2:
        for _ in range(4 * nr * nc):
            r1, r2 = rng.sample(range(nr), 2)
            c1, c2 = rng.sample(range(nc), 2)
            room = min(cells[r1][c1], cells[r2][c2])
            if room == 0:
                continue
            step = rng.randint(1, room)
            cells[r1][c1] -= step
            cells[r2][c2] -= step
            cells[r1][c2] += step
            cells[r2][c1] += step
    return cells


def random_smap(rng: random.Random, lattice: FiniteOml,
                denominator: Optional[int] = None) -> SMap:
    """Valid s-map with block marginals over one common denominator."""
    den = rng.choice(_DENOMINATORS) if denominator is None else denominator
    block_names = [[lattice.elements[i].name for i in lattice.block_atoms(b)]
                   for b in lattice.blocks]
    weight = {}
    for names in block_names:
        for name, w in zip(names, _composition(rng, den, len(names))):
            weight[name] = w

    table = {}
    for bi, rows in enumerate(block_names):
        for bj, cols in enumerate(block_names):
            if bi == bj:
                for x in rows:
                    row = table.setdefault(x, {})
                    for w in cols:
                        row[w] = Fraction(weight[x], den) if w == x else Fraction(0)
                continue
            cells = _transport(rng, [weight[x] for x in rows],
                               [weight[y] for y in cols])
            for i, x in enumerate(rows):
                row = table.setdefault(x, {})
                for j, y in enumerate(cols):
                    row[y] = Fraction(cells[i][j], den)

    marginal = {name: Fraction(w, den) for name, w in weight.items()}
    return extend_smap_from_atom_table(lattice, table, marginal)


def random_observable(rng: random.Random, lattice: FiniteOml,
                      block: Optional[int] = None) -> Observable:
    """Observable over one block: a random atom partition with distinct values."""
    pos = rng.randrange(len(lattice.blocks)) if block is None else block
    pool = [lattice.elements[i] for i in lattice.block_atoms(lattice.blocks[pos])]
    rng.shuffle(pool)
    groups = [[el] for el in pool[:rng.randint(1, len(pool))]]
    for el in pool[len(groups):]:
        groups[rng.randrange(len(groups))].append(el)
    den = rng.choice((1, 1, 1, 2, 3))
    values = rng.sample(range(-6, 7), len(groups))
    support = [(Fraction(v, den), lattice.join_all(g))
               for v, g in zip(values, groups)]
    return validate_observable(lattice, support)


def random_instance(seed: int) -> tuple:
    """Deterministic (lattice, s-map) pair for the given seed."""
    rng = random.Random(seed)
    lattice = block_skeleton(random_shape(rng))
    return lattice, random_smap(rng, lattice)
