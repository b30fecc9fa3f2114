"""Process lattices over time stamps and a Granger-style causality test.

A process is a family of copies of one Boolean event algebra, one copy per
(series, stamp) pair, glued into a horizontal sum. An s-map on that sum acts
as a joint distribution over measurements that cannot be made simultaneously.
The causality predicate asks whether conditioning the effect block on any
positive-mass event of the cause block moves any event's probability; a
two-experiment fitter builds such s-maps from order-dependent frequency
counts, and a lag-1 regression gives the classical variance-based reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .errors import OmlprobError
from .lattice import (Element, FiniteOml, MalformedInput, TooFewBlocks,
                      horizontal_sum_from_atoms, same_lattice)
from .observables import Observable, validate_observable
from .rationals import as_rational
from .states import SMap, extend_smap_from_atom_table

ZERO = Fraction(0)
ONE = Fraction(1)


class BaseNotBoolean(OmlprobError):
    pass


class UnknownSeriesOrStamp(OmlprobError):
    pass


class EmptyExperiment(OmlprobError):
    pass


class LabelMismatch(OmlprobError):
    pass


class MarginalMismatch(OmlprobError):
    pass


class DegenerateDesign(OmlprobError):
    pass


def block_label(series: str, stamp: str) -> str:
    return f"{series}@{stamp}"


class ProcessLattice:
    """One Boolean event algebra copied across (series, stamp) pairs.

    The copies are glued into a horizontal sum; `index` maps each
    (series, stamp, base element name) triple to its image element.
    """

    def __init__(self, base: FiniteOml, stamps: tuple, series_names: tuple,
                 lattice: FiniteOml, index: dict):
        self.base = base
        self.stamps = stamps
        self.series_names = series_names
        self.lattice = lattice
        self.index = index

    def __repr__(self) -> str:
        return (f"ProcessLattice({len(self.series_names)} series, "
                f"{len(self.stamps)} stamps, {len(self.lattice)} elements)")

    @property
    def labels(self) -> tuple:
        return tuple(block_label(s, t) for s in self.series_names for t in self.stamps)

    def embed(self, series, stamp, base_el) -> Element:
        """Image of a base element inside the (series, stamp) block."""
        series, stamp = str(series), str(stamp)
        name = self.base.element(base_el).name
        try:
            return self.lattice.elements[self.index[(series, stamp, name)]]
        except KeyError:
            raise UnknownSeriesOrStamp(
                f"no block for series {series!r} at stamp {stamp!r}",
                witness=(series, stamp)) from None


def build_process_lattice(base: FiniteOml, stamps: Sequence,
                          series_names: Sequence) -> ProcessLattice:
    """Horizontal sum of one copy of `base` per (series, stamp) pair.

    Blocks are labeled "series@stamp" and lifted atoms "series@stamp:atom";
    the shared bounds keep their reserved names.
    """
    if len(base.blocks) != 1:
        raise BaseNotBoolean(
            f"base algebra has {len(base.blocks)} blocks, expected one")
    stamps = tuple(str(t) for t in stamps)
    series = tuple(str(s) for s in series_names)
    if not stamps or not series:
        raise MalformedInput("at least one series and one stamp required")
    for label in stamps + series:
        if "@" in label:
            raise MalformedInput(
                f"label {label!r} may not contain '@'", witness=label)
    if len(set(stamps)) != len(stamps) or len(set(series)) != len(series):
        raise MalformedInput("series names and stamps must be distinct")
    if len(series) * len(stamps) < 2:
        raise TooFewBlocks("a process lattice needs at least two blocks")

    pairs = [(s, t) for s in series for t in stamps]
    spec = [(block_label(s, t),
             [f"{block_label(s, t)}:{a.name}" for a in base.atoms])
            for s, t in pairs]
    lattice = horizontal_sum_from_atoms(spec)

    index = {}
    for s, t in pairs:
        prefix = f"{block_label(s, t)}:"
        for e in base.elements:
            below = [prefix + a.name for a in base.atoms if base.leq(a, e)]
            index[(s, t, e.name)] = lattice.join_all(below).index
    return ProcessLattice(base, stamps, series, lattice, index)


def lift_observable(pl: ProcessLattice, series, stamp,
                    base_observable: Observable) -> Observable:
    """Copy a base observable into the (series, stamp) block."""
    if not same_lattice(base_observable.lattice, pl.base):
        raise MalformedInput("observable does not live on the base algebra")
    support = [(value, pl.embed(series, stamp, el))
               for value, el in base_observable.support]
    return validate_observable(pl.lattice, support)


def _resolve_block(lattice: FiniteOml, spot) -> int:
    """Block position for a "series@stamp" label, pair, or position."""
    if isinstance(spot, int):
        if not 0 <= spot < len(lattice.blocks):
            raise UnknownSeriesOrStamp(
                f"block position {spot} out of range", witness=spot)
        return spot
    if isinstance(spot, (tuple, list)) and len(spot) == 2:
        label = block_label(str(spot[0]), str(spot[1]))
    else:
        label = str(spot)
    for pos, name in enumerate(lattice.block_names):
        if name == label:
            return pos
    known = tuple(n for n in lattice.block_names if n is not None)
    raise UnknownSeriesOrStamp(
        f"no block labeled {label!r}; known labels: {known}", witness=label)


@dataclass(frozen=True)
class GrangerVerdict:
    """Outcome of the event-by-event conditioning scan.

    Each witness is (effect event, conditioning event, conditional value,
    unconditional value); `causes` is true exactly when witnesses exist.
    """

    causes: bool
    witnesses: tuple
    direction: tuple  # (cause label, effect label)
    annotations: tuple = ()

    def __bool__(self) -> bool:
        return self.causes


def granger_causes(p: SMap, effect, cause) -> GrangerVerdict:
    """Does conditioning on the cause block move the effect distribution?

    Scans every effect-block event A and every positive-mass cause-block
    event B, comparing p(A,B)/mu(B) with mu(A) exactly. Zero-mass
    conditioning events are skipped and reported in the annotations.
    """
    lattice = p.lattice
    effect_pos = _resolve_block(lattice, effect)
    cause_pos = _resolve_block(lattice, cause)
    bounds = {lattice.bottom.index, lattice.top.index}
    effect_events = [i for i in sorted(lattice.blocks[effect_pos].members)
                     if i not in bounds]
    cause_events = [i for i in sorted(lattice.blocks[cause_pos].members)
                    if i not in bounds]
    mu = p.mu()

    annotations = []
    usable = []
    for j in cause_events:
        if mu(j) == ZERO:
            annotations.append(
                f"conditioning event {lattice.elements[j].name!r} has zero "
                "mass; skipped")
        else:
            usable.append(j)

    witnesses = []
    for i in effect_events:
        unconditional = mu(i)
        for j in usable:
            conditional = p(i, j) / mu(j)
            if conditional != unconditional:
                witnesses.append((lattice.elements[i].name,
                                  lattice.elements[j].name,
                                  conditional, unconditional))
    direction = (_block_tag(lattice, cause_pos, cause),
                 _block_tag(lattice, effect_pos, effect))
    return GrangerVerdict(causes=bool(witnesses), witnesses=tuple(witnesses),
                          direction=direction, annotations=tuple(annotations))


def _block_tag(lattice: FiniteOml, pos: int, spot) -> str:
    name = lattice.block_names[pos]
    if name is not None:
        return name
    if isinstance(spot, (tuple, list)) and len(spot) == 2:
        return block_label(str(spot[0]), str(spot[1]))
    return str(spot)


@dataclass(frozen=True)
class ExperimentCounts:
    """Counts from one two-step experiment, first outcome then second.

    `counts` covers the full outcome rectangle; rows and columns are the
    sorted outcome labels of the first and second measurement.
    """

    outcomes_first: tuple
    outcomes_second: tuple
    counts: tuple  # row-major over (outcomes_first x outcomes_second)
    order_tag: str = ""

    @property
    def total(self) -> int:
        return sum(c for row in self.counts for c in row)

    def count(self, first: str, second: str) -> int:
        i = self.outcomes_first.index(first)
        j = self.outcomes_second.index(second)
        return self.counts[i][j]

    def frequency(self, first: str, second: str) -> Fraction:
        return Fraction(self.count(first, second), self.total)

    def first_marginal(self, first: str) -> Fraction:
        i = self.outcomes_first.index(first)
        return Fraction(sum(self.counts[i]), self.total)

    def second_marginal(self, second: str) -> Fraction:
        j = self.outcomes_second.index(second)
        return Fraction(sum(row[j] for row in self.counts), self.total)


def experiment_counts(counts: Mapping, order_tag: str = "") -> ExperimentCounts:
    """Build ExperimentCounts from a {(first, second): count} mapping.

    Missing rectangle cells count as zero; a zero grand total is rejected.
    """
    firsts, seconds = [], []
    table = {}
    for key, raw in counts.items():
        if not (isinstance(key, (tuple, list)) and len(key) == 2):
            raise MalformedInput(
                f"count key {key!r} is not an (first, second) pair", witness=key)
        first, second = str(key[0]), str(key[1])
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise MalformedInput(
                f"count for ({first}, {second}) is not an integer: {raw!r}",
                witness=(first, second))
        if raw < 0:
            raise MalformedInput(
                f"count for ({first}, {second}) is negative", witness=(first, second))
        if first not in firsts:
            firsts.append(first)
        if second not in seconds:
            seconds.append(second)
        if (first, second) in table:
            raise MalformedInput(
                f"duplicate outcome pair ({first}, {second})", witness=(first, second))
        table[(first, second)] = raw
    firsts.sort()
    seconds.sort()
    grid = tuple(tuple(table.get((f, s), 0) for s in seconds) for f in firsts)
    if sum(c for row in grid for c in row) == 0:
        raise EmptyExperiment("experiment has no observations")
    return ExperimentCounts(tuple(firsts), tuple(seconds), grid, order_tag)


def _match_block(lattice: FiniteOml, labels: frozenset) -> int:
    for pos, blk in enumerate(lattice.blocks):
        names = frozenset(lattice.elements[i].name for i in blk.members
                          if i in set(lattice._atom_indices))
        if names == labels:
            return pos
    raise LabelMismatch(
        f"outcome labels {sorted(labels)} do not match any block's atoms",
        witness=tuple(sorted(labels)))


def fit_smap_from_experiments(pl, exp1, exp2, tolerance) -> SMap:
    """Fit an s-map on a two-block process from order-dependent counts.

    exp1 measures the first block's variable first, exp2 the second's;
    p(atom measured first, atom measured second) is that experiment's
    relative frequency. Each variable's marginal is taken from the
    experiment that measured it first. The two experiments estimate every
    marginal independently; disagreement beyond the tolerance raises
    MarginalMismatch, and smaller gaps are closed by shifting the other
    experiment's cells in proportion to their row mass, which keeps row
    sums and makes columns exact.
    """
    lattice = pl.lattice if isinstance(pl, ProcessLattice) else pl
    if len(lattice.blocks) != 2:
        raise MalformedInput(
            f"two-block process expected, got {len(lattice.blocks)} blocks")
    if not isinstance(exp1, ExperimentCounts):
        exp1 = experiment_counts(exp1, order_tag="first block first")
    if not isinstance(exp2, ExperimentCounts):
        exp2 = experiment_counts(exp2, order_tag="second block first")
    tol = as_rational(tolerance)
    if tol < 0:
        raise MalformedInput("tolerance must be non-negative")

    xi_labels = frozenset(exp1.outcomes_first)
    eta_labels = frozenset(exp1.outcomes_second)
    if frozenset(exp2.outcomes_first) != eta_labels or \
            frozenset(exp2.outcomes_second) != xi_labels:
        raise LabelMismatch(
            "the two experiments do not measure the same pair of variables "
            f"in opposite orders: {sorted(xi_labels)}/{sorted(eta_labels)} vs "
            f"{sorted(exp2.outcomes_first)}/{sorted(exp2.outcomes_second)}")
    xi_pos = _match_block(lattice, xi_labels)
    eta_pos = _match_block(lattice, eta_labels)
    if xi_pos == eta_pos:
        raise LabelMismatch(
            "both experiments resolve to the same block", witness=xi_pos)

    xi_atoms = sorted(xi_labels)
    eta_atoms = sorted(eta_labels)
    mu = {x: exp1.first_marginal(x) for x in xi_atoms}
    mu.update({y: exp2.first_marginal(y) for y in eta_atoms})

    for x in xi_atoms:
        other = exp2.second_marginal(x)
        if abs(mu[x] - other) > tol:
            raise MarginalMismatch(
                f"marginal of {x!r} is {mu[x]} where measured first but "
                f"{other} in the other experiment (tolerance {tol})",
                witness=(x, mu[x], other))
    for y in eta_atoms:
        other = exp1.second_marginal(y)
        if abs(mu[y] - other) > tol:
            raise MarginalMismatch(
                f"marginal of {y!r} is {mu[y]} where measured first but "
                f"{other} in the other experiment (tolerance {tol})",
                witness=(y, mu[y], other))

    table = {a: {} for a in xi_atoms + eta_atoms}
    for x in xi_atoms:
        for w in xi_atoms:
            table[x][w] = mu[x] if w == x else ZERO
        for y in eta_atoms:
            table[x][y] = exp1.frequency(x, y) + \
                mu[x] * (mu[y] - exp1.second_marginal(y))
    for y in eta_atoms:
        for w in eta_atoms:
            table[y][w] = mu[y] if w == y else ZERO
        for x in xi_atoms:
            table[y][x] = exp2.frequency(y, x) + \
                mu[y] * (mu[x] - exp2.second_marginal(x))
    return extend_smap_from_atom_table(lattice, table, mu)


@dataclass(frozen=True)
class ClassicalGrangerReport:
    """Residual-variance comparison for the lag-1 bivariate regression."""

    causes: bool
    sigma2_restricted: Fraction
    sigma2_full: Fraction
    observations: int
    note: str = ("reference approximation: lag-1 bivariate variance "
                 "comparison with no wider information set")

    def __bool__(self) -> bool:
        return self.causes


def _solve_normal_equations(design: list, targets: list) -> tuple:
    """Exact least squares via the normal equations; None when singular."""
    k = len(design[0])
    ata = [[sum(row[i] * row[j] for row in design) for j in range(k)]
           for i in range(k)]
    atb = [sum(row[i] * t for row, t in zip(design, targets)) for i in range(k)]
    m = [ata[i][:] + [atb[i]] for i in range(k)]
    for col in range(k):
        pivot = next((r for r in range(col, k) if m[r][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        inv = ONE / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(k):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [v - factor * w for v, w in zip(m[r], m[col])]
    beta = [m[i][k] for i in range(k)]
    ssr = sum((t - sum(b * v for b, v in zip(beta, row))) ** 2
              for row, t in zip(design, targets))
    return beta, ssr


def classical_granger_lag1(series_x: Sequence, series_y: Sequence) -> ClassicalGrangerReport:
    """Compare residual variances of Y on lag-Y alone versus lag-Y and lag-X.

    Ordinary least squares in exact rational arithmetic; the verdict is the
    strict inequality sigma2_full < sigma2_restricted. Collinear designs and
    exhausted degrees of freedom raise DegenerateDesign.
    """
    xs = [as_rational(v) for v in series_x]
    ys = [as_rational(v) for v in series_y]
    if len(xs) != len(ys):
        raise MalformedInput(
            f"series lengths differ: {len(xs)} vs {len(ys)}")
    if len(ys) < 3:
        raise MalformedInput("need at least three observations per series")

    targets = ys[1:]
    restricted = [[ONE, ys[t]] for t in range(len(ys) - 1)]
    full = [[ONE, ys[t], xs[t]] for t in range(len(ys) - 1)]
    rows = len(targets)

    out = {}
    for label, design in (("restricted", restricted), ("full", full)):
        solved = _solve_normal_equations(design, targets)
        if solved is None:
            raise DegenerateDesign(
                f"normal equations of the {label} model are singular",
                witness=label)
        dof = rows - len(design[0])
        if dof <= 0:
            raise DegenerateDesign(
                f"{label} model leaves no residual degrees of freedom "
                f"({rows} rows, {len(design[0])} coefficients)", witness=label)
        out[label] = solved[1] / dof

    return ClassicalGrangerReport(
        causes=out["full"] < out["restricted"],
        sigma2_restricted=out["restricted"],
        sigma2_full=out["full"],
        observations=rows)
