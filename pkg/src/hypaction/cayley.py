"""Finite Cayley balls, the word metric, Gromov products and fineness checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ExactnessError, OutOfWindowError, ResourceBudgetError
from .groups import GroupSpec, Word


class CayleyBall:
    """The ball B(e, R): vertices in breadth-first order with dense handles.

    Immutable after construction; queries are pure. ``words[h]`` is the
    normal form of vertex handle h, ``dist[h]`` its distance from the
    identity, and ``layer(r)`` the sphere S(e, r) as a list slice.
    """

    def __init__(self, spec: GroupSpec, radius: int, words, dist, layer_bounds):
        self.spec = spec
        self.radius = radius
        self.words: list[Word] = words
        self.index: dict[Word, int] = {w: i for i, w in enumerate(words)}
        self.dist: list[int] = dist
        self._layer_bounds = layer_bounds
        self._adjacency: list[list[tuple[int, int]]] | None = None
        self._parents: list[tuple[int, int]] | None = None

    def __len__(self):
        return len(self.words)

    def __contains__(self, w: Word):
        return w in self.index

    def layer(self, r: int) -> list[Word]:
        if not 0 <= r <= self.radius:
            return []
        lo, hi = self._layer_bounds[r], self._layer_bounds[r + 1]
        return self.words[lo:hi]

    def distance(self, a: Word, b: Word) -> int:
        return distance(self.spec, a, b)

    def layer_sizes(self) -> list[int]:
        return [self._layer_bounds[r + 1] - self._layer_bounds[r] for r in range(self.radius + 1)]

    @property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per-vertex list of (generator index, neighbor handle), ball-internal."""
        if self._adjacency is None:
            adj = []
            for w in self.words:
                row = []
                for gi, nb in self.spec.neighbors(w):
                    h = self.index.get(nb)
                    if h is not None:
                        row.append((gi, h))
                adj.append(row)
            self._adjacency = adj
        return self._adjacency

    @property
    def parent_letters(self) -> list[tuple[int, int]]:
        """(parent handle, last letter) per vertex; canonical words are
        prefix-closed, so the parent of w is w[:-1]. Entry 0 is (-1, -1)."""
        if self._parents is None:
            index = self.index
            out = [(-1, -1)]
            for w in self.words[1:]:
                out.append((index[w[:-1]], w[-1]))
            self._parents = out
        return self._parents


def build_ball(spec: GroupSpec, radius: int, max_vertices: int | None = None) -> CayleyBall:
    """Materialize B(e, radius) by breadth-first search over the group law."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if spec.family == "explicit-ball" and radius > spec.radius:
        raise OutOfWindowError(
            f"requested radius {radius} exceeds the explicit ball radius {spec.radius}"
        )
    words: list[Word] = [()]
    dist = [0]
    index: dict[Word, int] = {(): 0}
    layer_bounds = [0, 1]
    frontier = [()]
    for r in range(1, radius + 1):
        nxt: list[Word] = []
        for w in frontier:
            for _, nb in spec.neighbors(w):
                if nb not in index:
                    index[nb] = len(words)
                    words.append(nb)
                    dist.append(r)
                    nxt.append(nb)
                    if max_vertices is not None and len(words) > max_vertices:
                        raise ResourceBudgetError(
                            f"ball exceeds the budget of {max_vertices} vertices at radius {r}"
                        )
        layer_bounds.append(len(words))
        frontier = nxt
    return CayleyBall(spec, radius, words, dist, layer_bounds)


def distance(spec: GroupSpec, a: Word, b: Word) -> int:
    """Word metric d(a, b), computed left-invariantly as |a^-1 b|."""
    return len(spec.multiply(spec.invert(a), b))


def _distance(spec: GroupSpec, a: Word, b: Word) -> int:
    return len(spec._mul(spec._inv_word(a), b))


def gromov_product(spec: GroupSpec, a: Word, b: Word, c: Word) -> Fraction:
    """(b|c)_a = [d(a,b) + d(a,c) - d(b,c)] / 2, exact as a half-integer."""
    dab = distance(spec, a, b)
    dac = _distance(spec, a, c)
    dbc = _distance(spec, b, c)
    return Fraction(dab + dac - dbc, 2)


def sphere(ball: CayleyBall, x: Word, r: int) -> tuple[set[Word], bool]:
    """S(x, r) by translating S(e, r); complete iff provably whole.

    The flag is true when d(e,x) + r <= ball radius, so the materialized ball
    is known to contain the entire sphere. Callers needing exactness must
    treat an incomplete result as an error.
    """
    spec = ball.spec
    if r < 0:
        return set(), True
    complete = _distance(spec, (), x) + r <= ball.radius
    members = set()
    try:
        for w in ball.layer(r) if r <= ball.radius else ():
            members.add(spec._mul(x, w))
    except OutOfWindowError:
        return members, False
    if r > ball.radius:
        complete = False
    return members, complete


def ball_around(ball: CayleyBall, x: Word, r: int) -> tuple[set[Word], bool]:
    """B(x, r), as the union of the translated layers up to r."""
    members: set[Word] = set()
    complete = True
    for k in range(r + 1):
        got, ok = sphere(ball, x, k)
        members |= got
        complete = complete and ok
    return members, complete


@dataclass
class CertReport:
    """Result of a fineness certification run."""

    delta: int
    samples: int
    skipped: int
    max_deviation: int
    witness: list[str] = field(default_factory=list)
    passed: bool = False
    exhaustive_radius: int | None = None
    note: str = (
        "internal points are taken on the bicombing geodesics; arbitrary "
        "geodesics are covered only by the exhaustive small-radius sweep"
    )

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "samples": self.samples,
            "skipped": self.skipped,
            "max_deviation": self.max_deviation,
            "witness": self.witness,
            "pass": self.passed,
            "exhaustive_radius": self.exhaustive_radius,
            "note": self.note,
        }


def certify_delta(
    ball: CayleyBall,
    delta: int,
    samples: int,
    seed: int,
    exhaustive_radius: int | None = None,
    bicombing=None,
) -> CertReport:
    """Check the fine-triangle condition on sampled (and small exhaustive) triples.

    For a triple (a, b, c) the points v = q[a,b](t) and w = q[a,c](t) with
    t = 0 .. floor((b|c)_a) must satisfy d(v, w) <= delta. The report carries
    the maximal observed deviation and a maximizing witness triple.
    """
    from .bicombing import Bicombing

    spec = ball.spec
    q = bicombing if bicombing is not None else Bicombing(spec)
    rng = random.Random(seed)
    max_dev = 0
    witness: list[str] = []
    skipped = 0

    def check(a: Word, b: Word, c: Word) -> None:
        nonlocal max_dev, witness
        top = int(gromov_product(spec, a, b, c))
        if top == 0:
            return
        pab = q.q_path(a, b)
        pac = q.q_path(a, c)
        for t in range(1, top + 1):
            dev = _distance(spec, pab[t], pac[t])
            if dev > max_dev:
                max_dev = dev
                witness = [spec.label_word(x) for x in (a, b, c)]

    if exhaustive_radius is not None:
        small = [w for w, d in zip(ball.words, ball.dist) if d <= exhaustive_radius]
        for a in small:
            for b in small:
                for c in small:
                    check(a, b, c)

    pool = ball.words
    for _ in range(samples):
        a, b, c = (pool[rng.randrange(len(pool))] for _ in range(3))
        try:
            check(a, b, c)
        except (OutOfWindowError, ExactnessError):
            skipped += 1

    return CertReport(
        delta=delta,
        samples=samples,
        skipped=skipped,
        max_deviation=max_dev,
        witness=witness,
        passed=max_dev <= delta,
        exhaustive_radius=exhaustive_radius,
    )
