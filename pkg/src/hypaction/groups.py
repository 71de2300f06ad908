"""Group elements as canonical normal-form words over a symmetric generating set.

A vertex of the Cayley graph is represented by the normal form of the group
element it stands for: a tuple of generator indices (``Word``). The empty
tuple is the identity. A :class:`GroupSpec` owns the generating set and
provides multiplication, inversion, geodesic word length, parsing and
printing. Three families are supported:

* free groups of finite rank,
* free products of finite cyclic groups, generated by all nontrivial powers
  of each cyclic generator (so every syllable is a single letter and the
  syllable count is the word metric),
* explicit finite Cayley balls loaded from a JSON file, for groups whose
  word problem is not solved here.

Specs and words are immutable; every operation is pure and safe to share
across threads.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    BallFileBasepointError,
    BallFileError,
    BallFileRadiusError,
    BallFileSymmetryError,
    OutOfWindowError,
    SpecMismatchError,
)

Word = tuple[int, ...]

_TOKEN_RE = re.compile(r"\^(-?\d+)$")


@dataclass(frozen=True)
class Generator:
    """One element of the symmetric generating set."""

    index: int
    label: str
    inverse: int


class GroupSpec:
    """Base class for the group families. Instances are immutable."""

    family = "abstract"
    is_tree = False
    # set on families whose geodesics are provably unique, in which case the
    # canonical geodesic from e spells out the normal form letter by letter
    unique_geodesics = False

    def __init__(
        self,
        generators: tuple[Generator, ...],
        delta: int,
        name: str,
        generator_order: tuple[str, ...] | None = None,
    ):
        if delta < 1:
            raise ValueError("the fineness constant delta must be a positive integer")
        self.generators = tuple(generators)
        self.delta = int(delta)
        self.name = name
        self._inv = tuple(g.inverse for g in self.generators)
        n = len(self.generators)
        for g in self.generators:
            if not (0 <= g.inverse < n) or self.generators[g.inverse].inverse != g.index:
                raise ValueError(f"generator inverses are not an involution at {g.label!r}")
        self._by_label = {g.label: g.index for g in self.generators}
        if len(self._by_label) != n:
            raise ValueError("generator labels must be distinct")
        self._labels_desc = sorted(self._by_label, key=len, reverse=True)
        self._small_balls: dict[int, tuple[Word, ...]] = {}
        if generator_order is None:
            self.generator_order = tuple(range(n))
        else:
            order = tuple(self._by_label[lbl] for lbl in generator_order)
            if sorted(order) != list(range(n)):
                raise ValueError("generator_order must be a permutation of all labels")
            self.generator_order = order

    # -- group law ---------------------------------------------------------

    def identity(self) -> Word:
        return ()

    def multiply(self, u: Word, v: Word) -> Word:
        """Normal form of the product u*v."""
        self.validate_word(u)
        self.validate_word(v)
        return self._mul(u, v)

    def invert(self, u: Word) -> Word:
        self.validate_word(u)
        return self._inv_word(u)

    def word_length(self, u: Word) -> int:
        """Geodesic distance from the identity (the word metric)."""
        self.validate_word(u)
        return len(u)

    def _mul(self, u: Word, v: Word) -> Word:
        raise NotImplementedError

    def _mul_letter_left(self, x: int, u: Word) -> Word:
        """Normal form of (one generator) * u; hot-path helper."""
        return self._mul((x,), u)

    def _mul_letter_right(self, u: Word, x: int) -> Word:
        """Normal form of u * (one generator); hot-path helper."""
        return self._mul(u, (x,))

    def _inv_word(self, u: Word) -> Word:
        inv = self._inv
        return tuple(inv[x] for x in reversed(u))

    def validate_word(self, u: Word) -> None:
        """Raise SpecMismatchError unless u is a normal form of this spec."""
        raise NotImplementedError

    # -- enumeration helpers ------------------------------------------------

    def neighbors(self, u: Word):
        """Yield (generator index, neighbor word) for every Cayley edge at u."""
        mul = self._mul
        for i in range(len(self.generators)):
            yield i, mul(u, (i,))

    def small_ball_words(self, r: int) -> tuple[Word, ...]:
        """All words of the ball of radius r around the identity, BFS order."""
        cached = self._small_balls.get(r)
        if cached is not None:
            return cached
        seen: dict[Word, int] = {(): 0}
        queue: deque[Word] = deque([()])
        while queue:
            w = queue.popleft()
            if seen[w] == r:
                continue
            for _, nb in self.neighbors(w):
                if nb not in seen:
                    seen[nb] = seen[w] + 1
                    queue.append(nb)
        out = tuple(seen)
        self._small_balls[r] = out
        return out

    # -- text --------------------------------------------------------------

    def parse(self, text: str) -> Word:
        """Parse a word like 'abA', 's t^2 s' or 'a^-3' into a normal form."""
        text = text.strip()
        if text in ("", "e", "1"):
            return ()
        out: Word = ()
        for chunk in text.split():
            for token in self._scan(chunk):
                out = self._mul(out, self._parse_token(token))
        return out

    def _scan(self, text: str) -> list[str]:
        tokens = []
        pos = 0
        while pos < len(text):
            for label in self._labels_desc:
                if text.startswith(label, pos):
                    end = pos + len(label)
                    m = re.match(r"\^-?\d+", text[end:])
                    if m:
                        end += m.end()
                    tokens.append(text[pos:end])
                    pos = end
                    break
            else:
                raise SpecMismatchError(f"cannot parse {text!r} at position {pos}")
        return tokens

    def _parse_token(self, token: str) -> Word:
        if token in self._by_label:
            return (self._by_label[token],)
        m = _TOKEN_RE.search(token)
        if m and token[: m.start()] in self._by_label:
            idx = self._by_label[token[: m.start()]]
            exp = int(m.group(1))
            letter = (idx,) if exp >= 0 else (self._inv[idx],)
            out: Word = ()
            for _ in range(abs(exp)):
                out = self._mul(out, letter)
            return out
        raise SpecMismatchError(f"unknown generator token {token!r}")

    def label_word(self, u: Word) -> str:
        if not u:
            return "e"
        labels = [self.generators[x].label for x in u]
        if all(len(g.label) == 1 for g in self.generators):
            return "".join(labels)
        return " ".join(labels)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class FreeGroupSpec(GroupSpec):
    """Free group of finite rank; generators a, A, b, B, ... (uppercase = inverse)."""

    family = "free"
    is_tree = True
    unique_geodesics = True

    def __init__(self, rank: int, delta: int = 1, generator_order: tuple[str, ...] | None = None):
        if not 1 <= rank <= 26:
            raise ValueError("free rank must be between 1 and 26")
        gens = []
        for i in range(rank):
            low, up = chr(ord("a") + i), chr(ord("A") + i)
            gens.append(Generator(2 * i, low, 2 * i + 1))
            gens.append(Generator(2 * i + 1, up, 2 * i))
        super().__init__(tuple(gens), delta, f"free:{rank}", generator_order)
        self.rank = rank

    def _mul(self, u: Word, v: Word) -> Word:
        if not u:
            return v
        if not v:
            return u
        inv = self._inv
        out = list(u)
        for x in v:
            if out and out[-1] == inv[x]:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def _mul_letter_left(self, x: int, u: Word) -> Word:
        if u and u[0] == self._inv[x]:
            return u[1:]
        return (x,) + u

    def _mul_letter_right(self, u: Word, x: int) -> Word:
        if u and u[-1] == self._inv[x]:
            return u[:-1]
        return u + (x,)

    def validate_word(self, u: Word) -> None:
        n = len(self.generators)
        inv = self._inv
        prev = -1
        for x in u:
            if not isinstance(x, int) or not 0 <= x < n:
                raise SpecMismatchError(f"letter {x!r} is not a generator of {self.name}")
            if prev >= 0 and x == inv[prev]:
                raise SpecMismatchError("word is not freely reduced")
            prev = x


class FreeProductSpec(GroupSpec):
    """Free product of finite cyclic groups Z/m1 * ... * Z/mk.

    Each factor contributes every nontrivial power of its cyclic generator as
    a generator, so each syllable of the normal form is one letter and the
    number of syllables equals the word metric.
    """

    family = "free-product"
    unique_geodesics = True

    def __init__(
        self,
        orders: tuple[int, ...],
        delta: int = 1,
        generator_order: tuple[str, ...] | None = None,
    ):
        if not orders or any(m < 2 for m in orders):
            raise ValueError("factor orders must all be at least 2")
        if len(orders) < 2:
            raise ValueError("a free product needs at least two factors")
        if len(orders) > 8:
            raise ValueError("at most 8 cyclic factors are supported")
        letters = "stuvwxyz"
        gens: list[Generator] = []
        factor_of: list[int] = []
        power_of: list[int] = []
        gen_index: list[dict[int, int]] = []
        idx = 0
        for f, m in enumerate(orders):
            base = idx
            table: dict[int, int] = {}
            for p in range(1, m):
                label = letters[f] if p == 1 else f"{letters[f]}^{p}"
                inv_idx = base + (m - p) - 1
                gens.append(Generator(idx, label, inv_idx))
                factor_of.append(f)
                power_of.append(p)
                table[p] = idx
                idx += 1
            gen_index.append(table)
        name = "zm:" + ",".join(str(m) for m in orders)
        super().__init__(tuple(gens), delta, name, generator_order)
        self.orders = tuple(int(m) for m in orders)
        self._factor = tuple(factor_of)
        self._power = tuple(power_of)
        self._gen_index = gen_index

    @property
    def is_tree(self) -> bool:  # type: ignore[override]
        return all(m == 2 for m in self.orders)

    def _mul(self, u: Word, v: Word) -> Word:
        if not u:
            return v
        if not v:
            return u
        factor, power, orders = self._factor, self._power, self.orders
        gen_index = self._gen_index
        out = list(u)
        for x in v:
            if out and factor[out[-1]] == factor[x]:
                f = factor[x]
                p = (power[out[-1]] + power[x]) % orders[f]
                out.pop()
                if p:
                    out.append(gen_index[f][p])
            else:
                out.append(x)
        return tuple(out)

    def _mul_letter_left(self, x: int, u: Word) -> Word:
        factor = self._factor
        if u and factor[u[0]] == factor[x]:
            f = factor[x]
            p = (self._power[x] + self._power[u[0]]) % self.orders[f]
            if p:
                return (self._gen_index[f][p],) + u[1:]
            return u[1:]
        return (x,) + u

    def _mul_letter_right(self, u: Word, x: int) -> Word:
        factor = self._factor
        if u and factor[u[-1]] == factor[x]:
            f = factor[x]
            p = (self._power[u[-1]] + self._power[x]) % self.orders[f]
            if p:
                return u[:-1] + (self._gen_index[f][p],)
            return u[:-1]
        return u + (x,)

    def validate_word(self, u: Word) -> None:
        n = len(self.generators)
        factor = self._factor
        prev_f = -1
        for x in u:
            if not isinstance(x, int) or not 0 <= x < n:
                raise SpecMismatchError(f"letter {x!r} is not a generator of {self.name}")
            if factor[x] == prev_f:
                raise SpecMismatchError("adjacent syllables share a factor")
            prev_f = factor[x]


class ExplicitBallSpec(GroupSpec):
    """A finite Cayley ball given by vertices and generator-labeled edges.

    Elements are the canonical words found by breadth-first search from the
    basepoint (expanding generators in declaration order, so the word is the
    lexicographically least geodesic spelling). Products are computed by
    walking edges and are defined only while the walk stays inside the ball.
    """

    family = "explicit-ball"
    is_tree = False

    def __init__(self, generators, delta, edge_map, basepoint_idx, n_vertices, radius, name="ball"):
        super().__init__(generators, delta, name)
        self.radius = int(radius)
        self._edge = edge_map  # (vertex index, generator index) -> vertex index
        words: list[Word | None] = [None] * n_vertices
        dist: list[int] = [-1] * n_vertices
        words[basepoint_idx] = ()
        dist[basepoint_idx] = 0
        order = [basepoint_idx]
        queue = deque([basepoint_idx])
        while queue:
            vid = queue.popleft()
            w = words[vid]
            for gi in range(len(self.generators)):
                nb = edge_map.get((vid, gi))
                if nb is not None and dist[nb] < 0:
                    dist[nb] = dist[vid] + 1
                    words[nb] = w + (gi,)
                    order.append(nb)
                    queue.append(nb)
        if any(d < 0 for d in dist):
            raise BallFileRadiusError("some vertices are unreachable from the basepoint")
        if max(dist) != self.radius:
            raise BallFileRadiusError(
                f"declared radius {self.radius} but breadth-first search reaches {max(dist)}"
            )
        for vid in range(n_vertices):
            if dist[vid] < self.radius:
                for gi in range(len(self.generators)):
                    if (vid, gi) not in edge_map:
                        raise BallFileError(
                            f"interior vertex at distance {dist[vid]} is missing a generator edge"
                        )
        self._vertex_word: list[Word] = words  # type: ignore[assignment]
        self._word_vertex: dict[Word, int] = {w: i for i, w in enumerate(words)}  # type: ignore[arg-type]

    def validate_word(self, u: Word) -> None:
        if u in self._word_vertex:
            return
        n = len(self.generators)
        if all(isinstance(x, int) and 0 <= x < n for x in u):
            raise OutOfWindowError(f"word of length {len(u)} is not represented in the ball")
        raise SpecMismatchError(f"word {u!r} does not belong to {self.name}")

    def _walk(self, vid: int, letters: Word) -> int:
        edge = self._edge
        for x in letters:
            nxt = edge.get((vid, x))
            if nxt is None:
                raise OutOfWindowError("product walks outside the explicit ball")
            vid = nxt
        return vid

    def _mul(self, u: Word, v: Word) -> Word:
        vid = self._word_vertex.get(u)
        if vid is None:
            vid = self._walk(self._word_vertex[()], u)
        return self._vertex_word[self._walk(vid, v)]

    def _inv_word(self, u: Word) -> Word:
        inv = self._inv
        letters = tuple(inv[x] for x in reversed(u))
        return self._vertex_word[self._walk(self._word_vertex[()], letters)]

    def neighbors(self, u: Word):
        vid = self._word_vertex[u]
        for gi in range(len(self.generators)):
            nb = self._edge.get((vid, gi))
            if nb is not None:
                yield gi, self._vertex_word[nb]


# -- Cayley-ball files -------------------------------------------------------


def load_ball_file(path, delta: int = 1) -> ExplicitBallSpec:
    """Load an explicit Cayley ball from its JSON file.

    The format is an object with fields ``generators`` (list of
    ``{"label": str, "inverse": int}``), ``basepoint`` (vertex id),
    ``radius`` (int), ``vertices`` (list of opaque string ids) and ``edges``
    (list of ``[src-id, generator-index, dst-id]``). Every edge must have its
    reverse present under the inverse generator.
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BallFileError(f"cannot read ball file {path}: {exc}") from exc
    return ball_from_json(data, delta=delta, name=f"ball:{path}")


def ball_from_json(data, delta: int = 1, name: str = "ball") -> ExplicitBallSpec:
    for key in ("generators", "basepoint", "radius", "vertices", "edges"):
        if not isinstance(data, dict) or key not in data:
            raise BallFileError(f"missing field {key!r}")
    try:
        gens = tuple(
            Generator(i, str(g["label"]), int(g["inverse"]))
            for i, g in enumerate(data["generators"])
        )
        vertex_ids = [str(v) for v in data["vertices"]]
        radius = int(data["radius"])
        raw_edges = [(str(s), int(g), str(d)) for s, g, d in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise BallFileError(f"malformed ball file: {exc}") from exc
    if len(set(vertex_ids)) != len(vertex_ids):
        raise BallFileError("duplicate vertex ids")
    vid_of = {v: i for i, v in enumerate(vertex_ids)}
    basepoint = str(data["basepoint"])
    if basepoint not in vid_of:
        raise BallFileBasepointError(f"basepoint {basepoint!r} is not a vertex")
    inv = [g.inverse for g in gens]
    if any(not 0 <= i < len(gens) or inv[inv[i]] != i for i in range(len(gens))):
        raise BallFileError("generator inverse table is not an involution")
    edge_map: dict[tuple[int, int], int] = {}
    for src, gi, dst in raw_edges:
        if src not in vid_of or dst not in vid_of or not 0 <= gi < len(gens):
            raise BallFileError(f"edge ({src}, {gi}, {dst}) references unknown data")
        key = (vid_of[src], gi)
        if edge_map.get(key, vid_of[dst]) != vid_of[dst]:
            raise BallFileError(f"conflicting edges at ({src}, generator {gi})")
        edge_map[key] = vid_of[dst]
    for (src, gi), dst in edge_map.items():
        if edge_map.get((dst, inv[gi])) != src:
            raise BallFileSymmetryError(
                f"edge ({vertex_ids[src]}, {gi}, {vertex_ids[dst]}) has no reverse"
            )
    return ExplicitBallSpec(gens, delta, edge_map, vid_of[basepoint], len(vertex_ids), radius, name)


def ball_to_json(spec: GroupSpec, radius: int) -> dict:
    """Serialize the radius-R ball of a spec to the Cayley-ball file format."""
    words = spec.small_ball_words(radius)
    in_ball = set(words)
    ids = {w: spec.label_word(w) for w in words}
    edges = []
    for w in words:
        for gi, nb in spec.neighbors(w):
            if nb in in_ball:
                edges.append([ids[w], gi, ids[nb]])
    return {
        "generators": [{"label": g.label, "inverse": g.inverse} for g in spec.generators],
        "basepoint": ids[()],
        "radius": radius,
        "vertices": [ids[w] for w in words],
        "edges": edges,
    }


# -- descriptors -------------------------------------------------------------


def spec_from_descriptor(
    descriptor: str,
    delta: int | None = None,
    generator_order: tuple[str, ...] | None = None,
) -> GroupSpec:
    """Build a GroupSpec from a short descriptor string.

    ``free:N`` is the free group of rank N, ``zm:M1,M2,...`` the free product
    of cyclic groups of those orders, ``ball:PATH`` an explicit ball file.
    """
    kind, _, rest = descriptor.partition(":")
    if kind == "free":
        return FreeGroupSpec(int(rest), delta=delta or 1, generator_order=generator_order)
    if kind == "zm":
        orders = tuple(int(x) for x in rest.split(","))
        return FreeProductSpec(orders, delta=delta or 1, generator_order=generator_order)
    if kind == "ball":
        if generator_order is not None:
            raise ValueError("generator_order is not supported for explicit balls")
        return load_ball_file(rest, delta=delta or 1)
    raise ValueError(f"unknown group descriptor {descriptor!r}")
