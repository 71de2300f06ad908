"""The displacement cocycle of the affine action and its properness data.

The base vector assigns to every vertex gamma the unit chain h(gamma, e);
the linear action is (pi(g) xi)(gamma) = g(xi(g^-1 gamma)); the cocycle is
b(g)(gamma) = h(gamma, g) - h(gamma, e). Its p-norm grows at least linearly
in d(g, e), which is what makes the affine action proper. This module
evaluates b(g) on finite windows with certified tail bounds, exactly on tree
families, and checks the algebraic identities behind the construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .cayley import CayleyBall
from .chains import Chain, translate
from .errors import ExactnessError, InvariantViolation, PSelectionError
from .flowers import ChainEngine, NormalizedChain
from .groups import GroupSpec, Word


@dataclass
class CocycleResult:
    """Windowed evaluation of ||pi(g) eta - eta||_p^p.

    ``lower`` is the sum over the window (an exact integer in tree-exact
    mode); ``tail_bound`` certifies the mass that may live outside the
    window (zero when ``exact``). Per-vertex values, when kept, only store
    nonzero differences.
    """

    g: Word
    d_g_e: int
    p: float
    lower: float
    tail_bound: float
    exact: bool
    window_size: int
    nonzero_count: int
    values: dict[Word, float] | None = None


@dataclass
class IdentityReport:
    """Pointwise residual check of b(gk) = pi(g) b(k) + b(g) over a window."""

    vertices: int
    residual_zero: bool
    witnesses: list[Word]
    audited: int


def pi_apply(spec: GroupSpec, g: Word, xi: dict[Word, Chain]) -> dict[Word, Chain]:
    """Apply the linear action to a finitely supported vector of chains."""
    return {spec.multiply(g, gamma): translate(spec, g, ch) for gamma, ch in xi.items()}


class Cocycle:
    """Evaluator for the cocycle of one engine at a fixed exponent p >= 2."""

    def __init__(self, engine: ChainEngine, p: float):
        if p < 2:
            raise ValueError("the cocycle is evaluated at p >= 2")
        self.engine = engine
        self.spec = engine.spec
        self.p = float(p)

    # -- pointwise values -----------------------------------------------------

    def eta_at(self, gamma: Word) -> NormalizedChain:
        """The base vector at gamma: h(gamma, e)."""
        return self.engine.h_chain(gamma, (), self.p)

    def b_at(self, g: Word, gamma: Word) -> dict[Word, float]:
        """The chain b(g)(gamma) = h(gamma, g) - h(gamma, e), dense view."""
        h1 = self.engine.h_chain(gamma, g, self.p).coefficients()
        h2 = self.engine.h_chain(gamma, (), self.p).coefficients()
        out = dict(h1)
        for w, c in h2.items():
            s = out.get(w, 0.0) - c
            if s:
                out[w] = s
            else:
                out.pop(w, None)
        return out

    def diff_norm_pow(self, g: Word, gamma: Word) -> float:
        """||b(g)(gamma)||_p^p via left-invariance (no translations built)."""
        spec = self.spec
        ig = spec._inv_word(gamma)
        return self._diff_pow(spec._mul(ig, g), ig)

    def _diff_pow(self, u: Word, v: Word, fe=None) -> float:
        """||h_e(u) - h_e(v)||_p^p on identity-based chains, evaluated
        transiently so sweeping millions of keys does not grow any cache."""
        if u == v:
            return 0.0
        fpoint = self.engine._f_point_basepoint
        w1 = fpoint(u)
        if w1 is not None:
            w2 = fpoint(v)
            if w2 is not None:
                # point masses of unit coefficient
                return 0.0 if w1 == w2 else 2.0
        if fe is None:
            fe = self.engine._f_basepoint
        f1 = fe(u, False)
        f2 = fe(v, False)
        if len(f1) == 1 == len(f2):
            # singleton convex chains are unit point masses
            return 0.0 if next(iter(f1)) == next(iter(f2)) else 2.0
        p = self.p
        n1 = sum(float(c) ** p for c in f1.values()) ** (1.0 / p)
        n2 = sum(float(c) ** p for c in f2.values()) ** (1.0 / p)
        s = 0.0
        for w, c in f1.items():
            x = float(c) / n1
            c2 = f2.get(w)
            s += x ** p if c2 is None else abs(x - float(c2) / n2) ** p
        for w, c in f2.items():
            if w not in f1:
                s += (float(c) / n2) ** p
        return s

    # -- windowed norm ----------------------------------------------------------

    def norm(
        self,
        g: Word,
        mode: str = "auto",
        window_ball: CayleyBall | None = None,
        fit=None,
        upsilon: float | None = None,
        keep_values: bool = False,
        audit_samples: int = 0,
        seed: int = 0,
    ) -> CocycleResult:
        """Evaluate ||pi(g) eta - eta||_p^p over a window.

        In exact mode (tree families with delta = 1, the default when
        available) the window is the 10*delta-neighborhood of the geodesic
        from e to g, which provably contains the support, and the value is
        an exact even integer. Otherwise the window is the supplied ball
        B(e, R) and the discarded mass is bounded by the geometric tail
        computed from the fitted decay (``fit``) and growth (``upsilon``).
        """
        self.spec.validate_word(g)
        tree_ok = self.spec.is_tree and self.spec.delta == 1
        if mode == "auto":
            mode = "exact" if tree_ok and window_ball is None else "window"
        if mode == "exact":
            if not tree_ok:
                raise ExactnessError("exact mode needs a tree family with delta = 1")
            return self._exact_tree_norm(g, audit_samples=audit_samples, seed=seed)
        if mode != "window":
            raise ValueError(f"unknown mode {mode!r}")
        if window_ball is None:
            raise ValueError("windowed mode needs a materialized ball")
        if fit is None or upsilon is None:
            raise ValueError("windowed mode needs a decay fit and a growth constant")
        return self._windowed_norm(g, window_ball, fit, upsilon, keep_values)

    def _windowed_norm(self, g, ball, fit, upsilon, keep_values) -> CocycleResult:
        from .analysis import tail_bound

        p = self.p
        if fit.base ** p * upsilon >= 0.5:
            raise PSelectionError(
                f"rho^p * upsilon = {fit.base ** p * upsilon:.4f} is not below 1/2; "
                "pick a larger p before evaluating windows"
            )
        spec = self.spec
        if spec.family == "explicit-ball":
            need = ball.radius + len(g) + spec.delta
            if need > spec.radius:
                raise ExactnessError(
                    f"window evaluations reach distance {need} but the explicit "
                    f"ball only extends to {spec.radius}; shrink the window or d(g, e)"
                )
        diff = self._diff_pow
        fe = self.engine._f_basepoint
        lower = 0.0
        nonzero = 0
        values: dict[Word, float] | None = {} if keep_values else None
        # walk the ball along its BFS tree, maintaining gamma^-1 g and
        # gamma^-1 incrementally; avoids an inversion and two products per vertex
        parents = ball.parent_letters
        inv = spec._inv
        left = spec._mul_letter_left
        n = len(ball.words)
        u1: list[Word] = [g] * n
        u2: list[Word] = [()] * n
        for h in range(1, n):
            par, letter = parents[h]
            s_inv = inv[letter]
            u1[h] = left(s_inv, u1[par])
            u2[h] = left(s_inv, u2[par])
        for h in range(n):
            val = diff(u1[h], u2[h], fe)
            if val:
                nonzero += 1
                lower += val
                if values is not None:
                    values[ball.words[h]] = val
        tail = tail_bound(fit.constant, fit.base, p, upsilon, ball.radius, len(g))
        return CocycleResult(
            g=g,
            d_g_e=len(g),
            p=p,
            lower=lower,
            tail_bound=tail,
            exact=False,
            window_size=len(ball),
            nonzero_count=nonzero,
            values=values,
        )

    def _exact_tree_norm(self, g, audit_samples=0, seed=0) -> CocycleResult:
        """Enumerate the geodesic-neighborhood window of a tree family.

        Every vertex gamma in the window hangs off a unique axis vertex of
        the geodesic e -> g at some depth t <= 10*delta; the two chains
        h(gamma, g) and h(gamma, e) are unit point masses whose supports
        differ exactly when t <= 10*delta - 1, each such gamma contributing
        2 to the p-th power sum. Audited against the generic evaluation.
        """
        spec = self.spec
        ten = self.engine.ten_delta
        cut = ten - 1
        if not g:
            return CocycleResult(
                g=g, d_g_e=0, p=self.p, lower=0.0, tail_bound=0.0,
                exact=True, window_size=1, nonzero_count=0,
            )
        n_gens = len(spec.generators)
        inv = spec._inv
        succ = [tuple(x for x in range(n_gens) if x != inv[y]) for y in range(n_gens)]
        k = len(g)
        window = 0
        nonzero = 0
        for i in range(k + 1):
            first = [
                x for x in range(n_gens)
                if not (i > 0 and x == inv[g[i - 1]]) and not (i < k and x == g[i])
            ]
            window += 1
            nonzero += 1  # gamma = axis vertex itself, depth 0
            stack = [(x, 1) for x in first]
            pop = stack.pop
            push = stack.append
            while stack:
                x, dpt = pop()
                window += 1
                if dpt <= cut:
                    nonzero += 1
                if dpt < ten:
                    d1 = dpt + 1
                    for nx in succ[x]:
                        push((nx, d1))
        if audit_samples:
            self._audit_exact(g, audit_samples, seed)
        return CocycleResult(
            g=g,
            d_g_e=k,
            p=self.p,
            lower=float(2 * nonzero),
            tail_bound=0.0,
            exact=True,
            window_size=window,
            nonzero_count=nonzero,
        )

    def _audit_exact(self, g: Word, samples: int, seed: int) -> None:
        """Recompute random window vertices through the generic chain path."""
        spec = self.spec
        ten = self.engine.ten_delta
        n_gens = len(spec.generators)
        inv = spec._inv
        rng = random.Random(seed)
        k = len(g)
        for _ in range(samples):
            i = rng.randrange(k + 1)
            banned = set()
            if i > 0:
                banned.add(inv[g[i - 1]])
            if i < k:
                banned.add(g[i])
            depth = rng.randrange(ten + 1)
            suffix: list[int] = []
            for step in range(depth):
                if step == 0:
                    options = [x for x in range(n_gens) if x not in banned]
                else:
                    last_inv = inv[suffix[-1]]
                    options = [x for x in range(n_gens) if x != last_inv]
                if not options:
                    break
                suffix.append(rng.choice(options))
            gamma = spec._mul(g[:i], tuple(suffix))
            expected = 2.0 if len(suffix) <= ten - 1 else 0.0
            got = self.diff_norm_pow(g, gamma)
            if abs(got - expected) > 1e-9:
                raise InvariantViolation(
                    f"exact-window audit failed at {spec.label_word(gamma)}: "
                    f"closed form {expected}, generic evaluation {got}"
                )

    # -- properness ---------------------------------------------------------------

    def disjoint_support_check(self, g: Word, gamma: Word) -> bool:
        """Whether supp h(gamma, g) and supp h(gamma, e) are disjoint.

        Defined for gamma on the oriented geodesic q[g, e] with both
        d(gamma, e) and d(gamma, g) at least 10*delta; under that
        precondition a False return is a bug witness, not a valid outcome.
        """
        spec = self.spec
        ten = self.engine.ten_delta
        path = self.engine.q.q_path(g, ())
        if gamma not in path:
            raise ValueError("gamma must lie on the geodesic q[g, e]")
        if len(gamma) < ten or len(spec._mul(spec._inv_word(gamma), g)) < ten:
            raise ValueError("gamma must be at least 10*delta from both endpoints")
        f1 = self.engine.f_chain(gamma, g)
        f2 = self.engine.f_chain(gamma, ())
        return not (f1.keys() & f2.keys())

    def properness_count(self, g: Word) -> int:
        """Number of admissible geodesic vertices with disjoint supports.

        Each one contributes a summand >= 1 to ||pi(g) eta - eta||_p^p, so
        the count is a properness certificate for g.
        """
        spec = self.spec
        ten = self.engine.ten_delta
        count = 0
        for gamma in self.engine.q.q_path(g, ()):
            if len(gamma) < ten:
                continue
            if len(spec._mul(spec._inv_word(gamma), g)) < ten:
                continue
            f1 = self.engine.f_chain(gamma, g)
            f2 = self.engine.f_chain(gamma, ())
            if not (f1.keys() & f2.keys()):
                count += 1
        return count

    # -- the cocycle identity ----------------------------------------------------

    def verify_identity(
        self,
        g: Word,
        k: Word,
        window,
        audit_fraction: float = 0.0,
        seed: int = 0,
        max_witnesses: int = 5,
    ) -> IdentityReport:
        """Check b(gk) = pi(g) b(k) + b(g) pointwise over the window.

        The residual is formed at the exact rational chain level: each
        normalized term is kept as (chain, normalizer) and terms are grouped
        by their normalizer (the sorted coefficient multiset, which pins
        down ||.||_p for every p); the identity holds iff each group sums to
        the zero chain. The two eta terms cancel symbolically and are
        omitted. Singleton chains (whose lone coefficient is exactly 1) get
        a dedicated point-comparison path. A fraction of vertices is audited
        with the literal recursion, which re-derives the translated chains
        from scratch.

        ``window`` may be a CayleyBall (walked incrementally along its BFS
        tree) or any iterable of vertices.
        """
        spec = self.spec
        eng = self.engine
        spec.validate_word(g)
        spec.validate_word(k)
        mul, inv_word = spec._mul, spec._inv_word
        gk = mul(g, k)
        ginv = inv_word(g)
        fe = eng._f_basepoint
        rng = random.Random(seed)
        one = Fraction(1)
        witnesses: list[Word] = []
        audited = 0
        vertices = 0

        if isinstance(window, CayleyBall):
            gammas = window.words
            parents = window.parent_letters
            inv = spec._inv
            left, right = spec._mul_letter_left, spec._mul_letter_right
            n = len(gammas)
            u1s: list[Word] = [gk] * n  # gamma^-1 gk: key of f(gamma, gk) and f(g^-1 gamma, k)
            u2s: list[Word] = [g] * n   # gamma^-1 g: key of f(gamma, g) and f(g^-1 gamma, e)
            ms: list[Word] = [ginv] * n  # g^-1 gamma
            for h in range(1, n):
                par, letter = parents[h]
                s_inv = inv[letter]
                u1s[h] = left(s_inv, u1s[par])
                u2s[h] = left(s_inv, u2s[par])
                ms[h] = right(ms[par], letter)
            items = zip(gammas, u1s, u2s, ms)
        else:
            items = (
                (gamma, mul(ig, gk), mul(ig, g), mul(ginv, gamma))
                for gamma in window
                for ig in (inv_word(gamma),)
            )

        fpoint = eng._f_point_basepoint
        for gamma, u1, u2, m in items:
            vertices += 1
            w1 = fpoint(u1)
            w2 = fpoint(u2) if w1 is not None else None
            if w2 is not None:
                # both chains are unit point masses; compare the four points
                a1 = mul(gamma, w1)
                b1 = mul(g, mul(m, w1))
                a2 = mul(gamma, w2)
                b2 = mul(g, mul(m, w2))
                if not ((a1 == b1 and a2 == b2) or (a1 == a2 and b1 == b2)):
                    if len(witnesses) < max_witnesses:
                        witnesses.append(gamma)
                if audit_fraction and rng.random() < audit_fraction:
                    audited += 1
                    self._audit_identity(g, k, gk, gamma, m, {w1: one}, {w2: one})
                continue
            c1 = fe(u1, False)
            c2 = fe(u2, False)
            f_gk = {mul(gamma, w): c for w, c in c1.items()}     # b(gk) head
            t1 = {mul(g, mul(m, w)): c for w, c in c1.items()}   # pi(g) b(k) head
            t2 = {mul(g, mul(m, w)): c for w, c in c2.items()}   # pi(g) b(k) tail
            f_g = {mul(gamma, w): c for w, c in c2.items()}      # b(g) head
            key1 = tuple(sorted(c1.values()))
            key2 = tuple(sorted(c2.values()))
            groups: dict[tuple, Chain] = {}
            for sign, chain, key in ((1, f_gk, key1), (-1, t1, key1), (1, t2, key2), (-1, f_g, key2)):
                acc = groups.setdefault(key, {})
                for w, c in chain.items():
                    s = acc.get(w, 0) + (c if sign > 0 else -c)
                    if s:
                        acc[w] = s
                    else:
                        acc.pop(w, None)
            if any(groups.values()):
                if len(witnesses) < max_witnesses:
                    witnesses.append(gamma)
            if audit_fraction and rng.random() < audit_fraction:
                audited += 1
                self._audit_identity(g, k, gk, gamma, m, c1, c2)
        return IdentityReport(
            vertices=vertices,
            residual_zero=not witnesses,
            witnesses=witnesses,
            audited=audited,
        )

    def _audit_identity(self, g, k, gk, gamma, m, c1, c2) -> None:
        """Re-derive both sides of one pointwise identity with the literal
        recursion and compare against the cached translated chains."""
        spec = self.spec
        eng = self.engine
        mul = spec._mul
        t1 = {mul(g, mul(m, w)): c for w, c in c1.items()}
        f_gk = {mul(gamma, w): c for w, c in c1.items()}
        lit_k = translate(spec, g, eng.f_chain_literal(m, k))
        lit_gk = eng.f_chain_literal(gamma, gk)
        if lit_k != t1 or lit_gk != f_gk:
            raise InvariantViolation(
                f"literal recursion disagrees at {spec.label_word(gamma)}"
            )
        t2 = {mul(g, mul(m, w)): c for w, c in c2.items()}
        lit_e = translate(spec, g, eng.f_chain_literal(m, ()))
        if lit_e != t2:
            raise InvariantViolation(
                f"literal recursion disagrees at {spec.label_word(gamma)} (tail term)"
            )
