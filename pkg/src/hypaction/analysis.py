"""Growth and decay estimation: the constants behind the summability argument.

The growth constant upsilon bounds ball sizes by upsilon^r. The difference
norms of the averaged chains decay exponentially in the Gromov product; the
decay base and constant are fitted as an upper envelope over samples, and an
exponent p with (base^p * upsilon) < 1/2 is selected so that the geometric
tail of the cocycle norm converges with an explicit bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .cayley import CayleyBall, gromov_product
from .chains import norm_1, sub
from .errors import ExactnessError, FitError, OutOfWindowError, PSelectionError
from .flowers import ChainEngine
from .groups import Word

_LAMBDA_GRID = [i / 200.0 for i in range(1, 200)]


def estimate_upsilon(ball: CayleyBall) -> float:
    """Smallest u with #B(e, r) <= u^r over the materialized radii.

    By homogeneity of the Cayley graph the basepoint is representative, so
    the maximum of #B(e, r)^(1/r) over 1 <= r <= R is a valid growth
    constant for every materialized ball.
    """
    if ball.radius < 2:
        raise ValueError("need a ball of radius at least 2")
    sizes = ball.layer_sizes()
    total = 0
    best = 1.0
    for r, size in enumerate(sizes):
        total += size
        if r >= 1:
            best = max(best, total ** (1.0 / r))
    return best


@dataclass
class DecayFit:
    """Upper envelope value <= constant * base^x over all fitted samples."""

    constant: float
    base: float
    cap_factor: float
    n_samples: int
    n_positive: int
    samples: list[tuple[float, float]] = field(default_factory=list)

    def envelope_ok(self) -> bool:
        return all(v <= self.constant * self.base ** x for x, v in self.samples)

    def bound_at(self, x: float) -> float:
        return self.constant * self.base ** x


def fit_envelope(samples, cap_factor: float = 32.0) -> DecayFit:
    """Fit the decay envelope over (gromov product, norm value) samples.

    The base is the smallest grid value whose minimal dominating constant
    stays within ``cap_factor`` times the largest observed value; this keeps
    the constant bounded while reporting the fastest decay the data
    supports. Data that is flat up to a cutoff and zero beyond it (the tree
    case) then yields a base strictly below 1 with a moderate constant.
    """
    pts = [(float(x), float(v)) for x, v in samples]
    if len({x for x, _ in pts}) < 2:
        raise FitError("decay fit is underdetermined: all Gromov products are equal")
    positive = [(x, v) for x, v in pts if v > 0]
    if not positive:
        return DecayFit(
            constant=0.0, base=0.5, cap_factor=cap_factor,
            n_samples=len(pts), n_positive=0, samples=pts,
        )
    vmax = max(v for _, v in positive)
    cap = cap_factor * vmax
    chosen = None
    for lam in _LAMBDA_GRID:
        c = max(v * lam ** (-x) for x, v in positive)
        if c <= cap:
            chosen = (lam, c)
            break
    if chosen is None:
        # fall back to the loosest grid base; the envelope stays valid
        lam = _LAMBDA_GRID[-1]
        chosen = (lam, max(v * lam ** (-x) for x, v in positive))
    base, constant = chosen[0], chosen[1] * (1.0 + 1e-9)
    if base >= 1.0:
        raise FitError("no decay base below 1 dominates the samples")
    fit = DecayFit(
        constant=constant, base=base, cap_factor=cap_factor,
        n_samples=len(pts), n_positive=len(positive), samples=pts,
    )
    if not fit.envelope_ok():
        raise FitError("envelope fit failed to dominate its own samples")
    return fit


def decay_triples(ball: CayleyBall, sample_count: int, seed: int):
    """Sample triples (b, a, a') stratified so Gromov products span the range.

    One third fully random, one third with a' a short perturbation of a
    (large products), one third with a' = a (zero norms, any product).
    """
    rng = random.Random(seed)
    spec = ball.spec
    pool = ball.words
    gens = [(i,) for i in range(len(spec.generators))]
    out = []
    for j in range(sample_count):
        b = pool[rng.randrange(len(pool))]
        a = pool[rng.randrange(len(pool))]
        kind = j % 3
        if kind == 0:
            a2 = pool[rng.randrange(len(pool))]
        elif kind == 1:
            a2 = a
            for _ in range(rng.randrange(1, 4)):
                a2 = spec._mul(a2, gens[rng.randrange(len(gens))])
        else:
            a2 = a
        out.append((b, a, a2))
    return out


def fit_f_decay(
    engine: ChainEngine,
    ball: CayleyBall,
    sample_count: int,
    seed: int,
    cap_factor: float = 32.0,
) -> DecayFit:
    """Envelope for ||f(b,a) - f(b,a')||_1 against (a|a')_b.

    Samples that an explicit ball cannot support are skipped; they are
    undefined rather than zero.
    """
    spec = engine.spec
    samples = []
    for b, a, a2 in decay_triples(ball, sample_count, seed):
        try:
            v = float(norm_1(sub(engine.f_chain(b, a), engine.f_chain(b, a2))))
        except (ExactnessError, OutOfWindowError):
            continue
        samples.append((float(gromov_product(spec, b, a, a2)), v))
    return fit_envelope(samples, cap_factor)


def _h_diff_norm(engine: ChainEngine, b: Word, a: Word, a2: Word, p: float) -> float:
    h1 = engine.h_chain(b, a, p).coefficients()
    h2 = engine.h_chain(b, a2, p).coefficients()
    s = 0.0
    for w, x in h1.items():
        y = h2.get(w)
        s += x ** p if y is None else abs(x - y) ** p
    for w, y in h2.items():
        if w not in h1:
            s += y ** p
    return s ** (1.0 / p)


def fit_h_decay(
    engine: ChainEngine,
    ball: CayleyBall,
    p: float,
    sample_count: int,
    seed: int,
    cap_factor: float = 32.0,
) -> DecayFit:
    """Envelope for ||h(b,a) - h(b,a')||_p against (a|a')_b."""
    spec = engine.spec
    samples = []
    for b, a, a2 in decay_triples(ball, sample_count, seed):
        try:
            v = _h_diff_norm(engine, b, a, a2, p)
        except (ExactnessError, OutOfWindowError):
            continue
        samples.append((float(gromov_product(spec, b, a, a2)), v))
    return fit_envelope(samples, cap_factor)


def rho_fitter(
    engine: ChainEngine,
    ball: CayleyBall,
    sample_count: int,
    seed: int,
    cap_factor: float = 32.0,
):
    """A per-p decay fitter reusing one sampled triple set.

    Returns (rho_of_p, fits): the callable refits the envelope at each
    requested p (the decay base may depend on p) and records the DecayFit.
    """
    spec = engine.spec
    triples = []
    for b, a, a2 in decay_triples(ball, sample_count, seed):
        try:
            engine.f_chain(b, a)
            engine.f_chain(b, a2)
        except (ExactnessError, OutOfWindowError):
            continue
        triples.append((b, a, a2))
    xs = [float(gromov_product(spec, b, a, a2)) for b, a, a2 in triples]
    fits: dict[float, DecayFit] = {}

    def rho_of_p(p: float) -> float:
        if p in fits:
            return fits[p].base
        samples = [
            (x, _h_diff_norm(engine, b, a, a2, p))
            for x, (b, a, a2) in zip(xs, triples)
        ]
        fit = fit_envelope(samples, cap_factor)
        fits[p] = fit
        return fit.base

    return rho_of_p, fits


@dataclass
class PSelection:
    """A chosen exponent p with its summability margin."""

    upsilon: float
    p: float
    rho_used: float
    margin: float  # 1/2 - rho^p * upsilon, positive by construction
    candidates: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "upsilon": self.upsilon,
            "candidates": self.candidates,
            "chosen_p": self.p,
            "margin": self.margin,
        }


def select_p(
    upsilon: float,
    rho_of_p,
    grid_start: float = 2.0,
    grid_step: float = 0.1,
    ceiling: float = 64.0,
    target: float = 0.25,
) -> PSelection:
    """Smallest grid exponent p >= 2 with rho(p)^p * upsilon below the target.

    The target defaults to 1/4, a safety margin under the 1/2 the
    summability argument needs, because the decay base is only an estimate.
    """
    if upsilon <= 0:
        raise ValueError("upsilon must be positive")
    candidates: list[dict] = []
    steps = int(round((ceiling - grid_start) / grid_step)) + 1
    for i in range(max(steps, 1)):
        p = round(grid_start + i * grid_step, 10)
        if p > ceiling + 1e-12:
            break
        rho = float(rho_of_p(p))
        q = rho ** p * upsilon
        candidates.append({"p": p, "rho": rho, "rho_p_upsilon": q})
        if rho < 1.0 and q < target:
            sel = PSelection(
                upsilon=upsilon, p=p, rho_used=rho, margin=0.5 - q, candidates=candidates
            )
            assert sel.rho_used ** sel.p * sel.upsilon < 0.5
            return sel
    raise PSelectionError(
        f"no exponent p in [{grid_start}, {ceiling}] reaches rho^p * upsilon < {target}; "
        f"last candidates: {candidates[-3:]}"
    )


def tail_bound(C: float, rho: float, p: float, upsilon: float, R: int, d: int) -> float:
    """Bound on the cocycle norm mass outside the window of radius R.

    Sums the geometric layer bounds C^p * rho^(p(n - d)) * upsilon^n over
    n > R; requires rho^p * upsilon < 1/2 so the series converges. R = -1
    gives the full-sum bound, at most 2 * C^p * rho^(-p d).
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError("the decay base must lie in [0, 1)")
    if C < 0 or p < 1 or upsilon <= 0 or d < 0 or R < -1:
        raise ValueError("invalid tail-bound arguments")
    if C == 0.0 or rho == 0.0:
        return 0.0
    q = rho ** p * upsilon
    if q >= 0.5:
        raise ValueError(f"rho^p * upsilon = {q:.4f} is not below 1/2")
    return (C ** p) * rho ** (-p * d) * q ** (R + 1) / (1.0 - q)
