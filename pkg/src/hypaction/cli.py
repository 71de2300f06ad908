"""Command-line interface.

Subcommands build balls, certify fineness, dump chains, select the exponent,
evaluate cocycle norms, run the verification suites, and export properness
tables. All randomness flows from the configured seed and outputs are
serialized with sorted keys, so identical configurations produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import analysis
from .cayley import build_ball, certify_delta
from .chains import chain_to_entries
from .cocycle import Cocycle
from .errors import HypactionError
from .flowers import ChainEngine
from .groups import GroupSpec, spec_from_descriptor
from .suite import run_suite

_BYTES_PER_VERTEX = 160


@dataclass
class RunConfig:
    group: str = "free:2"
    radius: int = 6
    delta: int | None = None
    p: str = "auto"
    seed: int = 0
    samples: int = 400
    memory_budget_mb: int = 512
    output: str | None = None
    generator_order: list[str] | None = None

    @classmethod
    def load(cls, path: str | None, overrides: dict) -> "RunConfig":
        data: dict = {}
        if path:
            data = json.loads(Path(path).read_text())
            unknown = set(data) - {f.name for f in fields(cls)}
            if unknown:
                raise ValueError(f"unknown config fields: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**data)
        if cfg.radius < 0 or cfg.samples < 0 or cfg.seed < 0 or cfg.memory_budget_mb <= 0:
            raise ValueError("radius, samples and seed must be nonnegative; budget positive")
        if cfg.delta is not None and cfg.delta < 1:
            raise ValueError("delta must be a positive integer")
        return cfg

    def make_spec(self) -> GroupSpec:
        order = tuple(self.generator_order) if self.generator_order else None
        return spec_from_descriptor(self.group, delta=self.delta, generator_order=order)

    def max_vertices(self, radius: int) -> int:
        per_vertex = _BYTES_PER_VERTEX + 8 * radius
        return max(1000, self.memory_budget_mb * (1 << 20) // per_vertex)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict, out: str | None) -> None:
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", out)


def _resolve_p(cfg: RunConfig, engine: ChainEngine):
    """The exponent to work at, selecting one from fitted decay if 'auto'.

    Returns (p, fit-at-p or None, upsilon or None, selection payload or None).
    """
    if cfg.p != "auto":
        return float(cfg.p), None, None, None
    fit_radius = min(cfg.radius, 8)
    ball = build_ball(engine.spec, fit_radius, cfg.max_vertices(fit_radius))
    ups = analysis.estimate_upsilon(ball)
    rho_of_p, fits = analysis.rho_fitter(engine, ball, max(cfg.samples, 200), cfg.seed)
    sel = analysis.select_p(ups, rho_of_p)
    return sel.p, fits[sel.p], ups, sel.to_json()


def _cocycle_payload(cfg: RunConfig, engine: ChainEngine, g) -> dict:
    spec = engine.spec
    p, fit, ups, _ = _resolve_p(cfg, engine)
    coc = Cocycle(engine, p)
    if spec.is_tree and spec.delta == 1:
        res = coc.norm(g, mode="exact", audit_samples=min(cfg.samples, 50), seed=cfg.seed)
    else:
        window = build_ball(spec, cfg.radius, cfg.max_vertices(cfg.radius))
        if fit is None:
            fit = analysis.fit_h_decay(engine, window, p, max(cfg.samples, 200), cfg.seed)
            ups = analysis.estimate_upsilon(window)
        res = coc.norm(g, mode="window", window_ball=window, fit=fit, upsilon=ups)
    count = coc.properness_count(g)
    d = res.d_g_e
    return {
        "g": spec.label_word(g),
        "d_g_e": d,
        "p": res.p,
        "lower": res.lower,
        "tail_bound": res.tail_bound,
        "exact": res.exact,
        "properness_count": count,
        "bound_20delta_ok": res.lower >= 2 * (d - 20 * spec.delta - 1),
        "paper_bound_ok": res.lower >= d - 100 * spec.delta,
    }


# ------------------------------------------------------------------ commands


def cmd_ball(cfg: RunConfig) -> int:
    spec = cfg.make_spec()
    ball = build_ball(spec, cfg.radius, cfg.max_vertices(cfg.radius))
    _emit_json(
        {
            "group": spec.name,
            "delta": spec.delta,
            "radius": cfg.radius,
            "vertices": len(ball),
            "layer_sizes": ball.layer_sizes(),
            "upsilon": analysis.estimate_upsilon(ball) if cfg.radius >= 2 else None,
        },
        cfg.output,
    )
    return 0


def cmd_certify_delta(cfg: RunConfig, exhaustive_radius: int) -> int:
    spec = cfg.make_spec()
    ball = build_ball(spec, cfg.radius, cfg.max_vertices(cfg.radius))
    report = certify_delta(ball, spec.delta, cfg.samples, cfg.seed,
                           exhaustive_radius=min(exhaustive_radius, cfg.radius))
    _emit_json(report.to_json(), cfg.output)
    return 0 if report.passed else 1


def cmd_chain(cfg: RunConfig, a_text: str, b_text: str, which: str) -> int:
    spec = cfg.make_spec()
    engine = ChainEngine(spec)
    a, b = spec.parse(a_text), spec.parse(b_text)
    f = engine.f_chain(a, b)
    payload = {
        "a": spec.label_word(a),
        "b": spec.label_word(b),
        "kind": which,
        "entries": chain_to_entries(spec, f),
    }
    if which == "h":
        p, _, _, _ = _resolve_p(cfg, engine)
        h = engine.h_chain(a, b, p)
        payload["p"] = p
        payload["norm"] = h.norm
        payload["coefficients"] = [
            [spec.label_word(w), c] for w, c in sorted(h.coefficients().items())
        ]
    _emit_json(payload, cfg.output)
    return 0


def cmd_select_p(cfg: RunConfig) -> int:
    spec = cfg.make_spec()
    engine = ChainEngine(spec)
    ball = build_ball(spec, cfg.radius, cfg.max_vertices(cfg.radius))
    ups = analysis.estimate_upsilon(ball)
    rho_of_p, _ = analysis.rho_fitter(engine, ball, max(cfg.samples, 200), cfg.seed)
    sel = analysis.select_p(ups, rho_of_p)
    _emit_json(sel.to_json(), cfg.output)
    return 0


def cmd_cocycle(cfg: RunConfig, g_text: str) -> int:
    spec = cfg.make_spec()
    engine = ChainEngine(spec)
    payload = _cocycle_payload(cfg, engine, spec.parse(g_text))
    _emit_json(payload, cfg.output)
    return 0 if payload["paper_bound_ok"] else 1


def cmd_verify(cfg: RunConfig, exhaustive_radius: int) -> int:
    spec = cfg.make_spec()
    report = run_suite(
        spec,
        radius=cfg.radius,
        samples=cfg.samples,
        seed=cfg.seed,
        p=cfg.p if cfg.p == "auto" else float(cfg.p),
        exhaustive_radius=exhaustive_radius,
        max_vertices=cfg.max_vertices(cfg.radius),
    )
    _emit_json(report, cfg.output)
    return 0 if report["passed"] else 1


def cmd_report(cfg: RunConfig, g_texts: list[str]) -> int:
    spec = cfg.make_spec()
    engine = ChainEngine(spec)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([
        "g_word", "d_g_e", "p", "lower", "tail_bound",
        "properness_count", "bound_20delta_ok", "bound_100delta_ok",
    ])
    ok = True
    for text in g_texts:
        row = _cocycle_payload(cfg, engine, spec.parse(text))
        ok = ok and row["paper_bound_ok"]
        writer.writerow([
            row["g"], row["d_g_e"], row["p"], row["lower"], row["tail_bound"],
            row["properness_count"], row["bound_20delta_ok"], row["paper_bound_ok"],
        ])
    _emit(buf.getvalue(), cfg.output)
    return 0 if ok else 1


def _expand_powers(expr: str) -> list[str]:
    """'a:1:30' (or 'a:30') expands to a^1 .. a^30."""
    parts = expr.split(":")
    if len(parts) == 2:
        base, lo, hi = parts[0], 1, int(parts[1])
    elif len(parts) == 3:
        base, lo, hi = parts[0], int(parts[1]), int(parts[2])
    else:
        raise ValueError(f"cannot parse power range {expr!r}")
    return [f"{base}^{k}" for k in range(lo, hi + 1)]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hypaction",
        description="Chain calculus and proper-action diagnostics on Cayley graphs",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--group", help="free:N | zm:M1,M2,... | ball:PATH")
    common.add_argument("--radius", type=int)
    common.add_argument("--delta", type=int)
    common.add_argument("--p", help="a float or 'auto'")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--memory-budget-mb", type=int, dest="memory_budget_mb")
    common.add_argument("--out", dest="output")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ball", parents=[common], help="ball summary and growth constant")
    cert = sub.add_parser("certify-delta", parents=[common], help="fineness certificate")
    cert.add_argument("--exhaustive-radius", type=int, default=2)
    chain = sub.add_parser("chain", parents=[common], help="dump f or h for a pair")
    chain.add_argument("a")
    chain.add_argument("b")
    chain.add_argument("--which", choices=("f", "h"), default="f")
    sub.add_parser("select-p", parents=[common], help="fit decay and choose the exponent")
    coc = sub.add_parser("cocycle", parents=[common], help="windowed cocycle norm at g")
    coc.add_argument("--g", required=True, help="the group element, as a word")
    ver = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    ver.add_argument("--exhaustive-radius", type=int, default=2)
    rep = sub.add_parser("report", parents=[common], help="CSV properness table")
    rep.add_argument("--g-words", help="comma-separated words")
    rep.add_argument("--powers", help="BASE:KMAX or BASE:KMIN:KMAX power range")

    args = parser.parse_args(argv)
    overrides = {
        k: getattr(args, k, None)
        for k in ("group", "radius", "delta", "p", "seed", "samples",
                  "memory_budget_mb", "output")
    }
    try:
        cfg = RunConfig.load(args.config, overrides)
        if args.command == "ball":
            return cmd_ball(cfg)
        if args.command == "certify-delta":
            return cmd_certify_delta(cfg, args.exhaustive_radius)
        if args.command == "chain":
            return cmd_chain(cfg, args.a, args.b, args.which)
        if args.command == "select-p":
            return cmd_select_p(cfg)
        if args.command == "cocycle":
            return cmd_cocycle(cfg, args.g)
        if args.command == "verify":
            return cmd_verify(cfg, args.exhaustive_radius)
        if args.command == "report":
            words: list[str] = []
            if args.powers:
                words.extend(_expand_powers(args.powers))
            if args.g_words:
                words.extend(w.strip() for w in args.g_words.split(",") if w.strip())
            if not words:
                parser.error("report needs --g-words or --powers")
            return cmd_report(cfg, words)
        parser.error(f"unknown command {args.command}")
    except HypactionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
