"""``fbar-lab`` command line interface.

Every report is JSON with a ``schema_version`` and the seed, or CSV with a
header row.  Reports go to ``--out DIR`` when given and to stdout otherwise;
a one-line human summary goes to stderr.  Equal seed and config give
byte-identical output.

Exit codes: 0 success, 2 precondition failure (bad input, missing config,
failed hypothesis), 3 numeric failure (near resonance, cap exceeded).
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import diagnostics, flow as flow_mod, roof as roof_mod, rotation, symbolic, towers, trigpoly
from ._stats import stream
from .boxes import Box, parse_box
from .errors import InvalidInputError, NumericFailure, PreconditionError
from .maps import Translation

SCHEMA_VERSION = "1.0"
DEFAULT_SURROGATE = {"g": 2.0, "depth": 5, "first": [1]}
TOY_TOWER_SURROGATE = {"g": 8.0, "depth": 4, "first": [1, 1, 1, 1, 200]}


# -- run configuration ------------------------------------------------------------

class RunConfig:
    """Resolved settings: rotation, roof, precision, seed, sample budget, output directory."""

    def __init__(self, data=None, *, seed=None, out=None, precision_bits=None):
        data = dict(data or {})
        self.data = data
        self.seed = int(seed if seed is not None else data.get("seed", 0))
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")
        self.out = out if out is not None else data.get("out")
        self.precision_bits = int(precision_bits if precision_bits is not None else data.get("precision_bits", rotation.DEFAULT_PRECISION_BITS))
        self.samples = data.get("samples")

    @classmethod
    def load(cls, path, **overrides):
        if path is None:
            return cls(None, **overrides)
        p = Path(path)
        if not p.is_file():
            raise InvalidInputError(f"config file not found: {path}")
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InvalidInputError("config must be a JSON object")
        return cls(data, **overrides)

    def rotation(self, default=None):
        spec = self.data.get("rotation")
        if spec is None:
            spec = {"surrogate": default or DEFAULT_SURROGATE}
        if isinstance(spec, str):
            spec = _read_json(spec)
        if "surrogate" in spec:
            s = spec["surrogate"]
            return rotation.surrogate_rotation(float(s.get("g", 2.0)), int(s.get("depth", 5)), tuple(s.get("first", (1,))), self.precision_bits)
        return rotation.RotationSpec(tuple(spec["pq_x"]), tuple(spec["pq_y"]), int(spec.get("precision_bits", self.precision_bits)))

    def roof(self, spec):
        data = self.data.get("roof", {"depth": 2})
        if isinstance(data, str):
            data = _read_json(data)
        if "x_terms" in data or "constant" in data:
            return roof_mod.RoofFunction.from_json(data)
        subs = {int(k): float(v) for k, v in data.get("substitute", {}).items()}
        return build_roof(spec, int(data.get("depth", 2)), subs)

    def budget(self, value, default):
        if value is not None:
            return value
        return int(float(self.samples)) if self.samples is not None else default


def _read_json(path):
    p = Path(path)
    if not p.is_file():
        raise InvalidInputError(f"file not found: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from None


def build_roof(spec, depth, substitutions):
    pps = {k: roof_mod.build_P_mu_n(k, mu, spec) for k, mu in substitutions.items()}
    return roof_mod.assemble_roof(spec, None, pps, depth)


# -- parsing helpers ------------------------------------------------------------------

def _ints(text):
    try:
        return [int(float(v)) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidInputError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidInputError(f"expected comma-separated numbers, got {text!r}") from None


def _lags(text):
    """``"1,2,4,...,4096"`` expands a doubling (or constant-step) progression."""
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if "..." not in parts:
        return _ints(text)
    i = parts.index("...")
    if i < 2 or i + 1 >= len(parts):
        raise InvalidInputError("an ellipsis needs two leading terms and a final term")
    head = [int(float(p)) for p in parts[:i]]
    last = int(float(parts[i + 1]))
    a, b = head[-2], head[-1]
    out = list(head)
    if a > 0 and b % a == 0 and b // a > 1:
        r = b // a
        while out[-1] * r <= last:
            out.append(out[-1] * r)
    elif b > a:
        while out[-1] + (b - a) <= last:
            out.append(out[-1] + (b - a))
    else:
        raise InvalidInputError(f"cannot extend progression {parts[:i]}")
    if out[-1] != last:
        out.append(last)
    return out


def _substitutions(text):
    out = {}
    for part in (p for p in str(text or "").split(",") if p.strip()):
        try:
            k, mu = part.split(":")
            out[int(k)] = float(mu)
        except ValueError:
            raise InvalidInputError(f"substitution must look like n:mu, got {part!r}") from None
    return out


def _count(value):
    """Sample counts such as ``1e6``."""
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"not a number: {value!r}") from None
    if v < 1 or v != math.floor(v):
        raise InvalidInputError(f"sample counts must be positive integers, got {value!r}")
    return int(v)


# -- emission -------------------------------------------------------------------------

def _plain(obj):
    """Convert numpy scalars, fractions, mpf and tuples for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


class Emitter:
    def __init__(self, cfg: RunConfig, command):
        self.cfg = cfg
        self.command = command

    def _write(self, text, name):
        if self.cfg.out:
            d = Path(self.cfg.out)
            d.mkdir(parents=True, exist_ok=True)
            (d / name).write_text(text, encoding="utf-8")
        else:
            click.echo(text, nl=False)

    def json(self, payload, name=None, summary=None):
        doc = {"schema_version": SCHEMA_VERSION, "command": self.command, "seed": self.cfg.seed}
        doc.update(_plain(payload))
        self._write(json.dumps(doc, indent=2, sort_keys=True) + "\n", name or self.command.replace(" ", "_") + ".json")
        if summary:
            click.echo(summary, err=True)

    def csv(self, header, rows, name=None, summary=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        self._write(buf.getvalue(), name or self.command.replace(" ", "_") + ".csv")
        if summary:
            click.echo(summary, err=True)


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


# -- command tree -------------------------------------------------------------------

@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="JSON run configuration.")
@click.option("--seed", type=int, default=None, help="Master RNG seed (u64).")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory (default: stdout).")
@click.option("--precision-bits", type=int, default=None, help="Working precision for exact rotation arithmetic.")
@click.pass_context
def cli(ctx, config_path, seed, out, precision_bits):
    """Laboratory for f-bar names, Rokhlin towers and special flows over T^2."""
    ctx.obj = RunConfig.load(config_path, seed=seed, out=out, precision_bits=precision_bits)


def _emitter(ctx, command):
    return Emitter(ctx.obj, command)


# rot ---------------------------------------------------------------------------------

@cli.group()
def rot():
    """Rotation vectors from partial quotients."""


@rot.command("build")
@click.option("--pq-x", default=None, help="Partial quotients of Omega, e.g. 1,2,3.")
@click.option("--pq-y", default=None, help="Partial quotients of Omega'.")
@click.pass_context
def rot_build(ctx, pq_x, pq_y):
    cfg = ctx.obj
    if pq_x or pq_y:
        if not (pq_x and pq_y):
            raise InvalidInputError("give both --pq-x and --pq-y")
        spec = rotation.RotationSpec(tuple(_ints(pq_x)), tuple(_ints(pq_y)), cfg.precision_bits)
    else:
        spec = cfg.rotation()
    payload = {
        "rotation": spec.to_dict(),
        "omega": [str(w) for w in spec.omega],
        "omega_float": list(spec.omega_float),
        "q_x": list(spec.q_x), "p_x": list(spec.p_x), "q_y": list(spec.q_y), "p_y": list(spec.p_y),
        "beta_x": [_mp(b) for b in spec.beta_x], "beta_y": [_mp(b) for b in spec.beta_y],
    }
    _emitter(ctx, "rot build").json(payload, summary=f"q_x = {list(spec.q_x)}, q_y = {list(spec.q_y)}")


def _mp(v):
    import mpmath
    return mpmath.nstr(v, 30)


@rot.command("check-growth")
@click.option("--mode", type=click.Choice(["paper", "surrogate"]), default="surrogate")
@click.option("--g", "g", type=float, default=10.0)
@click.option("--depth", type=int, default=None)
@click.pass_context
def rot_check_growth(ctx, mode, g, depth):
    spec = ctx.obj.rotation()
    depth = depth if depth is not None else min(len(spec.q_x), len(spec.q_y)) - 1
    levels = rotation.check_growth(spec, rotation.GrowthModel(mode, g), depth)
    payload = {
        "mode": mode, "g": g, "depth": depth,
        "levels": [{"n": lv.n, "passed": lv.passed, "skipped": list(lv.skipped),
                    "checks": [{"relation": c.relation, "lhs": c.lhs, "rhs": c.rhs, "passed": c.passed} for c in lv.checks]}
                   for lv in levels],
        "passed": all(lv.passed for lv in levels),
    }
    _emitter(ctx, "rot check-growth").json(payload, summary=f"growth ({mode}) {'holds' if payload['passed'] else 'fails'} up to depth {depth}")


# poly --------------------------------------------------------------------------------

@cli.group()
def poly():
    """Trigonometric polynomials: cohomological equation and Birkhoff sums."""


def _load_poly(ctx, path, degree, dim):
    if path:
        data = _read_json(path)
        items = data.get("terms", data) if isinstance(data, dict) else data
        return trigpoly.TrigPoly.from_json(items, dim=dim)
    return trigpoly.TrigPoly.random(dim, degree, stream(ctx.obj.seed, "cli/poly"))


@poly.command("solve-cohomological")
@click.option("--poly", "poly_path", default=None, help="Polynomial JSON: list of {k, re, im}.")
@click.option("--degree", type=int, default=5, help="Degree of a seeded random polynomial when --poly is absent.")
@click.option("--dim", type=int, default=2)
@click.option("--axis", type=click.Choice(["x", "y"]), default="x")
@click.pass_context
def poly_solve(ctx, poly_path, degree, dim, axis):
    spec = ctx.obj.rotation()
    P = _load_poly(ctx, poly_path, degree, dim)
    Q = trigpoly.solve_cohomological(P, spec, axis=axis)
    rng = stream(ctx.obj.seed, "cli/poly/check")
    theta = rng.random((1000, dim)) if dim == 2 else rng.random(1000)
    shift = np.asarray(spec.omega_float) if dim == 2 else spec.omega_float[0 if axis == "x" else 1]
    residual = float(np.max(np.abs(P(theta) - Q(np.mod(theta + shift, 1.0)) + Q(theta))))
    payload = {"P": P.to_json(), "Q": Q.to_json(), "residual": residual, "norm_bound_P": trigpoly.norm_bound(P, 0)}
    _emitter(ctx, "poly solve-cohomological").json(payload, summary=f"max residual {residual:.3e}")


@poly.command("birkhoff")
@click.option("--m", "m", type=int, required=True)
@click.option("--poly", "poly_path", default=None)
@click.option("--degree", type=int, default=5)
@click.option("--points", type=int, default=16)
@click.option("--emit", type=click.Choice(["csv", "json"]), default="csv")
@click.pass_context
def poly_birkhoff(ctx, m, poly_path, degree, points, emit):
    spec = ctx.obj.rotation()
    P = _load_poly(ctx, poly_path, degree, 2)
    theta = stream(ctx.obj.seed, "cli/poly/birkhoff").random((points, 2))
    sums = trigpoly.birkhoff_sum(P, spec, m, theta)
    Q = trigpoly.solve_cohomological(P, spec)
    off = np.array([spec.offsets(m, "x"), spec.offsets(m, "y")])
    tele = Q(np.mod(theta + off, 1.0)) - Q(theta)
    rows = [(float(t[0]), float(t[1]), m, float(s), float(c), float(abs(s - c))) for t, s, c in zip(theta, sums, tele)]
    if emit == "csv":
        _emitter(ctx, "poly birkhoff").csv(["x", "y", "m", "birkhoff_sum", "telescoped", "abs_diff"], rows)
    else:
        _emitter(ctx, "poly birkhoff").json({"m": m, "rows": [dict(zip(["x", "y", "m", "birkhoff_sum", "telescoped", "abs_diff"], r)) for r in rows]})


# roof --------------------------------------------------------------------------------

@cli.group()
def roof():
    """Roof functions and plateau polynomials."""


@roof.command("build")
@click.option("--depth", type=int, required=True)
@click.option("--substitute", default="", help="Plateau substitutions n:mu,...")
@click.pass_context
def roof_build(ctx, depth, substitute):
    spec = ctx.obj.rotation()
    r = build_roof(spec, depth, _substitutions(substitute))
    low, where = r.grid_minimum()
    payload = {"rotation": spec.to_dict(), "roof": r.to_json(), "mean": r.mean, "grid_minimum": low, "grid_argmin": list(where)}
    _emitter(ctx, "roof build").json(payload, summary=f"roof depth {depth}, grid minimum {low:.6g}")


@roof.command("verify-plateau")
@click.option("--n", "n", type=int, required=True)
@click.option("--mu", type=float, required=True)
@click.option("--r", "r", type=int, default=2)
@click.pass_context
def roof_verify_plateau(ctx, n, mu, r):
    spec = ctx.obj.rotation()
    pp = roof_mod.build_P_mu_n(n, mu, spec, r=r)
    payload = {
        "n": n, "mu": mu, "q_n": pp.q, "q_next": pp.q_next, "inv_eta": pp.inv_eta,
        "eta_window": list(pp.eta_choice.window),
        "flags": {str(k): v for k, v in pp.flags.items()},
        "margins": {str(k): v for k, v in pp.margins.items()},
        "details": pp.details,
    }
    ok = [str(k) for k, v in pp.flags.items() if v]
    _emitter(ctx, "roof verify-plateau").json(payload, summary=f"items satisfied: {', '.join(ok) or 'none'}")


# flow --------------------------------------------------------------------------------

@cli.group()
def flow():
    """The normalised time-one map G of the special flow."""


def _time_one(ctx):
    spec = ctx.obj.rotation()
    return flow_mod.TimeOneMap.build(ctx.obj.roof(spec), spec)


@flow.command("orbit")
@click.option("--steps", type=int, required=True)
@click.option("--start", default=None, help="x,y,z (default: seeded random point).")
@click.option("--emit", type=click.Choice(["csv", "json"]), default="csv")
@click.pass_context
def flow_orbit(ctx, steps, start, emit):
    G = _time_one(ctx)
    p = _floats(start) if start else stream(ctx.obj.seed, "cli/flow/orbit").random(3).tolist()
    if len(p) != 3:
        raise InvalidInputError("--start needs three coordinates")
    orb = G.flow.orbit(np.asarray(p), steps)
    rows = [(i, float(a), float(b), float(c)) for i, (a, b, c) in enumerate(orb)]
    if emit == "csv":
        _emitter(ctx, "flow orbit").csv(["step", "x", "y", "z"], rows, summary=f"{steps} steps")
    else:
        _emitter(ctx, "flow orbit").json({"rows": [dict(zip(["step", "x", "y", "z"], r)) for r in rows]})


@flow.command("measure")
@click.option("--box", "box", required=True, help="x0,x1,y0,y1,z0,z1")
@click.option("--samples", default=None)
@click.pass_context
def flow_measure(ctx, box, samples):
    G = _time_one(ctx)
    A = parse_box(box)
    n = _count(ctx.obj.budget(samples, 10**5))
    est = flow_mod.preimage_measure(A, G, n, stream(ctx.obj.seed, "cli/flow/measure"))
    direct = G.flow.sample(n, stream(ctx.obj.seed, "cli/flow/measure/direct"))
    hits = int(np.count_nonzero(A.contains(direct)))
    p = hits / n
    payload = {
        "box": A.to_dict(), "samples": n, "exact": G.measure_box(A),
        "mu_A": {"value": p, "se": math.sqrt(p * (1 - p) / n), "n": n},
        "mu_G_inverse_A": est.to_dict(),
    }
    _emitter(ctx, "flow measure").json(payload, summary=f"mu(A) = {p:.6f}, mu(G^-1 A) = {est.value:.6f} +- {est.se:.1e}")


# sym ---------------------------------------------------------------------------------

@cli.group()
def sym():
    """Names, f-bar distances and property P."""


def _read_word(path):
    p = Path(path)
    if not p.is_file():
        raise InvalidInputError(f"file not found: {path}")
    text = p.read_text(encoding="utf-8").strip()
    try:
        if "," in text:
            return symbolic.Word.from_csv(text)
        if text.isdigit() or not text:
            return symbolic.Word.from_string(text)
    except ValueError:
        raise InvalidInputError(f"{path}: symbols must be positive integers") from None
    # any other text: one symbol per character, by code point
    return symbolic.Word(tuple(ord(c) for c in text))


@sym.command("fbar")
@click.option("--file-a", required=True)
@click.option("--file-b", required=True)
@click.option("--emit", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def sym_fbar(ctx, file_a, file_b, emit):
    a, b = _read_word(file_a), _read_word(file_b)
    value = symbolic.fbar(a, b)
    if emit == "text":
        click.echo(f"{value:.17g}")
    else:
        lcs = symbolic.match_count(a, b)
        _emitter(ctx, "sym fbar").json({"fbar": value, "lcs": lcs, "lengths": [len(a), len(b)],
                                         "hamming": symbolic.hamming(a, b) if len(a) == len(b) else None})


@sym.command("name")
@click.option("--point", required=True, help="x,y,z")
@click.option("--n", "n", type=int, required=True)
@click.option("--level", type=int, default=1)
@click.pass_context
def sym_name(ctx, point, n, level):
    G = _time_one(ctx)
    w = symbolic.p_name(G, symbolic.CubePartition(level), _floats(point), n)
    click.echo(w.to_csv())


@sym.command("property-p")
@click.option("--alpha", type=float, required=True)
@click.option("--delta", type=float, required=True)
@click.option("--n", "n", type=int, required=True)
@click.option("--centers", type=int, default=10)
@click.option("--samples", default=None)
@click.option("--level", type=int, default=1)
@click.option("--seed", "local_seed", type=int, default=None, help="Overrides the global seed.")
@click.pass_context
def sym_property_p(ctx, alpha, delta, n, centers, samples, level, local_seed):
    if local_seed is not None:
        ctx.obj.seed = local_seed
    G = _time_one(ctx)
    report = symbolic.estimate_property_P(G, symbolic.CubePartition(level), alpha, delta, n,
                                          samples=_count(ctx.obj.budget(samples, 1000)), centers=centers, seed=ctx.obj.seed)
    _emitter(ctx, "sym property-p").json(report.to_dict(), summary=f"P({alpha}, {delta}, {n}): {report.verdict}")


# tower -------------------------------------------------------------------------------

@cli.group()
def tower():
    """Rokhlin towers: certificates, products, paper towers and LB schedules."""


def _load_tower(ctx, path, default_height=None):
    if path is None:
        spec = ctx.obj.rotation()
        base = Box((0.0, 0.0, 0.0), (0.05, 1.0, 1.0))
        h = default_height or max(1, towers.slab_return_time(spec, 0.05) - 1)
        return towers.RokhlinTower(base, h, flow_mod.TimeOneMap.build(ctx.obj.roof(spec), spec))
    data = _read_json(path)
    try:
        base, h = Box.from_dict(data["base"]), int(data["height"])
    except KeyError as exc:
        raise InvalidInputError(f"tower description is missing {exc}") from None
    return towers.RokhlinTower(base, h, _time_one(ctx))


@tower.command("verify")
@click.option("--tower", "tower_path", default=None, help="JSON {base: {lo, length}, height}.")
@click.option("--samples", default=None)
@click.pass_context
def tower_verify(ctx, tower_path, samples):
    t = _load_tower(ctx, tower_path)
    n = _count(ctx.obj.budget(samples, 10**4))
    cert = towers.verify_disjointness(t, n, ctx.obj.seed)
    rho = towers.precision(t, n, ctx.obj.seed)
    payload = {"tower": t.to_dict(), "disjointness": cert.to_dict(), "size": t.size, "precision": rho.to_dict()}
    _emitter(ctx, "tower verify").json(payload, summary=f"disjointness {'not refuted' if cert.passed else 'refuted'} in {n} samples")


@tower.command("mono")
@click.option("--level", type=int, required=True, help="Partition level n (2^(3n) cubes).")
@click.option("--tower", "tower_path", default=None)
@click.option("--samples", default=None)
@click.pass_context
def tower_mono(ctx, level, tower_path, samples):
    t = _load_tower(ctx, tower_path)
    n = _count(ctx.obj.budget(samples, 10**4))
    report = towers.monochromaticity(t, symbolic.CubePartition(level), n, ctx.obj.seed, difference_samples=n)
    payload = report.to_dict()
    payload["consistent"] = report.consistent
    _emitter(ctx, "tower mono").json(payload, summary=f"Delta = {report.delta.value:.6g} +- {report.delta.se:.1e}")


@tower.command("product")
@click.option("--c", "c", type=float, default=0.9)
@click.option("--toy", type=click.Choice(["periodic", "near-periodic"]), default="periodic")
@click.option("--samples", default=None)
@click.pass_context
def tower_product(ctx, c, toy, samples):
    n = _count(ctx.obj.budget(samples, 10**4))
    if toy == "periodic":
        tp, tm = towers.periodic_toy_towers()
        levels = towers.exact_product_levels(tp, tm)
        overlaps = towers.overlapping_levels(levels)
        pt = towers.product_tower(tp, tm, c, samples=n, seed=ctx.obj.seed, rho=(0.0, 0.0))
        payload = {"product": pt.to_dict(), "levels": len(levels), "overlapping_pairs": overlaps}
    else:
        tp, tm = near_periodic_towers()
        pt = towers.product_tower(tp, tm, c, samples=n, seed=ctx.obj.seed)
        payload = {"product": pt.to_dict()}
    _emitter(ctx, "tower product").json(payload, summary=f"size {pt.size.value:.6g} vs floor {pt.size_floor:.6g}: {'certified' if pt.certified else 'not certified'}")


def near_periodic_towers():
    """Heights ``(3, 2)`` under a rotation close to ``(1/3, 1/2)``."""
    spec = rotation.RotationSpec((3, 1000), (2, 1000))
    T = Translation.from_rotation(spec)
    fp = Box((0.0, 0.0, 0.0), (0.3, 1.0, 1.0))
    fm = Box((0.0, 0.0, 0.0), (1.0, 0.45, 1.0))
    return towers.RokhlinTower(fp, 3, T), towers.RokhlinTower(fm, 2, T)


@tower.command("paper-build")
@click.option("--m", "m", type=int, required=True)
@click.option("--mu", type=float, required=True)
@click.option("--samples", default=None)
@click.option("--l-cap", type=int, default=8)
@click.pass_context
def tower_paper_build(ctx, m, mu, samples, l_cap):
    spec = ctx.obj.rotation(TOY_TOWER_SURROGATE)
    pp = roof_mod.build_P_mu_n(m, mu, spec)
    r = roof_mod.assemble_roof(spec, None, {m: pp}, depth=m)
    report = towers.build_paper_towers(r, spec, m, samples=_count(ctx.obj.budget(samples, 10**4)), seed=ctx.obj.seed, l_cap=l_cap)
    payload = report.to_dict()
    payload["rotation"] = spec.to_dict()
    _emitter(ctx, "tower paper-build").json(payload, summary="all checks pass" if report.passed else "; ".join(report.diagnostics))


@tower.command("schedule")
@click.option("--law", default="(n+1)^-0.25")
@click.option("--mode", type=click.Choice(["single", "product"]), default="single")
@click.option("--steps", type=int, default=1000)
@click.option("--emit", type=click.Choice(["csv", "json"]), default="csv")
@click.pass_context
def tower_schedule(ctx, law, mode, steps, emit):
    sched = towers.lb_schedule(law, mode, steps)
    summary = f"alpha_{steps} = {sched.limit:.6f}; first n with alpha >= 0.5: {sched.first_crossing}; diverges: {sched.diverges}"
    if emit == "csv":
        _emitter(ctx, "tower schedule").csv(["n", "alpha", "delta"], sched.rows(), summary=summary)
    else:
        d = sched.to_dict()
        _emitter(ctx, "tower schedule").json(d, summary=summary)


# diag --------------------------------------------------------------------------------

@cli.group()
def diag():
    """Mixing diagnostics."""


@diag.command("correlation")
@click.option("--lags", default="0,1,2,4,...,4096")
@click.option("--samples", default=None)
@click.option("--box-a", default="0,0.5,0,0.5,0,0.5")
@click.option("--box-b", default="0,0.5,0,0.5,0,0.5")
@click.option("--emit", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--seed", "local_seed", type=int, default=None, help="Overrides the global seed.")
@click.pass_context
def diag_correlation(ctx, lags, samples, box_a, box_b, emit, local_seed):
    if local_seed is not None:
        ctx.obj.seed = local_seed
    G = _time_one(ctx)
    series = diagnostics.correlation(G, parse_box(box_a), parse_box(box_b), _lags(lags),
                                     _count(ctx.obj.budget(samples, 10**5)), ctx.obj.seed)
    if emit == "csv":
        rows = [(r["lag"], r["estimate"], r["signed"], r["se"]) for r in series.rows()]
        _emitter(ctx, "diag correlation").csv(["lag", "estimate", "signed", "se"], rows)
    else:
        _emitter(ctx, "diag correlation").json(series.to_dict())


@diag.command("criterion")
@click.option("--n", "n", type=int, required=True)
@click.option("--m", "m_list", default="10,100,1000")
@click.option("--grid", type=int, default=512)
@click.option("--r", "r", type=float, default=None, help="Override the excluded half-width r_n.")
@click.pass_context
def diag_criterion(ctx, n, m_list, grid, r):
    spec = ctx.obj.rotation()
    report = diagnostics.check_mixing_criterion(ctx.obj.roof(spec), spec, n, _ints(m_list), grid, r=r)
    _emitter(ctx, "diag criterion").json(report.to_dict(), summary=f"criterion at n = {n}: {'holds' if report.passed else 'fails'} on the grid")


# -- entry point ------------------------------------------------------------------------

def main(argv=None):
    try:
        cli.main(args=argv, prog_name="fbar-lab", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except PreconditionError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except NumericFailure as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
