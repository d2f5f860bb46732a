"""Command-line surface: batch runs emitting CSV/JSON/SVG plus a verifier.

Subcommands: limit-curve | eigs | stokes | pseudospec | y-shape | verify.
Configuration comes from an optional JSON file (--config) with flag
overrides; all numeric output is written with 17 significant digits and
newline line endings so identical runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
from dataclasses import dataclass, field

import numpy as np

from . import accept, svg
from .curves import SpectralCurve, asymptote, trace_curve, y_shape
from .potential import Potential, PotentialError
from .pseudospec import grid as pseudo_grid
from .solver import eigenvalues
from .stokes import trace_diagram


def _fmt(x: float) -> str:
    return f"{x:.17g}"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    potential: Potential
    h_list: list = field(default_factory=lambda: [0.05])
    delta: float = 0.0
    beta: float | None = None
    a_min: float = 10.0
    a_max: float = 60.0
    a_step: float = 0.5
    rect: tuple = (-2.0, 10.0, -0.5, 2.5)
    nx: int = 49
    ny: int = 25
    N: int = 256
    energy: complex = complex(np.exp(1j * np.pi / 4))
    box: tuple = (-4.0, 4.0, -4.0, 4.0)
    out: pathlib.Path = pathlib.Path(".")
    emit_svg: bool = False

    def validate(self):
        for i, h in enumerate(self.h_list):
            if h <= 0:
                raise ConfigError(f"h[{i}]: must be > 0, got {h}")
        if self.a_min >= self.a_max:
            raise ConfigError(f"a_min/a_max: need a_min < a_max, got {self.a_min} >= {self.a_max}")
        if self.a_step <= 0:
            raise ConfigError(f"a_step: must be > 0, got {self.a_step}")
        if self.nx < 2 or self.ny < 2:
            raise ConfigError(f"grid: resolutions must be >= 2, got {self.nx}x{self.ny}")
        if self.delta < 0:
            raise ConfigError(f"delta: must be >= 0, got {self.delta}")
        if self.delta > 0 and self.beta is None and not self.potential.jumps:
            raise ConfigError("beta: required when delta > 0")
        return self


def _build_config(args) -> RunConfig:
    raw = {}
    if args.config:
        try:
            raw = json.loads(pathlib.Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"config: cannot read {args.config}: {e}")
    try:
        pot = Potential.from_json(raw["potential"]) if "potential" in raw \
            else Potential((0, 0, 1j))
    except (KeyError, TypeError, PotentialError) as e:
        raise ConfigError(f"potential: {e}")
    cfg = RunConfig(potential=pot)
    if "h" in raw:
        cfg.h_list = list(raw["h"])
    for key in ("delta", "beta", "a_min", "a_max", "a_step", "N", "nx", "ny"):
        if key in raw:
            setattr(cfg, key, raw[key])
    if "rect" in raw:
        cfg.rect = tuple(raw["rect"])
    if "box" in raw:
        cfg.box = tuple(raw["box"])
    if "energy" in raw:
        cfg.energy = complex(raw["energy"][0], raw["energy"][1])
    if "out" in raw:
        cfg.out = pathlib.Path(raw["out"])

    if args.h:
        cfg.h_list = args.h
    for name, attr in (("delta", "delta"), ("beta", "beta"), ("amin", "a_min"),
                       ("amax", "a_max"), ("astep", "a_step"), ("N", "N")):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, attr, v)
    if getattr(args, "grid", None):
        try:
            nx, ny = args.grid.lower().split("x")
            cfg.nx, cfg.ny = int(nx), int(ny)
        except ValueError:
            raise ConfigError(f"grid: expected NXxNY, got {args.grid}")
    if getattr(args, "rect", None):
        parts = [float(t) for t in args.rect.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"rect: expected a,b,c,d, got {args.rect}")
        cfg.rect = tuple(parts)
    if getattr(args, "E", None):
        parts = [float(t) for t in args.E.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"E: expected re,im, got {args.E}")
        cfg.energy = complex(*parts)
    if args.out:
        cfg.out = pathlib.Path(args.out)
    cfg.emit_svg = bool(getattr(args, "svg", False))
    return cfg.validate()


def _write(path: pathlib.Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    print(f"wrote {path}")


def _curve_csv(curve: SpectralCurve) -> str:
    lines = ["a,b"]
    lines += [f"{_fmt(a)},{_fmt(b)}" for a, b in curve.to_csv_rows()]
    return "\n".join(lines) + "\n"


def _piece_specs(cfg: RunConfig):
    """Endpoint/shift triples for every smooth piece of the configured run."""
    p = cfg.potential
    if cfg.delta > 0 and cfg.beta is not None and not p.jumps:
        return [(-1.0, cfg.beta, -cfg.delta), (cfg.beta, 1.0, +cfg.delta)]
    if p.jumps:
        edges = [-1.0] + [b for b, _ in p.jumps] + [1.0]
        out = []
        for a, b in zip(edges, edges[1:]):
            out.append((a, b, p.piece_shift(0.5 * (a + b))))
        return out
    return [(-1.0, 1.0, 0.0)]


def cmd_limit_curve(cfg: RunConfig) -> int:
    meta = []
    curves = []
    for x0, x1, s in _piece_specs(cfg):
        curve = trace_curve(cfg.potential, x0, x1, s, cfg.a_min, cfg.a_max,
                            cfg.a_step)
        curves.append(curve)
        tag = f"{x0:g}_{x1:g}"
        _write(cfg.out / f"curve_{tag}.csv", _curve_csv(curve))
        meta.append({"x0": x0, "x1": x1, "shift": s,
                     "asymptote": asymptote(cfg.potential, x0, x1, s),
                     "samples": len(curve.samples)})
    _write(cfg.out / "curve_asymptotes.json", json.dumps(meta, indent=2) + "\n")
    if cfg.emit_svg:
        _write(cfg.out / "curves.svg", svg.curves_svg(curves))
    return 0


def cmd_eigs(cfg: RunConfig) -> int:
    p = cfg.potential
    if cfg.delta > 0 and cfg.beta is not None and not p.jumps:
        p = p.with_two_sided_jump(cfg.delta, cfg.beta)
    rows = ["re,im,h,method,k,residual"]
    all_recs = []
    for h in cfg.h_list:
        recs = eigenvalues(p, h, cfg.N)
        all_recs.extend(recs)
        for r in recs:
            k = "" if r.k is None else str(r.k)
            rows.append(f"{_fmt(r.E.real)},{_fmt(r.E.imag)},{_fmt(r.h)},"
                        f"{r.method},{k},{_fmt(r.residual)}")
    _write(cfg.out / "eigenvalues.csv", "\n".join(rows) + "\n")
    if cfg.emit_svg:
        curves = []
        try:
            for x0, x1, s in _piece_specs(cfg):
                curves.append(trace_curve(cfg.potential, x0, x1, s,
                                          cfg.a_min, cfg.a_max, cfg.a_step))
        except Exception:
            pass  # overlay is best-effort; the CSV is the deliverable
        _write(cfg.out / "eigenvalues.svg",
               svg.curves_svg(curves, [r.E for r in all_recs]))
    return 0


def cmd_stokes(cfg: RunConfig) -> int:
    d = trace_diagram(cfg.potential, cfg.energy, cfg.box)
    _write(cfg.out / "stokes.json", json.dumps(d.to_json()) + "\n")
    truncated = [ln for ln in d.lines if ln.termination == "max_length"]
    if truncated:
        print(f"warning: {len(truncated)} lines hit the length cap before "
              "the box boundary; enlarge --rect/box if the diagram looks cut")
    if cfg.emit_svg:
        _write(cfg.out / "stokes.svg", svg.diagram_svg(d))
    return 0


def cmd_pseudospec(cfg: RunConfig) -> int:
    for h in cfg.h_list:
        g = pseudo_grid(cfg.potential, h, cfg.rect, cfg.nx, cfg.ny, cfg.N)
        rows = ["re,im,smin"]
        rows += [f"{_fmt(a)},{_fmt(b)},{_fmt(v)}" for a, b, v in g.to_csv_rows()]
        _write(cfg.out / f"pseudospec_h{h:g}.csv", "\n".join(rows) + "\n")
        if cfg.emit_svg:
            boundary = _symbol_boundary(cfg.potential, cfg.rect)
            _write(cfg.out / f"pseudospec_h{h:g}.svg",
                   svg.pseudogrid_svg(g, boundary))
    return 0


def _symbol_boundary(p: Potential, rect):
    xs = np.linspace(-1, 1, 401)
    vals = [p(float(x)) for x in xs]
    lo = min(v.imag for v in vals)
    hi = max(v.imag for v in vals)
    re_min = min(v.real for v in vals)
    pts = [complex(rect[1], lo), complex(re_min, lo), complex(re_min, hi),
           complex(rect[1], hi)]
    return pts


def cmd_y_shape(cfg: RunConfig) -> int:
    ys = y_shape(cfg.potential, a_max=max(cfg.a_max, 10.0))
    _write(cfg.out / "y_shape.json", json.dumps(ys.to_json()) + "\n")
    for name, c in (("ray", ys.ray), ("arc", ys.arc), ("infinite", ys.infinite)):
        _write(cfg.out / f"y_{name}.csv", _curve_csv(c))
    if cfg.emit_svg:
        _write(cfg.out / "y_shape.svg", svg.curves_svg(ys.curves()))
    return 0


def cmd_verify(args) -> int:
    rows = accept.run(args.filter)
    print(accept.format_table(rows))
    return 0 if all(r.passed for r in rows) else 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="stokescope",
        description="semiclassical spectra, limit-spectrum curves, Stokes "
                    "geometry and pseudospectra on [-1, 1]")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--h", type=float, action="append",
                    help="semiclassical parameter (repeatable)")
    ap.add_argument("--delta", type=float, help="jump size")
    ap.add_argument("--beta", type=float, help="jump location")
    ap.add_argument("--amin", type=float)
    ap.add_argument("--amax", type=float)
    ap.add_argument("--astep", type=float)
    ap.add_argument("--grid", help="pseudospectrum resolution NXxNY")
    ap.add_argument("--rect", help="pseudospectrum window re0,re1,im0,im1")
    ap.add_argument("--N", type=int, help="collocation resolution")
    ap.add_argument("--E", help="diagram energy re,im")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--svg", action="store_true", help="emit SVG renderings")
    ap.add_argument("--filter", help="verify: run only matching criteria")
    ap.add_argument("command", choices=["limit-curve", "eigs", "stokes",
                                        "pseudospec", "y-shape", "verify"])
    args = ap.parse_args(argv)

    if args.command == "verify":
        return cmd_verify(args)
    try:
        cfg = _build_config(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    dispatch = {
        "limit-curve": cmd_limit_curve,
        "eigs": cmd_eigs,
        "stokes": cmd_stokes,
        "pseudospec": cmd_pseudospec,
        "y-shape": cmd_y_shape,
    }
    return dispatch[args.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
