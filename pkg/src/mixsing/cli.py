"""Command-line entry point: ``mixsing <subcommand> ...`` prints one JSON report."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import jsonschema
import numpy as np

from . import __version__
from . import contact, geometry, links, newton, nondegen
from .expr_parser import ParseError, format_map, format_polynomial, parse_polynomial
from .mixed_core import MixedMap, MixedPolynomial

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class InputError(Exception):
    """Bad user input: missing file, malformed JSON, unparsable polynomial."""


# ---------------------------------------------------------------------------
# input helpers


def data_dir() -> Path:
    return Path(str(resources.files("mixsing") / "data"))


def resolve_path(raw: str, base: Path | None = None) -> Path:
    """Find ``raw`` as given, relative to ``base``, or inside the bundled data directory."""
    candidates = [Path(raw)]
    if base is not None:
        candidates.append(base / raw)
    candidates.append(data_dir() / raw)
    for cand in candidates:
        if cand.is_file():
            return cand
    raise InputError(f"file not found: {raw}")


def _load_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _parse_poly(text: str, nvars: int) -> MixedPolynomial:
    res = parse_polynomial(text, nvars)
    if not isinstance(res, MixedPolynomial):
        raise InputError(f"cannot parse {text!r}: {res.message} (kind={res.kind}, byte {res.position})")
    return res


def load_map(args: argparse.Namespace, base: Path | None) -> MixedMap:
    if getattr(args, "map", None):
        data = _load_json(resolve_path(args.map, base))
        try:
            return MixedMap.from_json(data)
        except ParseError as exc:
            d = exc.diagnostic
            raise InputError(f"{args.map}: {d.message} (kind={d.kind}, byte {d.position})") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.map}: malformed map ({exc})") from exc
    if getattr(args, "expr", None):
        if not args.nvars:
            raise InputError("--expr needs --nvars")
        return MixedMap([_parse_poly(e, args.nvars) for e in args.expr])
    raise InputError("a map is required (--map FILE or --expr TEXT --nvars N)")


def load_frame(args: argparse.Namespace, base: Path | None) -> geometry.SiegelFrame:
    if args.frame:
        data = _load_json(resolve_path(args.frame, base))
    elif args.lam:
        try:
            data = json.loads(args.lam)
        except json.JSONDecodeError as exc:
            raise InputError(f"--lambda: invalid JSON ({exc})") from exc
    else:
        raise InputError("a frame is required (--frame FILE or --lambda JSON)")
    try:
        return geometry.SiegelFrame.from_json(data)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"malformed frame ({exc})") from exc


def int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


# ---------------------------------------------------------------------------
# subcommand bodies: each returns (config echo, payload)


def cmd_analyze(args, base):
    fmap = load_map(args, base)
    comps = []
    for c in fmap.components:
        flag, wits = newton.purely_mixed(c) if not c.is_zero() else (False, [])
        comps.append(
            {
                "text": format_polynomial(c),
                "holomorphic": c.is_holomorphic(),
                "radial_degree": c.radial_degree(),
                "radial_support": sorted(list(p) for p in newton.radial_support(c)),
                "newton_vertices": [list(v) for v in newton.newton_vertices(c)] if not c.is_zero() else [],
                "convenient": newton.is_convenient(c) if not c.is_zero() else False,
                "purely_mixed": flag,
                "purely_mixed_witnesses": wits,
            }
        )
    cert = nondegen.certify_structured(fmap)
    payload = {
        "nvars": fmap.nvars,
        "k": fmap.k,
        "components": comps,
        "algebraic_obstruction": nondegen.algebraic_icis_obstruction(fmap).to_json(),
        "structural_certificate": cert.to_json() if cert else None,
    }
    return {"map": format_map(fmap)}, payload


def cmd_faces(args, base):
    fmap = load_map(args, base)
    classes = newton.face_classes(fmap, args.bound, not args.no_hull)
    payload = {
        "weights": [{"P": list(w), "faces": [format_polynomial(f) for f in faces]} for w, faces in classes],
        "bound": args.bound,
    }
    return {"map": format_map(fmap), "bound": args.bound, "hull": not args.no_hull}, payload


def cmd_nondeg(args, base):
    fmap = load_map(args, base)
    kwargs: dict[str, Any] = dict(budget=args.budget, seed=args.seed, bound=args.bound, tol=args.tol, workers=args.workers)
    if args.mode != "strong":
        kwargs["certify"] = not args.no_certify
    if args.mode == "partial":
        kwargs["torus"] = args.torus
        kwargs["assume_holomorphic_partial"] = args.assume_holomorphic_partial
    report = nondegen.refute(fmap, args.mode, **kwargs)
    config = {
        "map": format_map(fmap),
        "mode": args.mode,
        "bound": args.bound,
        "budget": args.budget,
        "tol": args.tol,
        "torus": args.torus,
        "certify": not args.no_certify,
        "assume_holomorphic_partial": args.assume_holomorphic_partial,
    }
    return config, report.to_json()


def _float_frame(args, base) -> list[list[complex]]:
    if args.frame:
        data = _load_json(resolve_path(args.frame, base))
    elif args.lam:
        try:
            data = json.loads(args.lam)
        except json.JSONDecodeError as exc:
            raise InputError(f"--lambda: invalid JSON ({exc})") from exc
    else:
        raise InputError("a frame is required (--frame FILE or --lambda JSON)")
    rows = data["lambda"] if isinstance(data, dict) else data
    try:
        return [[complex(float(v[0]), float(v[1])) if isinstance(v, list) else complex(float(v)) for v in row]
                for row in rows]
    except (TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed frame ({exc})") from exc


def cmd_siegel(args, base):
    if args.advisory:
        lam = _float_frame(args, base)
        report = geometry.advisory_admissibility(lam)
        return {"frame": [[[v.real, v.imag] for v in row] for row in lam], "advisory": True}, report.to_json()
    frame = load_frame(args, base)
    report = geometry.is_admissible(frame)
    payload = report.to_json(frame)
    payload["strongly_admissible"] = geometry.is_strongly_admissible(frame)
    payload["siegel_map"] = format_map(geometry.build_siegel_map(frame))
    return {"frame": frame.to_json()}, payload


def cmd_covering(args, base):
    fmap = load_map(args, base)
    n = fmap.nvars
    a = args.a if len(args.a) > 1 else args.a * n
    b = args.b if len(args.b) > 1 else args.b * n
    phi = geometry.MixedCovering(a, b)
    pulled = geometry.pullback(phi, fmap)
    cert = nondegen.certify_structured(pulled, args.assume_holomorphic_partial)
    payload = {
        "covering": phi.to_json(),
        "pullback": format_map(pulled),
        "pullback_terms": pulled.to_json(),
        "purely_mixed": [newton.purely_mixed(c)[0] for c in pulled.components],
        "structural_certificate": cert.to_json() if cert else None,
    }
    return {"map": format_map(fmap), "a": list(a), "b": list(b)}, payload


def _parse_matrix(text: str) -> list[list[Any]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"--lambda: invalid JSON ({exc})") from exc
    if isinstance(data, dict):
        data = data.get("lambda")
    try:
        frame = geometry.SiegelFrame(data)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"--lambda: malformed matrix ({exc})") from exc
    return [list(row) for row in frame.lam]


def cmd_hamm(args, base):
    lam = _parse_matrix(args.lam)
    n = len(lam[0]) if lam else 0
    a = args.a if len(args.a) > 1 else args.a * n
    if args.b:
        b = args.b if len(args.b) > 1 else args.b * n
        target = geometry.mixed_hamm_map(lam, a, b)
    else:
        b = None
        target = geometry.hamm_map(lam, a)
    if args.t is not None:
        if b is None:
            raise InputError("--t needs --b (the family joins the mixed and holomorphic Hamm maps)")
        target = geometry.hamm_family(target, geometry.hamm_map(lam, a), args.t)
    minors = geometry.hamm_minors(lam)
    payload: dict[str, Any] = {
        "map": format_map(target),
        "map_terms": target.to_json(),
        "minors": [{"columns": [i + 1 for i in s], "value": v.to_json()} for s, v in sorted(minors.items())],
        "all_minors_nonzero": geometry.all_minors_nonzero(lam),
        "algebraic_obstruction": nondegen.algebraic_icis_obstruction(target).to_json(),
    }
    if args.radii:
        probe = nondegen.icis_probe(target, args.radii, args.samples, args.seed, args.tol, args.workers)
        trans = links.TransversalityReport()
        for r in args.radii:
            sample = links.sample_link(target, r, args.samples, args.seed, args.workers)
            trans.entries.extend(links.transversality_check(target, sample, args.tol).entries)
        payload["icis_probe"] = probe.to_json()
        payload["transversality"] = trans.to_json()
    config = {"lambda": [[c.to_json() for c in row] for row in lam], "a": a, "b": b, "t": args.t,
              "radii": args.radii, "samples": args.samples, "tol": args.tol}
    return config, payload


def cmd_contact_scan(args, base):
    fmap = load_map(args, base)
    rep = contact.holomorphic_like_scan(
        fmap, args.r, args.samples, args.seed, on_link=not args.ambient, workers=args.workers
    )
    return {"map": format_map(fmap), "r": args.r, "samples": args.samples, "on_link": not args.ambient}, rep.to_json()


def cmd_openbook_scan(args, base):
    big_g = load_map(args, base)
    g = _parse_poly(args.g, big_g.nvars)
    schedule = args.c_schedule if args.c_schedule else list(links.DEFAULT_C_SCHEDULE)
    rep = links.openbook_scan(big_g, g, args.r, schedule, args.samples, args.seed, args.projection, args.workers)
    config = {"map": format_map(big_g), "g": format_polynomial(g), "r": args.r, "samples": args.samples,
              "c_schedule": schedule, "projection": args.projection}
    return config, rep.to_json()


def cmd_link_sample(args, base):
    fmap = load_map(args, base)
    sample = links.sample_link(fmap, args.r, args.count, args.seed, args.workers)
    return {"map": format_map(fmap), "r": args.r, "count": args.count}, sample.to_json(include_points=not args.summary)


def cmd_transversality(args, base):
    fmap = load_map(args, base)
    report = links.TransversalityReport()
    for r in args.radii:
        sample = links.sample_link(fmap, r, args.samples, args.seed, args.workers)
        report.entries.extend(links.transversality_check(fmap, sample, args.tol).entries)
    return {"map": format_map(fmap), "radii": args.radii, "samples": args.samples, "tol": args.tol}, report.to_json()


def cmd_milnor_probe(args, base):
    fmap = load_map(args, base)
    rep = links.milnor_radius_probe(fmap, args.radii, args.samples, args.seed, args.delta_factor, args.tol, args.workers)
    config = {"map": format_map(fmap), "radii": args.radii, "samples": args.samples,
              "delta_factor": args.delta_factor, "tol": args.tol}
    return config, rep.to_json()


COMMANDS: dict[str, Callable] = {
    "analyze": cmd_analyze,
    "faces": cmd_faces,
    "nondeg": cmd_nondeg,
    "siegel": cmd_siegel,
    "covering": cmd_covering,
    "hamm": cmd_hamm,
    "contact-scan": cmd_contact_scan,
    "openbook-scan": cmd_openbook_scan,
    "link-sample": cmd_link_sample,
    "transversality": cmd_transversality,
    "milnor-probe": cmd_milnor_probe,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 on its own; keep that but raise for batch use
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mixsing", description="Mixed polynomial singularity toolkit.")
    parser.add_argument("--version", action="version", version=f"mixsing {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser, needs_map: bool = True) -> None:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
        p.add_argument("--output", "-o", help="write the report here instead of stdout")
        if needs_map:
            p.add_argument("--map", help="map JSON file")
            p.add_argument("--expr", action="append", help="component text (repeatable)")
            p.add_argument("--nvars", type=int)

    p = sub.add_parser("analyze", help="supports, Newton data, convenience, purely mixed terms")
    common(p)
    p = sub.add_parser("faces", help="distinct face maps F_P")
    common(p)
    p.add_argument("--bound", type=int, default=newton.DEFAULT_BOUND)
    p.add_argument("--no-hull", action="store_true")
    p = sub.add_parser("nondeg", help="search for degenerate faces")
    common(p)
    p.add_argument("--mode", choices=["plain", "strong", "partial"], default="plain")
    p.add_argument("--bound", type=int, default=newton.DEFAULT_BOUND)
    p.add_argument("--budget", type=int, default=nondegen.DEFAULT_BUDGET)
    p.add_argument("--tol", type=positive_float, default=nondegen.DEFAULT_TOL)
    p.add_argument("--torus", choices=["subset", "ambient"], default="subset")
    p.add_argument("--no-certify", action="store_true")
    p.add_argument("--assume-holomorphic-partial", action="store_true")
    p = sub.add_parser("siegel", help="exact admissibility certificate for a frame")
    common(p, needs_map=False)
    p.add_argument("--frame")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--advisory", action="store_true", help="floating-point LPs for inexact entries; no certificate")
    p = sub.add_parser("covering", help="pull a map back by a mixed covering")
    common(p)
    p.add_argument("--a", type=int_list, required=True)
    p.add_argument("--b", type=int_list, required=True)
    p.add_argument("--assume-holomorphic-partial", action="store_true")
    p = sub.add_parser("hamm", help="Hamm, mixed Hamm and interpolating maps")
    common(p, needs_map=False)
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--a", type=int_list, required=True)
    p.add_argument("--b", type=int_list)
    p.add_argument("--t", type=str, default=None, help="family parameter (exact decimal or p/q)")
    p.add_argument("--radii", type=float_list)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--tol", type=positive_float, default=nondegen.DEFAULT_TOL)
    p = sub.add_parser("contact-scan", help="sign of D on link samples")
    common(p)
    p.add_argument("--r", type=positive_float, default=1.0)
    p.add_argument("--samples", type=int, default=500)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--on-link", action="store_true", default=True)
    grp.add_argument("--ambient", action="store_true")
    p = sub.add_parser("openbook-scan", help="d Theta_g(R_c) positivity scan")
    common(p)
    p.add_argument("--g", required=True, help="angle function text")
    p.add_argument("--r", type=positive_float, default=1.0)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--c-schedule", type=float_list)
    p.add_argument("--projection", choices=["complex", "real"], default="complex")
    p = sub.add_parser("link-sample", help="points of V_F on a sphere")
    common(p)
    p.add_argument("--r", type=positive_float, default=1.0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--summary", action="store_true", help="omit the point list")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p = sub.add_parser("transversality", help="rank of d(F, rho) on link samples")
    common(p)
    p.add_argument("--radii", type=float_list, default=[1.0])
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--tol", type=positive_float, default=1e-8)
    p = sub.add_parser("milnor-probe", help="transversality of nearby fibers to spheres")
    common(p)
    p.add_argument("--radii", type=float_list, default=[1.0, 0.1, 0.01])
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--delta-factor", type=positive_float, default=0.1)
    p.add_argument("--tol", type=positive_float, default=1e-8)
    p = sub.add_parser("batch", help="run every line of a manifest")
    p.add_argument("manifest")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--output", "-o")
    return parser


# ---------------------------------------------------------------------------
# running


def load_schema() -> dict[str, Any]:
    return json.loads((data_dir() / "report.schema.json").read_text())


def _envelope(command: str, seed: int | None, config: dict[str, Any], payload: Any, elapsed: float | None) -> dict:
    return to_jsonable(
        {
            "tool": "mixsing",
            "version": __version__,
            "subcommand": command,
            "seed": seed,
            "config": config,
            "timing": {"seconds": elapsed} if elapsed is not None else None,
            "payload": payload,
        }
    )


def run_command(argv: Sequence[str], base: Path | None = None, workers: int | None = None) -> dict[str, Any]:
    """Parse and run one non-batch invocation; raises InputError on bad input."""
    args = build_parser().parse_args(list(argv))
    if args.command == "batch":
        raise InputError("batch manifests cannot nest")
    if workers is not None:
        args.workers = workers
    if args.workers < 1:
        raise InputError("--workers must be at least 1")
    start = time.perf_counter()
    try:
        config, payload = COMMANDS[args.command](args, base)
    except (ParseError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ParseError):
            d = exc.diagnostic
            raise InputError(f"{d.message} (kind={d.kind}, byte {d.position})") from exc
        raise InputError(str(exc)) from exc
    elapsed = time.perf_counter() - start if args.timing else None
    report = _envelope(args.command, args.seed, config, payload, elapsed)
    jsonschema.validate(report, load_schema())
    return report


def read_manifest(path: Path) -> list[list[str]]:
    items = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            items.append(shlex.split(line))
    return items


def run_batch(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    path = resolve_path(args.manifest)
    start = time.perf_counter()
    results = []
    failures = 0
    for argv in read_manifest(path):
        entry: dict[str, Any] = {"argv": argv}
        try:
            entry["report"] = run_command(argv, path.parent, args.workers)
            entry["status"] = "ok"
        except InputError as exc:
            failures += 1
            entry["status"] = "input_error"
            entry["error"] = str(exc)
        except Exception as exc:  # one broken item must not stop the batch
            failures += 1
            entry["status"] = "internal_error"
            entry["error"] = f"{type(exc).__name__}: {exc}"
        results.append(entry)
    elapsed = time.perf_counter() - start if args.timing else None
    payload = {"items": results, "count": len(results), "failures": failures}
    report = _envelope("batch", None, {"manifest": args.manifest}, payload, elapsed)
    jsonschema.validate(report, load_schema())
    return report, EXIT_INTERNAL if failures else EXIT_OK


def dumps(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _points_csv(report: dict[str, Any]) -> str:
    buf = io.StringIO()
    pts = report["payload"].get("points", [])
    n = len(pts[0]) if pts else 0
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"{part}{j + 1}" for j in range(n) for part in ("re", "im")] + ["residual_f", "residual_r"])
    for p, res in zip(pts, report["payload"].get("residuals", [])):
        writer.writerow([repr(v) for c in p for v in c] + [repr(v) for v in res])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        if args.command == "batch":
            report, code = run_batch(args)
            _emit(dumps(report), args.output)
            return code
        report = run_command(argv)
        if args.command == "link-sample" and args.format == "csv":
            _emit(_points_csv(report), args.output)
        else:
            _emit(dumps(report), args.output)
        return EXIT_OK
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:
        print(f"internal failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
