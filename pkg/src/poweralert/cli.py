"""Command-line front end.

Every command writes its artifacts plus ``<out>.manifest.json`` recording the
command, resolved parameters, seed, input and artifact digests, and the tool
version. ``poweralert replay MANIFEST`` re-runs it and compares digests.

Exit codes: 0 success, 1 replay mismatch, 2 usage, 3 input format, 4 infeasible
or learning failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import FitError, FormatError, InfeasibleError, InvalidInputError, LearningFailure, PowerAlertError

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_FORMAT, EXIT_INFEASIBLE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


# -- helpers ---------------------------------------------------------------------

def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    path.write_bytes(data)
    return path


def manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def _write_manifest(args, artifacts, inputs) -> Path:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "command")}
    doc = {
        "tool": "poweralert",
        "version": __version__,
        "command": args.command,
        "params": params,
        "seed": getattr(args, "seed", None),
        "out": str(args.out),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "artifacts": {str(p): _sha256(p) for p in artifacts},
    }
    return _write(manifest_path(args.out), json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _int_range(text: str, name: str) -> list[int]:
    """``"a:b"`` (inclusive) or ``"a,b,c"``."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected a:b or a comma list of integers, got {text!r}") from None


def _float_values(text: str, name: str) -> list[float]:
    """``"start:stop:step"`` (inclusive of stop) or a comma list; ``inf`` allowed."""
    try:
        text = text.strip()
        if not text:
            return []
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(max(n, 0))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected start:stop:step or a comma list, got {text!r}") from None


def _read_config(path) -> configparser.ConfigParser:
    if path is None:
        raise UsageError("--config is required")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise UsageError(f"bad config: {exc}") from None
    return cp


def _section(cp, name, schema: dict) -> dict:
    """Typed values of one section; unknown keys and bad values name the field."""
    values = {}
    if not cp.has_section(name):
        return values
    for key, raw in cp.items(name):
        if key not in schema:
            raise UsageError(f"[{name}] {key}: unknown field")
        try:
            values[key] = schema[key](raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"[{name}] {key}: invalid value {raw!r} ({exc})") from None
    return values


def _int0(text: str) -> int:
    return int(text, 0)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "yes", "true", "on"):
        return True
    if low in ("0", "no", "false", "off"):
        return False
    raise ValueError("expected a boolean")


# -- gen-poly --------------------------------------------------------------------

def cmd_gen_poly(args):
    from .gf2 import random_irreducible

    degrees = _int_range(args.degrees, "--degrees") if args.degrees else [args.degree]
    if not degrees or any(d < 1 for d in degrees) or args.count < 1:
        raise UsageError("degrees must be >= 1 and --count >= 1")
    rng = np.random.default_rng(args.seed)
    lines = ["degree,index,poly_hex"]
    stats = []
    for d in degrees:
        t0 = time.perf_counter()
        polys = [random_irreducible(d, rng) for _ in range(args.count)]
        stats.append((d, (time.perf_counter() - t0) / args.count))
        lines += [f"{d},{i},{int(p):#x}" for i, p in enumerate(polys)]
    out = _write(args.out, "\n".join(lines) + "\n")
    # generation times vary run to run, so they go to stdout only
    for d, mean in stats:
        print(f"degree {d}: mean generation time {mean:.6f} s over {args.count}")
    return [out], []


# -- count-space -----------------------------------------------------------------

def cmd_count_space(args):
    from .icgen.counting import count_programs, headline_discrepancy

    degrees = _int_range(args.degrees, "--degrees")
    depths = _int_range(args.depths, "--depths")
    if not degrees or not depths or min(degrees) < 1 or min(depths) < 1:
        raise UsageError("degrees and depths must be nonempty and >= 1")
    lines = [f"# {headline_discrepancy()}", "# count = M_d * sum_{i<=min(2^n,cap)} C_i", "d,n,count"]
    for d in degrees:
        for n in depths:
            lines.append(f"{d},{n},{count_programs(d, n, args.cap)}")
    return [_write(args.out, "\n".join(lines) + "\n")], []


# -- protocol --------------------------------------------------------------------

_PROTOCOL_SCHEMA = {
    "memory": {"low": _int0, "size": _int0, "seed": int},
    "machine": {"behavior": str, "patches": str, "k": int, "extra_bytes": int, "covered_flip": _bool},
    "challenge": {"n": int, "degree": int, "depth": int, "lfsrs": int},
    "detection": {"gamma": float, "sigma_s": float},
    "training": {"timing_samples": int, "network_samples": int, "traces": int},
}


def _parse_patches(text: str) -> dict:
    patches = {}
    for item in text.split():
        addr, sep, hexbytes = item.partition(":")
        if not sep:
            raise UsageError(f"[machine] patches: expected addr:hexbytes, got {item!r}")
        try:
            patches[int(addr, 0)] = bytes.fromhex(hexbytes)
        except ValueError:
            raise UsageError(f"[machine] patches: bad entry {item!r}") from None
    return patches


def cmd_protocol(args):
    from .icgen import SyntheticMemory
    from .protocol import Behavior, ChallengeParams, SimMachine, Verifier, VerifierConfig, prover_respond
    from .protocol import train_verifier
    from .timing import DetectionConfig

    cp = _read_config(args.config)
    unknown = set(cp.sections()) - set(_PROTOCOL_SCHEMA)
    if unknown:
        raise UsageError(f"unknown config section(s): {sorted(unknown)}")
    sec = {name: _section(cp, name, schema) for name, schema in _PROTOCOL_SCHEMA.items()}
    mem_kw = sec["memory"]
    golden = SyntheticMemory(mem_kw.get("low", 0xFFFFFFFF81000000), mem_kw.get("size", 200 * 1024 * 1024),
                             seed=mem_kw.get("seed", 0))
    m = sec["machine"]
    try:
        behavior = Behavior(m.get("behavior", "honest").lower())
    except ValueError:
        raise UsageError(f"[machine] behavior: expected one of {[b.value for b in Behavior]}") from None
    patches = _parse_patches(m.get("patches", ""))
    lo, hi = golden.bounds
    if any(not lo <= a < hi for a in patches):
        raise UsageError("[machine] patches: address outside the memory region")
    extra = {k: m[k] for k in ("k", "extra_bytes") if k in m}
    c = sec["challenge"]
    try:
        params = ChallengeParams(**{("N" if k == "n" else k): v for k, v in c.items()})
        cfg = VerifierConfig(detection=DetectionConfig(**sec["detection"]), params=params)
    except (InvalidInputError, TypeError) as exc:
        raise UsageError(f"config: {exc}") from None
    if args.rounds < 1:
        raise UsageError("--rounds must be >= 1")
    rng = np.random.default_rng(args.seed)
    try:
        models = train_verifier(SimMachine(golden), rng, cfg=cfg, **sec["training"])
    except (FitError, LearningFailure) as exc:
        raise LearningFailure(str(exc)) from exc
    verifier = Verifier(golden, models, cfg)
    base = SimMachine.compromised(golden, patches, behavior, **extra)
    lines = []
    for i in range(args.rounds):
        ch, blob = verifier.initiate(rng)
        machine = base
        if m.get("covered_flip"):
            addr = int(ch.addresses.covered()[0])
            machine = SimMachine.compromised(golden, {**patches, addr: bytes([golden.read(addr, 1) ^ 0xFF])},
                                             behavior, **extra)
        out = prover_respond(machine, blob, rng)
        v = verifier.verify(ch, blob, out.response, out.trace)
        rec = {"round": i, "passed": v.passed, "output_ok": v.output_ok, "timing_ok": v.timing_ok,
               "language_ok": v.language_ok}
        for key in ("delta_hash_us", "delta_net_in_us", "delta_net_out_us", "hash_alarm", "network_alarm",
                    "hash_threshold_us", "network_threshold_us"):
            if key in v.detail:
                val = v.detail[key]
                rec[key] = bool(val) if isinstance(val, (bool, np.bool_)) else float(val)
        lines.append(json.dumps(rec, sort_keys=True))
    passed = sum(json.loads(x)["passed"] for x in lines)
    print(f"{passed}/{args.rounds} rounds passed")
    return [_write(args.out, "\n".join(lines) + "\n")], [args.config]


# -- game-sweep ------------------------------------------------------------------

_GAME_SCHEMA = {"t1": str, "t0": str, "alpha0": float, "hide_fraction": float, "p_e": float, "horizon": float,
                "runs": int, "method": str}


def cmd_game_sweep(args):
    from .game import GameConfig, paper_grid, rows_to_csv, rows_to_json, sweep

    if args.config:
        g = _section(_read_config(args.config), "game", _GAME_SCHEMA)
        inputs = [args.config]
    else:
        g, inputs = {}, []
    T1_default, T0_default = paper_grid()
    T1 = _float_values(g["t1"], "[game] t1") if "t1" in g else list(T1_default)
    T0 = _float_values(g["t0"], "[game] t0") if "t0" in g else list(T0_default)
    if not T1 or not T0:
        raise UsageError("[game] sweep grid is empty")
    try:
        template = GameConfig(0.0, 1.0, alpha0=g.get("alpha0", 903e-6), p_e=g.get("p_e", 0.99998),
                              horizon=g.get("horizon", 864000.0), runs=args.runs or g.get("runs", 1000),
                              seed=args.seed)
        rows = sweep(T1, T0, template, method=g.get("method", "event"), hide_fraction=g.get("hide_fraction", 0.5))
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None
    text = rows_to_json(rows) if args.format == "json" else rows_to_csv(rows)
    print(f"{len(rows)} cells written")
    return [_write(args.out, text)], inputs


# -- synth-samples / fit ---------------------------------------------------------

def cmd_synth_samples(args):
    from .icgen import SyntheticMemory
    from .protocol import SimMachine
    from .timing import dumps_samples

    if args.count < 1:
        raise UsageError("--count must be >= 1")
    rng = np.random.default_rng(args.seed)
    machine = SimMachine(SyntheticMemory(0, 4096))
    if args.kind == "timing":
        N = rng.integers(200, 8000, args.count)
        c = rng.integers(10, 300, args.count)
        rows = np.column_stack([N, c, machine.measure_hash(N, c, rng)])
    else:
        nbytes = rng.integers(8, 16_000, args.count)
        rows = np.column_stack([nbytes, machine.measure_network(nbytes, rng)])
    return [_write(args.out, dumps_samples(args.kind, rows))], []


def cmd_fit(args):
    from .timing import dumps_model, fit_network_model, fit_timing_model, loads_samples

    data = loads_samples(args.kind, _read_text(args.samples))
    model = fit_timing_model(data) if args.kind == "timing" else fit_network_model(data)
    return [_write(args.out, dumps_model(model))], [args.samples]


def _read_text(path) -> str:
    try:
        raw = Path(path).read_bytes()
    except FileNotFoundError:
        raise UsageError(f"file not found: {path}") from None
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError("file is not UTF-8 text", exc.start) from None


# -- synth-trace / extract -------------------------------------------------------

def cmd_synth_trace(args):
    from .power import PfsmParams, Phase, State, synthesize_trace, write_trace

    params = PfsmParams(network_period=400e-6, noise_sigma=args.sigma)
    phases = [Phase.network(1200e-6), Phase(State.S0, 100e-6), Phase(State.S2, 100e-6),
              Phase(State.S3, args.hash_us * 1e-6), Phase(State.S0, 100e-6), Phase(State.S1, 100e-6)]
    trace = synthesize_trace(phases, params, args.fs, np.random.default_rng(args.seed))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trace(out, trace)
    return [out], []


def cmd_extract(args):
    from .power import PfsmParams, classify_states, collapse_repeats, extract_power_states, read_trace
    from .power import validate_language

    if args.trace is None:
        raise UsageError("--trace is required")
    try:
        trace = read_trace(args.trace)
    except FileNotFoundError:
        raise UsageError(f"file not found: {args.trace}") from None
    segments = extract_power_states(trace)
    labels = classify_states(segments, PfsmParams())
    lines = ["start_s,end_s,duration_s,mean_a,support,state"]
    for seg, lab in zip(segments, labels):
        lines.append(f"{seg.interval[0]!r},{seg.interval[1]!r},{seg.duration!r},{seg.mean_current!r},"
                     f"{seg.support},{lab}")
    distinct = sorted({s for s in labels if s >= 0})
    print(f"{len(segments)} segments, {len(distinct)} distinct states, "
          f"language {'accepted' if validate_language(labels) else 'rejected'}: "
          f"{' '.join(str(s) for s in collapse_repeats(labels))}")
    return [_write(args.out, "\n".join(lines) + "\n")], [args.trace]


# -- optimize --------------------------------------------------------------------

def cmd_optimize(args):
    from .timing import DetectionConfig, NetworkModel, TimingModel, loads_model, optimize_parameters

    inputs = []
    timing = TimingModel.reference()
    network = NetworkModel.reference()
    for path, kind in ((args.model, TimingModel), (args.network, NetworkModel)):
        if path:
            model = loads_model(_read_text(path))
            if not isinstance(model, kind):
                raise FormatError(f"{path} holds a {type(model).__name__}, expected {kind.__name__}", 0)
            inputs.append(path)
            if kind is TimingModel:
                timing = model
            else:
                network = model
    rates = _float_values(args.rates, "--rates")
    if not rates or any(r <= 0 for r in rates):
        raise UsageError("--rates must list positive sampling rates")
    lines = ["sampling_rate_hz,sigma_s_us,N,c,tolerance_us,predicted_us,n_bound,violations"]
    for fs in rates:
        cfg = DetectionConfig.for_sampling_rate(fs, gamma=args.gamma, k=args.k)
        sol = optimize_parameters(timing, network, cfg, strict=args.strict)
        lines.append(f"{fs!r},{cfg.sigma_s!r},{sol.N},{sol.c},{sol.tolerance!r},{sol.predicted!r},"
                     f"{sol.n_bound!r},{';'.join(sol.violations)}")
        print(f"{fs:>10g} Hz: N={sol.N} c={sol.c} tolerance={sol.tolerance:.3f} us"
              + (f"  [violates {', '.join(sol.violations)}]" if sol.violations else ""))
    return [_write(args.out, "\n".join(lines) + "\n")], inputs


# -- replay ----------------------------------------------------------------------

def cmd_replay(args) -> int:
    """Re-run a manifest into a scratch directory and compare artifact digests."""
    try:
        doc = json.loads(_read_text(args.manifest))
        command, params, out = doc["command"], doc["params"], doc["out"]
    except (json.JSONDecodeError, KeyError) as exc:
        raise FormatError(f"not a manifest: {exc}", 0) from None
    for path, digest in doc.get("inputs", {}).items():
        if not Path(path).exists() or _sha256(path) != digest:
            raise FormatError(f"input {path} changed since the manifest was written", 0)
    with tempfile.TemporaryDirectory() as tmp:
        new_out = Path(tmp) / Path(out).name
        ns = argparse.Namespace(command=command, out=new_out, **params)
        ns.func = COMMANDS[command]
        ns.func(ns)
        digest = doc["artifacts"].get(out)
        ok = digest is not None and _sha256(new_out) == digest
        print(f"{'identical' if ok else 'DIFFERENT'}  {out} (re-run vs manifest)")
        if Path(out).exists():
            on_disk = _sha256(out) == digest
            ok &= on_disk
            print(f"{'identical' if on_disk else 'DIFFERENT'}  {out} (file on disk vs manifest)")
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS = {
    "gen-poly": cmd_gen_poly,
    "count-space": cmd_count_space,
    "protocol": cmd_protocol,
    "game-sweep": cmd_game_sweep,
    "synth-samples": cmd_synth_samples,
    "fit": cmd_fit,
    "synth-trace": cmd_synth_trace,
    "extract": cmd_extract,
    "optimize": cmd_optimize,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", type=Path, required=True, help="output file; the manifest goes beside it")
    common.add_argument("--config", default=None, help="key=value config file with [sections]")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="poweralert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"poweralert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-poly", parents=[common], help="random irreducible polynomials over GF(2)")
    p.add_argument("--degree", type=int, default=32)
    p.add_argument("--degrees", default=None, help="degree sweep, a:b or comma list")
    p.add_argument("--count", type=int, default=10)

    p = sub.add_parser("count-space", parents=[common], help="exact IC-program space sizes")
    p.add_argument("--degrees", default="1:8")
    p.add_argument("--depths", default="1:12")
    p.add_argument("--cap", type=int, default=None, help="node cap on the Catalan sum")

    p = sub.add_parser("protocol", parents=[common], help="attestation rounds against a simulated machine")
    p.add_argument("--rounds", type=int, default=10)

    p = sub.add_parser("game-sweep", parents=[common], help="attacker/verifier game over a (T1, T0) grid")
    p.add_argument("--runs", type=int, default=None, help="runs per cell (overrides the config)")

    p = sub.add_parser("synth-samples", parents=[common], help="synthetic timing or network measurements")
    p.add_argument("--kind", choices=("timing", "network"), default="timing")
    p.add_argument("--count", type=int, default=2000)

    p = sub.add_parser("fit", parents=[common], help="fit a timing or network model from a sample CSV")
    p.add_argument("--kind", choices=("timing", "network"), default="timing")
    p.add_argument("--samples", required=True)

    p = sub.add_parser("synth-trace", parents=[common], help="synthetic honest current trace (PWTR file)")
    p.add_argument("--fs", type=float, default=500e3)
    p.add_argument("--sigma", type=float, default=0.02)
    p.add_argument("--hash-us", type=float, default=1000.0)

    p = sub.add_parser("extract", parents=[common], help="power-state segments of a PWTR trace")
    p.add_argument("--trace", default=None)

    p = sub.add_parser("optimize", parents=[common], help="(N, c, tolerance) per sampling rate")
    p.add_argument("--model", default=None, help="timing model file (default: reference coefficients)")
    p.add_argument("--network", default=None, help="network model file (default: reference coefficients)")
    p.add_argument("--rates", default="1e6,5e5,2.5e5,2e5,5.4e4")
    p.add_argument("--gamma", type=float, default=10.0)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--strict", action="store_true", help="fail (exit 4) on any violated constraint")

    p = sub.add_parser("replay", help="re-run a manifest and compare outputs byte for byte")
    p.add_argument("manifest")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "replay":
            return cmd_replay(args)
        artifacts, inputs = COMMANDS[args.command](args)
        _write_manifest(args, artifacts, inputs)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (InfeasibleError, LearningFailure, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvalidInputError, PowerAlertError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
