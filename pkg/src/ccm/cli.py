"""Command line front end: ``ccm run``, ``ccm validate`` and ``ccm tables``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .cma import isolated_modes
from .coupled import (
    PAIR_THRESHOLD,
    TIE_TOL,
    CoupledResult,
    couple_n,
    element_letter,
    perturbation,
    select_coupled_pairs,
)
from .errors import CCMError, ConfigParseError
from .mom import ArrayLayout, BlockImpedance, WireDipole, assemble_array, mesh
from .oracle import ModeMatch, compare

ANALYSES = ("isolated", "coupled", "validate", "perturbation", "pairs")
COUPLED_ANALYSES = {"coupled", "validate", "perturbation", "pairs"}
DEFAULT_RETAINED = 4
DEFAULT_WIDTH = 0.005
DEFAULT_OUTPUT = "ccm_out"
TOL_EIG = 1e-3
TOL_SIM = 1e-3
# display entries below this magnitude are rounding residue of exact zeros
DISPLAY_CHOP = 1e-6

EXIT_OK, EXIT_ERROR, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2, 3

_TOP_KEYS = {"elements", "retained_modes", "analyses", "output_dir", "thresholds"}
_ELEMENT_KEYS = {"length", "width", "x_position", "segments"}
_THRESHOLD_KEYS = {"pair_select", "sign_match"}


@dataclass(frozen=True)
class ElementSpec:
    length: float
    width: float = DEFAULT_WIDTH
    x_position: float = 0.0
    segments: int | None = None

    def dipole(self) -> WireDipole:
        return WireDipole(self.length, self.width, self.x_position, self.segments)


@dataclass(frozen=True)
class RunConfig:
    elements: tuple
    retained_modes: tuple
    analyses: tuple = ANALYSES
    output_dir: str = DEFAULT_OUTPUT
    pair_select: float = PAIR_THRESHOLD
    sign_match: float = TIE_TOL
    name: str = field(default="run", compare=False)


# ---------------------------------------------------------------- parsing

def _number(value, where: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigParseError(f"{where} must be a finite number, got {value!r}")
    if positive and not value > 0:
        raise ConfigParseError(f"{where} must be positive, got {value!r}")
    return float(value)


def _retained(value, where: str):
    """A mode count, or None for "full" (every basis function)."""
    if value == "full":
        return None
    if isinstance(value, str):
        raise ConfigParseError(f'{where} must be a positive integer or "full", got {value!r}')
    return _count(value, where)


def _count(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigParseError(f"{where} must be a positive integer, got {value!r}")
    return value


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigParseError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def parse_config(doc, name: str = "run") -> RunConfig:
    """Validate a decoded JSON document (or JSON text) into a RunConfig."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigParseError("configuration must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "configuration")

    raw = doc.get("elements")
    if not isinstance(raw, list) or not raw:
        raise ConfigParseError("'elements' must be a non-empty list")
    elements = []
    for i, e in enumerate(raw):
        where = f"elements[{i}]"
        if not isinstance(e, dict):
            raise ConfigParseError(f"{where} must be an object")
        _reject_unknown(e, _ELEMENT_KEYS, where)
        if "length" not in e:
            raise ConfigParseError(f"{where} needs 'length'")
        segments = e.get("segments")
        elements.append(ElementSpec(
            length=_number(e["length"], f"{where}.length", positive=True),
            width=_number(e.get("width", DEFAULT_WIDTH), f"{where}.width", positive=True),
            x_position=_number(e.get("x_position", 0.0), f"{where}.x_position"),
            segments=None if segments is None else _count(segments, f"{where}.segments"),
        ))

    retained = doc.get("retained_modes", DEFAULT_RETAINED)
    if isinstance(retained, list):
        if len(retained) != len(elements):
            raise ConfigParseError(
                f"'retained_modes' lists {len(retained)} counts for {len(elements)} elements"
            )
        retained = tuple(_retained(k, f"retained_modes[{i}]") for i, k in enumerate(retained))
    else:
        retained = (_retained(retained, "retained_modes"),) * len(elements)

    analyses = doc.get("analyses", list(ANALYSES))
    if not isinstance(analyses, list) or not all(isinstance(a, str) for a in analyses):
        raise ConfigParseError("'analyses' must be a list of strings")
    bad = [a for a in analyses if a not in ANALYSES]
    if bad:
        raise ConfigParseError(f"unknown analyses {bad}; choose from {list(ANALYSES)}")
    analyses = tuple(a for a in ANALYSES if a in analyses)

    output_dir = doc.get("output_dir", DEFAULT_OUTPUT)
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigParseError("'output_dir' must be a non-empty string")

    thresholds = doc.get("thresholds", {})
    if not isinstance(thresholds, dict):
        raise ConfigParseError("'thresholds' must be an object")
    _reject_unknown(thresholds, _THRESHOLD_KEYS, "thresholds")
    pair_select = _number(thresholds.get("pair_select", PAIR_THRESHOLD), "thresholds.pair_select")
    sign_match = _number(thresholds.get("sign_match", TIE_TOL), "thresholds.sign_match")
    if not 0 < pair_select < 1:
        raise ConfigParseError("thresholds.pair_select must lie in (0, 1)")
    if not 0 <= sign_match < 1:
        raise ConfigParseError("thresholds.sign_match must lie in [0, 1)")

    return RunConfig(tuple(elements), retained, analyses, output_dir, pair_select, sign_match, name)


def bundled_configs() -> list[str]:
    root = resources.files("ccm") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(path) -> RunConfig:
    """Read a config file; a bare bundled name such as ``combo2`` also works."""
    p = Path(path)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
    else:
        stem = p.name[:-5] if p.name.endswith(".json") else p.name
        if stem not in bundled_configs():
            raise ConfigParseError(f"no such config file: {path}")
        text = (resources.files("ccm") / "configs" / f"{stem}.json").read_text(encoding="utf-8")
        p = Path(stem)
    return parse_config(text, name=p.stem)


# ---------------------------------------------------------------- formatting

def fmt(x) -> str:
    """Six significant digits; scientific from 1e6 (and below 1e-4) upward."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0:
        return "0"
    return f"{x:.6g}"


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def chop(a, tol: float) -> np.ndarray:
    a = np.array(a, dtype=float)
    a[np.abs(a) < tol] = 0.0
    return a


# ---------------------------------------------------------------- analysis

@dataclass
class Analysis:
    config: RunConfig
    dipoles: list
    blocks: BlockImpedance
    isolated: list
    coupled: CoupledResult | None = None
    match: ModeMatch | None = None


def analyze(config: RunConfig, need_coupled: bool) -> Analysis:
    dipoles = []
    for i, e in enumerate(config.elements):
        try:
            dipoles.append(e.dipole())
        except ValueError as exc:
            raise type(exc)(f"element {element_letter(i)}: {exc}") from exc
    blocks = assemble_array(ArrayLayout(tuple(dipoles)))
    isolated = []
    for i, (z, k) in enumerate(zip(blocks.self_blocks, config.retained_modes)):
        n = z.shape[0]
        try:
            # a full spectrum reaches modes at the rounding floor of R, which
            # cannot be pairwise R-orthogonal; only truncated sets are checked
            isolated.append(isolated_modes(z.real, z.imag, n if k is None else k,
                                           check=k is not None and k < n))
        except (CCMError, AssertionError) as exc:
            raise type(exc)(f"element {element_letter(i)}: {exc}") from exc
    result = Analysis(config, dipoles, blocks, isolated)
    if need_coupled:
        if len(dipoles) < 2:
            raise ValueError("coupled analyses need at least two elements")
        result.coupled = couple_n(isolated, blocks, tie_tol=config.sign_match)
    return result


def _isolated_rows(isolated):
    for i, m in enumerate(isolated):
        for n in range(m.k):
            yield (element_letter(i), n + 1, m.lambdas[n], m.p_r[n], m.p_x[n])


def _coupled_rows(c: CoupledResult, with_delta: bool):
    delta = {}
    if with_delta:
        for element, rank, d in perturbation(c):
            idx = c.group(element)
            idx = idx[np.argsort(np.abs(c.lambdas_c[idx]), kind="stable")]
            delta[int(idx[rank])] = d
    labels = c.column_labels()
    for j in range(c.k):
        yield (labels[j], c.lambdas_c[j], element_letter(c.association[j]),
               delta.get(j, "") if with_delta else "")


def _current_rows(a: Analysis):
    c = a.coupled
    cur = c.currents_c / np.max(np.abs(c.currents_c), axis=0)
    cur = chop(cur, 1e-12)
    off = 0
    for i, d in enumerate(a.dipoles):
        z = mesh(d, i).node_z
        half = 0.5 * d.length
        n = len(z)
        yield (element_letter(i), -half, *np.zeros(c.k))
        for r in range(n):
            yield (element_letter(i), z[r], *cur[off + r])
        yield (element_letter(i), half, *np.zeros(c.k))
        off += n


def _validation_rows(c: CoupledResult, m: ModeMatch, full_lambdas):
    labels = c.column_labels()
    for (s, f), err, sim in zip(m.pairs, m.eig_rel_err, m.current_similarity):
        yield (labels[s], c.lambdas_c[s], full_lambdas[f], err, sim)


def validation_failures(m: ModeMatch, tol_eig: float, tol_sim: float) -> list:
    return [s for (s, _), err, sim in zip(m.pairs, m.eig_rel_err, m.current_similarity)
            if not (err <= tol_eig and sim >= 1 - tol_sim)]


def run(config: RunConfig, out_dir=None, tol_eig: float = TOL_EIG, tol_sim: float = TOL_SIM,
        stream=None) -> int:
    """Execute the configured analyses and write their CSV files."""
    stream = stream or sys.stdout
    out = Path(out_dir if out_dir is not None else config.output_dir)
    wanted = set(config.analyses)
    if not wanted:
        return EXIT_OK
    a = analyze(config, bool(wanted & COUPLED_ANALYSES))
    status = EXIT_OK
    if "isolated" in wanted:
        write_csv(out / "isolated_modes.csv", ("element", "mode", "lambda", "p_r", "p_x"),
                  _isolated_rows(a.isolated))
    c = a.coupled
    if "coupled" in wanted or "perturbation" in wanted:
        write_csv(out / "coupled_eigs.csv", ("mode", "lambda_c", "association", "delta_lambda"),
                  _coupled_rows(c, "perturbation" in wanted))
    if "coupled" in wanted:
        labels = c.coupling.labels()
        display = chop(c.coupling.display_m, DISPLAY_CHOP)
        write_csv(out / "coupling_matrix.csv", ("mode", *c.column_labels()),
                  ((labels[r], *display[r]) for r in range(len(labels))))
        write_csv(out / "mode_currents.csv", ("element", "z", *c.column_labels()), _current_rows(a))
    if "pairs" in wanted:
        pairs = select_coupled_pairs(c.power, config.pair_select)
        write_csv(out / "coupled_pairs.csv", ("mode_i", "mode_j", "p_r", "p_x"),
                  _pair_rows(c, pairs))
    if "validate" in wanted:
        match, full = compare(c, a.blocks)
        write_csv(out / "validation.csv",
                  ("mode", "lambda_c", "lambda_full", "eig_rel_err", "current_similarity"),
                  _validation_rows(c, match, full.lambdas))
        failed = validation_failures(match, tol_eig, tol_sim)
        if failed:
            labels = c.column_labels()
            print(f"validation failed for modes {[labels[s] for s in failed]}", file=stream)
            status = EXIT_VALIDATION
    return status


def _pair_rows(c: CoupledResult, pairs):
    for i, a, j, b in pairs:
        o = c.power.offsets
        yield (f"{element_letter(i)}{a + 1}", f"{element_letter(j)}{b + 1}",
               c.power.p_rc.entries[o[i] + a, o[j] + b], c.power.p_xc.entries[o[i] + a, o[j] + b])


def cmd_validate(config: RunConfig, out_dir=None, tol_eig: float = TOL_EIG,
                 tol_sim: float = TOL_SIM, stream=None) -> int:
    """Compare the subspace solution with the full solve and print a table."""
    stream = stream or sys.stdout
    a = analyze(config, True)
    c = a.coupled
    match, full = compare(c, a.blocks)
    failed = set(validation_failures(match, tol_eig, tol_sim))
    labels = c.column_labels()
    print(f"{'mode':>6} {'lambda_c':>14} {'lambda_full':>14} {'eig_rel_err':>12} "
          f"{'similarity':>12}  result", file=stream)
    for (s, f), err, sim in zip(match.pairs, match.eig_rel_err, match.current_similarity):
        verdict = "FAIL" if s in failed else "pass"
        print(f"{labels[s]:>6} {fmt(c.lambdas_c[s]):>14} {fmt(full.lambdas[f]):>14} "
              f"{fmt(err):>12} {fmt(sim):>12}  {verdict}", file=stream)
    print(f"{len(match) - len(failed)}/{len(match)} modes within tol_eig={tol_eig:g}, "
          f"tol_sim={tol_sim:g}", file=stream)
    if out_dir is not None:
        write_csv(Path(out_dir) / "validation.csv",
                  ("mode", "lambda_c", "lambda_full", "eig_rel_err", "current_similarity"),
                  _validation_rows(c, match, full.lambdas))
    return EXIT_VALIDATION if failed else EXIT_OK


# ---------------------------------------------------------------- tables

TABLE_LENGTHS = (0.3, 0.5, 0.7)
COMBOS = (("combo1", 0.3), ("combo2", 0.5), ("combo3", 0.7))
COMBO_SPACING = 0.3
FIVE_SPACING = 0.4


def _pair_array(length_b: float, retained: int = 4):
    dipoles = (WireDipole(0.5), WireDipole(length_b, x_position=COMBO_SPACING))
    blocks = assemble_array(ArrayLayout(dipoles))
    iso = [isolated_modes(z.real, z.imag, retained) for z in blocks.self_blocks]
    return blocks, iso


def five_element(mode: int = 0):
    """Five 0.5-wavelength dipoles, 0.4 apart, each keeping one chosen mode."""
    dipoles = tuple(WireDipole(0.5, x_position=FIVE_SPACING * i) for i in range(5))
    blocks = assemble_array(ArrayLayout(dipoles))
    iso = [isolated_modes(z.real, z.imag, mode + 1).select([mode]) for z in blocks.self_blocks]
    return blocks, iso, couple_n(iso, blocks)


def _write_coupling(path: Path, c: CoupledResult) -> None:
    labels = c.coupling.labels()
    display = chop(c.coupling.display_m, DISPLAY_CHOP)
    write_csv(path, ("mode", *c.column_labels()),
              ((labels[r], *display[r]) for r in range(len(labels))))


def tables(out_dir) -> None:
    """Regenerate the isolated and coupled eigenvalue tables and coupling matrices."""
    out = Path(out_dir)
    rows = []
    for length in TABLE_LENGTHS:
        d = WireDipole(length)
        blocks = assemble_array(ArrayLayout((d,)))
        z = blocks.self_blocks[0]
        m = isolated_modes(z.real, z.imag, 4)
        rows.append((length, d.segments, *m.lambdas))
    write_csv(out / "isolated_eigenvalues.csv",
              ("length", "segments", "lambda_1", "lambda_2", "lambda_3", "lambda_4"), rows)

    eig_rows, pert_rows = [], []
    for name, length_b in COMBOS:
        blocks, iso = _pair_array(length_b)
        c = couple_n(iso, blocks)
        for element in range(2):
            idx = c.group(element)
            eig_rows.append((name, 0.5, length_b, element_letter(element), *c.lambdas_c[idx]))
        for element, rank, d in perturbation(c):
            pert_rows.append((name, element_letter(element), rank + 1,
                              iso[element].lambdas[rank], d))
        _write_coupling(out / f"coupling_{name}.csv", c)
    write_csv(out / "coupled_eigenvalues.csv",
              ("combo", "length_a", "length_b", "association",
               "lambda_c1", "lambda_c2", "lambda_c3", "lambda_c4"), eig_rows)
    write_csv(out / "perturbation.csv",
              ("combo", "element", "mode", "lambda_isolated", "delta_lambda"), pert_rows)

    for mode in (0, 1):
        blocks, iso, c = five_element(mode)
        _write_coupling(out / f"coupling_five_element_mode{mode + 1}.csv", c)
        write_csv(out / f"coupled_eigenvalues_five_element_mode{mode + 1}.csv",
                  ("mode", "lambda_c", "association"),
                  ((lab, lam, element_letter(a)) for lab, lam, a in
                   zip(c.column_labels(), c.lambdas_c, c.association)))


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccm", description="Coupled characteristic modes of wire-dipole arrays.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="accepted for interface stability; nothing is random")
        p.add_argument("--tol-eig", type=float, default=TOL_EIG,
                       help=f"max relative eigenvalue error (default {TOL_EIG:g})")
        p.add_argument("--tol-sim", type=float, default=TOL_SIM,
                       help=f"max 1 - |cosine| of current similarity (default {TOL_SIM:g})")

    for name, text in (("run", "run the analyses of a config"),
                       ("validate", "check the subspace result against the full solve")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="JSON config path or bundled name "
                                      f"({', '.join(bundled_configs())})")
        common(p)
    p = sub.add_parser("tables", help="regenerate eigenvalue tables and coupling matrices")
    common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "tables":
            tables(args.out or "paper_repro")
            return EXIT_OK
        config = load_config(args.config)
        if args.command == "run":
            return run(config, args.out, args.tol_eig, args.tol_sim)
        return cmd_validate(config, args.out, args.tol_eig, args.tol_sim)
    except ConfigParseError as exc:
        print(f"ccm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CCMError, ValueError, ArithmeticError, RuntimeError, AssertionError, OSError) as exc:
        print(f"ccm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
