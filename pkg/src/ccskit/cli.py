"""Command line front end: ``run``, ``ccs`` and ``verify-all`` over scenario files."""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import DEFAULT_FD_STEP, DEFAULT_QUAD_ORDER
from .report import Check, Report
from .scenario import (
    BUILTIN_SCENARIOS,
    COMPUTATIONS,
    Scenario,
    ScenarioError,
    builtin_scenario,
    builtin_scenario_text,
    check_requirements,
    load_scenario,
    make_atlas,
    make_complex,
    make_connection,
    make_map,
)

EXIT_OK, EXIT_FAILED, EXIT_SCHEMA, EXIT_COMPUTATION = 0, 1, 2, 3

# Library defaults; scenario "tolerances" override them and --tolerance-scale multiplies the result.
DEFAULT_TOLERANCES = {
    "chern_number": 1e-3,
    "curvature": 1e-6,
    "overlap": 1e-6,
    "oracle": 1e-6,
    "identity": 1e-4,
    "pair": 1e-4,
    "action": 1e-3,
    "dependence": 1e-3,
    "fiber_period": 1e-3,
    "loop": 1e-6,
}
# Below this quadrature order the characteristic number only meets the looser bound.
COARSE_QUAD_ORDER = 8
COARSE_CHERN_NUMBER_TOLERANCE = 1e-2


@dataclass(frozen=True)
class Settings:
    quad_order: int = DEFAULT_QUAD_ORDER
    fd_step: float = DEFAULT_FD_STEP
    tolerance_scale: float = 1.0
    seed: int = 0
    jobs: int = 1
    fmt: str = "text"

    def environment(self) -> dict:
        return {"quad_order": self.quad_order, "fd_step": self.fd_step, "tolerance_scale": self.tolerance_scale,
                "seed": self.seed}


class ComputationError(RuntimeError):
    """A library call failed; ``where`` names the module and operation."""

    def __init__(self, where: str, exc: BaseException):
        super().__init__(f"computation failed in {where}: {type(exc).__name__}: {exc}")
        self.where = where


def tolerances(scn: Scenario, settings: Settings) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    if settings.quad_order < COARSE_QUAD_ORDER:
        tol["chern_number"] = COARSE_CHERN_NUMBER_TOLERANCE
    tol.update(scn.get("tolerances", {}))
    return {k: v * settings.tolerance_scale for k, v in tol.items()}


def _where(exc: BaseException) -> str:
    frames = [f for f in traceback.extract_tb(exc.__traceback__) if "ccskit" in f.filename
              and not f.filename.endswith("cli.py")]
    if not frames:
        return "cli"
    f = frames[-1]
    return f"{Path(f.filename).stem}.{f.name}"


def _merge(rep: Report, sub: Report, prefix: str = "") -> None:
    for c in sub.checks:
        if prefix:
            c.name = f"{prefix}: {c.name}"
        rep.add(c)
    for k, v in sub.values.items():
        rep.values[f"{prefix}: {k}" if prefix else k] = v


def _polynomial(scn: Scenario):
    from .ccs import default_polynomial
    from .lie_core import half_p1_polynomial, standard_polynomial

    tags = scn.get("polynomials") or []
    n = 2 if scn.get("group") == "su(2)" else 1
    if not tags:
        return default_polynomial(scn.get("group"))
    tag = tags[0]
    return half_p1_polynomial() if tag == "half_p1" else standard_polynomial(tag, n)


def _boxes(scn: Scenario, atlas) -> dict:
    if scn.get("sample_boxes"):
        return scn.get("sample_boxes")
    if set(atlas.charts) == {"N", "S"} and atlas.base_dim == 3:
        return {"N": [[-1, -1, 0.2], [1, 1, 1]], "S": [[-1, -1, -1], [1, 1, -0.2]]}
    if set(atlas.charts) == {"N", "S"}:
        return {c: [[-1.0] * atlas.base_dim, [1.0] * atlas.base_dim] for c in atlas.charts}
    return {c: [[0.0] * atlas.base_dim, [1.0] * atlas.base_dim] for c in atlas.charts}


def _atlases(scn: Scenario):
    a0 = make_atlas(scn.get("atlas"), scn.get("group"))
    second = scn.get("second_connection")
    a1 = make_atlas(second, scn.get("group"), base=a0) if second else None
    return a0, a1


# handlers ---------------------------------------------------------------------------------------


def _curvature(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .library import instanton_curvature_oracle
    from .suites import base_samples, max_curvature, overlap_defect

    atlas, _ = _atlases(scn)
    boxes = _boxes(scn, atlas)
    rep = Report("curvature")
    mc = max_curvature(atlas, boxes, seed=s.seed, h=s.fd_step)
    for chart, v in mc.items():
        rep.values[f"max |F| [{chart}]"] = v
    if scn.get("expected", {}).get("flat"):
        rep.add(Check.below("flat: max |F|", max(mc.values()), tol["curvature"]))
    if scn.get("atlas")["builtin"] == "instanton":
        from .bundle import curvature_form

        rho = float(scn.get("atlas").get("params", {}).get("rho", 1.0))
        x = base_samples(boxes.get("N", [[-1] * 4, [1] * 4]), 16, s.seed)
        F = curvature_form(atlas.connections["N"], s.fd_step).components(x)
        rep.add(Check.below("F vs closed form", float(np.max(np.abs(F - instanton_curvature_oracle(x, rho)))),
                            tol["oracle"]))
    if atlas.transitions:
        from .suites import overlap_defect

        rep.add(Check.below("gauge compatibility on overlaps", overlap_defect(atlas, s.seed, s.fd_step), tol["overlap"]))
    return rep


def _chern_weil(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .bundle import chern_weil_form
    from .geometry import exterior_derivative
    from .library import instanton_charge_density
    from .suites import base_samples

    atlas, _ = _atlases(scn)
    lam = _polynomial(scn)
    rep = Report(f"Chern-Weil form {lam.name}")
    for chart, box in _boxes(scn, atlas).items():
        cw = chern_weil_form(lam, atlas.connections[chart], s.fd_step)
        x = base_samples(box, 16, s.seed)
        vals = np.real(cw.components(x))
        rep.values[f"max |CW| [{chart}]"] = float(np.max(np.abs(vals)))
        if cw.degree < cw.dim:
            d = exterior_derivative(cw.map_values(np.real), s.fd_step).components(x)
            rep.add(Check.below(f"d CW [{chart}]", float(np.max(np.abs(d))), tol["identity"]))
        if scn.get("atlas")["builtin"] == "instanton" and chart == "N" and lam.name == "chern_2":
            rho = float(scn.get("atlas").get("params", {}).get("rho", 1.0))
            err = float(np.max(np.abs(vals[:, 0] - instanton_charge_density(x, rho))))
            rep.add(Check.below("CW vs charge density", err, tol["oracle"]))
    return rep


def _chern_number(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .suites import characteristic_number

    lam = _polynomial(scn)
    target = scn.get("expected", {}).get("chern_number")
    rep = Report(f"characteristic number {lam.name}")
    kind = scn.get("cycles")["builtin"]
    if kind == "s4":
        from .library import s4_cells

        atlas, _ = _atlases(scn)

        def number(order):
            return characteristic_number(lam, atlas, s4_cells(), order, s.fd_step)
    else:
        from .ccs import hopf_base_curvature
        from .characters import pair
        from .complexes import fundamental_cycle

        charge = int(scn.get("atlas", {}).get("params", {}).get("charge", 1))

        def number(order):
            X, cw = hopf_base_curvature(charge, order, s.fd_step)
            return float(pair(cw, fundamental_cycle(X)))
    value = number(s.quad_order)
    rep.values["value"] = value
    if target is not None:
        rep.add(Check.close("characteristic number", value, target, tol["chern_number"]))
        if kind == "s4" and s.quad_order >= 4:
            coarse = number(s.quad_order // 2)
            e1, e0 = abs(value - target), abs(coarse - target)
            rep.values[f"error at order {s.quad_order // 2}"] = e0
            rep.values[f"error at order {s.quad_order}"] = e1
            rep.add(Check.flag("error at least halves under order doubling", e1 <= e0 / 2,
                               f"{e0:.3g} -> {e1:.3g}"))
    return rep


def _chern_simons(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .suites import form_identities_report

    a0, a1 = _atlases(scn)
    return form_identities_report(_polynomial(scn), a0, a1, _boxes(scn, a0), tol["identity"], tol["pair"], s.seed,
                                  h=s.fd_step)


def _cs_action(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .ccs import boundary_action_check, winding_gauge_check

    rep = Report("Chern-Simons action")
    for kind in scn.get("actions"):
        if kind == "winding":
            out = winding_gauge_check(order=s.quad_order)
            rep.values["winding gauge: action difference"] = out["difference"]
            rep.add(Check.close("winding gauge: integer difference", out["difference"], out["nearest integer"],
                                tol["action"]))
            rep.add(Check.flag("winding gauge: difference is a generator", abs(out["nearest integer"]) == 1))
        else:
            out = boundary_action_check(order=s.quad_order)
            rep.values["fixed boundary: action difference"] = out["difference"]
            rep.add(Check.close("fixed boundary: actions agree mod 1", out["difference"], out["nearest integer"],
                                tol["action"]))
    return rep


def _cohomology(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .complexes import MappingCone, cohomology, verify_long_exact

    rep = Report("cohomology")
    for spec in scn.get("complexes", []):
        C = make_complex(spec)
        name = spec.get("name") or spec.get("builtin", C.name)
        got = [H.describe() for H in cohomology(C)]
        rep.values[f"H^*({name})"] = ", ".join(got)
        rep.add(Check.flag(f"d^2 = 0 [{name}]", not C.boundary_squared_defects()))
        if "expected" in spec:
            rep.add(Check.flag(f"H^*({name}) matches", got == spec["expected"], f"expected {spec['expected']}"))
    for spec in scn.get("maps", []):
        phi = make_map(spec)
        cone = MappingCone(phi)
        name = spec["builtin"]
        rep.values[f"H^*(cone {name})"] = ", ".join(H.describe() for H in cohomology(cone))
        rep.add(Check.flag(f"cone d^2 = 0 [{name}]", not cone.complex.boundary_squared_defects()))
        les = verify_long_exact(phi)
        rep.add(Check.flag(f"long exact sequence [{name}]", les["passed"], f"{len(les['junctions'])} junctions"))
    return rep


def _transgress(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .complexes import hopf_cell_model
    from .lie_core import chern_polynomial
    from .transgression import (
        _coord,
        transgression_routes_check,
        area_form_s2,
        base_generator,
        cap_fraction,
        constant_family,
        interval_integral,
        latitude_family,
        loop_transgress_form,
        naturality_check,
        restrict_to_fiber,
        transgress,
    )

    spec = scn.get("transgression")
    rep = Report("transgression")
    model = hopf_cell_model()
    t = transgress(model, base_generator(model["X"]), 2)
    ok = abs(_coord(t)) == 1 and t.quotient_free_rank == 1
    rep.values["cochain transgression of the generator"] = str(t.coordinates)
    rep.add(Check.flag("generator -> generator", ok, f"H^1(S^1) coordinates {t.coordinates}"))
    perms = {"X": {"N": "S", "S": "N"}, "E": {"Nf0": "Sf0", "Sf0": "Nf0", "Nf1": "Sf1", "Sf1": "Nf1"}}
    signs = {"X": {"b1": -1}, "E": {"b1f0": -1, "b1f1": -1, "b0f1": -1}, "F": {"f1": -1}}
    nat = naturality_check(model, perms, signs)
    rep.add(Check.flag("naturality under relabeling", nat["natural"], f"{nat['pulled_back']} vs {nat['direct']}"))
    for fam in spec.get("families", []):
        omega = area_form_s2()
        if fam == "latitudes":
            tau = loop_transgress_form(omega, latitude_family())
            rep.add(Check.close("latitude sweep", interval_integral(tau), 1.0, tol["loop"]))
            rep.add(Check.close("polar cap at height 1/3", interval_integral(tau, 0.0, 1 / 3), cap_fraction(1 / 3),
                                tol["loop"]))
        else:
            tau = loop_transgress_form(omega, constant_family([0.0, 0.6, 0.8]))
            rep.add(Check.below("constant loops", float(np.max(np.abs(tau.components(np.linspace(0, 1, 9)[:, None])))),
                                tol["loop"]))
    if "atlas" in scn.data and spec.get("fiber_points"):
        atlas, _ = _atlases(scn)
        lam = chern_polynomial(1, 1) if scn.get("group") == "u(1)" else _polynomial(scn)
        for p in spec["fiber_points"]:
            chart = "N" if "N" in atlas.charts else atlas.chart_names()[0]
            per = restrict_to_fiber(lam, atlas, p, chart).period(s.quad_order)
            rep.add(Check.close(f"fiber period over {p}", per, 1.0, tol["fiber_period"]))
    _merge(rep, transgression_routes_check(model, s.quad_order), "routes")
    return rep


def _package(scn: Scenario, s: Settings, which: str = "connection"):
    from .ccs import trivial_package

    spec = scn.get("package")
    conn = spec.get(which)
    A = make_connection(conn, scn.get("group"), spec["base_dim"]) if conn else None
    return trivial_package(scn.get("group"), spec["base_dim"], A, order=s.quad_order, h=s.fd_step)


def _build(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .ccs import ccs_contract, connection_dependence, trivial_package

    pkg = _package(scn, s)
    rep = Report("Cheeger-Chern-Simons character")
    _merge(rep, ccs_contract(pkg))
    second = scn.get("package").get("second_connection")
    if second:
        A1 = make_connection(second, scn.get("group"), pkg.atlas.base_dim)
        pkg1 = trivial_package(scn.get("group"), pkg.atlas.base_dim, A1, order=s.quad_order, h=s.fd_step,
                               atlas=pkg.atlas)
        dep = connection_dependence(pkg, pkg1)
        rep.add(Check.below("connection dependence on cone cycles", dep.discrepancy, tol["dependence"]))
    return rep


def _trivialize(scn: Scenario, s: Settings, tol: dict) -> Report:
    from .ccs import trivialization_report

    pkg = _package(scn, s)
    return trivialization_report(pkg, scn.get("package").get("trivialization_samples", 20), s.seed)


HANDLERS = {
    "curvature": _curvature,
    "chern-weil": _chern_weil,
    "chern-number": _chern_number,
    "chern-simons": _chern_simons,
    "cs-action": _cs_action,
    "cohomology": _cohomology,
    "transgress": _transgress,
    "build": _build,
    "trivialize": _trivialize,
}


def run(scn: Scenario, subcommand: str, settings: Settings = Settings()) -> Report:
    """Run one computation (or all of the scenario's computations for ``verify``)."""
    if subcommand not in COMPUTATIONS:
        raise ScenarioError(f"unknown computation {subcommand!r}", "$.computations")
    todo = [c for c in scn.get("computations") if c != "verify"] if subcommand == "verify" else [subcommand]
    check_requirements(scn.data, todo)
    tol = tolerances(scn, settings)
    rep = Report(f"{scn.name}: {subcommand}", environment=settings.environment())
    for comp in todo:
        try:
            sub = HANDLERS[comp](scn, settings, tol)
        except ScenarioError:
            raise
        except Exception as exc:  # noqa: BLE001 - reported with the failing operation
            raise ComputationError(_where(exc), exc) from exc
        _merge(rep, sub, comp if subcommand == "verify" else "")
    return rep


def ccs_command(scn: Scenario, action: str, settings: Settings = Settings()) -> Report:
    """``ccs build | trivialize | verify``; verify adds the transgression route comparison."""
    if "package" not in scn.data:
        raise ScenarioError("the ccs commands need a 'package' entry", "$.package")
    if action in ("build", "trivialize"):
        return run(scn, action, settings)
    rep = Report(f"{scn.name}: ccs verify", environment=settings.environment())
    for comp in ("build", "trivialize"):
        _merge(rep, run(scn, comp, settings), comp)
    if "transgression" in scn.data:
        from .transgression import transgression_routes_check

        _merge(rep, transgression_routes_check(order=settings.quad_order), "routes")
    return rep


def _suite(name: str, settings: Settings) -> Report:
    from .suites import characters_suite, complexes_suite, snf_suite

    if name == "snf":
        return snf_suite(seed=settings.seed)
    if name == "complexes":
        return complexes_suite()
    if name == "characters":
        return characters_suite(seed=settings.seed)
    return run(builtin_scenario(name), "verify", settings)


VERIFY_ALL_ITEMS = ("snf", "complexes", "characters") + BUILTIN_SCENARIOS


def verify_all(settings: Settings = Settings()) -> tuple[Report, list]:
    """Every suite and built-in scenario; returns the summary and the individual reports."""
    if settings.jobs > 1:
        with ProcessPoolExecutor(settings.jobs) as pool:
            reports = list(pool.map(_suite, VERIFY_ALL_ITEMS, [settings] * len(VERIFY_ALL_ITEMS)))
    else:
        reports = [_suite(name, settings) for name in VERIFY_ALL_ITEMS]
    summary = Report("verify-all", environment=settings.environment())
    for name, r in zip(VERIFY_ALL_ITEMS, reports):
        failed = sum(not c.passed for c in r.checks)
        summary.add(Check.flag(f"{name}", r.passed, f"{len(r.checks)} checks, {failed} failed"))
    return summary, reports


# argument parsing ---------------------------------------------------------------------------------


def _scenario_arg(arg: str) -> Scenario:
    if arg.startswith("builtin:"):
        name = arg.split(":", 1)[1]
        if name not in BUILTIN_SCENARIOS:
            raise ScenarioError(f"no built-in scenario {name!r}")
        return builtin_scenario(name)
    return load_scenario(arg)


def _add_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--quad-order", type=int, default=DEFAULT_QUAD_ORDER, help="Gauss-Legendre points per direction")
    p.add_argument("--fd-step", type=float, default=DEFAULT_FD_STEP, help="finite difference step")
    p.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for verify-all")
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccskit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one computation of a scenario")
    p.add_argument("scenario", help="scenario file, or builtin:NAME")
    p.add_argument("computation", choices=COMPUTATIONS)
    _add_flags(p)
    p = sub.add_parser("ccs", help="Cheeger-Chern-Simons package commands")
    p.add_argument("action", choices=("build", "trivialize", "verify"))
    p.add_argument("scenario")
    _add_flags(p)
    p = sub.add_parser("verify-all", help="all suites over the example library")
    _add_flags(p)
    p = sub.add_parser("example", help="print a built-in scenario file")
    p.add_argument("name", choices=BUILTIN_SCENARIOS)
    return parser


def _emit(reports: list, fmt: str, out) -> None:
    if fmt == "json":
        payload = [r.to_dict() for r in reports]
        out.write(json.dumps(payload if len(payload) > 1 else payload[0], indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(r.text() for r in reports) + "\n")


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.command == "example":
        out.write(builtin_scenario_text(args.name))
        return EXIT_OK
    settings = Settings(args.quad_order, args.fd_step, args.tolerance_scale, args.seed, args.jobs, args.format)
    try:
        if args.command == "verify-all":
            summary, reports = verify_all(settings)
            _emit(reports + [summary], settings.fmt, out)
            return EXIT_OK if summary.passed else EXIT_FAILED
        scn = _scenario_arg(args.scenario)
        rep = run(scn, args.computation, settings) if args.command == "run" else ccs_command(scn, args.action, settings)
    except ScenarioError as exc:
        err.write(f"schema error at {exc.path}: {exc.message}\n")
        return EXIT_SCHEMA
    except ComputationError as exc:
        err.write(f"{exc}\n")
        return EXIT_COMPUTATION
    _emit([rep], settings.fmt, out)
    return EXIT_OK if rep.passed else EXIT_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
