"""Batch verification driver.

    jetcalc verify <suite> [--scenario FILE]... [--max-order M] [--seed N]
                   [--out PATH] [--format json|csv] [--threshold KEY=VAL]...
    jetcalc fit growth|compare [--scenario NAME] [--family F] [--max-order M]

Exit codes: 0 all checks pass, 1 at least one failed check, 2 bad
configuration or unparsable input.  JETCALC_THREADS caps the thread pool
used when running independent suites of `verify all`.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import suites as suites_mod
from .reporting import build_report, emit_report, report_csv, report_json
from .scenarios import (BUILTIN_NAMES, builtin_scenario, load_scenario,
                        scenario_digest)

SUITES = {
    "tensor-laws": suites_mod.suite_tensor_laws,
    "taylor": suites_mod.suite_taylor,
    "geometry": suites_mod.suite_geometry,
    "jets": suites_mod.suite_jets,
    "submersion": suites_mod.suite_submersion,
    "recursions": suites_mod.suite_recursions,
    "connection-compare": suites_mod.suite_connection_compare,
    "seminorms": suites_mod.suite_seminorms,
    "continuity": suites_mod.suite_continuity,
}


@dataclass
class SuiteConfig:
    seed: int = 7
    points: int = 3
    max_order: int = 3
    growth_order: int = 4
    compare_order: int = 6
    radius_order: int = 10
    families: tuple = ()
    scenarios: list = field(default_factory=list)

    def echo(self):
        return {
            "seed": self.seed,
            "points": self.points,
            "max_order": self.max_order,
            "growth_order": self.growth_order,
            "compare_order": self.compare_order,
            "radius_order": self.radius_order,
            "families": list(self.families),
            "scenarios": [s.name for s in self.scenarios],
        }


def _parse_thresholds(pairs):
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise ValueError(f"bad threshold override {p!r}, expected KEY=VAL")
        key, val = p.split("=", 1)
        out[key] = float(val)
    return out


def _apply_thresholds(rows, overrides):
    if not overrides:
        return rows
    from .suites import CheckRow
    out = []
    for r in rows:
        thr = overrides.get(r.tag, overrides.get(r.tag.split("/")[0],
                                                 r.threshold))
        out.append(CheckRow(check_id=r.check_id, tag=r.tag, inputs=r.inputs,
                            value=r.value, threshold=thr,
                            passed=r.value <= thr))
    return out


def _custom_recursion_rows(config):
    """Expansion/inverse rows for user-supplied scenarios."""
    from .recursions import (BUNDLE_FAMILY_KINDS, build_coefficients,
                             bundle_family, verify_expansion,
                             verify_inverse_pair)
    from .suites import CheckRow, _family_objects, _object_field
    rows = []
    fams = config.families or BUNDLE_FAMILY_KINDS
    for scn in config.scenarios:
        bun = scn.bundle_at(cap=config.max_order + 2)
        flat = (bun.conns["tan"].is_zero(1e-14)
                and bun.conns["fib"].is_zero(1e-14))
        thr = 1e-11 if flat else 1e-8
        ts = scn.total_at(cap=config.max_order + 2)
        for kind in fams:
            if kind not in BUNDLE_FAMILY_KINDS:
                raise ValueError(f"unknown family {kind}")
            fam = bundle_family(kind, ts)
            fwd = build_coefficients(fam, config.max_order, "forward")
            inv = build_coefficients(fam, config.max_order, "inverse")
            obj = _object_field(ts.bundle, kind,
                                _family_objects(scn, kind, config.seed + 40))
            for m in range(config.max_order + 1):
                rows.append(CheckRow.residual(
                    f"recursions/{kind}-expansion", f"{scn.name}/p0/{m}",
                    verify_expansion(fam, fwd, obj, m), thr))
                rows.append(CheckRow.residual(
                    f"recursions/{kind}-inverse", f"{scn.name}/p0/{m}",
                    verify_inverse_pair(fam, inv, obj, m), thr))
    return rows


def run_suite(name, config):
    if name == "recursions" and config.scenarios:
        return _custom_recursion_rows(config)
    return SUITES[name](config)


def cmd_verify(args):
    try:
        config = SuiteConfig(
            seed=args.seed, max_order=args.max_order,
            families=tuple(args.family or ()),
            scenarios=[load_scenario(p) for p in (args.scenario or ())])
        overrides = _parse_thresholds(args.threshold)
        if args.suite != "all" and args.suite not in SUITES:
            raise ValueError(f"unknown suite {args.suite!r}")
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    names = list(SUITES) if args.suite == "all" else [args.suite]
    threads = int(os.environ.get("JETCALC_THREADS", "1") or 1)
    try:
        if threads > 1 and len(names) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                packs = list(pool.map(lambda n: run_suite(n, config), names))
        else:
            packs = [run_suite(n, config) for n in names]
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    rows = [r for pack in packs for r in pack]
    rows = _apply_thresholds(rows, overrides)
    digests = {s.name: scenario_digest(s) for s in config.scenarios}
    for name in (BUILTIN_NAMES if not config.scenarios else ()):
        digests[name] = scenario_digest(builtin_scenario(name))
    report = build_report(args.suite, rows, config.echo(), digests)
    text = report_json(report) if args.format == "json" else report_csv(report)
    if args.out:
        emit_report(report, args.format, args.out)
    else:
        sys.stdout.write(text)
    failing = report["summary"]["failing_ids"]
    print(f"{report['summary']['passed']}/{report['summary']['total']} "
          f"checks passed", file=sys.stderr)
    for cid in failing:
        print(f"FAILED {cid}", file=sys.stderr)
    return 1 if failing else 0


def cmd_fit(args):
    try:
        scn = (load_scenario(args.scenario) if args.scenario
               and os.path.exists(args.scenario)
               else builtin_scenario(args.scenario or "twisted-bundle"))
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    import json as _json
    if args.kind == "growth":
        from .recursions import (build_coefficients, bundle_family,
                                 growth_profile)
        ts = scn.total_at(cap=args.max_order + 2)
        fam = bundle_family(args.family or "V", ts)
        tab = build_coefficients(fam, args.max_order, "forward")
        prof = growth_profile(tab, ts)
        prof["rows"] = [[int(m), int(s), int(c), repr(v)]
                        for (m, s, c, v) in prof["rows"]]
        sys.stdout.write(_json.dumps(prof, indent=2, sort_keys=True) + "\n")
        return 0
    if args.kind == "compare":
        from .scenarios import section_field
        from .seminorms import CompactSample, norm_compare
        m_hi = args.max_order
        K = CompactSample(scn.base_points, "K")
        exprs = scn.random_section(args.seed)

        def prov_a(x):
            bun = scn.bundle_at(x, cap=m_hi + 2)
            return bun, section_field(bun, exprs)

        def prov_b(x):
            bun = scn.alt_bundle_at(x, cap=m_hi + 2)
            return bun, section_field(bun, exprs)

        rep = norm_compare(prov_a, prov_b, K, m_hi)
        sys.stdout.write(_json.dumps(rep, indent=2, sort_keys=True) + "\n")
        return 0
    print(f"unknown fit kind {args.kind!r}", file=sys.stderr)
    return 2


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="jetcalc",
        description="numerical verification of chart-level jet calculus")
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite", help=f"one of {', '.join(SUITES)} or 'all'")
    pv.add_argument("--scenario", action="append",
                    help="scenario JSON file (repeatable)")
    pv.add_argument("--family", action="append",
                    help="restrict recursion families (repeatable)")
    pv.add_argument("--max-order", type=int, default=3)
    pv.add_argument("--seed", type=int, default=7)
    pv.add_argument("--out", help="write the report here instead of stdout")
    pv.add_argument("--format", choices=("json", "csv"), default="json")
    pv.add_argument("--threshold", action="append",
                    help="override, e.g. recursions/P-expansion=1e-6")
    pv.set_defaults(func=cmd_verify)

    pf = sub.add_parser("fit", help="envelope fits")
    pf.add_argument("kind", choices=("growth", "compare"))
    pf.add_argument("--scenario", help="builtin name or JSON file")
    pf.add_argument("--family")
    pf.add_argument("--max-order", type=int, default=4)
    pf.add_argument("--seed", type=int, default=7)
    pf.set_defaults(func=cmd_fit)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
