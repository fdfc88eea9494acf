from commons.constants import *
from commons.funcs_abelian import automorphisms, bicharacter_classes, form_classes
from commons.funcs_common import NearGroupError, InputError, ResourceError, CustomHelpFormatter, \
    get_neargroup_version, get_start_time_msg, get_elapsed_time_msg, print_error_msg, complex_to_pair, \
    format_complex, view_config_file, view_key_values, view_table, view_residual_report
from commons.funcs_cuntz import oracle_check, fs_indicators
from commons.funcs_fusion import GammaData, near_group_ring, principal_graph, out_group, \
    dequiv_fusion, dequiv_twisted, equiv_fusion, contains_ring
from commons.funcs_neargroup import QuadIrrational, MNSolution
from commons.funcs_solvers import solve_mn, solve_m2n, search_general, classify
from commons.funcs_spectral import cube_root_choices
from commons.funcs_tuple import to_tuple, verify_admissible
from commons.mgr_archive import ArchiveManager, verify_solution, solution_to_json, dump_json
from commons.mgr_config import ConfigManager
from commons.mgr_logger import LoggerManager
from commons.mgr_parser import GroupSpec

from datetime import datetime

import argparse
import os
import sys
import time

PROGRAM_NAME = "neargroup"


class Outcome:
    """
    Result of one command: the JSON document, its text rendering and the exit code
    """

    def __init__(self, payload, text, exit_code=EXIT_SUCCESS):
        self.payload = payload
        self.text = text
        self.exit_code = exit_code


def _group(spec_text, config):
    spec = GroupSpec(spec_text)
    if spec.group.order > config.max_group_order:
        raise ResourceError(f"Group order {spec.group.order} exceeds the configured bound {config.max_group_order}")
    return spec


def _positive_m(G, m):
    n = G.order
    if m <= 0 or m % n:
        raise InputError(f"m = {m} is not a positive multiple of |G| = {n}")
    if QuadIrrational.from_nm(n, m).is_rational():
        raise InputError(f"Dimension is rational for n={n}, m={m}; see dimension_diagnosis")


def _archive(config):
    return ArchiveManager(config.archive_path, config.tolerance)


def _solution_summary(s, report):
    return {
        "solution": s.label(),
        "group": s.group.label(),
        "m": s.m,
        "d": str(s.d),
        "d_value": s.d_value,
        "unitary": getattr(s, "unitary", True),
        "overall_residual": report.overall,
        "passed": report.passed,
    }


def _ring_view(ring):
    rows = [[str(x), f"{d:.6f}", str(ring.labels[ring.duals[i]]) if ring.duals[i] >= 0 else "-"]
            for i, (x, d) in enumerate(zip(ring.labels, ring.dimensions))]
    text = view_table(["Object", "Dimension", "Dual"], rows, widths=[20, 14, 20], align=["l", "r", "l"])
    heavy = [x for x in ring.labels if x not in ring.invertibles()]
    products = [[f"{x} ⊗ {y}", ring.format_product(x, y)] for x in heavy for y in heavy]
    if products:
        text += view_table(["Product", "Decomposition"], products, widths=[24, 60])
    text += f"\n  {ring.name}: {ring.size} simple objects, global dimension {ring.global_dimension:.6f}\n"
    return text


def cmd_forms(args, config):
    spec = _group(args.group, config)
    G = spec.group
    auts = automorphisms(G, config.max_group_order)
    classes = []
    rows = []
    for i, b in enumerate(bicharacter_classes(G, True, False, config.max_group_order)):
        forms = []
        for j, a in enumerate(form_classes(b, auts)):
            gauss = a.gauss_sum()
            forms.append({"form": a.to_json(), "gauss_sum": complex_to_pair(gauss),
                          "c_choices": [complex_to_pair(c) for c in cube_root_choices(a)]})
            values = " ".join(f"{p.num}/{p.den}" for p in a.values)
            rows.append([i, j, " ".join(f"{p.num}/{p.den}" for row in b.gram for p in row), values,
                         format_complex(gauss, 4)])
        classes.append({"bicharacter": b.to_json(), "forms": forms})
    payload = {"group": G.to_json(), "classes": classes}
    text = view_table(["#b", "#a", "Gram exponents", "a(g) exponents", "Gauss sum"], rows,
                      widths=[4, 4, 20, 36, 18])
    return Outcome(payload, text)


def cmd_solve(args, config):
    logger = LoggerManager.get_logger(__name__)
    spec = _group(args.group, config)
    G = spec.group
    m = args.m
    _positive_m(G, m)
    budget = config.get_search_budget()
    tol = config.tolerance
    k = m // G.order

    auts = automorphisms(G, config.max_group_order)
    found = []
    for b in bicharacter_classes(G, True, k == 1, config.max_group_order):
        for a in form_classes(b, auts):
            if k == 1:
                found += [(s, None) for s in solve_mn(G, b, a, budget, tol, progress=not args.json)]
            elif k == 2:
                found += solve_m2n(G, b, a, budget, tol, progress=not args.json)[0]
            else:
                found += [(s, None) for s in search_general(G, b, a, k, budget, tol, progress=not args.json)]
    logger.info(f"solve {G.label()} m={m}: {len(found)} solutions")

    archive = _archive(config)
    items = []
    rows = []
    for i, (s, tag) in enumerate(found):
        report = verify_solution(s, tol)
        item = _solution_summary(s, report)
        if tag is not None:
            item["case"] = tag.label()
        if args.store:
            item["file"] = archive.store(s)
        items.append(item)
        rows.append([i, item.get("case", "-"), f"{report.overall:.3e}", item.get("file", "-")])

    payload = {"group": G.to_json(), "m": m, "count": len(found), "solutions": items,
               "provenance": budget.provenance()}
    text = view_table(["#", "Case", "Residual", "Stored"], rows, widths=[4, 12, 12, 40]) \
        + f"\n  {len(found)} solutions for {G.label()} with m={m}\n"
    return Outcome(payload, text)


def cmd_verify(args, config):
    archive = _archive(config)
    s, path = archive.read(args.file)
    report = verify_solution(s, config.tolerance)
    reports = {"residual": report}
    if args.oracle:
        T = to_tuple(s)
        oracle_tol = max(config.tolerance, ORACLE_TOLERANCE)
        oracle = oracle_check(T, oracle_tol, progress=not args.json, max_terms=config.max_oracle_terms)
        reports["tuple"] = verify_admissible(T, oracle_tol)
        reports["oracle"] = oracle
    passed = all(r.passed for r in reports.values())

    payload = {"file": path, **_solution_summary(s, report), "passed": passed,
               "reports": {name: r.to_json() for name, r in reports.items()}}
    text = "".join(f"\n  [{name}]{view_residual_report(r)}" for name, r in reports.items())
    text += f"\n  {s.label()} ... {'Pass' if passed else 'Fail'}\n"
    return Outcome(payload, text, EXIT_SUCCESS if passed else EXIT_VERIFICATION_FAIL)


def cmd_classify(args, config):
    spec = _group(args.group, config)
    G = spec.group
    budget = config.get_search_budget()
    result = classify(G, args.m, budget, config.tolerance, progress=not args.json, oracle=not args.no_oracle)

    payload = result.to_json()
    warnings = [w for cls in result.classes for w in cls.warnings]
    if warnings:
        payload["warnings"] = warnings
    if args.store:
        archive = _archive(config)
        payload["files"] = [archive.store(cls.representative) for cls in result.classes]

    rows = []
    for i, cls in enumerate(result.classes):
        s = cls.representative
        c = s.c if isinstance(s, MNSolution) else s.acj.c[0]
        rows.append([i, cls.case.label() if cls.case is not None else "-", cls.members,
                     f"{cls.report.overall:.3e}", format_complex(c, 6)])
    text = view_table(["#", "Case", "Members", "Residual", "c"], rows, widths=[4, 12, 8, 12, 24])
    text += f"\n  {G.label()}, m={args.m}: {result.count} classes ({result.status})\n"
    for cert in result.certificates:
        text += f"  case {cert.tag.label()}: {'feasible' if cert.feasible else 'refuted'}\n"
    for w in warnings:
        text += f"  warning: {w}\n"
    return Outcome(payload, text)


def cmd_indicators(args, config):
    s = _archive(config).load(args.file)
    indicators = fs_indicators(to_tuple(s), cross_check=True)
    payload = {"solution": s.label(), **indicators.to_json()}
    text = view_key_values("Frobenius-Schur Indicators", {
        "solution": s.label(),
        "nu_2,1": indicators.nu21,
        "nu_3,1": format_complex(indicators.nu31),
        "nu_4,1": format_complex(indicators.nu41),
        **{k: f"{v:.3e}" for k, v in indicators.residuals.items()},
    })
    return Outcome(payload, text)


def cmd_out(args, config):
    s = _archive(config).load(args.file)
    budget = config.get_search_budget()
    group = out_group(s, budget.grid_resolution, budget.seed)
    payload = group.to_json()
    if group.inconclusive:
        payload["warnings"] = list(group.inconclusive)
    text = view_key_values("Out", {
        "solution": s.label(),
        "order": group.order,
        "type": group.type_guess() or "unidentified",
        "generators": "; ".join(f"θ={e.theta.images}" for e in group.generators()) if group.closed else "-",
    })
    for note in group.inconclusive:
        text += f"  warning: {note}\n"
    return Outcome(payload, text)


def _file_group_spec(args, s):
    spec = GroupSpec(args.group if args.group else s.group.label())
    if spec.group != s.group:
        raise InputError(f"Group spec {args.group} does not describe {s.group.label()}")
    return spec


def cmd_dequiv(args, config):
    s = _archive(config).load(args.file)
    spec = _file_group_spec(args, s)
    H = spec.parse_subgroup(args.subgroup)
    if args.cocycle:
        omega = spec.parse_cocycle(args.cocycle, H)
        ring = dequiv_twisted(s.group, s.bicharacter, s.form, H, omega, config.tolerance)
    else:
        ring = dequiv_fusion(s.group, s.bicharacter, s.form, H)
    return Outcome({"solution": s.label(), "ring": ring.to_json()}, _ring_view(ring))


def cmd_equiv(args, config):
    s = _archive(config).load(args.file)
    if args.aut:
        gamma = _file_group_spec(args, s).parse_automorphism(args.aut)
    else:
        path = args.gamma
        if not os.path.isfile(path):
            path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", gamma_dir_name,
                                args.gamma if args.gamma.endswith(".yaml") else f"{args.gamma}.yaml")
        if not os.path.isfile(path):
            raise InputError(f"Γ-data file ( {args.gamma} ) does not exist.")
        gamma = GammaData.from_yaml(path)
    ring = equiv_fusion(s.group, s.m, gamma)
    payload = {"solution": s.label(), "ring": ring.to_json()}
    text = _ring_view(ring)
    if args.contains:
        if not args.contains[1].isdecimal():
            raise InputError(f"Multiplicity of --contains must be a positive integer: {args.contains[1]}")
        target = near_group_ring(_group(args.contains[0], config).group, int(args.contains[1]))
        embedding = contains_ring(ring, target)
        payload["contains"] = {"ring": target.name, "found": embedding is not None,
                               "embedding": {str(x): str(y) for x, y in embedding.items()} if embedding else None}
        text += f"  contains {target.name}: {'yes' if embedding else 'no'}\n"
    return Outcome(payload, text)


def cmd_graph(args, config):
    spec = _group(args.group, config)
    graph = principal_graph(spec.group, args.l)
    dot = graph.to_dot()
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as f:
            f.write(dot)
    payload = graph.to_json()
    text = dot + view_key_values("Norm", {
        "graph": graph.name,
        "d": str(graph.d),
        "norm^2": f"{graph.norm_squared():.9f}",
        "1 + l·d": f"{graph.expected_norm_squared():.9f}",
        "self-dual": graph.metadata["self_dual"],
    })
    return Outcome(payload, text)


def cmd_export(args, config):
    s = _archive(config).load(args.file)
    doc = to_tuple(s).to_json() if args.tuple else solution_to_json(s)
    out = args.out if args.out else f"{os.path.splitext(os.path.basename(args.file))[0]}" \
                                    f"{'_tuple' if args.tuple else ''}.json"
    with open(out, "w", encoding="utf-8") as f:
        f.write(dump_json(doc))
    payload = {"solution": s.label(), "tuple": bool(args.tuple), "file": out}
    return Outcome(payload, f"\n  {s.label()} exported to {out}\n")


COMMANDS = {
    "forms": cmd_forms,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "classify": cmd_classify,
    "indicators": cmd_indicators,
    "out": cmd_out,
    "dequiv": cmd_dequiv,
    "equiv": cmd_equiv,
    "graph": cmd_graph,
    "export": cmd_export,
}


def build_parser():

    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", metavar="<Configuration File Name>", help="configuration file under conf/")
    parent.add_argument("--json", action="store_true", help="machine readable JSON on stdout")

    parser = argparse.ArgumentParser(prog=PROGRAM_NAME, formatter_class=CustomHelpFormatter)
    parser.add_argument("--version", action="version", version=get_neargroup_version())
    parser.add_argument("--show-config", action="store_true", help="print the configuration and exit")
    sub = parser.add_subparsers(dest="command", metavar="<command>")

    p = sub.add_parser("forms", parents=[parent], formatter_class=CustomHelpFormatter,
                       help="bicharacters and even quadratic forms of G up to Aut(G)")
    p.add_argument("group", metavar="G")

    for name, text in (("solve", "run the solvers for (G, m)"), ("classify", "classify (G, m) up to equivalence")):
        p = sub.add_parser(name, parents=[parent], formatter_class=CustomHelpFormatter, help=text)
        p.add_argument("group", metavar="G")
        p.add_argument("m", type=int)
        p.add_argument("--store", action="store_true", help="store the solutions in the archive")
        if name == "classify":
            p.add_argument("--no-oracle", action="store_true", help="skip the Cuntz oracle on representatives")

    p = sub.add_parser("verify", parents=[parent], formatter_class=CustomHelpFormatter,
                       help="residuals of a solution file")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--oracle", action="store_true", help="also check the admissible tuple and the Cuntz oracle")

    for name, text in (("indicators", "Frobenius-Schur indicators"), ("out", "outer automorphism group")):
        p = sub.add_parser(name, parents=[parent], formatter_class=CustomHelpFormatter, help=text)
        p.add_argument("file", metavar="FILE")

    p = sub.add_parser("dequiv", parents=[parent], formatter_class=CustomHelpFormatter,
                       help="de-equivariantization by an isotropic subgroup")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--subgroup", required=True, metavar="H", help="<g1,...> generators or {h1,...} elements")
    p.add_argument("--cocycle", metavar="W", help="(h)(k)=value;... twisting 2-cochain")
    p.add_argument("--group", metavar="G", help="coordinates of H and W (default: canonical factors)")

    p = sub.add_parser("equiv", parents=[parent], formatter_class=CustomHelpFormatter,
                       help="equivariantization by an automorphism or by Γ-data")
    p.add_argument("file", metavar="FILE")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--aut", metavar="THETA", help="id, neg, k or [images] of an involution of G")
    source.add_argument("--gamma", metavar="SPEC", help="Γ-data YAML file or a name under data/gamma")
    p.add_argument("--group", metavar="G", help="coordinates of THETA (default: canonical factors)")
    p.add_argument("--contains", nargs=2, metavar=("G", "M"), help="check for a K(G, M) subring")

    p = sub.add_parser("graph", parents=[parent], formatter_class=CustomHelpFormatter,
                       help="2^G_l 1 principal graph")
    p.add_argument("group", metavar="G")
    p.add_argument("l", type=int)
    p.add_argument("--dot", metavar="PATH", help="write the DOT graph to PATH")

    p = sub.add_parser("export", parents=[parent], formatter_class=CustomHelpFormatter,
                       help="write a verified solution or its admissible tuple as JSON")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--tuple", action="store_true", help="export the admissible tuple")
    p.add_argument("--out", metavar="PATH")

    return parser


def run(argv=None):
    """
    Parses argv, runs one command and prints its output
    :return: exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    config = ConfigManager(getattr(args, "config", None))
    LoggerManager.set_log_level(config.log_level)
    logger = LoggerManager.get_logger(__name__)

    if args.show_config:
        print(view_config_file(config.get_config_dict()))
        return EXIT_SUCCESS

    if args.command is None:
        parser.print_help()
        return EXIT_INPUT_ERROR

    start_time = time.time()
    if not args.json:
        print(get_start_time_msg(datetime.now()))
    logger.info(f"command {args.command}: {vars(args)}")

    outcome = COMMANDS[args.command](args, config)

    if args.json:
        sys.stdout.write(dump_json(outcome.payload))
    else:
        print(outcome.text)
        print(f"  {get_elapsed_time_msg(time.time(), start_time)}")
    return outcome.exit_code


def main(argv=None):
    try:
        code = run(argv)
    except NearGroupError as err:
        LoggerManager.get_logger(__name__).error(err.msg)
        print_error_msg(err.msg, err.exit_code)
    except KeyboardInterrupt:
        print(f"\n{PROGRAM_NAME} : Program is terminated by user.")
        sys.exit(EXIT_VERIFICATION_FAIL)
    else:
        sys.exit(code)


if __name__ == "__main__":
    main()
