"""Command-line front end.

Subcommands: eval, check, dce, rr, average, mc, scatter.  Machine output is
one line of JSON on stdout; ``eval --table`` prints an aligned text row
instead.  Exit status: 0 success, 1 validation error, 2 I/O error, 3
degenerate population or undefined stratum.  Every error prints exactly one
diagnostic line on stderr.  The environment variable ZBIAS_THREADS caps
Monte Carlo parallelism (0 or unset means the implementation default).
"""

from __future__ import annotations

import argparse
import sys

from . import conditions
from .errors import (
    DegeneratePopulationError,
    UndefinedConditionalError,
    UndefinedStratumError,
    ZbiasError,
)
from .estimators import covariate_average, dce, estimates, po_estimates, rr
from .montecarlo import McConfig, estimate_volume, export_scatter
from .scenario import (
    BinaryScenario,
    CovariateFamily,
    DiscreteScenario,
    PotentialOutcomeScenario,
    to_discrete,
)
from .scenario_io import load_scenario

_THEOREMS = (
    "thm1", "thm2", "thm3", "cor1", "cor2", "thm4", "thm5-binary",
    "cor3", "cor4", "thm7", "weaker", "lemma_s5", "lemma_s7", "collider",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="zbias", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_conditioning(p):
        p.add_argument(
            "--conditioning", choices=("on_z", "on_propensity"), default="on_z"
        )

    p = sub.add_parser("eval", help="estimands of a scenario file")
    p.add_argument("scenario")
    add_conditioning(p)
    p.add_argument("--table", action="store_true", help="aligned text row")
    p.add_argument("--allow-direct-effect", action="store_true")

    p = sub.add_parser("check", help="condition reports for a scenario file")
    p.add_argument("scenario")
    p.add_argument("--theorem", choices=_THEOREMS, required=True)

    p = sub.add_parser("dce", help="distributional effects at a threshold")
    p.add_argument("scenario")
    p.add_argument("--threshold", type=float, required=True)
    add_conditioning(p)

    p = sub.add_parser("rr", help="ratio-scale estimands")
    p.add_argument("scenario")
    add_conditioning(p)

    p = sub.add_parser("average", help="estimands averaged over covariate strata")
    p.add_argument("scenario")
    add_conditioning(p)
    p.add_argument("--allow-direct-effect", action="store_true")

    p = sub.add_parser("mc", help="amplification-region volume estimate")
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--filter", choices=("cor1", "cor2"))

    p = sub.add_parser("scatter", help="per-draw bias CSV")
    p.add_argument("--draws", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    return parser


def _load(path, kinds, command):
    scenario = load_scenario(path)
    if not isinstance(scenario, kinds):
        names = ", ".join(k.__name__ for k in kinds)
        raise ZbiasError(
            f"{command} needs a scenario of kind {names}, got {type(scenario).__name__}"
        )
    return scenario


def _table_row(estimate_set) -> str:
    verdict = conditions.zbias_verdict(estimate_set)
    header = f"{'ACE_true':>10} {'ACE_unadj':>10} {'ACE_adj':>10} {'Z-bias':>7}"
    row = (
        f"{estimate_set.true_all:>10.4f} {estimate_set.unadj:>10.4f} "
        f"{estimate_set.adj_all:>10.4f} {verdict.label:>7}"
    )
    return header + "\n" + row


def _run_eval(args) -> int:
    scenario = _load(
        args.scenario, (BinaryScenario, DiscreteScenario, PotentialOutcomeScenario), "eval"
    )
    if isinstance(scenario, PotentialOutcomeScenario):
        result = po_estimates(scenario)
    else:
        result = estimates(
            scenario, args.conditioning, allow_direct_effect=args.allow_direct_effect
        )
    print(_table_row(result) if args.table else result.to_json())
    return 0


def _run_check(args) -> int:
    theorem = args.theorem
    if theorem in ("cor1", "cor2", "weaker", "lemma_s5", "lemma_s7"):
        scenario = _load(args.scenario, (BinaryScenario,), f"check --theorem {theorem}")
        p11 = scenario.treat[1][1]
        p10 = scenario.treat[1][0]
        p01 = scenario.treat[0][1]
        p00 = scenario.treat[0][0]
        reports = {
            "cor1": lambda: conditions.check_cor1(scenario),
            "cor2": lambda: conditions.check_cor2(scenario),
            "weaker": lambda: conditions.check_weaker_condition(scenario),
            "lemma_s5": lambda: conditions.check_lemma_s5(p11, p10, p01, p00),
            "lemma_s7": lambda: conditions.check_lemma_s7(p11, p10, p01, p00),
        }[theorem]()
    elif theorem in ("thm1", "thm2", "thm3", "thm7", "collider"):
        scenario = _load(
            args.scenario, (BinaryScenario, DiscreteScenario), f"check --theorem {theorem}"
        )
        if isinstance(scenario, BinaryScenario):
            scenario = to_discrete(scenario)
        if theorem == "collider":
            reports = conditions.check_collider_association(
                scenario, 0
            ) + conditions.check_collider_association(scenario, 1)
        else:
            reports = {
                "thm1": conditions.check_thm1,
                "thm2": conditions.check_thm2,
                "thm3": conditions.check_thm3,
                "thm7": conditions.check_thm7,
            }[theorem](scenario)
    else:
        scenario = _load(
            args.scenario, (PotentialOutcomeScenario,), f"check --theorem {theorem}"
        )
        reports = {
            "thm4": conditions.check_thm4,
            "thm5-binary": conditions.check_thm5_binary,
            "cor3": conditions.check_cor3,
            "cor4": conditions.check_cor4,
        }[theorem](scenario)
    print(conditions.reports_to_json(reports))
    return 0


def _run_dce(args) -> int:
    scenario = _load(args.scenario, (BinaryScenario, DiscreteScenario), "dce")
    if isinstance(scenario, BinaryScenario):
        scenario = to_discrete(scenario)
    print(dce(scenario, args.threshold, args.conditioning).to_json())
    return 0


def _run_rr(args) -> int:
    scenario = _load(args.scenario, (BinaryScenario, DiscreteScenario), "rr")
    if isinstance(scenario, BinaryScenario):
        scenario = to_discrete(scenario)
    print(rr(scenario, args.conditioning).to_json())
    return 0


def _run_average(args) -> int:
    family = _load(args.scenario, (CovariateFamily,), "average")
    result = covariate_average(
        family, args.conditioning, allow_direct_effect=args.allow_direct_effect
    )
    print(result.to_json())
    return 0


def _run_mc(args) -> int:
    cfg = McConfig(
        draws=args.draws,
        seed=args.seed,
        filter=(args.filter,) if args.filter else None,
    )
    print(estimate_volume(cfg).to_json())
    return 0


def _run_scatter(args) -> int:
    cfg = McConfig(draws=args.draws, seed=args.seed)
    rows = export_scatter(cfg, args.out)
    print('{"rows": %d, "out": "%s"}' % (rows, args.out))
    return 0


_HANDLERS = {
    "eval": _run_eval,
    "check": _run_check,
    "dce": _run_dce,
    "rr": _run_rr,
    "average": _run_average,
    "mc": _run_mc,
    "scatter": _run_scatter,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DegeneratePopulationError, UndefinedStratumError, UndefinedConditionalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ZbiasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
