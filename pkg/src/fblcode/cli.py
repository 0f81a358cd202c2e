"""Command line surface for the block-coding toolkit.

One binary, subcommand style.  Every report is a single JSON document on
stdout; ``--format csv`` switches to comma separated rows whose columns
are listed in each subcommand's help.  Numeric output carries 12
significant digits.  Exit status: 0 on success, 1 when a ``--strict``
check or scan does not hold, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import sim
from .checkers import (
    IcAssignment,
    MacAssignment,
    SchemeParams,
    check_ces,
    check_ic_chk,
    check_ic_step1,
    check_ic_step2,
    check_isolated,
    check_lc,
    check_mac_step1,
    check_mac_step2,
    dueck_separation_scan,
)
from .core import Alphabet, Channel, JointPmf, Pmf, product_alphabet, _symbols_from_json
from .dueck import DueckParams, satellite_models, source_stats
from .exponents import error_exponent, error_exponent_primal
from .info import conditional_entropy, entropy, gkw_decomposition, mutual_information, typical_set

__all__ = ["DEFAULT_SEED", "RunConfig", "entry", "main"]

DEFAULT_SEED = 1729


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation: subcommand, flag values and the shared knobs."""

    command: str
    options: dict
    config_path: str | None
    output_format: str
    seed: int | None
    jobs: int


# ---------------------------------------------------------------------------
# report formatting
# ---------------------------------------------------------------------------


def _round12(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float):
        return float("%.12g" % obj) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {key: _round12(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(val) for val in obj]
    return obj


def _cell(value):
    """One CSV cell; containers become compact JSON."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.12g" % value
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(_round12(value), sort_keys=True, separators=(",", ":"))
    return value


def _csv_out(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _flatten(obj, prefix=""):
    """Depth-first (key, value) pairs with dotted keys, keys sorted."""
    if isinstance(obj, dict):
        rows = []
        for key in sorted(obj):
            rows.extend(_flatten(obj[key], "%s%s." % (prefix, key)))
        return rows
    return [(prefix[:-1], obj)]


def _emit(report, csv_text, fmt):
    if fmt == "json":
        sys.stdout.write(json.dumps(_round12(report), indent=2, sort_keys=True) + "\n")
        return
    if csv_text is None:
        pairs = _flatten(_round12(report))
        csv_text = _csv_out(("key", "value"), pairs)
    sys.stdout.write(csv_text)


# ---------------------------------------------------------------------------
# configuration parsing
# ---------------------------------------------------------------------------


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise ValueError("cannot read config file %r: %s" % (path, err.strerror or err))
    except json.JSONDecodeError as err:
        raise ValueError("config file %r is not valid JSON: %s" % (path, err))


def _need(obj, field, where):
    if not isinstance(obj, dict) or field not in obj:
        raise ValueError("config field %r is missing (%s)" % (field, where))
    return obj[field]


def _joint_from_json(obj) -> JointPmf:
    names = _need(obj, "names", "a joint pmf block")
    alphabets = _need(obj, "alphabets", "a joint pmf block")
    probs = _need(obj, "probs", "a joint pmf block")
    if len(names) != len(alphabets):
        raise ValueError("config field 'alphabets' must list one alphabet per name")
    return JointPmf(
        tuple(names),
        tuple(Alphabet(_symbols_from_json(a)) for a in alphabets),
        np.asarray(probs, dtype=float),
    )


def _assignment_config(cfg, kind):
    cls = MacAssignment if kind == "mac" else IcAssignment
    asn = cls.from_json(_need(cfg, "assignment", "the checker input"))
    par = SchemeParams.from_json(_need(cfg, "params", "the checker input"))
    return asn, par


def _channel_from_text(text) -> Channel:
    if text.startswith("bsc:"):
        try:
            p = float(text[4:])
        except ValueError:
            raise ValueError("--channel bsc crossover is not a number: %r" % (text,))
        if not 0.0 <= p <= 1.0:
            raise ValueError("--channel bsc crossover must lie in [0, 1], got %r" % (p,))
        bits = Alphabet.range(2)
        return Channel(bits, bits, [[1.0 - p, p], [p, 1.0 - p]])
    return Channel.from_json(_load_json(text))


def _input_pmf(text, channel) -> Pmf:
    if text == "uniform":
        return Pmf.uniform(channel.input)
    if "," in text:
        try:
            vals = [float(tok) for tok in text.split(",")]
        except ValueError:
            raise ValueError("--pu entries are not numbers: %r" % (text,))
        if len(vals) != len(channel.input):
            raise ValueError(
                "--pu lists %d entries, the channel input has %d symbols"
                % (len(vals), len(channel.input))
            )
        return Pmf(channel.input, vals)
    return Pmf.from_json(_load_json(text))


# ---------------------------------------------------------------------------
# subcommand handlers, each returning (report, csv text or None, failed)
# ---------------------------------------------------------------------------


def _cmd_info(args):
    cfg = _load_json(args.config)
    source = JointPmf(
        ("s1", "s2"),
        (
            Alphabet(_symbols_from_json(_need(cfg, "alphabet1", "the source block"))),
            Alphabet(_symbols_from_json(_need(cfg, "alphabet2", "the source block"))),
        ),
        np.asarray(_need(cfg, "probs", "the source block"), dtype=float),
    )
    dec = gkw_decomposition(source)
    a1, a2 = source.alphabets
    report = {
        "h_s1": entropy(source, "s1"),
        "h_s2": entropy(source, "s2"),
        "h_joint": entropy(source),
        "h_s1_given_s2": conditional_entropy(source, "s1", "s2"),
        "h_s2_given_s1": conditional_entropy(source, "s2", "s1"),
        "mutual_information": mutual_information(source, "s1", "s2"),
        "common_part": {
            "size": len(dec.k_alphabet),
            "entropy": dec.common_entropy(),
            "has_null_component": dec.has_null_component,
            "pmf": dec.k_pmf.to_json(),
            "f1": [[s, dec.f1[s]] for s in a1.symbols],
            "f2": [[s, dec.f2[s]] for s in a2.symbols],
        },
    }
    if (args.l is None) != (args.delta is None):
        raise ValueError("--l and --delta must be given together")
    if args.l is not None:
        ts = typical_set(dec.k_pmf, args.l, args.delta)
        report["typical_labels"] = {
            "l": args.l,
            "delta": args.delta,
            "count": ts.size(),
            "probability": ts.probability(),
        }
    return report, None, False


def _cmd_exponent(args):
    channel = _channel_from_text(args.channel)
    p_u = _input_pmf(args.pu, channel)
    solver = error_exponent_primal if args.method == "primal" else error_exponent
    return solver(args.rate, p_u, channel).to_json(), None, False


def _cmd_dueck(args):
    params = DueckParams(args.a, args.k, args.eta)
    stats = source_stats(params).to_json()
    if args.mode is None:
        rows = [("stats", key, val) for key, val in _flatten(_round12(stats))]
        return stats, _csv_out(("kind", "key", "value"), rows), False
    sat1, sat2 = satellite_models(params, args.mode)
    report = [
        dict(kind="stats", **stats),
        dict(kind="satellite", receiver=1, **sat1.to_json()),
        dict(kind="satellite", receiver=2, **sat2.to_json()),
    ]
    rows = []
    for entry_row in _round12(report):
        kind = entry_row.pop("kind")
        rec = entry_row.pop("receiver", None)
        tag = kind if rec is None else "%s_%d" % (kind, rec)
        rows.extend((tag, key, val) for key, val in _flatten(entry_row))
    return report, _csv_out(("kind", "key", "value"), rows), False


_ISOLATED_ONLY = ("a", "k", "eta", "l", "delta", "beta", "mode")


def _cmd_check(args):
    extras = {name: getattr(args, name) for name in _ISOLATED_ONLY}
    if args.what != "isolated":
        given = [name for name, val in extras.items() if val is not None]
        if given:
            raise ValueError(
                "flags %s apply to 'check isolated' only"
                % ", ".join("--" + g for g in given)
            )
        if args.config is None:
            raise ValueError("--config is required for 'check %s'" % args.what)
        cfg = _load_json(args.config)
        if args.what == "ces":
            report = check_ces(_joint_from_json(cfg))
        elif args.what == "lc":
            report = check_lc(_joint_from_json(cfg))
        else:
            kind = "mac" if args.what.startswith("mac") else "ic"
            asn, par = _assignment_config(cfg, kind)
            checker = {
                "mac1": check_mac_step1,
                "mac2": check_mac_step2,
                "ic1": check_ic_step1,
                "ic2": check_ic_step2,
                "chk": check_ic_chk,
            }[args.what]
            report = checker(asn, par)
    else:
        cfg = _load_json(args.config) if args.config else {}

        def pick(name, cast, default=None):
            flag = extras[name]
            if flag is not None:
                return cast(flag)
            if cfg.get(name) is not None:
                return cast(cfg[name])
            return default

        triple = []
        for name in ("a", "k", "eta"):
            value = pick(name, int)
            if value is None:
                raise ValueError(
                    "config field %r is missing (give --%s or put it in the config)"
                    % (name, name)
                )
            triple.append(value)
        report = check_isolated(
            DueckParams(*triple),
            l=pick("l", int),
            delta=pick("delta", float),
            beta=pick("beta", float),
            mode=pick("mode", str, "mac"),
        )

    doc = report.to_json()
    columns = ("name", "lhs", "rhs", "slack", "satisfied", "note")
    rows = [[rec.get(c) for c in columns] for rec in _round12(doc)["records"]]
    failed = bool(args.strict) and not doc["overall"]
    return doc, _csv_out(columns, rows), failed


def _cmd_scan(args):
    result = dueck_separation_scan(args.eta, args.amax, args.kmax, mode=args.mode)
    doc = result.to_json()
    columns = (
        "k", "a", "lemma_violated", "lemma_slack",
        "step1_ok", "phi_log", "passes", "error",
    )
    rows = [[row.get(c) for c in columns] for row in _round12(doc)["rows"]]
    csv_text = _csv_out(columns, rows) + json.dumps(
        {"minimal": _round12(doc["minimal"])}, sort_keys=True
    ) + "\n"
    failed = bool(args.strict) and doc["minimal"] is None
    return doc, csv_text, failed


_TOY_FACTORIES = {
    "binary": (sim.binary_toy_mac_spec, "mac1"),
    "gkw": (sim.gkw_toy_mac_spec, "mac1"),
    "ic": (sim.toy_ic_spec, "ic2"),
}


def _simulation_spec(args) -> sim.CodeEnsembleSpec:
    if (args.config is None) == (args.toy is None):
        raise ValueError("give exactly one of --config or --toy")
    if args.toy is not None:
        factory, kind = _TOY_FACTORIES[args.toy]
        if kind != args.kind:
            raise ValueError("--toy %s runs under 'simulate %s'" % (args.toy, kind))
        if args.rates is not None:
            raise ValueError("--rates applies to --config runs only")
        kwargs = {}
        if args.m is not None:
            kwargs["m"] = args.m
        if args.seed is not None:
            kwargs["seed"] = args.seed
        if args.mode is not None:
            kwargs["mode"] = args.mode
        spec = factory(**kwargs)
        overrides = {}
        if args.delta_dec is not None:
            overrides["delta_dec"] = args.delta_dec
        if args.search_budget is not None:
            overrides["search_budget"] = args.search_budget
        return dataclasses.replace(spec, **overrides) if overrides else spec

    cfg = _load_json(args.config)
    asn, par = _assignment_config(cfg, "mac" if args.kind == "mac1" else "ic")
    rates = args.rates if args.rates is not None else _need(cfg, "rates", "the simulation input")
    if len(rates) != 2:
        raise ValueError("config field 'rates' must list two outer-code rates")
    m = args.m if args.m is not None else cfg.get("m")
    if m is None:
        raise ValueError("config field 'm' is missing (give --m or put it in the config)")
    delta_dec = args.delta_dec if args.delta_dec is not None else cfg.get("delta_dec")
    budget = args.search_budget if args.search_budget is not None else cfg.get("search_budget", 4096)
    return sim.CodeEnsembleSpec(
        asn,
        par,
        int(m),
        (float(rates[0]), float(rates[1])),
        args.seed if args.seed is not None else int(cfg.get("seed", DEFAULT_SEED)),
        mode=args.mode if args.mode is not None else cfg.get("mode", "end_to_end"),
        delta_dec=None if delta_dec is None else float(delta_dec),
        search_budget=int(budget),
    )


_TRIAL_COLUMNS = (
    "trial", "mode", "m", "disagreement_count", "atypical_rows", "inner_errors",
    "outer_errors", "outer_ties", "sw_attempted", "sw_success", "sw_ties",
    "end_to_end", "budget_aborts",
)


def _write_trial_csv(path, spec, trials):
    bundle = sim.build_codes(spec)
    pmfs = sim.build_decoding_pmfs(spec, bundle)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_TRIAL_COLUMNS)
        for index in range(trials):
            if spec.is_mac:
                outcome, _ = sim.run_mac_trial(spec, index, bundle, pmfs)
            else:
                outcome = sim.run_ic_trial(spec, index, bundle, pmfs)
            doc = _round12(outcome.to_json())
            doc["trial"] = index
            writer.writerow([_cell(doc.get(c)) for c in _TRIAL_COLUMNS])


def _cmd_simulate(args):
    spec = _simulation_spec(args)
    report = sim.estimate_error(spec, args.trials, jobs=args.jobs)
    report["kind"] = args.kind
    report["decode_mode"] = spec.mode
    report["seed"] = spec.seed
    if args.trial_csv is not None:
        _write_trial_csv(args.trial_csv, spec, args.trials)
        report["trial_csv"] = args.trial_csv
    return report, None, False


def _micro_row_pmf() -> Pmf:
    """Fixed three-letter row law with zero cells for the lemma checks."""
    letters = Alphabet.range(3)
    rows = product_alphabet(letters, letters, letters)
    weights = [(3 * i + 2) % 7 for i in range(len(rows))]
    total = float(sum(weights))
    return Pmf(rows, [w / total for w in weights])


_G_IDENTITY = "interleaved-atypicality-identity"


def _cmd_verify(args):
    if args.what == "rows":
        if (args.config is None) == (args.toy is None):
            raise ValueError("give exactly one of --config or --toy")
        if args.toy is not None:
            factory, kind = _TOY_FACTORIES[args.toy]
            if kind != "mac1":
                raise ValueError("row verification runs on the one-receiver variant")
            spec = factory(seed=args.seed if args.seed is not None else DEFAULT_SEED)
        else:
            cfg = _load_json(args.config)
            asn, par = _assignment_config(cfg, "mac")
            rates = _need(cfg, "rates", "the simulation input")
            spec = sim.CodeEnsembleSpec(
                asn,
                par,
                int(_need(cfg, "m", "the simulation input")),
                (float(rates[0]), float(rates[1])),
                args.seed if args.seed is not None else int(cfg.get("seed", DEFAULT_SEED)),
                mode=cfg.get("mode", "component"),
                delta_dec=cfg.get("delta_dec"),
                search_budget=int(cfg.get("search_budget", 4096)),
            )
        report = sim.verify_row_iid(spec, args.trials)
        return report, None, False

    records = []
    if args.which in ("a", "g", "all"):
        for rec in sim.verify_interleaving_lemmas(_micro_row_pmf(), args.m, args.delta):
            suite = "g" if rec["name"] == _G_IDENTITY else "a"
            if args.which in (suite, "all"):
                records.append(dict(suite=suite, **rec))
    if args.which in ("b", "all"):
        for rec in sim.verify_decoding_pmf_lemmas():
            records.append(dict(suite="b", **rec))
    columns = ("suite", "name", "max_error", "passed")
    rows = [[rec.get(c) for c in columns] for rec in _round12(records)]
    return records, _csv_out(columns, rows), False


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------


_EPILOG = """output formats:
  json   one JSON document on stdout (default)
  csv    comma separated rows; commands with record lists emit one row per
         record, every other report flattens to key,value rows with dotted
         keys and compact JSON cells for list values

exit status:
  0  success
  1  a --strict check or scan did not hold
  2  usage or configuration error
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fblcode",
        description="Exact functionals, admissibility checkers and Monte Carlo "
        "simulation for fixed block-length joint source-channel designs.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument(
        "--format", choices=("json", "csv"), default="json",
        help="report format (default json)",
    )

    p_info = sub.add_parser(
        "info", parents=[fmt],
        help="entropies, mutual information and the common part of a source",
        description="Report entropies, mutual information and the common-part "
        "decomposition of a two-axis source given as JSON: "
        '{"alphabet1": [...], "alphabet2": [...], "probs": [[...]]}. '
        "csv columns: key,value.",
    )
    p_info.add_argument("--config", required=True, help="source JSON file")
    p_info.add_argument("--l", type=int, help="also report the typical label set at this block length")
    p_info.add_argument("--delta", type=float, help="relative typicality window for --l")

    p_exp = sub.add_parser(
        "exponent", parents=[fmt],
        help="random-coding error exponent of a channel at a rate",
        description="Evaluate the random-coding exponent. --channel takes "
        "'bsc:P' or a channel JSON file; --pu takes 'uniform', a comma list "
        "of probabilities, or a pmf JSON file. csv columns: key,value.",
    )
    p_exp.add_argument("--channel", required=True, help="'bsc:P' or channel JSON file")
    p_exp.add_argument("--rate", type=float, required=True, help="rate in nats")
    p_exp.add_argument("--pu", default="uniform", help="input law (default uniform)")
    p_exp.add_argument(
        "--method", choices=("dual", "primal"), default="dual",
        help="dual fixed-point solver (default) or the small-alphabet primal grid",
    )

    p_dueck = sub.add_parser(
        "dueck", parents=[fmt],
        help="closed-form statistics of the two-parameter source family",
        description="Closed-form source statistics for parameters (a, k, eta); "
        "with --mode the two private-channel capacity models are appended as "
        "extra JSON rows. csv columns: kind,key,value.",
    )
    p_dueck.add_argument("action", choices=("stats",), help="report to emit")
    p_dueck.add_argument("--a", type=int, required=True, help="base alphabet size, at least 2")
    p_dueck.add_argument("--k", type=int, required=True, help="grouping parameter, at least 2")
    p_dueck.add_argument("--eta", type=int, required=True, help="even rarity exponent, at least 6")
    p_dueck.add_argument("--mode", choices=("mac", "ic"), help="append satellite channel rows")

    p_check = sub.add_parser(
        "check", parents=[fmt],
        help="sufficient-condition reports",
        description="Run one admissibility checker. ces/lc take a factored "
        'joint as {"names": [...], "alphabets": [...], "probs": ...}; '
        'mac1/mac2/ic1/ic2/chk take {"assignment": ..., "params": ...}; '
        "isolated takes (a, k, eta) from flags or the config. "
        "csv columns: name,lhs,rhs,slack,satisfied,note.",
    )
    p_check.add_argument(
        "what", choices=("ces", "lc", "mac1", "mac2", "ic1", "ic2", "chk", "isolated"),
        help="which condition family to check",
    )
    p_check.add_argument("--config", help="JSON input file")
    p_check.add_argument("--strict", action="store_true", help="exit 1 unless every condition holds")
    p_check.add_argument("--a", type=int, help="isolated only: base alphabet size")
    p_check.add_argument("--k", type=int, help="isolated only: grouping parameter")
    p_check.add_argument("--eta", type=int, help="isolated only: rarity exponent")
    p_check.add_argument("--l", type=int, help="isolated only: block length override")
    p_check.add_argument("--delta", type=float, help="isolated only: typicality window override")
    p_check.add_argument("--beta", type=float, help="isolated only: label split override")
    p_check.add_argument("--mode", choices=("mac", "ic"), help="isolated only: condition family")

    p_scan = sub.add_parser(
        "scan", parents=[fmt],
        help="smallest separating (k, a) pair for the source family",
        description="Grid scan for the smallest (k, a), ordered by k then a, "
        "where the necessary-condition budget fails while the prescribed "
        "design passes its first-stage check. csv columns: k,a,"
        "lemma_violated,lemma_slack,step1_ok,phi_log,passes,error; one JSON "
        "line with the minimal pair follows the table.",
    )
    p_scan.add_argument("--eta", type=int, required=True, help="even rarity exponent, at least 6")
    p_scan.add_argument("--amax", "--a-max", dest="amax", type=int, required=True, help="largest a to probe")
    p_scan.add_argument("--kmax", "--k-max", dest="kmax", type=int, required=True, help="largest k to probe")
    p_scan.add_argument("--mode", choices=("mac", "ic"), default="mac", help="condition family (default mac)")
    p_scan.add_argument("--strict", action="store_true", help="exit 1 when no pair is found")

    p_sim = sub.add_parser(
        "simulate", parents=[fmt],
        help="Monte Carlo runs of the matrix coding scheme",
        description="Run seeded trials of the matrix scheme and report "
        "per-stage error rates with Wilson intervals. The config holds "
        '{"assignment": ..., "params": ..., "rates": [r1, r2]} plus optional '
        "m/seed/mode/delta_dec/search_budget; --toy runs a built-in "
        "configuration instead. csv: key,value rows of the flattened "
        "summary. --trial-csv FILE writes per-trial rows with columns "
        + ",".join(_TRIAL_COLUMNS) + ".",
    )
    p_sim.add_argument("kind", choices=("mac1", "ic2"), help="one-receiver or two-receiver scheme")
    p_sim.add_argument("--config", help="simulation JSON file")
    p_sim.add_argument("--toy", choices=sorted(_TOY_FACTORIES), help="built-in configuration")
    p_sim.add_argument("--m", type=int, help="matrix rows (inner block count)")
    p_sim.add_argument("--trials", type=int, default=200, help="number of trials (default 200)")
    p_sim.add_argument("--seed", type=int, help="base seed (default %d)" % DEFAULT_SEED)
    p_sim.add_argument("--mode", choices=("end_to_end", "component"), help="decoder chaining mode")
    p_sim.add_argument("--jobs", type=int, default=1, help="parallel trial evaluation hint (default 1)")
    p_sim.add_argument("--delta-dec", dest="delta_dec", type=float, help="decoder typicality window override")
    p_sim.add_argument("--search-budget", dest="search_budget", type=int, help="stage-3 frontier cap override")
    p_sim.add_argument("--rates", type=float, nargs=2, metavar=("R1", "R2"), help="outer-code rates override")
    p_sim.add_argument("--trial-csv", dest="trial_csv", help="also write one CSV row per trial to this file")

    p_ver = sub.add_parser(
        "verify", parents=[fmt],
        help="exact lemma checks and empirical distribution checks",
        description="'verify lemmas' checks the interleaving identities (a), "
        "the decoding pmf identities (b) and the atypicality identity (g) by "
        "exhaustive enumeration; csv columns: suite,name,max_error,passed. "
        "'verify rows' compares pooled empirical rows of a one-receiver "
        "configuration against the exact laws; csv columns: key,value.",
    )
    p_ver.add_argument("what", choices=("lemmas", "rows"), help="which verification to run")
    p_ver.add_argument("--which", choices=("a", "b", "g", "all"), default="all",
                       help="lemmas only: identity family (default all)")
    p_ver.add_argument("--m", type=int, default=2, help="lemmas only: matrix rows, at most 3 (default 2)")
    p_ver.add_argument("--delta", type=float, default=0.3, help="lemmas only: typicality window (default 0.3)")
    p_ver.add_argument("--config", help="rows only: simulation JSON file")
    p_ver.add_argument("--toy", choices=("binary",), help="rows only: built-in configuration")
    p_ver.add_argument("--trials", type=int, default=200, help="rows only: number of trials (default 200)")
    p_ver.add_argument("--seed", type=int, help="rows only: base seed (default %d)" % DEFAULT_SEED)

    return parser


_HANDLERS = {
    "info": _cmd_info,
    "exponent": _cmd_exponent,
    "dueck": _cmd_dueck,
    "check": _cmd_check,
    "scan": _cmd_scan,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
}


def _run_config(args) -> RunConfig:
    options = {key: val for key, val in vars(args).items() if key != "command"}
    return RunConfig(
        command=args.command,
        options=options,
        config_path=getattr(args, "config", None),
        output_format=getattr(args, "format", "json"),
        seed=getattr(args, "seed", None),
        jobs=getattr(args, "jobs", 1),
    )


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    run = _run_config(args)
    try:
        if run.seed is not None and not 0 <= run.seed < 2 ** 64:
            raise ValueError("--seed must be an unsigned 64-bit integer")
        if run.jobs < 1:
            raise ValueError("--jobs must be positive")
        report, csv_text, failed = _HANDLERS[run.command](args)
    except ValueError as err:
        sys.stderr.write("fblcode: error: %s\n" % (err,))
        return 2
    except KeyError as err:
        sys.stderr.write("fblcode: error: missing config field: %s\n" % (err,))
        return 2
    except OSError as err:
        sys.stderr.write("fblcode: error: %s\n" % (err,))
        return 2

    _emit(report, csv_text, run.output_format)
    return 1 if failed else 0


def entry():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
