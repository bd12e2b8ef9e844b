"""Command-line entry point: ``hitorder <subcommand> ...``.

Exit codes: 0 for a certified order or plain success, 1 for a falsified
order (or coupling invariant violations), 2 when nothing could be
decided, 64 for bad usage or unreadable input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .coupling import run_batch
from .errors import HitOrderError
from .hitting import certify_ast_order, expected_hitting, falsify_order, hitting_cdf
from .matrix_core import StochMatrix, is_skip_free, load_matrix
from .spectral import large_deviation_rate, spectral_summary, vicev_predict
from .stochastic_order import (
    DEFAULT_N_MAX,
    Verdict,
    certify_st_order,
    check_vedere,
    rowwise_dominates,
)
from .words import Word, compare_words, conway_mean, leading_number, strongest_verdict, word_chain

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64

SEED_ENV = "HITORDER_SEED"

_VERDICT_EXIT = {
    Verdict.ST_CERTIFIED: EXIT_OK,
    Verdict.AST_CERTIFIED: EXIT_OK,
    Verdict.FALSIFIED: EXIT_FALSIFIED,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    args: argparse.Namespace

    @property
    def fmt(self) -> str:
        return getattr(self.args, "format", "text")


def exit_code(verdict: Verdict) -> int:
    return _VERDICT_EXIT[verdict]


def fmt_q(x: Fraction) -> str:
    """Exact fraction plus a 6-significant-digit decimal."""
    return f"{x} ({float(x):.6g})"


def dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} must be positive")
    return value


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _word(text: str, alphabet: int) -> Word:
    try:
        return Word.parse(text, alphabet)
    except (ValueError, HitOrderError) as exc:
        raise UsageError(str(exc)) from None


def _matrix(path: str) -> StochMatrix:
    try:
        return load_matrix(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read matrix from {path}: {exc}") from None


def _print_fields(pairs) -> None:
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        print(f"{key.ljust(width)}  {value}")


def _certificate_lines(prefix: str, cert) -> list[tuple[str, str]]:
    lines = [(f"{prefix} verdict", cert.verdict.value)]
    if cert.pair:
        lines.append((f"{prefix} pair", f"({cert.n1}, {cert.n2}) n_hat={cert.n_hat}"))
    if cert.identical:
        lines.append((f"{prefix} identical", "yes"))
    if cert.falsified_at is not None:
        fast, slow = cert.falsified_values
        lines.append((f"{prefix} fails at n", f"{cert.falsified_at}: fast {fmt_q(fast)} < slow {fmt_q(slow)}"))
    return lines


def cmd_leading(cfg: RunConfig) -> int:
    w = _word(cfg.args.word, cfg.args.alphabet)
    eps, mean = leading_number(w), conway_mean(w)
    if cfg.fmt == "json":
        print(dump_json({"word": str(w), "alphabet": w.alphabet_size, "leading": str(eps),
                         "mean": str(mean), "mean_decimal": float(mean)}))
    else:
        print(f"{eps} mean={mean}")
    return EXIT_OK


def cmd_mean(cfg: RunConfig) -> int:
    w = _word(cfg.args.word, cfg.args.alphabet)
    mean = conway_mean(w)
    if cfg.args.check:
        chain_mean = expected_hitting(word_chain(w))
        if chain_mean != mean:
            print(f"mismatch: leading-number mean {mean}, chain mean {chain_mean}", file=sys.stderr)
            return EXIT_FALSIFIED
    if cfg.fmt == "json":
        print(dump_json({"word": str(w), "alphabet": w.alphabet_size, "mean": str(mean),
                         "mean_decimal": float(mean)}))
    else:
        print(fmt_q(mean))
    return EXIT_OK


def cmd_chain(cfg: RunConfig) -> int:
    w = _word(cfg.args.word, cfg.args.alphabet)
    M = word_chain(w, absorbing=not cfg.args.non_absorbing)
    print(dump_json(M.to_dict()) if cfg.fmt == "json" else str(M))
    return EXIT_OK


def cmd_compare_words(cfg: RunConfig) -> int:
    a = cfg.args
    fast, slow = _word(a.fast, a.alphabet), _word(a.slow, a.alphabet)
    if fast.k != slow.k:
        raise UsageError("--fast and --slow must have the same length")
    report = compare_words(fast, slow, n_max=a.n_max, horizon=a.horizon)
    if cfg.fmt == "json":
        print(dump_json(report.to_dict()))
    else:
        lines = [
            ("fast", f"{report.fast} leading={report.fast_leading} mean={fmt_q(report.fast_mean)}"),
            ("slow", f"{report.slow} leading={report.slow_leading} mean={fmt_q(report.slow_mean)}"),
            ("rowwise", "yes" if report.rowwise else "no"),
            ("block lengths", " ".join(map(str, report.vedere.m)) if report.vedere else "none"),
            ("split level", ", ".join(f"m={s.m}:{'holds' if s.holds else 'no'}" for s in report.serve) or "none"),
        ]
        lines += _certificate_lines("st", report.st_certificate)
        lines += _certificate_lines("ast", report.ast_certificate)
        lines += [
            ("spectral", report.vicev.value),
            ("falsified at", str(report.falsified_at) if report.falsified_at is not None else "none"),
            ("verdict", f"{report.verdict.value}" + (f" via {report.via}" if report.via else "")),
        ]
        if report.substitution:
            s = report.substitution
            lines.append(("substitute", f"fast={s.fast} slow={s.slow} ({s.certificate.verdict.value} via {s.via})"))
        _print_fields(lines)
    return exit_code(report.verdict)


def cmd_compare_matrices(cfg: RunConfig) -> int:
    a = cfg.args
    P, P_tilde = _matrix(a.fast), _matrix(a.slow)
    skip_free = is_skip_free(P) and is_skip_free(P_tilde)
    rowwise = rowwise_dominates(P, P_tilde)
    vedere = check_vedere(P, P_tilde) if skip_free else None
    st = certify_st_order(P, P_tilde, a.n_max)
    ast = certify_ast_order(P, P_tilde, a.n_max)
    falsified_at = falsify_order(P, P_tilde, a.horizon)
    try:
        vicev = vicev_predict(P_tilde, P).value
    except HitOrderError as exc:
        vicev = f"unavailable: {exc}"
    # Row-wise dominance only certifies the order for skip-free chains.
    verdict, via = strongest_verdict(rowwise and skip_free, vedere, (), st, ast, falsified_at)
    data = {
        "skip_free": skip_free,
        "rowwise": rowwise,
        "vedere": list(vedere.m) if vedere else None,
        "st_certificate": st.to_dict(),
        "ast_certificate": ast.to_dict(),
        "vicev": vicev,
        "falsified_at": falsified_at,
        "verdict": verdict.value,
        "via": via,
    }
    if cfg.fmt == "json":
        print(dump_json(data))
    else:
        lines = [
            ("skip-free", "yes" if skip_free else "no"),
            ("rowwise", "yes" if rowwise else "no"),
            ("block lengths", " ".join(map(str, vedere.m)) if vedere else "none"),
        ]
        lines += _certificate_lines("st", st) + _certificate_lines("ast", ast)
        lines += [
            ("spectral", vicev),
            ("falsified at", str(falsified_at) if falsified_at is not None else "none"),
            ("verdict", verdict.value + (f" via {via}" if via else "")),
        ]
        _print_fields(lines)
    return exit_code(verdict)


def cmd_certify(cfg: RunConfig) -> int:
    a = cfg.args
    P, P_tilde = _matrix(a.fast), _matrix(a.slow)
    if a.tail:
        cert = certify_ast_order(P, P_tilde, a.n_max)
    else:
        pair = tuple(a.pair) if a.pair else None
        try:
            cert = certify_st_order(P, P_tilde, a.n_max, pair=pair)
        except ValueError as exc:
            if pair is None:
                raise
            raise UsageError(str(exc)) from None
    if cfg.fmt == "json":
        print(dump_json(cert.to_dict()))
    else:
        _print_fields(_certificate_lines("st" if not a.tail else "ast", cert))
    return exit_code(cert.verdict)


def cmd_spectral(cfg: RunConfig) -> int:
    a = cfg.args
    M = _matrix(a.matrix)
    summary = spectral_summary(M, a.target)
    data = summary.to_dict()
    if a.rate_n:
        data["rate_n"] = a.rate_n
        data["rate"] = large_deviation_rate(M, a.target, a.rate_n)
    if cfg.fmt == "json":
        print(dump_json(data))
    else:
        lines = [
            ("moduli", " ".join(f"{x:.6g}" for x in summary.moduli)),
            ("mu", f"{summary.mu:.6g}"),
            ("gap", f"{summary.gap:.6g}"),
            ("ergodic taboo", "yes" if summary.ergodic_taboo else "no"),
        ]
        if a.rate_n:
            lines.append((f"rate at n={a.rate_n}", f"{data['rate']:.6g}"))
        _print_fields(lines)
    return EXIT_OK


def cmd_hitting(cfg: RunConfig) -> int:
    a = cfg.args
    dist = hitting_cdf(_matrix(a.matrix), a.target, a.horizon)
    print("n,cdf_decimal,cdf_fraction")
    for n, c in enumerate(dist.cdf):
        print(f"{n},{float(c):.6g},{c}")
    return EXIT_OK


def cmd_couple(cfg: RunConfig) -> int:
    a = cfg.args
    P, P_tilde = _matrix(a.fast), _matrix(a.slow)
    if a.witness:
        witness = tuple(a.witness)
    else:
        found = check_vedere(P, P_tilde)
        if found is None:
            print("no block-length witness exists; pass --witness to force one", file=sys.stderr)
            return EXIT_INCONCLUSIVE
        witness = found.m
    seed = a.seed if a.seed is not None else _default_seed()
    report = run_batch(P, P_tilde, witness, a.samples, seed=seed, workers=a.workers)
    data = report.to_dict()
    data["witness"] = list(witness)
    data["seed"] = seed
    print(dump_json(data))
    return EXIT_OK if report.total_violations == 0 else EXIT_FALSIFIED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hitorder", description="Compare hitting times of absorbing Markov chains.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def fmt(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    def word(p):
        p.add_argument("--word", required=True)
        p.add_argument("--alphabet", type=_positive_int, required=True)

    def pair_of_files(p):
        p.add_argument("fast", help="JSON matrix of the chain claimed to hit first")
        p.add_argument("slow", help="JSON matrix of the chain claimed to hit later")

    p = sub.add_parser("leading", help="leading number and mean waiting time of a word")
    word(p)
    fmt(p)
    p.set_defaults(func=cmd_leading)

    p = sub.add_parser("mean", help="exact mean waiting time of a word")
    word(p)
    p.add_argument("--check", action="store_true", help="also solve the chain's linear system")
    fmt(p)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("chain", help="print a word's occurrence chain")
    word(p)
    p.add_argument("--non-absorbing", action="store_true")
    fmt(p)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("compare-words", help="is the fast word's waiting time stochastically smaller?")
    p.add_argument("--fast", required=True)
    p.add_argument("--slow", required=True)
    p.add_argument("--alphabet", type=_positive_int, required=True)
    p.add_argument("--n-max", type=_positive_int, default=DEFAULT_N_MAX)
    p.add_argument("--horizon", type=_positive_int, default=200)
    fmt(p)
    p.set_defaults(func=cmd_compare_words)

    p = sub.add_parser("compare-matrices", help="run every order check on two matrix files")
    pair_of_files(p)
    p.add_argument("--n-max", type=_positive_int, default=DEFAULT_N_MAX)
    p.add_argument("--horizon", type=_positive_int, default=200)
    fmt(p)
    p.set_defaults(func=cmd_compare_matrices)

    p = sub.add_parser("certify", help="coprime-power certificate for two matrix files")
    pair_of_files(p)
    p.add_argument("--n-max", type=_positive_int, default=DEFAULT_N_MAX)
    p.add_argument("--pair", type=_positive_int, nargs=2, metavar=("N1", "N2"))
    p.add_argument("--tail", action="store_true", help="certify the tail order only")
    fmt(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("spectral", help="eigenvalue moduli and spectral gap")
    p.add_argument("matrix")
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--rate-n", type=_positive_int, default=None,
                   help="also report log P(T > n) / n at this n")
    fmt(p)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("hitting", help="exact hitting-time cdf as CSV")
    p.add_argument("matrix")
    p.add_argument("--target", type=int, default=None)
    p.add_argument("--horizon", type=_positive_int, default=200)
    p.set_defaults(func=cmd_hitting)

    p = sub.add_parser("couple", help="simulate the pathwise coupling and check its invariants")
    pair_of_files(p)
    p.add_argument("--witness", type=_positive_int, nargs="+", help="block lengths m(0..k-1)")
    p.add_argument("--samples", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV} or 0")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_couple)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(args.subcommand, args)
    try:
        return cfg.args.func(cfg)
    except UsageError as exc:
        print(f"hitorder: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HitOrderError as exc:
        print(f"hitorder: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
