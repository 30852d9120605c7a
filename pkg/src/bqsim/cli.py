"""Command line front end. Every command writes one CSV table.

Exit codes: 0 success, 2 invalid input, 3 resource limit, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import BQSError, ContractViolation, InvalidInput, ResourceLimit
from .herald import (
    HeraldPattern,
    bell_measure_fock,
    eta1,
    eta2,
    eta3,
    eta_bqs,
    herald_bqs,
    herald_inverse_annihilation,
    herald_w_state,
    project,
    readout_herald_probabilities,
    w_probability,
)
from .loss import LossConfig, lossy_herald_fidelity
from .protocol import ProtocolConfig, run_protocol
from .state import InputSpec, fidelity, fock_state

EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_IO = 4

COMMANDS = ("simulate", "sweep-eta1", "sweep-bqs", "fock-gen", "w-dist", "loss-scan")


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise InvalidInput(f"bad grid {text!r}, expected start:stop:step") from None
        if step <= 0 or stop < start:
            raise InvalidInput(f"bad grid {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + i * step, 12) for i in range(n + 1)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidInput(f"bad value list {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise InvalidInput(f"bad integer list {text!r}") from None


def parse_coeffs(text: str) -> list[complex]:
    try:
        return [complex(x.replace(" ", "")) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidInput(f"bad coefficient list {text!r}") from None


def parse_herald(text: str) -> HeraldPattern:
    kind, _, arg = text.partition(":")
    try:
        if kind == "v":
            return HeraldPattern.v_at(int(arg))
        if kind == "allh":
            return HeraldPattern.all_h()
        if kind == "exact":
            return HeraldPattern.exact(arg)
        if kind == "bell":
            return HeraldPattern.bell(int(arg))
        if kind == "w":
            return HeraldPattern.multiphoton(int(arg))
    except ValueError:
        pass
    raise InvalidInput(f"bad herald {text!r}; use v:K, allh, exact:STR, bell:K or w:M")


def input_from_args(args) -> InputSpec:
    if args.input == "coherent":
        if args.alpha_sq is None:
            raise InvalidInput("--alpha-sq is required for coherent input")
        return InputSpec.coherent_sq(float(args.alpha_sq), args.n_max)
    if args.input == "fock":
        if args.n is None:
            raise InvalidInput("--n is required for fock input")
        return InputSpec.fock(int(args.n), args.n_max)
    if args.coeffs is None:
        raise InvalidInput("--coeffs is required for custom input")
    return InputSpec.custom(parse_coeffs(args.coeffs), args.n_max)


# -- row builders (top level so a process pool can pickle them) -------------


def _eta1_row(alpha_sq):
    spec = InputSpec.coherent_sq(alpha_sq)
    cfg = ProtocolConfig(1)
    c, _ = spec.coefficients()
    analytic = eta1(c)
    simulated = herald_inverse_annihilation(spec, cfg).probability
    closed = (1 - math.exp(-alpha_sq)) / alpha_sq
    return [alpha_sq, analytic, simulated, abs(analytic - simulated), closed]


def _bqs_row(job):
    k, alpha_sq, iterations = job
    spec = InputSpec.coherent_sq(alpha_sq)
    cfg = ProtocolConfig(max(iterations or k, k))
    c, _ = spec.coefficients()
    final = run_protocol(spec, cfg)
    out = herald_bqs(spec, cfg, k, final)
    e2 = eta2(c, k)
    success, _ = eta_bqs(c, cfg.iterations)
    success_sim = 1.0 - readout_herald_probabilities(final)["all_h"]
    fid = fidelity(out.post_state, fock_state(k)) if out.probability > 0 else 0.0
    return [
        k, alpha_sq, cfg.iterations, e2, out.probability, abs(e2 - out.probability),
        success, success_sim, abs(success - success_sim), fid,
    ]


def _fock_row(k):
    alpha_sq = float(k - 1)
    spec = InputSpec.coherent_sq(alpha_sq)
    cfg = ProtocolConfig(k + 1)
    c, _ = spec.coefficients()
    out = bell_measure_fock(spec, cfg, k)
    analytic = eta3(c, k)
    return [
        k, alpha_sq, analytic, out.probability, abs(analytic - out.probability),
        fidelity(out.post_state, fock_state(k)),
    ]


def _loss_row(job):
    L, spec, cfg, k, exponent, cap, mode, max_branches = job
    loss = LossConfig(L, cap, mode, max_branches)
    prob, fid = lossy_herald_fidelity(spec, cfg, loss, HeraldPattern.v_at(k), fock_state(k))
    pred = (1 - L) ** exponent
    return [L, prob, fid, pred, abs(fid - pred) / pred]


def _pool_map(fn, jobs, n_workers):
    if n_workers and n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


# -- commands ---------------------------------------------------------------


def cmd_simulate(args):
    spec = input_from_args(args)
    if args.iterations is None:
        raise InvalidInput("--iterations is required")
    cfg = ProtocolConfig(args.iterations, args.n_max)
    state = run_protocol(spec, cfg)
    header = ["n_h", "v_slot", "atom", "readout", "re", "im", "probability"]
    if args.herald:
        outcome = project(state, parse_herald(args.herald))
        state = outcome.post_state
        header.append("herald_probability")
    rows = []
    for term, amp in state:
        row = [
            term.n_h, "" if term.v_slot is None else term.v_slot, term.atom.value,
            term.readout, amp.real, amp.imag, abs(amp) ** 2,
        ]
        if args.herald:
            row.append(outcome.probability)
        rows.append(row)
    return header, rows


def cmd_sweep_eta1(args):
    grid = parse_grid(args.grid or "0.1:10:0.1")
    if any(a <= 0 for a in grid):
        raise InvalidInput("alpha_sq grid values must be > 0")
    header = ["alpha_sq", "eta1_analytic", "eta1_simulated", "abs_diff", "eta1_closed_form"]
    return header, _pool_map(_eta1_row, grid, args.jobs)


def cmd_sweep_bqs(args):
    ks = parse_int_list(args.k or "1,2,3,4,5")
    grid = parse_grid(args.grid or "0.1:10:0.1")
    if any(a <= 0 for a in grid) or any(k < 1 for k in ks):
        raise InvalidInput("need k >= 1 and alpha_sq > 0")
    jobs = [(k, a, args.iterations) for k in ks for a in grid]
    header = [
        "k", "alpha_sq", "iterations", "eta2", "eta2_simulated", "eta2_abs_diff",
        "bqs_success", "bqs_success_simulated", "bqs_success_abs_diff", "fidelity_to_fock_k",
    ]
    return header, _pool_map(_bqs_row, jobs, args.jobs)


def cmd_fock_gen(args):
    ks = parse_int_list(args.k or "1,2,3,4,5,6,7,8,9,10")
    if any(k < 1 for k in ks):
        raise InvalidInput("k must be >= 1")
    header = ["k", "alpha_sq_opt", "eta3_analytic", "eta3_simulated", "abs_diff", "fidelity"]
    return header, _pool_map(_fock_row, ks, args.jobs)


def cmd_w_dist(args):
    if args.input == "coherent" and args.alpha_sq is None:
        args.alpha_sq = 5.0
    spec = input_from_args(args)
    iterations = args.iterations or 10
    if iterations < 3:
        raise InvalidInput("W generation needs >= 3 iterations")
    cfg = ProtocolConfig(iterations, args.n_max)
    resolved = cfg.resolve(spec)
    c, _ = resolved.coefficients()
    final = run_protocol(spec, cfg)
    by_M = {
        M: (herald_w_state(spec, cfg, M, final).probability, w_probability(c, M, iterations))
        for M in range(3, resolved.n_max + 2)
    }
    if args.by_herald:
        table = by_M
    else:
        # W size min(M, iterations): all M >= iterations pool into the largest W.
        table = {}
        for M, (sim, ana) in by_M.items():
            size = min(M, iterations)
            s0, a0 = table.get(size, (0.0, 0.0))
            table[size] = (s0 + sim, a0 + ana)
    header = ["M", "probability", "cumulative", "probability_analytic", "abs_diff"]
    rows, cum, cum_a = [], 0.0, 0.0
    for M, (sim, ana) in sorted(table.items()):
        cum += sim
        cum_a += ana
        rows.append([M, sim, cum, ana, abs(sim - ana)])
    rows.append(["total", cum, cum, cum_a, abs(cum - cum_a)])
    return header, rows


def cmd_loss_scan(args):
    grid = parse_grid(args.grid or "0:0.1:0.01")
    if any(not 0 <= L < 1 for L in grid):
        raise InvalidInput("loss values must lie in [0, 1)")
    if args.input == "coherent" and args.alpha_sq is None:
        args.alpha_sq = 0.02
    spec = input_from_args(args)
    iterations = args.iterations or 3
    k = int(args.k) if args.k else iterations
    cfg = ProtocolConfig(iterations, args.n_max)
    exponent = args.power_law_exponent if args.power_law_exponent is not None else k * (k - 1)
    jobs = [
        (L, spec, cfg, k, exponent, args.max_loss_events, args.loss_mode, args.max_branches)
        for L in grid
    ]
    header = ["L", "herald_prob", "fidelity", "power_law_prediction", "rel_err"]
    return header, _pool_map(_loss_row, jobs, args.jobs)


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep-eta1": cmd_sweep_eta1,
    "sweep-bqs": cmd_sweep_bqs,
    "fock-gen": cmd_fock_gen,
    "w-dist": cmd_w_dist,
    "loss-scan": cmd_loss_scan,
}


def render_csv(header, rows, timestamp: bool) -> str:
    buf = io.StringIO()
    if timestamp:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        buf.write(f"# generated {stamp}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags win")
    common.add_argument("--input", choices=["coherent", "fock", "custom"], default="coherent")
    common.add_argument("--alpha-sq", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--coeffs", help="comma-separated C_0..C_n, complex allowed (e.g. 0.6,0.8j)")
    common.add_argument("--iterations", type=int)
    common.add_argument("--k", help="order / Fock index; comma list for sweeps")
    common.add_argument("--n-max", type=int)
    common.add_argument("--loss", type=float, help="single loss value (loss-scan shorthand)")
    common.add_argument("--grid", help="start:stop:step or comma list")
    common.add_argument("--out", help="output CSV path (default stdout)")
    common.add_argument("--no-header-timestamp", action="store_true")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--seed", type=int, help="reserved; exact enumeration ignores it")

    parser = argparse.ArgumentParser(prog="bqsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="final joint state")
    p.add_argument("--herald", help="v:K, allh, exact:STR, bell:K or w:M")
    sub.add_parser("sweep-eta1", parents=[common], help="inverse annihilation efficiency")
    sub.add_parser("sweep-bqs", parents=[common], help="k-th order scissors efficiency")
    sub.add_parser("fock-gen", parents=[common], help="Bell-heralded Fock states")
    p = sub.add_parser("w-dist", parents=[common], help="W state success distribution")
    p.add_argument("--by-herald", action="store_true", help="one row per detected M")
    p = sub.add_parser("loss-scan", parents=[common], help="heralded fidelity under loss")
    p.add_argument("--max-loss-events", type=int, default=3)
    p.add_argument("--loss-mode", choices=["per_pass", "per_event"], default="per_pass")
    p.add_argument("--max-branches", type=int, default=200_000)
    p.add_argument("--power-law-exponent", type=float)
    return parser


def read_config(path: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidInput(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        # Re-parse with file values as defaults so explicit flags still win.
        file_values = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in file_values.items():
            if key not in known:
                raise InvalidInput(f"unknown config key {key!r}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = action.type(value) if action.type else value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.loss is not None and args.grid is None and args.command == "loss-scan":
        args.grid = str(args.loss)
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        header, rows = HANDLERS[args.command](args)
        text = render_csv(header, rows, timestamp=not args.no_header_timestamp)
    except ResourceLimit as exc:
        print(f"bqsim: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvalidInput, ContractViolation, BQSError) as exc:
        print(f"bqsim: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"bqsim: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if args.out:
            Path(args.out).write_text(text, newline="")
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"bqsim: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
