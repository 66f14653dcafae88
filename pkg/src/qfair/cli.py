"""Command-line surface.

Subcommands:
  lipschitz   — compute K*, kernel, spreads for a model
  verify      — decide (ε,δ)-fairness; exit 0 fair, 1 unfair
  bias-pairs  — generate bias pairs from a stored report's kernel
  bench       — scalability sweep over qubits x noise x probability
  encode      — CSV → encoded product-state file

Exit codes: 0 success/fair, 1 unfair, 2 malformed input or flags,
3 solver non-convergence (the report is still written).
"""

import argparse
import csv as csv_mod
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import encode as encode_mod
from . import fairness, model_io, report as report_mod
from .channel import GLOBAL_DEPOLARIZING, NOISE_NAMES
from .lipschitz_dense import TimeoutExceeded, lipschitz
from .lipschitz_tn import PowerIterationConfig, lipschitz_tn
from .model import DecisionModel, append_noise, build_qcnn, build_rotation_entangling

EXIT_OK = 0
EXIT_UNFAIR = 1
EXIT_BAD_INPUT = 2
EXIT_NO_CONVERGENCE = 3


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_BAD_INPUT


def _parse_noise(spec: str):
    if spec in (None, "", "none"):
        return None
    name, _, prob = spec.partition(":")
    if not prob:
        raise ValueError(f"noise spec {spec!r} must look like name:probability")
    if name not in NOISE_NAMES and name != GLOBAL_DEPOLARIZING:
        raise ValueError(f"unknown noise {name!r}")
    return name, float(prob)


def _add_model_args(p: argparse.ArgumentParser) -> None:
    src = p.add_argument_group("model source")
    src.add_argument("--model", help="model spec JSON file")
    src.add_argument("--build", choices=["qcnn", "rotation"], help="builder architecture")
    src.add_argument("--qubits", type=int, help="builder qubit count")
    src.add_argument("--seed", type=int, help="builder parameter seed")
    src.add_argument("--noise", default="none", help="builder noise, name:probability")
    src.add_argument("--rotation-blocks", type=int, default=3)
    src.add_argument("--entangling-blocks", type=int, default=2)
    src.add_argument("--append-noise", default=None,
                     help="noise appended at the end of the circuit, name:probability")
    src.add_argument("--save-model", default=None, help="write the model spec to this path")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    s = p.add_argument_group("solver")
    s.add_argument("--backend", choices=["dense", "tn"], default="dense")
    s.add_argument("--tolerance", type=float, default=None)
    s.add_argument("--max-iters", type=int, default=None)
    s.add_argument("--solver-seed", type=int, default=None)
    s.add_argument("--timeout", type=float, default=None, help="wall-clock budget in seconds")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    o = p.add_argument_group("output")
    o.add_argument("--json", action="store_true", help="machine-parseable JSON on stdout")
    o.add_argument("--out", default=None, help="write the JSON report to this path")
    o.add_argument("--kernel-full", action="store_true",
                   help="serialize full kernel vectors instead of the top amplitudes")


def _resolve_model(args) -> DecisionModel:
    if args.model and args.build:
        raise ValueError("give either --model or --build, not both")
    if args.model:
        model = model_io.load_model(args.model)
    elif args.build:
        if args.qubits is None:
            raise ValueError("--build requires --qubits")
        noise = _parse_noise(args.noise)
        if args.build == "qcnn":
            model = build_qcnn(args.qubits, rng_seed=args.seed, noise=noise)
        else:
            model = build_rotation_entangling(
                args.qubits, args.rotation_blocks, args.entangling_blocks,
                rng_seed=args.seed, noise=noise,
            )
    else:
        raise ValueError("no model source: give --model FILE or --build ARCH")
    if args.append_noise:
        name, p = _parse_noise(args.append_noise)
        model = append_noise(model, name, p)
    if args.save_model:
        model_io.save_model(model, args.save_model)
    return model


def _resolve_cfg(args) -> PowerIterationConfig | None:
    given = [args.tolerance, args.max_iters, args.solver_seed]
    if all(v is None for v in given):
        return None
    return PowerIterationConfig(
        max_iters=args.max_iters if args.max_iters is not None else 10000,
        tolerance=args.tolerance if args.tolerance is not None else 1e-7,
        rng_seed=args.solver_seed if args.solver_seed is not None else 20,
    )


def _run_lipschitz(model: DecisionModel, args):
    deadline = time.monotonic() + args.timeout if args.timeout else None
    if args.backend == "dense":
        return lipschitz(model, deadline=deadline)
    return lipschitz_tn(model, cfg=_resolve_cfg(args), deadline=deadline)


def _emit_report(rep: report_mod.VerificationReport, args) -> None:
    cap = None if args.kernel_full else report_mod.KERNEL_AMPLITUDE_CAP
    if args.out:
        report_mod.save_report(rep, args.out, kernel_cap=cap)
    if args.json:
        json.dump(report_mod.report_to_dict(rep, kernel_cap=cap), sys.stdout, indent=1)
        print()
    else:
        print(f"model      {rep.model.name} ({rep.model.num_qubits} qubits)")
        print(f"backend    {rep.backend}")
        print(f"K*         {rep.k_star:.10f}")
        print(f"subset     {{{', '.join(rep.optimal_subset)}}}")
        print(f"degenerate {rep.degenerate}   converged {rep.converged}")
        print(f"wall_time  {rep.wall_time:.3f}s")
        if rep.verdict is not None:
            v = rep.verdict
            state = "FAIR" if v["fair"] else "UNFAIR"
            print(f"verdict    {state} (epsilon={v['epsilon']}, delta={v['delta']}, "
                  f"margin={v['witness_margin']:.3e})")


def cmd_lipschitz(args) -> int:
    try:
        model = _resolve_model(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    try:
        lrep = _run_lipschitz(model, args)
    except TimeoutExceeded:
        print("error: timed out before completing", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    rep = report_mod.from_lipschitz(model, lrep)
    _emit_report(rep, args)
    return EXIT_OK if lrep.converged else EXIT_NO_CONVERGENCE


def cmd_verify(args) -> int:
    try:
        model = _resolve_model(args)
        if not (0 < args.epsilon <= 1 and 0 < args.delta <= 1):
            raise ValueError("epsilon and delta must lie in (0, 1]")
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    try:
        lrep = _run_lipschitz(model, args)
    except TimeoutExceeded:
        print("error: timed out before completing", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    verdict = fairness.verdict_from_report(lrep, args.epsilon, args.delta)
    rep = report_mod.from_lipschitz(
        model, lrep,
        verdict={
            "epsilon": verdict.epsilon,
            "delta": verdict.delta,
            "fair": verdict.fair,
            "witness_margin": verdict.witness_margin,
        },
    )
    _emit_report(rep, args)
    if not lrep.converged:
        return EXIT_NO_CONVERGENCE
    return EXIT_OK if verdict.fair else EXIT_UNFAIR


def cmd_bias_pairs(args) -> int:
    try:
        rep = report_mod.load_report(args.report)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    if rep.verdict is not None and rep.verdict["fair"]:
        return _fail("report has a fair verdict: no bias kernel to expand")
    if rep.degenerate and rep.k_star <= 0:
        return _fail("report is degenerate (K* = 0): no bias pairs exist")
    if rep.kernel_truncated:
        print("warning: kernel was truncated at serialization; distances are approximate",
              file=sys.stderr)
    kernel = (rep.kernel_psi, rep.kernel_phi)
    source, _, seed_txt = args.sigma.partition(":")
    base_seed = int(seed_txt) if seed_txt else 0
    pairs = []
    for k in range(args.count):
        sigma = fairness.sigma_state(rep.model.num_qubits, source, seed=base_seed + k)
        pair = fairness.bias_pairs(kernel, sigma, args.epsilon, rep.model)
        pairs.append({
            "sigma": {"source": source, "seed": base_seed + k},
            "epsilon": args.epsilon,
            "input_distance": pair.input_distance,
            "output_distance": pair.output_distance,
        })
    payload = {"report": args.report, "k_star": rep.k_star, "pairs": pairs}
    text = json.dumps(payload, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def bench_cell_seed(master_seed: int, qubits: int, noise: str, prob: float, repeat: int) -> int:
    """Stable per-cell seed so any cell can be re-run in isolation."""
    key = f"{master_seed}|{qubits}|{noise}|{prob}|{repeat}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big") >> 1


def _bench_cell(cell) -> dict:
    arch, qubits, noise, prob, repeat, master_seed, timeout, tol, max_iters = cell
    seed = bench_cell_seed(master_seed, qubits, noise, prob, repeat)
    noise_spec = None if noise == "none" else (noise, prob)
    if arch == "qcnn":
        model = build_qcnn(qubits, rng_seed=seed, noise=noise_spec)
    else:
        model = build_rotation_entangling(qubits, rng_seed=seed, noise=noise_spec)
    cfg = PowerIterationConfig(max_iters=max_iters, tolerance=tol, rng_seed=seed & 0xFFFF)
    deadline = time.monotonic() + timeout if timeout else None
    t0 = time.perf_counter()
    try:
        rep = lipschitz_tn(model, cfg=cfg, deadline=deadline)
        k_star, status = f"{rep.k_star:.6f}", ("ok" if rep.converged else "stalled")
    except TimeoutExceeded:
        k_star, status = "TO", "TO"
    return {
        "qubits": qubits, "noise": noise, "prob": prob, "repeat": repeat,
        "seed": seed, "k_star": k_star, "time": f"{time.perf_counter() - t0:.3f}",
        "status": status,
    }


def cmd_bench(args) -> int:
    try:
        qubit_list = [int(x) for x in args.qubits.split(",")]
        noise_list = [x.strip() for x in args.noise.split(",")]
        prob_list = [float(x) for x in args.probs.split(",")]
        for nm in noise_list:
            if nm != "none" and nm not in NOISE_NAMES and nm != GLOBAL_DEPOLARIZING:
                raise ValueError(f"unknown noise {nm!r}")
    except ValueError as exc:
        return _fail(str(exc))
    cells = [
        (args.arch, q, nm, p, r, args.seed, args.timeout,
         args.tolerance if args.tolerance is not None else 1e-7,
         args.max_iters if args.max_iters is not None else 10000)
        for q in qubit_list
        for nm in noise_list
        for p in (prob_list if nm != "none" else [0.0])
        for r in range(args.repeats)
    ]
    fields = ["qubits", "noise", "prob", "repeat", "seed", "k_star", "time", "status"]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(_bench_cell, cells))
    else:
        rows = [_bench_cell(c) for c in cells]
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv_mod.DictWriter(out, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_encode(args) -> int:
    try:
        cat_map = encode_mod.load_sidecar(args.sidecar) if args.sidecar else None
        dataset = encode_mod.load_csv(args.csv, label_column=args.label_column,
                                      categorical_map=cat_map)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    states = np.stack([encode_mod.feature_map(row).amplitudes for row in dataset.rows])
    meta = {
        "columns": list(dataset.column_names),
        "column_max": dataset.column_max,
        "categorical_map": dataset.categorical_maps,
        "num_qubits": dataset.num_features,
    }
    labels = np.array(dataset.labels) if dataset.labels is not None else np.array([])
    np.savez(args.out, states=states, labels=labels, meta=json.dumps(meta))
    if args.emit_sidecar:
        encode_mod.save_sidecar(dataset, args.emit_sidecar)
    print(f"encoded {len(dataset.rows)} rows on {dataset.num_features} qubits -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfair",
                                     description="Fairness verification for noisy "
                                                 "quantum decision models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lipschitz", help="compute the Lipschitz constant and kernel")
    _add_model_args(p)
    _add_solver_args(p)
    _add_output_args(p)
    p.set_defaults(fn=cmd_lipschitz)

    p = sub.add_parser("verify", help="decide (epsilon,delta)-fairness")
    _add_model_args(p)
    _add_solver_args(p)
    _add_output_args(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bias-pairs", help="expand a report's kernel into bias pairs")
    p.add_argument("report")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--sigma", default="maximally-mixed",
                   help="maximally-mixed | pure:SEED | random-mixed:SEED")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_bias_pairs)

    p = sub.add_parser("bench", help="scalability sweep (tensor-network backend)")
    p.add_argument("--qubits", required=True, help="comma-separated sizes")
    p.add_argument("--noise", default="none", help="comma-separated noise names")
    p.add_argument("--probs", default="1e-4,1e-3,1e-2", help="comma-separated probabilities")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--arch", choices=["qcnn", "rotation"], default="qcnn")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--timeout", type=float, default=3600.0, help="per-cell budget, seconds")
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("encode", help="encode a CSV into product states")
    p.add_argument("csv")
    p.add_argument("--label-column", default=None)
    p.add_argument("--sidecar", default=None, help="JSON with categorical maps")
    p.add_argument("--emit-sidecar", default=None, help="write maps/maxima to this path")
    p.add_argument("--out", required=True, help=".npz output path")
    p.set_defaults(fn=cmd_encode)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
