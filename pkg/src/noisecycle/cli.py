"""Command-line front end: BLER experiments, rate-region tables, self-test.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
import tempfile

import numpy as np

from . import harness, rate_region
from .harness import ConfigError


def _cmd_bler(args) -> int:
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = harness.parse_config(text)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.trials is not None:
            cfg.trials = [args.trials] * len(cfg.ebn0_db)
        if args.out is not None:
            cfg.out = args.out
        if cfg.out is None:
            raise ConfigError("no output directory: set out= in the config or pass --out")
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    points = harness.run_experiment(cfg, threads=args.threads)
    path = harness.emit_results(points, cfg.out, config_text=text,
                                derived=harness.derived_info(cfg))
    print(f"wrote {len(points)} result rows to {path}")
    return 0


def _cmd_rate_region(args) -> int:
    try:
        snr_db = [float(v) for v in args.snr_db.split(",") if v.strip()]
        rhos = [float(v) for v in args.rho.split(",") if v.strip()]
        ms = [int(v) for v in args.m.split(",") if v.strip()]
        snrs = [10 ** (db / 10) for db in snr_db]
        points = rate_region.region_table(snrs, rhos, ms)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    rate_region.write_region_csv(points, args.out)
    print(f"wrote {len(points)} rate points to {args.out}")
    return 0


def _cmd_selftest(_args) -> int:
    failures = 0

    def check(name: str, ok: bool, detail: str = ""):
        nonlocal failures
        tag = "ok" if ok else "FAIL"
        print(f"{tag}: {name}" + (f" ({detail})" if detail else ""))
        failures += not ok

    from .channel import GmParams, gm_noise_sample
    from .codes import rlc
    from .grand import DECODERS, correlation_metric, ml_oracle, sgrandab
    from .recycling import recycle

    # rate-region invariants on a small grid
    pts = rate_region.region_table(
        [10 ** (db / 10) for db in (-5, 0, 5, 10, 15)],
        [0.0, 0.3, 0.6, 0.9], [1, 2, 4, 8])
    ok = all(p.c2 >= p.c1 and p.c1 <= p.avg <= p.c2 + 1e-15 for p in pts)
    check("rate-region invariants", ok)

    # GM correlation at rho=0.8
    rng = np.random.default_rng(7)
    params = GmParams(m=4, n=4096, rho=0.8, sigma=1.0)
    rows = [gm_noise_sample(params, rng).z for _ in range(16)]
    z = np.concatenate(rows, axis=1)
    corr = float(np.corrcoef(z[0], z[1])[0, 1])
    check("gm lag-1 correlation", abs(corr - 0.8) < 0.05, f"corr={corr:.3f}")

    # exact recycling identity whenever the lead decodes correctly
    code = rlc(32, 16, np.random.default_rng(3))
    dec = DECODERS["sgrandab"]
    hits = trials = 0
    for t in range(200):
        trng = np.random.default_rng((9, t))
        msgs = [trng.integers(0, 2, 16, dtype=np.uint8) for _ in range(2)]
        from .channel import bpsk_modulate, transmit
        sent = np.stack([bpsk_modulate(code.encode(u)) for u in msgs])
        p2 = GmParams(m=2, n=32, rho=0.8, sigma=0.5)
        noise = gm_noise_sample(p2, trng)
        bundle = transmit(p2, sent, noise)
        out = dec(code, bundle.received[0], 10**5)
        if out.codeword is None or not np.array_equal(
                bpsk_modulate(out.codeword), sent[0]):
            continue
        trials += 1
        z_hat = bundle.received[0] - sent[0]
        resid = recycle(bundle.received[1], z_hat, 0.8) - sent[1]
        hits += np.array_equal(resid, noise.xi[1])
    check("exact innovation recovery", trials > 0 and hits == trials,
          f"{hits}/{trials}")

    # sgrandab matches the exhaustive ML oracle
    code8 = rlc(8, 4, np.random.default_rng(5))
    agree = 0
    for t in range(200):
        trng = np.random.default_rng((11, t))
        cw = code8.encode(trng.integers(0, 2, 4, dtype=np.uint8))
        from .channel import bpsk_modulate as mod
        y = mod(cw) + trng.normal(0, 0.7, 8)
        got = sgrandab(code8, y, 2**10)
        ref = ml_oracle(code8, y)
        agree += (got.codeword is not None and
                  abs(correlation_metric(y, got.codeword) -
                      correlation_metric(y, ref)) < 1e-9)
    check("sgrandab is maximum-likelihood", agree == 200, f"{agree}/200")

    # byte-identical reruns
    cfg_text = """
scheme = racing
m = 2
rho = 0.5
decoder = sgrandab
budget = 10000
ebn0_db = 4
trials = 60
seed = 42
chunk = 16
[channel]
family = rlc
n = 32
k = 16
"""
    cfg = harness.parse_config(cfg_text)
    outputs = []
    for threads in (1, 2):
        pts2 = harness.run_experiment(cfg, threads=threads)
        with tempfile.TemporaryDirectory() as tmp:
            path = harness.emit_results(pts2, tmp)
            with open(path, "rb") as fh:
                outputs.append(fh.read())
    check("determinism across workers", outputs[0] == outputs[1])

    return 0 if failures == 0 else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="noisecycle",
        description="Noise recycling over correlated channels: BLER experiments "
                    "and achievable-rate tables.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bler", help="run a Monte-Carlo BLER experiment")
    b.add_argument("--config", required=True, help="experiment config file")
    b.add_argument("--seed", type=int, help="override the master seed")
    b.add_argument("--trials", type=int, help="override trials at every grid point")
    b.add_argument("--out", help="output directory (overrides config)")
    b.add_argument("--threads", type=int, default=1, help="worker processes")
    b.set_defaults(func=_cmd_bler)

    r = sub.add_parser("rate-region", help="emit the achievable-rate table")
    r.add_argument("--snr-db", default="-5,0,5,10,15,20", help="comma list, dB")
    r.add_argument("--rho", default="0,0.25,0.5,0.75,0.9", help="comma list")
    r.add_argument("--m", default="1,2,4,8", help="comma list of channel counts")
    r.add_argument("--out", default="rate_region.csv")
    r.set_defaults(func=_cmd_rate_region)

    s = sub.add_parser("selftest", help="run the built-in invariant checks")
    s.set_defaults(func=_cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
