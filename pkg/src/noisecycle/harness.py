"""Monte-Carlo BLER experiments: config, trial execution, accounting, output.

An experiment sweeps an Eb/N0 grid.  For every point it runs independent
trials: draw messages, encode, modulate, draw one Gauss-Markov noise matrix,
decode under the configured scheme, and count block errors per channel (a
correct later-channel decode counts as correct even when the lead erred).

Determinism contract: the per-trial random stream depends only on
(master seed, sigma-group index, point index, trial index), accumulators are
integer sums, and reduction walks chunks in index order — so results are
byte-identical no matter how many worker processes run the chunks.

Rate convention: the x-axis Eb/N0 fixes sigma through EACH channel's own
rate.  With heterogeneous rates the grid point therefore maps to a different
sigma per rate group; the experiment is run once per group and a channel's
results are recorded only in its own group's pass.  Setting ``sigma_rate``
forces one common sigma computed from that rate instead.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist

import numpy as np

from .channel import GmParams, NoiseMatrix, bpsk_modulate, ebn0_to_sigma, \
    gm_noise_sample, transmit
from .codes import CRC8, CRC11, LinearCode, ca_polar_code, rlc
from .grand import DECODERS
from .recycling import decode_independent, decode_predetermined, decode_racing

SCHEMES = ("independent", "predetermined", "racing")


class ConfigError(ValueError):
    pass


def _point_key(ebn0_db: float) -> int:
    """Non-negative per-point seed component: milli-dB with a fixed offset."""
    return 10**6 + int(round(ebn0_db * 1000))


# ---------------------------------------------------------------------------
# Configuration


@dataclass
class ExperimentConfig:
    scheme: str
    m: int
    rho: float
    channels: list            # one normalized spec dict per channel
    ebn0_db: list
    trials: list              # per grid point
    seed: int = 0
    decoder: str = "sgrandab"
    race_decoder: str | None = None
    lag_decoder: str | None = None
    budget: int = 10**6
    stop_errors: int = 0      # 0 disables early stopping
    min_trials: int = 0
    chunk: int = 500
    zero_noise: bool = False
    sigma_rate: float | None = None
    rho_decoder: float | None = None   # mismatched-rho knob; None = true rho
    out: str | None = None

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; pick from {SCHEMES}")
        if self.m < 1:
            raise ConfigError(f"m must be >= 1, got {self.m}")
        if not abs(self.rho) < 1:
            raise ConfigError(f"|rho| must be < 1, got {self.rho}")
        if len(self.channels) != self.m:
            raise ConfigError(
                f"{len(self.channels)} channel blocks for m={self.m} channels")
        if not self.ebn0_db:
            raise ConfigError("ebn0_db grid is empty")
        keys = [_point_key(db) for db in self.ebn0_db]
        if len(set(keys)) != len(keys):
            raise ConfigError("ebn0_db grid points must be distinct (to 0.001 dB)")
        if len(self.trials) != len(self.ebn0_db):
            raise ConfigError(
                f"{len(self.trials)} trial counts for {len(self.ebn0_db)} grid points")
        if any(t < 1 for t in self.trials):
            raise ConfigError("every trial count must be >= 1")
        if self.budget < 0:
            raise ConfigError(f"budget must be >= 0, got {self.budget}")
        if self.chunk < 1:
            raise ConfigError(f"chunk must be >= 1, got {self.chunk}")
        for name in filter(None, [self.decoder, self.race_decoder, self.lag_decoder]):
            if name not in DECODERS:
                raise ConfigError(
                    f"unknown decoder {name!r}; pick from {sorted(DECODERS)}")
        ns = set()
        for i, spec in enumerate(self.channels):
            self._validate_channel(i, spec)
            ns.add(spec["n"])
        if len(ns) != 1:
            raise ConfigError(
                f"all channels must share one block length, got {sorted(ns)}")
        if self.scheme == "racing":
            first = self.channels[0]
            if any(spec != first for spec in self.channels[1:]):
                raise ConfigError("racing requires identical code specs on all channels")
        if self.rho_decoder is not None and not abs(self.rho_decoder) < 1:
            raise ConfigError(f"|rho_decoder| must be < 1, got {self.rho_decoder}")
        if self.sigma_rate is not None and not 0 < self.sigma_rate <= 1:
            raise ConfigError(f"sigma_rate must be in (0,1], got {self.sigma_rate}")

    def _validate_channel(self, i: int, spec: dict) -> None:
        fam = spec.get("family")
        if fam not in ("rlc", "capolar"):
            raise ConfigError(
                f"channel {i + 1}: family must be rlc or capolar, got {fam!r}")
        n, k = spec.get("n"), spec.get("k")
        if not isinstance(n, int) or not isinstance(k, int) or not 0 < k < n:
            raise ConfigError(f"channel {i + 1}: need integers 0 < k < n, got n={n} k={k}")
        if fam == "capolar":
            if n & (n - 1):
                raise ConfigError(f"channel {i + 1}: capolar n must be a power of two")
            if spec.get("crc_degree") not in (None, 8, 11):
                raise ConfigError(f"channel {i + 1}: crc_degree must be 8 or 11")
            dec = spec.get("decoder")
        else:
            dec = spec.get("decoder")
        if dec is not None and dec not in DECODERS:
            raise ConfigError(f"channel {i + 1}: unknown decoder {dec!r}")


_TOP_KEYS = {
    "scheme": str, "m": int, "rho": float, "decoder": str,
    "race_decoder": str, "lag_decoder": str, "budget": int,
    "ebn0_db": "float_list", "trials": "int_list", "seed": int,
    "stop_errors": int, "min_trials": int, "chunk": int,
    "zero_noise": "bool", "sigma_rate": float, "rho_decoder": float,
    "out": str,
}
_CHANNEL_KEYS = {
    "family": str, "n": int, "k": int, "crc_degree": int,
    "code_seed": int, "design_ebn0_db": float, "decoder": str,
}


def _parse_value(key: str, raw: str, kind):
    try:
        if kind is str:
            return raw
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind == "float_list":
            return [float(v) for v in raw.split(",") if v.strip() != ""]
        if kind == "int_list":
            return [int(v) for v in raw.split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    raise ConfigError(f"unhandled kind for {key}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat key/value experiment format.

    Lines are ``key = value``; ``#`` starts a comment; a ``[channel]`` line
    opens the next channel block.  Unknown keys are errors.  A single channel
    block is replicated across all m channels.
    """
    top: dict = {}
    blocks: list[dict] = []
    current: dict | None = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[channel]":
            current = {}
            blocks.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        table = _CHANNEL_KEYS if current is not None else _TOP_KEYS
        if key not in table:
            where = "channel block" if current is not None else "top level"
            raise ConfigError(f"line {lineno}: unknown {where} key {key!r}")
        target = current if current is not None else top
        if raw == "":
            continue
        target[key] = _parse_value(key, raw, table[key])

    for req in ("scheme", "m", "rho", "ebn0_db"):
        if req not in top:
            raise ConfigError(f"missing required key {req}")
    if not blocks:
        raise ConfigError("at least one [channel] block is required")
    m = top["m"]
    if len(blocks) == 1 and m > 1:
        blocks = [dict(blocks[0]) for _ in range(m)]
    trials = top.pop("trials", [1000])
    grid = top["ebn0_db"]
    if len(trials) == 1:
        trials = trials * len(grid)
    cfg = ExperimentConfig(channels=blocks, trials=trials, **top)
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# Code construction (cached per process; workers rebuild deterministically)


def _canon_channel(spec: dict, ebn0_grid: tuple, index: int) -> tuple:
    fam = spec["family"]
    n, k = spec["n"], spec["k"]
    if fam == "rlc":
        return ("rlc", n, k, spec.get("code_seed", index))
    design = spec.get("design_ebn0_db")
    if design is None:
        design = (min(ebn0_grid) + max(ebn0_grid)) / 2.0
    degree = spec.get("crc_degree") or (8 if n <= 128 else 11)
    return ("capolar", n, k, degree, float(design))


@lru_cache(maxsize=64)
def _build_code(key: tuple) -> LinearCode:
    fam = key[0]
    if fam == "rlc":
        _, n, k, seed = key
        return rlc(n, k, np.random.default_rng(seed))
    _, n, k, degree, design = key
    sigma_design = ebn0_to_sigma(design, k / n)
    code = ca_polar_code(n, k, sigma_design)
    want = CRC8 if degree == 8 else CRC11
    if code.spec.crc.poly != want.poly:
        raise ConfigError(
            f"capolar [{n},{k}] uses the degree-{code.spec.crc.degree} CRC; "
            f"crc_degree={degree} not available at this block length")
    return code


def build_codes(cfg: ExperimentConfig) -> list[LinearCode]:
    grid = tuple(cfg.ebn0_db)
    # Racing needs one codebook for every lane, so the per-channel seed
    # default collapses to channel 0's.
    return [_build_code(_canon_channel(spec, grid, 0 if cfg.scheme == "racing" else i))
            for i, spec in enumerate(cfg.channels)]


def _sigma_groups(cfg: ExperimentConfig) -> list[tuple[float, list[int]]]:
    """(rate, channel indices) groups that share one sigma per grid point."""
    if cfg.sigma_rate is not None:
        return [(cfg.sigma_rate, list(range(cfg.m)))]
    groups: dict[float, list[int]] = {}
    for i, spec in enumerate(cfg.channels):
        groups.setdefault(spec["k"] / spec["n"], []).append(i)
    return sorted(groups.items())


# ---------------------------------------------------------------------------
# Trial execution


def _run_chunk(cfg: ExperimentConfig, group_idx: int, point_idx: int,
               start: int, count: int) -> dict:
    """Run trials [start, start+count) of one (group, point); return integer
    accumulators {label: [errors, queries_sum, abandoned, outcomes]}."""
    codes = build_codes(cfg)
    n = codes[0].n
    m = cfg.m
    rate, _ = _sigma_groups(cfg)[group_idx]
    sigma = ebn0_to_sigma(cfg.ebn0_db[point_idx], rate)
    params = GmParams(m=m, n=n, rho=cfg.rho, sigma=sigma)
    rho_dec = cfg.rho if cfg.rho_decoder is None else cfg.rho_decoder
    budget = cfg.budget
    decoders = [DECODERS[spec.get("decoder") or cfg.decoder]
                for spec in cfg.channels]
    race = DECODERS[cfg.race_decoder or cfg.decoder]
    lag = DECODERS[cfg.lag_decoder or cfg.decoder]

    acc: dict = {}

    def add(label: str, err: bool, queries: int, abandoned: bool):
        a = acc.setdefault(label, [0, 0, 0, 0])
        a[0] += err
        a[1] += queries
        a[2] += abandoned
        a[3] += 1

    # Key the stream by the Eb/N0 value itself (milli-dB), not the grid
    # index, so two runs sharing a point see identical noise even when
    # their grids differ.
    point_key = _point_key(cfg.ebn0_db[point_idx])
    for t in range(start, start + count):
        ss = np.random.SeedSequence(entropy=cfg.seed,
                                    spawn_key=(group_idx, point_key, t))
        rng = np.random.default_rng(ss)
        sent = np.empty((m, n))
        for i, code in enumerate(codes):
            msg = rng.integers(0, 2, size=code.k, dtype=np.uint8)
            sent[i] = bpsk_modulate(code.encode(msg))
        if cfg.zero_noise:
            noise = NoiseMatrix(z=np.zeros((m, n)), xi=np.zeros((m, n)))
        else:
            noise = gm_noise_sample(params, rng)
        bundle = transmit(params, sent, noise)

        if cfg.scheme == "independent":
            res = decode_independent(bundle, codes, decoders, budget)
        elif cfg.scheme == "predetermined":
            res = decode_predetermined(bundle, codes, decoders, rho_dec, budget)
        else:
            res = decode_racing(bundle, codes[0], race, lag, rho_dec, budget)

        for i, out in enumerate(res.outcomes):
            err = not res.correct[i]
            add(str(i + 1), err, out.queries, out.abandoned)
            add("avg", err, out.queries, out.abandoned)
            if cfg.scheme == "racing" and res.winner is not None:
                role = "winner" if i == res.winner else "lagger"
                add(role, err, out.queries, out.abandoned)
    return acc


def _merge(total: dict, part: dict) -> None:
    for label, vals in part.items():
        a = total.setdefault(label, [0, 0, 0, 0])
        for i in range(4):
            a[i] += vals[i]


# ---------------------------------------------------------------------------
# Statistics


_Z95 = NormalDist().inv_cdf(0.975)


def wilson_interval(errors: int, trials: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= errors <= trials:
        raise ValueError(f"need 0 <= errors <= trials, got {errors}/{trials}")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must be in (0,1), got {confidence}")
    z = NormalDist().inv_cdf(0.5 + confidence / 2) if confidence != 0.95 else _Z95
    p = errors / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return (lo, hi)


@dataclass
class BlerPoint:
    ebn0_db: float
    channel: str      # "1".."m", or a pooled label: "avg", "winner", "lagger"
    scheme: str
    trials: int
    errors: int
    bler: float
    ci_low: float
    ci_high: float
    mean_queries: float
    abandoned: int


def _channel_sort_key(label: str):
    return (0, int(label), "") if label.isdigit() else (1, 0, label)


# ---------------------------------------------------------------------------
# Experiment driver


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[BlerPoint]:
    cfg.validate()
    groups = _sigma_groups(cfg)
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else None
    points: list[BlerPoint] = []
    try:
        for group_idx, (rate, members) in enumerate(groups):
            for point_idx in range(len(cfg.ebn0_db)):
                total = _run_point(cfg, group_idx, point_idx, pool)
                points.extend(
                    _points_from_totals(cfg, groups, group_idx, point_idx, total))
    finally:
        if pool is not None:
            pool.shutdown()
    points.sort(key=lambda p: (p.scheme, _channel_sort_key(p.channel), p.ebn0_db))
    return points


def _chunks(trials: int, chunk: int):
    return [(s, min(chunk, trials - s)) for s in range(0, trials, chunk)]


def _should_stop(cfg: ExperimentConfig, total: dict, trials_done: int) -> bool:
    if cfg.stop_errors <= 0:
        return False
    if trials_done < max(cfg.min_trials, 1):
        return False
    per_channel = [total.get(str(i + 1), [0])[0] for i in range(cfg.m)]
    return min(per_channel) >= cfg.stop_errors


def _run_point(cfg: ExperimentConfig, group_idx: int, point_idx: int, pool) -> dict:
    trials = cfg.trials[point_idx]
    parts = _chunks(trials, cfg.chunk)
    total: dict = {}
    done = 0
    if pool is None:
        for start, count in parts:
            _merge(total, _run_chunk(cfg, group_idx, point_idx, start, count))
            done += count
            if _should_stop(cfg, total, done):
                break
    else:
        futures = [pool.submit(_run_chunk, cfg, group_idx, point_idx, s, c)
                   for s, c in parts]
        for fut, (start, count) in zip(futures, parts):
            _merge(total, fut.result())
            done += count
            if _should_stop(cfg, total, done):
                for rest in futures:
                    rest.cancel()
                break
    return total


def _points_from_totals(cfg, groups, group_idx, point_idx, total) -> list[BlerPoint]:
    rate, members = groups[group_idx]
    labels = [str(i + 1) for i in members]
    if len(groups) == 1:
        labels.append("avg")
        if cfg.scheme == "racing":
            labels.extend(["winner", "lagger"])
    out = []
    for label in labels:
        vals = total.get(label)
        if vals is None:      # e.g. every race abandoned: no winner rows
            continue
        errors, queries, abandoned, count = vals
        low, high = wilson_interval(errors, count)
        out.append(BlerPoint(
            ebn0_db=cfg.ebn0_db[point_idx], channel=label, scheme=cfg.scheme,
            trials=count, errors=errors, bler=errors / count,
            ci_low=low, ci_high=high, mean_queries=queries / count,
            abandoned=abandoned))
    return out


# ---------------------------------------------------------------------------
# Output


CSV_HEADER = "ebn0_db,channel,scheme,trials,errors,bler,ci_low,ci_high,mean_queries,abandoned"


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def emit_results(points: list, out_dir: str, config_text: str | None = None,
                 derived: dict | None = None) -> str:
    """Write results.csv, one .dat series per (scheme, channel), and a config
    snapshot; returns the CSV path."""
    if not points:
        raise ValueError("no result points to emit")
    os.makedirs(out_dir, exist_ok=True)
    rows = sorted(points,
                  key=lambda p: (p.scheme, _channel_sort_key(p.channel), p.ebn0_db))
    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.writer(fh)
        for p in rows:
            w.writerow([_fmt(p.ebn0_db), p.channel, p.scheme, p.trials, p.errors,
                        _fmt(p.bler), _fmt(p.ci_low), _fmt(p.ci_high),
                        _fmt(p.mean_queries), p.abandoned])
    series: dict = {}
    for p in rows:
        series.setdefault((p.scheme, p.channel), []).append(p)
    for (scheme, channel), ps in series.items():
        path = os.path.join(out_dir, f"series_{scheme}_{channel}.dat")
        with open(path, "w") as fh:
            fh.write("# ebn0_db bler ci_low ci_high\n")
            for p in ps:
                fh.write(f"{_fmt(p.ebn0_db)} {_fmt(p.bler)} "
                         f"{_fmt(p.ci_low)} {_fmt(p.ci_high)}\n")
    snap_path = os.path.join(out_dir, "config_snapshot.txt")
    with open(snap_path, "w") as fh:
        if config_text is not None:
            fh.write(config_text.rstrip("\n") + "\n")
        if derived:
            fh.write("\n# derived\n")
            for key in sorted(derived):
                fh.write(f"# {key} = {derived[key]}\n")
    return csv_path


def derived_info(cfg: ExperimentConfig) -> dict:
    """Reproducibility extras for the config snapshot: per-channel code
    identity (including any derived info set) and the master seed."""
    info: dict = {"seed": cfg.seed}
    grid = tuple(cfg.ebn0_db)
    for i, spec in enumerate(cfg.channels):
        key = _canon_channel(spec, grid, 0 if cfg.scheme == "racing" else i)
        info[f"channel{i + 1}"] = key
        if key[0] == "capolar":
            code = _build_code(key)
            info[f"channel{i + 1}_info_set"] = ",".join(
                str(v) for v in code.spec.info_set)
    return info


def bler_curve(points: list, scheme: str, channel: str) -> list:
    """[(ebn0_db, bler), ...] sorted by Eb/N0 for one scheme/channel series."""
    ps = [p for p in points if p.scheme == scheme and p.channel == channel]
    return [(p.ebn0_db, p.bler) for p in sorted(ps, key=lambda p: p.ebn0_db)]


def crossing_db(curve: list, target: float) -> float | None:
    """Eb/N0 where a BLER curve crosses ``target``, by log-linear
    interpolation between adjacent grid points; None if it never does."""
    floor = 1e-300
    lt = math.log10(target)
    for (d0, b0), (d1, b1) in zip(curve, curve[1:]):
        if b0 >= target >= b1 and b0 > b1:
            l0, l1 = math.log10(max(b0, floor)), math.log10(max(b1, floor))
            return d0 + (lt - l0) * (d1 - d0) / (l1 - l0)
    return None


def horizontal_gain(baseline: list, improved: list, target: float) -> float | None:
    """How many dB less Eb/N0 the improved curve needs to reach ``target``."""
    b = crossing_db(baseline, target)
    i = crossing_db(improved, target)
    if b is None or i is None:
        return None
    return b - i
