"""Command-line entry point: simulate | sweep-bins | coded-ber | mi.

A single JSON config file holds the run parameters; command-line flags
override config values.  All randomness flows from one root seed and every
run writes its parameter snapshot (seed included) next to the data, so runs
are reproducible byte for byte.

Exit codes: 0 success, 2 config error, 3 I/O error, 4 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import channel as ch
from . import info, ldpc, link, reports

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4

DEFAULT_CROSSOVERS = (0.001, 0.01, 0.02, 0.05, 0.1, 0.2, 0.45)


class ConfigError(ValueError):
    pass


def _default_losses() -> dict:
    return {name: frac for name, frac in info.DEFAULT_LOSS_CHAIN.losses}


@dataclass
class RunConfig:
    detector_width: int = ch.DEFAULT_DETECTOR_WIDTH
    detector_height: int = ch.DEFAULT_DETECTOR_HEIGHT
    bin_size: int = ch.DEFAULT_BIN_SIZE
    fwhm_x: float = ch.DEFAULT_FWHM
    fwhm_y: float = ch.DEFAULT_FWHM
    pointing_offset_x: float = 0.0
    pointing_offset_y: float = 0.0
    signal_to_dark_ratio: float = ch.DEFAULT_SIGNAL_TO_DARK_RATIO
    ratio_low: float = 10.0
    ratio_high: float = 100.0
    events_per_symbol: int = link.DEFAULT_EVENTS_PER_SYMBOL
    losses: dict = field(default_factory=_default_losses)
    seed: int = 0
    decoder_algorithm: str = "min-sum"
    decoder_normalization: float = 0.75
    decoder_max_iterations: int = 50
    bins: list = field(default_factory=lambda: list(link.DEFAULT_SWEEP_BINS))
    crossovers: list = field(default_factory=lambda: list(DEFAULT_CROSSOVERS))
    frames_per_point: int = 5
    workers: int = 1
    out_dir: str = "out"

    # Constructed on validate(); every module precondition is checked here,
    # before any run starts or any file is touched.
    def validate(self) -> "ValidatedConfig":
        try:
            grid = ch.grid_from_config(self.detector_width, self.detector_height, self.bin_size)
            psf = ch.PointSpread(self.fwhm_x, self.fwhm_y, self.pointing_offset_x, self.pointing_offset_y)
            noise = ch.NoiseModel(self.signal_to_dark_ratio)
            ch.NoiseModel(self.ratio_low)
            ch.NoiseModel(self.ratio_high)
            chain = info.LossChain.from_mapping(self.losses)
            decoder = ldpc.DecoderConfig(
                algorithm=self.decoder_algorithm,
                normalization=self.decoder_normalization,
                max_iterations=self.decoder_max_iterations,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.events_per_symbol < 1:
            raise ConfigError("events_per_symbol must be >= 1")
        if self.frames_per_point < 1:
            raise ConfigError("frames_per_point must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.bins:
            raise ConfigError("empty bin-size list")
        for b in self.bins:
            try:
                ch.grid_from_config(self.detector_width, self.detector_height, int(b))
            except ValueError as e:
                raise ConfigError(str(e)) from None
        if not self.crossovers:
            raise ConfigError("empty crossover list")
        for p in self.crossovers:
            if not 0.0 < float(p) < 0.5:
                raise ConfigError(f"crossover {p} outside (0, 0.5)")
        return ValidatedConfig(self, grid, psf, noise, chain, decoder)

    def snapshot(self) -> dict:
        # experiment description only; execution knobs (out_dir, workers) are
        # excluded so identical experiments produce byte-identical reports
        skip = {"out_dir", "workers"}
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in skip}


@dataclass
class ValidatedConfig:
    run: RunConfig
    grid: ch.GridSpec
    psf: ch.PointSpread
    noise: ch.NoiseModel
    chain: info.LossChain
    decoder: ldpc.DecoderConfig


def load_config(path: str | None, overrides: dict) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path}: {e}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path}: expected a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"config {path}: unknown keys {sorted(unknown)}")
        cfg = replace(cfg, **raw)
    active = {k: v for k, v in overrides.items() if v is not None}
    if active:
        cfg = replace(cfg, **active)
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    v = cfg.validate()
    out = _out_dir(cfg)
    counts, sampled_mi, expected_mi = link.run_uncoded_experiment(
        v.grid, v.psf, v.noise, cfg.events_per_symbol, cfg.seed, cfg.workers,
    )
    ch.write_counts_csv(out / "joint_counts.csv", counts)
    values = {
        "mi_bits": sampled_mi,
        "expected_mi_bits": expected_mi,
        "max_bits": info.max_mutual_information(v.grid.n_symbols),
        "throughput": v.chain.throughput,
        "capacity_sent_bits": info.sent_photon_capacity(sampled_mi, v.chain),
        "n_symbols": v.grid.n_symbols,
        "events_per_symbol": cfg.events_per_symbol,
        "seed": cfg.seed,
    }
    reports.write_report(out, "report", values, cfg.snapshot())
    sys.stdout.write(reports.format_key_value_report(values))
    return EXIT_OK


def cmd_sweep_bins(cfg: RunConfig) -> int:
    v = cfg.validate()
    out = _out_dir(cfg)
    report = link.sweep_bin_sizes(
        [int(b) for b in cfg.bins],
        cfg.detector_width,
        cfg.detector_height,
        v.psf,
        cfg.ratio_low,
        cfg.ratio_high,
        cfg.workers,
    )
    report.parameters["seed"] = cfg.seed
    reports.write_bin_sweep_csv(out / "bin_sweep.csv", report)
    (out / "report.json").write_text(report.to_json())
    return EXIT_OK


def cmd_coded_ber(cfg: RunConfig) -> int:
    v = cfg.validate()
    out = _out_dir(cfg)
    code = ldpc.load_dvbs2_rate12()
    report = link.run_coded_experiment(
        [float(p) for p in cfg.crossovers],
        cfg.frames_per_point,
        code,
        cfg.seed,
        v.decoder,
        cfg.workers,
    )
    reports.write_coded_ber_csv(out / "coded_ber.csv", report)
    (out / "report.json").write_text(report.to_json())
    return EXIT_OK


def cmd_mi(cfg: RunConfig, counts_path: str) -> int:
    cfg.validate()
    counts = ch.read_counts_csv(counts_path)
    try:
        joint = info.joint_from_counts(counts)
    except ValueError as e:
        raise ConfigError(f"counts file {counts_path}: {e}") from None
    mi = info.mutual_information(joint)
    chain = info.LossChain.from_mapping(cfg.losses)
    values = {
        "mi_bits": mi,
        "max_bits": info.max_mutual_information(min(joint.n_sent, joint.n_received)),
        "throughput": chain.throughput,
        "capacity_sent_bits": info.sent_photon_capacity(mi, chain),
    }
    out = _out_dir(cfg)
    reports.write_report(out, "report", values, cfg.snapshot() | {"counts_file": str(counts_path)})
    sys.stdout.write(reports.format_key_value_report(values))
    return EXIT_OK


def _parse_detector(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ConfigError(f"--detector expects WIDTHxHEIGHT, got {text!r}") from None


def _parse_list(text: str, kind):
    try:
        return [kind(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photonlink",
                                     description="Spatially encoded single-photon link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, metavar="N")
        p.add_argument("--out", dest="out_dir", metavar="DIR")
        p.add_argument("--workers", type=int, metavar="N")

    p = sub.add_parser("simulate", help="uncoded scan: joint counts and mutual information")
    add_common(p)
    p.add_argument("--detector", metavar="WxH")
    p.add_argument("--bin-size", type=int, dest="bin_size")
    p.add_argument("--fwhm-x", type=float, dest="fwhm_x")
    p.add_argument("--fwhm-y", type=float, dest="fwhm_y")
    p.add_argument("--ratio", type=float, dest="signal_to_dark_ratio")
    p.add_argument("--events-per-symbol", type=int, dest="events_per_symbol")

    p = sub.add_parser("sweep-bins", help="bin-size tradeoff table")
    add_common(p)
    p.add_argument("--detector", metavar="WxH")
    p.add_argument("--bins", metavar="B1,B2,...")
    p.add_argument("--fwhm-x", type=float, dest="fwhm_x")
    p.add_argument("--fwhm-y", type=float, dest="fwhm_y")
    p.add_argument("--ratio-low", type=float, dest="ratio_low")
    p.add_argument("--ratio-high", type=float, dest="ratio_high")

    p = sub.add_parser("coded-ber", help="LDPC waterfall over the binary symmetric channel")
    add_common(p)
    p.add_argument("--crossovers", metavar="P1,P2,...")
    p.add_argument("--frames", type=int, dest="frames_per_point")

    p = sub.add_parser("mi", help="mutual information of a recorded counts file")
    add_common(p)
    p.add_argument("counts_file", metavar="COUNTS_CSV")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = {
            "seed": args.seed,
            "out_dir": args.out_dir,
            "workers": args.workers,
        }
        if getattr(args, "detector", None):
            overrides["detector_width"], overrides["detector_height"] = _parse_detector(args.detector)
        for name in ("bin_size", "fwhm_x", "fwhm_y", "signal_to_dark_ratio", "events_per_symbol",
                     "ratio_low", "ratio_high", "frames_per_point"):
            if hasattr(args, name):
                overrides[name] = getattr(args, name)
        if getattr(args, "bins", None) is not None:
            overrides["bins"] = _parse_list(args.bins, int)
        if getattr(args, "crossovers", None) is not None:
            overrides["crossovers"] = _parse_list(args.crossovers, float)
        cfg = load_config(args.config, overrides)

        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "sweep-bins":
            return cmd_sweep_bins(cfg)
        if args.command == "coded-ber":
            return cmd_coded_ber(cfg)
        if args.command == "mi":
            return cmd_mi(cfg, args.counts_file)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ch.CountsFormatError) as e:
        print(f"photonlink: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"photonlink: i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except Exception as e:  # noqa: BLE001 - contract: nonzero exit, never a traceback
        print(f"photonlink: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
