"""Command-line front end.

Every subcommand reads an optional INI file (see :mod:`dowsim.config`),
writes its tables and a ``summary.json`` into the output directory, and
keeps wall-clock details in ``metadata.json``.  Exit status is 0 on success,
2 for configuration errors and 1 for failures during the run.
"""

from __future__ import annotations

import argparse
import itertools
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .comparator import default_table, load_table, posteriors, scores_from_ranks
from .config import (COMMANDS, FORMATS, RunConfig, deform_from, events_from, grid_from, load_config,
                     packet_from, policy_from, potential_from)
from .errors import ConfigError, DowsimError
from .evolution import EvolutionConfig, trajectory
from .experiments.born import born_check, two_peak_field
from .experiments.double_slit import DoubleSlitConfig, Packet, SlitBarrier, WhichPath, double_slit
from .experiments.entangle import EntangledPairConfig, entangled_pair
from .experiments.localization import DEFAULT_WIDTHS_NM, localization_table
from .io import write_json, write_metadata, write_pgm, write_table
from .trajectory import run_trajectory, thread_count
from .wavefield import (NATURAL, SI_ELECTRON, GridSpec, gaussian_packet, momentum_spread, norm,
                        position_spread)


def _spreads(psi, units):
    return np.atleast_1d(position_spread(psi)), np.atleast_1d(momentum_spread(psi, units))


def _axis_names(dim: int) -> list[str]:
    return ["x"] if dim == 1 else ["x", "y"]


def cmd_evolve(cfg: RunConfig) -> dict:
    sec = cfg.section
    units = cfg.units or NATURAL
    grid = grid_from(sec)
    pk = packet_from(sec, grid.dim)
    v = potential_from(sec)
    evo = EvolutionConfig(sec.float("dt", 0.01), sec.int("n_steps", 1000), units)
    record_every = sec.int("record_every", max(1, evo.n_steps // 100))
    heatmap_every = sec.int("heatmap_every", 0)
    sec.finish()
    if record_every < 1 or heatmap_every < 0:
        raise ConfigError("record_every must be >= 1 and heatmap_every >= 0")

    psi0 = gaussian_packet(grid, pk.x0, pk.sigma, pk.k0)
    rows, frames = [], 0
    for k, psi in enumerate(itertools.chain([psi0], trajectory(psi0, v, evo))):
        if k % record_every == 0 or k == evo.n_steps:
            dx, dp = _spreads(psi, units)
            rows.append([psi.t, *dx, *dp, norm(psi)])
        if heatmap_every and k % heatmap_every == 0:
            write_pgm(cfg.out / f"density_{k:06d}.pgm", psi.density())
            frames += 1
    names = _axis_names(grid.dim)
    columns = (["t", "delta_x", "delta_p", "norm"] if grid.dim == 1 else
               ["t"] + [f"delta_{a}" for a in names] + [f"delta_p{a}" for a in names] + ["norm"])
    write_table(cfg.out / "width_history", columns, rows, cfg.fmt)

    summary = {"final_t": psi.t, "final_delta_x": rows[-1][1: 1 + grid.dim],
               "max_norm_error": max(abs(r[-1] - 1.0) for r in rows), "heatmaps": frames}
    if v.kind == "free":
        s0 = np.array(pk.sigma)
        oracle = s0 * np.sqrt(1 + (units.hbar * psi.t / (2 * units.mass * s0 ** 2)) ** 2)
        summary["free_oracle_delta_x"] = oracle
    return summary


def cmd_trajectory(cfg: RunConfig) -> dict:
    sec = cfg.section
    units = cfg.units or NATURAL
    grid = grid_from(sec)
    pk = packet_from(sec, grid.dim)
    v = potential_from(sec)
    evo = EvolutionConfig(sec.float("dt", 0.01), sec.int("n_steps", 1000), units)
    record_every = sec.int("record_every", max(1, evo.n_steps // 100))
    events = events_from(sec, grid.dim)
    policy = policy_from(sec, units)
    deform = deform_from(sec)
    sec.finish()

    psi = gaussian_packet(grid, pk.x0, pk.sigma, pk.k0)
    res = run_trajectory(psi, v, events, policy, deform, evo, cfg.seed, record_every)
    names = _axis_names(grid.dim)
    write_table(cfg.out / "events", ["t", "energy", "outcome", "location"],
                [[e.t, e.event.energy, e.outcome.value, e.location] for e in res.events_log], cfg.fmt)
    write_table(cfg.out / "width_history", ["t"] + [f"delta_{a}" for a in names],
                [[t, *np.atleast_1d(w)] for t, w in res.width_history], cfg.fmt)
    return {"n_events": len(res.events_log), "n_collapses": len(res.collapses),
            "final_delta_x": np.atleast_1d(position_spread(res.final_field)), "final_norm": norm(res.final_field)}


def cmd_double_slit(cfg: RunConfig) -> dict:
    sec = cfg.section
    units = cfg.units or NATURAL
    base = DoubleSlitConfig()
    nx, ny = sec.ints("grid_n", base.grid.shape)
    grid = GridSpec.plane((nx, ny), (base.grid.x_min[0], base.grid.x_max[0]),
                          (base.grid.x_min[1], base.grid.x_max[1]))
    energy, fraction = sec.float("detector_energy"), sec.float("detector_fraction")
    which = None
    if energy is not None or fraction is not None:
        which = WhichPath(energy, fraction, sec.float("detector_extent"))
    ds = replace(base, grid=grid, packet=Packet(), units=units, which_path=which, seed0=cfg.seed,
                 barrier=SlitBarrier(height=sec.float("barrier_height", base.barrier.height),
                                     blocked=sec.ints("blocked", ())),
                 screen_x=sec.float("screen_x", base.screen_x), n_shots=sec.int("n_shots", base.n_shots),
                 dt=sec.float("dt", base.dt), bins=sec.int("bins", base.bins),
                 max_steps=sec.int("max_steps", base.max_steps),
                 policy=replace(base.policy, units=units))
    heatmap = sec.bool("heatmap", False)
    sec.finish()

    res = double_slit(ds)
    h = res.histogram
    write_table(cfg.out / "screen_histogram", ["bin_lo", "bin_hi", "count", "oracle"],
                zip(h.edges[:-1], h.edges[1:], h.counts, res.oracle), cfg.fmt)
    if heatmap and res.screen_field is not None:
        write_pgm(cfg.out / "screen_field.pgm", res.screen_field.density())
    slits, counts = np.unique(res.slit_index[res.slit_index >= 0], return_counts=True)
    return {"visibility": res.visibility, "tv_distance": res.tv_distance, "n_shots": ds.n_shots,
            "reached_screen": h.total, "crossing_step": res.crossing_step,
            "crossing_threshold": res.crossing_threshold,
            "slit_collapses": {int(s): int(c) for s, c in zip(slits, counts)}}


def cmd_born_check(cfg: RunConfig) -> dict:
    sec = cfg.section
    kind = sec.choice("field", "gaussian", ("gaussian", "two-peak"))
    n = sec.int("samples", 100_000)
    if kind == "gaussian":
        grid = grid_from(sec, n=(64,), x_min=(-8.0,), x_max=(8.0,))
        psi = gaussian_packet(grid, sec.floats("x0", (0.0,))[0], sec.float("sigma", 1.0))
    else:
        grid = grid_from(sec, n=(1024,), x_min=(-20.0,), x_max=(20.0,))
        psi = two_peak_field(grid, sec.float("split", 0.25), sec.float("separation", 12.0),
                             sec.float("sigma", 1.0))
    sec.finish()
    if grid.dim != 1:
        raise ConfigError("born-check uses a 1D grid")
    if n < 1000:
        raise ConfigError("samples must be >= 1000")
    exact, freq, tv, pvalue = born_check(psi, n, np.random.default_rng(cfg.seed))
    x = grid.axes[0]
    write_table(cfg.out / "born_histogram", ["x", "exact", "empirical"], zip(x, exact, freq), cfg.fmt)
    return {"samples": n, "tv_distance": tv, "chi2_pvalue": pvalue,
            "mass_left_exact": float(exact[x < 0].sum()), "mass_left_empirical": float(freq[x < 0].sum())}


def cmd_localization_table(cfg: RunConfig) -> dict:
    sec = cfg.section
    widths = sec.floats("widths_nm", DEFAULT_WIDTHS_NM)
    sec.finish()
    rows = localization_table(cfg.units or SI_ELECTRON, widths)
    write_table(cfg.out / "localization_table", ["width_nm", "energy_ev"], rows, cfg.fmt)
    return {"rows": len(rows)}


def cmd_compare(cfg: RunConfig) -> dict:
    sec = cfg.section
    path = sec.str("table")
    sec.finish()
    table = default_table() if path is None else load_table(cfg.base_dir / path)
    scores = scores_from_ranks(table)
    post = posteriors(scores)
    write_table(cfg.out / "scores", ["model", "score", "posterior"],
                [[m, scores[m], post[m]] for m in table.models], cfg.fmt)
    return {"models": len(table.models), "criteria": list(table.criteria), "total_score": sum(scores.values())}


def cmd_entangle(cfg: RunConfig) -> dict:
    sec = cfg.section
    units = cfg.units or NATURAL
    base = EntangledPairConfig()
    n = sec.int("n", base.grid.shape[0])
    half = sec.float("half_width", base.grid.x_max[0])
    ec = replace(base, grid=GridSpec.plane(n, (-half, half), (-half, half)), s=sec.float("s", base.s),
                 S=sec.float("S", base.S), n_shots=sec.int("n_shots", base.n_shots), seed0=cfg.seed,
                 energy=sec.float("energy", base.energy), units=units, policy=replace(base.policy, units=units))
    sec.finish()
    r = entangled_pair(ec)
    write_table(cfg.out / "entangle_samples", ["shot", "x_a", "x_b"],
                [[i, a, b] for i, (a, b) in enumerate(r.samples)], cfg.fmt)
    return {"correlation": r.correlation, "analytic_correlation": r.analytic_correlation,
            "conditional_spread": r.conditional_spread,
            "analytic_conditional_spread": r.analytic_conditional_spread,
            "marginal_tv": r.marginal_tv, "collapses_per_shot_max": int(r.events_per_shot.max())}


HANDLERS = {
    "evolve": cmd_evolve, "trajectory": cmd_trajectory, "double-slit": cmd_double_slit,
    "born-check": cmd_born_check, "localization-table": cmd_localization_table,
    "compare": cmd_compare, "entangle": cmd_entangle,
}

HELP = {
    "evolve": "free or potential-driven evolution of a Gaussian packet; width history",
    "trajectory": "evolution with interaction events; event log and width history",
    "double-slit": "two-slit ensemble with optional which-path detectors; screen histogram",
    "born-check": "Monte Carlo check of Born sampling against |psi|^2",
    "localization-table": "minimum localization energy per width (eV)",
    "compare": "rank-based model scores and posterior weights",
    "entangle": "joint collapse of a correlated two-coordinate field",
}


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI file with an optional [run] and one experiment section")
    common.add_argument("--seed", type=_seed, help="base seed (overrides [run] seed)")
    common.add_argument("--out", type=Path, help="output directory (overrides [run] out)")
    common.add_argument("--format", choices=FORMATS, dest="fmt", help="table format (default csv)")
    parser = argparse.ArgumentParser(prog="dowsim", description="Wavefield evolution, deformation and collapse.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def run(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config, args.command)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.fmt is not None:
        cfg.fmt = args.fmt
    started = time.time()
    summary = HANDLERS[args.command](cfg)
    write_json(cfg.out / "summary.json", {"command": args.command, "seed": cfg.seed, **summary})
    write_metadata(cfg.out, args.command, started, thread_count())
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = run(args)
    except ConfigError as exc:
        print(f"dowsim: config error: {exc}", file=sys.stderr)
        return 2
    except (DowsimError, OSError, ArithmeticError) as exc:
        print(f"dowsim: error: {exc}", file=sys.stderr)
        return 1
    print(f"dowsim {args.command}: results in {cfg.out}")
    return 0
