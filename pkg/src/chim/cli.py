"""Command-line interface.

Subcommands: simulate, import, metrics, compare, render. All output files
are written atomically (temp file + rename) and every output embeds the
parameters that produced it. Exit codes: 0 success, 2 usage error,
1 runtime error.

A key=value config file can preset any flag of a subcommand (flags given
on the command line win). The CHIM_SEED environment variable presets
--seed only.
"""
from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import metrics as mt
from .dataset import (
    atomic_write_bytes,
    import_csi_csv,
    normalize_dataset,
    read_dataset,
    write_dataset,
)
from .errors import ChimError, ProfileError
from .profiles import BUILTIN_NAMES, builtin_profile, load_profile
from .simulate import SimConfig, generate_dataset


@click.group()
def cli():
    """Fading-channel dataset synthesis, ingestion and evaluation."""


def _load_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge_config(ctx: click.Context, values: dict) -> dict:
    """Fill parameters still at their defaults from the config file."""
    path = values.pop("config", None)
    if not path:
        return values
    cfg = _load_config_file(path)
    params = {p.name: p for p in ctx.command.params}
    for key, raw in cfg.items():
        if key not in params or key == "config":
            raise click.UsageError(f"config file {path}: unknown key {key!r}")
        if ctx.get_parameter_source(key) == click.core.ParameterSource.DEFAULT:
            values[key] = params[key].type.convert(raw, params[key], ctx)
    return values


def _resolve_profile(name_or_path: str):
    try:
        return builtin_profile(name_or_path)
    except ProfileError:
        pass
    import os

    if os.path.exists(name_or_path):
        return load_profile(name_or_path)
    raise click.UsageError(
        f"unknown profile {name_or_path!r} (not a built-in, not a file); "
        f"built-ins: {', '.join(BUILTIN_NAMES)}"
    )


_config_option = click.option(
    "--config", type=click.Path(exists=True, dir_okay=False), default=None,
    help="key=value file presetting flags (command-line flags win).",
)


@cli.command()
@click.option("--profile", required=True, help="Built-in profile name or profile file path.")
@click.option("--count", type=int, required=True, help="Number of samples to generate.")
@click.option("--speed", type=float, required=True, help="User speed in km/h.")
@click.option("--seed", type=int, default=0, envvar="CHIM_SEED", show_default=True)
@click.option("--m", "num_subcarriers", type=int, default=72, show_default=True)
@click.option("--n", "num_slots", type=int, default=14, show_default=True)
@click.option("--carrier", type=float, default=2.1e9, show_default=True, help="Carrier frequency [Hz].")
@click.option("--spacing", type=float, default=15e3, show_default=True, help="Subcarrier spacing [Hz].")
@click.option("--slot-duration", type=float, default=1e-3 / 14, help="Slot duration [s]; default 1ms/14.")
@click.option("--paths", type=int, default=64, show_default=True, help="Sinusoid paths per tap.")
@click.option("--normalize", type=click.Choice(["global-max", "global-percentile"]), default=None,
              help="Scale plane values into [-1,1]; the scale is stored in the file header.")
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@_config_option
@click.pass_context
def simulate(ctx, **kw):
    """Generate a simulated dataset and write it as a .chim file."""
    kw = _merge_config(ctx, kw)
    if kw["count"] < 1:
        raise click.UsageError(f"--count must be >= 1, got {kw['count']}")
    profile = _resolve_profile(kw["profile"])
    config = SimConfig(
        user_speed=kw["speed"],
        carrier_freq=kw["carrier"],
        num_subcarriers=kw["num_subcarriers"],
        subcarrier_spacing=kw["spacing"],
        num_slots=kw["num_slots"],
        slot_duration=kw["slot_duration"],
        paths_per_tap=kw["paths"],
        seed=kw["seed"],
    )
    dataset = generate_dataset(config, profile, kw["count"])
    clamp_note = ""
    if kw["normalize"]:
        dataset, _, clamped = normalize_dataset(dataset, kw["normalize"])
        clamp_note = f", normalized ({kw['normalize']}, {clamped} clamped)"
    write_dataset(dataset, kw["out"])
    click.echo(
        f"wrote {dataset.sample_count} x {dataset.m}x{dataset.n} {profile.name} "
        f"samples at {kw['speed']:g} km/h (seed {kw['seed']}){clamp_note} -> {kw['out']}"
    )


@cli.command("import")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--m", type=int, required=True, help="Subcarriers per snapshot (row width is 2*m).")
@click.option("--n", type=int, default=14, show_default=True, help="Snapshots per grid.")
@click.option("--polar", is_flag=True, help="Rows are (magnitude, phase) instead of (real, imag).")
@click.option("--header", "skip_header", is_flag=True, help="Skip one header row.")
@click.option("--label", default="csi", show_default=True, help="Channel type label for the samples.")
@click.option("--speed", type=float, default=0.0, show_default=True, help="User speed label [km/h].")
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@_config_option
@click.pass_context
def import_cmd(ctx, **kw):
    """Window a CSI capture CSV into grids and write a .chim file."""
    kw = _merge_config(ctx, kw)
    dataset, dropped = import_csi_csv(
        kw["csv_path"],
        m=kw["m"],
        n=kw["n"],
        polar=kw["polar"],
        skip_header=kw["skip_header"],
        channel_type=kw["label"],
        user_speed=kw["speed"],
    )
    write_dataset(dataset, kw["out"])
    click.echo(
        f"imported {dataset.sample_count} grids of {dataset.m}x{dataset.n} "
        f"({dropped} leftover rows dropped) -> {kw['out']}"
    )


def _provenance_lines(pairs) -> str:
    return "".join(f"# {key}={value}\n" for key, value in pairs)


@cli.command("metrics")
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--which", type=click.Choice(["lcr", "afd", "autocorr", "cepstrum"]), required=True)
@click.option("--scheme", type=click.Choice(list(mt.SCHEMES)), default=None,
              help="Sequence scheme; lcr/afd require ifft-time (their default). "
                   "autocorr/cepstrum default to freq-concat.")
@click.option("--k", type=int, default=mt.DEFAULT_K, show_default=True,
              help="Cepstral coefficient count recorded for provenance.")
@click.option("--epsilon", type=float, default=mt.DEFAULT_EPSILON, show_default=True,
              help="Relative spectral floor for the cepstrum log.")
@click.option("--slot-duration", type=float, default=1e-3 / 14,
              help="Slot duration [s] for LCR/AFD timing; default 1ms/14.")
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@_config_option
@click.pass_context
def metrics_cmd(ctx, **kw):
    """Compute a metric over a dataset and write a CSV with provenance."""
    kw = _merge_config(ctx, kw)
    which = kw["which"]
    scheme = kw["scheme"]
    if which in ("lcr", "afd"):
        if scheme is None:
            scheme = mt.SCHEME_IFFT_TIME
        if scheme != mt.SCHEME_IFFT_TIME:
            raise click.UsageError(f"--which {which} requires --scheme ifft-time")
    elif scheme is None:
        scheme = mt.SCHEME_FREQ_CONCAT
    dataset = read_dataset(kw["dataset_path"])
    provenance = [
        ("dataset", kw["dataset_path"]),
        ("name", mt.dataset_name(dataset)),
        ("samples", dataset.sample_count),
        ("grid", f"{dataset.m}x{dataset.n}"),
        ("which", which),
        ("scheme", scheme),
    ]
    if which in ("lcr", "afd"):
        sample_interval = kw["slot_duration"] / dataset.m
        envelopes = mt.dataset_envelopes(dataset)
        curve = (mt.lcr if which == "lcr" else mt.afd)(envelopes, sample_interval)
        provenance += [
            ("sample_interval", repr(float(sample_interval))),
            ("rms", repr(float(curve.rms))),
            ("levels", "relative-to-rms"),
        ]
        unit = "rate_hz" if which == "lcr" else "duration_s"
        body = "".join(f"{float(lev)!r},{float(val)!r}\n" for lev, val in zip(curve.levels, curve.values))
        text = _provenance_lines(provenance) + f"level,{unit}\n" + body
    else:
        mean_ac = mt.mean_autocorr(dataset, scheme)
        if which == "autocorr":
            body = "".join(f"{i},{float(v)!r}\n" for i, v in enumerate(mean_ac.values))
            text = _provenance_lines(provenance) + "lag,autocorr\n" + body
        else:
            cep = mt.cepstrum(mean_ac, kw["epsilon"])
            provenance += [
                ("K", kw["k"]),
                ("epsilon", repr(kw["epsilon"])),
                ("epsilon_floor", repr(cep.epsilon_floor)),
            ]
            body = "".join(f"{i},{float(v)!r}\n" for i, v in enumerate(cep.coefficients))
            text = _provenance_lines(provenance) + "index,coefficient\n" + body
    atomic_write_bytes(kw["out"], text.encode("utf-8"))
    click.echo(f"wrote {which} ({scheme}) of {kw['dataset_path']} -> {kw['out']}")


@cli.command()
@click.option("--ref", "-r", "refs", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False), help="Reference dataset (repeatable).")
@click.option("--cand", "-c", "cands", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False), help="Candidate dataset (repeatable).")
@click.option("--scheme", type=click.Choice(list(mt.SCHEMES)), default=mt.SCHEME_FREQ_CONCAT,
              show_default=True)
@click.option("--k", type=int, default=mt.DEFAULT_K, show_default=True)
@click.option("--epsilon", type=float, default=mt.DEFAULT_EPSILON, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@_config_option
@click.pass_context
def compare(ctx, **kw):
    """Cross-dataset cepstral distance matrix (references x candidates)."""
    kw = _merge_config(ctx, kw)
    paths = list(kw["refs"]) + list(kw["cands"])
    datasets = [read_dataset(p) for p in paths]
    first_path, first = paths[0], datasets[0]
    for path, ds in zip(paths[1:], datasets[1:]):
        if (ds.m, ds.n) != (first.m, first.n):
            raise ChimError(
                f"grid size mismatch: {first_path} is {first.m}x{first.n}, "
                f"{path} is {ds.m}x{ds.n}"
            )
    nref = len(kw["refs"])
    matrix = mt.cdm_matrix(
        datasets[:nref], datasets[nref:],
        scheme=kw["scheme"], k=kw["k"], epsilon=kw["epsilon"],
    )
    doc = matrix.to_dict()
    doc["reference_files"] = list(kw["refs"])
    doc["candidate_files"] = list(kw["cands"])
    atomic_write_bytes(kw["out"], (json.dumps(doc, indent=2) + "\n").encode("utf-8"))
    width = max(12, *(len(n) for n in matrix.row_names))
    header = " " * width + "".join(f"{n:>14}" for n in matrix.col_names)
    click.echo(header)
    for name, row in zip(matrix.row_names, matrix.entries):
        click.echo(f"{name:<{width}}" + "".join(f"{v:>14.4e}" for v in row))
    click.echo(f"wrote matrix -> {kw['out']}")


@cli.command()
@click.argument("dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--index", type=int, default=0, show_default=True, help="Sample index to render.")
@click.option("--out-image", required=True, type=click.Path(dir_okay=False, writable=True),
              help="PGM (P5) magnitude image, min-max scaled.")
@click.option("--out-csv", required=True, type=click.Path(dir_okay=False, writable=True),
              help="Raw grid CSV: one row per slot, 2*m interleaved re,im fields.")
@_config_option
@click.pass_context
def render(ctx, **kw):
    """Export one sample as a grayscale magnitude image plus raw CSV."""
    kw = _merge_config(ctx, kw)
    dataset = read_dataset(kw["dataset_path"])
    index = kw["index"]
    if not 0 <= index < dataset.sample_count:
        raise ChimError(
            f"sample index {index} out of range (dataset has {dataset.sample_count})"
        )
    grid = dataset.grid(index)
    mag = np.abs(grid)
    span = mag.max() - mag.min()
    if span > 0:
        gray = np.round((mag - mag.min()) / span * 255).astype(np.uint8)
    else:
        gray = np.full(mag.shape, 128, dtype=np.uint8)
    m, n = grid.shape
    pgm = f"P5\n{n} {m}\n255\n".encode("ascii") + gray.tobytes()
    atomic_write_bytes(kw["out_image"], pgm)
    rows = []
    for j in range(n):
        fields = []
        for k in range(m):
            fields += [repr(float(grid[k, j].real)), repr(float(grid[k, j].imag))]
        rows.append(",".join(fields))
    atomic_write_bytes(kw["out_csv"], ("\n".join(rows) + "\n").encode("utf-8"))
    click.echo(f"rendered sample {index} ({m}x{n}) -> {kw['out_image']}, {kw['out_csv']}")


def main(argv=None):
    """Entry point with the stable exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:  # --help and friends
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return 2
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ChimError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
