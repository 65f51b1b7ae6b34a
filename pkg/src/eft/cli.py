"""Command-line interface.

Exit codes: 0 success, 1 invariant failure (selftest), 2 malformed input,
3 shape mismatch, 4 numerical failure or size guard.
"""

from __future__ import annotations

import functools
import json
import logging
import sys

import click
import numpy as np

from . import experiments as ex
from . import filters, io, spectral
from .errors import DomainError, NumericalError, ParseError, ShapeError, SizeGuardError, SymmetryError
from .graph_core import LaplacianKind, build_joint_laplacian, build_laplacian
from .synth import SynthConfig, gen_evolving_graph, gen_signal

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT, EXIT_SHAPE, EXIT_NUMERIC = 0, 1, 2, 3, 4

log = logging.getLogger("eft")


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, ShapeError):
        return EXIT_SHAPE
    if isinstance(exc, (NumericalError, SizeGuardError)):
        return EXIT_NUMERIC
    return EXIT_INPUT


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ShapeError, NumericalError, SizeGuardError, ParseError, SymmetryError, DomainError) as exc:
            click.echo(f"error: {exc}", err=True)
            if isinstance(exc, SizeGuardError):
                click.echo("hint: pass --force-dense to override the size guard", err=True)
            sys.exit(_exit_code(exc))
    return wrapper


def _list(cast):
    def parse(ctx, param, value):
        if value is None:
            return None
        try:
            return [cast(v) for v in value.split(",") if v.strip()]
        except ValueError:
            raise click.BadParameter(f"expected a comma-separated list, got {value!r}") from None
    return parse


kind_option = click.option("--kind", type=click.Choice(["comb", "norm"]), default=None,
                           help="Laplacian kind.")
seed_option = click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True,
                           help="Random seed (also the first of consecutive seeds).")
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None,
                          help="Output path.")
out_dir_option = click.option("--out-dir", type=click.Path(file_okay=False), default=".",
                              show_default=True, help="Directory for timestamped reports when --out is absent.")
json_option = click.option("--json", "as_json", is_flag=True, help="Print a JSON summary on stdout.")
force_option = click.option("--force-dense", is_flag=True, help="Override the dense N*T size guard.")
graph_in = click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False),
                        required=True, help="Dynamic graph JSON.")
signal_in = click.option("--signal", "signal_path", type=click.Path(exists=True, dir_okay=False),
                         required=True, help="Signal CSV (N rows, T columns).")


def _kind(value, default="comb") -> LaplacianKind:
    return LaplacianKind.parse(value or default)


def _load(graph_path, signal_path):
    dg = io.parse_graph_json(graph_path)
    X = io.parse_signal_csv(signal_path)
    dg.check_signal(X)
    return dg, X


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--verbose", "-v", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Evolving graph Fourier transform toolkit."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="SynthConfig as JSON; flags override it.")
@click.option("--n", type=click.IntRange(min=2), default=None, help="Nodes.")
@click.option("--t", type=click.IntRange(min=2), default=None, help="Timesteps.")
@click.option("--perturb-scale", type=float, default=None, help="Per-step edge weight std.")
@click.option("--noise", type=float, default=None, help="Signal noise std.")
@kind_option
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Random seed.")
@click.option("--graph", "graph_out", type=click.Path(dir_okay=False), required=True,
              help="Where to write the dynamic graph JSON.")
@click.option("--signal", "signal_out", type=click.Path(dir_okay=False), required=True,
              help="Where to write the noisy signal CSV.")
@click.option("--clean", "clean_out", type=click.Path(dir_okay=False), default=None,
              help="Where to write the clean signal CSV.")
@guarded
def generate(config_path, n, t, perturb_scale, noise, kind, seed, graph_out, signal_out, clean_out):
    """Generate a synthetic evolving graph and signal."""
    base = {}
    if config_path:
        base = io.load_json(config_path)
        if not isinstance(base, dict):
            raise ParseError("config must be a JSON object", config_path)
    for key, val in (("n", n), ("t", t), ("perturb_scale", perturb_scale), ("noise_std", noise),
                     ("kind", kind), ("seed", seed)):
        if val is not None:
            base[key] = val
    cfg = SynthConfig.from_dict(base)
    dg = gen_evolving_graph(cfg)
    clean, noisy = gen_signal(dg, cfg)
    io.write_graph_json(graph_out, dg)
    io.write_signal_csv(signal_out, noisy)
    if clean_out:
        io.write_signal_csv(clean_out, clean)
    click.echo(f"N={cfg.n} T={cfg.t} seed={cfg.seed}")


@main.command()
@graph_in
@kind_option
@click.option("--snapshot", type=click.IntRange(min=0), default=None,
              help="Write this snapshot's Laplacian instead of the joint one.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Dense matrix CSV.")
@force_option
@guarded
def laplacian(graph_path, kind, snapshot, out, force_dense):
    """Write a snapshot or the joint Laplacian as a dense CSV matrix."""
    dg = io.parse_graph_json(graph_path)
    kind = _kind(kind)
    if snapshot is not None:
        if snapshot >= dg.num_steps:
            raise DomainError(f"snapshot {snapshot} out of range for T={dg.num_steps}")
        M = build_laplacian(dg.snapshots[snapshot], kind).toarray()
    else:
        size = dg.num_nodes * dg.num_steps
        if size > spectral.DEFAULT_MAX_DENSE and not force_dense:
            raise SizeGuardError(f"dense {size}x{size} joint Laplacian exceeds the size guard")
        M = build_joint_laplacian(dg, kind).toarray()
    io.write_signal_csv(out, M)
    click.echo(f"shape={M.shape[0]}x{M.shape[1]} kind={kind.value}")


@main.command()
@graph_in
@signal_in
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Coefficient CSV.")
@kind_option
@guarded
def transform(graph_path, signal_path, out, kind):
    """Forward transform of a signal; prints the Parseval residual."""
    dg, X = _load(graph_path, signal_path)
    kind = _kind(kind)
    C = spectral.eft_forward(dg, X, kind)
    io.write_coeffs_csv(out, C.values, kind)
    resid = abs(np.linalg.norm(C.values) - np.linalg.norm(X))
    click.echo(f"N={dg.num_nodes} T={dg.num_steps} parseval_residual={resid:.3e}")


@main.command()
@graph_in
@click.option("--coeffs", "coeffs_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Coefficient CSV written by 'transform'.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Signal CSV.")
@kind_option
@click.option("--reference", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Signal CSV to compare the reconstruction against.")
@guarded
def inverse(graph_path, coeffs_path, out, kind, reference):
    """Inverse transform of a coefficient file (kind defaults to the file header)."""
    dg = io.parse_graph_json(graph_path)
    C, file_kind = io.read_coeffs_csv(coeffs_path)
    kind = _kind(kind, file_kind.value)
    X = spectral.eft_inverse(dg, C, kind)
    imag = float(np.abs(X.imag).max()) if np.iscomplexobj(X) else 0.0
    if imag > 1e-9 * max(1.0, float(np.abs(X).max())):
        click.echo(f"warning: discarding imaginary part up to {imag:.3e}", err=True)
    io.write_signal_csv(out, np.real(X))
    msg = f"N={dg.num_nodes} T={dg.num_steps}"
    if reference:
        ref = io.parse_signal_csv(reference)
        dg.check_signal(ref)
        msg += f" max_abs_diff={float(np.abs(np.real(X) - ref).max()):.3e}"
    click.echo(msg)


@main.command(name="filter")
@graph_in
@signal_in
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Filter spec JSON.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Filtered signal CSV.")
@kind_option
@click.option("--order", type=click.Choice(["vertex_first", "time_first"]), default="vertex_first",
              show_default=True)
@guarded
def filter_cmd(graph_path, signal_path, spec_path, out, kind, order):
    """Joint vertex/temporal filtering of a signal."""
    dg, X = _load(graph_path, signal_path)
    vf, tf = io.parse_filter_spec(spec_path, dg.num_steps)
    Y = filters.joint_filter(dg, X, vf, tf, _kind(kind), order=order)
    if np.iscomplexobj(Y):
        click.echo("warning: temporal response is not conjugate-symmetric; writing the real part", err=True)
    io.write_signal_csv(out, np.real(Y))
    click.echo(f"N={dg.num_nodes} T={dg.num_steps} order={order}")


def _emit(experiment, rows, config, summary, out, out_dir, as_json):
    csv_path, json_path = ex.write_report(experiment, rows, config, summary, out=out, out_dir=out_dir)
    if as_json:
        click.echo(json.dumps(ex._jsonable(summary), indent=2, sort_keys=True))
    else:
        for k, v in summary.items():
            click.echo(f"{k}: {v}")
    click.echo(f"wrote {csv_path} and {json_path}", err=True)


def _cell_summary(table):
    return {f"{m}@{k:g}": round(v, 6) for (m, k), v in sorted(table.items())}


@main.command()
@click.option("--n", type=click.IntRange(min=2), default=20, show_default=True)
@click.option("--t", type=click.IntRange(min=2), default=32, show_default=True)
@click.option("--noise", type=float, default=0.1, show_default=True)
@click.option("--perturb-scale", type=float, default=0.1, show_default=True)
@click.option("--keep", callback=_list(float), default="0.1", show_default=True,
              help="Comma-separated keep fractions.")
@click.option("--methods", callback=_list(str), default="EFT,AD,DFTOnly,GFTOnly", show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=50, show_default=True, help="Number of seeds.")
@seed_option
@kind_option
@out_option
@out_dir_option
@json_option
@force_option
@guarded
def denoise(n, t, noise, perturb_scale, keep, methods, seeds, seed, kind, out, out_dir, as_json, force_dense):
    """Denoising by top-magnitude coefficient thresholding."""
    cfg = SynthConfig(n=n, t=t, noise_std=noise, perturb_scale=perturb_scale, kind=kind or "norm")
    rows = ex.run_denoise(cfg, methods, keep, range(seed, seed + seeds), force_dense=force_dense)
    summary = _cell_summary(ex.median_table(rows, "keep_fraction"))
    config = dict(cfg.to_dict(), keep=keep, methods=methods, seeds=[seed, seed + seeds - 1])
    _emit("denoise", rows, config, summary, out, out_dir, as_json)


@main.command()
@click.option("--resolution", type=click.IntRange(min=2), default=8, show_default=True)
@click.option("--frames", type=click.IntRange(min=1), default=16, show_default=True)
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Use this graph (with --signal) instead of synthetic meshes.")
@click.option("--signal", "signal_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--percentiles", callback=_list(float), default="50,80,95", show_default=True)
@click.option("--methods", callback=_list(str), default="EFT,AD,DFTOnly,GFTOnly", show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=20, show_default=True, help="Number of seeds.")
@seed_option
@kind_option
@out_option
@out_dir_option
@json_option
@force_option
@guarded
def compact(resolution, frames, graph_path, signal_path, percentiles, methods, seeds, seed, kind,
            out, out_dir, as_json, force_dense):
    """Reconstruction error after removing the weakest coefficients."""
    kind = _kind(kind)
    if (graph_path is None) != (signal_path is None):
        raise click.UsageError("--graph and --signal must be given together")
    if graph_path:
        dg, X = _load(graph_path, signal_path)
        rows = ex.run_compaction(dg, X, methods, percentiles, kind, force_dense=force_dense)
        config = {"graph": graph_path, "signal": signal_path}
    else:
        rows = ex.run_mesh_compaction(resolution, frames, range(seed, seed + seeds), methods, percentiles, kind)
        config = {"resolution": resolution, "frames": frames, "seeds": [seed, seed + seeds - 1]}
    config.update(kind=kind.value, percentiles=percentiles, methods=methods)
    summary = _cell_summary(ex.median_table(rows, "percentile_removed"))
    _emit("compact", rows, config, summary, out, out_dir, as_json)


@main.command()
@click.option("--n", type=click.IntRange(min=2), default=8, show_default=True)
@click.option("--t", type=click.IntRange(min=2), default=8, show_default=True)
@click.option("--perturb-scale", type=float, default=ex.BOUND_CONFIG.perturb_scale, show_default=True,
              help="Base edge perturbation std, multiplied by each scale.")
@click.option("--edge-prob", type=float, default=ex.BOUND_CONFIG.edge_prob, show_default=True)
@click.option("--scales", callback=_list(float), default="0,0.25,0.5,1", show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=20, show_default=True, help="Number of seeds.")
@seed_option
@kind_option
@out_option
@out_dir_option
@json_option
@force_option
@guarded
def bound(n, t, perturb_scale, edge_prob, scales, seeds, seed, kind, out, out_dir, as_json, force_dense):
    """Probe the EFT-versus-exact-basis approximation bound."""
    cfg = ex.BOUND_CONFIG.replace(n=n, t=t, perturb_scale=perturb_scale, edge_prob=edge_prob,
                                  kind=kind or ex.BOUND_CONFIG.kind)
    rows = ex.run_bound_probe(cfg, scales, range(seed, seed + seeds), force_dense=force_dense)
    summary = {}
    for s in scales:
        sel = [r for r in rows if r.perturb_scale == s]
        summary[f"s={s:g}"] = {
            "median_diff_norm": float(np.median([r.diff_norm for r in sel])),
            "median_residual_max": float(np.median([r.residual_max for r in sel])),
            "residual_within_bound": all(r.residual_max <= r.bound_value + 1e-9 for r in sel),
        }
    config = dict(cfg.to_dict(), scales=scales, seeds=[seed, seed + seeds - 1])
    _emit("bound", rows, config, summary, out, out_dir, as_json)


@main.command()
@click.option("--n-grid", callback=_list(int), default="16", show_default=True)
@click.option("--t-grid", callback=_list(int), default="16,32,64,128", show_default=True)
@click.option("--repeats", type=click.IntRange(min=1), default=3, show_default=True)
@seed_option
@out_option
@out_dir_option
@json_option
@guarded
def bench(n_grid, t_grid, repeats, seed, out, out_dir, as_json):
    """Time eft_forward against the dense joint eigendecomposition."""
    table = ex.run_scaling_bench(n_grid, t_grid, repeats, seed=seed)
    summary = {"slopes": table.slopes}
    config = {"n_grid": n_grid, "t_grid": t_grid, "repeats": repeats, "seed": seed, "threads": 1}
    _emit("bench", table.rows, config, summary, out, out_dir, as_json)


@main.command()
@seed_option
@click.option("--instances", type=click.IntRange(min=1), default=5, show_default=True,
              help="Random instances per Laplacian kind.")
@json_option
def selftest(seed, instances, as_json):
    """Run the invariant suite; exit 1 if anything fails."""
    results = ex.run_property_suite(seed, instances=instances)
    ok = all(r.passed for r in results.values())
    if as_json:
        click.echo(json.dumps({"passed": ok, "seed": seed,
                               "checks": {k: r.passed for k, r in results.items()},
                               "failures": {k: r.detail for k, r in results.items() if not r.passed}},
                              indent=2, sort_keys=True))
    else:
        for name, r in results.items():
            click.echo(f"{'PASS' if r.passed else 'FAIL'} {name}" + ("" if r.passed else f": {r.detail}"))
    sys.exit(EXIT_OK if ok else EXIT_INVARIANT)


if __name__ == "__main__":
    main()
