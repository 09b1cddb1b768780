"""Command-line front end: analysis reports, projection, sweeps, and attention evaluation.

Reports are CSV/JSON (floats written so they round-trip exactly) with PNG
figures rendered alongside; --no-plots skips the figures and --deterministic
drops the timestamp from JSON summaries so reruns are byte-identical.
DECOR_THREADS bounds sweep parallelism.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import __version__, binio
from .decompose import (
    ComponentSelection,
    component_groups,
    norm_match,
    reconstruct,
    similarity_profile,
    spectrum_of,
)
from .embedding import EmbeddingMatrix, SyntheticSpec, load_embedding, save_embedding, synthesize
from .linalg import frobenius_norm, thin_svd
from .lora import forward_decor, forward_decor_mixed, forward_standard, load_lora
from .projection import (
    PROJECTOR_METHODS,
    build_projector,
    project_separate,
    suppress_zero_words,
)
from .reports import write_csv, write_json

SUPPRESSION_METHODS = ("projection", "zero_words", "exclude_components")
DEFAULT_ALPHAS = (0.0, 0.25, 0.5, 0.75, 0.8, 1.0)
DEFAULT_EXCLUDE_RANGES = ((2, 9), (2, 19), (2, 54))


@dataclass(frozen=True)
class SweepConfig:
    """Validated sweep grid: ascending unique alphas, methods, 1-based rank ranges."""

    alphas: tuple[float, ...]
    methods: tuple[str, ...]
    exclude_ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for a in self.alphas:
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"alpha must be in [0, 1], got {a}")
        if list(self.alphas) != sorted(set(self.alphas)):
            raise ValueError("alphas must be sorted ascending and unique")
        for m in self.methods:
            if m not in SUPPRESSION_METHODS:
                raise ValueError(f"unknown suppression method {m!r}")
        for lo, hi in self.exclude_ranges:
            if not 1 <= lo <= hi:
                raise ValueError(f"invalid 1-based rank range ({lo}, {hi})")

    def points(self) -> list[dict]:
        pts = []
        for method in self.methods:
            if method == "projection":
                pts.extend(
                    {"method": method, "alpha": a, "tag": f"projection_alpha{a:g}"}
                    for a in self.alphas
                )
            elif method == "zero_words":
                pts.append({"method": method, "tag": "zero_words"})
            else:
                pts.extend(
                    {
                        "method": method,
                        "lo_rank": lo,
                        "hi_rank": hi,
                        "tag": f"exclude_{lo}_{hi}",
                    }
                    for lo, hi in self.exclude_ranges
                )
        return pts


def _sweep_threads(n_points: int) -> int:
    env = os.environ.get("DECOR_THREADS")
    if env is not None:
        try:
            bound = int(env)
        except ValueError:
            raise click.ClickException(f"DECOR_THREADS must be an integer, got {env!r}")
        if bound < 1:
            raise click.ClickException(f"DECOR_THREADS must be >= 1, got {bound}")
    else:
        bound = os.cpu_count() or 1
    return max(1, min(bound, n_points))


def _alpha_range(ctx, param, value):
    if value is not None and not 0.0 <= value <= 1.0:
        raise click.BadParameter("alpha must be in [0, 1]")
    return value


def _parse_alphas(ctx, param, value):
    try:
        alphas = tuple(float(tok) for tok in value.split(",") if tok.strip() != "")
    except ValueError:
        raise click.BadParameter(f"could not parse alpha list {value!r}")
    if not alphas:
        raise click.BadParameter("alpha list is empty")
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise click.BadParameter(f"alpha must be in [0, 1], got {a}")
    return tuple(sorted(set(alphas)))


def _parse_ranges(ctx, param, value):
    ranges = []
    for tok in value:
        parts = tok.split(":")
        if len(parts) != 2:
            raise click.BadParameter(f"expected LO:HI, got {tok!r}")
        try:
            lo, hi = int(parts[0]), int(parts[1])
        except ValueError:
            raise click.BadParameter(f"expected integer ranks in {tok!r}")
        if not 1 <= lo <= hi:
            raise click.BadParameter(f"need 1 <= LO <= HI, got {tok!r}")
        ranges.append((lo, hi))
    return tuple(ranges)


def _load_or_fail(path) -> EmbeddingMatrix:
    try:
        return load_embedding(path)
    except (OSError, ValueError) as exc:
        raise click.ClickException(f"{path}: {exc}")


def _save_matrix(path, matrix, header_fields):
    binio.write_payload(path, matrix)
    binio.write_header(binio.header_path_for(path), header_fields)


def _profile_rows(e: EmbeddingMatrix, per_token):
    labels = e.labels or tuple("" for _ in range(e.length))
    return [
        {"index": i, "label": labels[i], "cosine": float(c)}
        for i, c in enumerate(per_token)
    ]


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__, prog_name="decor")
def main():
    """Text-embedding decomposition, projection, and dual-path attention toolkit."""


@main.command()
@click.option("--length", "-l", type=int, default=77, show_default=True, help="Token count.")
@click.option("--dim", "-d", type=int, default=768, show_default=True, help="Embedding dimension.")
@click.option("--words", "-n", type=int, default=10, show_default=True, help="Word-token count.")
@click.option("--pad-coherence", type=float, default=0.95, show_default=True,
              help="Pad-row alignment in [0, 1]; 1.0 makes all pad rows identical.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "-o", type=click.Path(path_type=Path), required=True,
              help="Output payload path; a .json header sidecar is written next to it.")
def synth(length, dim, words, pad_coherence, seed, out):
    """Generate a synthetic embedding with near-collinear pad rows."""
    try:
        emb = synthesize(SyntheticSpec(length, dim, words, pad_coherence, seed))
        out.parent.mkdir(parents=True, exist_ok=True)
        save_embedding(emb, out)
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {out} ({length}x{dim}, {words} word tokens)")


@main.command()
@click.argument("inputs", nargs=-1, required=True, type=click.Path(path_type=Path))
@click.option("--top", type=int, default=30, show_default=True,
              help="Singular values to report (clipped to the rank count).")
@click.option("--out", "-o", type=click.Path(path_type=Path), required=True,
              help="Report directory.")
@click.option("--deterministic", is_flag=True, help="Omit timestamps from JSON output.")
@click.option("--plots/--no-plots", default=True, show_default=True)
def analyze(inputs, top, out, deterministic, plots):
    """Spectrum and component-group similarity reports for one or more embeddings."""
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"inputs": {}, "failures": {}}
    spectra = []
    for path in inputs:
        stem = Path(path).stem
        try:
            e = load_embedding(path)
            f = thin_svd(e.x)
            rep = spectrum_of(f, min(top, f.k))
            groups = component_groups(f, e.length)
        except (OSError, ValueError) as exc:
            click.echo(f"error: {path}: {exc}", err=True)
            summary["failures"][str(path)] = str(exc)
            continue

        write_csv(
            out / f"{stem}.spectrum.csv",
            ["rank", "sigma", "normalized"],
            [
                {"rank": i + 1, "sigma": float(s), "normalized": float(z)}
                for i, (s, z) in enumerate(zip(rep.sigmas, rep.normalized))
            ],
        )
        entry = {
            "l": e.length,
            "d": e.dim,
            "n": e.word_count,
            "rank": f.effective_rank,
            "dominance_ratio": float(rep.dominance_ratio),
            "rank_deficient": rep.rank_deficient,
            "groups": {},
        }
        profiles = {}
        for group_name, sel in zip(("primary", "subsequent", "residual"), groups):
            prof = similarity_profile(e, reconstruct(f, sel))
            profiles[group_name] = prof.per_token
            write_csv(
                out / f"{stem}.profile.{group_name}.csv",
                ["index", "label", "cosine"],
                _profile_rows(e, prof.per_token),
            )
            entry["groups"][group_name] = {
                "ranks": list(sel.ranks),
                "word_mean": prof.word_mean,
                "pad_mean": prof.pad_mean,
            }
        if plots:
            from . import plots as figs

            figs.plot_spectrum(rep.sigmas, out / f"{stem}.spectrum.png",
                               title=f"{stem}: singular value spectrum")
            figs.plot_profiles(profiles, e.word_count, out / f"{stem}.profiles.png",
                               title=f"{stem}: token similarity by component group")
        summary["inputs"][stem] = entry
        spectra.append(np.asarray(rep.sigmas))

    if spectra:
        ratios = [v["dominance_ratio"] for v in summary["inputs"].values()]
        summary["mean_dominance_ratio"] = float(np.mean(ratios))
    if len(spectra) > 1:
        width = min(len(s) for s in spectra)
        stack = np.vstack([s[:width] for s in spectra])
        mean_sigma = stack.mean(axis=0)
        write_csv(
            out / "mean_spectrum.csv",
            ["rank", "mean_sigma", "mean_normalized"],
            [
                {"rank": i + 1, "mean_sigma": float(s), "mean_normalized": float(s / mean_sigma[0])}
                for i, s in enumerate(mean_sigma)
            ],
        )
    write_json(out / "summary.json", summary, deterministic)
    if not summary["inputs"]:
        raise click.ClickException("all inputs failed")
    click.echo(f"analyzed {len(summary['inputs'])}/{len(inputs)} inputs into {out}")


@main.command()
@click.argument("input", type=click.Path(path_type=Path))
@click.option("--alpha", type=float, default=0.8, show_default=True, callback=_alpha_range,
              help="Separation strength in [0, 1].")
@click.option("--target", type=click.Path(path_type=Path), default=None,
              help="Embedding file whose word rows define the subspace to remove "
                   "(default: the input's own word rows).")
@click.option("--no-resize", is_flag=True, help="Skip rescaling the result to the input norm.")
@click.option("--method", type=click.Choice(PROJECTOR_METHODS), default="svd",
              show_default=True, help="Projector construction method.")
@click.option("--out", "-o", type=click.Path(path_type=Path), required=True)
def project(input, alpha, target, no_resize, method, out):
    """Suppress a token subspace: X' = X - alpha * X P, optionally norm-matched."""
    e = _load_or_fail(input)
    try:
        if target is not None:
            x_tilde = _load_or_fail(target).word_rows
        else:
            x_tilde = e.word_rows
        proj = build_projector(x_tilde, method=method)
        x_prime = project_separate(e.x, proj, alpha)
        if not no_resize:
            x_prime = norm_match(x_prime, e.x)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_embedding(
            EmbeddingMatrix(x_prime, e.word_count, labels=e.labels, name=e.name), out
        )
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))
    residual = frobenius_norm(x_prime @ proj.p) / frobenius_norm(e.x)
    click.echo(f"projector rank {proj.rank} ({proj.method}, {proj.source_rows} source rows)")
    click.echo(f"residual |X'P|_F / |X|_F = {residual:.6e}")
    click.echo(f"wrote {out}")


def _sweep_point(point, e, word_proj, f, lora_weights, base_out, out_dir):
    method = point["method"]
    if method == "projection":
        x_prime = project_separate(e.x, word_proj, point["alpha"])
        x_prime = norm_match(x_prime, e.x)
    elif method == "zero_words":
        x_prime = suppress_zero_words(e)
    else:
        lo, hi = point["lo_rank"], point["hi_rank"]
        keep = [i for i in range(f.k) if not lo - 1 <= i <= hi - 1]
        x_prime = reconstruct(f, ComponentSelection(tuple(keep)))

    prof = similarity_profile(e, x_prime)
    row = {
        "tag": point["tag"],
        "method": method,
        "alpha": point.get("alpha", ""),
        "lo_rank": point.get("lo_rank", ""),
        "hi_rank": point.get("hi_rank", ""),
        "residual": frobenius_norm(x_prime @ word_proj.p) / frobenius_norm(e.x),
        "norm_ratio": frobenius_norm(x_prime) / frobenius_norm(e.x),
        "word_mean": prof.word_mean,
        "pad_mean": prof.pad_mean,
        "key_delta": "",
        "value_delta": "",
    }
    if lora_weights is not None:
        out_point = forward_decor(e.x, x_prime, lora_weights)
        row["key_delta"] = frobenius_norm(out_point.keys - base_out.keys)
        row["value_delta"] = frobenius_norm(out_point.values - base_out.values)

    tag = point["tag"]
    save_embedding(
        EmbeddingMatrix(x_prime, e.word_count, labels=e.labels, name=tag),
        out_dir / f"{tag}.bin",
    )
    write_csv(
        out_dir / f"{tag}.profile.csv",
        ["index", "label", "cosine"],
        _profile_rows(e, prof.per_token),
    )
    return row


@main.command()
@click.argument("input", type=click.Path(path_type=Path))
@click.option("--alphas", default="0,0.25,0.5,0.75,0.8,1.0", show_default=True,
              callback=_parse_alphas, help="Comma-separated alpha grid for projection points.")
@click.option("--method", "methods", multiple=True,
              type=click.Choice(SUPPRESSION_METHODS), default=("projection",),
              show_default=True, help="Suppression methods to sweep (repeatable).")
@click.option("--exclude-range", "exclude_ranges", multiple=True, callback=_parse_ranges,
              help="1-based rank range LO:HI for exclude_components (repeatable).")
@click.option("--lora", type=click.Path(path_type=Path), default=None,
              help="LoRA weight file; adds dual-path key/value deltas to the report.")
@click.option("--out", "-o", type=click.Path(path_type=Path), required=True)
@click.option("--deterministic", is_flag=True)
@click.option("--plots/--no-plots", default=True, show_default=True)
def sweep(input, alphas, methods, exclude_ranges, lora, out, deterministic, plots):
    """Run suppression methods across a parameter grid and consolidate the results."""
    e = _load_or_fail(input)
    if "exclude_components" in methods and not exclude_ranges:
        exclude_ranges = DEFAULT_EXCLUDE_RANGES
    try:
        cfg = SweepConfig(alphas=alphas, methods=tuple(methods), exclude_ranges=exclude_ranges)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    points = cfg.points()
    if not points:
        raise click.UsageError("sweep grid is empty")

    try:
        word_proj = build_projector(e.word_rows, method="svd")
        f = thin_svd(e.x) if "exclude_components" in methods else None
        if f is not None:
            for lo, hi in cfg.exclude_ranges:
                if hi > f.k:
                    raise ValueError(f"rank range ({lo}, {hi}) exceeds rank count {f.k}")
        lora_weights = load_lora(lora) if lora is not None else None
        base_out = forward_standard(e.x, lora_weights) if lora_weights is not None else None
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))

    out.mkdir(parents=True, exist_ok=True)
    threads = _sweep_threads(len(points))
    try:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(
                pool.map(
                    lambda pt: _sweep_point(pt, e, word_proj, f, lora_weights, base_out, out),
                    points,
                )
            )
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))

    write_csv(
        out / "sweep.csv",
        ["tag", "method", "alpha", "lo_rank", "hi_rank", "residual", "norm_ratio",
         "word_mean", "pad_mean", "key_delta", "value_delta"],
        rows,
    )
    write_json(
        out / "sweep.json",
        {
            "input": str(input),
            "points": len(rows),
            "methods": list(cfg.methods),
            "alphas": [float(a) for a in cfg.alphas],
            "exclude_ranges": [list(r) for r in cfg.exclude_ranges],
            "threads": threads,
            "lora": str(lora) if lora else None,
        },
        deterministic,
    )
    if plots:
        from . import plots as figs

        figs.plot_sweep(rows, out / "sweep.png")
    click.echo(f"swept {len(rows)} points into {out}")


@main.command()
@click.argument("embedding", type=click.Path(path_type=Path))
@click.argument("projected", type=click.Path(path_type=Path))
@click.argument("lora_path", type=click.Path(path_type=Path, exists=True, dir_okay=False))
@click.option("--style-lora", type=click.Path(path_type=Path), default=None,
              help="Second adapter for content-style mixing (requires --style-projected).")
@click.option("--style-projected", type=click.Path(path_type=Path), default=None,
              help="Projected embedding fed to the second adapter.")
@click.option("--out", "-o", type=click.Path(path_type=Path), required=True)
@click.option("--deterministic", is_flag=True)
@click.option("--plots/--no-plots", default=True, show_default=True)
def attn(embedding, projected, lora_path, style_lora, style_projected, out, deterministic, plots):
    """Evaluate standard vs dual-path key/value computation for a LoRA layer."""
    if (style_lora is None) != (style_projected is None):
        raise click.UsageError("--style-lora and --style-projected must be given together")
    e = _load_or_fail(embedding)
    ep = _load_or_fail(projected)
    try:
        w = load_lora(lora_path)
        std = forward_standard(e.x, w)
        dual = forward_decor(e.x, ep.x, w)
        mixed = None
        if style_lora is not None:
            w_style = load_lora(style_lora)
            ep_style = _load_or_fail(style_projected)
            mixed = forward_decor_mixed(e.x, ep.x, w, ep_style.x, w_style)
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))

    out.mkdir(parents=True, exist_ok=True)
    dumps = {
        "standard.keys": std.keys,
        "standard.values": std.values,
        "decor.keys": dual.keys,
        "decor.values": dual.values,
    }
    if mixed is not None:
        dumps["mixed.keys"] = mixed.keys
        dumps["mixed.values"] = mixed.values
    for name, matrix in dumps.items():
        _save_matrix(
            out / f"{name}.bin",
            matrix,
            {"rows": int(matrix.shape[0]), "cols": int(matrix.shape[1]), "kind": name},
        )

    key_deltas = np.linalg.norm(dual.keys - std.keys, axis=1)
    value_deltas = np.linalg.norm(dual.values - std.values, axis=1)
    labels = e.labels or tuple("" for _ in range(e.length))
    write_csv(
        out / "deltas.csv",
        ["index", "label", "key_delta", "value_delta"],
        [
            {"index": i, "label": labels[i],
             "key_delta": float(kd), "value_delta": float(vd)}
            for i, (kd, vd) in enumerate(zip(key_deltas, value_deltas))
        ],
    )
    n = e.word_count
    summary = {
        "l": e.length,
        "d": e.dim,
        "d_attn": w.dim_attn,
        "rank": w.rank,
        "scale": w.scale,
        "key_delta_fro": frobenius_norm(dual.keys - std.keys),
        "value_delta_fro": frobenius_norm(dual.values - std.values),
        "word_key_delta_fro": float(np.linalg.norm(key_deltas[:n])),
        "pad_key_delta_fro": float(np.linalg.norm(key_deltas[n:])),
        "mixed": mixed is not None,
    }
    write_json(out / "attn.json", summary, deterministic)
    if plots:
        from . import plots as figs

        figs.plot_attention_deltas(key_deltas, value_deltas, n, out / "attn.png")
    click.echo(f"wrote attention report to {out}")


if __name__ == "__main__":
    main()
