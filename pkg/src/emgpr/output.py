"""CSV and SVG emission for experiment results.

CSV files carry one header row; floats are printed with %.17g so a
re-parse reproduces them exactly.  Plots are rendered directly to SVG
through the Agg-free matplotlib SVG backend (no display needed).
"""

from __future__ import annotations

import os

import numpy as np

from .experiments import EntropyResult, SliceResult, SurfaceResult, SweepResult


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_rows(path, header, rows):
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise OSError(f"output directory does not exist: {directory!r}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as err:
        raise OSError(f"cannot write CSV to {path!r}: {err}") from err
    return path


def emit_csv(result, path):
    """Write one result object to CSV; returns the list of files written.

    Slice results produce one file per sampled plane, suffixed with the
    plane name; other results map to a single file.
    """
    if isinstance(result, SliceResult):
        base, ext = os.path.splitext(path)
        ext = ext or ".csv"
        written = []
        for name in result.planes:
            written.append(_write_rows(f"{base}_{name}{ext}", result.schema, result.table(name)))
        return written
    return [_write_rows(path, result.schema, result.table())]


def read_csv(path):
    """Parse a CSV written by ``emit_csv`` back into (header, rows of
    floats-or-strings)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = tuple(lines[0].split(","))
    rows = []
    for ln in lines[1:]:
        row = []
        for tok in ln.split(","):
            try:
                row.append(float(tok))
            except ValueError:
                row.append(tok)
        rows.append(tuple(row))
    return header, rows


def _matplotlib():
    import matplotlib

    matplotlib.use("svg", force=True)
    import matplotlib.pyplot as plt

    return plt


def emit_svg_plot(result, path):
    """Render a result-appropriate SVG figure; returns the path."""
    plt = _matplotlib()
    if isinstance(result, SweepResult):
        fig, ax = plt.subplots(figsize=(6.5, 4.5))
        names = sorted({row["estimator"] for row in result.rows})
        for name in names:
            pts = sorted(
                [(r["snr_db"], r["nmse_mean"]) for r in result.rows if r["estimator"] == name]
            )
            ax.semilogy([p[0] for p in pts], [p[1] for p in pts], marker="o", label=name)
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("NMSE")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
    elif isinstance(result, SurfaceResult):
        fig, axes = plt.subplots(1, 2, figsize=(9.5, 4.2))
        for ax, sign, label in ((axes[0], 1, "mu_x > 0"), (axes[1], -1, "mu_x < 0")):
            xs, zs, L = result.grid(sign)
            pcm = ax.pcolormesh(np.log10(zs), np.log10(xs), L, shading="auto")
            ax.set_xlabel("lg mu_z")
            ax.set_ylabel("lg |mu_x|")
            ax.set_title(label)
            fig.colorbar(pcm, ax=ax)
    elif isinstance(result, EntropyResult):
        fig, ax = plt.subplots(figsize=(6.5, 4.5))
        for spacing in sorted({r["spacing"] for r in result.rows}):
            mu, H = result.curve(spacing)
            ax.plot(mu, H, label=f"d = {spacing:g} wavelengths")
        ax.set_xlabel("concentration |mu|")
        ax.set_ylabel("entropy log det(pi e K)")
        ax.grid(True, alpha=0.3)
        ax.legend()
    elif isinstance(result, SliceResult):
        n = len(result.planes)
        fig, axes = plt.subplots(2, n, figsize=(4.2 * n, 7.5), squeeze=False)
        for col, (name, (ax1, ax2, K)) in enumerate(result.planes.items()):
            for row, (part, data) in enumerate((("re", K.real), ("im", K.imag))):
                ax = axes[row][col]
                pcm = ax.pcolormesh(ax2, ax1, data, shading="auto")
                ax.set_title(f"{name} ({part})")
                fig.colorbar(pcm, ax=ax)
    else:
        raise TypeError(f"no plot defined for {type(result).__name__}")
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    except OSError as err:
        raise OSError(f"cannot write SVG to {path!r}: {err}") from err
    finally:
        plt.close(fig)
    return path
