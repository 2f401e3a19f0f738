"""On-disk formats: archive JSON with a genome sidecar, and CSV tables.

An archive is stored as two files. ``<stem>.json`` holds the grid, the
genome layout and one entry per occupied cell (in sorted cell order);
``<stem>_genomes.npy`` holds a float64 matrix whose row ``genome_ref`` is the
flattened team genome of that cell. Floats are written with ``repr`` so a
load/save round trip reproduces both files byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np

from mixme.archive import Archive, GridConfig, descriptor_to_cell
from mixme.policy import AgentSpec, MlpSpec, VectorSpec, flatten, unflatten

FORMAT = "mixme-archive/1"
PathLike = Union[str, Path]


class ArchiveFormatError(ValueError):
    pass


def _fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_json(path: PathLike, doc: Any) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


# -- genome layout -------------------------------------------------------------


def layout_entry(index: int, spec: AgentSpec) -> dict:
    if isinstance(spec, MlpSpec):
        return {
            "agent_index": index,
            "kind": "mlp",
            "input_dim": spec.input_dim,
            "hidden_dims": list(spec.hidden_dims),
            "output_dim": spec.output_dim,
            "bounds": list(spec.bounds),
        }
    return {"agent_index": index, "kind": "vector", "size": spec.size, "bounds": list(spec.bounds)}


def spec_from_layout(entry: dict) -> AgentSpec:
    try:
        kind = entry["kind"]
        bounds = tuple(entry["bounds"])
        if kind == "mlp":
            return MlpSpec(int(entry["input_dim"]), int(entry["output_dim"]), tuple(entry["hidden_dims"]), bounds)
        if kind == "vector":
            return VectorSpec(int(entry["size"]), bounds)
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchiveFormatError(f"bad genome layout entry {entry!r}: {exc}") from None
    raise ArchiveFormatError(f"unknown agent kind {kind!r}")


# -- archive -------------------------------------------------------------------


def genome_path(json_path: PathLike) -> Path:
    p = Path(json_path)
    return p.with_name(p.stem + "_genomes.npy")


def save_archive(path: PathLike, archive: Archive, specs: Sequence[AgentSpec]) -> None:
    """Write ``path`` (JSON) and its ``_genomes.npy`` sidecar."""
    path = Path(path)
    width = sum(s.param_count for s in specs)
    cells = []
    rows = []
    for ref, (idx, elite) in enumerate(archive):
        if elite.genome.specs != tuple(specs):
            raise ValueError(f"elite in cell {idx} does not match the given genome layout")
        cells.append(
            {
                "index": list(idx),
                "fitness": elite.fitness,
                "descriptor": [float(v) for v in elite.descriptor],
                "genome_ref": ref,
            }
        )
        rows.append(flatten(elite.genome))
    genomes = np.array(rows, dtype=np.float64).reshape(len(rows), width)
    cfg = archive.config
    doc = {
        "format": FORMAT,
        "grid_dims": list(cfg.dims),
        "bounds": {"lower": list(cfg.lower_bounds), "upper": list(cfg.upper_bounds)},
        "genome_layout": [layout_entry(i, s) for i, s in enumerate(specs)],
        "genome_file": genome_path(path).name,
        "cells": cells,
    }
    np.save(genome_path(path), genomes)
    write_json(path, doc)


def _require(doc: dict, key: str, kind: type) -> Any:
    if key not in doc:
        raise ArchiveFormatError(f"missing key {key!r}")
    if not isinstance(doc[key], kind):
        raise ArchiveFormatError(f"{key!r} must be a {kind.__name__}")
    return doc[key]


def load_archive(path: PathLike) -> tuple[Archive, tuple[AgentSpec, ...]]:
    """Inverse of :func:`save_archive`; raises ArchiveFormatError on any schema mismatch."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ArchiveFormatError(f"cannot read archive {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ArchiveFormatError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ArchiveFormatError(f"{path} is not a {FORMAT} document")
    bounds = _require(doc, "bounds", dict)
    try:
        config = GridConfig(tuple(_require(doc, "grid_dims", list)), tuple(bounds["lower"]), tuple(bounds["upper"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchiveFormatError(f"bad grid definition: {exc}") from None
    layout = _require(doc, "genome_layout", list)
    specs = tuple(spec_from_layout(e) for e in layout)
    if [e.get("agent_index") for e in layout] != list(range(len(layout))):
        raise ArchiveFormatError("genome_layout must list agents 0..N-1 in order")
    cells = _require(doc, "cells", list)
    gpath = path.with_name(_require(doc, "genome_file", str))
    try:
        genomes = np.load(gpath, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise ArchiveFormatError(f"cannot read genome file {gpath}: {exc}") from None
    width = sum(s.param_count for s in specs)
    if genomes.dtype != np.float64 or genomes.shape != (len(cells), width):
        raise ArchiveFormatError(f"genome matrix must be float64 of shape {(len(cells), width)}, got {genomes.shape}")

    archive = Archive(config)
    for cell in cells:
        try:
            idx = tuple(int(i) for i in cell["index"])
            fitness = float(cell["fitness"])
            descriptor = np.array(cell["descriptor"], dtype=np.float64)
            ref = int(cell["genome_ref"])
            genome = unflatten(genomes[ref], specs)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ArchiveFormatError(f"bad cell entry {cell!r}: {exc}") from None
        if not math.isfinite(fitness):
            raise ArchiveFormatError(f"cell {idx} has non-finite fitness")
        if descriptor.shape != (config.n_axes,) or descriptor_to_cell(descriptor, config) != idx:
            raise ArchiveFormatError(f"cell {idx} descriptor does not map to its index")
        if idx in archive.cells:
            raise ArchiveFormatError(f"cell {idx} listed twice")
        archive.try_insert(genome, fitness, descriptor)
    return archive, specs


# -- tables --------------------------------------------------------------------

METRICS_HEADER = ("iteration", "env_interactions", "max_fitness", "coverage", "qd_score")
OPERATOR_HEADER = ("iteration", "operator", "offspring", "inserted_empty", "replaced", "rejected")
GRID_SEARCH_HEADER = ("sigma_iso", "sigma_line", "eta", "seed", "qd_score")
GRID_MEANS_HEADER = ("sigma_iso", "sigma_line", "eta", "mean_qd_score")
SWEEP_HEADER = ("scenario", "value", "adapted_best_fitness")


def heatmap_header(n_axes: int) -> list[str]:
    return [f"index_{k}" for k in range(n_axes)] + [f"descriptor_{k}" for k in range(n_axes)] + ["fitness"]


def write_heatmap_csv(path: PathLike, archive: Archive) -> None:
    """One row per occupied cell; an empty archive yields the header alone."""
    rows = ([*idx, *(float(v) for v in e.descriptor), e.fitness] for idx, e in archive)
    write_csv(path, heatmap_header(archive.config.n_axes), rows)


def read_metrics_csv(path: PathLike) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- runs ----------------------------------------------------------------------

ARCHIVE_FILE = "archive.json"
CONFIG_FILE = "config.json"
METRICS_FILE = "metrics.csv"
OPERATOR_FILE = "operator_stats.csv"
SUMMARY_FILE = "summary.json"


def save_run(out_dir: PathLike, artifacts, specs: Sequence[AgentSpec]) -> Path:
    """Persist a :class:`~mixme.harness.RunArtifacts` into ``out_dir``."""
    from mixme.config import config_to_dict

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / CONFIG_FILE, config_to_dict(artifacts.config))
    write_csv(
        out / METRICS_FILE,
        METRICS_HEADER,
        ((r.iteration, r.env_interactions, r.max_fitness, r.coverage, r.qd_score) for r in artifacts.metrics),
    )
    write_csv(
        out / OPERATOR_FILE,
        OPERATOR_HEADER,
        ((s.iteration, s.operator, s.offspring, s.inserted_empty, s.replaced, s.rejected) for s in artifacts.operator_stats),
    )
    save_archive(out / ARCHIVE_FILE, artifacts.archive, specs)
    final = artifacts.metrics[-1]
    write_json(
        out / SUMMARY_FILE,
        {
            "iterations": final.iteration,
            "env_interactions": final.env_interactions,
            "env_timesteps": artifacts.env_timesteps,
            "max_fitness": final.max_fitness,
            "coverage": final.coverage,
            "qd_score": final.qd_score,
        },
    )
    return out


def load_run(run_dir: PathLike):
    """Return ``(config, archive, specs)`` of a saved run directory."""
    from mixme.config import ConfigError, config_from_dict

    run = Path(run_dir)
    try:
        doc = json.loads((run / CONFIG_FILE).read_text())
    except OSError as exc:
        raise ArchiveFormatError(f"cannot read {run / CONFIG_FILE}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ArchiveFormatError(f"{run / CONFIG_FILE} is not valid JSON: {exc}") from None
    try:
        config = config_from_dict(doc)
    except ConfigError as exc:
        raise ArchiveFormatError(f"{run / CONFIG_FILE}: {exc}") from None
    archive, specs = load_archive(run / ARCHIVE_FILE)
    return config, archive, specs
