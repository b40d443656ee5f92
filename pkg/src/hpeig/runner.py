"""Adaptive study driver: runs a benchmark and writes a CSV log.

One CSV row per adaptive step with the cluster values, per-mode
relative errors against the reference spectrum, per-mode indicator
totals, the value-weighted estimator and error totals, and wall time.
The clock is injectable so reruns with a fake clock are byte
identical.
"""

import csv
import os
import time

import numpy as np

from .adaptivity import adapt_loop
from .estimator import kahan_sum
from .problems import problem
from .spectra import registry
from .vtkio import write_vtk


def csv_header(m):
    """Column names for a cluster of size m."""
    cols = ["step", "dofs", "sqrt_dofs"]
    cols += [f"lambda_{i + 1}" for i in range(m)]
    cols += [f"relerr_{i + 1}" for i in range(m)]
    cols += [f"eps2_{i + 1}" for i in range(m)]
    cols += ["total_est", "total_err", "effectivity", "seconds"]
    return cols


def _fmt(x):
    return f"{float(x):.17g}"


def study_rows(record, refs, seconds):
    """Format one ConvergenceRecord as a CSV row (list of strings)."""
    values = record.cluster.values
    field = record.field
    row = [str(record.step), str(record.n_dofs), _fmt(np.sqrt(record.n_dofs))]
    row += [_fmt(v) for v in values]
    rel = []
    rel_cells = []
    for i, v in enumerate(values):
        if refs is None or not field.included[i] or abs(refs[i]) < 1e-300:
            rel_cells.append("")
        else:
            r = (v - refs[i]) / v
            rel.append(r)
            rel_cells.append(_fmt(r))
    row += rel_cells
    row += [_fmt(e) for e in field.mode_totals]
    row.append(_fmt(field.total))
    if rel:
        total_err = kahan_sum(np.asarray(rel))
        row.append(_fmt(total_err))
        row.append(_fmt(total_err / field.total) if field.total > 0 else "")
    else:
        row += ["", ""]
    row.append(_fmt(seconds))
    return row


def run_study(setup, out_path=None, vtk_dir=None, clock=None):
    """Run a configured study; returns (records, rows).

    setup is a RunSetup; out_path, when given, receives the CSV log
    and vtk_dir one mesh snapshot per step.  clock defaults to
    time.perf_counter.
    """
    clock = clock or time.perf_counter
    spec = problem(setup.problem_key)
    mesh = spec.mesh(setup.initial_cells)
    refs, _ = registry(spec.reference).flat(setup.config.m)
    records, rows = [], []
    last = clock()
    for record in adapt_loop(mesh, spec.coefficients, spec.dirichlet_tags,
                             setup.config):
        now = clock()
        rows.append(study_rows(record, refs, now - last))
        last = now
        records.append(record)
        if vtk_dir is not None:
            os.makedirs(vtk_dir, exist_ok=True)
            write_vtk(os.path.join(vtk_dir, f"step_{record.step:03d}.vtk"),
                      record.handler.mesh,
                      {"region": record.handler.mesh.region,
                       "degree": record.handler.degrees,
                       "indicator": record.field.element_totals})
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(csv_header(setup.config.m))
            writer.writerows(rows)
    return records, rows
