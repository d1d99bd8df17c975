"""Directory-based persistence for models, solver results, sample sets,
and propagation traces.

A model directory holds j_markov.csv, sigma_residual.csv, and meta.json
(lambda_star plus any generator metadata). A result directory holds
j_hat.csv, sigma_r.csv, and diagnostics.json. Matrices are CSV at full
repr precision, so save/load round-trips are exact.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .errors import MalformedCsv, PreconditionViolated
from .model import DecompositionModel, validate_model
from .sampling import SampleSet
from .symmat import read_matrix_csv, write_matrix_csv

SCHEMA_VERSION = 1


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def save_model(m, dirpath, extra_meta=None):
    """Write a model to a directory; returns the directory path."""
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(m.j_markov, d / "j_markov.csv")
    write_matrix_csv(m.sigma_residual, d / "sigma_residual.csv")
    meta = {
        "schema_version": SCHEMA_VERSION,
        "dim": m.j_markov.dim,
        "lambda_star": m.lambda_star,
        "mean": [float(x) for x in np.asarray(m.mean)],
    }
    if extra_meta:
        meta.update(extra_meta)
    write_json(d / "meta.json", meta)
    return d


def load_model(dirpath):
    """Read a model directory back; revalidates the decomposition."""
    d = Path(dirpath)
    j = read_matrix_csv(d / "j_markov.csv")
    r = read_matrix_csv(d / "sigma_residual.csv")
    meta = _read_json(d / "meta.json")
    mean = np.asarray(meta.get("mean", np.zeros(j.dim)), dtype=float)
    m = DecompositionModel(
        j_markov=j, sigma_residual=r, lambda_star=float(meta["lambda_star"]),
        mean=mean,
    )
    violations = validate_model(m)
    if violations:
        raise PreconditionViolated(
            "loaded model fails validation: " + "; ".join(violations)
        )
    return m


def save_result(result, dirpath, extra_diagnostics=None):
    """Write a solve result to a directory.

    diagnostics.json records the scalar certificates plus the active
    clip set (the pairs actually carrying residual mass).
    """
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(result.j_hat, d / "j_hat.csv")
    write_matrix_csv(result.sigma_r_hat, d / "sigma_r.csv")
    r = np.asarray(result.sigma_r_hat)
    clip_pairs = [
        [int(i), int(j)] for i, j in zip(*np.nonzero(np.triu(r != 0.0, k=1)))
    ]
    diagnostics = {
        "schema_version": SCHEMA_VERSION,
        "duality_gap": result.duality_gap,
        "kkt_residual": result.kkt_residual,
        "iterations": result.iterations,
        "converged": result.converged,
        "overall_pd": result.overall_pd,
        "min_eig_overall": result.min_eig_overall,
        "clip_pairs": clip_pairs,
        "sign_conflicts": [list(pair) for pair in result.sign_conflicts],
    }
    if extra_diagnostics:
        diagnostics.update(extra_diagnostics)
    write_json(d / "diagnostics.json", diagnostics)
    return d


def load_result(dirpath):
    """Read back (j_hat, sigma_r, diagnostics dict)."""
    d = Path(dirpath)
    j_hat = read_matrix_csv(d / "j_hat.csv")
    sigma_r = read_matrix_csv(d / "sigma_r.csv")
    diagnostics = _read_json(d / "diagnostics.json")
    return j_hat, sigma_r, diagnostics


def save_samples(samples, dirpath):
    """Write sample rows to data.csv plus meta.json."""
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    data = np.asarray(samples.data)
    with open(d / "data.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x%d" % k for k in range(data.shape[1])])
        for row in data:
            writer.writerow([repr(float(v)) for v in row])
    meta = {
        "schema_version": SCHEMA_VERSION,
        "n": int(data.shape[0]),
        "p": int(data.shape[1]),
        "seed": samples.seed,
        "model_meta": samples.model_meta,
    }
    write_json(d / "meta.json", meta)
    return d


def load_samples(dirpath):
    d = Path(dirpath)
    meta = _read_json(d / "meta.json")
    with open(d / "data.csv", "r", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise MalformedCsv("sample file %s has no data rows" % (d / "data.csv"))
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return SampleSet(data=data, seed=meta.get("seed"),
                     model_meta=meta.get("model_meta", {}))


def write_trace_csv(trace, path):
    """One row per propagation iteration: iteration, mean_error, var_error."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "mean_error", "var_error"])
        for k in range(trace.iterations_run):
            writer.writerow(
                [k + 1, repr(float(trace.mean_errors[k])),
                 repr(float(trace.var_errors[k]))]
            )
    return Path(path)
