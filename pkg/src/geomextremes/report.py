"""Report persistence and rendering.

A report is one structured text file carrying every field of
ExperimentReport under a versioned schema, with volatile execution details
(wall time, thread budget, versions) under a separate ``volatile`` key so
that byte-comparing everything else checks run-to-run determinism. Next to
it go plot-ready CSV tables, one per (t, m), and optionally rendered
survival and rate figures.
"""

from __future__ import annotations

import os

import numpy as np
import yaml

from .harness import ExperimentReport, empirical_survival, rate_regression
from .limits import WeibullLimit, weibull_survival


class ReportError(RuntimeError):
    """Report I/O or schema failure; the message carries the path."""


def _fmt(x: float) -> str:
    """Decimal text at 12 significant digits."""
    return f"{float(x):.12g}"


def _limit_of(report: ExperimentReport) -> WeibullLimit:
    return WeibullLimit(
        beta=report.beta,
        tau=report.tau,
        gamma=report.gamma,
        provenance=report.limit_provenance,
        se=report.limit_se,
    )


def write_report(report: ExperimentReport, path) -> list:
    """Write the report file plus one survival table per (t, m).

    Returns the list of paths written, report first. The report file keeps
    full float precision; tables are display precision.
    """
    data = {
        "schema": report.schema,
        "config": report.config,
        "model": report.model,
        "process": report.process,
        "beta": report.beta,
        "tau": report.tau,
        "gamma": report.gamma,
        "limit_provenance": report.limit_provenance,
        "limit_se": report.limit_se,
        "grid": report.grid,
        "replications": report.replications,
        "m_list": report.m_list,
        "y_grid": report.y_grid,
        "master_seed": report.master_seed,
        "results": report.results,
        "degenerate_counts": report.degenerate_counts,
        "bound_shapes": report.bound_shapes,
        "rate": report.rate,
        "volatile": report.metadata,
    }
    text = yaml.safe_dump(data, sort_keys=True, default_flow_style=None)
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write report {path}: {exc}") from exc
    written = [str(path)]
    written.extend(render_tables(report, os.path.dirname(os.path.abspath(path))))
    return written


def read_report(path) -> ExperimentReport:
    """Read a report file back; write then read round-trips equal."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ReportError(f"cannot read report {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ReportError(f"cannot parse report {path}: {exc}") from exc
    if not isinstance(data, dict) or "schema" not in data:
        raise ReportError(f"{path}: not a report file")
    schema = data["schema"]
    if schema != "geomextremes/report/v1":
        raise ReportError(f"{path}: unsupported schema {schema!r}")
    volatile = data.pop("volatile", {})
    try:
        return ExperimentReport(**data, metadata=volatile)
    except TypeError as exc:
        raise ReportError(f"{path}: malformed report: {exc}") from exc


def _survival_rows(report, entry):
    """Table rows (y, empirical, limit, gap) for one (t, m) entry."""
    lim = _limit_of(report)
    y = np.asarray(report.y_grid, dtype=float)
    emp = empirical_survival(
        entry["sample"], entry["infinite_count"], report.replications, y
    )
    ref = np.asarray(weibull_survival(lim, y, entry["m"]), dtype=float)
    return zip(y, emp, ref, emp - ref)


def render_tables(report: ExperimentReport, out_dir) -> list:
    """Write survival_t<t>_m<m>.csv per (t, m); returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for entry in report.results:
        name = f"survival_t{entry['t']:g}_m{entry['m']}.csv"
        path = os.path.join(out_dir, name)
        lines = ["y,empirical_survival,limit_survival,gap"]
        for row in _survival_rows(report, entry):
            lines.append(",".join(_fmt(v) for v in row))
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise ReportError(f"cannot write table {path}: {exc}") from exc
        written.append(path)
    return written


def _rate_points(report):
    """Recompute the per-t averaged survival gaps the rate fit used."""
    lim = _limit_of(report)
    m_rate = min(report.m_list)
    y = np.asarray(report.y_grid, dtype=float)
    ref = np.asarray(weibull_survival(lim, y, m_rate), dtype=float)
    ts, devs = [], []
    for entry in report.results:
        if entry["m"] != m_rate:
            continue
        emp = empirical_survival(
            entry["sample"], entry["infinite_count"], report.replications, y
        )
        ts.append(entry["t"])
        devs.append(abs(float(np.mean(emp - ref))))
    return np.asarray(ts), np.asarray(devs)


def render_figures(report: ExperimentReport, out_dir) -> list:
    """Render survival plots per (t, m) and, when a rate fit exists, the
    log-log deviation plot; returns the paths written."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    lim = _limit_of(report)
    written = []
    for entry in report.results:
        sample = np.asarray(entry["sample"], dtype=float)
        total = report.replications
        m = entry["m"]
        fig, ax = plt.subplots(figsize=(6, 4))
        if sample.size:
            top = float(sample[-1])
        else:
            top = float(report.y_grid[-1])
        dense = np.linspace(0.0, max(top, report.y_grid[-1]) * 1.05, 256)
        ax.plot(
            dense,
            weibull_survival(lim, dense, m),
            label="limit survival",
            color="tab:red",
        )
        if sample.size:
            steps = 1.0 - np.arange(1, sample.size + 1) / total
            ax.step(
                np.concatenate([[0.0], sample]),
                np.concatenate([[1.0], steps]),
                where="post",
                label="empirical survival",
                color="tab:blue",
            )
        ax.set_xlabel("y")
        ax.set_ylabel("survival")
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(
            f"{report.model} t={entry['t']:g} m={m} (KS {entry['ks']:.3f})"
        )
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, f"survival_t{entry['t']:g}_m{m}.png")
        try:
            fig.savefig(path, dpi=120)
        except OSError as exc:
            raise ReportError(f"cannot write figure {path}: {exc}") from exc
        finally:
            plt.close(fig)
        written.append(path)

    if report.rate is not None:
        ts, devs = _rate_points(report)
        keep = devs > 0
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.loglog(ts[keep], devs[keep], "o", label="averaged survival gap")
        slope = report.rate["slope"]
        intercept = report.rate["intercept"]
        tt = np.linspace(min(ts), max(ts), 64)
        ax.loglog(
            tt,
            np.exp(intercept) * tt**slope,
            "--",
            label=f"fit slope {slope:.2f} (R^2 {report.rate['r_squared']:.2f})",
        )
        ax.set_xlabel("t")
        ax.set_ylabel("deviation")
        ax.set_title(f"{report.model} rate of convergence")
        ax.legend()
        fig.tight_layout()
        path = os.path.join(out_dir, "rate.png")
        try:
            fig.savefig(path, dpi=120)
        except OSError as exc:
            raise ReportError(f"cannot write figure {path}: {exc}") from exc
        finally:
            plt.close(fig)
        written.append(path)
    return written
