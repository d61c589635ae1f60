import csv
import glob
import json
import os
import re
from typing import Any, Dict, List, Optional

from enforce_typing import enforce_types

from util.scenariosim import ScenarioSummary, TraceRow

PED_COLUMNS = ["x", "y", "dist", "trust", "gamma", "h"]
DYNAMICS_COLUMNS = ["step", "monotone", "moving_average", "memoryless"]


# ========================================================================
# trace csvs


@enforce_types
def traceColumns(n_peds: int) -> List[str]:
    cols = ["step", "time_s", "ego_x", "ego_y", "u_x", "u_y", "ref_x", "ref_y"]
    for j in range(n_peds):
        cols += [f"ped{j}_{c}" for c in PED_COLUMNS]
    cols += ["min_cbf_residual", "solver_status", "solve_time_s"]
    return cols


@enforce_types
def saveTraceCsv(
    trace: List[TraceRow], n_peds: int, csv_dir: str, label: str, timing: bool = False
):
    """
    @description
      Save one run's trace, one row per executed step

    @arguments
      trace -- list of TraceRow
      n_peds -- number of pedestrians (fixes the column set, even for an empty trace)
      csv_dir -- directory that holds csv files
      label -- run label, eg 'run' or 'horizon=4'
      timing -- if False, leave solve_time_s empty so reruns are byte-identical
    """
    assert os.path.exists(csv_dir), csv_dir
    csv_file = traceCsvFilename(csv_dir, label)
    assert not os.path.exists(csv_file), csv_file
    with open(csv_file, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(traceColumns(n_peds))
        for r in trace:
            assert len(r.peds) == n_peds, (len(r.peds), n_peds)
            row: List[Any] = [r.step, repr(r.time)]
            row += [repr(v) for v in r.ego + r.u + r.u_ref]
            for p in r.peds:
                row += [repr(v) for v in p.position + (p.dist, p.trust, p.gamma, p.h)]
            row.append("" if r.min_cbf_residual is None else repr(r.min_cbf_residual))
            row.append(r.status)
            row.append(repr(r.solve_time) if timing else "")
            writer.writerow(row)
    print(f"Created {csv_file}")


@enforce_types
def loadTraceCsv(csv_dir: str, label: str) -> List[Dict[str, str]]:
    """Rows as dicts of [column] : raw string cell"""
    csv_file = traceCsvFilename(csv_dir, label)
    with open(csv_file, "r", newline="") as f:
        rows = list(csv.DictReader(f))
    print(f"Loaded {csv_file}")
    return rows


@enforce_types
def traceCsvFilenames(csv_dir: str) -> List[str]:
    """Returns a list of trace filenames in this directory"""
    return sorted(glob.glob(os.path.join(csv_dir, "trace-*.csv")))


@enforce_types
def traceCsvFilename(csv_dir: str, label: str) -> str:
    f = f"trace-{label}.csv"
    return os.path.join(csv_dir, f)


@enforce_types
def labelForTraceCsv(filename: str) -> str:
    """Returns label, given a filename like 'path/trace-horizon=4.csv'"""
    base = os.path.basename(filename)
    m = re.fullmatch(r"trace-(.+)\.csv", base)
    assert m is not None, filename
    return m.group(1)


# ========================================================================
# summary and comparison json


@enforce_types
def summaryToDict(summary: ScenarioSummary, timing: bool = False) -> Dict[str, Any]:
    return {
        "min_dist_per_ped": list(summary.min_dist_per_ped),
        "steps_to_goal": summary.steps_to_goal,
        "violations": summary.violations,
        "fallback_steps": summary.fallback_steps,
        "total_solve_time_s": summary.total_solve_time_s if timing else None,
    }


@enforce_types
def saveSummaryJson(
    summary: ScenarioSummary, json_dir: str, label: str, timing: bool = False
):
    assert os.path.exists(json_dir), json_dir
    json_file = summaryJsonFilename(json_dir, label)
    assert not os.path.exists(json_file), json_file
    _dumpJson(summaryToDict(summary, timing), json_file)
    print(f"Created {json_file}")


@enforce_types
def loadSummaryJson(json_dir: str, label: str) -> Dict[str, Any]:
    json_file = summaryJsonFilename(json_dir, label)
    with open(json_file, "r") as f:
        d = json.load(f)
    print(f"Loaded {json_file}")
    return d


@enforce_types
def summaryJsonFilename(json_dir: str, label: str) -> str:
    return os.path.join(json_dir, f"summary-{label}.json")


@enforce_types
def saveComparisonJson(
    summaries: Dict[str, ScenarioSummary],
    distances: Dict[str, Dict[str, List[float]]],
    json_dir: str,
    param: Optional[str] = None,
    timing: bool = False,
):
    """
    @description
      Save the sweep-level comparison file

    @arguments
      summaries -- dict of [label] : ScenarioSummary
      distances -- dict of [label][ped{j}] : distance at each step
      json_dir -- output directory
      param -- swept parameter name, or None for a single run
    """
    assert os.path.exists(json_dir), json_dir
    assert set(summaries) == set(distances), "labels must match"
    json_file = comparisonJsonFilename(json_dir)
    assert not os.path.exists(json_file), json_file
    runs = {}
    for label, summary in summaries.items():
        d = summaryToDict(summary, timing)
        d["distance_series"] = distances[label]
        runs[label] = d
    _dumpJson({"param": param, "runs": runs}, json_file)
    print(f"Created {json_file}")


@enforce_types
def comparisonJsonFilename(json_dir: str) -> str:
    return os.path.join(json_dir, "comparison.json")


def _dumpJson(d: dict, json_file: str):
    with open(json_file, "w") as f:
        json.dump(d, f, indent=2, allow_nan=False)
        f.write("\n")


# ========================================================================
# trust dynamics csvs


@enforce_types
def saveDynamicsCsv(series: Dict[str, list], csv_dir: str, ped_id: str):
    """
    @description
      Save trust-vs-step under each dynamics preset, for one pedestrian

    @arguments
      series -- dict of [preset name] : trust at each step (None = not yet
        observed, written as an empty cell); equal lengths
      csv_dir -- output directory
      ped_id -- pedestrian identifier
    """
    assert os.path.exists(csv_dir), csv_dir
    assert sorted(series) == sorted(DYNAMICS_COLUMNS[1:]), sorted(series)
    n = {len(v) for v in series.values()}
    assert len(n) == 1, "series lengths differ"
    csv_file = dynamicsCsvFilename(csv_dir, ped_id)
    assert not os.path.exists(csv_file), csv_file
    with open(csv_file, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(DYNAMICS_COLUMNS)
        for step in range(n.pop()):
            row = [series[c][step] for c in DYNAMICS_COLUMNS[1:]]
            writer.writerow([step] + ["" if v is None else repr(v) for v in row])
    print(f"Created {csv_file}")


@enforce_types
def dynamicsCsvFilename(csv_dir: str, ped_id: str) -> str:
    return os.path.join(csv_dir, f"dynamics-{ped_id}.csv")
