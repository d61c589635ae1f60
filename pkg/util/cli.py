"""
Sub-command dispatch for the `trusttool` script.

Each do_X takes the argument list after the sub-command name and returns
a process exit code: 0 success, 1 strict safety failure, 2 bad config or I/O.
"""
# pylint: disable=logging-fstring-interpolation
import argparse
from dataclasses import dataclass, replace
import os
from typing import Dict, List, Optional, Tuple

from enforce_typing import enforce_types

from util import configfile, csvs
from util.confidence import ScriptedConfidenceProvider
from util.errors import ConfigError
from util.logger import LOG_LEVELS, logger, setLogLevel
from util.scenariosim import ScenarioConfig, ScenarioSummary, distanceSeries, runScenario
from util.trustengine import dynamicsPresets, trustTrajectory

EXIT_OK, EXIT_UNSAFE, EXIT_BAD_INPUT = 0, 1, 2

HELP_MAIN = """Usage: trusttool run|sweep|dynamics|help ..

  trusttool run <config> [--out DIR] - run one scenario
  trusttool sweep <config> --param NAME --values v1,v2,.. [--out DIR] - sweep one parameter
  trusttool dynamics <config> [--out DIR] - trust under each dynamics preset
  trusttool help - this message

Common flags for run and sweep:
  --strict - exit 1 if any run breaches the safety radius or only ever fell back
  --trust-decimation N - update estimated trust every N steps
  --timing - record solve times (output is then no longer byte-reproducible)
  --log-level LEVEL - one of DEBUG, INFO, WARNING, ERROR

Sweepable parameters: ped<j>_trust, horizon, gamma_ini, delta, lambda
"""

EFFECTIVE_CONFIG = "effective-config.yaml"


@enforce_types
@dataclass(frozen=True)
class RunManifest:
    """
    What to run and where to write it. Runs are deterministic, so there is
    no seed: the same manifest always produces the same files.
    """

    config_path: str
    out_dir: str
    param: Optional[str] = None
    values: Tuple[float, ...] = ()
    strict: bool = False
    timing: bool = False
    trust_decimation: Optional[int] = None

    def __post_init__(self):
        if self.param is not None and not _isSweepable(self.param):
            raise ConfigError(
                f"can't sweep '{self.param}'; choose from"
                f" {configfile.SWEEPABLE} or ped<j>_trust"
            )
        if self.values and self.param is None:
            raise ConfigError("sweep values given without a parameter")
        labels = self.labels()
        if len(set(labels)) != len(labels):
            repeated = sorted({label for label in labels if labels.count(label) > 1})
            raise ConfigError(f"sweep values must be distinct, got repeats {repeated}")
        if self.trust_decimation is not None and self.trust_decimation < 1:
            raise ConfigError(
                f"trust_decimation must be >= 1, got {self.trust_decimation}"
            )

    @property
    def is_sweep(self) -> bool:
        return self.param is not None and len(self.values) > 0

    def labels(self) -> List[str]:
        if not self.is_sweep:
            return ["run"]
        return [runLabel(self.param, v) for v in self.values]  # type: ignore[arg-type]


@enforce_types
def runLabel(param: str, value: float) -> str:
    return f"{param}={value:g}"


@enforce_types
def run(manifest: RunManifest) -> int:
    """
    @description
      Execute every run in the manifest and write its files.

    @return
      exit_code -- 0, or 1 if strict and some run was unsafe
    """
    config = configfile.parseConfig(manifest.config_path)
    if manifest.trust_decimation is not None:
        config = replace(config, trust_decimation=manifest.trust_decimation)

    labels = manifest.labels()
    if manifest.is_sweep:
        configs = [
            configfile.sweptConfig(config, manifest.param, v)  # type: ignore[arg-type]
            for v in manifest.values
        ]
    else:
        configs = [config]

    out_dir = manifest.out_dir
    os.makedirs(out_dir, exist_ok=True)
    _checkFresh(_outputFiles(out_dir, labels))
    configfile.dumpEffectiveConfig(config, os.path.join(out_dir, EFFECTIVE_CONFIG))

    summaries: Dict[str, ScenarioSummary] = {}
    distances: Dict[str, Dict[str, List[float]]] = {}
    unsafe = []
    for label, c in zip(labels, configs):
        logger.info(f"run '{label}': begin")
        trace, summary = runScenario(c)
        csvs.saveTraceCsv(trace, len(c.pedestrians), out_dir, label, manifest.timing)
        csvs.saveSummaryJson(summary, out_dir, label, manifest.timing)
        summaries[label] = summary
        distances[label] = distanceSeries(trace)
        if isUnsafe(summary):
            logger.warning(
                f"run '{label}': violations={summary.violations}"
                f", fallback_steps={summary.fallback_steps}/{summary.steps}"
            )
            unsafe.append(label)

    csvs.saveComparisonJson(
        summaries,
        distances,
        out_dir,
        manifest.param if manifest.is_sweep else None,
        manifest.timing,
    )

    if manifest.strict and unsafe:
        logger.error(f"strict: unsafe runs {unsafe}")
        return EXIT_UNSAFE
    return EXIT_OK


@enforce_types
def isUnsafe(summary: ScenarioSummary) -> bool:
    """Any step inside the safety radius, or every step a fallback"""
    all_fallback = summary.steps > 0 and summary.fallback_steps == summary.steps
    return summary.violations > 0 or all_fallback


@enforce_types
def dynamicsSeries(config: ScenarioConfig) -> Dict[str, Dict[str, list]]:
    """
    @description
      Trust of every scripted pedestrian under each dynamics preset,
      with the config's trait weights and trait parameters.

    @return
      series -- dict of [ped_id][preset name] : trust at each step, None
        until first observed
    """
    weights, traits = config.traitWeights(), config.traitParams()
    presets = dynamicsPresets()
    series: Dict[str, Dict[str, list]] = {}
    for ped_id, ped in zip(config.pedIds(), config.pedestrians):
        if ped.script is None:
            continue
        n_steps = max(e.last for e in ped.script.entries) + 1 if ped.script.entries else 0
        provider = ScriptedConfidenceProvider(ped.script)
        seq = [provider.confidencesAt(step) for step in range(n_steps)]
        series[ped_id] = {
            name: trustTrajectory(seq, weights, dynamics, traits)
            for name, dynamics in presets.items()
        }
    return series


# ========================================================================
# sub-commands


def do_help() -> int:
    print(HELP_MAIN)
    return EXIT_OK


def do_run(args: List[str]) -> int:
    parser = _parser("run", "Run one scenario")
    _addRunFlags(parser)
    ns = parser.parse_args(args)
    setLogLevel(ns.log_level)
    manifest = RunManifest(
        config_path=ns.config,
        out_dir=ns.out,
        strict=ns.strict,
        timing=ns.timing,
        trust_decimation=ns.trust_decimation,
    )
    return run(manifest)


def do_sweep(args: List[str]) -> int:
    parser = _parser("sweep", "Run one scenario per value of a parameter")
    _addRunFlags(parser)
    parser.add_argument("--param", required=True, help="parameter to sweep")
    parser.add_argument(
        "--values", required=True, help="comma-separated values, eg 0,0.5,1"
    )
    ns = parser.parse_args(args)
    setLogLevel(ns.log_level)
    manifest = RunManifest(
        config_path=ns.config,
        out_dir=ns.out,
        param=ns.param,
        values=parseValues(ns.values),
        strict=ns.strict,
        timing=ns.timing,
        trust_decimation=ns.trust_decimation,
    )
    return run(manifest)


def do_dynamics(args: List[str]) -> int:
    parser = _parser("dynamics", "Trust of scripted pedestrians under each preset")
    parser.add_argument("--log-level", default="INFO", choices=LOG_LEVELS)
    ns = parser.parse_args(args)
    setLogLevel(ns.log_level)

    config = configfile.parseConfig(ns.config)
    series = dynamicsSeries(config)
    if not series:
        logger.warning(f"{ns.config}: no scripted pedestrians; nothing to write")
        return EXIT_OK
    os.makedirs(ns.out, exist_ok=True)
    _checkFresh([csvs.dynamicsCsvFilename(ns.out, ped_id) for ped_id in series])
    for ped_id, ped_series in series.items():
        csvs.saveDynamicsCsv(ped_series, ns.out, ped_id)
    return EXIT_OK


def do_main(argv: List[str]) -> int:
    """
    @arguments
      argv -- command line without the program name

    @return
      exit_code -- int
    """
    if not argv or argv[0] in ("help", "-h", "--help"):
        return do_help()

    cmd, args = argv[0], argv[1:]
    funcs = {"run": do_run, "sweep": do_sweep, "dynamics": do_dynamics}
    if cmd not in funcs:
        print(f"Unknown command '{cmd}'\n")
        do_help()
        return EXIT_BAD_INPUT

    try:
        return funcs[cmd](args)
    except SystemExit as e:  # argparse
        return EXIT_OK if e.code in (0, None) else EXIT_BAD_INPUT
    except ValueError as e:
        logger.error(f"{cmd}: {e}")
        return EXIT_BAD_INPUT
    except OSError as e:
        logger.error(f"{cmd}: I/O error: {e}")
        return EXIT_BAD_INPUT


# ========================================================================
# helpers


@enforce_types
def parseValues(s: str) -> Tuple[float, ...]:
    """'0,0.25,1' -> (0.0, 0.25, 1.0). Empty string -> ()"""
    tokens = [tok.strip() for tok in s.split(",") if tok.strip()]
    try:
        return tuple(float(tok) for tok in tokens)
    except ValueError as e:
        raise ConfigError(f"--values: {e}") from e


def _isSweepable(param: str) -> bool:
    if param in configfile.SWEEPABLE:
        return True
    middle = param[len("ped") : -len("_trust")]
    return param.startswith("ped") and param.endswith("_trust") and middle.isdigit()


def _parser(cmd: str, description: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=f"trusttool {cmd}", description=description)
    parser.add_argument("config", help="scenario config file (YAML)")
    parser.add_argument("--out", default=".", help="output directory")
    return parser


def _addRunFlags(parser: argparse.ArgumentParser):
    parser.add_argument("--strict", action="store_true")
    parser.add_argument("--timing", action="store_true")
    parser.add_argument("--trust-decimation", type=int, default=None)
    parser.add_argument("--log-level", default="INFO", choices=LOG_LEVELS)


def _outputFiles(out_dir: str, labels: List[str]) -> List[str]:
    files = [os.path.join(out_dir, EFFECTIVE_CONFIG), csvs.comparisonJsonFilename(out_dir)]
    for label in labels:
        files.append(csvs.traceCsvFilename(out_dir, label))
        files.append(csvs.summaryJsonFilename(out_dir, label))
    return files


def _checkFresh(files: List[str]):
    existing = [f for f in files if os.path.exists(f)]
    if existing:
        raise FileExistsError(f"won't overwrite existing output {existing}")
