"""
The select, verify and external workflows behind the command line.

A workflow is built from a resolved `RunConfig`, loads the dataset, runs its phases
under timers and writes its artifacts plus a `manifest.json` into the output directory.
"""
from __future__ import absolute_import
import logging
import os
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .core.configuration import ConfigurationError, RunConfig
from .dataset import SubsetIndexError, file_sha256, load_csv, make_benchmark, write_csv
from .evaluation import external_validate, verify_internal
from .ga_engine import run_ga
from .io import reports
from .utils.logging import log_all, log_stage
from .utils.timeit import TimerManager, timeit

HISTORY_FILE = "history.csv"
TOP_SUBSETS_FILE = "top_subsets.json"
MANIFEST_FILE = "manifest.json"
VERIFICATION_JSON = "verification.json"
VERIFICATION_CSV = "verification.csv"
EXTERNAL_JSON = "external.json"
EXTERNAL_TXT = "external.txt"


class Workflow:
    """Base of the command workflows: data loading, timers and the run manifest"""
    name = None

    def __init__(self, config: RunConfig):
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.data = None
        self.artifacts = []
        TimerManager.reset()

    def run(self):
        log_stage("plsga %s (seed %d, %d workers)", self.name, self.config.seed,
                  self.config.workers)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        with timeit(name=self.name):
            with timeit(name="load data"):
                self.data = self._load_data()
            self._execute()
        self._write_manifest()
        TimerManager.show_stats()
        for path in self.artifacts:
            log_all(logging.INFO, "Written %s", path)
        return self

    def _execute(self):
        raise NotImplementedError

    def _load_data(self):
        if not self.config.data:
            raise ConfigurationError("No dataset given. Use --data or the 'data' key")
        if not self.config.response:
            raise ConfigurationError("No response column given. Use --response")
        data = load_csv(self.config.data, self.config.response, self.config.id_column)
        logging.info("Loaded %s", data)
        return data

    def _path(self, filename):
        path = self.output_dir / filename
        self.artifacts.append(path)
        return path

    def manifest(self):
        config = self.config
        dataset = {"path": None, "n": None, "p": None, "sha256": None}
        if self.data is not None:
            dataset = {"path": os.path.abspath(config.data),
                       "n": self.data.n,
                       "p": self.data.p,
                       "sha256": file_sha256(config.data)}
        return {
            "command": self.name,
            "version": __version__,
            "config": config.manifest_entries(),
            "dataset": dataset,
            "seed": config.seed,
            "workers": config.workers,
            "timings": TimerManager.timings(),
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }

    def _write_manifest(self):
        reports.write_manifest(self._path(MANIFEST_FILE), self.manifest())


class SelectWorkflow(Workflow):
    """GA subset selection: history, top subsets and manifest"""
    name = "select"

    def _execute(self):
        self.result = run_ga(self.data, self.config.ga_config())
        reports.write_history(self._path(HISTORY_FILE), self.result.history)
        top = reports.TopSubsets(self.config.criterion, list(self.data.variable_names),
                                 self.result.top_subsets, self.result.summary)
        reports.write_top_subsets(self._path(TOP_SUBSETS_FILE), top)


class VerifyWorkflow(Workflow):
    """Independent rdCV of the subsets listed in a top_subsets.json"""
    name = "verify"

    def _execute(self):
        config = self.config
        if not config.subsets:
            raise ConfigurationError("No subsets file given. Use --subsets")
        top = reports.read_top_subsets(config.subsets)
        if top.variables and list(top.variables) != list(self.data.variable_names):
            raise SubsetIndexError("Subsets file {} was written for other variables"
                                   .format(config.subsets))
        self.report = verify_internal(
            self.data, top.genes,
            R=config.verify_replications,
            K=config.verify_inner_segments,
            S=config.verify_outer_segments,
            seed=config.seed,
            workers=config.workers,
            max_components=config.max_components,
            reorthogonalize=config.reorthogonalize)
        reports.write_verification(self._path(VERIFICATION_JSON), self._path(VERIFICATION_CSV),
                                   self.report)


class ExternalWorkflow(Workflow):
    """Repeated external validation of the whole GA selection"""
    name = "external"

    def _execute(self):
        config = self.config
        self.report = external_validate(self.data, config.ga_config(),
                                        ratio=config.external_ratio,
                                        repeats=config.external_repeats,
                                        seed=config.seed,
                                        verify=(config.verify_fitness_config()
                                                if config.external_verify else None))
        reports.write_external(self._path(EXTERNAL_JSON), self._path(EXTERNAL_TXT), self.report)
        log_all(logging.INFO, "External validation\n%s",
                reports.format_external_table(self.report))


WORKFLOWS = {
    "select": SelectWorkflow,
    "verify": VerifyWorkflow,
    "external": ExternalWorkflow,
}


def write_benchmark(output, n=60, p=100, active=5, noise_ratio=0.5, seed=0):
    """Writes the synthetic benchmark dataset (response column `y`) and returns the
    active variable names.
    """
    data, truth = make_benchmark(n, p, active, noise_ratio, seed)
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    write_csv(data, output)
    names = [data.variable_names[j] for j in truth]
    log_stage("Benchmark written to %s: N=%d, p=%d, active variables %s",
              output, n, p, ", ".join(names))
    return names
