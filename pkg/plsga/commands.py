"""
Module implementing entry functions
"""
from __future__ import absolute_import

import logging
from pathlib import Path

import numpy as np
from docopt import docopt

from .core.configuration import (ConfigurationError, InfeasibleGeometryError, LogLevel,
                                 RunConfig)
from .core.pls import PlsError
from .dataset import DatasetError
from .io.config_parser import ConfigParserError, FlatConfig
from .io.reports import ReportFormatError
from .utils.logging import setup_logging
from .utils.pyutils import docopt_sanitize
from .workflows import WORKFLOWS, write_benchmark

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL_ERROR = 4

COMMANDS = ("select", "verify", "external", "benchmark")
_CLI_ONLY_OPTIONS = ("config", "log_file", "help", "verbose", "debug", "output", "samples",
                     "variables", "active", "noise_ratio")
_PATH_KEYS = ("data", "subsets")


def plsga(args=None):
    """plsga

    Usage:
        plsga select [options]
        plsga verify [options]
        plsga external [options]
        plsga benchmark --output=<csv> [options]
        plsga --help

    Options:
        -v --verbose                Increase verbosity level
        --debug                     Extremely verbose mode for debugging
        --log-file=<path>           Also write the log to this file
        --config=<file>             Flat 'key = value' configuration file. Flags win over it
        --data=<csv>                Dataset, one row per observation, header line required
        --response=<name>           Column holding the response
        --id-column=<name>          Column holding observation ids (not a predictor)
        --output-dir=<dir>          Where artifacts are written (default: current directory)
        --subsets=<json>            [verify] top_subsets.json listing the subsets to verify
        --seed=<n>                  Master seed. Drawn from system entropy if omitted
        --workers=<n>               Concurrent evaluators (default: physical cores)
        --criterion=<name>          rdcv, srcv, bic-pls or bic-ols (default: srcv)
        --population=<n>            Chromosomes per generation, even (default: 4000)
        --generations=<n>           Number of generations (default: 300)
        --min-vars=<n>              Smallest subset size (default: 3)
        --max-vars=<n>              Largest subset size (default: 30)
        --mutation-prob=<q>         Per-gene mutation probability (default: 0.005)
        --crossover=<mode>          single or uniform (default: single)
        --exp-transform=<on|off>    Exponential fitness transform for mating (default: on)
        --elite-size=<n>            Best-ever chromosomes kept for mating (default: 10)
        --rejection-factor=<f>      Offspring worse than the worse parent by more than f SDs
                                    of the generation's fitness are rejected (default: 1.0)
        --max-mate-attempts=<n>     Rejections before accepting the best rejected child
                                    (default: 100)
        --duplicate-scope=<scope>   offspring or offspring_elite (default: offspring_elite)
        --top-count=<n>             Ranked subsets reported (default: 10)
        --inner-segments=<K>        Inner CV segments choosing components (default: 10)
        --outer-segments=<S>        Outer rdCV segments (default: 4)
        --criterion-replications=<R>
                                    Replications of rdCV / srCV (default: 30)
        --calibration-ratio=<r>     srCV calibration fraction (default: 0.6)
        --max-components=<n>        Cap on PLS components (default: 30)
        --bic-penalty=<mode>        BIC_PLS parameter count: variables or components
                                    (default: variables)
        --reorthogonalize=<on|off>  Second Gram-Schmidt pass in SIMPLS (default: off)
        --verify-replications=<R>   [verify] rdCV replications (default: 50)
        --verify-inner-segments=<K>
                                    [verify] inner segments (default: 10)
        --verify-outer-segments=<S>
                                    [verify] outer segments (default: 4)
        --external-ratio=<r>        [external] training fraction (default: 0.6)
        --external-repeats=<n>      [external] repetitions (default: 10)
        --external-verify=<on|off>  [external] pick the best subset by an rdCV verification
                                    with the verify settings (default: off)
        --output=<csv>              [benchmark] where to write the synthetic dataset
        --samples=<n>               [benchmark] observations [default: 60]
        --variables=<n>             [benchmark] variables [default: 100]
        --active=<n>                [benchmark] variables carrying signal [default: 5]
        --noise-ratio=<r>           [benchmark] noise SD over signal SD [default: 0.5]
    """
    options = docopt_sanitize(docopt(plsga.__doc__, args))
    chosen = {name: options.pop(name, False) for name in COMMANDS}
    command = next(name for name in COMMANDS if chosen[name])
    log_level = _pop_log_level(options)
    setup_logging(log_level, options.get("log_file"))

    try:
        if command == "benchmark":
            write_benchmark(options["output"], int(options["samples"]),
                            int(options["variables"]), int(options["active"]),
                            float(options["noise_ratio"]), int(options["seed"] or 0))
        else:
            WORKFLOWS[command](resolve_run_config(options)).run()
    except (ConfigurationError, ConfigParserError, DatasetError, ReportFormatError,
            OSError) as e:
        logging.error(str(e))
        return EXIT_INPUT_ERROR
    except InfeasibleGeometryError as e:
        logging.error("Infeasible problem: %s", e)
        return EXIT_INFEASIBLE
    except (PlsError, np.linalg.LinAlgError, FloatingPointError) as e:
        logging.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL_ERROR
    except Exception:
        logging.critical("Unhandled Exception. Terminating...", exc_info=True)
        return EXIT_NUMERICAL_ERROR
    return EXIT_OK


def resolve_run_config(options):
    """RunConfig from the config file named by --config and the remaining flags.

    Relative input paths in the config file are taken from the file's directory.
    """
    config_file = options.get("config")
    file_opts = {}
    if config_file:
        try:
            file_opts = FlatConfig(config_file, RunConfig.fields()).as_dict()
        except OSError as e:
            raise ConfigurationError("Cannot read config file: {}".format(e)) from e
        base = Path(config_file).parent
        for key in _PATH_KEYS:
            if key in file_opts and not Path(file_opts[key]).is_absolute():
                file_opts[key] = str(base / file_opts[key])
    flag_opts = {key: value for key, value in options.items()
                 if key not in _CLI_ONLY_OPTIONS and value is not None}
    return RunConfig.resolve(file_opts, flag_opts)


def _pop_log_level(options):
    debug, verbose = options.pop("debug", False), options.pop("verbose", False)
    log_level = LogLevel.DEFAULT
    if debug:
        log_level = LogLevel.DEBUG
    elif verbose:
        log_level = LogLevel.VERBOSE
    return log_level
