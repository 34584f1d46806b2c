"""
Runtime configuration
"""
from __future__ import absolute_import
import logging

from ..fitness import BicPenalty, Criterion, FitnessConfig
from ..utils.logging import log_verbose
from ..utils.pyutils import ConfigT
from .parallel import default_workers
from .random import new_master_seed


class LogLevel:
    DEFAULT = 1
    VERBOSE = 2
    DEBUG = 3


class ConfigurationError(Exception):
    """
    Error due to invalid settings in the run configuration, the config file or the flags.
    Reported with exit status 2.
    """
    pass


class InfeasibleGeometryError(Exception):
    """The data cannot support the requested criterion and subset sizes at all"""
    pass


class ValueSource:
    DEFAULT = "default"
    CONFIG = "config"
    FLAG = "flag"


class RunConfig(ConfigT):
    """The flat configuration of a plsga run. Every key can be set in the config file and
    overridden by the same-named command line flag.
    """
    # Input / output
    data = None
    response = None
    id_column = None
    output_dir = "."
    subsets = None

    # Execution
    seed = None
    workers = None

    # Genetic algorithm
    criterion = Criterion.SEP_SRCV
    population = 4000
    generations = 300
    min_vars = 3
    max_vars = 30
    mutation_prob = 0.005
    crossover = "single"
    exp_transform = True
    elite_size = 10
    rejection_factor = 1.0
    max_mate_attempts = 100
    duplicate_scope = "offspring_elite"
    top_count = 10

    # Fitness criteria
    inner_segments = 10
    outer_segments = 4
    criterion_replications = 30
    calibration_ratio = 0.6
    max_components = 30
    bic_penalty = BicPenalty.VARIABLES
    reorthogonalize = False

    # Verification and external validation
    verify_replications = 50
    verify_inner_segments = 10
    verify_outer_segments = 4
    external_ratio = 0.6
    external_repeats = 10
    external_verify = False

    _validators = []

    def _init(self, opts):
        try:
            super()._init(opts)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e

    @classmethod
    def resolve(cls, file_opts=None, flag_opts=None):
        """Builds the config with precedence default < config file < flag.

        The source of every key ends up in `sources`. A missing seed is drawn from system
        entropy, a missing worker count from the available cores.
        """
        file_opts = {k: v for k, v in (file_opts or {}).items() if v is not None}
        flag_opts = {k: v for k, v in (flag_opts or {}).items() if v is not None}
        known = cls.fields()
        for name in list(file_opts) + list(flag_opts):
            if name not in known:
                raise ConfigurationError("Unknown configuration key: " + name)
        opts = dict(file_opts)
        opts.update(flag_opts)
        if opts.get("seed") is None:
            opts["seed"] = new_master_seed()
            logging.info("No seed given. Drawn master seed %d", opts["seed"])
        if opts.get("workers") is None:
            opts["workers"] = default_workers()
        config = cls(opts)
        config._sources = {
            name: ValueSource.FLAG if name in flag_opts
            else ValueSource.CONFIG if name in file_opts
            else ValueSource.DEFAULT
            for name in known
        }
        log_verbose("Resolved configuration: %s", config)
        return config

    @property
    def sources(self):
        return getattr(self, "_sources", {name: ValueSource.DEFAULT for name in self.fields()})

    def manifest_entries(self):
        """{key: {"value", "source"}} with JSON friendly values"""
        sources = self.sources
        return {name: {"value": _plain(value), "source": sources.get(name, ValueSource.DEFAULT)}
                for name, value in self.as_dict().items()}

    def fitness_config(self) -> FitnessConfig:
        return self._build(FitnessConfig,
                           inner_segments=self.inner_segments,
                           outer_segments=self.outer_segments,
                           replications=self.criterion_replications,
                           calibration_ratio=self.calibration_ratio,
                           max_components=self.max_components,
                           bic_penalty=self.bic_penalty,
                           reorthogonalize=self.reorthogonalize)

    def verify_fitness_config(self) -> FitnessConfig:
        return self.fitness_config_for(self.verify_replications,
                                       self.verify_inner_segments,
                                       self.verify_outer_segments)

    def fitness_config_for(self, replications, inner_segments, outer_segments):
        return self._build(FitnessConfig,
                           inner_segments=inner_segments,
                           outer_segments=outer_segments,
                           replications=replications,
                           calibration_ratio=self.calibration_ratio,
                           max_components=self.max_components,
                           bic_penalty=self.bic_penalty,
                           reorthogonalize=self.reorthogonalize)

    def ga_config(self, master_seed=None):
        # Import scope-level to avoid a cross module dependency
        from ..ga_engine import Crossover, DuplicateScope, GaConfig
        return self._build(GaConfig,
                           population_size=self.population,
                           generations=self.generations,
                           min_vars=self.min_vars,
                           max_vars=self.max_vars,
                           mutation_probability=self.mutation_prob,
                           crossover=Crossover.parse(self.crossover),
                           exp_transform=self.exp_transform,
                           elite_size=self.elite_size,
                           rejection_factor=self.rejection_factor,
                           max_mate_attempts=self.max_mate_attempts,
                           criterion=self.criterion,
                           fitness=self.fitness_config(),
                           master_seed=self.seed if master_seed is None else master_seed,
                           workers=self.workers,
                           top_count=self.top_count,
                           duplicate_scope=DuplicateScope.parse(self.duplicate_scope))

    @staticmethod
    def _build(klass, **kw):
        try:
            return klass(**kw)
        except ConfigurationError:
            raise
        except ValueError as e:
            raise ConfigurationError(str(e)) from e


def _plain(value):
    return value.value if hasattr(value, "value") else value


@RunConfig.validator
def _check_integers(config):
    if config.seed is not None:
        try:
            config.seed = int(config.seed)
        except ValueError:
            raise ConfigurationError("seed must be an integer, got {}".format(config.seed))
        if config.seed < 0:
            raise ConfigurationError("seed must be non-negative")
    if config.workers is not None:
        config.workers = int(config.workers)
        if config.workers < 1:
            raise ConfigurationError("workers must be >= 1")


@RunConfig.validator
def _check_ga(config):
    config.crossover = str(config.crossover).strip().lower()
    config.duplicate_scope = str(config.duplicate_scope).strip().lower().replace("-", "_")
    if config.population < 4 or config.population % 2:
        raise ConfigurationError("population must be an even number >= 4, got {}"
                                 .format(config.population))
    if config.generations < 1:
        raise ConfigurationError("generations must be >= 1")
    if not 1 <= config.min_vars <= config.max_vars:
        raise ConfigurationError("Need 1 <= min_vars <= max_vars, got min_vars={} max_vars={}"
                                 .format(config.min_vars, config.max_vars))
    if not 0 <= config.mutation_prob < 1:
        raise ConfigurationError("mutation_prob must be in [0, 1)")
    if config.crossover not in ("single", "uniform"):
        raise ConfigurationError("crossover must be single or uniform, got " + config.crossover)
    if config.duplicate_scope not in ("offspring", "offspring_elite"):
        raise ConfigurationError("duplicate_scope must be offspring or offspring_elite, got "
                                 + config.duplicate_scope)
    if config.top_count < 1 or config.elite_size < 0 or config.max_mate_attempts < 1:
        raise ConfigurationError("top_count and max_mate_attempts must be >= 1, "
                                 "elite_size >= 0")


@RunConfig.validator
def _check_ratios(config):
    for name in ("calibration_ratio", "external_ratio"):
        if not 0 < getattr(config, name) < 1:
            raise ConfigurationError("{} must be in (0, 1)".format(name))
    for name in ("inner_segments", "outer_segments",
                 "verify_inner_segments", "verify_outer_segments"):
        if getattr(config, name) < 2:
            raise ConfigurationError("{} must be >= 2".format(name))
    for name in ("criterion_replications", "verify_replications", "external_repeats",
                 "max_components"):
        if getattr(config, name) < 1:
            raise ConfigurationError("{} must be >= 1".format(name))
