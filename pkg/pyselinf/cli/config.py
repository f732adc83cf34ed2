"""
Experiment configuration

A configuration is resolved in three layers, later layers winning: the
defaults below, an optional INI file with a single ``[experiment]``
section, then command-line flags.  Example file::

    [experiment]
    n = 300
    p = 100
    covariance = ar
    signal = 0.6
    methods = splitting, cdf-sov, mle-sov
"""
import configparser
from dataclasses import dataclass, fields, replace, asdict
from logging import getLogger

from ..pyselinf_errors import PyselinfConfigError
from ..qmc.batchfactory import GENERATORS
from ..inference.mle import CENTERS
from ..inference.report import METHODS
from ..selection.kkt import TARGETS

SECTION = 'experiment'
SCENARIOS = ('simulate', 'infer', 'compare-samplers', 'mle')
COVARIANCES = ('ar', 'equi')
LAMBDA_RULES = ('theory', 'cv')
FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class ExperimentConfig(object):
    """
    Resolved settings of one run
    """
    # pylint: disable=too-many-instance-attributes
    scenario: str = 'simulate'
    n: int = 300
    p: int = 100
    covariance: str = 'ar'
    correlation: float = 0.9
    signal: float = 0.6
    sparsity: int = 10
    rho: float = 0.8
    lambda_rule: str = 'theory'
    alpha: float = 0.05
    repetitions: int = 200
    rqmc_n: int = 256
    compare_n: int = 4096
    replicates: int = 50
    seed: int = 0
    methods: tuple = ('splitting', 'cdf-sov', 'mle-sov')
    target: str = 'submodel'
    generator: str = 'sobol'
    bootstrap: int = 1000
    burn_in: int = 20
    hnr_factor: int = 5
    workers: int = 1
    sigma2: float = None
    design: str = None
    response: str = None
    header: bool = False
    response_column: str = None
    min_feature_count: int = 0
    mle_center: str = 'mle'
    format: str = 'csv'
    out: str = None
    timings: bool = False

    def __post_init__(self):
        # pylint: disable=too-many-branches
        for name in ('n', 'p', 'rqmc_n', 'compare_n', 'replicates', 'bootstrap', 'hnr_factor', 'workers'):
            if getattr(self, name) < 1:
                raise PyselinfConfigError("'{}' must be positive, got {}".format(name, getattr(self, name)))
        for name in ('repetitions', 'sparsity', 'burn_in', 'min_feature_count', 'seed'):
            if getattr(self, name) < 0:
                raise PyselinfConfigError("'{}' must be non-negative, got {}".format(name, getattr(self, name)))
        if self.sparsity > self.p:
            raise PyselinfConfigError("Sparsity {} exceeds p = {}".format(self.sparsity, self.p))
        if not 0.0 < self.rho < 1.0:
            raise PyselinfConfigError("'rho' must lie in (0, 1), got {}".format(self.rho))
        if not 0.0 < self.alpha < 1.0:
            raise PyselinfConfigError("'alpha' must lie in (0, 1), got {}".format(self.alpha))
        if not -1.0 < self.correlation < 1.0:
            raise PyselinfConfigError("'correlation' must lie in (-1, 1), got {}".format(self.correlation))
        if self.sigma2 is not None and not self.sigma2 > 0:
            raise PyselinfConfigError("'sigma2' must be positive, got {}".format(self.sigma2))
        choices = {'scenario': SCENARIOS, 'covariance': COVARIANCES, 'lambda_rule': LAMBDA_RULES,
                   'target': TARGETS, 'generator': GENERATORS, 'mle_center': CENTERS, 'format': FORMATS}
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise PyselinfConfigError("'{}' must be one of {}, got '{}'".format(name, ', '.join(allowed),
                                                                                   getattr(self, name)))
        unknown = [method for method in self.methods if method not in METHODS]
        if unknown or not self.methods:
            raise PyselinfConfigError("Unknown or missing methods: '{}'".format(', '.join(unknown)))

    def to_dict(self):
        """Plain dictionary of the settings, suitable for JSON"""
        settings = asdict(self)
        settings['methods'] = list(self.methods)
        return settings


FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
OPTIONAL_FLOATS = ('sigma2',)
OPTIONAL_STRINGS = ('design', 'response', 'response_column', 'out')


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ('1', 'yes', 'true', 'on'):
        return True
    if lowered in ('0', 'no', 'false', 'off'):
        return False
    raise ValueError("not a boolean: '{}'".format(text))


def parse_value(name, text):
    """
    Convert the text of one setting to its field type

    :param name: field name
    :param text: value as written in a config file
    :raises PyselinfConfigError: for unknown names or unparsable values
    """
    if name not in FIELD_TYPES:
        raise PyselinfConfigError("Unknown configuration key '{}'".format(name))
    text = text.strip()
    try:
        if name in OPTIONAL_FLOATS:
            return None if text.lower() in ('', 'none') else float(text)
        if name in OPTIONAL_STRINGS:
            return None if text.lower() in ('', 'none') else text
        kind = FIELD_TYPES[name]
        if kind is bool:
            return _parse_bool(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind is tuple:
            return tuple(item.strip() for item in text.split(',') if item.strip())
        return text
    except ValueError as error:
        raise PyselinfConfigError("Invalid value '{}' for '{}': {}".format(text, name, error))


def load_config(path):
    """
    Read the settings of the ``[experiment]`` section of an INI file

    :param path: config file path
    :return: dictionary of the settings present in the file
    :raises PyselinfConfigError: if the file cannot be read, lacks the section or holds unknown keys
    """
    logger = getLogger(__name__)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, 'r') as handle:
            parser.read_file(handle)
    except (OSError, configparser.Error) as error:
        raise PyselinfConfigError("Cannot read config file '{}': {}".format(path, error))
    if not parser.has_section(SECTION):
        raise PyselinfConfigError("Config file '{}' has no [{}] section".format(path, SECTION))
    settings = {key.replace('-', '_'): parse_value(key.replace('-', '_'), value)
                for key, value in parser.items(SECTION)}
    logger.debug("Read %d settings from %s", len(settings), path)
    return settings


def resolve_config(path=None, overrides=None):
    """
    Defaults, then the config file, then explicit overrides

    :param path: optional config file
    :param overrides: dictionary of settings given on the command line, None values ignored
    :rtype: :class:`ExperimentConfig`
    """
    settings = load_config(path) if path else {}
    for name, value in (overrides or {}).items():
        if name not in FIELD_TYPES:
            raise PyselinfConfigError("Unknown configuration key '{}'".format(name))
        if value is not None:
            settings[name] = value
    try:
        return replace(ExperimentConfig(), **settings)
    except TypeError as error:
        raise PyselinfConfigError("Invalid configuration: {}".format(error))
