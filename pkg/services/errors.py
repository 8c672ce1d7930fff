"""Exception hierarchy for the clustering toolkit. Every error is also a ValueError."""


class CfgwcError(ValueError):
    """Base class for all domain errors raised by the toolkit."""


class DatasetError(CfgwcError):
    pass


class GeometryError(CfgwcError):
    pass


class ClusteringError(CfgwcError):
    pass


class DegenerateClusterError(ClusteringError):
    """A cluster lost all of its membership mass."""


class ContextError(CfgwcError):
    pass


class ValidityError(CfgwcError):
    pass


class ConfigError(CfgwcError):
    pass
