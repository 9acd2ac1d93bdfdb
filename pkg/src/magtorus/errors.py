"""Exception types shared across the package.

ConfigError-family problems are caller mistakes (CLI exit code 2);
NumericError-family problems are runtime numerical failures (CLI exit code 3).
"""


class ConfigError(ValueError):
    """Invalid configuration or argument value."""


class LatticeRankError(ValueError):
    """Generators do not span R^{2n} (degenerate period matrix)."""


class RdqError(ValueError):
    """Operation requires a valid (nu, lattice, character) triplet but RDQ fails."""


class SupportError(ValueError):
    """Function support violates a domain precondition (e.g. periodization input)."""


class NumericError(RuntimeError):
    """Base class for runtime numerical failures."""


class TruncationError(NumericError):
    """A certified truncation target cannot be met within the term budget."""


class ResourceError(NumericError):
    """A node or term budget would be exceeded."""


class AssemblyError(NumericError):
    """Internal consistency failure while assembling a discrete operator."""
