"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SimulationError):
    """A scenario configuration is invalid; the message names the offending key."""


class ConsistencyError(SimulationError):
    """Customer book and bank balance sheets have drifted apart."""


class LedgerError(SimulationError):
    """The interbank loan ledger no longer matches the balance sheets."""


class IdentityError(SimulationError):
    """A balance-sheet accounting identity broke beyond tolerance."""
