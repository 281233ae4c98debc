"""Exception types shared across the package."""


class SpinOrbitError(Exception):
    """Base class for all package errors."""


class ZeroNorm(SpinOrbitError, ValueError):
    """A state (or projection of one) has vanishing norm."""


class OamOverflow(SpinOrbitError, ValueError):
    """An operation pushed an OAM label beyond the truncation bound."""


class SettingMismatch(SpinOrbitError, ValueError):
    """Count records do not form the analyzer-angle pattern an estimator needs."""


class ZeroCounts(SpinOrbitError, ValueError):
    pass


class MissingSetting(SpinOrbitError, KeyError):
    """Required (theta, chi) settings are absent from the data."""

    def __init__(self, missing):
        self.missing = list(missing)
        listing = ", ".join(f"(theta={t:.6g}, chi={c:.6g})" for t, c in self.missing)
        super().__init__(f"missing {len(self.missing)} setting(s): {listing}")

    def __str__(self):
        return self.args[0]


class InsufficientData(SpinOrbitError, ValueError):
    pass


class ConfigError(SpinOrbitError, ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)
