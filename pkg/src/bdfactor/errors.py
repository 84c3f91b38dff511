"""Exception types shared across the package."""

from __future__ import annotations


class BDError(Exception):
    """Base class for all package errors."""


class InvalidRates(BDError, ValueError):
    """A rate was non-positive or not finite."""

    def __init__(self, index: int, value: float, which: str = "rate"):
        self.index = index
        self.value = value
        self.which = which
        super().__init__(f"invalid {which} at n={index}: {value!r}")


class UndeterminedSeries(BDError):
    """A series needed for a decision could not be classified."""

    def __init__(self, name: str, evidence: str = ""):
        self.name = name
        self.evidence = evidence
        super().__init__(f"series {name} undetermined: {evidence}")


class NonHarmonic(BDError):
    """The function passed to a Doob transform is not harmonic."""

    def __init__(self, index: int, residual: float):
        self.index = index
        self.residual = residual
        super().__init__(f"h is not harmonic at i={index} (residual {residual:.3e})")


class Inadmissible(BDError):
    """A factorization parameter violates an admissibility condition."""

    def __init__(self, reason: str, index: int | None = None, which: str | None = None):
        self.reason = reason
        self.index = index
        self.which = which
        super().__init__(reason)


class InadmissibleMu0Hat(Inadmissible):
    """The LU absorption parameter makes some diagonal coefficient non-positive."""

    def __init__(self, index: int | None, value: float, reason: str | None = None):
        self.value = value
        msg = reason or f"s_tilde[{index}] = {value!r} <= 0"
        super().__init__(msg, index=index, which="s_tilde")


class ConservativeRecurrentBlocked(Inadmissible):
    """UL factorization is impossible for conservative recurrent processes."""

    def __init__(self):
        super().__init__("mu0 = 0 and A diverges: no admissible x0 > 0")


class DivergentMoment(BDError):
    """A requested moment of a measure is infinite."""


class RuntimeCap(BDError):
    """A simulated path exceeded the event cap."""

    def __init__(self, trial: int, events: int):
        self.trial = trial
        self.events = events
        super().__init__(f"trial {trial} exceeded {events} events")


class TooFewAccepted(BDError):
    """Too few trials satisfied the conditioning event."""

    def __init__(self, accepted: int, needed: int = 100):
        self.accepted = accepted
        super().__init__(f"only {accepted} accepted trials (need {needed})")


class DomainError(BDError, ValueError):
    """Special-function argument outside the supported domain."""


class RateTableExhausted(BDError, IndexError):
    """A table-backed process was queried outside its table."""

    def __init__(self, index: int, which: str):
        self.index = index
        self.which = which
        super().__init__(f"{which} requested at n={index}, outside the rate table")
