"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a channel/medium function."""


class MediumParseError(ValueError):
    """A medium document is malformed or violates an invariant."""


class TopologyError(ValueError):
    """The network cannot be wired (orphan node, gateway count, tier rules)."""


class UnknownNodeError(KeyError):
    """A node id is not present in the topology."""


class ScenarioError(ValueError):
    """A scenario failed validation.

    ``violations`` holds every problem found, not just the first one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class InvariantViolation(AssertionError):
    """Raised by the simulator when a runtime invariant check fails."""
