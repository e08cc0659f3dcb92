"""Exception types raised across the package."""


class CVSwapError(Exception):
    """Base class for all package errors."""


class NonPhysicalState(CVSwapError, ValueError):
    """A covariance matrix or parameter set violates the uncertainty principle."""


class DegenerateInvariants(CVSwapError, ValueError):
    """Local symplectic invariants admit no real standard form."""


class NotEntangled(CVSwapError, ValueError):
    """An operation that requires an entangled state received a separable one."""


class DegenerateState(CVSwapError, ValueError):
    """A closed form is 0/0 at this point and has no continuous limit."""


class SingularConditioning(CVSwapError, ValueError):
    """The covariance of the measured quadratures cannot be inverted."""


class OptimizerDidNotConverge(CVSwapError, RuntimeError):
    """A numerical minimisation did not meet its tolerance within budget."""


class InsufficientSamples(CVSwapError, ValueError):
    """Monte Carlo configuration has too few samples for the requested use."""


class ConfigError(CVSwapError, ValueError):
    """Invalid experiment configuration.

    Attributes:
        field: name of the offending key, if known
        line: line number in the config file, if known
    """

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.field = field
        self.line = line


class VerificationFailed(CVSwapError, AssertionError):
    """One or more verification checks failed.

    Attributes:
        failures: list of dicts with ``name``, ``observed``, ``expected``,
            ``tolerance`` keys
    """

    def __init__(self, failures):
        self.failures = list(failures)
        lines = [
            f"{f['name']}: observed={f['observed']} expected={f['expected']} tol={f['tolerance']}"
            for f in self.failures
        ]
        super().__init__("verification failed:\n" + "\n".join(lines))
