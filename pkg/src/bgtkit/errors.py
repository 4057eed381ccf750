"""Exception hierarchy and enumeration caps shared across the toolkit."""


class BGTError(Exception):
    """Base class for all toolkit errors."""


class DomainError(BGTError, ValueError):
    """An argument is outside the documented domain of an operation."""


class CapExceededError(BGTError):
    """An exact enumeration would exceed the configured cap.

    Carries the work the call would have required so callers (and the CLI)
    can report it instead of silently sampling.
    """

    def __init__(self, required, cap, what="subsets"):
        self.required = int(required)
        self.cap = int(cap)
        self.what = what
        super().__init__(
            f"exact enumeration needs {self.required} {what}, cap is {self.cap}"
        )


class FrozenChainError(BGTError):
    """The swap chain has no moves (p == k)."""


class UndefinedEnergyError(BGTError):
    """Energy is undefined because the instance has no positive tests."""


class NumericalError(BGTError):
    """A solver failed: no bracket, no root, or an infeasible evaluation point."""


# Default enumeration caps; the CLI can override them via --caps.
CAPS = {
    "stratum": 20_000_000,       # per-overlap-stratum subset enumerations
    "subsets": 20_000_000,       # unrestricted k-subset enumerations
    "stationary": 2_000_000,     # state-space size for exact Gibbs vectors
    "kernel_entries": 20_000_000,  # states * neighbors for the exact kernel
    "flat": 2_000_000,           # 2**k sub-subsets in a single flatness check
    "memory_bytes": 2 << 30,     # sampling scratch budget
}


def check_cap(required, key, what="subsets"):
    cap = CAPS[key]
    if required > cap:
        raise CapExceededError(required, cap, what)
