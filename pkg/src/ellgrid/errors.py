"""Shared exception types.

Numerical failures carry enough context (module, lattice index) for the CLI
to report them; config failures are plain ValueErrors raised by the schemas.
"""


class BreakdownError(Exception):
    """A numerical construction lost its footing (pole hit, division residue
    too large, non-convergence).  `where` names the module, `index` the
    offending lattice index or ladder level when there is one."""

    def __init__(self, message, where=None, index=None):
        super().__init__(message)
        self.where = where
        self.index = index

    def __str__(self):
        base = super().__str__()
        tags = []
        if self.where is not None:
            tags.append(f"module={self.where}")
        if self.index is not None:
            tags.append(f"index={self.index}")
        return f"{base} [{', '.join(tags)}]" if tags else base


class PoleError(BreakdownError):
    """Evaluation exactly at (or numerically too close to) a pole."""


class InfinityFlag:
    """Marker for a lattice value at infinity.  Never a float: code that
    meets one must branch explicitly."""

    __slots__ = ()

    def __repr__(self):
        return "Infinity"

    def __eq__(self, other):
        return isinstance(other, InfinityFlag)

    def __hash__(self):
        return hash("ellgrid-infinity")


INF_POINT = InfinityFlag()
