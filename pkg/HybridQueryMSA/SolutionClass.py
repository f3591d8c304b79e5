"""
How a sampled state compares with the oracle.
"""
from enum import Enum

class SolutionClass(Enum):
    optimal = "optimal"
    feasible = "feasible"
    infeasible = "infeasible"

    @classmethod
    def of(cls, energy: float, feasible: bool, minimum: float=None) -> "SolutionClass":
        """
        minimum is the oracle's global minimum, or None when the oracle is out
        of reach; then no state is called optimal.
        """
        if minimum is not None and energy == minimum:
            return cls.optimal
        if feasible:
            return cls.feasible
        return cls.infeasible
