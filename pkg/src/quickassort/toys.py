"""Small hand-checkable instances with known optimal profiles."""

from __future__ import annotations

from .instance import Instance, from_arrays


def ro_failure_instance() -> Instance:
    """Three products where the revenue-ordered policy loses to a wider offline set.

    Optimal: offline {1,3}, online {1,3} and {1}, revenue about 9.1096;
    the two-step revenue-ordered policy offers {1} everywhere (about 7.94).
    """
    return from_arrays(
        alpha=[0.4, 0.4, 0.2],
        u0=1.0,
        R=[[10, 9, 8]] * 3,
        U=[[100, 100, 1], [1, 1, 100], [100, 1, 1]],
    )


def heuristic_gap_instance() -> Instance:
    """Three products where both revenue-ordered heuristics stay well short of optimal.

    Optimal 18.386 with offline {1,3} and online {3}, {1,3}; two-step RO
    reaches 15.528 and the improved prefix search 15.722.
    """
    return from_arrays(
        alpha=[0.7, 0.2, 0.1],
        u0=1.0,
        R=[[20, 14, 14], [10, 10, 18], [10, 10, 20]],
        U=[[100, 200, 1], [1, 1, 100], [2, 2, 1]],
    )
