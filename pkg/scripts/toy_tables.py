"""Print every method's assortments and revenue on the two three-product toys."""

from __future__ import annotations

from quickassort.heuristics import improved_ro, two_step_ro
from quickassort.oracle import brute_force_qap
from quickassort.solver import SolveOptions, solve_qap
from quickassort.toys import heuristic_gap_instance, ro_failure_instance


def fmt(sets) -> str:
    return " / ".join("{" + ",".join(str(j + 1) for j in sorted(s)) + "}" for s in sets)


def main() -> None:
    methods = {
        "CH-2": lambda inst: solve_qap(inst, SolveOptions(formulation="CH")),
        "MILP": lambda inst: solve_qap(inst, SolveOptions(formulation="MILP")),
        "RO": two_step_ro,
        "IRO": improved_ro,
        "oracle": brute_force_qap,
    }
    for name, inst in (("revenue-ordered failure", ro_failure_instance()),
                       ("heuristic gap", heuristic_gap_instance())):
        print(f"== {name} toy")
        for label, run in methods.items():
            sol = run(inst)
            print(f"  {label:<7}{sol.objective:10.4f}   {fmt(sol.sets)}")


if __name__ == "__main__":
    main()
