"""Solve the equivariance equations by hand on small examples, then let the
search sweep recover the known-optimal schedules.

Run: python demos/solving_for_schedules.py
"""

from symsched.actions import ActionSet, GroupAction, orbits, stabilizer
from symsched.equivariant import brute_force_equivariant, identity_hom, solve_equivariant
from symsched.groups import mod_group, shift
from symsched.search import search_fat_tree_base, search_torus

# 1. a free cyclic action admits exactly one equivariant map per rotation
grp = shift(3)
act = GroupAction(grp, ActionSet("pts", (0, 1, 2)),
                  lambda g, x: grp.leaf_perm(g)(x))
sols = solve_equivariant(act, act, identity_hom(grp))
print(f"Shift(3) acting on three points: {len(orbits(act))} orbit, "
      f"stabilizer order {stabilizer(act, 0).order()}")
print(f"equivariant self-maps: {len(sols)} (one per rotation)")
brute = brute_force_equivariant(act, act, identity_hom(grp))
print(f"brute-force oracle agrees: {len(brute)} maps\n")

# 2. sweep every generator-image matrix for the 3x3 torus
result = search_torus(3, solution_cap=8)
best = result.ranked[0]
print(f"torus q=3 sweep: {result.candidates_tried} candidate matrices, "
      f"{result.feasible} feasible schedules")
print(f"rank 1: traffic {best['total_traffic']} hop-units over "
      f"{best['makespan']} steps (Cannon cost), rows {best['rows']}\n")

# 3. the fat-tree base case: commuting involution triples
ft = search_fat_tree_base(solution_cap=8)
best = ft.ranked[0]
print(f"fat-tree base sweep: {ft.candidates_tried} triples, "
      f"{ft.feasible} feasible schedules")
print(f"rank 1 traffic: {best['traffic']} "
      "(4 words over the top link, 8 over the leaf links)")
