"""The three tree-and-lattice schedules: recursive fat-tree, space-bounded
hierarchy traversal, and the systolic hexagonal array.

Run: python demos/trees_hierarchies_hexagons.py
"""

from symsched.matmul import fat_tree_recursive, hex_systolic, pmh_space_bounded
from symsched.simulate import verify

print("== recursive fat-tree ==")
for d in (1, 2):
    rep = verify(fat_tree_recursive(d))
    n = 2 ** d
    print(f" d={d}: {4 ** d} leaves, {n}x{n}x{n} multiply, "
          f"makespan {rep.makespan}, traffic {rep.traffic}")
print(" the top level carries n^2 words, the level below 2n^2, C never moves\n")

print("== space-bounded hierarchy ==")
seq = pmh_space_bounded([(48, 1)])
first8 = [i for i, _n, _tv in sorted(seq.schedule_rows, key=lambda r: r[2])][:8]
print(f" one level, one processor: Z-order traversal, first block {first8}")
two = pmh_space_bounded([(12, 1), (48, 1)])
rep = verify(two)
level2 = rep.traffic.get("pmh-level-2", 0)
print(f" two levels: cache-boundary traffic {level2} words across the run, "
      f"0 during supersteps\n")

print("== hexagonal systolic array ==")
bundle = hex_systolic(3)
rep = verify(bundle)
print(f" q=3: coverage {rep.coverage}, makespan {rep.makespan} of "
      f"{bundle.step_sets[0]} reserved steps")
print(f" streams: {bundle.meta['stream_directions']}")
print(f" per-direction traffic: {rep.traffic}")
