"""Exact entanglement cost over trees versus naive point-to-point shipping.

For a chain of N parties the naive scheme prepares everything at one end
and teleports systems down the line, crossing the first edge N-1 times.
The tree protocol pays the cut rank at each edge once.
"""

from treecost import (
    decompose,
    exact_edge_cost,
    make_named_state,
    naive_distribution_cost,
    root_and_relabel,
)


def line(n):
    return root_and_relabel(
        [(i, i + 1) for i in range(1, n)], {i: 2 for i in range(1, n + 1)}, 1
    )


print("chain W states, naive versus tree totals (ebits)")
print(f"{'N':>3} {'naive':>6} {'tree':>5}")
for n in range(3, 9):
    tree = line(n)
    naive = sum(naive_distribution_cost(tree).values())
    dec = decompose(make_named_state("w", n), tree)
    total = sum(exact_edge_cost(dec).values())
    print(f"{n:>3} {naive:>6.0f} {total:>5.0f}")

print()
print("per-edge breakdown for N = 6")
tree = line(6)
naive = naive_distribution_cost(tree)
dec = decompose(make_named_state("w", 6), tree)
exact = exact_edge_cost(dec)
for label in sorted(naive):
    print(f"  edge {label}: naive {naive[label]:.0f}  tree {exact[label]:.0f}")

print()
print("cost follows the cut rank, not the party count")
for name, n in [("ghz", 7), ("w", 7), ("dicke", 6)]:
    state = make_named_state(name, n, k=2) if name == "dicke" else \
        make_named_state(name, n)
    tree = line(n)
    dec = decompose(state, tree)
    costs = exact_edge_cost(dec)
    print(f"  {name}{n}: {costs}")
