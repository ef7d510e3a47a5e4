"""Directed-graph utilities: strongly connected components and reachability.

Graphs are adjacency lists over nodes ``0..n-1``.
"""

from __future__ import annotations


def strongly_connected_components(adjacency: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative.

    Components come out in reverse topological order of the condensation
    (sinks first), each sorted by node.
    """
    n = len(adjacency)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    result: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            succ = adjacency[v]
            while pos < len(succ):
                w = succ[pos]
                pos += 1
                if index[w] == -1:
                    work.append((v, pos))
                    work.append((w, 0))
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    result.append(sorted(comp))
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
    return result


def is_strongly_connected(adjacency: list[list[int]]) -> bool:
    return len(strongly_connected_components(adjacency)) == 1


def reachability(adjacency: list[list[int]]) -> list[set[int]]:
    """Reflexive-transitive closure: ``reach[v]`` holds every node reachable from v."""
    n = len(adjacency)
    reach = []
    for v in range(n):
        seen = {v}
        todo = [v]
        while todo:
            u = todo.pop()
            for w in adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        reach.append(seen)
    return reach
