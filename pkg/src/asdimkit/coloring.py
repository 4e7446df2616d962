"""Exact graph coloring by backtracking (DSATUR order, clique bound, symmetry breaking)."""

import time

from .errors import SearchTimeout


def greedy_clique(adj, vertices):
    """A maximal clique found greedily from high degree; a lower bound for the chromatic number."""
    best = []
    order = sorted(vertices, key=lambda v: -len(adj[v]))
    for start in order[:20]:
        clique = [start]
        cand = set(adj[start]) & set(vertices)
        while cand:
            v = max(cand, key=lambda u: (len(adj[u] & cand), -u))
            clique.append(v)
            cand &= adj[v]
        if len(clique) > len(best):
            best = clique
    return best


def greedy_coloring(adj, n):
    colors = [-1] * n
    for v in range(n):
        used = {colors[u] for u in adj[v] if colors[u] >= 0}
        c = 0
        while c in used:
            c += 1
        colors[v] = c
    return colors


def _components(adj, n):
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack = [s]
        comp = []
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        comps.append(sorted(comp))
    return comps


def exact_coloring(adj, k, deadline=None, stats=None):
    """Color vertices 0..n-1 with at most k colors so that neighbours differ.

    ``adj`` is a list of neighbour sets.  Returns the color list, or None when
    no k-coloring exists.  Raises SearchTimeout past ``deadline`` (a
    time.monotonic value).
    """
    n = len(adj)
    adj = [set(a) for a in adj]
    colors = [-1] * n
    if stats is None:
        stats = {}
    stats.setdefault("nodes", 0)
    for comp in _components(adj, n):
        if len(comp) == 1:
            colors[comp[0]] = 0
            continue
        clique = greedy_clique(adj, comp)
        if len(clique) > k:
            stats["clique"] = len(clique)
            return None
        # pin the clique to colors 0..len-1 to break the color symmetry
        for i, v in enumerate(clique):
            colors[v] = i
        if not _solve_component(adj, comp, colors, k, len(clique), deadline, stats):
            return None
    return colors


def _solve_component(adj, comp, colors, k, used0, deadline, stats):
    free = [v for v in comp if colors[v] < 0]
    if not free:
        return True

    def saturation(v):
        return len({colors[u] for u in adj[v] if colors[u] >= 0})

    def rec(remaining, used):
        stats["nodes"] += 1
        if deadline is not None and stats["nodes"] % 1024 == 0 and time.monotonic() > deadline:
            raise SearchTimeout("coloring search timed out")
        if not remaining:
            return True
        v = max(remaining, key=lambda u: (saturation(u), len(adj[u]), -u))
        forbidden = {colors[u] for u in adj[v] if colors[u] >= 0}
        rest = [u for u in remaining if u != v]
        for c in range(min(used + 1, k)):
            if c in forbidden:
                continue
            colors[v] = c
            # forward check: every uncolored neighbour keeps an available color
            ok = True
            for u in adj[v]:
                if colors[u] < 0:
                    fu = {colors[w] for w in adj[u] if colors[w] >= 0}
                    if len(fu) >= k:
                        ok = False
                        break
            if ok and rec(rest, max(used, c + 1)):
                return True
            colors[v] = -1
        return False

    return rec(free, used0)


def check_coloring(adj, colors, k=None):
    for v, nb in enumerate(adj):
        if colors[v] < 0 or (k is not None and colors[v] >= k):
            return False
        for u in nb:
            if colors[u] == colors[v]:
                return False
    return True
