"""Cover synthesis for a group acting on a tree.

Pipeline on a finite group ball Y with orbit map pi(g) = g(x0):

1. ``orbit_cover``: a two-colored cover of the orbit from the tree, thickened
   so that neighbouring pieces overlap.
2. ``region_covers``: for each orbit piece W, covers of N_r(pi^-1 W) of
   multiplicity <= k+1 with large Lebesgue number.
3. ``lemma1_map``: on each overlap region, a map into a mapping cylinder of
   nerves interpolating between a fine and a coarse cover.
4. ``build_psi`` glues everything into one map to a complex K and
   ``theorem1_cover`` pulls back the open stars of K.

Every output is recomputed by the checkers in ``covers``; the constants that
the asymptotic argument asks for are reported next to the values used.
"""

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .covers import Cover, RootedTree, enlarge_sets, lebesgue_number, tree_cover
from .errors import BudgetExceeded, HypothesisFailure, ValidationError
from .groups import DEFAULT_CAP, cayley_ball, free_group_ball_size
from .metric import FiniteMetricSpace, as_fraction
from .search import _color_pieces, band_pieces
from .simplicial import (OrientedComplex, SimplicialMap, UniformPoint, affine_combination,
                         cylinder_quotient, embedding_lipschitz, mapping_cylinder, nerve, nu,
                         points_matrix, pullback_cover)

INF = math.inf


# ---------------------------------------------------------------- context

@dataclass
class ActionContext:
    name: str
    space: FiniteMetricSpace          # the group ball with the ambient word metric
    elements: list
    orbit: list                       # distinct tree vertices g(x0), in ball order
    orbit_of: np.ndarray              # element index -> orbit index
    tree: RootedTree                  # prefix closure of the orbit, rooted at x0
    tree_index: list                  # orbit index -> tree vertex index
    lam: int
    k: int                            # dimension bound used for the stabilizer covers
    model: object = None
    norms: list = None

    @property
    def orbit_dist(self):
        idx = np.array(self.tree_index, dtype=np.int64)
        return self.tree.space.dist[np.ix_(idx, idx)]

    def preimage(self, orbit_set):
        """pi^-1 of a set of orbit indices, as element indices."""
        mask = np.isin(self.orbit_of, np.fromiter(orbit_set, dtype=np.int64))
        return frozenset(np.nonzero(mask)[0].tolist())

    def W_R(self, R, x=0):
        """Elements moving orbit point ``x`` (default x0) by at most R."""
        D = self.orbit_dist
        near = [o for o in range(len(self.orbit)) if D[x, o] <= R]
        return self.preimage(near)


def _prefix_tree(keys):
    nodes = {}
    order = []
    for key in keys:
        edges, coeffs = key
        for m in range(len(edges) + 1):
            p = (edges[:m], coeffs[:m])
            if p not in nodes:
                nodes[p] = len(order)
                order.append(p)
    order.sort(key=lambda p: (len(p[0]), repr(p)))
    nodes = {p: i for i, p in enumerate(order)}
    parent = [-1 if not p[0] else nodes[(p[0][:-1], p[1][:-1])] for p in order]
    return order, nodes, parent


def action_context(gog, R, k=None, cap=DEFAULT_CAP):
    """Ball of radius R in pi1 of a graph of groups acting on its Bass-Serre tree."""
    if all(_order(G) == 1 for G in gog.vertex_groups.values()):
        rank = sum(1 for y in gog.edges if y not in gog.tree) // 2
        size = free_group_ball_size(rank, R)
        if size > cap:
            raise BudgetExceeded(f"free group ball of radius {R} has {size} elements > cap {cap}")
    G = gog.pi1_group()
    ball = cayley_ball(G, R, cap=cap)
    keys = [G.orbit_key(g) for g in ball.elements]
    orbit = list(dict.fromkeys(keys))
    oindex = {key: i for i, key in enumerate(orbit)}
    order, nodes, parent = _prefix_tree(orbit)
    tree = RootedTree.from_parents(order, parent, name="orbit tree")
    lam = max((len(g.edges) for g in G.generators), default=0)
    if k is None:
        k = 0 if all(_order(Gv) is not None for Gv in gog.vertex_groups.values()) else 1
    return ActionContext(
        name=gog.name, space=ball.space, elements=ball.elements, orbit=orbit,
        orbit_of=np.array([oindex[key] for key in keys], dtype=np.int64),
        tree=tree, tree_index=[nodes[key] for key in orbit], lam=lam, k=k, model=G,
        norms=ball.norms)


def _order(G):
    if getattr(G, "order", None) is not None:
        return G.order
    if getattr(G, "rank", None) == 0:
        return 1
    return None


def trivial_context():
    space = FiniteMetricSpace([()], np.zeros((1, 1), dtype=np.int32), name="trivial group")
    tree = RootedTree.from_parents([((), ())], [-1])
    return ActionContext("trivial", space, [()], [((), ())], np.zeros(1, dtype=np.int64),
                         tree, [0], lam=0, k=0)


def check_orbit_map(ctx):
    """lambda-Lipschitz check of the orbit map over all pairs at word distance 1."""
    D = ctx.space.dist
    OD = ctx.orbit_dist
    i, j = np.nonzero(D == 1)
    worst = int(OD[ctx.orbit_of[i], ctx.orbit_of[j]].max()) if i.size else 0
    return worst <= ctx.lam, worst


# ---------------------------------------------------------------- orbit cover

@dataclass
class OrbitCover:
    cores: list                 # partition of the orbit (orbit indices)
    colors: list                # family of each core
    sets: list                  # thickened pieces W
    overlap: int
    separation: int
    multiplicity: int
    enlarged_multiplicity: int
    radius: int                 # N_{lambda r}(W) inside B_R(x_W)
    centers: list
    edges: list                 # pairs (i, j) with W_i meeting W_j
    strict: bool = True

    def summary(self):
        return {"pieces": len(self.sets), "overlap": self.overlap, "separation": self.separation,
                "multiplicity": self.multiplicity,
                "enlarged_multiplicity": self.enlarged_multiplicity,
                "radius": self.radius, "edges": len(self.edges), "strict": self.strict}


def _reroot(tree, new_root):
    n = tree.space.n
    nb = [[] for _ in range(n)]
    for v, p in enumerate(tree.parent):
        if p >= 0:
            nb[v].append(p)
            nb[p].append(v)
    parent = [-2] * n
    parent[new_root] = -1
    stack = [new_root]
    while stack:
        v = stack.pop()
        for u in nb[v]:
            if parent[u] == -2:
                parent[u] = v
                stack.append(u)
    return RootedTree(tree.space, parent, new_root)


def orbit_cover(ctx, separation, r=1, overlap=None, root="base", strict=True):
    """Two-colored cover of the orbit with multiplicity 2 after lambda*r enlargement.

    The tree construction gives cores that partition the orbit; each core is
    thickened by ``overlap`` (default lambda) inside the orbit so that cores in
    neighbouring bands meet.  ``strict`` enforces separation >= 4 lambda r;
    otherwise only the recomputed multiplicities decide.
    """
    lam_r = ctx.lam * r
    if strict and separation < 4 * lam_r:
        raise HypothesisFailure("separation-too-small",
                                f"separation {separation} < 4 lambda r = {4 * lam_r}")
    tree = ctx.tree
    if root == "extreme":
        OD = ctx.orbit_dist
        far = int(np.argmax(OD[0]))
        tree = _reroot(tree, ctx.tree_index[far])
    elif root != "base":
        raise ValidationError(f"unknown root choice {root!r}")
    back = {t: o for o, t in enumerate(ctx.tree_index)}
    cf = tree_cover(tree, separation, subset=ctx.tree_index)
    cores, colors = [], []
    for c, fam in enumerate(cf.families):
        for s in fam:
            cores.append(frozenset(back[t] for t in s))
            colors.append(c)
    h = ctx.lam if overlap is None else overlap
    OD = ctx.orbit_dist
    sets = []
    for core in cores:
        dv = OD[:, sorted(core)].min(axis=1)
        sets.append(frozenset(np.nonzero(dv <= h)[0].tolist()))
    counts = np.zeros(len(ctx.orbit), dtype=np.int64)
    big = np.zeros(len(ctx.orbit), dtype=np.int64)
    for s in sets:
        counts[sorted(s)] += 1
        dv = OD[:, sorted(s)].min(axis=1)
        big += dv <= lam_r
    mult, emult = int(counts.max()), int(big.max())
    if mult > 2 or emult > 2:
        raise HypothesisFailure("orbit-multiplicity",
                                f"multiplicity {mult}, after {lam_r}-enlargement {emult}")
    centers, R = [], 0
    for s in sets:
        region = np.nonzero(OD[:, sorted(s)].min(axis=1) <= lam_r)[0]
        ecc = OD[:, region].max(axis=1)
        c = int(np.argmin(ecc))
        centers.append(c)
        R = max(R, int(ecc[c]))
    edges = [(i, j) for i in range(len(sets)) for j in range(i + 1, len(sets)) if sets[i] & sets[j]]
    return OrbitCover(cores, colors, sets, h, int(separation), mult, emult, R, centers, edges,
                      strict)


# ---------------------------------------------------------------- covers of regions

@dataclass
class RegionCover:
    cover: Cover
    over: frozenset
    lebesgue: object
    bound: object
    multiplicity: int
    method: str


def _depth_over(space, sets, over):
    return lebesgue_number(space, sets, over=sorted(over))


def region_covers(space, over, L_target, k, max_bound=None):
    """A cover of N_{L+1}(over) whose Lebesgue number over ``over`` exceeds L_target.

    Tries (k+1)-colored band families at scale 3(L+1) enlarged by L+1 (the
    enlargement keeps each family disjoint, so the multiplicity is <= k+1);
    falls back to the single set N_{L+1}(over).
    """
    L = int(math.floor(as_fraction(L_target)))
    margin = L + 1
    dv = space.dist_to_set(sorted(over))
    S = np.nonzero(dv <= margin)[0]
    sub = space.subspace(S.tolist())
    dsc = 3 * margin
    tried = []
    diam = sub.diameter(range(sub.n))
    if diam >= 2 * dsc:
        for width in (dsc, dsc + margin, 2 * dsc):
            B = diam if max_bound is None else max_bound
            pieces = band_pieces(sub, dsc, B, width=width)
            tried.append(width)
            cf = _color_pieces(sub, pieces, dsc, B, k, None)
            if cf is None:
                continue
            sets = [frozenset(int(S[p]) for p in s) for s in cf.all_sets()]
            sets = enlarge_sets(space, sets, margin)
            sets = [frozenset(s) & frozenset(S.tolist()) for s in sets]
            cov = Cover(space, sets, covers=False)
            leb = _depth_over(space, cov.sets, over)
            mult = int(max(sum(1 for s in cov.sets if p in s) for p in S.tolist()))
            if leb > L and mult <= k + 1:
                return RegionCover(cov, frozenset(over), leb, cov.bound, mult, f"bands{width}")
    cov = Cover(space, [frozenset(S.tolist())], covers=False)
    leb = _depth_over(space, cov.sets, over)
    return RegionCover(cov, frozenset(over), leb, cov.bound, 1, "single")


def stabilizer_covers(ctx, R, r, k=None):
    """Covers V and U of the stabilizer ball W_R(x0) with L(V) > r and L(U) > b(V)."""
    k = ctx.k if k is None else k
    WR = ctx.W_R(R)
    V = region_covers(ctx.space, WR, r, k)
    U = region_covers(ctx.space, WR, V.bound, k)
    return V, U


def nerve_refinement_map(V, U, over=None, V_labels=None, U_labels=None):
    """Simplicial map Nerve(V) -> Nerve(U) sending V to the first U containing it.

    Containment and nerves are taken on the points ``over`` (default all).
    """
    pts = None if over is None else frozenset(over)
    Vs = [s if pts is None else s & pts for s in V.sets]
    Us = [s if pts is None else s & pts for s in U.sets]
    V_labels = list(range(len(Vs))) if V_labels is None else V_labels
    U_labels = list(range(len(Us))) if U_labels is None else U_labels
    keepV = [i for i, s in enumerate(Vs) if s]
    keepU = [j for j, s in enumerate(Us) if s]
    NV = nerve(Cover(V.space, [Vs[i] for i in keepV], covers=False), [V_labels[i] for i in keepV])
    NU = nerve(Cover(U.space, [Us[j] for j in keepU], covers=False), [U_labels[j] for j in keepU])
    vmap = {}
    for i in keepV:
        hit = next((j for j in keepU if Vs[i] <= Us[j]), None)
        if hit is None:
            raise HypothesisFailure("containment", f"set {V_labels[i]} lies in no set of the coarse cover")
        vmap[V_labels[i]] = U_labels[hit]
    g = SimplicialMap(NV, NU, vmap)
    probs = g.problems()
    if probs:
        raise HypothesisFailure("simplicial", probs[0])
    return g


# ---------------------------------------------------------------- the interpolating map

@dataclass
class GluedMapData:
    complex: OrientedComplex
    images: dict
    branch: dict
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.checks.values())


def _projection(depths, labels, complex_):
    """Canonical projection from a row of complement depths (ints or inf)."""
    if any(dv == INF for dv in depths):
        depths = [1 if dv == INF else 0 for dv in depths]
    total = sum(depths)
    if total == 0:
        raise ValidationError("point is not covered")
    return UniformPoint(complex_, {labels[i]: Fraction(int(dv), int(total))
                                   for i, dv in enumerate(depths) if dv})


def _depth_rows(space, sets, points):
    """complement depths d(x, X - U) for x in points, as python ints / inf."""
    out = {}
    full = np.ones(space.n, dtype=bool)
    cols = np.array(sorted(points), dtype=np.int64)
    mat = np.zeros((len(sets), len(cols)))
    for j, s in enumerate(sets):
        inside = np.zeros(space.n, dtype=bool)
        inside[list(s)] = True
        comp = np.nonzero(full & ~inside)[0]
        sel = inside[cols]
        if comp.size == 0:
            mat[j, sel] = INF
        elif sel.any():
            mat[j, sel] = space.dist[np.ix_(cols[sel], comp)].min(axis=1)
    for c, p in enumerate(cols.tolist()):
        out[p] = [INF if v == INF else int(v) for v in mat[:, c]]
    return out


def _relabel(p, complex_, tag):
    return UniformPoint(complex_, {(tag, v): c for v, c in p.coords.items()})


def lemma1_map(space, A, r, V, U, g=None, rho=None, mode="rho", c_n=2, epsilon=None,
               max_exhaustive=3000):
    """The interpolating map f: N_r(A) -> M_g, with exact boundary checks.

    ``mode="rho"`` uses the outer radius rho (default r): t_x = 2 d(x,A)/rho,
    cylinder branch q(p_V(x), 2 - t_x) when d(x,A) > rho/2, otherwise
    t_x g p_V(x) + (1 - t_x) p_U(x).  ``mode="literal"`` uses rho = c_n r as
    written, whose outer boundary condition is expected to fail.
    """
    r = as_fraction(r)
    if mode == "rho":
        outer = as_fraction(r if rho is None else rho)
    elif mode == "literal":
        outer = as_fraction(c_n) * r
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    A = sorted(A)
    dA = space.dist_to_set(A)
    region = [int(p) for p in np.nonzero(dA <= float(r))[0]]
    if g is None:
        g = nerve_refinement_map(V, U, over=region)
    cyl = mapping_cylinder(g)
    M = cyl.complex
    vlab = list(range(len(V.sets)))
    ulab = list(range(len(U.sets)))
    vdep = _depth_rows(space, V.sets, region)
    udep = _depth_rows(space, U.sets, region)
    images, branch, pV_of, pU_of = {}, {}, {}, {}
    for x in region:
        pV = _projection(vdep[x], vlab, g.domain)
        pU = _projection(udep[x], ulab, g.codomain)
        pV_of[x], pU_of[x] = pV, pU
        d = as_fraction(int(dA[x]))
        t = 2 * d / outer
        if d > outer / 2:
            images[x] = cylinder_quotient(cyl, pV, 2 - t) if t <= 2 else cylinder_quotient(cyl, pV, 0)
            branch[x] = "cylinder"
        else:
            gp = g.apply(pV)
            mix = affine_combination(g.codomain, [(t, gp), (1 - t, pU)])
            images[x] = _relabel(mix, M, "Y")
            branch[x] = "combination"
    # exact boundary and agreement conditions
    on_A = [x for x in region if dA[x] == 0]
    boundary = [x for x in region if as_fraction(int(dA[x])) == r]
    checks = {
        "on-A": all(images[x] == _relabel(pU_of[x], M, "Y") for x in on_A),
        "outer-boundary": all(images[x] == cylinder_quotient(cyl, pV_of[x], 0) and
                              images[x] == _relabel(pV_of[x], M, "X") for x in boundary),
        "threshold": all(cylinder_quotient(cyl, pV_of[x], 1) == _relabel(g.apply(pV_of[x]), M, "Y")
                         for x in region),
        "in-complex": all(images[x].support() in M.simplices and
                          sum(images[x].coords.values()) == 1 for x in region),
    }
    # coboundedness: preimages of the prisms sigma x [0, 1]
    bU = U.bound
    worst = 0
    for sig in g.domain.maximal():
        allowed = {("X", v) for v in sig} | {("Y", g.vertex_map[v]) for v in sig}
        pts = [x for x in region if images[x].support() <= allowed]
        if len(pts) > 1:
            worst = max(worst, space.diameter(pts))
    checks["cobounded"] = worst <= 2 * bU
    details = {"region": len(region), "A": len(on_A), "boundary": len(boundary),
               "outer_radius": str(outer), "mode": mode, "cobounded_diameter": worst,
               "b_U": bU, "b_V": V.bound,
               "threshold_points": sum(1 for x in region if 2 * as_fraction(int(dA[x])) == outer)}
    if len(region) > 1:
        vindex = {v: i for i, v in enumerate(M.vertices)}
        P = points_matrix([images[x] for x in region], vindex)
        lip = embedding_lipschitz(space.dist[np.ix_(region, region)], P,
                                  max_exhaustive=max_exhaustive)
        details["lipschitz"] = lip.value
        details["lipschitz_exhaustive"] = lip.exhaustive
        if epsilon is not None:
            details["lipschitz_ok"] = lip.value <= float(epsilon)
    return GluedMapData(M, images, branch, checks, details)


# ---------------------------------------------------------------- psi and the final cover

@dataclass
class SynthesisResult:
    ctx: ActionContext
    params: dict
    orbit: OrbitCover
    piece_covers: list
    edge_covers: dict
    interp_runs: list
    psi: GluedMapData
    cover: Cover = None
    verdict: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def build_psi(ctx, r, separation=None, overlap=None, root="base", strict=True, epsilon=None,
              c_n=2, max_exhaustive=3000):
    """Glue the per-piece projections and the per-edge interpolations into psi: Y -> K."""
    timings = {}
    t0 = time.monotonic()
    k = ctx.k
    space = ctx.space
    if separation is None:
        separation = max(1, 4 * ctx.lam * r)
    oc = orbit_cover(ctx, separation, r=r, overlap=overlap, root=root, strict=strict)
    timings["orbit_cover"] = time.monotonic() - t0
    OD = ctx.orbit_dist
    bars = [ctx.preimage(W) for W in oc.sets]
    near = [space.dist_to_set(sorted(b)) <= r for b in bars]
    in_count = np.sum(near, axis=0)
    if in_count.max() > 2:
        raise HypothesisFailure("edge-overlap", "a point lies within r of three pieces")
    # fine covers per piece
    t0 = time.monotonic()
    fine = []
    for b, nr in zip(bars, near):
        fine.append(region_covers(space, frozenset(np.nonzero(nr)[0].tolist()), r, k))
    timings["piece_covers"] = time.monotonic() - t0
    # edge regions and coarse covers
    t0 = time.monotonic()
    edge_A, edge_N, coarse = {}, {}, {}
    for (i, j) in oc.edges:
        A = ctx.preimage(oc.sets[i] & oc.sets[j])
        edge_A[(i, j)] = A
        edge_N[(i, j)] = frozenset(np.nonzero(space.dist_to_set(sorted(A)) <= r)[0].tolist())
    es = list(edge_N)
    for a in range(len(es)):
        for b in range(a + 1, len(es)):
            if edge_N[es[a]] & edge_N[es[b]]:
                raise HypothesisFailure("edge-overlap", f"edge regions {es[a]} and {es[b]} meet")
    for e in es:
        i, j = e
        bV = max(_bound_over(space, fine[i].cover.sets, edge_N[e]),
                 _bound_over(space, fine[j].cover.sets, edge_N[e]))
        coarse[e] = region_covers(space, edge_N[e], bV, k)
    timings["edge_covers"] = time.monotonic() - t0
    # core distance for the side rule
    core_dist = [OD[:, sorted(c)].min(axis=1) for c in oc.cores]
    t0 = time.monotonic()
    runs = []
    side_images = {}
    for e in es:
        i, j = e
        for side in (i, j):
            pts = [x for x in edge_N[e]
                   if _side(ctx, core_dist, x, i, j) == side]
            V = fine[side].cover
            U = coarse[e].cover
            run = lemma1_map(space, edge_A[e], r, V, U, epsilon=epsilon, c_n=c_n,
                             max_exhaustive=max_exhaustive)
            runs.append({"edge": e, "side": side, "data": run})
            for x in pts:
                side_images[x] = (e, side, run.images[x], run.branch[x])
    timings["interpolation"] = time.monotonic() - t0
    # assemble K and psi
    t0 = time.monotonic()
    simplices = []
    verts = []
    for w, fc in enumerate(fine):
        N = nerve(fc.cover, [("V", w, a) for a in range(len(fc.cover.sets))])
        verts += N.vertices
        simplices += N.maximal()
    for run in runs:
        e, side = run["edge"], run["side"]
        M = run["data"].complex
        verts += [_glue_label(v, e, side) for v in M.vertices]
        simplices += [[_glue_label(v, e, side) for v in s] for s in M.maximal()]
    K = OrientedComplex(list(dict.fromkeys(verts)), simplices, name="K")
    images, branch = {}, {}
    fine_dep = [_depth_rows(space, fc.cover.sets, range(space.n)) for fc in fine]
    ambiguous = 0
    for x in range(space.n):
        if x in side_images:
            e, side, img, br = side_images[x]
            images[x] = UniformPoint(K, {_glue_label(v, e, side): c for v, c in img.coords.items()})
            branch[x] = f"edge{e}:{br}"
            continue
        owners = [w for w in range(len(bars)) if near[w][x]]
        if len(owners) > 1:
            ambiguous += 1
            owners = sorted(owners, key=lambda w: (core_dist[w][ctx.orbit_of[x]], w))
        w = owners[0]
        p = _projection(fine_dep[w][x], [("V", w, a) for a in range(len(fine[w].cover.sets))], K)
        images[x] = p
        branch[x] = f"piece{w}"
    timings["assemble"] = time.monotonic() - t0
    psi = GluedMapData(K, images, branch)
    psi.checks["in-complex"] = all(images[x].support() in K.simplices for x in images)
    psi.checks["dimension"] = K.dimension <= k + 1
    psi.checks["interpolation"] = all(run["data"].ok for run in runs)
    psi.details.update({"ambiguous_points": ambiguous, "dimension": K.dimension,
                        "vertices": len(K.vertices)})
    t0 = time.monotonic()
    vindex = {v: i for i, v in enumerate(K.vertices)}
    P = points_matrix([images[x] for x in range(space.n)], vindex)
    lip = embedding_lipschitz(space, P, max_exhaustive=max_exhaustive)
    psi.details["lipschitz"] = lip.value
    psi.details["lipschitz_exhaustive"] = lip.exhaustive
    timings["lipschitz"] = time.monotonic() - t0
    return oc, fine, coarse, runs, psi, timings


def _bound_over(space, sets, pts):
    b = 0
    for s in sets:
        if s & pts:
            b = max(b, space.diameter(sorted(s)))
    return b


def _side(ctx, core_dist, x, i, j):
    o = ctx.orbit_of[x]
    di, dj = core_dist[i][o], core_dist[j][o]
    return i if (di, i) <= (dj, j) else j


def _glue_label(v, e, side):
    tag, a = v
    if tag == "X":
        return ("V", side, a)
    return ("U", e, a)


def asymptotic_constants(k, epsilon, r, lam, separation, c_n=2):
    """The thresholds of the asymptotic argument next to the values used."""
    eps = as_fraction(epsilon)
    v = nu(eps / (4 * c_n), k)
    return {"c_k": c_n, "nu": str(v), "r": r, "r_over_nu": bool(r > v),
            "r_over_8_over_eps": bool(r > 8 / eps),
            "separation_4_lambda_r": bool(separation >= 4 * lam * r)}


def theorem1_cover(ctx, d, r, separation=None, overlap=None, root="base", strict=True,
                   epsilon=None, c_n=2, max_exhaustive=3000):
    """Pull back the open stars of K through psi and verify the cover independently."""
    t_all = time.monotonic()
    if separation is None:
        separation = max(1, 4 * ctx.lam * r)
    oc, fine, coarse, runs, psi, timings = build_psi(
        ctx, r, separation=separation, overlap=overlap, root=root, strict=strict,
        epsilon=epsilon, c_n=c_n, max_exhaustive=max_exhaustive)
    K = psi.complex
    images = [psi.images[x] for x in range(ctx.space.n)]
    cov, labels = pullback_cover(ctx.space, images, K)
    verdict = verify_final_cover(ctx.space, [sorted(s) for s in cov.sets], d, ctx.k + 2)
    eps_used = psi.details["lipschitz"] if epsilon is None else epsilon
    diag = asymptotic_constants(ctx.k, Fraction(eps_used).limit_denominator(10 ** 6) if eps_used else 1,
                           r, ctx.lam, separation, c_n)
    diag["lipschitz_measured"] = psi.details["lipschitz"]
    diag["star_lebesgue_over_eps"] = (1 / ((K.dimension + 1) * psi.details["lipschitz"])
                                      if psi.details["lipschitz"] else INF)
    timings["total"] = time.monotonic() - t_all
    params = {"d": d, "r": r, "separation": separation, "overlap": oc.overlap, "root": root,
              "strict": strict, "k": ctx.k, "lambda": ctx.lam, "c_n": c_n}
    return SynthesisResult(ctx, params, oc, fine, coarse, runs, psi, cov, verdict, diag, timings)


def verify_final_cover(space, sets, d, max_multiplicity):
    """Independent recheck of a cover: coverage, multiplicity, Lebesgue number, bound."""
    cov = Cover(space, [frozenset(s) for s in sets])
    leb = lebesgue_number(space, cov.sets)
    out = {"covers": cov.is_cover(), "multiplicity": cov.multiplicity,
           "lebesgue": leb, "bound": cov.bound, "sets": len(cov.sets),
           "max_multiplicity": max_multiplicity, "d": d}
    out["ok"] = bool(out["covers"] and out["multiplicity"] <= max_multiplicity and leb > d)
    return out
