"""Alternative path synthesis for route legs.

One Boolean model covers every leg of every route at once: node and edge
selection variables per leg, flow-style degree constraints tying them into
a simple chain from the leg's start to its end.  The total number of used
nodes is minimized and previously returned path combinations are excluded,
so repeated calls enumerate all simple-path combinations.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import solver as S
from .errors import DecodingCycle
from .graph import NodeId, Path, PlantGraph
from .routing import RouteSet
from .instance import Instance

EdgeKey = tuple[NodeId, NodeId]
ZLits = frozenset[tuple[int, int, EdgeKey]]


@dataclass(frozen=True)
class PathAssignment:
    legs: dict[tuple[int, int], Path]  # (route index, leg index) -> path
    z_lits: ZLits

    def apply(self, cr: RouteSet) -> RouteSet:
        routes = []
        for r, route in enumerate(cr.routes):
            legs = tuple(
                self.legs[(r, i)] for i in range(len(route.legs))
            )
            routes.append(route.with_legs(legs))
        return RouteSet(tuple(routes), cr.theta_lits)


def solve_paths_changing(
    cr: RouteSet,
    inst: Instance,
    pp: list[ZLits],
) -> PathAssignment | None:
    """A fresh minimal-node path combination for all legs, or None."""
    g: PlantGraph = inst.graph
    ctx = S.Context()
    legs: list[tuple[int, int, NodeId, NodeId]] = []
    degenerate: dict[tuple[int, int], Path] = {}
    for r, route in enumerate(cr.routes):
        locs = route.locations(inst)
        for i, (xi, pi) in enumerate(zip(locs, locs[1:])):
            if xi == pi:
                # the empty path is the only simple path from a node to itself
                degenerate[(r, i)] = Path((xi,), 0.0)
            else:
                legs.append((r, i, xi, pi))

    w: dict[tuple[int, int, NodeId], S.VarRef] = {}
    z: dict[tuple[int, int, EdgeKey], S.VarRef] = {}
    for r, i, _, _ in legs:
        for n in sorted(g.nodes):
            w[(r, i, n)] = ctx.new_bool(f"w[{r},{i},{n}]")
        for e in sorted(g.edges):
            z[(r, i, e)] = ctx.new_bool(f"z[{r},{i},{e[0]}-{e[1]}]")

    for r, i, xi, pi in legs:
        ctx.assert_formula(S.and_(
            S.bvar(w[(r, i, xi)]), S.bvar(w[(r, i, pi)])))
        ctx.assert_formula(S.exactly(
            [z[(r, i, e.key)] for e in g.out_edges(xi)], 1))
        ctx.assert_formula(S.exactly(
            [z[(r, i, e.key)] for e in g.in_edges(pi)], 1))
        for e in sorted(g.edges):
            ctx.assert_formula(S.implies(
                S.bvar(z[(r, i, e)]),
                S.not_(S.bvar(z[(r, i, (e[1], e[0]))])),
            ))
        for n in sorted(g.nodes):
            if n in (xi, pi):
                continue
            outs = [z[(r, i, e.key)] for e in g.out_edges(n)]
            ins = [z[(r, i, e.key)] for e in g.in_edges(n)]
            ctx.assert_formula(S.ite(
                S.bvar(w[(r, i, n)]),
                S.and_(S.exactly(outs, 1), S.exactly(ins, 1)),
                S.and_(S.exactly(outs, 0), S.exactly(ins, 0)),
            ))

    for lits in pp:
        ctx.assert_formula(S.or_(*[
            S.not_(S.bvar(z[t])) for t in sorted(lits)
        ]))

    res = ctx.minimize(sorted(w.values(), key=lambda v: v.idx))
    if not res.sat:
        return None
    m = res.model
    out: dict[tuple[int, int], Path] = dict(degenerate)
    lits: set[tuple[int, int, EdgeKey]] = set()
    for r, i, xi, pi in legs:
        chosen = {
            e: m.value(z[(r, i, e)]) is True for e in g.edges
        }
        succ: dict[NodeId, NodeId] = {}
        for (a, b), val in chosen.items():
            if val and a in succ:
                raise DecodingCycle(f"leg ({r},{i}): node {a} has two exits")
            if val:
                succ[a] = b
        seq = [xi]
        cur = xi
        while cur != pi:
            if cur not in succ:
                raise DecodingCycle(f"leg ({r},{i}): chain breaks at {cur}")
            cur = succ[cur]
            if cur in seq:
                raise DecodingCycle(f"leg ({r},{i}): cycle through {cur}")
            seq.append(cur)
        path = g.path_between(tuple(seq))
        out[(r, i)] = path
        for e in path.edge_keys:
            lits.add((r, i, e))
    return PathAssignment(out, frozenset(lits))
