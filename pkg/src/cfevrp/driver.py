"""Top-level solve loop composing the sub-problem solvers.

The full algorithm iterates: build routes, assign vehicles, schedule
against capacities; when scheduling fails, try alternative leg paths and
re-check the routes, backtracking through assignments and route sets as
the inner problems run dry.  A relaxed mode skips capacity verification
entirely and only closes the route/assignment loop.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .assignment import Assignment, compute_route_attributes, solve_assignment
from .capacity import Schedule, RouteSchedule, build_visit_lists, verify_capacity
from .graph import all_pairs_task_paths
from .instance import Instance
from .pathschanger import solve_paths_changing
from .routesverify import verify_routes
from .routing import PathMap, Route, RouteSet, solve_routing
from .errors import InvariantViolation

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
ABORTED = "aborted"


@dataclass(frozen=True)
class Limits:
    max_path_sets: int = 50          # alternative path combinations per assignment
    max_route_sets: int | None = None
    max_assignments: int | None = None


@dataclass(frozen=True)
class Event:
    phase: str       # router | assign | capacity | paths | routes_check
    sat: bool
    seconds: float
    detail: str = ""


@dataclass
class SolveOutcome:
    status: str
    schedule: Schedule | None
    events: list[Event] = field(default_factory=list)
    reason: str = ""

    @property
    def paths_changer_calls(self) -> int:
        return sum(1 for e in self.events if e.phase == "paths")


def total_distance(outcome: SolveOutcome) -> float:
    assert outcome.status == FEASIBLE and outcome.schedule is not None
    return outcome.schedule.total_distance


def shortest_path_map(inst: Instance) -> PathMap:
    return all_pairs_task_paths(inst.graph, inst.task_locations())


def routes_from_task_orders(
    inst: Instance,
    sp: PathMap,
    orders: list[tuple[int, list[str]]],
) -> RouteSet:
    """Build a route set from explicit (depot, task order) pairs.

    Used to pin the first iteration's routes in experiments on tie-break
    sensitivity; the travel links are recorded so the set can be excluded
    later just like a solver-produced one.
    """
    routes = []
    lits: set[tuple[str, str]] = set()
    served: set[str] = set()
    for depot, tasks in orders:
        if depot not in inst.depots:
            raise InvariantViolation(f"{depot} is not a depot")
        locs = [depot] + [inst.tasks[t].location for t in tasks] + [depot]
        legs = tuple(sp[(a, b)] for a, b in zip(locs, locs[1:]))
        routes.append(Route(depot, tuple(tasks), legs))
        chain = [inst.start_tasks[depot].id] + list(tasks) + [inst.end_tasks[depot].id]
        lits.update(zip(chain, chain[1:]))
        served.update(tasks)
    if served != set(inst.real_task_ids()):
        raise InvariantViolation("forced routes must cover every task exactly once")
    return RouteSet(tuple(routes), frozenset(lits))


class _Clock:
    def __init__(self, events: list[Event]):
        self.events = events

    def run(self, phase: str, fn, ok=lambda r: r is not None, detail: str = ""):
        t0 = time.perf_counter()
        result = fn()
        self.events.append(
            Event(phase, bool(ok(result)), time.perf_counter() - t0, detail))
        return result


def comsat_solve(
    inst: Instance,
    limits: Limits = Limits(),
    force_first_routes: list[tuple[int, list[str]]] | None = None,
) -> SolveOutcome:
    """Full solve: routes, assignment, conflict-free schedule."""
    sp = shortest_path_map(inst)
    events: list[Event] = []
    clock = _Clock(events)
    pr = []  # excluded route sets
    route_sets = 0
    forced = force_first_routes

    while True:
        if limits.max_route_sets is not None and route_sets >= limits.max_route_sets:
            return SolveOutcome(ABORTED, None, events, "route set limit reached")
        if forced is not None:
            cr = routes_from_task_orders(inst, sp, forced)
            forced = None
            events.append(Event("router", True, 0.0, "forced routes"))
        else:
            cr = clock.run("router", lambda: solve_routing(inst, sp, pr))
        if cr is None:
            return SolveOutcome(INFEASIBLE, None, events, "no route set serves all tasks")
        route_sets += 1

        pa = []  # excluded assignments for this route set
        assignments = 0
        while True:
            if limits.max_assignments is not None and assignments >= limits.max_assignments:
                return SolveOutcome(ABORTED, None, events, "assignment limit reached")
            attrs = compute_route_attributes(cr, inst)
            ca = clock.run(
                "assign",
                lambda: solve_assignment(cr, attrs, inst, pa))
            if ca is None:
                pr.append(cr.theta_lits)
                break  # back to the router
            assignments += 1

            outcome = _capacity_phase(inst, cr, ca, limits, clock)
            if outcome is not None:
                return outcome
            pa.append(ca.alpha_lits)  # all path sets for ca are exhausted


def _capacity_phase(inst, cr, ca, limits, clock):
    """Capacity check with the path-changing inner loop.

    Returns a final SolveOutcome, or None to signal 'try a new assignment'.
    """
    current = cr  # carries the current leg paths
    pp = []       # excluded path combinations for this assignment
    path_sets = 0
    while True:
        vls = build_visit_lists(current, inst)
        cvs, _stats = clock.run(
            "capacity",
            lambda: verify_capacity(ca, vls, inst),
            ok=lambda pair: pair[0] is not None)
        if cvs is not None:
            return SolveOutcome(FEASIBLE, cvs, clock.events)
        while True:
            if path_sets >= limits.max_path_sets:
                return SolveOutcome(
                    ABORTED, None, clock.events, "path set limit reached")
            np = clock.run(
                "paths", lambda: solve_paths_changing(cr, inst, pp))
            path_sets += 1
            if np is None:
                return None  # every path combination failed: new assignment
            pp.append(np.z_lits)
            candidate = np.apply(cr)
            rvf = clock.run(
                "routes_check",
                lambda: verify_routes(candidate, inst),
                ok=bool)
            if rvf:
                current = candidate
                break  # re-run capacity verification with the new paths


def c_comsat_solve(inst: Instance, limits: Limits = Limits()) -> SolveOutcome:
    """Relaxed solve: ignore node/edge capacities entirely."""
    sp = shortest_path_map(inst)
    events: list[Event] = []
    clock = _Clock(events)
    pr = []
    route_sets = 0
    while True:
        if limits.max_route_sets is not None and route_sets >= limits.max_route_sets:
            return SolveOutcome(ABORTED, None, events, "route set limit reached")
        cr = clock.run("router", lambda: solve_routing(inst, sp, pr))
        if cr is None:
            return SolveOutcome(INFEASIBLE, None, events, "no route set serves all tasks")
        route_sets += 1
        attrs = compute_route_attributes(cr, inst)
        ca = clock.run("assign", lambda: solve_assignment(cr, attrs, inst, []))
        if ca is None:
            pr.append(cr.theta_lits)
            continue
        return SolveOutcome(FEASIBLE, _timed_schedule(inst, cr, ca), events)


def _timed_schedule(inst: Instance, cr: RouteSet, ca: Assignment) -> Schedule:
    """Forward-time each route along its legs, waiting only for windows."""
    vls = build_visit_lists(cr, inst)
    routes = []
    for r, vl in enumerate(vls):
        node_in = []
        node_out = []
        edge_in = []
        t = ca.starts[r]
        for p, pos in enumerate(vl.positions):
            t = max(t, pos.lower)
            node_in.append(t)
            t += pos.service
            node_out.append(t)
            if p < len(vl.edges):
                edge_in.append(t)
                ekey = vl.edges[p]
                t += inst.graph.edges[ekey].length / inst.fleet.speed
        routes.append(RouteSchedule(
            vehicle=ca.vehicle_of[r],
            depot=vl.depot,
            tasks=vl.route_tasks,
            nodes=tuple(p.node for p in vl.positions),
            node_in=tuple(node_in),
            node_out=tuple(node_out),
            position_tasks=tuple(p.tasks for p in vl.positions),
            edges=vl.edges,
            edge_in=tuple(edge_in),
            length=vl.route_length,
            start=ca.starts[r],
        ))
    return Schedule(tuple(routes))
