"""Critical graph: the six critical trajectories and the short ones among them."""
from __future__ import annotations

import cmath
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .core import GateResult, QuadDiff, launch_directions, short_trajectory_exists
from .trace import DEFAULT_CONFIG, HORIZONTAL, TraceConfig, TrajectoryPath, trace

log = logging.getLogger(__name__)

MERGE_RTOL = 1e-5
ARRIVAL_MATCH = 0.35   # radians; launch directions at a zero are 2 pi / 3 apart


@dataclass(frozen=True)
class ShortTrajectory:
    pair: tuple              # ("a", "b"), or ("a", "a") for a loop
    path: TrajectoryPath     # traced from the first zero of the pair
    partner: Optional[int]   # index of the matching trace from the other end
    index: int = -1          # index of ``path`` in the graph's trajectories

    @property
    def is_loop(self) -> bool:
        return self.pair[0] == self.pair[1]

    def to_dict(self, with_points=True):
        out = {"pair": list(self.pair), "index": self.index, "partner": self.partner}
        out.update(self.path.to_dict(with_points))
        return out


@dataclass(frozen=True)
class CriticalGraph:
    qd: QuadDiff
    kind: str
    trajectories: tuple          # 6 paths, ordered by (zero, launch angle)
    short_trajectories: tuple    # ShortTrajectory
    gate: GateResult

    @property
    def gate_values(self):
        return self.gate.v_plus, self.gate.v_minus

    @property
    def warnings(self):
        return tuple(w for t in self.trajectories for w in t.warnings)

    def short_indices(self):
        """Indices (into ``trajectories``) of traces that are halves of short trajectories."""
        out = set()
        for st in self.short_trajectories:
            out.add(st.index)
            if st.partner is not None:
                out.add(st.partner)
        return out

    def to_dict(self, with_points=True):
        return {
            "params": self.qd.to_dict(),
            "kind": self.kind,
            "gate": self.gate.to_dict(),
            "trajectories": [t.to_dict(with_points) for t in self.trajectories],
            "short_trajectories": [s.to_dict(with_points) for s in self.short_trajectories],
        }


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QDFLOW_THREADS", "1")))
    except ValueError:
        return 1


def _arrival_angle(path: TrajectoryPath) -> float:
    pts = path.points
    end = pts[-1]
    for p in pts[-2::-1]:
        if abs(p - end) > 0:
            return cmath.phase(p - end)
    return 0.0


def _finite_end(path: TrajectoryPath, sep: float) -> Optional[str]:
    """The zero a trace ends at, or nearly reaches (candidate for refinement)."""
    ep = path.endpoint
    if ep.kind == "hits_zero":
        return ep.zero
    close = [lab for lab in "ab" if path.approach[lab] < MERGE_RTOL * sep]
    return close[0] if close else None


def _angle_gap(s, t):
    return abs(cmath.phase(cmath.exp(1j * (s - t))))


def critical_graph(qd: QuadDiff, budget: Optional[float] = None, kind: str = HORIZONTAL,
                   config: Optional[TraceConfig] = None, gate_tol: float = 1e-9) -> CriticalGraph:
    """Trace the 3 + 3 critical trajectories and register the short ones.

    Short (finite critical) trajectories are those ending at a zero: either
    the other one or, for a loop, the launch zero.  A trace that passes
    within ``1e-5 |a - b|`` of a zero without being captured is re-traced with
    a tenfold tighter tolerance before being accepted or rejected.  Each short
    trajectory is registered once, with the matching trace from its other end
    recorded as ``partner``.
    """
    cfg = config or DEFAULT_CONFIG
    jobs = [(lab, th) for lab in "ab" for th in launch_directions(qd, lab, kind)]

    def run(job):
        lab, th = job
        return trace(qd, qd.zero(lab), th, kind, budget, cfg)

    nthreads = _threads()
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            paths = list(pool.map(run, jobs))
    else:
        paths = [run(j) for j in jobs]

    sep = abs(qd.a - qd.b)
    hits = []
    for i, (lab, th) in enumerate(jobs):
        p = paths[i]
        if _finite_end(p, sep) is None:
            continue
        if p.endpoint.kind != "hits_zero":
            p = trace(qd, qd.zero(lab), th, kind, budget, cfg.tightened(10.0))
            paths[i] = p
            if p.endpoint.kind != "hits_zero":
                log.info("near miss from %s at angle %.6f rejected after refinement", lab, th)
                continue
        hits.append(i)

    # Every short trajectory is traced once from each end (a loop: twice from
    # its zero).  The partner is the trace launched along the arrival direction.
    shorts = []
    used = set()
    for i in hits:
        if i in used:
            continue
        end = paths[i].endpoint.zero
        arrive = _arrival_angle(paths[i])
        partner = None
        for j in hits:
            if j in used or j == i or jobs[j][0] != end:
                continue
            if _angle_gap(jobs[j][1], arrive) < ARRIVAL_MATCH:
                partner = j
                break
        used.add(i)
        if partner is not None:
            used.add(partner)
        shorts.append(ShortTrajectory((jobs[i][0], end), paths[i], partner, i))

    return CriticalGraph(qd, kind, tuple(paths), tuple(shorts),
                         short_trajectory_exists(qd, gate_tol))


def trajectories_to_infinity(graph: CriticalGraph):
    """Launch zeros of the critical trajectories that diverge to infinity."""
    return [t.launch.zero for t in graph.trajectories if t.endpoint.kind == "to_infinity"]
