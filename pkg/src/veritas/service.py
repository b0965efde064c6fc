"""HTTP session service: load a network, toggle findings, read posteriors.

A session holds one network and its current findings.  Every response
carrying posteriors also carries the "balance": the log-odds of a
target hypothesis state decomposed as prior plus one additive
contribution per finding, replayed in insertion order.  Certainty has
no finite log-odds, so a falsified (or certain) target serializes its
leaning as null with a flag instead.

Endpoints: POST /sessions, GET /sessions/{id}/posteriors,
PUT/DELETE /sessions/{id}/findings/{node}, GET /scenarios,
POST /simulate/walks, POST /propagate.

Concurrency: a per-session lock serializes mutations and reads of the
same session; distinct sessions proceed independently.  The store is
in-memory; `create_app(snapshot_path=...)` optionally reloads sessions
from a snapshot file on startup and writes one on shutdown.
"""

from __future__ import annotations

import json
import math
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import scenarios
from .errors import (
    DomainError,
    ImpossibleFindingsError,
    NetworkValidationError,
)
from .evidence import jl_from_odds, odds_from_prob
from .network import (
    BUILTIN_EXAMPLES,
    Network,
    builtin_network,
    infer_marginals,
    network_from_json,
    network_to_dict,
)

__all__ = [
    "SessionStore",
    "Session",
    "Target",
    "create_app",
]


@dataclass(frozen=True)
class Target:
    """The hypothesis state whose log-odds the balance tracks."""

    node: str
    state: str


@dataclass
class Session:
    id: str
    network: Network
    target: Target | None
    findings: dict[str, str] = field(default_factory=dict)
    created: str = ""
    updated: str = ""
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _payload_cache: dict | None = field(default=None, repr=False)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _default_target(net: Network) -> Target | None:
    for node in net.nodes:
        if not node.parents:
            return Target(node.id, node.states[0])
    return None


def _target_jl(net: Network, findings: dict[str, str], target: Target) -> float:
    post = infer_marginals(net, findings)
    p = post.prob(target.node, target.state)
    return jl_from_odds(odds_from_prob(p))


def _jl_json(value: float) -> float | None:
    return None if math.isinf(value) else value


def _balance(net: Network, findings: dict[str, str], target: Target | None) -> dict | None:
    """Decompose the target leaning: prior plus one delta per finding.

    Each delta is leaning-after minus leaning-before in insertion
    order, so the entries always sum (with the prior) to the current
    leaning; retractions simply vanish from the story.
    """
    if target is None:
        return None
    prior_jl = _target_jl(net, {}, target)
    entries = []
    running: dict[str, str] = {}
    jl_before = prior_jl
    for node, state in findings.items():
        running[node] = state
        jl_after = _target_jl(net, running, target)
        if math.isinf(jl_after) or math.isinf(jl_before):
            delta = None  # a step into (or within) certainty has no finite weight
        else:
            delta = jl_after - jl_before
        entries.append({"node": node, "state": state, "delta_jl": delta})
        jl_before = jl_after
    post = infer_marginals(net, findings)
    p = post.prob(target.node, target.state)
    jl = jl_from_odds(odds_from_prob(p))
    return {
        "target": {"node": target.node, "state": target.state},
        "prior_jl": _jl_json(prior_jl),
        "entries": entries,
        "jl": _jl_json(jl),
        "probability": float(p),
        "falsified": p == 0,
        "certain": p == 1,
    }


class SessionStore:
    """In-memory session registry with per-session locking."""

    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    def create_session(
        self,
        builtin: str | None = None,
        network_doc: dict | None = None,
        target: Target | None = None,
    ) -> Session:
        if (builtin is None) == (network_doc is None):
            raise DomainError("give exactly one of builtin or network")
        if builtin is not None:
            net = builtin_network(builtin)
        else:
            net = network_from_json(json.dumps(network_doc))
        if target is not None:
            net.node(target.node).state_index(target.state)  # validates both
        else:
            target = _default_target(net)
        now = _now()
        session = Session(
            id=uuid.uuid4().hex,
            network=net,
            target=target,
            created=now,
            updated=now,
        )
        with self._registry_lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return session

    def session_ids(self) -> list[str]:
        with self._registry_lock:
            return list(self._sessions)

    def set_finding(self, session: Session, node: str, state: str) -> dict:
        with session.lock:
            net = session.network
            net.node(node).state_index(state)  # raises DomainError when invalid
            if session.findings.get(node) == state:
                return self._payload_locked(session)
            proposed = dict(session.findings)
            # a changed state restarts that finding's place in the story
            proposed.pop(node, None)
            proposed[node] = state
            infer_marginals(net, proposed)  # ImpossibleFindingsError leaves state alone
            session.findings = proposed
            session.updated = _now()
            session._payload_cache = None
            return self._payload_locked(session)

    def retract_finding(self, session: Session, node: str) -> dict:
        with session.lock:
            if node not in session.findings:
                raise KeyError(node)
            del session.findings[node]
            session.updated = _now()
            session._payload_cache = None
            return self._payload_locked(session)

    def get_posteriors(self, session: Session) -> dict:
        with session.lock:
            return self._payload_locked(session)

    def _payload_locked(self, session: Session) -> dict:
        if session._payload_cache is None:
            post = infer_marginals(session.network, session.findings)
            session._payload_cache = {
                "session_id": session.id,
                "findings": dict(session.findings),
                "posteriors": post.as_dict(),
                "balance": _balance(
                    session.network, session.findings, session.target
                ),
                "updated": session.updated,
            }
        return session._payload_cache

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> list[dict]:
        out = []
        for sid in self.session_ids():
            s = self.get(sid)
            with s.lock:
                out.append(
                    {
                        "id": s.id,
                        "network": network_to_dict(s.network),
                        "findings": dict(s.findings),
                        "target": (
                            {"node": s.target.node, "state": s.target.state}
                            if s.target
                            else None
                        ),
                        "created": s.created,
                        "updated": s.updated,
                    }
                )
        return out

    def restore(self, snapshot: list[dict]) -> None:
        for item in snapshot:
            net = network_from_json(json.dumps(item["network"]))
            target = (
                Target(item["target"]["node"], item["target"]["state"])
                if item.get("target")
                else None
            )
            session = Session(
                id=item["id"],
                network=net,
                target=target,
                findings=dict(item["findings"]),
                created=item["created"],
                updated=item["updated"],
            )
            with self._registry_lock:
                self._sessions[session.id] = session


# ---------------------------------------------------------------------------
# HTTP layer


class TargetBody(BaseModel):
    node: str
    state: str


class CreateSessionBody(BaseModel):
    builtin: str | None = None
    network: dict | None = None
    target: TargetBody | None = None


class FindingBody(BaseModel):
    state: str


class WalksBody(BaseModel):
    truth: str = "H1"
    n_draws: int = 50
    n_traj: int = 100
    seed: int = 0


class PropagateBody(BaseModel):
    n_samples: int = 1_000_000
    seed: int = 1
    interval_width: float = 0.02
    display_bins: int = Field(default=100, ge=1, le=10_000)


def _http_error(status: int, kind: str, exc: Exception, **extra) -> HTTPException:
    detail = {"kind": kind, "message": str(exc), **extra}
    return HTTPException(status_code=status, detail=detail)


def create_app(snapshot_path: str | Path | None = None) -> FastAPI:
    store = SessionStore()
    path = Path(snapshot_path) if snapshot_path else None

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if path and path.exists():
            store.restore(json.loads(path.read_text()))
        yield
        if path:
            path.write_text(json.dumps(store.snapshot(), indent=2))

    app = FastAPI(title="veritas", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    def _session_or_404(session_id: str) -> Session:
        try:
            return store.get(session_id)
        except KeyError:
            raise _http_error(
                404, "unknown-session", KeyError(f"no session {session_id}")
            )

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        target = Target(body.target.node, body.target.state) if body.target else None
        try:
            session = store.create_session(
                builtin=body.builtin, network_doc=body.network, target=target
            )
        except (NetworkValidationError, DomainError) as exc:
            raise _http_error(
                422,
                "invalid-network",
                exc,
                **(
                    {"problems": exc.problems}
                    if isinstance(exc, NetworkValidationError)
                    else {}
                ),
            )
        payload = dict(store.get_posteriors(session))  # copy: cache stays lean
        payload["network"] = network_to_dict(session.network)
        payload["created"] = session.created
        return payload

    @app.get("/sessions/{session_id}/posteriors")
    def get_posteriors(session_id: str):
        return store.get_posteriors(_session_or_404(session_id))

    @app.put("/sessions/{session_id}/findings/{node}")
    def set_finding(session_id: str, node: str, body: FindingBody):
        session = _session_or_404(session_id)
        try:
            return store.set_finding(session, node, body.state)
        except ImpossibleFindingsError as exc:
            raise _http_error(
                409, "impossible-evidence", exc, findings=exc.findings
            )
        except DomainError as exc:
            raise _http_error(422, "invalid-finding", exc)

    @app.delete("/sessions/{session_id}/findings/{node}")
    def retract_finding(session_id: str, node: str):
        session = _session_or_404(session_id)
        try:
            return store.retract_finding(session, node)
        except KeyError as exc:
            raise _http_error(404, "no-such-finding", exc)

    @app.get("/scenarios")
    def list_scenarios():
        return {
            "builtins": {
                "pattern": "box-testimony-N",
                "examples": list(BUILTIN_EXAMPLES),
            },
            "reports": {
                "aids": scenarios.aids_report().as_dict(),
                "box": scenarios.box_report().as_dict(),
                "columbo": scenarios.columbo_report().as_dict(),
            },
        }

    @app.post("/simulate/walks")
    def simulate_walks(body: WalksBody):
        try:
            result = scenarios.simulate_walks(
                truth=body.truth,
                n_draws=body.n_draws,
                n_traj=body.n_traj,
                seed=body.seed,
            )
        except DomainError as exc:
            raise _http_error(422, "invalid-parameters", exc)
        stats = scenarios.walk_statistics().for_truth(body.truth)
        payload = result.as_dict()
        if body.n_draws >= 1:
            expected = stats.scaled(body.n_draws)
            payload["expected_final"] = {
                "mean": expected.mean,
                "sd": expected.sd,
                "half_width_95": expected.half_width_95,
            }
        return payload

    @app.post("/propagate")
    def propagate(body: PropagateBody):
        try:
            stats = scenarios.propagate_z(
                n_samples=body.n_samples,
                seed=body.seed,
                interval_width=body.interval_width,
            )
        except DomainError as exc:
            raise _http_error(422, "invalid-parameters", exc)
        payload = stats.as_dict(include_histogram=False)
        payload["display_histogram"] = _rebin(
            stats.histogram_edges, stats.histogram_masses, body.display_bins
        )
        return payload

    return app


def _rebin(
    edges: tuple[float, ...], masses: tuple[float, ...], n_bins: int
) -> dict:
    """Merge the fine histogram into display bins, preserving total mass."""
    n_fine = len(masses)
    n_bins = min(n_bins, n_fine)
    coarse_edges = [edges[0]]
    coarse_masses = []
    start = 0
    for i in range(n_bins):
        stop = round((i + 1) * n_fine / n_bins)
        coarse_masses.append(sum(masses[start:stop]))
        coarse_edges.append(edges[stop])
        start = stop
    return {"edges": coarse_edges, "masses": coarse_masses}
