"""Blueprint verifier: finds topology inconsistencies and optionally repairs them.

Six rules, run in order:

  R1-REQ-MATCH     requirement/capability matching, occurrence bounds,
                   relationship-override conformance
  R2-LOCALITY      a single pipeline connection whose local/remote kind
                   contradicts where the two blocks are actually hosted
  R3-DUPLICATE-CONN more than one connection between the same ordered pair
  R4-ENCRYPTION    every Encrypt reaches a Decrypt and vice versa;
                   reachable pairs must share a passphrase
  R5-HOSTING       host assignments whose target violates the declared
                   host node type (NiFi pipelines off NiFi, AWS standalone
                   tasks off AWSPlatform, ...)
  R6-SCHEDULING    scheduling strategy in the allowed set, cron expressions
                   parseable where CRON scheduling applies

R2, R3, and R4 passphrase mismatches are fixable; fixes never add or remove
node templates, only rewrite connection kinds, drop duplicate edges, and
re-key passphrases.  Capability-side occurrence minimums are not enforced
(idle capacity is legal), and the local/remote connection requirement pair
is counted jointly against its minimum so a block needs *a* downstream,
not one of each kind.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass
from enum import Enum

from . import catalog as cat
from .cron import is_valid_cron
from .errors import (
    HostCycleError,
    MissingHostError,
    NotAPipelineError,
    ToscaflowError,
    VerifierNonConvergenceError,
)
from .model import (
    UNBOUNDED,
    RequirementAssignment,
    ServiceTemplate,
    evaluate_intrinsic,
    resolve_type,
)

R1_REQ_MATCH = "R1-REQ-MATCH"
R2_LOCALITY = "R2-LOCALITY"
R3_DUPLICATE_CONN = "R3-DUPLICATE-CONN"
R4_ENCRYPTION = "R4-ENCRYPTION"
R5_HOSTING = "R5-HOSTING"
R6_SCHEDULING = "R6-SCHEDULING"

RULES = (R1_REQ_MATCH, R2_LOCALITY, R3_DUPLICATE_CONN, R4_ENCRYPTION,
         R5_HOSTING, R6_SCHEDULING)

ERROR = "error"
FIXABLE = "fixable"
WARNING = "warning"

MAX_FIX_PASSES = 3


@dataclass
class Diagnostic:
    """One verifier finding."""

    rule: str
    severity: str
    nodes: list[str]
    message: str
    fix: str | None = None

    def key(self):
        return (self.rule, tuple(self.nodes), self.message)

    def to_dict(self):
        return {"rule": self.rule, "severity": self.severity,
                "nodes": list(self.nodes), "message": self.message,
                "fix": self.fix}


class Locality(Enum):
    LOCAL = "local"
    REMOTE = "remote"


def report_to_dict(diagnostics, fixed: bool):
    """The stable JSON shape of a verification report."""
    return {"diagnostics": [d.to_dict() for d in diagnostics], "fixed": fixed}


class _Ctx:
    """Per-template resolution cache with failure-tolerant helpers."""

    def __init__(self, template: ServiceTemplate, defs):
        self.template = template
        self.defs = defs
        self._resolved = {}

    def resolved_type(self, type_name):
        if type_name not in self._resolved:
            try:
                self._resolved[type_name] = resolve_type(type_name, self.defs)
            except ToscaflowError:
                self._resolved[type_name] = None
        return self._resolved[type_name]

    def resolved_node(self, node_name):
        node = self.template.node_templates.get(node_name)
        return None if node is None else self.resolved_type(node.type)

    def subtype(self, a, b) -> bool:
        resolved = self.resolved_type(a)
        return resolved is not None and b in resolved.ancestry

    def is_pipeline(self, node_name) -> bool:
        resolved = self.resolved_node(node_name)
        return resolved is not None and cat.ABSTRACT_DATA_PIPELINE in resolved.ancestry

    def effective_property(self, node_name, prop_name):
        """Assigned value (intrinsics evaluated) or the type default."""
        node = self.template.node_templates[node_name]
        if prop_name in node.property_values:
            try:
                return evaluate_intrinsic(node.property_values[prop_name], node,
                                          self.template, self.defs)
            except (ToscaflowError, ValueError):
                return None
        resolved = self.resolved_node(node_name)
        if resolved is not None and prop_name in resolved.properties:
            return resolved.properties[prop_name].default
        return None

    def connection_assignments(self, node_name):
        """(assignment, effective relationship kind) for pipeline connections.

        An assignment counts as a connection when its requirement definition
        demands a ConnectToPipeline-typed capability.  Assignments whose
        requirement name does not exist on the type are R1 territory and are
        skipped here.
        """
        node = self.template.node_templates[node_name]
        resolved = self.resolved_node(node_name)
        if resolved is None:
            return []
        by_name = {r.name: r for r in resolved.requirements}
        out = []
        for assignment in node.requirement_assignments:
            req = by_name.get(assignment.name)
            if req is None:
                continue
            if not self.subtype(req.capability_type, cat.CONNECT_TO_PIPELINE_CAP):
                continue
            kind = assignment.relationship or req.relationship_type
            out.append((assignment, kind))
        return out


def _defs_for(template, defs):
    return template.combined_definitions() if defs is None else defs


# --------------------------------------------------------------------------
# hosting
# --------------------------------------------------------------------------

def host_chain(node_name: str, template: ServiceTemplate, defs=None) -> list[str]:
    """The node followed by its transitive hosts, up to an unhosted template.

    Follows the first ``host`` assignment of each template.  Raises
    HostCycleError on a loop and MissingHostError when a required host is
    unassigned or names a missing template.
    """
    defs = _defs_for(template, defs)
    ctx = _Ctx(template, defs)
    return _host_chain(ctx, node_name)


def _host_chain(ctx: _Ctx, node_name: str) -> list[str]:
    if node_name not in ctx.template.node_templates:
        raise MissingHostError(f"no node template named {node_name!r}")
    chain = [node_name]
    visited = {node_name}
    current = node_name
    while True:
        resolved = ctx.resolved_node(current)
        if resolved is None:
            raise MissingHostError(f"type of {current!r} does not resolve")
        host_req = next((r for r in resolved.requirements if r.name == "host"), None)
        if host_req is None:
            return chain
        node = ctx.template.node_templates[current]
        assignment = next((a for a in node.requirement_assignments
                           if a.name == "host"), None)
        if assignment is None:
            if host_req.occurrences[0] >= 1:
                raise MissingHostError(f"{current!r} has no host assignment")
            return chain
        target = assignment.target
        if target not in ctx.template.node_templates:
            raise MissingHostError(f"{current!r} is hosted on unknown template "
                                   f"{target!r}")
        if target in visited:
            raise HostCycleError(
                "host cycle: " + " -> ".join(chain + [target]))
        chain.append(target)
        visited.add(target)
        current = target


def colocated(a: str, b: str, template: ServiceTemplate, defs=None) -> Locality:
    """LOCAL when both pipelines sit on the same NiFi template, else REMOTE."""
    defs = _defs_for(template, defs)
    ctx = _Ctx(template, defs)
    return _colocated(ctx, a, b)


def _colocated(ctx: _Ctx, a: str, b: str) -> Locality:
    for name in (a, b):
        if not ctx.is_pipeline(name):
            raise NotAPipelineError(f"{name!r} is not a pipeline node")
    nifi_a = _nearest_nifi(ctx, a)
    nifi_b = _nearest_nifi(ctx, b)
    return Locality.LOCAL if nifi_a == nifi_b else Locality.REMOTE


def _nearest_nifi(ctx: _Ctx, node_name: str) -> str:
    for ancestor in _host_chain(ctx, node_name):
        resolved = ctx.resolved_node(ancestor)
        if resolved is not None and cat.NIFI in resolved.ancestry \
                and ancestor != node_name:
            return ancestor
    raise MissingHostError(f"{node_name!r} has no NiFi host in its chain")


# --------------------------------------------------------------------------
# rule checks
# --------------------------------------------------------------------------

def check_requirements(template: ServiceTemplate, defs=None) -> list[Diagnostic]:
    """R1 requirement/capability matching plus R5 hosting conformance."""
    ctx = _Ctx(template, _defs_for(template, defs))
    return _check_requirements(ctx)


def _check_requirements(ctx: _Ctx) -> list[Diagnostic]:
    out = []
    t = ctx.template
    for name in sorted(t.node_templates):
        node = t.node_templates[name]
        resolved = ctx.resolved_node(name)
        if resolved is None:
            out.append(Diagnostic(R1_REQ_MATCH, ERROR, [name],
                                  f"type {node.type!r} does not resolve"))
            continue
        by_name = {r.name: r for r in resolved.requirements}
        counts = {}
        for assignment in node.requirement_assignments:
            counts[assignment.name] = counts.get(assignment.name, 0) + 1
            req = by_name.get(assignment.name)
            if req is None:
                out.append(Diagnostic(
                    R1_REQ_MATCH, ERROR, [name],
                    f"{name!r} assigns requirement {assignment.name!r} that "
                    f"type {node.type!r} does not declare"))
                continue
            target = assignment.target
            if target not in t.node_templates:
                out.append(Diagnostic(
                    R1_REQ_MATCH, ERROR, [name],
                    f"{name!r} requirement {assignment.name!r} targets missing "
                    f"template {target!r}"))
                continue
            out.extend(_check_assignment(ctx, name, node, req, assignment))
        out.extend(_check_occurrences(ctx, name, resolved, counts))
    return out


def _check_assignment(ctx: _Ctx, name, node, req, assignment):
    out = []
    target = assignment.target
    target_node = ctx.template.node_templates[target]
    target_resolved = ctx.resolved_node(target)
    if target_resolved is None:
        out.append(Diagnostic(
            R1_REQ_MATCH, ERROR, [name, target],
            f"target {target!r} has unresolvable type {target_node.type!r}"))
        return out

    # declared node type conformance; hosting violations get their own rule
    if req.node_type and ctx.resolved_type(req.node_type) is not None:
        if req.node_type not in target_resolved.ancestry:
            rule = R5_HOSTING if req.name == "host" else R1_REQ_MATCH
            out.append(Diagnostic(
                rule, ERROR, [name, target],
                f"{name!r} requires {req.name!r} on a "
                f"{req.node_type!r} node, but {target!r} is a "
                f"{target_node.type!r}"))

    # the target must offer a capability of the demanded type that accepts us
    if req.capability_type and ctx.resolved_type(req.capability_type) is not None:
        matching = [c for c in target_resolved.capabilities.values()
                    if ctx.subtype(c.capability_type, req.capability_type)]
        if not matching:
            out.append(Diagnostic(
                R1_REQ_MATCH, ERROR, [name, target],
                f"{target!r} has no capability of type "
                f"{req.capability_type!r} demanded by {name!r}"))
        else:
            accepted = any(
                not c.valid_source_types
                or any(ctx.subtype(node.type, s) for s in c.valid_source_types)
                for c in matching)
            if not accepted:
                out.append(Diagnostic(
                    R1_REQ_MATCH, ERROR, [name, target],
                    f"{node.type!r} is not a valid source type for the "
                    f"{req.capability_type!r} capability of {target!r}"))

    # an explicit relationship override must refine the declared one
    if assignment.relationship is not None and req.relationship_type:
        if not ctx.subtype(assignment.relationship, req.relationship_type):
            out.append(Diagnostic(
                R1_REQ_MATCH, ERROR, [name, target],
                f"relationship {assignment.relationship!r} on {name!r} is not "
                f"a subtype of declared {req.relationship_type!r}"))
    return out


def _check_occurrences(ctx: _Ctx, name, resolved, counts):
    out = []
    connect_reqs = [r for r in resolved.requirements
                    if ctx.subtype(r.capability_type, cat.CONNECT_TO_PIPELINE_CAP)]
    other_reqs = [r for r in resolved.requirements if r not in connect_reqs]
    for req in other_reqs:
        count = counts.get(req.name, 0)
        lo, hi = req.occurrences
        if count < lo:
            out.append(Diagnostic(
                R1_REQ_MATCH, ERROR, [name],
                f"{name!r} fills requirement {req.name!r} {count} times, "
                f"minimum is {lo}"))
        if hi is not UNBOUNDED and count > hi:
            out.append(Diagnostic(
                R1_REQ_MATCH, ERROR, [name],
                f"{name!r} fills requirement {req.name!r} {count} times, "
                f"maximum is {hi}"))
    if connect_reqs:
        total = sum(counts.get(r.name, 0) for r in connect_reqs)
        group_min = max(r.occurrences[0] for r in connect_reqs)
        if total < group_min:
            out.append(Diagnostic(
                R1_REQ_MATCH, ERROR, [name],
                f"{name!r} has no downstream pipeline connection"))
        for req in connect_reqs:
            lo, hi = req.occurrences
            count = counts.get(req.name, 0)
            if hi is not UNBOUNDED and count > hi:
                out.append(Diagnostic(
                    R1_REQ_MATCH, ERROR, [name],
                    f"{name!r} fills requirement {req.name!r} {count} times, "
                    f"maximum is {hi}"))
    return out


def _connection_pairs(ctx: _Ctx):
    """Ordered pipeline pairs -> their connection edges (assignment, kind)."""
    pairs = {}
    for name in sorted(ctx.template.node_templates):
        if not ctx.is_pipeline(name):
            continue
        for assignment, kind in ctx.connection_assignments(name):
            target = assignment.target
            if target not in ctx.template.node_templates:
                continue
            if not ctx.is_pipeline(target):
                continue
            pairs.setdefault((name, target), []).append((assignment, kind))
    return pairs


def _pair_locality(ctx: _Ctx, a, b):
    try:
        return _colocated(ctx, a, b)
    except (MissingHostError, HostCycleError, NotAPipelineError):
        return None  # hosting is broken; R1/R5 already cover it


def _kind_bucket(ctx: _Ctx, kind):
    if ctx.subtype(kind, cat.CONNECT_NIFI_LOCAL):
        return Locality.LOCAL
    if ctx.subtype(kind, cat.CONNECT_NIFI_REMOTE):
        return Locality.REMOTE
    return None


def check_locality(template: ServiceTemplate, defs=None) -> list[Diagnostic]:
    """R2 wrong-kind connections and R3 duplicate connections."""
    ctx = _Ctx(template, _defs_for(template, defs))
    return _check_locality(ctx)


def _check_locality(ctx: _Ctx) -> list[Diagnostic]:
    out = []
    for (a, b), edges in sorted(_connection_pairs(ctx).items()):
        locality = _pair_locality(ctx, a, b)
        if locality is None:
            continue
        desired = cat.CONNECT_NIFI_LOCAL if locality is Locality.LOCAL \
            else cat.CONNECT_NIFI_REMOTE
        if len(edges) > 1:
            out.append(Diagnostic(
                R3_DUPLICATE_CONN, FIXABLE, [a, b],
                f"{len(edges)} connections between {a!r} and {b!r}; blocks are "
                f"{locality.value}, exactly one {desired!r} belongs here"))
        else:
            bucket = _kind_bucket(ctx, edges[0][1])
            if bucket is not None and bucket is not locality:
                out.append(Diagnostic(
                    R2_LOCALITY, FIXABLE, [a, b],
                    f"connection {a!r} -> {b!r} uses a {bucket.value} "
                    f"relationship but the blocks are {locality.value}"))
    return out


def _encryption_graph(ctx: _Ctx):
    adjacency = {name: set() for name in ctx.template.node_templates}
    for (a, b) in _connection_pairs(ctx):
        adjacency[a].add(b)
    return adjacency


def _reachable_from(adjacency, start):
    seen = set()
    stack = [start]
    while stack:
        current = stack.pop()
        for nxt in adjacency.get(current, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def check_encryption(template: ServiceTemplate, defs=None) -> list[Diagnostic]:
    """R4: Encrypt/Decrypt pairing and passphrase agreement."""
    ctx = _Ctx(template, _defs_for(template, defs))
    return _check_encryption(ctx)


def _encrypt_decrypt_pairs(ctx: _Ctx):
    adjacency = _encryption_graph(ctx)
    encrypts = sorted(n for n in ctx.template.node_templates
                      if ctx.subtype(ctx.template.node_templates[n].type, cat.ENCRYPT))
    decrypts = sorted(n for n in ctx.template.node_templates
                      if ctx.subtype(ctx.template.node_templates[n].type, cat.DECRYPT))
    reach = {e: _reachable_from(adjacency, e) for e in encrypts}
    pairs = [(e, d) for e in encrypts for d in decrypts if d in reach[e]]
    return encrypts, decrypts, pairs


def _check_encryption(ctx: _Ctx) -> list[Diagnostic]:
    out = []
    encrypts, decrypts, pairs = _encrypt_decrypt_pairs(ctx)
    paired_e = {e for e, _ in pairs}
    paired_d = {d for _, d in pairs}
    for e in encrypts:
        if e not in paired_e:
            out.append(Diagnostic(
                R4_ENCRYPTION, ERROR, [e],
                f"Encrypt node {e!r} reaches no Decrypt node"))
    for d in decrypts:
        if d not in paired_d:
            out.append(Diagnostic(
                R4_ENCRYPTION, ERROR, [d],
                f"Decrypt node {d!r} is not reachable from any Encrypt node"))
    for e, d in pairs:
        if ctx.effective_property(e, "passphrase") != \
                ctx.effective_property(d, "passphrase"):
            out.append(Diagnostic(
                R4_ENCRYPTION, FIXABLE, [e, d],
                f"passphrases of {e!r} and {d!r} differ"))
    return out


def check_scheduling(template: ServiceTemplate, defs=None) -> list[Diagnostic]:
    """R6: allowed strategies and parseable cron expressions."""
    ctx = _Ctx(template, _defs_for(template, defs))
    return _check_scheduling(ctx)


def _check_scheduling(ctx: _Ctx) -> list[Diagnostic]:
    out = []
    for name in sorted(ctx.template.node_templates):
        resolved = ctx.resolved_node(name)
        if resolved is None or cat.ABSTRACT_DATA_PIPELINE not in resolved.ancestry:
            continue
        if "schedulingStrategy" in resolved.properties:
            strategy = ctx.effective_property(name, "schedulingStrategy")
            if strategy not in cat.SCHEDULING_STRATEGIES:
                out.append(Diagnostic(
                    R6_SCHEDULING, ERROR, [name],
                    f"{name!r} has schedulingStrategy {strategy!r}, allowed: "
                    f"{', '.join(cat.SCHEDULING_STRATEGIES)}"))
            elif strategy == "CRON_DRIVEN":
                expr = ctx.effective_property(name, "schedulingPeriodCRON")
                if not isinstance(expr, str) or not is_valid_cron(expr):
                    out.append(Diagnostic(
                        R6_SCHEDULING, ERROR, [name],
                        f"{name!r} is CRON driven but {expr!r} is not a valid "
                        f"cron expression"))
        elif "schedulingPeriodCRON" in resolved.properties:
            expr = ctx.effective_property(name, "schedulingPeriodCRON")
            if not isinstance(expr, str) or not is_valid_cron(expr):
                out.append(Diagnostic(
                    R6_SCHEDULING, ERROR, [name],
                    f"{name!r} schedules only by cron but {expr!r} is not a "
                    f"valid cron expression"))
    return out


# --------------------------------------------------------------------------
# fixes and the verify driver
# --------------------------------------------------------------------------

def _passphrase(rng: random.Random) -> str:
    return "".join(rng.choice("0123456789abcdef") for _ in range(32))


def _fix_locality_pair(ctx: _Ctx, a: str, b: str) -> str:
    """Leave exactly one connection a -> b, of the locality-correct kind."""
    locality = _pair_locality(ctx, a, b)
    desired = cat.CONNECT_NIFI_LOCAL if locality is Locality.LOCAL \
        else cat.CONNECT_NIFI_REMOTE
    node = ctx.template.node_templates[a]
    edges = [(assignment, kind) for assignment, kind
             in ctx.connection_assignments(a) if assignment.target == b]
    keeper = next((assignment for assignment, kind in edges
                   if _kind_bucket(ctx, kind) is locality), None)
    rewrote = False
    if keeper is None:
        keeper = edges[0][0]
        _rewrite_assignment_kind(ctx, a, keeper, desired)
        rewrote = True
    drop = {id(assignment) for assignment, _ in edges
            if assignment is not keeper}
    node.requirement_assignments = [
        assignment for assignment in node.requirement_assignments
        if id(assignment) not in drop]
    action = f"rewrote the connection to {desired!r}" if rewrote \
        else f"kept the {desired!r} connection"
    if len(edges) > 1:
        return f"dropped {len(edges) - 1} duplicate connection(s) and {action}"
    return action


def _rewrite_assignment_kind(ctx: _Ctx, node_name: str,
                             assignment: RequirementAssignment, desired: str):
    resolved = ctx.resolved_node(node_name)
    counterpart = next(
        (r for r in resolved.requirements
         if ctx.subtype(r.capability_type, cat.CONNECT_TO_PIPELINE_CAP)
         and r.relationship_type == desired),
        None)
    if counterpart is not None:
        assignment.name = counterpart.name
        assignment.relationship = None
    else:
        assignment.relationship = desired


def _fix_encryption(ctx: _Ctx, pairs, rng: random.Random) -> dict:
    """One fresh passphrase per connected mismatch component."""
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    for e, d in pairs:
        union(e, d)
    components = {}
    for node in sorted({n for pair in pairs for n in pair}):
        components.setdefault(find(node), []).append(node)
    descriptions = {}
    for root in sorted(components, key=lambda r: min(components[r])):
        members = sorted(components[root])
        fresh = _passphrase(rng)
        for member in members:
            ctx.template.node_templates[member].property_values["passphrase"] = fresh
        for e, d in pairs:
            if e in members:
                descriptions[(e, d)] = (
                    f"assigned a shared passphrase to {', '.join(members)}")
    return descriptions


def _run_checks(ctx: _Ctx) -> list[Diagnostic]:
    out = []
    out.extend(_check_requirements(ctx))
    out.extend(_check_locality(ctx))
    out.extend(_check_encryption(ctx))
    out.extend(_check_scheduling(ctx))
    return out


def verify(template: ServiceTemplate, fix: bool = False, seed: int | None = None,
           defs=None) -> tuple[ServiceTemplate, list[Diagnostic]]:
    """Run all rules; with fix=True repair fixable findings to a fixpoint.

    Returns the (possibly repaired copy of the) template and the
    accumulated diagnostics; repaired findings carry a `fix` description.
    The input template is never mutated.
    """
    work = copy.deepcopy(template) if fix else template
    defs = _defs_for(work, defs)
    rng = random.Random(seed)
    reported: dict = {}
    ordered: list[Diagnostic] = []
    for attempt in range(MAX_FIX_PASSES + 1):
        ctx = _Ctx(work, defs)
        diagnostics = _run_checks(ctx)
        for diag in diagnostics:
            if diag.key() not in reported:
                reported[diag.key()] = diag
                ordered.append(diag)
        fixables = [d for d in diagnostics if d.severity == FIXABLE]
        if not fix or not fixables:
            break
        if attempt == MAX_FIX_PASSES:
            raise VerifierNonConvergenceError(
                f"fixable diagnostics remain after {MAX_FIX_PASSES} fix passes")
        _apply_fixes(ctx, fixables, rng, reported)
    return work, ordered


def _apply_fixes(ctx: _Ctx, fixables, rng, reported):
    encryption_pairs = []
    for diag in fixables:
        if diag.rule in (R2_LOCALITY, R3_DUPLICATE_CONN):
            a, b = diag.nodes
            description = _fix_locality_pair(ctx, a, b)
            reported[diag.key()].fix = description
        elif diag.rule == R4_ENCRYPTION:
            encryption_pairs.append(tuple(diag.nodes))
    if encryption_pairs:
        descriptions = _fix_encryption(ctx, encryption_pairs, rng)
        for diag in fixables:
            if diag.rule == R4_ENCRYPTION:
                reported[diag.key()].fix = descriptions.get(tuple(diag.nodes))
