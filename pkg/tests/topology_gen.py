"""Seeded random topology generators for oracle-based verifier/planner tests."""

import random

import builders as b
from toscaflow import catalog as cat
from toscaflow.model import RequirementAssignment, ServiceTemplate, resolve_type

SOURCE_POOL = [b.SRC + "ConsS3Bucket", b.SRC + "ConsMinIO", b.SRC + "ConsGCSBucket"]
MID_POOL = [b.PRC + "InvokeLambda", b.PRC + "ExecutePython",
            b.PRC + "Encrypt", b.PRC + "Decrypt"]
CLEAN_MID_POOL = [b.PRC + "InvokeLambda", b.PRC + "ExecutePython",
                  b.PRC + "ExecuteRuby", b.PRC + "InvokeFaaSFunction"]
DEST_POOL = [b.DST + "PubGCS", b.DST + "PubsAzureBlob", b.DST + "PubsMinIO"]

_DEFS = None


def _defs():
    global _DEFS
    if _DEFS is None:
        _DEFS = cat.builtin_catalog().definitions
    return _DEFS


def _fill_props(rng, node_template):
    resolved = resolve_type(node_template.type, _defs())
    for prop in resolved.properties.values():
        if prop.name in node_template.property_values:
            continue
        if not (prop.required and prop.default is None):
            continue
        if prop.name == "passphrase":
            node_template.property_values[prop.name] = rng.choice(["alpha", "beta"])
        else:
            node_template.property_values[prop.name] = "x"


def _connect_names(type_name):
    """(local, remote) requirement names as declared on the category."""
    if type_name.startswith(b.SRC) or type_name == cat.SOURCE_PB:
        return "connectToPipeline", "connectToPipelineRemote"
    return "ConnectToPipeline", "ConnectToPipelineRemote"


def random_topology(seed: int) -> ServiceTemplate:
    """A small topology with deliberately injected rule violations."""
    rng = random.Random(seed)
    nodes = []
    nifis = []
    n_stacks = rng.choice([1, 2])
    for i in range(n_stacks):
        stack, nifi = b.nifi_stack(i)
        nodes.extend(stack)
        nifis.append(nifi)

    budget = 8 - len(nodes)
    aws_name = None
    if rng.random() < 0.3 and budget >= 3:
        aws_name = "AWS_0"
        nodes.append(b.node(aws_name, cat.AWS_PLATFORM))
        budget -= 1

    standalone_name = None
    if aws_name is not None and rng.random() < 0.7:
        standalone_name = "Copy_0"
        host = aws_name if rng.random() < 0.75 else rng.choice(nifis)
        reqs = [("host", host)] if rng.random() > 0.08 else []
        nodes.append(b.node(standalone_name, b.STA + "AWSCopyS3ToS3", reqs=reqs))
        budget -= 1

    n_pipes = rng.randint(2, max(2, min(4, budget)))
    pipes = []
    for i in range(n_pipes):
        if i == 0:
            type_name = rng.choice(SOURCE_POOL)
        elif i == n_pipes - 1:
            type_name = rng.choice(DEST_POOL)
        else:
            type_name = rng.choice(MID_POOL + DEST_POOL)
        name = f"P{i}_{type_name.rsplit('.', 1)[1]}"
        pipe = b.node(name, type_name)
        pipes.append(pipe)
        nodes.append(pipe)

    host_of = {}
    for pipe in pipes:
        roll = rng.random()
        if roll < 0.06:
            continue  # missing host
        if roll < 0.14:
            victim = rng.choice([n.name for n in nodes if n.name != pipe.name])
            pipe.requirement_assignments.append(
                RequirementAssignment("host", victim))
            continue
        nifi = rng.choice(nifis)
        host_of[pipe.name] = nifi
        pipe.requirement_assignments.append(RequirementAssignment("host", nifi))
        if rng.random() < 0.05:
            pipe.requirement_assignments.append(
                RequirementAssignment("host", rng.choice(nifis)))

    for pipe in pipes:
        is_dest = pipe.type.startswith(b.DST)
        if is_dest:
            if rng.random() < 0.1 and len(pipes) > 1:
                target = rng.choice([p for p in pipes if p is not pipe])
                pipe.requirement_assignments.append(
                    RequirementAssignment("connectToPipeline", target.name))
            continue
        local_name, remote_name = _connect_names(pipe.type)
        n_edges = rng.choices([0, 1, 2], weights=[8, 70, 22])[0]
        for _ in range(n_edges):
            candidates = [p for p in pipes if p is not pipe]
            if not candidates:
                continue
            target = rng.choice(candidates) if rng.random() > 0.03 else pipe
            correct = None
            if pipe.name in host_of and target.name in host_of:
                correct = local_name if host_of[pipe.name] == host_of[target.name] \
                    else remote_name
            if correct is None:
                req_name = rng.choice([local_name, remote_name])
            elif rng.random() < 0.3:
                req_name = remote_name if correct == local_name else local_name
            else:
                req_name = correct
            override = None
            if rng.random() < 0.1:
                override = rng.choice([cat.CONNECT_NIFI_LOCAL,
                                       cat.CONNECT_NIFI_REMOTE])
            pipe.requirement_assignments.append(
                RequirementAssignment(req_name, target.name, override))
            if rng.random() < 0.15:
                other = remote_name if req_name == local_name else local_name
                pipe.requirement_assignments.append(
                    RequirementAssignment(other, target.name))

    for node_template in nodes:
        _fill_props(rng, node_template)
        if node_template.type.startswith((b.SRC, b.PRC, b.DST)):
            if rng.random() < 0.12:
                node_template.property_values["schedulingStrategy"] = rng.choice(
                    ["TIMER_DRIVEN", "CRON_DRIVEN", "CRON_DRIVEN"])
            if node_template.property_values.get("schedulingStrategy") \
                    == "CRON_DRIVEN":
                node_template.property_values["schedulingPeriodCRON"] = rng.choice(
                    ["0 * * * * ?", "*/7 * * * * ?", "bogus", "* * * * *"])

    return b.template(*nodes)


def random_clean_dag(seed: int) -> ServiceTemplate:
    """A correctly wired, acyclic topology suitable for planning."""
    rng = random.Random(seed)
    nodes = []
    nifis = []
    for i in range(rng.choice([1, 2])):
        stack, nifi = b.nifi_stack(i)
        nodes.extend(stack)
        nifis.append(nifi)

    n_pipes = rng.randint(2, 10 - len(nodes))
    pipes = []
    for i in range(n_pipes):
        if i == 0:
            type_name = rng.choice(SOURCE_POOL)
        elif i == n_pipes - 1:
            type_name = rng.choice(DEST_POOL)
        else:
            type_name = rng.choice(CLEAN_MID_POOL)
        name = f"P{i}_{type_name.rsplit('.', 1)[1]}"
        pipe = b.node(name, type_name)
        pipes.append(pipe)
        nodes.append(pipe)

    host_of = {}
    for pipe in pipes:
        nifi = rng.choice(nifis)
        host_of[pipe.name] = nifi
        pipe.requirement_assignments.append(RequirementAssignment("host", nifi))

    for i, pipe in enumerate(pipes[:-1]):
        local_name, remote_name = _connect_names(pipe.type)
        later = pipes[i + 1:]
        targets = rng.sample(later, k=min(len(later), rng.choice([1, 1, 2])))
        for target in targets:
            req_name = local_name if host_of[pipe.name] == host_of[target.name] \
                else remote_name
            pipe.requirement_assignments.append(
                RequirementAssignment(req_name, target.name))

    for node_template in nodes:
        _fill_props(rng, node_template)
    return b.template(*nodes)
