import pytest

import builders as b
import topology_gen
from toscaflow import catalog as cat
from toscaflow.errors import DependencyCycleError
from toscaflow.model import ServiceTemplate
from toscaflow.planner import (
    CONNECTS_TO,
    HOSTED_ON,
    DeploymentPlan,
    PlanStep,
    build_graph,
    plan,
    undeploy_plan,
    validate_plan,
)
from toscaflow.verifier import verify


def _edge_set(graph):
    return {(e.source, e.target, e.kind) for e in graph.edges}


def test_build_graph_s3_to_gcs(load_fixture):
    graph = build_graph(load_fixture("s3_to_gcs.yaml"))
    edges = _edge_set(graph)
    assert ("ConsumeS3Bucket", "Nifi_Platform", HOSTED_ON) in edges
    assert ("ConsumeS3Bucket", "PublishGoogleBucket", CONNECTS_TO) in edges
    assert ("EC2_VM", "AWSPlatform", HOSTED_ON) in edges


def test_build_graph_single_node_has_no_edges():
    graph = build_graph(b.template(b.node("VM", cat.COMPUTE)))
    assert graph.vertices == ["VM"]
    assert graph.edges == []


def test_build_graph_image_pipeline_counts(load_fixture):
    template = load_fixture("image_pipeline.yaml")
    graph = build_graph(template)
    connects = [e for e in graph.edges if e.kind == CONNECTS_TO]
    assert len(connects) == 5
    # four distinct hosting stacks: follow host edges to their roots
    from toscaflow.verifier import host_chain
    roots = {host_chain(name, template)[-1]
             for name in template.node_templates}
    assert roots == {"OpenStackPlatform_0", "AWSPlatform_0", "GCP_VM", "Azure_VM"}


def _positions(deployment):
    return {(s.node, s.op): i for i, s in enumerate(deployment.steps)}


def test_plan_s3_to_gcs_ordering(load_fixture):
    template = load_fixture("s3_to_gcs.yaml")
    deployment = plan(template)
    assert validate_plan(deployment, template)
    pos = _positions(deployment)
    assert pos[("AWSPlatform", "start")] < pos[("EC2_VM", "create")]
    assert pos[("EC2_VM", "start")] < pos[("Nifi_Platform", "create")]
    assert pos[("Nifi_Platform", "start")] < pos[("ConsumeS3Bucket", "create")]
    assert pos[("PublishGoogleBucket", "start")] < \
        pos[("ConsumeS3Bucket", "configure")]
    # the cross-host connection is annotated on the source's configure step
    step = deployment.steps[pos[("ConsumeS3Bucket", "configure")]]
    assert step.annotation == "remote:PublishGoogleBucket"


def test_plan_is_deterministic(load_fixture):
    template = load_fixture("image_pipeline.yaml")
    assert plan(template) == plan(template)


def test_mutually_connected_pipelines_cycle(load_fixture):
    template = load_fixture("cyclic.yaml")
    _, diags = verify(template)
    assert diags == []
    with pytest.raises(DependencyCycleError) as excinfo:
        plan(template)
    assert set(excinfo.value.members) == {"Exec_A", "Exec_B"}


def test_validate_plan_rejects_reordered_dependency(load_fixture):
    template = load_fixture("s3_to_gcs.yaml")
    deployment = plan(template)
    pos = _positions(deployment)
    steps = list(deployment.steps)
    i = pos[("PublishGoogleBucket", "start")]
    j = pos[("ConsumeS3Bucket", "configure")]
    steps[i], steps[j] = steps[j], steps[i]
    assert not validate_plan(DeploymentPlan(steps=steps), template)


def test_validate_plan_requires_all_three_ops(load_fixture):
    template = load_fixture("s3_to_gcs.yaml")
    deployment = plan(template)
    assert not validate_plan(DeploymentPlan(steps=deployment.steps[:-1]), template)


def test_empty_plan_for_empty_template():
    assert validate_plan(DeploymentPlan(), ServiceTemplate())


def _constrained(before, after, graph):
    """Independent pairwise constraint test used for swap sharpness."""
    if before[0] == after[0]:
        order = ["create", "configure", "start"]
        return order.index(before[1]) < order.index(after[1])
    for edge in graph.edges:
        dependent_op = "create" if edge.kind == HOSTED_ON else "configure"
        if before == (edge.target, "start") and after == (edge.source, dependent_op):
            return True
    return False


def test_random_dags_plan_and_swaps_fail():
    for seed in range(40):
        template = topology_gen.random_clean_dag(seed)
        _, diags = verify(template)
        assert diags == [], f"generator produced findings at seed {seed}"
        deployment = plan(template)
        assert validate_plan(deployment, template)
        graph = build_graph(template)
        steps = deployment.steps
        for i in range(len(steps) - 1):
            a = (steps[i].node, steps[i].op)
            b_ = (steps[i + 1].node, steps[i + 1].op)
            if _constrained(a, b_, graph):
                swapped = list(steps)
                swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
                assert not validate_plan(DeploymentPlan(steps=swapped), template)


def test_undeploy_is_reverse_of_deploy(load_fixture):
    template = load_fixture("s3_to_gcs.yaml")
    forward = plan(template)
    backward = undeploy_plan(template)
    stops = [s for s in backward.steps if s.op == "stop"]
    deletes = [s for s in backward.steps if s.op == "delete"]
    assert len(backward.steps) == len(stops) + len(deletes)
    starts_forward = [s.node for s in forward.steps if s.op == "start"]
    assert [s.node for s in stops] == list(reversed(starts_forward))


def test_plan_steps_serialize():
    step = PlanStep("X", "create")
    assert step.to_dict() == {"node": "X", "op": "create", "annotation": None}
