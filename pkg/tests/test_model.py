import pytest

from toscaflow import catalog as cat
from toscaflow.errors import (
    CyclicDerivationError,
    UnknownArtifactError,
    UnknownPropertyError,
    UnknownTemplateError,
    UnknownTypeError,
)
from toscaflow.model import (
    NodeTemplate,
    PropertyDefinition,
    ServiceTemplate,
    TypeDefinition,
    evaluate_intrinsic,
    is_subtype,
    resolve_type,
)

CONS_S3 = "radon.nodes.datapipeline.source.ConsS3Bucket"
CONS_GCS = "radon.nodes.datapipeline.source.ConsGCSBucket"


def test_resolve_cons_s3_ancestry_and_merge(defs):
    resolved = resolve_type(CONS_S3, defs)
    assert resolved.ancestry == [
        "radon.nodes.abstract.DataPipeline",
        "radon.nodes.datapipeline.PipelineBlock",
        "radon.nodes.datapipeline.SourcePB",
        "radon.nodes.datapipeline.source.ConsumeDataEndPoint",
        "radon.nodes.datapipeline.source.ConsumeRemote",
        CONS_S3,
    ]
    for prop in ("name", "schedulingStrategy", "schedulingPeriodCRON",
                 "BucketName", "cred_file_path", "Region"):
        assert prop in resolved.properties


def test_resolve_pipeline_block(defs):
    resolved = resolve_type(cat.PIPELINE_BLOCK, defs)
    assert resolved.ancestry == [cat.ABSTRACT_DATA_PIPELINE, cat.PIPELINE_BLOCK]
    assert set(resolved.properties) == {"name", "schedulingStrategy",
                                        "schedulingPeriodCRON"}
    assert set(resolved.attributes) == {"id"}
    assert resolved.properties["schedulingStrategy"].default == "EVENT_DRIVEN"
    assert resolved.properties["schedulingPeriodCRON"].default == "* * * * * ?"


def test_resolve_unknown_type(defs):
    with pytest.raises(UnknownTypeError):
        resolve_type("no.such.Type", defs)


def test_resolve_cycle_raises_not_loops():
    defs = {
        "A": TypeDefinition("A", "node", derived_from="B"),
        "B": TypeDefinition("B", "node", derived_from="A"),
    }
    with pytest.raises(CyclicDerivationError):
        resolve_type("A", defs)


def test_is_subtype_examples(defs):
    assert is_subtype(CONS_GCS, cat.SOURCE_PB, defs)
    assert is_subtype(CONS_GCS, CONS_GCS, defs)
    assert not is_subtype(cat.SOURCE_PB, cat.DESTINATION_PB, defs)
    assert not is_subtype(cat.DESTINATION_PB, cat.SOURCE_PB, defs)


def test_is_subtype_transitive_over_catalog(defs):
    # exhaustive enumeration of the subtype relation on the built-in catalog
    names = sorted(defs)
    ancestries = {name: set(resolve_type(name, defs).ancestry) for name in names}
    pairs = [(a, b) for a in names for b in ancestries[a]]
    for a, b in pairs:
        for c in ancestries[b]:
            assert c in ancestries[a], f"{a} <= {b} <= {c} but not {a} <= {c}"


def test_merged_properties_match_bruteforce_walk(defs):
    # independent oracle: naive re-walk of derived_from unioning properties
    for name in sorted(defs):
        expected = {}
        chain = []
        current = name
        while current is not None:
            chain.append(defs[current])
            current = defs[current].derived_from
        for definition in reversed(chain):
            expected.update(definition.properties)
        assert resolve_type(name, defs).properties == expected


def test_most_derived_property_wins():
    defs = {
        "Base": TypeDefinition("Base", "node", properties={
            "p": PropertyDefinition("p", "string", "base-default")}),
        "Leaf": TypeDefinition("Leaf", "node", derived_from="Base", properties={
            "p": PropertyDefinition("p", "string", "leaf-default")}),
    }
    assert resolve_type("Leaf", defs).properties["p"].default == "leaf-default"
    assert resolve_type("Base", defs).properties["p"].default == "base-default"


def _minio_template():
    node = NodeTemplate(
        name="ConsMinIO_0",
        type="radon.nodes.datapipeline.source.ConsMinIO",
        property_values={
            "BucketName": "firstbucket",
            "cred_file_path": "{ get_artifact: [SELF, credentials]}",
        },
        artifacts={"credentials": "creds/minio.json"},
    )
    return node, ServiceTemplate(node_templates={node.name: node})


def test_evaluate_literal_identity():
    node, template = _minio_template()
    assert evaluate_intrinsic("eu-west-1", node, template) == "eu-west-1"
    assert evaluate_intrinsic(42, node, template) == 42


def test_evaluate_get_artifact_mapping_and_string_forms():
    node, template = _minio_template()
    assert evaluate_intrinsic({"get_artifact": ["SELF", "credentials"]},
                              node, template) == "creds/minio.json"
    assert evaluate_intrinsic("{ get_artifact: [SELF, credentials]}",
                              node, template) == "creds/minio.json"


def test_evaluate_get_property_falls_back_to_default():
    node, template = _minio_template()
    value = evaluate_intrinsic({"get_property": ["SELF", "schedulingStrategy"]},
                               node, template)
    assert value == "EVENT_DRIVEN"


def test_evaluate_get_property_assigned_value():
    node, template = _minio_template()
    value = evaluate_intrinsic({"get_property": ["ConsMinIO_0", "BucketName"]},
                               node, template)
    assert value == "firstbucket"


def test_evaluate_errors():
    node, template = _minio_template()
    with pytest.raises(UnknownArtifactError):
        evaluate_intrinsic({"get_artifact": ["SELF", "nope"]}, node, template)
    with pytest.raises(UnknownPropertyError):
        evaluate_intrinsic({"get_property": ["SELF", "nope"]}, node, template)
    with pytest.raises(UnknownTemplateError):
        evaluate_intrinsic({"get_property": ["Ghost", "BucketName"]},
                           node, template)
