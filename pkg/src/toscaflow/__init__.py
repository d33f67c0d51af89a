"""toscaflow: model, verify, plan, and simulate TOSCA data-pipeline blueprints."""

from .catalog import TypeCatalog, builtin_catalog, lookup
from .cron import CronExpr, cron_next, is_valid_cron, parse_cron
from .crypto import decrypt_bytes, encrypt_bytes, fnv1a_64
from .csar import CsarArchive, pack_csar, unpack_csar
from .model import (
    UNBOUNDED,
    AttributeDefinition,
    CapabilityDefinition,
    NodeTemplate,
    PropertyDefinition,
    RequirementAssignment,
    RequirementDefinition,
    ResolvedNodeType,
    ServiceTemplate,
    TypeDefinition,
    evaluate_intrinsic,
    is_subtype,
    resolve_type,
)
from .parsing import (
    SourceLocation,
    export_catalog_yaml,
    parse_definitions,
    parse_node_templates_fragment,
    parse_requirements_fragment,
    parse_service_template,
    serialize_definitions,
    serialize_template,
)
from .planner import (
    DependencyEdge,
    DependencyGraph,
    DeploymentPlan,
    PlanStep,
    build_graph,
    plan,
    undeploy_plan,
    validate_plan,
)
from .simulator import Flow, FlowItem, instantiate, parse_schedule
from .verifier import (
    Diagnostic,
    Locality,
    check_encryption,
    check_locality,
    check_requirements,
    check_scheduling,
    colocated,
    host_chain,
    report_to_dict,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "AttributeDefinition",
    "CapabilityDefinition",
    "CronExpr",
    "CsarArchive",
    "DependencyEdge",
    "DependencyGraph",
    "DeploymentPlan",
    "Diagnostic",
    "Flow",
    "FlowItem",
    "Locality",
    "NodeTemplate",
    "PlanStep",
    "PropertyDefinition",
    "RequirementAssignment",
    "RequirementDefinition",
    "ResolvedNodeType",
    "ServiceTemplate",
    "SourceLocation",
    "TypeCatalog",
    "TypeDefinition",
    "UNBOUNDED",
    "build_graph",
    "builtin_catalog",
    "check_encryption",
    "check_locality",
    "check_requirements",
    "check_scheduling",
    "colocated",
    "cron_next",
    "decrypt_bytes",
    "encrypt_bytes",
    "evaluate_intrinsic",
    "export_catalog_yaml",
    "fnv1a_64",
    "host_chain",
    "instantiate",
    "is_subtype",
    "is_valid_cron",
    "lookup",
    "pack_csar",
    "parse_cron",
    "parse_definitions",
    "parse_node_templates_fragment",
    "parse_requirements_fragment",
    "parse_schedule",
    "parse_service_template",
    "plan",
    "report_to_dict",
    "resolve_type",
    "serialize_definitions",
    "serialize_template",
    "undeploy_plan",
    "unpack_csar",
    "validate_plan",
    "verify",
]
