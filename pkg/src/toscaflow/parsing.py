"""Reading and writing the YAML blueprint exchange format.

The parser works on the composed YAML node tree rather than plain
``safe_load`` output so every definition and error can carry a precise
source location, and so duplicate mapping keys (e.g. two node templates
with the same name) are detected instead of silently collapsing.

Serialization emits a normalized form: two-space indent, template names
sorted, stable key order, so serialize(parse(serialize(t))) == serialize(t).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import yaml

from . import catalog as _catalog
from .errors import (
    DuplicateTemplateNameError,
    SchemaError,
    TemplateSyntaxError,
    UnknownTypeError,
)
from .model import (
    UNBOUNDED,
    AttributeDefinition,
    CapabilityDefinition,
    NodeTemplate,
    PropertyDefinition,
    RequirementAssignment,
    RequirementDefinition,
    ServiceTemplate,
    TypeDefinition,
    resolve_type,
)

TOSCA_VERSION_KEY = "tosca_definitions_version"

_SECTION_KINDS = {
    "node_types": "node",
    "capability_types": "capability",
    "relationship_types": "relationship",
}

# top-level keys we understand but deliberately do not interpret
_IGNORED_QUIETLY = {"description", "metadata"}


@dataclass(frozen=True)
class SourceLocation:
    """1-based position of a construct in its input file."""

    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


def _loc(node, filename) -> SourceLocation:
    mark = node.start_mark
    return SourceLocation(filename, mark.line + 1, mark.column + 1)


def _compose(text, filename):
    try:
        root = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        location = None
        if exc.problem_mark is not None:
            location = SourceLocation(
                filename, exc.problem_mark.line + 1, exc.problem_mark.column + 1
            )
        raise TemplateSyntaxError(str(exc), location) from exc
    except yaml.YAMLError as exc:
        raise TemplateSyntaxError(str(exc), SourceLocation(filename, 1, 1)) from exc
    return root


def _construct(node):
    constructor = yaml.constructor.SafeConstructor()
    return constructor.construct_object(node, deep=True)


def _require_mapping(node, what, filename):
    if node is None:
        raise SchemaError(f"{what} is empty", SourceLocation(filename, 1, 1))
    if not isinstance(node, yaml.MappingNode):
        raise SchemaError(f"{what} must be a mapping", _loc(node, filename))
    return node


def _items(mapping_node, filename, duplicate_error=SchemaError):
    """(key, value_node, key_location) triples, rejecting duplicate keys."""
    seen = {}
    out = []
    for key_node, value_node in mapping_node.value:
        key = _construct(key_node)
        if not isinstance(key, str):
            raise SchemaError(f"mapping key {key!r} is not a string",
                              _loc(key_node, filename))
        if key in seen:
            raise duplicate_error(f"duplicate key {key!r}", _loc(key_node, filename))
        seen[key] = True
        out.append((key, value_node, _loc(key_node, filename)))
    return out


# --------------------------------------------------------------------------
# definitions documents
# --------------------------------------------------------------------------

def parse_definitions(text: str, filename: str = "<string>") -> list[TypeDefinition]:
    """Parse a type-definitions document into TypeDefinition objects.

    The document should declare ``tosca_definitions_version`` and one or
    more of node_types / capability_types / relationship_types; a missing
    version header is tolerated when a type section is present.  Unknown
    top-level keys are ignored with a warning.
    """
    root = _require_mapping(_compose(text, filename), "definitions document", filename)
    sections = []
    saw_version = False
    for key, value_node, key_loc in _items(root, filename):
        if key == TOSCA_VERSION_KEY:
            saw_version = True
        elif key in _SECTION_KINDS:
            sections.append((key, value_node))
        elif key not in _IGNORED_QUIETLY:
            warnings.warn(f"{key_loc}: ignoring unknown top-level key {key!r}",
                          stacklevel=2)
    if not saw_version and not sections:
        raise SchemaError(f"missing {TOSCA_VERSION_KEY}",
                          SourceLocation(filename, 1, 1))

    definitions = []
    for section_key, section_node in sections:
        if section_node is None or isinstance(section_node, yaml.ScalarNode):
            continue  # empty section
        section = _require_mapping(section_node, section_key, filename)
        kind = _SECTION_KINDS[section_key]
        for name, body_node, name_loc in _items(section, filename):
            definitions.append(_parse_type(name, kind, body_node, name_loc, filename))
    return definitions


def _parse_type(name, kind, body_node, location, filename) -> TypeDefinition:
    derived_from = None
    properties = {}
    attributes = {}
    requirements = []
    capabilities = {}
    metadata = {}
    if body_node is not None and not isinstance(body_node, yaml.ScalarNode):
        body = _require_mapping(body_node, f"type {name!r}", filename)
        for key, value_node, key_loc in _items(body, filename):
            if key == "derived_from":
                derived_from = str(_construct(value_node))
            elif key == "properties":
                properties = _parse_property_defs(value_node, filename)
            elif key == "attributes":
                attributes = _parse_attribute_defs(value_node, filename)
            elif key == "requirements":
                requirements = _parse_requirement_defs(value_node, filename)
            elif key == "capabilities":
                capabilities = _parse_capability_defs(value_node, filename)
            elif key == "metadata":
                raw = _construct(value_node)
                if isinstance(raw, dict):
                    metadata = {str(k): str(v) for k, v in raw.items()}
            elif key != "description":
                warnings.warn(f"{key_loc}: ignoring unknown key {key!r} "
                              f"in type {name!r}", stacklevel=3)
    return TypeDefinition(
        name=name,
        kind=kind,
        derived_from=derived_from,
        properties=properties,
        attributes=attributes,
        requirements=requirements,
        capabilities=capabilities,
        metadata=metadata,
        location=location,
    )


def _coerce_default(value, value_type, where, location):
    if value is None:
        return None
    if value_type == "string":
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (int, float)):
            return str(value)
        if isinstance(value, str):
            return value
    elif value_type == "integer":
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, str):
            try:
                return int(value, 10)
            except ValueError:
                pass
    elif value_type == "boolean":
        if isinstance(value, bool):
            return value
    raise SchemaError(f"default {value!r} of {where} does not fit type "
                      f"{value_type!r}", location)


def _parse_property_defs(node, filename):
    out = {}
    mapping = _require_mapping(node, "properties", filename)
    for name, body_node, name_loc in _items(mapping, filename):
        value_type = "string"
        default = None
        required = True
        if body_node is not None and not isinstance(body_node, yaml.ScalarNode):
            body = _require_mapping(body_node, f"property {name!r}", filename)
            raw = {}
            for key, value_node, _ in _items(body, filename):
                raw[key] = _construct(value_node)
            value_type = str(raw.get("type", "string"))
            if value_type not in ("string", "integer", "boolean"):
                raise SchemaError(f"unsupported property type {value_type!r} "
                                  f"on {name!r}", name_loc)
            required = bool(raw.get("required", True))
            default = _coerce_default(raw.get("default"), value_type,
                                      f"property {name!r}", name_loc)
        out[name] = PropertyDefinition(name, value_type, default, required)
    return out


def _parse_attribute_defs(node, filename):
    out = {}
    mapping = _require_mapping(node, "attributes", filename)
    for name, body_node, name_loc in _items(mapping, filename):
        value_type = "string"
        default = None
        if body_node is not None and not isinstance(body_node, yaml.ScalarNode):
            body = _require_mapping(body_node, f"attribute {name!r}", filename)
            raw = {key: _construct(value_node)
                   for key, value_node, _ in _items(body, filename)}
            value_type = str(raw.get("type", "string"))
            default = raw.get("default")
        out[name] = AttributeDefinition(name, value_type, default)
    return out


def _parse_occurrences(raw, where, location, default):
    if raw is None:
        return default
    if not isinstance(raw, list) or len(raw) != 2:
        raise SchemaError(f"occurrences of {where} must be [min, max]", location)
    lo, hi = raw
    if not isinstance(lo, int) or isinstance(lo, bool) or lo < 0:
        raise SchemaError(f"bad minimum occurrence {lo!r} on {where}", location)
    if isinstance(hi, str) and hi == "UNBOUNDED":
        return (lo, UNBOUNDED)
    if not isinstance(hi, int) or isinstance(hi, bool):
        raise SchemaError(f"bad maximum occurrence {hi!r} on {where}", location)
    return (lo, hi)


def _parse_requirement_defs(node, filename):
    if not isinstance(node, yaml.SequenceNode):
        raise SchemaError("requirements must be a list", _loc(node, filename))
    out = []
    for entry_node in node.value:
        entry = _require_mapping(entry_node, "requirement entry", filename)
        entries = _items(entry, filename)
        if len(entries) != 1:
            raise SchemaError("each requirement entry holds exactly one name",
                              _loc(entry_node, filename))
        name, body_node, name_loc = entries[0]
        body = _require_mapping(body_node, f"requirement {name!r}", filename)
        raw = {key: _construct(value_node)
               for key, value_node, _ in _items(body, filename)}
        for mandatory in ("capability", "node", "relationship"):
            if mandatory not in raw:
                raise SchemaError(f"requirement {name!r} lacks {mandatory!r}",
                                  name_loc)
        out.append(RequirementDefinition(
            name=name,
            capability_type=str(raw["capability"]),
            node_type=str(raw["node"]),
            relationship_type=str(raw["relationship"]),
            occurrences=_parse_occurrences(raw.get("occurrences"), name,
                                           name_loc, (1, 1)),
        ))
    return out


def _parse_capability_defs(node, filename):
    out = {}
    mapping = _require_mapping(node, "capabilities", filename)
    for name, body_node, name_loc in _items(mapping, filename):
        body = _require_mapping(body_node, f"capability {name!r}", filename)
        raw = {key: _construct(value_node)
               for key, value_node, _ in _items(body, filename)}
        if "type" not in raw:
            raise SchemaError(f"capability {name!r} lacks 'type'", name_loc)
        sources = raw.get("valid_source_types", [])
        if not isinstance(sources, list):
            raise SchemaError(f"valid_source_types of {name!r} must be a list",
                              name_loc)
        out[name] = CapabilityDefinition(
            name=name,
            capability_type=str(raw["type"]),
            valid_source_types=[str(s) for s in sources],
            occurrences=_parse_occurrences(raw.get("occurrences"), name,
                                           name_loc, (1, UNBOUNDED)),
        )
    return out


def parse_requirements_fragment(text: str,
                                filename: str = "<string>") -> list[RequirementDefinition]:
    """Parse a bare ``requirements:`` block (as printed in catalog excerpts)."""
    root = _require_mapping(_compose(text, filename), "requirements fragment",
                            filename)
    for key, value_node, key_loc in _items(root, filename):
        if key == "requirements":
            return _parse_requirement_defs(value_node, filename)
    raise SchemaError("fragment has no 'requirements' key",
                      SourceLocation(filename, 1, 1))


# --------------------------------------------------------------------------
# service templates
# --------------------------------------------------------------------------

def parse_service_template(text: str, filename: str = "<string>",
                           base_definitions=None) -> ServiceTemplate:
    """Parse a full blueprint document into a ServiceTemplate.

    Property expressions are kept symbolic (intrinsics are not evaluated).
    Assigned property names are validated against the resolved node type,
    required properties without defaults must be assigned, and requirement
    targets must name existing templates.  Types resolve against
    `base_definitions` (the built-in catalog by default) overlaid with the
    document's inline type sections.
    """
    root = _require_mapping(_compose(text, filename), "service template", filename)
    version = None
    inline_sections = []
    topology_node = None
    for key, value_node, key_loc in _items(root, filename):
        if key == TOSCA_VERSION_KEY:
            version = str(_construct(value_node))
        elif key in _SECTION_KINDS:
            inline_sections.append((key, value_node))
        elif key == "topology_template":
            topology_node = value_node
        elif key not in _IGNORED_QUIETLY:
            warnings.warn(f"{key_loc}: ignoring unknown top-level key {key!r}",
                          stacklevel=2)
    if version is None:
        raise SchemaError(f"missing {TOSCA_VERSION_KEY}",
                          SourceLocation(filename, 1, 1))
    if topology_node is None:
        raise SchemaError("missing topology_template",
                          SourceLocation(filename, 1, 1))

    user_types = []
    for section_key, section_node in inline_sections:
        if section_node is None or isinstance(section_node, yaml.ScalarNode):
            continue
        section = _require_mapping(section_node, section_key, filename)
        kind = _SECTION_KINDS[section_key]
        for name, body_node, name_loc in _items(section, filename):
            user_types.append(_parse_type(name, kind, body_node, name_loc, filename))

    topology = _require_mapping(topology_node, "topology_template", filename)
    templates_node = None
    for key, value_node, key_loc in _items(topology, filename):
        if key == "node_templates":
            templates_node = value_node
        else:
            warnings.warn(f"{key_loc}: ignoring topology_template key {key!r}",
                          stacklevel=2)
    if templates_node is None:
        raise SchemaError("topology_template has no node_templates",
                          _loc(topology, filename))

    defs = dict(base_definitions) if base_definitions else \
        _catalog.builtin_catalog().definitions
    defs.update({t.name: t for t in user_types})

    node_templates = _parse_node_templates(templates_node, filename, defs,
                                           partial=False)
    template = ServiceTemplate(tosca_version=version, user_types=user_types,
                               node_templates=node_templates)
    for node in node_templates.values():
        for assignment in node.requirement_assignments:
            if assignment.target not in node_templates:
                raise SchemaError(
                    f"node {node.name!r} requirement {assignment.name!r} targets "
                    f"unknown template {assignment.target!r}", node.location)
    return template


def parse_node_templates_fragment(text: str, filename: str = "<string>",
                                  base_definitions=None) -> dict[str, NodeTemplate]:
    """Parse a bare node-template mapping (template excerpts, no topology).

    Fragments are partial by nature, so required-property coverage and
    requirement-target existence are not enforced; property names still are.
    """
    root = _require_mapping(_compose(text, filename), "node templates fragment",
                            filename)
    defs = dict(base_definitions) if base_definitions else \
        _catalog.builtin_catalog().definitions
    return _parse_node_templates(root, filename, defs, partial=True)


def _parse_node_templates(templates_node, filename, defs, partial):
    if isinstance(templates_node, yaml.ScalarNode):
        raw = _construct(templates_node)
        if raw is None:
            return {}
        raise SchemaError("node_templates must be a mapping",
                          _loc(templates_node, filename))
    mapping = _require_mapping(templates_node, "node_templates", filename)
    out = {}
    for name, body_node, name_loc in _items(mapping, filename,
                                            duplicate_error=DuplicateTemplateNameError):
        out[name] = _parse_node_template(name, body_node, name_loc, filename,
                                         defs, partial)
    return out


def _parse_node_template(name, body_node, location, filename, defs, partial):
    body = _require_mapping(body_node, f"node template {name!r}", filename)
    type_name = None
    property_values = {}
    artifacts = {}
    assignments = []
    for key, value_node, key_loc in _items(body, filename):
        if key == "type":
            type_name = str(_construct(value_node))
        elif key == "properties":
            prop_map = _require_mapping(value_node, f"properties of {name!r}",
                                        filename)
            for prop_name, prop_node, _ in _items(prop_map, filename):
                property_values[prop_name] = _construct(prop_node)
        elif key == "artifacts":
            artifacts = _parse_artifacts(value_node, name, filename)
        elif key == "requirements":
            assignments = _parse_requirement_assignments(value_node, name, filename)
        elif key not in ("description", "metadata"):
            raise SchemaError(f"unknown key {key!r} on node template {name!r}",
                              key_loc)
    if type_name is None:
        raise SchemaError(f"node template {name!r} has no type", location)

    try:
        resolved = resolve_type(type_name, defs)
    except UnknownTypeError as exc:
        raise SchemaError(f"node template {name!r}: {exc}", location) from exc

    for prop_name in property_values:
        if prop_name not in resolved.properties:
            raise SchemaError(f"node template {name!r} assigns unknown property "
                              f"{prop_name!r}", location)
    if not partial:
        for prop in resolved.properties.values():
            if prop.required and prop.default is None \
                    and prop.name not in property_values:
                raise SchemaError(f"node template {name!r} misses required "
                                  f"property {prop.name!r}", location)

    return NodeTemplate(
        name=name,
        type=type_name,
        property_values=property_values,
        artifacts=artifacts,
        requirement_assignments=assignments,
        location=location,
    )


def _parse_artifacts(node, template_name, filename):
    out = {}
    mapping = _require_mapping(node, f"artifacts of {template_name!r}", filename)
    for name, body_node, name_loc in _items(mapping, filename):
        raw = _construct(body_node)
        if isinstance(raw, str):
            out[name] = raw
        elif isinstance(raw, dict) and isinstance(raw.get("file"), str):
            out[name] = raw["file"]
        else:
            raise SchemaError(f"artifact {name!r} needs a file path", name_loc)
    return out


def _parse_requirement_assignments(node, template_name, filename):
    if not isinstance(node, yaml.SequenceNode):
        raise SchemaError(f"requirements of {template_name!r} must be a list",
                          _loc(node, filename))
    out = []
    for entry_node in node.value:
        entry = _require_mapping(entry_node, "requirement assignment", filename)
        entries = _items(entry, filename)
        if len(entries) != 1:
            raise SchemaError("each requirement assignment holds exactly one name",
                              _loc(entry_node, filename))
        name, body_node, name_loc = entries[0]
        raw = _construct(body_node)
        if isinstance(raw, str):
            out.append(RequirementAssignment(name=name, target=raw))
        elif isinstance(raw, dict):
            unknown = set(raw) - {"node", "relationship"}
            if unknown:
                raise SchemaError(f"requirement {name!r} has unsupported keys "
                                  f"{sorted(unknown)}", name_loc)
            if "node" not in raw:
                raise SchemaError(f"requirement {name!r} assignment lacks 'node'",
                                  name_loc)
            relationship = raw.get("relationship")
            out.append(RequirementAssignment(
                name=name,
                target=str(raw["node"]),
                relationship=None if relationship is None else str(relationship),
            ))
        else:
            raise SchemaError(f"requirement {name!r} must name a target", name_loc)
    return out


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def serialize_template(template: ServiceTemplate) -> str:
    """Normalized YAML for a service template (sorted template names)."""
    doc = {TOSCA_VERSION_KEY: template.tosca_version}
    doc.update(_definition_sections(template.user_types))
    node_templates = {}
    for name in sorted(template.node_templates):
        node_templates[name] = _dump_node_template(template.node_templates[name])
    doc["topology_template"] = {"node_templates": node_templates}
    return yaml.safe_dump(doc, sort_keys=False, indent=2,
                          default_flow_style=False, width=100)


def serialize_definitions(definitions, tosca_version="tosca_simple_yaml_1_3") -> str:
    """Normalized YAML for a set of TypeDefinitions (the catalog export shape)."""
    doc = {TOSCA_VERSION_KEY: tosca_version}
    doc.update(_definition_sections(definitions))
    return yaml.safe_dump(doc, sort_keys=False, indent=2,
                          default_flow_style=False, width=100)


def _definition_sections(definitions):
    sections = {}
    by_kind = {"node": {}, "capability": {}, "relationship": {}}
    for definition in definitions:
        by_kind[definition.kind][definition.name] = definition
    for section_key, kind in _SECTION_KINDS.items():
        group = by_kind[kind]
        if group:
            sections[section_key] = {name: _dump_type(group[name])
                                     for name in sorted(group)}
    return sections


def _dump_occurrences(occurrences):
    lo, hi = occurrences
    return [lo, "UNBOUNDED" if hi is UNBOUNDED else hi]


def _dump_type(definition: TypeDefinition):
    out = {}
    if definition.derived_from:
        out["derived_from"] = definition.derived_from
    if definition.metadata:
        out["metadata"] = dict(definition.metadata)
    if definition.attributes:
        out["attributes"] = {
            name: {"type": attr.value_type}
            for name, attr in sorted(definition.attributes.items())
        }
    if definition.properties:
        props = {}
        for name in sorted(definition.properties):
            prop = definition.properties[name]
            body = {"type": prop.value_type}
            if prop.default is not None:
                body["default"] = prop.default
            if not prop.required:
                body["required"] = False
            props[name] = body
        out["properties"] = props
    if definition.requirements:
        out["requirements"] = [
            {req.name: {
                "capability": req.capability_type,
                "node": req.node_type,
                "relationship": req.relationship_type,
                "occurrences": _dump_occurrences(req.occurrences),
            }}
            for req in definition.requirements
        ]
    if definition.capabilities:
        caps = {}
        for name in sorted(definition.capabilities):
            cap = definition.capabilities[name]
            body = {"occurrences": _dump_occurrences(cap.occurrences)}
            if cap.valid_source_types:
                body["valid_source_types"] = list(cap.valid_source_types)
            body["type"] = cap.capability_type
            caps[name] = body
        out["capabilities"] = caps
    return out


def _dump_node_template(node: NodeTemplate):
    out = {"type": node.type}
    if node.property_values:
        out["properties"] = {name: node.property_values[name]
                             for name in sorted(node.property_values)}
    if node.artifacts:
        out["artifacts"] = {name: node.artifacts[name]
                            for name in sorted(node.artifacts)}
    if node.requirement_assignments:
        reqs = []
        for assignment in node.requirement_assignments:
            if assignment.relationship is None:
                reqs.append({assignment.name: assignment.target})
            else:
                reqs.append({assignment.name: {
                    "node": assignment.target,
                    "relationship": assignment.relationship,
                }})
        out["requirements"] = reqs
    return out


def export_catalog_yaml() -> str:
    """The built-in catalog as a definitions document the parser reads back."""
    definitions = _catalog.builtin_catalog().definitions
    return serialize_definitions(list(definitions.values()))
