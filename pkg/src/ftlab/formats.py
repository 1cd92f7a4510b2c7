"""Parsers and serializers for fault trees.

Two encodings map onto the same model:

* a compact line DSL (``.ft``), one declaration per line::

      top TOP = AND(G1,BE3)
      gate G1 = KOFN[2](BE1,BE2)   # threshold gate, k in brackets
      basic BE1 p=0.001

* an Open-PSA-style XML interchange subset (``.opsa.xml``) accepting
  define-fault-tree, define-gate with and/or/atleast, and
  define-basic-event with a constant float probability.

Also exports the graph document consumed by the environments and any
protocol client: vertex features, edge list, and a deterministic ordering.
"""

from __future__ import annotations

import json
import re
import xml.parsers.expat
from typing import Any

from .core import FaultTree, Kind, Vertex, topological_order, validate
from .errors import FtError, MissingTruth

_ID = r"[A-Za-z_][A-Za-z0-9_]*"
_ID_RE = re.compile(_ID)
_NUM_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_GATE_WORDS = ("AND", "OR", "KOFN")

# One-hot feature order used by the graph document.
KIND_ORDER = (Kind.BASIC, Kind.AND, Kind.OR, Kind.KOFN)


class ParseError(FtError):
    """Parse failure with a 1-based source position and a stable code.

    Codes: SYNTAX, DUPLICATE_ID, UNKNOWN_REF, BAD_NUMBER, SEMANTIC,
    UNSUPPORTED (recognized interchange element outside the subset).
    """

    def __init__(self, line: int, column: int, code: str, message: str):
        super().__init__(f"{line}:{column}: {code}: {message}")
        self.line = line
        self.column = column
        self.code = code
        self.message = message


def canonical_json(doc: Any) -> str:
    """Deterministic JSON: sorted keys, no whitespace, shortest float decimals."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# ---------------------------------------------------------------------------
# Line DSL


class _Cursor:
    """Single-line scanner that keeps a 1-based column for error positions."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.line_no = line_no
        self.pos = 0

    @property
    def col(self) -> int:
        return self.pos + 1

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def fail(self, message: str, code: str = "SYNTAX") -> ParseError:
        return ParseError(self.line_no, self.col, code, message)

    def take(self, literal: str) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise self.fail(f"expected {literal!r}")
        self.pos += len(literal)

    def take_id(self) -> tuple[str, int]:
        self.skip_ws()
        m = _ID_RE.match(self.text, self.pos)
        if not m:
            raise self.fail("expected an identifier")
        self.pos = m.end()
        return m.group(0), m.start() + 1

    def take_number(self) -> tuple[float, int]:
        self.skip_ws()
        col = self.col
        m = _NUM_RE.match(self.text, self.pos)
        if not m:
            raise ParseError(self.line_no, col, "BAD_NUMBER", "expected a number")
        self.pos = m.end()
        return float(m.group(0)), col

    def take_int(self) -> tuple[int, int]:
        self.skip_ws()
        col = self.col
        m = re.match(r"\d+", self.text[self.pos:])
        if not m:
            raise ParseError(self.line_no, col, "BAD_NUMBER", "expected an integer")
        self.pos += m.end()
        return int(m.group(0)), col


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def parse_ftdsl(source: str) -> FaultTree:
    """Parse the line DSL into a validated fault tree.

    Declaration order is free and forward references are allowed; the first
    failure is raised as a ParseError carrying its source position.
    """
    vertices: dict[str, Vertex] = {}
    children: dict[str, tuple[str, ...]] = {}
    decl_pos: dict[str, tuple[int, int]] = {}
    refs: list[tuple[str, int, int]] = []
    top: str | None = None

    lines = source.split("\n")
    for line_no, raw in enumerate(lines, start=1):
        text = _strip_comment(raw)
        cur = _Cursor(text, line_no)
        if cur.at_end():
            continue
        word, word_col = cur.take_id()
        if word not in ("top", "gate", "basic"):
            raise ParseError(line_no, word_col, "SYNTAX", f"unknown declaration {word!r}")

        vid, vid_col = cur.take_id()
        if vid in vertices:
            raise ParseError(line_no, vid_col, "DUPLICATE_ID", f"{vid!r} already declared")

        if word == "basic":
            cur.take("p")
            cur.take("=")
            prob, num_col = cur.take_number()
            if not (0.0 <= prob <= 1.0):
                raise ParseError(line_no, num_col, "BAD_NUMBER", f"probability {prob!r} outside [0, 1]")
            if not cur.at_end():
                raise cur.fail("trailing input after basic event")
            vertices[vid] = Vertex(vid, Kind.BASIC, prob=prob)
            decl_pos[vid] = (line_no, vid_col)
            continue

        cur.take("=")
        gate_word, gate_col = cur.take_id()
        if gate_word not in _GATE_WORDS:
            raise ParseError(line_no, gate_col, "SYNTAX", f"unknown gate {gate_word!r}")
        k = None
        if gate_word == "KOFN":
            cur.take("[")
            k, _ = cur.take_int()
            cur.take("]")
        cur.take("(")
        kids: list[str] = []
        while True:
            child, child_col = cur.take_id()
            kids.append(child)
            refs.append((child, line_no, child_col))
            cur.skip_ws()
            if cur.pos < len(cur.text) and cur.text[cur.pos] == ",":
                cur.pos += 1
                continue
            break
        cur.take(")")
        if not cur.at_end():
            raise cur.fail("trailing input after gate declaration")

        kind = {"AND": Kind.AND, "OR": Kind.OR, "KOFN": Kind.KOFN}[gate_word]
        vertices[vid] = Vertex(vid, kind, k=k)
        children[vid] = tuple(kids)
        decl_pos[vid] = (line_no, vid_col)
        if word == "top":
            if top is not None:
                raise ParseError(line_no, word_col, "SEMANTIC", "more than one top declaration")
            top = vid

    last_line = max(1, len(lines))
    if top is None:
        raise ParseError(last_line, 1, "SEMANTIC", "no top declaration")
    for ref, line_no, col in refs:
        if ref not in vertices:
            raise ParseError(line_no, col, "UNKNOWN_REF", f"reference to undeclared {ref!r}")

    tree = FaultTree(vertices=vertices, children=children, top=top)
    report = validate(tree)
    if not report.ok:
        first = report.violations[0]
        line_no, col = decl_pos.get(first.locus, (last_line, 1))
        raise ParseError(line_no, col, "SEMANTIC", f"{first.code}: {first.message}")
    return tree


def serialize_ftdsl(tree: FaultTree) -> str:
    """Canonical DSL text: top first, gates in topological order, basics last.

    Children keep their declared order and probabilities use the shortest
    round-tripping decimal, so output is byte-stable and reparses to an
    equal tree.
    """
    order = topological_order(tree)
    gates = [vid for vid in order if tree.vertices[vid].is_gate and vid != tree.top]
    lines = [_gate_line("top", tree, tree.top)]
    lines.extend(_gate_line("gate", tree, vid) for vid in gates)
    lines.extend(
        f"basic {vid} p={tree.vertices[vid].prob!r}" for vid in tree.basic_ids()
    )
    return "\n".join(lines) + "\n"


def _gate_line(word: str, tree: FaultTree, vid: str) -> str:
    v = tree.vertices[vid]
    name = {Kind.AND: "AND", Kind.OR: "OR", Kind.KOFN: f"KOFN[{v.k}]"}[v.kind]
    return f"{word} {vid} = {name}({','.join(tree.children_of(vid))})"


# ---------------------------------------------------------------------------
# Open-PSA interchange subset

_MEF_FORMULAS = {"and": Kind.AND, "or": Kind.OR, "atleast": Kind.KOFN}
# Recognized Model Exchange Format elements we deliberately do not accept.
_MEF_UNSUPPORTED = {
    "not", "xor", "nand", "nor", "iff", "imply", "cardinality",
    "priority-and", "pand", "spare", "fdep", "seq", "inhibit",
    "house-event", "define-house-event", "define-parameter", "define-component",
    "exponential", "GLM", "Weibull", "lognormal", "uniform-deviate",
    "normal-deviate", "parameter", "system-mission-time", "define-CCF-group",
    "label", "attributes", "constant",
}


class _XmlNode:
    __slots__ = ("tag", "attrs", "children", "line", "col")

    def __init__(self, tag: str, attrs: dict[str, str], line: int, col: int):
        self.tag = tag
        self.attrs = attrs
        self.children: list[_XmlNode] = []
        self.line = line
        self.col = col


def _parse_xml(source: str) -> _XmlNode:
    parser = xml.parsers.expat.ParserCreate()
    root: list[_XmlNode] = []
    stack: list[_XmlNode] = []

    def start(tag: str, attrs: dict[str, str]) -> None:
        node = _XmlNode(tag, attrs, parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(_tag: str) -> None:
        stack.pop()

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        parser.Parse(source, True)
    except xml.parsers.expat.ExpatError as exc:
        raise ParseError(exc.lineno, exc.offset + 1, "SYNTAX", str(exc)) from None
    if not root:
        raise ParseError(1, 1, "SYNTAX", "empty document")
    return root[0]


def _xml_fail(node: _XmlNode, code: str, message: str) -> ParseError:
    return ParseError(node.line, node.col, code, message)


def _classify_unknown(node: _XmlNode, context: str) -> ParseError:
    if node.tag in _MEF_UNSUPPORTED:
        return _xml_fail(node, "UNSUPPORTED", f"element <{node.tag}> is outside the supported subset ({context})")
    return _xml_fail(node, "SYNTAX", f"unexpected element <{node.tag}> ({context})")


def _require_name(node: _XmlNode) -> str:
    name = node.attrs.get("name")
    if name is None:
        raise _xml_fail(node, "SYNTAX", f"<{node.tag}> lacks a name attribute")
    return name


def parse_openpsa(source: str) -> FaultTree:
    """Parse the Open-PSA-style interchange subset into a validated tree.

    The top gate is the unique gate never referenced by another gate.
    Basic events may be defined inside the fault tree, in model-data, or
    at document level.
    """
    root = _parse_xml(source)
    if root.tag != "opsa-mef":
        raise _xml_fail(root, "SYNTAX", f"expected <opsa-mef> root, got <{root.tag}>")

    gates: dict[str, tuple[_XmlNode, Kind, int | None, tuple[str, ...]]] = {}
    basics: dict[str, tuple[_XmlNode, float]] = {}
    ref_nodes: list[tuple[str, _XmlNode]] = []
    referenced: set[str] = set()

    def check_duplicate(name: str, node: _XmlNode) -> None:
        if name in gates or name in basics:
            raise _xml_fail(node, "DUPLICATE_ID", f"{name!r} already defined")

    def handle_basic(node: _XmlNode) -> None:
        name = _require_name(node)
        check_duplicate(name, node)
        exprs = [c for c in node.children]
        if len(exprs) != 1:
            raise _xml_fail(node, "SYNTAX", f"<define-basic-event> needs exactly one value element")
        expr = exprs[0]
        if expr.tag != "float":
            raise _classify_unknown(expr, "basic-event probability must be a constant <float>")
        value = expr.attrs.get("value")
        if value is None:
            raise _xml_fail(expr, "SYNTAX", "<float> lacks a value attribute")
        try:
            prob = float(value)
        except ValueError:
            raise _xml_fail(expr, "BAD_NUMBER", f"bad float {value!r}") from None
        if not (0.0 <= prob <= 1.0):
            raise _xml_fail(expr, "BAD_NUMBER", f"probability {prob!r} outside [0, 1]")
        basics[name] = (node, prob)

    def handle_gate(node: _XmlNode) -> None:
        name = _require_name(node)
        check_duplicate(name, node)
        formulas = list(node.children)
        if len(formulas) != 1:
            raise _xml_fail(node, "SYNTAX", "<define-gate> needs exactly one formula element")
        formula = formulas[0]
        if formula.tag not in _MEF_FORMULAS:
            raise _classify_unknown(formula, "gate formula")
        kind = _MEF_FORMULAS[formula.tag]
        k: int | None = None
        if kind is Kind.KOFN:
            min_attr = formula.attrs.get("min")
            if min_attr is None:
                raise _xml_fail(formula, "SYNTAX", "<atleast> lacks a min attribute")
            try:
                k = int(min_attr)
            except ValueError:
                raise _xml_fail(formula, "BAD_NUMBER", f"bad min {min_attr!r}") from None
        kids: list[str] = []
        for ref in formula.children:
            if ref.tag not in ("gate", "basic-event", "event"):
                raise _classify_unknown(ref, "formula argument")
            ref_name = _require_name(ref)
            kids.append(ref_name)
            ref_nodes.append((ref_name, ref))
            referenced.add(ref_name)
        gates[name] = (node, kind, k, tuple(kids))

    def walk_container(node: _XmlNode) -> None:
        for child in node.children:
            if child.tag == "define-gate":
                handle_gate(child)
            elif child.tag == "define-basic-event":
                handle_basic(child)
            elif child.tag in ("define-fault-tree", "model-data"):
                walk_container(child)
            else:
                raise _classify_unknown(child, f"inside <{node.tag}>")

    walk_container(root)

    for ref_name, node in ref_nodes:
        if ref_name not in gates and ref_name not in basics:
            raise _xml_fail(node, "UNKNOWN_REF", f"reference to undefined {ref_name!r}")

    tops = [name for name in gates if name not in referenced]
    if len(tops) != 1:
        raise ParseError(root.line, root.col, "SEMANTIC",
                         f"expected exactly one unreferenced top gate, found {len(tops)}")

    vertices: dict[str, Vertex] = {}
    children: dict[str, tuple[str, ...]] = {}
    for name, (_node, kind, k, kids) in gates.items():
        vertices[name] = Vertex(name, kind, k=k)
        children[name] = kids
    for name, (_node, prob) in basics.items():
        vertices[name] = Vertex(name, Kind.BASIC, prob=prob)

    tree = FaultTree(vertices=vertices, children=children, top=tops[0])
    report = validate(tree)
    if not report.ok:
        first = report.violations[0]
        pos = gates.get(first.locus) or basics.get(first.locus)
        node = pos[0] if pos else root
        raise _xml_fail(node, "SEMANTIC", f"{first.code}: {first.message}")
    return tree


# ---------------------------------------------------------------------------
# Graph document export


def export_graph_doc(
    tree: FaultTree,
    mask_gate_probs: bool,
    gate_truth: dict[str, float] | None = None,
) -> dict[str, Any]:
    """Vertex/edge document for environments and protocol clients.

    Vertices follow the topological ordering; each carries a kind one-hot
    (basic, and, or, kofn), k normalized as k/n (0 when not a threshold
    gate), and a prob field: the exact value for basic events, and for
    gates either the supplied truth or null when masked.
    """
    order = topological_order(tree)
    if not mask_gate_probs:
        gate_ids = set(tree.gate_ids())
        if gate_truth is None or gate_ids - set(gate_truth):
            raise MissingTruth("gate_truth must cover every gate when probabilities are unmasked")

    verts = []
    for vid in order:
        v = tree.vertices[vid]
        if v.is_basic:
            prob: float | None = v.prob
        elif mask_gate_probs:
            prob = None
        else:
            prob = gate_truth[vid]  # type: ignore[index]
        n = len(tree.children_of(vid))
        verts.append({
            "id": vid,
            "kind": [1 if v.kind is kind else 0 for kind in KIND_ORDER],
            "k": (v.k / n) if v.kind is Kind.KOFN and n else 0,
            "prob": prob,
        })

    edges = [[child, vid] for vid in order for child in tree.children_of(vid)]
    return {"top": tree.top, "ordering": list(order), "vertices": verts, "edges": edges}


def graph_doc_json(doc: dict[str, Any]) -> str:
    """Canonical byte rendering of a graph document (or any protocol payload)."""
    return canonical_json(doc)
