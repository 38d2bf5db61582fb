"""Document-order card extraction and the 8-tier etype label chain.

The saved HTML is only trusted for structure, never for geometry. A
tolerant tag-soup parser collects result-container candidates in
document order; each card is then classified by the first tier that
fires:

  1. widget heading-text table
  2. ad class signatures
  3. knowledge-panel class signatures
  4. data-attrid prefix table
  5. organic structural pattern (h3 + cite)
  6. widget structural fallback (heading present but unmatched)
  7. chrome sweep signatures (footer / navigation)
  8. default -> unknown_widget

Exact signatures (tokens, prefixes, heading strings) are configuration
shipped in a versioned rules file so era-specific label sets can be
swapped without touching code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from html.parser import HTMLParser
from importlib import resources
from pathlib import Path

from .model import Etype, is_main_axis

__all__ = [
    "DocCard",
    "EtypeLabel",
    "RulesTable",
    "classify_card",
    "label_sequence",
    "load_rules",
    "parse_doc_cards",
]

_VOID_TAGS = frozenset(
    {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta",
     "param", "source", "track", "wbr"}
)

_HEADING_TAGS_DEFAULT = ("h1", "h2", "h3", "h4")


def _norm_text(text: str) -> str:
    return " ".join(text.split()).lower()


@dataclass(frozen=True)
class RulesTable:
    """Loaded signature tables; immutable after load."""

    version: int
    container_tokens: frozenset[str]
    heading_tags: tuple[str, ...]
    snippet_tokens: frozenset[str]
    headings: tuple[tuple[str, Etype], ...]
    ad_tokens: tuple[tuple[str, Etype], ...]
    kp_tokens: tuple[tuple[str, Etype], ...]
    attrid_prefixes: tuple[tuple[str, Etype], ...]
    chrome_tokens: tuple[tuple[str, Etype], ...]

    def chrome_token_set(self) -> frozenset[str]:
        return frozenset(tok for tok, _ in self.chrome_tokens)


def load_rules(path: str | Path | None = None) -> RulesTable:
    """Load a rules file; None loads the packaged default table."""
    if path is None:
        raw = resources.files("serpaoi").joinpath("rules/default_rules.json").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    doc = json.loads(raw)
    if doc.get("schema") != "serpaoi.rules@1":
        raise ValueError(f"unsupported rules schema: {doc.get('schema')!r}")

    def pairs(entries: list[dict], key: str) -> tuple[tuple[str, Etype], ...]:
        return tuple((e[key], Etype(e["etype"])) for e in entries)

    tiers = doc["tiers"]
    return RulesTable(
        version=int(doc["version"]),
        container_tokens=frozenset(doc["container_class_tokens"]),
        heading_tags=tuple(doc.get("heading_tags", _HEADING_TAGS_DEFAULT)),
        snippet_tokens=frozenset(doc.get("snippet_class_tokens", ())),
        headings=tuple((_norm_text(e["heading"]), Etype(e["etype"])) for e in tiers["headings"]),
        ad_tokens=pairs(tiers["ad_class_tokens"], "token"),
        kp_tokens=pairs(tiers["kp_class_tokens"], "token"),
        attrid_prefixes=pairs(tiers["attrid_prefixes"], "prefix"),
        chrome_tokens=pairs(tiers["chrome_class_tokens"], "token"),
    )


_DEFAULT_RULES: RulesTable | None = None


def default_rules() -> RulesTable:
    global _DEFAULT_RULES
    if _DEFAULT_RULES is None:
        _DEFAULT_RULES = load_rules(None)
    return _DEFAULT_RULES


@dataclass(frozen=True)
class DocCard:
    """One HTML-derived candidate card with extracted structural signals."""

    doc_index: int
    heading_text: str = ""
    class_tokens: frozenset[str] = frozenset()
    data_attrid: str = ""
    has_cite: bool = False
    has_h3: bool = False
    anchor_count: int = 0
    snippet_text: str = ""


@dataclass(frozen=True)
class EtypeLabel:
    etype: Etype
    tier: int
    doc_index: int


class _Node:
    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: dict[str, str], parent: "_Node | None"):
        self.tag = tag
        self.attrs = attrs
        self.children: list[_Node | str] = []
        self.parent = parent

    def class_tokens(self) -> set[str]:
        return set((self.attrs.get("class") or "").split())

    def walk(self):
        """Pre-order traversal over element nodes of this subtree."""
        stack: list[_Node] = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(
                reversed([c for c in node.children if isinstance(c, _Node)])
            )

    def text(self) -> str:
        chunks: list[str] = []
        stack: list[_Node | str] = [self]
        while stack:
            item = stack.pop()
            if isinstance(item, str):
                chunks.append(item)
            else:
                stack.extend(reversed(item.children))
        return " ".join(" ".join(chunks).split())


class _TreeBuilder(HTMLParser):
    """Tag-soup tree builder: unclosed tags are implicitly closed and
    stray end tags are ignored, so malformed markup never aborts.

    Result containers are treated as siblings: an element carrying a
    container class token implicitly closes any still-open container, so
    a stray unclosed tag inside one card cannot swallow the rest of the
    page.
    """

    def __init__(self, container_tokens: frozenset[str] = frozenset()) -> None:
        super().__init__(convert_charrefs=True)
        self.root = _Node("#document", {}, None)
        self._stack = [self.root]
        self._container_tokens = container_tokens

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        attr_map = {k: (v or "") for k, v in attrs}
        tokens = set((attr_map.get("class") or "").split())
        if tokens & self._container_tokens:
            for i in range(len(self._stack) - 1, 0, -1):
                if self._stack[i].class_tokens() & self._container_tokens:
                    del self._stack[i:]
                    break
        node = _Node(tag, attr_map, self._stack[-1])
        self._stack[-1].children.append(node)
        if tag not in _VOID_TAGS:
            self._stack.append(node)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        node = _Node(tag, {k: (v or "") for k, v in attrs}, self._stack[-1])
        self._stack[-1].children.append(node)

    def handle_endtag(self, tag: str) -> None:
        for i in range(len(self._stack) - 1, 0, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return

    def handle_data(self, data: str) -> None:
        if data.strip():
            self._stack[-1].children.append(data)


def _parse_tree(html: str, container_tokens: frozenset[str] = frozenset()) -> _Node:
    builder = _TreeBuilder(container_tokens)
    builder.feed(html)
    builder.close()
    return builder.root


def _card_from_node(node: _Node, doc_index: int, rules: RulesTable) -> DocCard:
    heading_text = ""
    data_attrid = node.attrs.get("data-attrid", "")
    has_cite = False
    has_h3 = False
    anchor_count = 0
    snippet_text = ""

    tokens = set(node.class_tokens())
    depth: dict[int, int] = {id(node): 0}
    for el in node.walk():
        d = depth[id(el)]
        for child in el.children:
            if isinstance(child, _Node):
                depth[id(child)] = d + 1
        if el is node:
            continue
        if d <= 2:
            tokens |= el.class_tokens()
        if not data_attrid and "data-attrid" in el.attrs:
            data_attrid = el.attrs["data-attrid"]
        if el.tag == "h3":
            has_h3 = True
        if el.tag == "cite":
            has_cite = True
        if el.tag == "a":
            anchor_count += 1
        if not heading_text and (el.tag in rules.heading_tags or el.attrs.get("role") == "heading"):
            heading_text = el.text()
        if not snippet_text and el.class_tokens() & rules.snippet_tokens:
            snippet_text = el.text()

    if not snippet_text:
        snippet_text = node.text()
    return DocCard(
        doc_index=doc_index,
        heading_text=heading_text,
        class_tokens=frozenset(tokens),
        data_attrid=data_attrid,
        has_cite=has_cite,
        has_h3=has_h3,
        anchor_count=anchor_count,
        snippet_text=snippet_text,
    )


def parse_doc_cards(html: str, rules: RulesTable | None = None) -> list[DocCard]:
    """Top-level result-container candidates in document order.

    A card root is an element whose class tokens intersect the rules
    file's container tokens; container elements are treated as siblings
    (see _TreeBuilder), so each match is one card. An empty document
    yields an empty list.
    """
    rules = rules or default_rules()
    if not html.strip():
        return []
    root = _parse_tree(html, rules.container_tokens)

    cards: list[DocCard] = []
    doc_index = 0

    def scan(node: _Node) -> None:
        nonlocal doc_index
        for child in node.children:
            if not isinstance(child, _Node):
                continue
            if child.class_tokens() & rules.container_tokens:
                cards.append(_card_from_node(child, doc_index, rules))
                doc_index += 1
            else:
                scan(child)

    scan(root)
    return cards


def classify_card(card: DocCard, rules: RulesTable | None = None) -> EtypeLabel:
    """First-match classification through the 8-tier chain; total."""
    rules = rules or default_rules()

    heading = _norm_text(card.heading_text)
    if heading:
        for name, etype in rules.headings:
            if heading == name:
                return EtypeLabel(etype, 1, card.doc_index)

    for token, etype in rules.ad_tokens:
        if token in card.class_tokens:
            return EtypeLabel(etype, 2, card.doc_index)

    for token, etype in rules.kp_tokens:
        if token in card.class_tokens:
            return EtypeLabel(etype, 3, card.doc_index)

    if card.data_attrid:
        for prefix, etype in rules.attrid_prefixes:
            if card.data_attrid.startswith(prefix):
                return EtypeLabel(etype, 4, card.doc_index)

    if card.has_h3 and card.has_cite:
        return EtypeLabel(Etype.ORGANIC, 5, card.doc_index)

    if heading:
        return EtypeLabel(Etype.OTHER_WIDGET, 6, card.doc_index)

    for token, etype in rules.chrome_tokens:
        if token in card.class_tokens:
            return EtypeLabel(etype, 7, card.doc_index)

    return EtypeLabel(Etype.UNKNOWN_WIDGET, 8, card.doc_index)


def _footer_match(card: DocCard, rules: RulesTable) -> bool:
    return bool(card.class_tokens & rules.chrome_token_set())


def label_sequence(cards: list[DocCard], rules: RulesTable | None = None) -> list[EtypeLabel]:
    """Classify cards in document order, then sweep trailing footer cards.

    Cards after the last main-axis card that does not itself carry footer
    signatures are re-labeled chrome when they match footer signatures,
    whatever tier classified them first; footer artifacts routinely carry
    headings or organic-looking structure. Order is never changed.
    """
    rules = rules or default_rules()
    labels = [classify_card(card, rules) for card in cards]

    last_main = -1
    for i, (card, label) in enumerate(zip(cards, labels)):
        if is_main_axis(label.etype) and not _footer_match(card, rules):
            last_main = i

    out: list[EtypeLabel] = []
    for i, (card, label) in enumerate(zip(cards, labels)):
        if i > last_main and _footer_match(card, rules):
            out.append(EtypeLabel(Etype.CHROME, 7, label.doc_index))
        else:
            out.append(label)
    return out
