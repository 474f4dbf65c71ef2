"""Native HTML text extraction: a small tolerant DOM over html.parser, a
minimal selector language (``tag``, ``.class``, ``#id``, ``tag.class``,
``tag#id``), and a readability heuristic that picks the largest contiguous
text block after boilerplate regions are removed.
"""

from __future__ import annotations

import re
from html import unescape
from html.parser import HTMLParser
from typing import Iterator, Optional

VOID_TAGS = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}
NOISE_TAGS = {
    "script", "style", "nav", "header", "footer", "aside", "noscript",
    "form", "iframe", "svg", "template", "button",
}
BLOCK_CANDIDATES = ("article", "main", "section", "div", "td", "body")

_WS_RE = re.compile(r"\s+")


class Node:
    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: Optional[dict] = None, parent: Optional["Node"] = None):
        self.tag = tag
        self.attrs = attrs or {}
        self.children: list = []  # Node or str
        self.parent = parent

    def iter(self) -> Iterator["Node"]:
        yield self
        for child in self.children:
            if isinstance(child, Node):
                yield from child.iter()

    def text(self) -> str:
        parts: list[str] = []
        self._collect_text(parts)
        return _WS_RE.sub(" ", " ".join(parts)).strip()

    def _collect_text(self, parts: list) -> None:
        for child in self.children:
            if isinstance(child, str):
                parts.append(child)
            else:
                child._collect_text(parts)

    def classes(self) -> set:
        return set(self.attrs.get("class", "").split())


class _DomBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = Node("#document")
        self._stack = [self.root]

    def handle_starttag(self, tag, attrs):
        node = Node(tag, dict(attrs), parent=self._stack[-1])
        self._stack[-1].children.append(node)
        if tag not in VOID_TAGS:
            self._stack.append(node)

    def handle_startendtag(self, tag, attrs):
        self._stack[-1].children.append(Node(tag, dict(attrs), parent=self._stack[-1]))

    def handle_endtag(self, tag):
        for i in range(len(self._stack) - 1, 0, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                break

    def handle_data(self, data):
        if data and data.strip():
            self._stack[-1].children.append(unescape(data) if "&" in data else data)


def parse_html(html: str) -> Node:
    builder = _DomBuilder()
    builder.feed(html)
    builder.close()
    return builder.root


def strip_noise(root: Node) -> Node:
    """Drop script/style/nav and similar boilerplate regions in place."""
    for node in list(root.iter()):
        node.children = [
            c for c in node.children if not (isinstance(c, Node) and c.tag in NOISE_TAGS)
        ]
    return root


def select_first(root: Node, selector: str) -> Optional[Node]:
    """First element matching ``tag``, ``.class``, ``#id`` or a combination."""
    selector = selector.strip()
    tag, cls, node_id = None, None, None
    m = re.fullmatch(r"([a-zA-Z][\w-]*)?(?:\.([\w-]+))?(?:#([\w-]+))?", selector)
    if not m or not selector:
        return None
    tag, cls, node_id = m.group(1), m.group(2), m.group(3)
    for node in root.iter():
        if node.tag.startswith("#"):
            continue
        if tag and node.tag != tag.lower():
            continue
        if cls and cls not in node.classes():
            continue
        if node_id and node.attrs.get("id") != node_id:
            continue
        return node
    return None


def page_title(root: Node) -> Optional[str]:
    for tag in ("h1", "title"):
        node = select_first(root, tag)
        if node:
            text = node.text()
            if text:
                return text
    return None


def _block_score(node: Node) -> int:
    """Text mass of a block: its paragraph children if any, else its own text."""
    para_text = sum(len(c.text()) for c in node.children if isinstance(c, Node) and c.tag == "p")
    if para_text:
        return para_text
    return len(node.text())


def largest_text_block(root: Node) -> Optional[str]:
    """Readability fallback: the candidate block with the most text, rendered
    as paragraphs joined by blank lines."""
    best: Optional[Node] = None
    best_score = 0
    for node in root.iter():
        if node.tag not in BLOCK_CANDIDATES:
            continue
        score = _block_score(node)
        if score > best_score:
            best, best_score = node, score
    if best is None:
        return None
    paragraphs = [c.text() for c in best.children if isinstance(c, Node) and c.tag == "p"]
    paragraphs = [p for p in paragraphs if p]
    if paragraphs:
        return "\n\n".join(paragraphs)
    text = best.text()
    return text or None
