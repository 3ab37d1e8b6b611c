"""Training-unit extraction: AST path contexts and CBOW token windows.

A method sample is the bag of (left terminal, path, right terminal)
triples over ordered leaf pairs inside one method declaration, where the
path walks node kinds up to the lowest common ancestor and back down,
rendered like "Param↑MethodDecl↓Block↓Return". A CBOW sample is one token
position with its 2*w neighbors, padded at file boundaries.

Terminal/token texts are lightly normalized: string and char literals
collapse to <STR>/<CHR> placeholders so terminals never contain spaces or
commas (the interchange format depends on that) and the vocabularies stay
small. Any leaf matching the enclosing method's name is replaced by a
sentinel so the label never leaks into its own contexts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lexer import Token
from .parser import AstNode

PAD_TOKEN = "<PAD>"
METHOD_NAME_SENTINEL = "<METHOD>"

UP = "↑"    # path step toward the root
DOWN = "↓"  # path step away from the root


@dataclass(frozen=True)
class PathContext:
    left: str
    path: str
    right: str


@dataclass
class MethodSample:
    label: str
    contexts: list[PathContext]
    origin: str = ""


@dataclass
class CbowSample:
    target: str
    context: list[str]


def normalize_text(text: str) -> str:
    if text.startswith('"'):
        return "<STR>"
    if text.startswith("'"):
        return "<CHR>"
    return text


def build_parent_map(tree: AstNode) -> dict[int, AstNode]:
    parents: dict[int, AstNode] = {}
    stack = [tree]
    while stack:
        n = stack.pop()
        for child in n.children:
            parents[id(child)] = n
            stack.append(child)
    return parents


def _ancestors(parents: dict[int, AstNode], n: AstNode) -> list[AstNode]:
    chain = []
    cur = parents.get(id(n))
    while cur is not None:
        chain.append(cur)
        cur = parents.get(id(cur))
    return chain


def leaf_path(parents: dict[int, AstNode], left: AstNode, right: AstNode) -> tuple[str, int]:
    """Path string between two leaves and its length in nodes."""
    la = _ancestors(parents, left)
    ra = _ancestors(parents, right)
    rindex = {id(n): i for i, n in enumerate(ra)}
    for i, n in enumerate(la):
        j = rindex.get(id(n))
        if j is not None:
            up = la[: i + 1]          # left parent .. LCA
            down = ra[:j][::-1]       # LCA-1 .. right parent
            text = UP.join(k.kind for k in up)
            for k in down:
                text += DOWN + k.kind
            return text, len(up) + len(down)
    raise ValueError("leaves do not share a root")


def iter_method_nodes(tree: AstNode):
    for n in tree.walk():
        if n.kind == "MethodDecl":
            yield n


def method_name(m: AstNode) -> str | None:
    for child in m.children:
        if child.kind == "Name" and child.is_leaf:
            return child.token.text
    return None


def method_context_leaves(m: AstNode) -> list[AstNode]:
    """Leaves of the method subtree in source order, minus the method's own
    return-type and name leaves (params and body stay in)."""
    skip = {id(c) for c in m.children if c.is_leaf and c.kind in ("Type", "Name")}
    return [n for n in m.walk() if n.is_leaf and id(n) not in skip and n is not m]


def extract_method_samples(
    tree: AstNode,
    max_contexts: int = 200,
    max_path_len: int = 9,
    seed: int = 0,
    origin: str = "",
) -> list[MethodSample]:
    """One sample per method with >= 2 enumerable leaves.

    Contexts are all ordered leaf pairs whose connecting path has at most
    `max_path_len` nodes; larger bags are thinned by a seeded uniform
    subsample that keeps source order.
    """
    parents = build_parent_map(tree)
    samples: list[MethodSample] = []
    for ordinal, m in enumerate(iter_method_nodes(tree)):
        name = method_name(m)
        if not name:
            continue
        leaves = method_context_leaves(m)
        if len(leaves) < 2:
            continue
        terminals = [
            METHOD_NAME_SENTINEL if leaf.token.text == name else normalize_text(leaf.token.text)
            for leaf in leaves
        ]
        contexts: list[PathContext] = []
        for i in range(len(leaves)):
            for j in range(i + 1, len(leaves)):
                path, length = leaf_path(parents, leaves[i], leaves[j])
                if length <= max_path_len:
                    contexts.append(PathContext(terminals[i], path, terminals[j]))
        if not contexts:
            continue
        if len(contexts) > max_contexts:
            rng = np.random.default_rng([seed, ordinal])
            keep = np.sort(rng.choice(len(contexts), size=max_contexts, replace=False))
            contexts = [contexts[k] for k in keep]
        samples.append(MethodSample(label=name, contexts=contexts, origin=origin))
    return samples


def extract_cbow_samples(tokens: list[Token], window: int = 4) -> list[CbowSample]:
    """One sample per token position; boundary context slots hold <PAD>."""
    if window < 1:
        raise ValueError("window radius must be >= 1")
    texts = [normalize_text(t.text) for t in tokens]
    n = len(texts)
    samples = []
    for i in range(n):
        context = [
            texts[j] if 0 <= j < n else PAD_TOKEN
            for j in list(range(i - window, i)) + list(range(i + 1, i + window + 1))
        ]
        samples.append(CbowSample(target=texts[i], context=context))
    return samples


# -- interchange files -------------------------------------------------
#
# CS: one method per line, `label left,path,right left,path,right ...`
# CC: one sample per line, `target ctx1 ctx2 ...` (2*w context slots)
# UTF-8, LF line endings.


class ContextFormatError(ValueError):
    pass


def write_cs_contexts(path, samples: list[MethodSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in samples:
            parts = [s.label] + [f"{c.left},{c.path},{c.right}" for c in s.contexts]
            f.write(" ".join(parts) + "\n")


def read_cs_contexts(path) -> list[MethodSample]:
    samples = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            contexts = []
            for chunk in parts[1:]:
                fields = chunk.split(",")
                if len(fields) != 3:
                    raise ContextFormatError(f"{path}:{lineno}: bad context triple {chunk!r}")
                contexts.append(PathContext(*fields))
            samples.append(MethodSample(label=parts[0], contexts=contexts, origin=f"{path}:{lineno}"))
    return samples


def write_cc_contexts(path, samples: list[CbowSample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in samples:
            f.write(" ".join([s.target] + s.context) + "\n")


def read_cc_contexts(path) -> list[CbowSample]:
    samples = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) < 3 or len(parts) % 2 == 0:
                raise ContextFormatError(f"{path}:{lineno}: expected target plus 2*w context tokens")
            samples.append(CbowSample(target=parts[0], context=parts[1:]))
    return samples
