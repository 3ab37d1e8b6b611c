"""Java tokenizing/parsing and sample extraction for both tasks."""

from .lexer import (
    KIND_COMMENT,
    KIND_IDENTIFIER,
    KIND_KEYWORD,
    KIND_LITERAL,
    KIND_OPERATOR,
    KIND_SEPARATOR,
    LexicalError,
    Token,
    tokenize_java,
)
from .parser import AstNode, ParseError, parse_java_lite
from .samples import (
    METHOD_NAME_SENTINEL,
    PAD_TOKEN,
    CbowSample,
    ContextFormatError,
    MethodSample,
    PathContext,
    build_parent_map,
    extract_cbow_samples,
    extract_method_samples,
    iter_method_nodes,
    leaf_path,
    method_context_leaves,
    method_name,
    normalize_text,
    read_cc_contexts,
    read_cs_contexts,
    write_cc_contexts,
    write_cs_contexts,
)
from .vocab import (
    PAD_ID,
    UNK_ID,
    UNK_TOKEN,
    Vocabulary,
    VocabularyFrozenError,
    build_cc_vocab,
    build_cs_vocabs,
)

__all__ = [
    "AstNode",
    "CbowSample",
    "ContextFormatError",
    "KIND_COMMENT",
    "KIND_IDENTIFIER",
    "KIND_KEYWORD",
    "KIND_LITERAL",
    "KIND_OPERATOR",
    "KIND_SEPARATOR",
    "LexicalError",
    "METHOD_NAME_SENTINEL",
    "MethodSample",
    "PAD_ID",
    "PAD_TOKEN",
    "ParseError",
    "PathContext",
    "Token",
    "UNK_ID",
    "UNK_TOKEN",
    "Vocabulary",
    "VocabularyFrozenError",
    "build_cc_vocab",
    "build_cs_vocabs",
    "build_parent_map",
    "extract_cbow_samples",
    "extract_method_samples",
    "iter_method_nodes",
    "leaf_path",
    "method_context_leaves",
    "method_name",
    "normalize_text",
    "parse_java_lite",
    "read_cc_contexts",
    "read_cs_contexts",
    "tokenize_java",
    "write_cc_contexts",
    "write_cs_contexts",
]
