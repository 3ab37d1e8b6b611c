"""Recursive-descent parser for a pragmatic Java subset.

Recognizes class/interface/enum bodies, method declarations, blocks,
if/for/while/do/try, return/throw/break/continue, local declarations,
assignments, calls, field access, and binary/unary expressions. Anything
else is consumed with brace-balanced recovery and wrapped in an ExprStmt
node instead of rejecting the file; only unbalanced braces at end of input
are a hard error.

Tree shape: leaves carry tokens (Name, Literal, Type, This, Super, and
childless Return/Break/Continue); internal nodes have at least one child.
Empty constructs are omitted rather than emitted childless, so e.g. a
method with an empty body simply has no Block child. The root
CompilationUnit is the one node allowed to be empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import (
    KIND_IDENTIFIER,
    KIND_KEYWORD,
    KIND_LITERAL,
    KIND_OPERATOR,
    Token,
)

PRIMITIVES = frozenset({"void", "boolean", "byte", "char", "short", "int", "long", "float", "double", "var"})
MODIFIERS = frozenset(
    {"public", "private", "protected", "static", "final", "abstract", "synchronized",
     "native", "transient", "volatile", "strictfp", "default", "sealed"}
)
ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="})

# binary precedence tiers, loosest first
BINARY_TIERS = (
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", ">", "<=", ">=", "instanceof"),
    ("<<", ">>", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
)
UNARY_OPS = frozenset({"!", "~", "+", "-", "++", "--"})


class ParseError(ValueError):
    pass


@dataclass
class AstNode:
    kind: str
    children: list["AstNode"] = field(default_factory=list)
    token: Token | None = None

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def pretty(self, depth: int = 0) -> str:
        label = self.kind if self.token is None else f"{self.kind}:{self.token.text}"
        lines = ["  " * depth + label]
        for child in self.children:
            lines.append(child.pretty(depth + 1))
        return "\n".join(lines)


def leaf(kind: str, token: Token) -> AstNode:
    return AstNode(kind, [], token)


def node(kind: str, children: list[AstNode | None]) -> AstNode | None:
    kept = [c for c in children if c is not None]
    if not kept:
        return None
    return AstNode(kind, kept)


class _Recover(Exception):
    """Internal: statement/member material the grammar does not cover."""


class _Parser:
    def __init__(self, tokens: list[Token], diagnostics: list[str] | None = None):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics = diagnostics

    # -- token helpers -------------------------------------------------

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def check(self, text: str) -> bool:
        t = self.peek()
        return t is not None and t.text == text

    def check_kind(self, kind: str) -> bool:
        t = self.peek()
        return t is not None and t.kind == kind

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def match(self, text: str) -> Token | None:
        if self.check(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if self.check(text):
            return self.advance()
        if text == "}" and self.at_end():
            raise ParseError("unbalanced braces at end of input")
        raise _Recover()

    # -- recovery ------------------------------------------------------

    def recover_wrapped(self, start: int) -> AstNode | None:
        """Consume from `start` to the next ';' (balanced) or block edge,
        wrapping identifier/literal tokens as ExprStmt leaves."""
        self.pos = start
        collected: list[AstNode] = []
        depth = 0
        while not self.at_end():
            t = self.peek()
            if depth == 0 and t.text == "}":
                break
            tok = self.advance()
            if tok.text in "([{":
                depth += 1
            elif tok.text in ")]}":
                depth -= 1
                if depth < 0:
                    self.pos -= 1
                    break
                if depth == 0 and tok.text == "}":
                    break  # a consumed block closed; the statement is over
            elif tok.kind == KIND_IDENTIFIER:
                collected.append(leaf("Name", tok))
            elif tok.kind == KIND_LITERAL:
                collected.append(leaf("Literal", tok))
            if depth == 0 and tok.text == ";":
                break
        if self.pos == start:  # always make progress
            self.advance()
        if self.diagnostics is not None:
            line = self.tokens[start].line
            self.diagnostics.append(
                f"line {line}: wrapped {self.pos - start} unrecognized tokens in an ExprStmt"
            )
        return node("ExprStmt", collected)

    def skip_balanced(self, open_text: str, close_text: str) -> None:
        depth = 0
        while not self.at_end():
            t = self.advance()
            if t.text == open_text:
                depth += 1
            elif t.text == close_text:
                depth -= 1
                if depth == 0:
                    return
        if close_text == "}":
            raise ParseError("unbalanced braces at end of input")

    def skip_annotation(self) -> None:
        self.advance()  # '@'
        if self.check_kind(KIND_IDENTIFIER) or self.check_kind(KIND_KEYWORD):
            self.advance()
            while self.match("."):
                if self.check_kind(KIND_IDENTIFIER):
                    self.advance()
        if self.check("("):
            self.skip_balanced("(", ")")

    def skip_generics(self) -> bool:
        """Skip a balanced <...> if one plausibly starts here; else no-op."""
        if not self.check("<"):
            return False
        save = self.pos
        depth = 0
        while not self.at_end():
            t = self.advance()
            if t.text == "<":
                depth += 1
            elif t.text == ">":
                depth -= 1
                if depth == 0:
                    return True
            elif t.text == ">>":
                depth -= 2
                if depth <= 0:
                    return True
            elif t.text in (";", "{", "}", ")") or t.kind == KIND_OPERATOR and t.text in ("&&", "||", "=="):
                break
        self.pos = save
        return False

    # -- types ---------------------------------------------------------

    def try_typeref(self) -> AstNode | None:
        """Parse a type reference, returning a Type leaf for its base name."""
        save = self.pos
        t = self.peek()
        if t is None:
            return None
        if t.kind == KIND_KEYWORD and t.text in PRIMITIVES:
            base = self.advance()
        elif t.kind == KIND_IDENTIFIER:
            base = self.advance()
            self.skip_generics()
            while self.check(".") and self.peek(1) is not None and self.peek(1).kind == KIND_IDENTIFIER:
                self.advance()
                base = self.advance()
                self.skip_generics()
        else:
            return None
        while self.check("[") and self.peek(1) is not None and self.peek(1).text == "]":
            self.advance()
            self.advance()
        if self.pos == save:
            return None
        return leaf("Type", base)

    def looks_like_declaration(self) -> bool:
        save = self.pos
        ok = False
        ref = self.try_typeref()
        if ref is not None and self.check_kind(KIND_IDENTIFIER):
            after = self.peek(1)
            if after is not None and after.text in ("=", ";", ",", ":", ")"):
                ok = True
            elif after is not None and after.text == "[":
                third = self.peek(2)
                ok = third is not None and third.text == "]"
        self.pos = save
        return ok

    # -- toplevel ------------------------------------------------------

    def parse_compilation_unit(self) -> AstNode:
        root = AstNode("CompilationUnit", [])
        while not self.at_end():
            start = self.pos
            t = self.peek()
            try:
                if t.text == "package" or t.text == "import":
                    root.children.extend(filter(None, [self.parse_package_or_import()]))
                elif t.text == "@":
                    self.skip_annotation()
                elif t.text == ";":
                    self.advance()
                else:
                    root.children.extend(filter(None, [self.parse_type_decl()]))
            except _Recover:
                root.children.extend(filter(None, [self.recover_wrapped(start)]))
        return root

    def parse_package_or_import(self) -> AstNode | None:
        kind = "PackageDecl" if self.advance().text == "package" else "ImportDecl"
        names: list[AstNode] = []
        while not self.at_end() and not self.check(";"):
            t = self.advance()
            if t.kind == KIND_IDENTIFIER:
                names.append(leaf("Name", t))
        self.match(";")
        return node(kind, names)

    def parse_type_decl(self) -> AstNode | None:
        while self.check_kind(KIND_KEYWORD) and self.peek().text in MODIFIERS or self.check("@"):
            if self.check("@"):
                self.skip_annotation()
            else:
                self.advance()
        t = self.peek()
        if t is None or t.text not in ("class", "interface", "enum"):
            raise _Recover()
        kw = self.advance().text
        kind = {"class": "ClassDecl", "interface": "InterfaceDecl", "enum": "EnumDecl"}[kw]
        if not self.check_kind(KIND_IDENTIFIER):
            raise _Recover()
        name = leaf("Name", self.advance())
        self.skip_generics()
        while not self.at_end() and not self.check("{"):
            self.advance()  # extends/implements clause
        self.expect("{")
        children: list[AstNode | None] = [name]
        if kind == "EnumDecl":
            children.extend(self.parse_enum_constants())
        while not self.check("}"):
            if self.at_end():
                raise ParseError("unbalanced braces at end of input")
            children.append(self.parse_member())
        self.advance()  # '}'
        return node(kind, children)

    def parse_enum_constants(self) -> list[AstNode]:
        constants: list[AstNode] = []
        while not self.at_end() and not self.check(";") and not self.check("}"):
            t = self.advance()
            if t.kind == KIND_IDENTIFIER:
                constants.append(leaf("Name", t))
            elif t.text == "(":
                self.pos -= 1
                self.skip_balanced("(", ")")
            elif t.text == "{":
                self.pos -= 1
                self.skip_balanced("{", "}")
        self.match(";")
        return constants

    # -- members -------------------------------------------------------

    def parse_member(self) -> AstNode | None:
        start = self.pos
        try:
            while self.check("@"):
                self.skip_annotation()
            if self.check(";"):
                self.advance()
                return None
            while self.check_kind(KIND_KEYWORD) and self.peek().text in MODIFIERS:
                self.advance()
                while self.check("@"):
                    self.skip_annotation()
            t = self.peek()
            if t is None:
                raise ParseError("unbalanced braces at end of input")
            if t.text in ("class", "interface", "enum"):
                return self.parse_type_decl()
            if t.text == "{":
                return self.parse_block()
            self.skip_generics()  # generic method type parameters
            # constructor: Name '('
            if self.check_kind(KIND_IDENTIFIER) and self.peek(1) is not None and self.peek(1).text == "(":
                name = leaf("Name", self.advance())
                return self.finish_method([name])
            ret = self.try_typeref()
            if ret is None or not self.check_kind(KIND_IDENTIFIER):
                raise _Recover()
            name = leaf("Name", self.advance())
            if self.check("("):
                return self.finish_method([ret, name])
            return self.finish_field(ret, name)
        except _Recover:
            return self.recover_wrapped(start)

    def finish_method(self, head: list[AstNode]) -> AstNode | None:
        children: list[AstNode | None] = list(head)
        self.expect("(")
        while not self.check(")"):
            if self.at_end():
                raise _Recover()
            if self.match(","):
                continue
            children.append(self.parse_param())
        self.advance()  # ')'
        if self.check("throws"):
            self.advance()
            while not self.at_end() and not self.check("{") and not self.check(";"):
                self.advance()
        if self.check("{"):
            children.append(self.parse_block())
        else:
            self.expect(";")
        return node("MethodDecl", children)

    def parse_param(self) -> AstNode:
        while self.check("@"):
            self.skip_annotation()
        while self.check_kind(KIND_KEYWORD) and self.peek().text == "final":
            self.advance()
        ref = self.try_typeref()
        if ref is None:
            raise _Recover()
        if self.check(".") :  # varargs '...'
            while self.match("."):
                pass
        if not self.check_kind(KIND_IDENTIFIER):
            raise _Recover()
        name = leaf("Name", self.advance())
        while self.check("[") and self.peek(1) is not None and self.peek(1).text == "]":
            self.advance()
            self.advance()
        return AstNode("Param", [ref, name])

    def finish_field(self, ref: AstNode, name: AstNode) -> AstNode | None:
        children: list[AstNode | None] = [ref, name]
        if self.match("="):
            children.append(self.parse_expr())
        while self.match(","):
            if not self.check_kind(KIND_IDENTIFIER):
                raise _Recover()
            children.append(leaf("Name", self.advance()))
            if self.match("="):
                children.append(self.parse_expr())
        self.expect(";")
        return node("FieldDecl", children)

    # -- statements ----------------------------------------------------

    def parse_block(self) -> AstNode | None:
        self.expect("{")
        stmts: list[AstNode | None] = []
        while not self.check("}"):
            if self.at_end():
                raise ParseError("unbalanced braces at end of input")
            stmts.append(self.parse_statement())
        self.advance()
        return node("Block", stmts)

    def parse_statement(self) -> AstNode | None:
        start = self.pos
        try:
            return self.parse_statement_inner()
        except _Recover:
            return self.recover_wrapped(start)

    def parse_statement_inner(self) -> AstNode | None:
        t = self.peek()
        if t is None:
            raise ParseError("unbalanced braces at end of input")
        text = t.text
        if text == "{":
            return self.parse_block()
        if text == ";":
            self.advance()
            return None
        if text == "if":
            return self.parse_if()
        if text == "while":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return node("While", [cond, self.parse_statement()])
        if text == "do":
            self.advance()
            body = self.parse_statement()
            self.expect("while")
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            self.match(";")
            return node("DoWhile", [body, cond])
        if text == "for":
            return self.parse_for()
        if text == "try":
            return self.parse_try()
        if text == "return":
            tok = self.advance()
            if self.match(";"):
                return leaf("Return", tok)
            expr = self.parse_expr()
            self.expect(";")
            return node("Return", [expr])
        if text == "throw":
            self.advance()
            expr = self.parse_expr()
            self.expect(";")
            return node("Throw", [expr])
        if text in ("break", "continue"):
            tok = self.advance()
            if self.check_kind(KIND_IDENTIFIER):
                self.advance()  # label
            self.expect(";")
            return leaf(text.capitalize(), tok)
        if text == "final" or self.looks_like_declaration():
            return self.parse_local_decl()
        expr = self.parse_expr()
        self.expect(";")
        return node("ExprStmt", [expr])

    def parse_if(self) -> AstNode | None:
        self.advance()
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_statement()
        otherwise = None
        if self.match("else"):
            otherwise = self.parse_statement()
        return node("If", [cond, then, otherwise])

    def parse_for(self) -> AstNode | None:
        self.advance()
        self.expect("(")
        # for-each: Type name : iterable
        save = self.pos
        ref = self.try_typeref()
        if ref is not None and self.check_kind(KIND_IDENTIFIER) and self.peek(1) is not None and self.peek(1).text == ":":
            name = leaf("Name", self.advance())
            self.advance()  # ':'
            iterable = self.parse_expr()
            self.expect(")")
            return node("ForEach", [AstNode("Param", [ref, name]), iterable, self.parse_statement()])
        self.pos = save
        init = None
        if not self.check(";"):
            if self.looks_like_declaration() or self.check("final"):
                init = self.parse_local_decl_no_semi()
            else:
                init = node("ExprStmt", [self.parse_expr()])
        self.expect(";")
        cond = None if self.check(";") else self.parse_expr()
        self.expect(";")
        update = None
        if not self.check(")"):
            update = node("ExprStmt", [self.parse_expr()])
            while self.match(","):
                extra = node("ExprStmt", [self.parse_expr()])
                update = node("ExprStmt", [update, extra])
        self.expect(")")
        return node("For", [init, cond, update, self.parse_statement()])

    def parse_try(self) -> AstNode | None:
        self.advance()
        if self.check("("):
            self.skip_balanced("(", ")")  # try-with-resources header
        children: list[AstNode | None] = [self.parse_block()]
        while self.check("catch"):
            self.advance()
            self.expect("(")
            ref = self.try_typeref()
            while self.match("|"):
                self.try_typeref()
            param = None
            if ref is not None and self.check_kind(KIND_IDENTIFIER):
                param = AstNode("Param", [ref, leaf("Name", self.advance())])
            self.expect(")")
            children.append(node("Catch", [param, self.parse_block()]))
        if self.match("finally"):
            children.append(node("Finally", [self.parse_block()]))
        return node("Try", children)

    def parse_local_decl(self) -> AstNode | None:
        decl = self.parse_local_decl_no_semi()
        self.expect(";")
        return decl

    def parse_local_decl_no_semi(self) -> AstNode | None:
        while self.match("final"):
            pass
        ref = self.try_typeref()
        if ref is None or not self.check_kind(KIND_IDENTIFIER):
            raise _Recover()
        children: list[AstNode | None] = [ref, leaf("Name", self.advance())]
        while self.check("[") and self.peek(1) is not None and self.peek(1).text == "]":
            self.advance()
            self.advance()
        if self.match("="):
            children.append(self.parse_expr())
        while self.match(","):
            if not self.check_kind(KIND_IDENTIFIER):
                raise _Recover()
            children.append(leaf("Name", self.advance()))
            if self.match("="):
                children.append(self.parse_expr())
        return node("LocalVarDecl", children)

    # -- expressions ---------------------------------------------------

    def parse_expr(self) -> AstNode:
        left = self.parse_ternary()
        t = self.peek()
        if t is not None and t.text in ASSIGN_OPS:
            op = self.advance().text
            right = self.parse_expr()
            return AstNode(f"Assign{op}", [left, right])
        return left

    def parse_ternary(self) -> AstNode:
        cond = self.parse_binary(0)
        if self.match("?"):
            then = self.parse_expr()
            self.expect(":")
            otherwise = self.parse_ternary()
            return AstNode("Ternary", [cond, then, otherwise])
        return cond

    def parse_binary(self, tier: int) -> AstNode:
        if tier >= len(BINARY_TIERS):
            return self.parse_unary()
        ops = BINARY_TIERS[tier]
        left = self.parse_binary(tier + 1)
        while True:
            t = self.peek()
            if t is None or t.text not in ops:
                return left
            if t.text == "instanceof":
                self.advance()
                ref = self.try_typeref()
                if ref is None:
                    raise _Recover()
                left = AstNode("InstanceOf", [left, ref])
                continue
            op = self.advance().text
            right = self.parse_binary(tier + 1)
            left = AstNode(f"Binary{op}", [left, right])

    def parse_unary(self) -> AstNode:
        t = self.peek()
        if t is not None and t.kind == KIND_OPERATOR and t.text in UNARY_OPS:
            op = self.advance().text
            return AstNode(f"Unary{op}", [self.parse_unary()])
        # primitive cast: '(' primitive ')' operand
        if (
            t is not None
            and t.text == "("
            and self.peek(1) is not None
            and self.peek(1).kind == KIND_KEYWORD
            and self.peek(1).text in PRIMITIVES
            and self.peek(2) is not None
            and self.peek(2).text == ")"
        ):
            self.advance()
            ref = leaf("Type", self.advance())
            self.advance()
            return AstNode("Cast", [ref, self.parse_unary()])
        return self.parse_postfix()

    def parse_postfix(self) -> AstNode:
        expr = self.parse_primary()
        while True:
            t = self.peek()
            if t is None:
                return expr
            if t.text == ".":
                nxt = self.peek(1)
                if nxt is None or nxt.kind not in (KIND_IDENTIFIER, KIND_KEYWORD):
                    return expr
                self.advance()
                name = leaf("Name", self.advance())
                expr = AstNode("FieldAccess", [expr, name])
                if self.check("("):
                    expr = self.finish_call(expr)
            elif t.text == "(":
                expr = self.finish_call(expr)
            elif t.text == "[":
                self.advance()
                index = self.parse_expr()
                self.expect("]")
                expr = AstNode("Index", [expr, index])
            elif t.text in ("++", "--"):
                op = self.advance().text
                expr = AstNode(f"Postfix{op}", [expr])
            else:
                return expr

    def finish_call(self, callee: AstNode) -> AstNode:
        self.expect("(")
        args: list[AstNode] = [callee]
        while not self.check(")"):
            if self.at_end():
                raise _Recover()
            args.append(self.parse_expr())
            if not self.match(","):
                break
        self.expect(")")
        return AstNode("Call", args)

    def parse_primary(self) -> AstNode:
        t = self.peek()
        if t is None:
            raise _Recover()
        if t.kind == KIND_LITERAL:
            return leaf("Literal", self.advance())
        if t.kind == KIND_IDENTIFIER:
            return leaf("Name", self.advance())
        if t.text == "this":
            return leaf("This", self.advance())
        if t.text == "super":
            return leaf("Super", self.advance())
        if t.text == "(":
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if t.text == "new":
            self.advance()
            ref = self.try_typeref()
            if ref is None:
                raise _Recover()
            children: list[AstNode] = [ref]
            if self.check("("):
                call = self.finish_call(ref)
                children = list(call.children)
            elif self.check("["):
                while self.check("["):
                    self.advance()
                    if not self.check("]"):
                        children.append(self.parse_expr())
                    self.expect("]")
            if self.check("{"):
                self.skip_balanced("{", "}")  # array/anon-class body
            return AstNode("New", children)
        raise _Recover()


def parse_java_lite(tokens: list[Token], diagnostics: list[str] | None = None) -> AstNode:
    """Parse a token list into a CompilationUnit tree.

    Pass a list as `diagnostics` to collect one message per brace-balanced
    recovery the parser had to perform.
    """
    return _Parser(tokens, diagnostics).parse_compilation_unit()
