"""Error-recovering recursive-descent Java parser.

Produces a concrete syntax tree: every consumed token is a leaf (keyword,
operator and punctuation leaves use the token text as their kind label;
identifier/literal leaves use "identifier"/"literal" and carry the text).
Unparseable regions become flagged `error` nodes instead of failing, since
plagiarised student code frequently does not compile. Parsing only fails
outright on empty input or an unsupported language tag.
"""

from __future__ import annotations

from ..corpus import CodeFragment
from ..errors import ParseFailure
from ..lexer import (
    KEYWORD_TABLES,
    KIND_IDENTIFIER,
    KIND_LITERAL,
    Token,
    lex,
)
from .tree import Node, SyntaxTree

MODIFIERS = frozenset(
    "public protected private static final abstract native synchronized "
    "transient volatile strictfp default".split()
)
PRIMITIVES = frozenset("boolean byte short int long char float double void".split())
ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>= >>>=".split())
BINARY_LEVELS = (
    ("||",), ("&&",), ("|",), ("^",), ("&",),
    ("==", "!="), ("<", ">", "<=", ">=", "instanceof"),
    ("<<", ">>", ">>>"), ("+", "-"), ("*", "/", "%"),
)
_ANGLE_OK = frozenset({",", ".", "?", "extends", "super", "[", "]", "&", "@"})
_STMT_STOPPERS = frozenset({")", "]", "}", ";", ",", "case", "default"})


def parse(fragment: CodeFragment, use_preprocessed: bool = False) -> SyntaxTree:
    if fragment.language not in KEYWORD_TABLES:
        raise ParseFailure(fragment.id, f"no grammar for language {fragment.language!r}")
    if use_preprocessed:
        if fragment.preprocessed_text is None:
            raise ParseFailure(fragment.id, "preprocessed text not available")
        text = fragment.preprocessed_text
    else:
        text = fragment.raw_text
    tokens = lex(text, fragment.language)
    if not tokens:
        raise ParseFailure(fragment.id, "no lexable tokens")
    parser = _Parser(tokens)
    try:
        root = parser.compilation_unit()
    except RecursionError:
        raise ParseFailure(fragment.id, "nesting too deep") from None
    return SyntaxTree(root=root, fragment_id=fragment.id, has_errors=parser.error_count > 0)


class _Backtrack(Exception):
    """Internal: speculative parse failed, rewind."""


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        self.n = len(tokens)
        self.error_count = 0

    # -- token plumbing -------------------------------------------------

    def peek(self, k: int = 0) -> Token | None:
        i = self.pos + k
        return self.toks[i] if i < self.n else None

    def la(self, k: int = 0) -> str:
        t = self.peek(k)
        return t.text if t else ""

    def la_kind(self, k: int = 0) -> str:
        t = self.peek(k)
        return t.kind if t else ""

    def eof(self) -> bool:
        return self.pos >= self.n

    def advance(self) -> Node:
        tok = self.toks[self.pos]
        self.pos += 1
        return _leaf(tok)

    def accept(self, text: str, into: Node) -> bool:
        if self.la() == text:
            into.children.append(self.advance())
            return True
        return False

    def expect(self, text: str, into: Node) -> None:
        """Consume `text` or record an error node without consuming."""
        if not self.accept(text, into):
            self.error_count += 1
            into.children.append(Node("error", text=self.la() or None))

    def error_consume(self, into: Node) -> None:
        """Swallow one token into an error node; guarantees progress."""
        self.error_count += 1
        err = Node("error")
        if not self.eof():
            err.children.append(self.advance())
        into.children.append(err)

    # -- top level -------------------------------------------------------

    def compilation_unit(self) -> Node:
        node = Node("compilation_unit")
        while not self.eof():
            before = self.pos
            t = self.la()
            if t == "package":
                node.children.append(self.package_or_import("package_declaration"))
            elif t == "import":
                node.children.append(self.package_or_import("import_declaration"))
            elif t == ";":
                empty = Node("empty_statement")
                empty.children.append(self.advance())
                node.children.append(empty)
            elif self.at_type_declaration():
                node.children.append(self.type_declaration())
            else:
                node.children.append(self.statement())
            if self.pos == before:
                self.error_consume(node)
        return node

    def package_or_import(self, kind: str) -> Node:
        node = Node(kind)
        node.children.append(self.advance())  # 'package' / 'import'
        while not self.eof() and self.la() != ";":
            if self.la() in {"}", "{", "class", "import", "package"}:
                break
            node.children.append(self.advance())
        self.expect(";", node)
        return node

    def at_type_declaration(self) -> bool:
        i = self.pos
        while i < self.n:
            t = self.toks[i].text
            if t in MODIFIERS:
                i += 1
            elif t == "@" and i + 1 < self.n and self.toks[i + 1].text == "interface":
                return True
            elif t == "@":
                i += 2  # '@' plus annotation name
                while i + 1 < self.n and self.toks[i].text == "." and self.toks[i + 1].kind == KIND_IDENTIFIER:
                    i += 2
                if i < self.n and self.toks[i].text == "(":
                    i = self.skip_balanced_from(i)
            else:
                return t in {"class", "interface", "enum"}
        return False

    def skip_balanced_from(self, i: int) -> int:
        """Index just past the bracket group opening at `i` ((), [], {})."""
        opener = self.toks[i].text
        closer = {"(": ")", "[": "]", "{": "}"}[opener]
        depth = 0
        while i < self.n:
            t = self.toks[i].text
            if t == opener:
                depth += 1
            elif t == closer:
                depth -= 1
                if depth == 0:
                    return i + 1
            i += 1
        return i

    # -- declarations ----------------------------------------------------

    def modifiers(self) -> Node | None:
        node = Node("modifiers")
        while not self.eof():
            t = self.la()
            if t in MODIFIERS:
                node.children.append(self.advance())
            elif t == "@" and self.la(1) != "interface":
                node.children.append(self.annotation())
            else:
                break
        return node if node.children else None

    def annotation(self) -> Node:
        node = Node("annotation")
        node.children.append(self.advance())  # '@'
        if self.la_kind() == KIND_IDENTIFIER:
            node.children.append(self.advance())
            while self.la() == "." and self.la_kind(1) == KIND_IDENTIFIER:
                node.children.append(self.advance())
                node.children.append(self.advance())
        if self.la() == "(":
            self.consume_balanced(node)
        return node

    def consume_balanced(self, into: Node) -> None:
        """Flat-consume a bracketed token group into `into`."""
        end = self.skip_balanced_from(self.pos)
        while self.pos < end:
            into.children.append(self.advance())

    def type_declaration(self, mods: Node | None = None) -> Node:
        mods = mods or self.modifiers()
        t = self.la()
        if t == "class":
            node = Node("class_declaration")
        elif t == "interface":
            node = Node("interface_declaration")
        elif t == "enum":
            node = Node("enum_declaration")
        elif t == "@":
            node = Node("annotation_type_declaration")
        else:
            node = Node("error_statement")
            if mods:
                node.children.append(mods)
            self.error_consume(node)
            return node
        if mods:
            node.children.append(mods)
        node.children.append(self.advance())  # keyword (or '@')
        if node.kind == "annotation_type_declaration":
            self.expect("interface", node)
        if self.la_kind() == KIND_IDENTIFIER:
            node.children.append(self.advance())
        if self.la() == "<":
            self.type_arguments_opt(node, "type_parameters")
        while self.la() in {"extends", "implements"}:
            clause = Node("superclass" if self.la() == "extends" else "super_interfaces")
            clause.children.append(self.advance())
            while not self.eof() and self.la() not in {"{", "extends", "implements"}:
                clause.children.append(self.advance())
            node.children.append(clause)
        if node.kind == "enum_declaration":
            node.children.append(self.enum_body())
        else:
            node.children.append(self.class_body())
        return node

    def class_body(self) -> Node:
        node = Node("class_body")
        self.expect("{", node)
        while not self.eof() and self.la() != "}":
            before = self.pos
            node.children.append(self.member())
            if self.pos == before:
                self.error_consume(node)
        self.expect("}", node)
        return node

    def enum_body(self) -> Node:
        node = Node("enum_body")
        self.expect("{", node)
        while not self.eof() and self.la() not in {";", "}"}:
            before = self.pos
            const = Node("enum_constant")
            while self.la() == "@" and self.la(1) != "interface":
                const.children.append(self.annotation())
            if self.la_kind() == KIND_IDENTIFIER:
                const.children.append(self.advance())
            if self.la() == "(":
                args = Node("argument_list")
                args.children.append(self.advance())
                self.argument_list_rest(args)
                const.children.append(args)
            if self.la() == "{":
                const.children.append(self.class_body())
            node.children.append(const)
            if not self.accept(",", node) and self.la() not in {";", "}"}:
                if self.pos == before:
                    self.error_consume(node)
        if self.la() == ";":
            node.children.append(self.advance())
            while not self.eof() and self.la() != "}":
                before = self.pos
                node.children.append(self.member())
                if self.pos == before:
                    self.error_consume(node)
        self.expect("}", node)
        return node

    def member(self) -> Node:
        if self.la() == ";":
            node = Node("empty_statement")
            node.children.append(self.advance())
            return node
        mods = self.modifiers()
        t = self.la()
        if t in {"class", "interface", "enum"} or (t == "@" and self.la(1) == "interface"):
            return self.type_declaration(mods)
        if t == "{":
            node = Node("initializer_block")
            if mods:
                node.children.append(mods)
            node.children.append(self.block())
            return node
        type_params = None
        if t == "<":
            type_params = Node("type_parameters")
            self.type_arguments_opt(type_params, None)
        # constructor: Name ( ... )
        if self.la_kind() == KIND_IDENTIFIER and self.la(1) == "(":
            node = Node("constructor_declaration")
            if mods:
                node.children.append(mods)
            if type_params:
                node.children.append(type_params)
            node.children.append(self.advance())  # name
            node.children.append(self.formal_parameters())
            self.throws_opt(node)
            if self.la() == "{":
                node.children.append(self.block())
            else:
                self.expect(";", node)
            return node
        try:
            mark = self.pos
            ty = self.parse_type_quiet()
        except _Backtrack:
            self.pos = mark
            node = Node("error_statement")
            if mods:
                node.children.append(mods)
            self.error_consume(node)
            return node
        if self.la_kind() == KIND_IDENTIFIER and self.la(1) == "(":
            node = Node("method_declaration")
            if mods:
                node.children.append(mods)
            if type_params:
                node.children.append(type_params)
            node.children.append(ty)
            node.children.append(self.advance())  # name
            node.children.append(self.formal_parameters())
            while self.la() == "[":  # archaic int foo()[] form
                node.children.append(self.advance())
                self.expect("]", node)
            self.throws_opt(node)
            if self.la() == "{":
                node.children.append(self.block())
            elif self.la() == "default":  # annotation member default
                node.children.append(self.advance())
                node.children.append(self.expression())
                self.expect(";", node)
            else:
                self.expect(";", node)
            return node
        if self.la_kind() == KIND_IDENTIFIER:
            node = Node("field_declaration")
            if mods:
                node.children.append(mods)
            node.children.append(ty)
            self.variable_declarators(node)
            self.expect(";", node)
            return node
        node = Node("error_statement")
        if mods:
            node.children.append(mods)
        node.children.append(ty)
        self.error_consume(node)
        return node

    def throws_opt(self, into: Node) -> None:
        if self.la() == "throws":
            clause = Node("throws")
            clause.children.append(self.advance())
            while not self.eof() and self.la() not in {"{", ";"}:
                clause.children.append(self.advance())
            into.children.append(clause)

    def formal_parameters(self) -> Node:
        node = Node("formal_parameters")
        self.expect("(", node)
        while not self.eof() and self.la() != ")":
            before = self.pos
            node.children.append(self.formal_parameter())
            if not self.accept(",", node) and self.la() != ")":
                if self.pos == before:
                    self.error_consume(node)
        self.expect(")", node)
        return node

    def formal_parameter(self) -> Node:
        node = Node("formal_parameter")
        mods = self.modifiers()
        if mods:
            node.children.append(mods)
        try:
            mark = self.pos
            node.children.append(self.parse_type_quiet())
        except _Backtrack:
            self.pos = mark
        if self.la() == "...":
            node.children.append(self.advance())
        if self.la_kind() == KIND_IDENTIFIER:
            node.children.append(self.advance())
        while self.la() == "[":
            node.children.append(self.advance())
            self.expect("]", node)
        if not node.children:
            self.error_consume(node)
        return node

    def variable_declarators(self, into: Node) -> None:
        while True:
            decl = Node("variable_declarator")
            if self.la_kind() == KIND_IDENTIFIER:
                decl.children.append(self.advance())
            else:
                self.error_consume(decl)
            while self.la() == "[":
                decl.children.append(self.advance())
                self.expect("]", decl)
            if self.la() == "=":
                decl.children.append(self.advance())
                decl.children.append(self.variable_initializer())
            into.children.append(decl)
            if not self.accept(",", into):
                break

    def variable_initializer(self) -> Node:
        if self.la() == "{":
            return self.array_initializer()
        return self.expression()

    def array_initializer(self) -> Node:
        node = Node("array_initializer")
        node.children.append(self.advance())  # '{'
        while not self.eof() and self.la() != "}":
            before = self.pos
            node.children.append(self.variable_initializer())
            if not self.accept(",", node) and self.la() != "}":
                if self.pos == before:
                    self.error_consume(node)
        self.expect("}", node)
        return node

    # -- types -----------------------------------------------------------

    def parse_type_quiet(self) -> Node:
        """Parse a type or raise _Backtrack (position NOT restored)."""
        node = Node("type")
        t = self.peek()
        if t is None:
            raise _Backtrack
        if t.text in PRIMITIVES:
            node.children.append(self.advance())
        elif t.kind == KIND_IDENTIFIER:
            node.children.append(self.advance())
            while self.la() == "." and self.la_kind(1) == KIND_IDENTIFIER:
                node.children.append(self.advance())
                node.children.append(self.advance())
        else:
            raise _Backtrack
        if self.la() == "<":
            self.type_arguments_opt(node, "type_arguments")
        while self.la() == "[" and self.la(1) == "]":
            node.children.append(self.advance())
            node.children.append(self.advance())
        return node

    def type_arguments_opt(self, into: Node, wrap_kind: str | None) -> None:
        """Consume a balanced <...> group if it looks like type arguments;
        silently no-op (restoring position) otherwise."""
        mark = self.pos
        collected: list[Node] = []
        depth = 0
        while not self.eof():
            t = self.la()
            kind = self.la_kind()
            if t == "<":
                depth += 1
            elif t in {">", ">>", ">>>"}:
                depth -= len(t)
                if depth < 0:
                    break
            elif kind != KIND_IDENTIFIER and t not in _ANGLE_OK and t not in PRIMITIVES:
                break
            collected.append(self.advance())
            if depth == 0:
                if wrap_kind:
                    wrapper = Node(wrap_kind)
                    wrapper.children = collected
                    into.children.append(wrapper)
                else:
                    into.children.extend(collected)
                return
        self.pos = mark  # not type arguments after all

    # -- statements --------------------------------------------------------

    def block(self) -> Node:
        node = Node("block")
        self.expect("{", node)
        while not self.eof() and self.la() != "}":
            before = self.pos
            node.children.append(self.statement())
            if self.pos == before:
                self.error_consume(node)
        self.expect("}", node)
        return node

    def statement(self) -> Node:
        t = self.la()
        if t == "{":
            return self.block()
        if t == ";":
            node = Node("empty_statement")
            node.children.append(self.advance())
            return node
        if t == "if":
            return self.if_statement()
        if t == "while":
            return self.while_statement()
        if t == "do":
            return self.do_statement()
        if t == "for":
            return self.for_statement()
        if t == "switch":
            return self.switch_block("switch_statement")
        if t == "try":
            return self.try_statement()
        if t in {"return", "throw"}:
            node = Node("return_statement" if t == "return" else "throw_statement")
            node.children.append(self.advance())
            if self.la() != ";" and not self.eof() and self.la() not in {"}", ")"}:
                node.children.append(self.expression())
            self.expect(";", node)
            return node
        if t in {"break", "continue"}:
            node = Node("break_statement" if t == "break" else "continue_statement")
            node.children.append(self.advance())
            if self.la_kind() == KIND_IDENTIFIER:
                node.children.append(self.advance())
            self.expect(";", node)
            return node
        if t == "assert":
            node = Node("assert_statement")
            node.children.append(self.advance())
            node.children.append(self.expression())
            if self.accept(":", node):
                node.children.append(self.expression())
            self.expect(";", node)
            return node
        if t == "synchronized" and self.la(1) == "(":
            node = Node("synchronized_statement")
            node.children.append(self.advance())
            self.paren_expression(node)
            node.children.append(self.block())
            return node
        if self.at_type_declaration():
            return self.type_declaration()
        if self.la_kind() == KIND_IDENTIFIER and self.la(1) == ":":
            node = Node("labeled_statement")
            node.children.append(self.advance())
            node.children.append(self.advance())
            node.children.append(self.statement())
            return node
        decl = self.try_local_variable_declaration()
        if decl is not None:
            return decl
        node = Node("expression_statement")
        node.children.append(self.expression())
        self.expect(";", node)
        return node

    def paren_expression(self, into: Node) -> None:
        self.expect("(", into)
        into.children.append(self.expression())
        self.expect(")", into)

    def if_statement(self) -> Node:
        node = Node("if_statement")
        node.children.append(self.advance())  # 'if'
        self.paren_expression(node)
        node.children.append(self.statement())
        if self.la() == "else":
            node.children.append(self.advance())
            node.children.append(self.statement())
        return node

    def while_statement(self) -> Node:
        node = Node("while_statement")
        node.children.append(self.advance())
        self.paren_expression(node)
        node.children.append(self.statement())
        return node

    def do_statement(self) -> Node:
        node = Node("do_statement")
        node.children.append(self.advance())
        node.children.append(self.statement())
        self.expect("while", node)
        self.paren_expression(node)
        self.expect(";", node)
        return node

    def for_statement(self) -> Node:
        mark = self.pos
        enhanced = self.try_enhanced_for()
        if enhanced is not None:
            return enhanced
        self.pos = mark
        node = Node("for_statement")
        node.children.append(self.advance())  # 'for'
        self.expect("(", node)
        if self.la() != ";":
            init = self.try_local_variable_declaration(consume_semicolon=False)
            if init is None:
                init = Node("expression_list")
                init.children.append(self.expression())
                while self.accept(",", init):
                    init.children.append(self.expression())
            node.children.append(init)
        self.expect(";", node)
        if self.la() != ";":
            node.children.append(self.expression())
        self.expect(";", node)
        if self.la() != ")":
            update = Node("expression_list")
            update.children.append(self.expression())
            while self.accept(",", update):
                update.children.append(self.expression())
            node.children.append(update)
        self.expect(")", node)
        node.children.append(self.statement())
        return node

    def try_enhanced_for(self) -> Node | None:
        """for ( [mods] Type name : iterable ) stmt  — or None (caller rewinds)."""
        node = Node("enhanced_for_statement")
        node.children.append(self.advance())  # 'for'
        if not self.accept("(", node):
            return None
        mods = self.modifiers()
        if mods:
            node.children.append(mods)
        try:
            ty = self.parse_type_quiet()
        except _Backtrack:
            return None
        if self.la_kind() != KIND_IDENTIFIER or self.la(1) != ":":
            return None
        node.children.append(ty)
        node.children.append(self.advance())  # name
        node.children.append(self.advance())  # ':'
        node.children.append(self.expression())
        self.expect(")", node)
        node.children.append(self.statement())
        return node

    def switch_block(self, kind: str) -> Node:
        node = Node(kind)
        node.children.append(self.advance())  # 'switch'
        self.paren_expression(node)
        self.expect("{", node)
        while not self.eof() and self.la() != "}":
            before = self.pos
            if self.la() in {"case", "default"}:
                node.children.append(self.switch_case())
            else:
                node.children.append(self.statement())
            if self.pos == before:
                self.error_consume(node)
        self.expect("}", node)
        return node

    def switch_case(self) -> Node:
        node = Node("switch_case")
        if self.la() == "case":
            node.children.append(self.advance())
            node.children.append(self.expression())
            while self.accept(",", node):
                node.children.append(self.expression())
        else:
            node.children.append(self.advance())  # 'default'
        if self.la() == "->":
            node.children.append(self.advance())
            if self.la() == "{":
                node.children.append(self.block())
            else:
                node.children.append(self.expression())
                self.expect(";", node)
            return node
        self.expect(":", node)
        while not self.eof() and self.la() not in {"case", "default", "}"}:
            before = self.pos
            node.children.append(self.statement())
            if self.pos == before:
                self.error_consume(node)
        return node

    def try_statement(self) -> Node:
        node = Node("try_statement")
        node.children.append(self.advance())  # 'try'
        if self.la() == "(":
            node.children.append(self.resource_specification())
        node.children.append(self.block())
        while self.la() == "catch":
            node.children.append(self.catch_clause())
        if self.la() == "finally":
            fin = Node("finally_clause")
            fin.children.append(self.advance())
            fin.children.append(self.block())
            node.children.append(fin)
        return node

    def resource_specification(self) -> Node:
        node = Node("resource_specification")
        node.children.append(self.advance())  # '('
        while not self.eof() and self.la() != ")":
            before = self.pos
            res = self.try_local_variable_declaration(consume_semicolon=False, kind="resource")
            if res is None:
                res = Node("resource")
                res.children.append(self.expression())
            node.children.append(res)
            if not self.accept(";", node) and self.la() != ")":
                if self.pos == before:
                    self.error_consume(node)
        self.expect(")", node)
        return node

    def catch_clause(self) -> Node:
        node = Node("catch_clause")
        node.children.append(self.advance())  # 'catch'
        self.expect("(", node)
        param = Node("catch_formal_parameter")
        mods = self.modifiers()
        if mods:
            param.children.append(mods)
        try:
            mark = self.pos
            param.children.append(self.parse_type_quiet())
            while self.la() == "|":  # multi-catch
                param.children.append(self.advance())
                param.children.append(self.parse_type_quiet())
        except _Backtrack:
            self.pos = mark
        if self.la_kind() == KIND_IDENTIFIER:
            param.children.append(self.advance())
        node.children.append(param)
        self.expect(")", node)
        node.children.append(self.block())
        return node

    def try_local_variable_declaration(self, consume_semicolon: bool = True,
                                       kind: str = "local_variable_declaration") -> Node | None:
        """Speculatively parse `[mods] Type name (= init)? (, ...)* ;`.
        Returns None (position restored) when this is not a declaration."""
        mark = self.pos
        node = Node(kind)
        mods = self.modifiers()
        if mods:
            node.children.append(mods)
        try:
            ty = self.parse_type_quiet()
        except _Backtrack:
            self.pos = mark
            return None
        if self.la_kind() != KIND_IDENTIFIER or self.la(1) not in {"=", ";", ",", "["}:
            self.pos = mark
            return None
        node.children.append(ty)
        self.variable_declarators(node)
        if consume_semicolon:
            self.expect(";", node)
        return node

    # -- expressions -------------------------------------------------------

    def expression(self) -> Node:
        lhs = self.ternary()
        if self.la() in ASSIGN_OPS:
            node = Node("assignment_expression")
            node.children.append(lhs)
            node.children.append(self.advance())
            node.children.append(self.expression())  # right-assoc
            return node
        return lhs

    def ternary(self) -> Node:
        cond = self.binary(0)
        if self.la() == "?":
            node = Node("conditional_expression")
            node.children.append(cond)
            node.children.append(self.advance())
            node.children.append(self.expression())
            self.expect(":", node)
            node.children.append(self.ternary())
            return node
        return cond

    def binary(self, level: int) -> Node:
        if level >= len(BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        ops = BINARY_LEVELS[level]
        while self.la() in ops:
            if self.la() == "instanceof":
                node = Node("instanceof_expression")
                node.children.append(left)
                node.children.append(self.advance())
                try:
                    mark = self.pos
                    node.children.append(self.parse_type_quiet())
                except _Backtrack:
                    self.pos = mark
                    self.error_consume(node)
                if self.la_kind() == KIND_IDENTIFIER:  # pattern binding
                    node.children.append(self.advance())
                left = node
                continue
            node = Node("binary_expression")
            node.children.append(left)
            node.children.append(self.advance())
            node.children.append(self.binary(level + 1))
            left = node
        return left

    def unary(self) -> Node:
        t = self.la()
        if t in {"+", "-", "!", "~"}:
            node = Node("unary_expression")
            node.children.append(self.advance())
            node.children.append(self.unary())
            return node
        if t in {"++", "--"}:
            node = Node("update_expression")
            node.children.append(self.advance())
            node.children.append(self.unary())
            return node
        if t == "(":
            cast = self.try_cast()
            if cast is not None:
                return cast
        return self.postfix()

    def try_cast(self) -> Node | None:
        mark = self.pos
        node = Node("cast_expression")
        node.children.append(self.advance())  # '('
        try:
            ty = self.parse_type_quiet()
        except _Backtrack:
            self.pos = mark
            return None
        if self.la() != ")":
            self.pos = mark
            return None
        primitive = bool(ty.children) and ty.children[0].text in PRIMITIVES
        nxt = self.peek(1)
        if nxt is None:
            self.pos = mark
            return None
        starts_ref_cast = (
            nxt.kind in {KIND_IDENTIFIER, KIND_LITERAL}
            or nxt.text in {"(", "this", "super", "new", "!", "~"}
        )
        starts_prim_cast = starts_ref_cast or nxt.text in {"+", "-", "++", "--"}
        if not (starts_prim_cast if primitive else starts_ref_cast):
            self.pos = mark
            return None
        node.children.append(ty)
        node.children.append(self.advance())  # ')'
        node.children.append(self.unary())
        return node

    def postfix(self) -> Node:
        node = self.primary()
        while True:
            t = self.la()
            if t == "." and self.la_kind(1) == KIND_IDENTIFIER and self.la(2) == "(":
                call = Node("method_invocation")
                call.children.append(node)
                call.children.append(self.advance())  # '.'
                call.children.append(self.advance())  # name
                call.children.append(self.argument_list())
                node = call
            elif t == "." and (self.la_kind(1) == KIND_IDENTIFIER or self.la(1) in {"this", "super", "class", "new"}):
                if self.la(1) == "new":  # qualified inner-class creation
                    acc = Node("object_creation_expression")
                    acc.children.append(node)
                    acc.children.append(self.advance())  # '.'
                    inner = self.creation()
                    acc.children.extend(inner.children)
                    node = acc
                    continue
                acc = Node("field_access")
                acc.children.append(node)
                acc.children.append(self.advance())
                acc.children.append(self.advance())
                node = acc
            elif t == "(" and node.kind in {"identifier", "field_access", "parenthesized_expression", "this", "super"}:
                call = Node("method_invocation")
                call.children.append(node)
                call.children.append(self.argument_list())
                node = call
            elif t == "[":
                acc = Node("array_access")
                acc.children.append(node)
                acc.children.append(self.advance())
                acc.children.append(self.expression())
                self.expect("]", acc)
                node = acc
            elif t in {"++", "--"}:
                upd = Node("update_expression")
                upd.children.append(node)
                upd.children.append(self.advance())
                node = upd
            elif t == "::":
                ref = Node("method_reference")
                ref.children.append(node)
                ref.children.append(self.advance())
                if self.la_kind() == KIND_IDENTIFIER or self.la() == "new":
                    ref.children.append(self.advance())
                node = ref
            else:
                return node

    def argument_list(self) -> Node:
        node = Node("argument_list")
        self.expect("(", node)
        self.argument_list_rest(node)
        return node

    def argument_list_rest(self, node: Node) -> None:
        while not self.eof() and self.la() != ")":
            before = self.pos
            node.children.append(self.expression())
            if not self.accept(",", node) and self.la() != ")":
                if self.pos == before:
                    self.error_consume(node)
        self.expect(")", node)

    def primary(self) -> Node:
        t = self.peek()
        if t is None or t.text in _STMT_STOPPERS:
            self.error_count += 1
            return Node("error")  # empty: caller guarantees progress elsewhere
        if t.kind == KIND_LITERAL:
            return self.advance()
        if t.kind == KIND_IDENTIFIER:
            if self.la(1) == "->":
                return self.lambda_expression_single()
            return self.advance()
        if t.text in {"this", "super"}:
            return self.advance()
        if t.text == "(":
            if self.lambda_ahead():
                return self.lambda_expression_parenthesized()
            node = Node("parenthesized_expression")
            node.children.append(self.advance())
            node.children.append(self.expression())
            self.expect(")", node)
            return node
        if t.text == "new":
            return self.creation()
        if t.text == "{":
            return self.array_initializer()
        if t.text == "switch":
            return self.switch_block("switch_expression")
        err = Node("error")
        err.children.append(self.advance())
        self.error_count += 1
        return err

    def lambda_ahead(self) -> bool:
        end = self.skip_balanced_from(self.pos)
        return end < self.n and self.toks[end].text == "->"

    def lambda_expression_single(self) -> Node:
        node = Node("lambda_expression")
        param = Node("formal_parameter")
        param.children.append(self.advance())  # name
        node.children.append(param)
        node.children.append(self.advance())  # '->'
        node.children.append(self.block() if self.la() == "{" else self.expression())
        return node

    def lambda_expression_parenthesized(self) -> Node:
        node = Node("lambda_expression")
        params = Node("formal_parameters")
        params.children.append(self.advance())  # '('
        while not self.eof() and self.la() != ")":
            before = self.pos
            params.children.append(self.formal_parameter())
            if not self.accept(",", params) and self.la() != ")":
                if self.pos == before:
                    self.error_consume(params)
        self.expect(")", params)
        node.children.append(params)
        self.expect("->", node)
        node.children.append(self.block() if self.la() == "{" else self.expression())
        return node

    def creation(self) -> Node:
        kw = self.advance()  # 'new'
        try:
            mark = self.pos
            ty = self.parse_type_quiet()
        except _Backtrack:
            self.pos = mark
            node = Node("object_creation_expression")
            node.children.append(kw)
            self.error_consume(node)
            return node
        # parse_type_quiet consumed any `[ ]` pairs; `[ expr ]` dims remain.
        if self.la() == "[" or (ty.children and ty.children[-1].kind == "]"):
            node = Node("array_creation_expression")
            node.children.append(kw)
            node.children.append(ty)
            while self.la() == "[":
                node.children.append(self.advance())
                if self.la() != "]":
                    node.children.append(self.expression())
                self.expect("]", node)
            if self.la() == "{":
                node.children.append(self.array_initializer())
            return node
        node = Node("object_creation_expression")
        node.children.append(kw)
        node.children.append(ty)
        if self.la() == "(":
            node.children.append(self.argument_list())
        if self.la() == "{":  # anonymous class
            node.children.append(self.class_body())
        return node


def _leaf(tok: Token) -> Node:
    if tok.kind in {KIND_IDENTIFIER, KIND_LITERAL}:
        return Node(tok.kind, text=tok.text)
    if tok.kind == "other":
        return Node("other", text=tok.text)
    return Node(tok.text, text=tok.text)
