"""Language-aware lexer producing the token streams all n-gram metrics consume.

Only Java ships a keyword table today, but the lexer itself is language
agnostic: anything not matching a known keyword/operator/literal shape falls
back to identifier or single-char `other` tokens, so arbitrary text always
lexes to *something* deterministic.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

KIND_KEYWORD = "keyword"
KIND_IDENTIFIER = "identifier"
KIND_LITERAL = "literal"
KIND_OPERATOR = "operator"
KIND_PUNCTUATION = "punctuation"
KIND_OTHER = "other"

# The 50 reserved words of the Java language spec. Contextual keywords
# (var, record, yield, sealed, ...) intentionally lex as identifiers;
# true/false/null are literals.
JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while""".split()
)

JAVA_WORD_LITERALS = frozenset({"true", "false", "null"})

# Longest-match operator table; '...' and '@' are punctuation-ish but consumed here.
_OPERATORS = [
    ">>>=",
    "...", ">>>", "<<=", ">>=",
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "<<", ">>", "->", "::",
    "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "&", "|", "^", "?", ":",
]
_PUNCTUATION = {"(", ")", "{", "}", "[", "]", ";", ",", ".", "@"}
_OP_BY_LENGTH = sorted(_OPERATORS, key=len, reverse=True)
_OP_STARTS = {op[0] for op in _OPERATORS}

KEYWORD_TABLES = {"java": JAVA_KEYWORDS}
WORD_LITERAL_TABLES = {"java": JAVA_WORD_LITERALS}


class Token(NamedTuple):
    text: str
    kind: str


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def lex(text: str, language: str = "java", include_comments: bool = False) -> list[Token]:
    """Lex `text` into tokens. Comments are skipped unless `include_comments`,
    in which case the comment body (delimiters dropped) is lexed into ordinary
    tokens, matching the comment-inclusive word tokenizers n-gram metrics
    traditionally use. Unknown characters become single-char kind=`other`
    tokens; the lexer never fails.
    """
    keywords = KEYWORD_TABLES.get(language, frozenset())
    word_literals = WORD_LITERAL_TABLES.get(language, frozenset())
    out: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        # comments
        if ch == "/" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == "/":
                j = text.find("\n", i)
                j = n if j < 0 else j
                if include_comments:
                    out.extend(lex(text[i + 2:j], language, include_comments=False))
                i = j
                continue
            if nxt == "*":
                j = text.find("*/", i + 2)
                body_end = n if j < 0 else j
                if include_comments:
                    out.extend(lex(text[i + 2:body_end], language, include_comments=False))
                i = n if j < 0 else j + 2
                continue
        # string literal (incl. text blocks)
        if ch == '"':
            if text.startswith('"""', i):
                j = text.find('"""', i + 3)
                j = n if j < 0 else j + 3
            else:
                j = _scan_quoted(text, i, '"')
            out.append(Token(text[i:j], KIND_LITERAL))
            i = j
            continue
        # char literal
        if ch == "'":
            j = _scan_quoted(text, i, "'")
            out.append(Token(text[i:j], KIND_LITERAL))
            i = j
            continue
        # number (digit start, or '.' followed by digit)
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = _scan_number(text, i)
            out.append(Token(text[i:j], KIND_LITERAL))
            i = j
            continue
        # identifier / keyword / word literal
        if _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_part(text[j]):
                j += 1
            word = text[i:j]
            if word in keywords:
                kind = KIND_KEYWORD
            elif word in word_literals:
                kind = KIND_LITERAL
            else:
                kind = KIND_IDENTIFIER
            out.append(Token(word, kind))
            i = j
            continue
        if ch in _PUNCTUATION and not text.startswith("...", i):
            out.append(Token(ch, KIND_PUNCTUATION))
            i += 1
            continue
        if ch in _OP_STARTS or ch == ".":
            for op in _OP_BY_LENGTH:
                if text.startswith(op, i):
                    kind = KIND_PUNCTUATION if op == "..." else KIND_OPERATOR
                    out.append(Token(op, kind))
                    i += len(op)
                    break
            else:
                out.append(Token(ch, KIND_OTHER))
                i += 1
            continue
        out.append(Token(ch, KIND_OTHER))
        i += 1
    return out


def _scan_quoted(text: str, start: int, quote: str) -> int:
    """Scan a quoted literal from `start` (at the opening quote). An
    unterminated literal (newline or EOF before the closing quote) degrades to
    a single-character token, which keeps preprocessing idempotent."""
    i, n = start + 1, len(text)
    while i < n:
        ch = text[i]
        if ch == "\\" and i + 1 < n:
            i += 2
            continue
        if ch == quote:
            return i + 1
        if ch == "\n":
            return start + 1
        i += 1
    return start + 1


def _scan_number(text: str, start: int) -> int:
    i, n = start, len(text)
    if text.startswith(("0x", "0X", "0b", "0B"), i):
        i += 2
        while i < n and (text[i].isalnum() or text[i] == "_"):
            i += 1
        return i
    seen_dot = text[i] == "."
    i += 1
    while i < n:
        ch = text[i]
        if ch.isdigit() or ch == "_":
            i += 1
        elif ch == "." and not seen_dot and i + 1 < n and text[i + 1].isdigit():
            seen_dot = True
            i += 1
        elif ch in "eE" and i + 1 < n and (text[i + 1].isdigit() or text[i + 1] in "+-"):
            i += 2 if text[i + 1] in "+-" else 1
        elif ch in "fFdDlL":
            return i + 1
        else:
            break
    return i


def comment_and_literal_spans(text: str) -> Iterator[tuple[int, int, str]]:
    """Yield (start, end, kind) spans for comments and string/char literals,
    in order. kind is 'comment' or 'literal'. Used by the preprocessor to
    delete comments while leaving literal contents untouched."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            j = n if j < 0 else j
            yield (i, j, "comment")
            i = j
        elif ch == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            j = n if j < 0 else j + 2
            yield (i, j, "comment")
            i = j
        elif ch == '"':
            if text.startswith('"""', i):
                j = text.find('"""', i + 3)
                j = n if j < 0 else j + 3
            else:
                j = _scan_quoted(text, i, '"')
            yield (i, j, "literal")
            i = j
        elif ch == "'":
            j = _scan_quoted(text, i, "'")
            yield (i, j, "literal")
            i = j
        else:
            i += 1
