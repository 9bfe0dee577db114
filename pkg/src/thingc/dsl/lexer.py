"""Tokenizer shared by the `.tm` and `.fsm` grammars."""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset({
    "model", "machine", "storage", "flow", "trigger", "when", "after", "do", "emit",
    "input", "event", "over", "duration", "behavior", "repeat",
    "create", "process", "release", "transfer", "receive",
})
STAGE_KEYWORDS = ("create", "process", "release", "transfer", "receive")

# longest first
PUNCTUATION = {
    ":=": "assign", "->": "arrow", "<=": "le", ">=": "ge", "!=": "ne",
    "{": "lbrace", "}": "rbrace", "[": "lbracket", "]": "rbracket",
    "(": "lparen", ")": "rparen", ";": "semi", ",": "comma", ".": "dot",
    ":": "colon", "=": "eq", "<": "lt", ">": "gt", "+": "plus", "-": "minus",
    "*": "star", "/": "slash", "%": "percent",
}


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    span: SourceSpan
    message: str
    rule: str

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message} [{self.rule}]"


@dataclass(frozen=True)
class Token:
    kind: str  # "kw-<word>", "ident", "int", "string", "symbol", punctuation names, "eof"
    text: str
    span: SourceSpan

    @property
    def value(self) -> str:
        return self.text


class LexError(Exception):
    def __init__(self, diagnostic: Diagnostic) -> None:
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or ch.isdigit() and ch.isascii()


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    """Split ``source`` into tokens; raises :class:`LexError` on bad input.

    Comments (``//`` to end of line) and whitespace are skipped.  The
    returned list does not include an end-of-file token.
    """
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def span(length: int) -> SourceSpan:
        return SourceSpan(file, line, col, length)

    def fail(message: str, length: int = 1) -> LexError:
        return LexError(Diagnostic("error", span(length), message, "IllegalCharacter"))

    while i < n:
        ch = source[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if source.startswith("//", i):
            end = source.find("\n", i)
            end = n if end < 0 else end
            col += end - i
            i = end
            continue
        if _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_char(source[j]):
                j += 1
            word = source[i:j]
            kind = f"kw-{word}" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, span(j - i)))
            col += j - i
            i = j
            continue
        if ch.isdigit() and ch.isascii():
            j = i + 1
            while j < n and source[j].isdigit() and source[j].isascii():
                j += 1
            tokens.append(Token("int", source[i:j], span(j - i)))
            col += j - i
            i = j
            continue
        if ch == "#":
            j = i + 1
            if j >= n or not _is_ident_start(source[j]):
                raise fail("'#' must start a symbol such as #Odd")
            while j < n and _is_ident_char(source[j]):
                j += 1
            tokens.append(Token("symbol", source[i + 1:j], span(j - i)))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            chars = []
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise fail("unterminated string", j - i)
                if source[j] == "\\" and j + 1 < n:
                    escaped = source[j + 1]
                    mapped = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(escaped)
                    if mapped is None:
                        raise fail(f"unknown escape '\\{escaped}'", 2)
                    chars.append(mapped)
                    j += 2
                    continue
                chars.append(source[j])
                j += 1
            if j >= n:
                raise fail("unterminated string", j - i)
            tokens.append(Token("string", "".join(chars), span(j + 1 - i)))
            col += j + 1 - i
            i = j + 1
            continue
        for text, kind in PUNCTUATION.items():
            if source.startswith(text, i):
                tokens.append(Token(kind, text, span(len(text))))
                i += len(text)
                col += len(text)
                break
        else:
            raise fail(f"illegal character {ch!r}")
    return tokens
