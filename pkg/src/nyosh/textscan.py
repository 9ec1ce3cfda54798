"""Low-level quote-aware text scanning shared by the parser, the micro-parser
and the command assembler.

Quoting rules are deliberately small: ``'...'`` and ``"..."`` spans protect
their content, and a backslash outside quotes escapes the single following
character.  That is the minimum needed to import real-world BASH command
lines.
"""

from __future__ import annotations

import re
from typing import Optional

# Longest match first: "||" before "|", "&&" before "&".
OPERATOR_TOKENS = ("||", "&&", "|", ";", "&")

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ScanError(Exception):
    """A malformed span encountered while scanning raw text."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.message = message
        self.offset = offset


def split_on_operators(text: str):
    """Split command-line text on unquoted binary operators.

    Returns a list of ``("segment", text, offset)`` and ``("op", token,
    offset)`` tuples in order.  Whitespace-only segments between operators are
    dropped (they surface later as placement diagnostics, not scan errors).
    """
    parts = []
    seg_start = 0
    i = 0
    n = len(text)
    quote: Optional[str] = None
    while i < n:
        ch = text[i]
        if quote is not None:
            if ch == quote:
                quote = None
            i += 1
            continue
        if ch == "\\":
            i += 2
            continue
        if ch in ("'", '"'):
            quote = ch
            i += 1
            continue
        for tok in OPERATOR_TOKENS:
            if text.startswith(tok, i):
                seg = text[seg_start:i]
                if seg.strip():
                    parts.append(("segment", seg, seg_start))
                parts.append(("op", tok, i))
                i += len(tok)
                seg_start = i
                break
        else:
            i += 1
    if quote is not None:
        raise ScanError(f"unterminated {quote} quote", n)
    seg = text[seg_start:]
    if seg.strip():
        parts.append(("segment", seg, seg_start))
    return parts


def find_unquoted(text: str, needle: str) -> int:
    """Offset of the first unquoted, unescaped occurrence of ``needle``, or -1."""
    i = 0
    n = len(text)
    quote: Optional[str] = None
    while i < n:
        ch = text[i]
        if quote is not None:
            if ch == quote:
                quote = None
            i += 1
            continue
        if ch == "\\":
            i += 2
            continue
        if ch in ("'", '"'):
            quote = ch
            i += 1
            continue
        if text.startswith(needle, i):
            return i
        i += 1
    return -1


class Word:
    """A whitespace-delimited word with quoting stripped.

    ``glob_eligible`` is true when the word contains a wildcard metacharacter
    that appeared outside quotes and unescaped.
    """

    __slots__ = ("text", "glob_eligible")

    def __init__(self, text: str, glob_eligible: bool):
        self.text = text
        self.glob_eligible = glob_eligible

    def __repr__(self):
        return f"Word({self.text!r}, glob={self.glob_eligible})"


def split_words(text: str):
    """Split evaluated command text into words, honoring quotes.

    Quotes are removed; a backslash outside quotes escapes the next character
    (the character is kept, its special meaning dropped).
    """
    words = []
    cur = []
    cur_glob = False
    has_cur = False
    i = 0
    n = len(text)
    quote: Optional[str] = None

    def flush():
        nonlocal cur, cur_glob, has_cur
        if has_cur:
            words.append(Word("".join(cur), cur_glob))
        cur = []
        cur_glob = False
        has_cur = False

    while i < n:
        ch = text[i]
        if quote is not None:
            if ch == quote:
                quote = None
            else:
                cur.append(ch)
            i += 1
            continue
        if ch == "\\" and i + 1 < n:
            cur.append(text[i + 1])
            has_cur = True
            i += 2
            continue
        if ch in ("'", '"'):
            quote = ch
            has_cur = True
            i += 1
            continue
        if ch.isspace():
            flush()
            i += 1
            continue
        if ch in "*?[":
            cur_glob = True
        cur.append(ch)
        has_cur = True
        i += 1
    if quote is not None:
        raise ScanError(f"unterminated {quote} quote", n)
    flush()
    return words


def scan_interpolation(raw: str):
    """Scan raw text for ``${name}`` references.

    Returns a list of ``("lit", text)`` / ``("ref", name)`` pairs preserving
    every byte of the input: rendering literals verbatim and references as
    ``${name}`` reproduces ``raw`` exactly.  A backslash protects the next
    character from opening a reference (both characters are kept).  Raises
    :class:`ScanError` for an unterminated or malformed ``${`` reference.
    """
    parts = []
    lit = []
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch == "\\" and i + 1 < n:
            lit.append(raw[i : i + 2])
            i += 2
            continue
        if ch == "$" and i + 1 < n and raw[i + 1] == "{":
            m = IDENT_RE.match(raw, i + 2)
            if not m or m.end() >= n or raw[m.end()] != "}":
                raise ScanError("malformed ${...} reference", i)
            if lit:
                parts.append(("lit", "".join(lit)))
                lit = []
            parts.append(("ref", m.group(0)))
            i = m.end() + 1
            continue
        lit.append(ch)
        i += 1
    if lit:
        parts.append(("lit", "".join(lit)))
    return parts


def unescape_gstring_text(text: str) -> str:
    """Unescape a literal span taken from the concrete GString notation:
    ``\\$`` -> ``$`` and ``\\\\`` -> ``\\``; any other backslash is verbatim."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\" and i + 1 < n and text[i + 1] in ("$", "\\"):
            out.append(text[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)
