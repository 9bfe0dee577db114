"""Textual `.tm` and `.fsm` formats."""

from .lexer import Token, tokenize
from .parser import ModelDocument, ParseFailed, parse, parse_file
from .printer import print_model

__all__ = ["ModelDocument", "ParseFailed", "Token", "parse", "parse_file", "print_model", "tokenize"]
