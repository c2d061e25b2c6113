"""Grammars bundled under data/grammars."""

import os
from typing import Dict

from src.grammar.expression import Grammar
from src.grammar.peg_parser import parse_grammar
from src.utils.read_directories import read_filenames_in_directory, read_text_file

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..'))
CORPUS_DIR = os.path.join(PROJECT_ROOT, 'data', 'grammars')
CORPUS_NAMES = ('csv', 'log', 'json', 'xml', 'email', 'utf8')


def corpus_files(directory: str = CORPUS_DIR) -> Dict[str, str]:
    """Map grammar name (file stem) to its .peg path."""
    files = read_filenames_in_directory(directory, '.peg')
    return {os.path.splitext(os.path.basename(f))[0]: f for f in files}


def load_grammar_file(path: str) -> Grammar:
    return parse_grammar(read_text_file(path))


def load_corpus_grammar(name: str, directory: str = CORPUS_DIR) -> Grammar:
    files = corpus_files(directory)
    if name not in files:
        raise ValueError(f"Unknown corpus grammar '{name}'. Available: {', '.join(sorted(files))}")
    return load_grammar_file(files[name])
