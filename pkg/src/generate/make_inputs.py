import argparse
import logging
import os
import sys
from typing import Callable, Dict, List

import numpy as np

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.grammar.corpus import PROJECT_ROOT

logger = logging.getLogger(__name__)

INPUT_DIR = os.path.join(PROJECT_ROOT, "data", "inputs")

LETTERS = "abcdefghijklmnopqrstuvwxyz"
ALNUM = LETTERS + LETTERS.upper() + "0123456789"
MONTHS = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"]
PROCESSES = ["sshd", "cron", "kernel", "systemd", "postfix/smtpd", "dhclient"]
MESSAGES = [
    "Accepted publickey for admin from 10.0.0.{n} port 22",
    "session opened for user root by (uid=0)",
    "connect from unknown[192.168.1.{n}]",
    "DHCPACK of 10.0.{n}.7 from 10.0.0.1",
    "Started Daily apt download activities.",
    "pam_unix(cron:session): session closed for user {n}",
]
EXTENSIONS = {"csv": "csv", "log": "log", "xml": "xml", "json": "json", "email": "txt", "utf8": "txt"}


def _word(rng: np.random.Generator, alphabet: str = LETTERS, low: int = 1, high: int = 9) -> str:
    length = int(rng.integers(low, high))
    return "".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=length))


def generate_csv(rng: np.random.Generator, rows: int, columns: int = 4) -> bytes:
    """Rows of alphanumeric fields; empty fields occur too."""
    lines = []
    for _ in range(rows):
        fields = [_word(rng, ALNUM, 0, 10) for _ in range(columns)]
        lines.append(",".join(fields) + "\n")
    return "".join(lines).encode("ascii")


def generate_log(rng: np.random.Generator, lines: int) -> bytes:
    """Syslog lines `Mon dd hh:mm:ss host process[pid]: message`."""
    out = []
    for _ in range(lines):
        month = MONTHS[int(rng.integers(0, 12))]
        day = int(rng.integers(1, 32))
        clock = ":".join(f"{int(v):02d}" for v in (rng.integers(0, 24), rng.integers(0, 60), rng.integers(0, 60)))
        host = "host" + f"{int(rng.integers(0, 100)):02d}"
        process = PROCESSES[int(rng.integers(0, len(PROCESSES)))]
        pid = int(rng.integers(1, 65536))
        message = MESSAGES[int(rng.integers(0, len(MESSAGES)))].format(n=int(rng.integers(0, 255)))
        out.append(f"{month} {day:2d} {clock} {host} {process}[{pid}]: {message}\n")
    return "".join(out).encode("ascii")


def _xml_element(rng: np.random.Generator, depth: int, parts: List[str]):
    name = _word(rng, LETTERS, 1, 7)
    attributes = "".join(f' {_word(rng, LETTERS, 1, 5)}="{_word(rng, ALNUM, 0, 8)}"'
                         for _ in range(int(rng.integers(0, 3))))
    if depth <= 0 or rng.random() < 0.2:
        parts.append(f"<{name}{attributes}/>")
        return
    parts.append(f"<{name}{attributes}>")
    for _ in range(int(rng.integers(1, 4))):
        kind = rng.random()
        if kind < 0.5:
            _xml_element(rng, depth - 1, parts)
        elif kind < 0.8:
            parts.append(_word(rng, ALNUM + " ", 1, 20))
        elif kind < 0.9:
            parts.append(f"<!-- {_word(rng, LETTERS, 1, 12)} -->")
        else:
            parts.append(f"<![CDATA[{_word(rng, ALNUM + '<>&', 1, 12)}]]>")
    parts.append(f"</{name}>\n")


def generate_xml(rng: np.random.Generator, elements: int, depth: int = 3) -> bytes:
    """A document with a prolog and `elements` top-level children of the root."""
    parts = ['<?xml version="1.0" encoding="UTF-8"?>\n', "<root>\n"]
    for _ in range(elements):
        _xml_element(rng, depth, parts)
    parts.append("</root>\n")
    return "".join(parts).encode("ascii")


def _json_scalar(rng: np.random.Generator) -> str:
    kind = int(rng.integers(0, 6))
    if kind == 0:
        return '"' + _word(rng, ALNUM + " ", 0, 12) + '"'
    if kind == 1:
        return '"' + _word(rng, LETTERS, 1, 6) + '\\n\\u00e9"'
    if kind == 2:
        return str(int(rng.integers(-10000, 10000)))
    if kind == 3:
        return f"{rng.normal() * 100:.3f}e{int(rng.integers(-5, 5))}"
    return ["true", "false", "null"][kind - 4 + int(rng.integers(0, 2))]


def generate_json(rng: np.random.Generator, depth: int, width: int = 2, containers: str = "mixed") -> bytes:
    """
    Nested JSON value; every nesting level adds one object or array around
    `width` siblings.

    Args:
        rng: Random generator
        depth: Nesting levels above the scalar leaves
        width: Children per container
        containers: "object", "array" or "mixed" (alternating, objects outermost)
    """
    if containers not in ("object", "array", "mixed"):
        raise ValueError(f"Unknown container kind: {containers}")

    def value(level: int) -> str:
        if level >= depth:
            return _json_scalar(rng)
        children = [value(level + 1) for _ in range(width)]
        if containers == "object" or (containers == "mixed" and level % 2 == 0):
            members = [f'"{_word(rng)}": {child}' for child in children]
            return "{" + ", ".join(members) + "}"
        return "[" + ", ".join(children) + "]"

    return (value(0) + "\n").encode("ascii")


def generate_email_text(rng: np.random.Generator, words: int) -> bytes:
    """Plain text with e-mail addresses sprinkled in; ends with an address."""
    out = []
    for _ in range(words):
        if rng.random() < 0.1:
            out.append(_email(rng))
        else:
            out.append(_word(rng) + ("." if rng.random() < 0.1 else ""))
    out.append(_email(rng))
    return " ".join(out).encode("ascii")


def _email(rng: np.random.Generator) -> str:
    local = ".".join(_word(rng, ALNUM + "-", 1, 8) for _ in range(int(rng.integers(1, 3))))
    domain = ".".join(_word(rng, LETTERS, 2, 8) for _ in range(int(rng.integers(2, 4))))
    return f"{local}@{domain}"


def generate_utf8_text(rng: np.random.Generator, chars: int) -> bytes:
    """Code points from the one- to four-byte ranges, surrogates excluded."""
    ranges = [(0x20, 0x7F), (0xA0, 0x800), (0x800, 0xD800), (0xE000, 0x10000), (0x10000, 0x110000)]
    weights = np.array([0.6, 0.15, 0.1, 0.05, 0.1])
    picks = rng.choice(len(ranges), size=chars, p=weights)
    text = "".join(chr(int(rng.integers(*ranges[i]))) for i in picks)
    return text.encode("utf-8")


GENERATORS: Dict[str, Callable[[np.random.Generator, int], bytes]] = {
    "csv": generate_csv,
    "log": generate_log,
    "xml": generate_xml,
    "json": generate_json,
    "email": generate_email_text,
    "utf8": generate_utf8_text,
}


def generate(kind: str, size: int, seed: int = 0) -> bytes:
    """
    Generate an input for a corpus grammar.

    Args:
        kind: One of GENERATORS
        size: Rows, lines, elements, nesting depth, words or characters
        seed: Seed of the numpy generator

    Raises:
        ValueError: For an unknown kind or a negative size
    """
    if kind not in GENERATORS:
        raise ValueError(f"Unknown input kind: {kind} (expected one of {', '.join(GENERATORS)})")
    if size < 0:
        raise ValueError("size must not be negative")
    return GENERATORS[kind](np.random.default_rng(seed), size)


def main():
    parser = argparse.ArgumentParser(description="Generate synthetic inputs for the corpus grammars")
    parser.add_argument("kind", choices=sorted(GENERATORS), help="Input kind")
    parser.add_argument("--size", type=int, default=100,
                        help="Rows, lines, elements, JSON depth, words or characters")
    parser.add_argument("--seed", type=int, default=0, help="Random seed")
    parser.add_argument("-o", "--output", help="Output file (default: data/inputs/<kind>_<size>.<ext>)")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="[%(levelname)s] %(name)s: %(message)s")
    output = args.output or os.path.join(INPUT_DIR, f"{args.kind}_{args.size}.{EXTENSIONS[args.kind]}")
    data = generate(args.kind, args.size, args.seed)
    directory = os.path.dirname(output)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(output, 'wb') as f:
        f.write(data)
    print(f"[✔] Wrote {len(data)} byte(s) of {args.kind} input to: {output}")


if __name__ == "__main__":
    main()
