import os
import struct
import sys

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..'))
from src.bytecode.decode import HEADER_SIZE, MAGIC, DecodeError, Program, decode, link
from src.bytecode.disassemble import disassemble, disassemble_lines
from src.bytecode.image import EncodeError, add_header, encode, encode_bitmap
from src.compiler.convert import compile_grammar
from src.compiler.instructions import Instruction, Label, Op, Row, from_rows
from src.grammar.corpus import CORPUS_NAMES, load_corpus_grammar
from src.grammar.peg_parser import parse_grammar
from src.optimizer.lexical import lexical_pass
from src.optimizer.pipeline import OptimizationConfig, optimize
from src.test.grammar_fuzz import random_code_block


def test_single_character_image_is_bit_exact():
    image = encode(compile_grammar(parse_grammar("A = 'a'")))
    assert len(image) == 23
    assert image[:HEADER_SIZE] == struct.pack('<4sBHHHH', b'PVM1', 1, 5, 0, 0, 0)
    words = struct.unpack('<5H', image[HEADER_SIZE:])
    assert words == (14338, 40960, 6241, 12289, 16384)


def test_header_layout():
    assert HEADER_SIZE == 13
    assert add_header(3, 1, 2, 0) == MAGIC + bytes([1, 3, 0, 1, 0, 2, 0, 0, 0])


def test_bitmap_bit_order():
    bitmap = encode_bitmap(frozenset({0, 9, 255}))
    assert len(bitmap) == 32
    assert bitmap[0] == 0b00000001
    assert bitmap[1] == 0b00000010
    assert bitmap[31] == 0b10000000


def test_random_code_blocks_roundtrip():
    rng = np.random.default_rng(7)
    for _ in range(500):
        code = random_code_block(rng)
        program = link(code)
        image = encode(code)
        assert decode(image) == program
        assert len(image) == program.image_bytes


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_images_roundtrip(name):
    code = optimize(load_corpus_grammar(name)).code
    assert decode(encode(code)) == link(code)


def test_plain_code_of_large_grammars_exceeds_the_offset_range():
    code = optimize(load_corpus_grammar("csv"), OptimizationConfig.none()).code
    assert decode(encode(code)) == link(code)
    # expanded byte classes put the end of the outer choice thousands of instructions away
    code = optimize(load_corpus_grammar("utf8"), OptimizationConfig.none()).code
    with pytest.raises(EncodeError) as info:
        encode(code)
    assert info.value.code == "E_JUMP_RANGE"


def test_pools_are_deduplicated():
    entry, fail = Label("S"), Label("F")
    rows = [
        Row(Instruction(Op.CALL, "S")),
        Row(Instruction(Op.EXIT)),
        Row(Instruction(Op.STR, b"abc"), [entry]),
        Row(Instruction(Op.IFFAIL, fail)),
        Row(Instruction(Op.NSTR, b"abc")),
        Row(Instruction(Op.IFFAIL, fail)),
        Row(Instruction(Op.CMAP, frozenset({1, 2}))),
        Row(Instruction(Op.IFFAIL, fail)),
        Row(Instruction(Op.RCMAP, frozenset({2, 1}))),
        Row(Instruction(Op.RET), [fail]),
    ]
    program = link(from_rows(rows, {"S": entry}, "S"))
    assert program.strings == (b"abc",)
    assert program.bitmaps == (frozenset({1, 2}),)
    assert len(encode(program)) == HEADER_SIZE + 2 * 10 + 4 + 32


def test_jump_out_of_range():
    far = Program((Instruction(Op.JUMP, 1100),) + (Instruction(Op.NOP),) * 1100, (), ())
    with pytest.raises(EncodeError) as info:
        encode(far)
    assert info.value.code == "E_JUMP_RANGE"
    assert info.value.index == 0

    back = Program((Instruction(Op.NOP),) * 1024 + (Instruction(Op.JUMP, 0),), (), ())
    assert decode(encode(back)) == back


def test_pool_overflow():
    strings = tuple(i.to_bytes(2, "little") for i in range(2049))
    program = Program(tuple(Instruction(Op.STR, s) for s in strings), strings, ())
    with pytest.raises(EncodeError) as info:
        encode(program)
    assert info.value.code == "E_POOL_OVERFLOW"

    long_string = b"a" * 256
    with pytest.raises(EncodeError) as info:
        encode(Program((Instruction(Op.STR, long_string),), (long_string,), ()))
    assert info.value.code == "E_POOL_OVERFLOW"


def _image(*words, strings=0, bitmaps=0, tail=b""):
    return add_header(len(words), strings, bitmaps, 0) + struct.pack(f"<{len(words)}H", *words) + tail


@pytest.mark.parametrize("data, code", [
    (b"XXXX" + bytes(20), "E_MAGIC"),
    (MAGIC + b"\x01", "E_TRUNCATED"),
    (struct.pack('<4sBHHHH', MAGIC, 2, 0, 0, 0, 0), "E_VERSION"),
    (add_header(3, 0, 0, 0) + b"\x00\x00", "E_TRUNCATED"),
    (_image(31 << 11), "E_BAD_OPCODE"),
    (_image(Op.NOP << 11 | 5), "E_BAD_OPCODE"),
    (_image(Op.JUMP << 11 | 5), "E_BAD_TARGET"),
    (_image(Op.CALL << 11 | 0x7FF), "E_BAD_TARGET"),
    (_image(Op.STR << 11), "E_BAD_POOL_INDEX"),
    (_image(Op.CMAP << 11 | 1, bitmaps=1, tail=b"\x01" + bytes(31)), "E_BAD_POOL_INDEX"),
    (_image(Op.STR << 11, strings=1, tail=b"\x03ab"), "E_TRUNCATED"),
    (_image(Op.EXIT << 11, tail=b"\x00"), "E_TRUNCATED"),
])
def test_decode_errors(data, code):
    with pytest.raises(DecodeError) as info:
        decode(data)
    assert info.value.code == code


def test_bad_opcode_reports_index():
    with pytest.raises(DecodeError) as info:
        decode(_image(Op.EXIT << 11, Op.NOP << 11, 31 << 11))
    assert info.value.index == 2


def test_disassembly_listing():
    program = link(compile_grammar(parse_grammar("A = 'a'")))
    assert disassemble(program) == (
        "0000 call 0002\n"
        "0001 exit\n"
        "0002 char 'a'\n"
        "0003 iffail 0004\n"
        "0004 ret\n"
    )
    digits = link(lexical_pass(compile_grammar(parse_grammar("S = [0-9]"))))
    assert disassemble_lines(digits)[2] == "0002 cmap [0-9]"


def test_disassembly_of_decoded_image_has_one_line_per_instruction():
    code = optimize(load_corpus_grammar("json")).code
    program = decode(encode(code))
    assert len(disassemble(program).splitlines()) == len(program)


GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.mark.parametrize("name", ["csv", "json", "xml"])
def test_optimized_listing_matches_the_recorded_one(name):
    # Set PEGVM_RECORD_LISTINGS=1 to rewrite the listings after an intended code change.
    listing = disassemble(decode(encode(optimize(load_corpus_grammar(name)).code)))
    path = os.path.join(GOLDEN_DIR, f"{name}.dis")
    if os.environ.get("PEGVM_RECORD_LISTINGS") == "1" or not os.path.isfile(path):
        os.makedirs(GOLDEN_DIR, exist_ok=True)
        with open(path, "w") as f:
            f.write(listing)
        pytest.skip(f"recorded {path}")
    with open(path) as f:
        assert f.read() == listing
