"""QR byte-mode symbols: encoding, decoding, and PBM round-tripping.

Works on clean module grids (no camera pipeline). Versions 1..10 at all four
error-correction levels; payloads are raw bytes.
"""

from enum import Enum
from functools import lru_cache
from itertools import cycle

from .errors import CapacityError, FormatError, InvalidParam, SegmentError
from .reedsolomon import rs_decode_correct, rs_generate_parity

MIN_VERSION = 1
MAX_VERSION = 10
QUIET_ZONE = 4

G15 = 0b10100110111
G18 = 0b1111100100101
G15_MASK = 0b101010000010010


class EcLevel(Enum):
    """Error-correction level; the value is its 2-bit format-info code."""

    L = 1
    M = 0
    Q = 3
    H = 2


# (block count, total codewords, data codewords) groups per version and level.
RS_BLOCKS = {
    1: {EcLevel.L: ((1, 26, 19),), EcLevel.M: ((1, 26, 16),),
        EcLevel.Q: ((1, 26, 13),), EcLevel.H: ((1, 26, 9),)},
    2: {EcLevel.L: ((1, 44, 34),), EcLevel.M: ((1, 44, 28),),
        EcLevel.Q: ((1, 44, 22),), EcLevel.H: ((1, 44, 16),)},
    3: {EcLevel.L: ((1, 70, 55),), EcLevel.M: ((1, 70, 44),),
        EcLevel.Q: ((2, 35, 17),), EcLevel.H: ((2, 35, 13),)},
    4: {EcLevel.L: ((1, 100, 80),), EcLevel.M: ((2, 50, 32),),
        EcLevel.Q: ((2, 50, 24),), EcLevel.H: ((4, 25, 9),)},
    5: {EcLevel.L: ((1, 134, 108),), EcLevel.M: ((2, 67, 43),),
        EcLevel.Q: ((2, 33, 15), (2, 34, 16)), EcLevel.H: ((2, 33, 11), (2, 34, 12))},
    6: {EcLevel.L: ((2, 86, 68),), EcLevel.M: ((4, 43, 27),),
        EcLevel.Q: ((4, 43, 19),), EcLevel.H: ((4, 43, 15),)},
    7: {EcLevel.L: ((2, 98, 78),), EcLevel.M: ((4, 49, 31),),
        EcLevel.Q: ((2, 32, 14), (4, 33, 15)), EcLevel.H: ((4, 39, 13), (1, 40, 14))},
    8: {EcLevel.L: ((2, 121, 97),), EcLevel.M: ((2, 60, 38), (2, 61, 39)),
        EcLevel.Q: ((4, 40, 18), (2, 41, 19)), EcLevel.H: ((4, 40, 14), (2, 41, 15))},
    9: {EcLevel.L: ((2, 146, 116),), EcLevel.M: ((3, 58, 36), (2, 59, 37)),
        EcLevel.Q: ((4, 36, 16), (4, 37, 17)), EcLevel.H: ((4, 36, 12), (4, 37, 13))},
    10: {EcLevel.L: ((2, 86, 68), (2, 87, 69)), EcLevel.M: ((4, 69, 43), (1, 70, 44)),
         EcLevel.Q: ((6, 43, 19), (2, 44, 20)), EcLevel.H: ((6, 43, 15), (2, 44, 16))},
}

ALIGNMENT_CENTERS = {
    1: (), 2: (6, 18), 3: (6, 22), 4: (6, 26), 5: (6, 30), 6: (6, 34),
    7: (6, 22, 38), 8: (6, 24, 42), 9: (6, 26, 46), 10: (6, 28, 50),
}

MASKS = (
    lambda r, c: (r + c) % 2 == 0,
    lambda r, c: r % 2 == 0,
    lambda r, c: c % 3 == 0,
    lambda r, c: (r + c) % 3 == 0,
    lambda r, c: (r // 2 + c // 3) % 2 == 0,
    lambda r, c: (r * c) % 2 + (r * c) % 3 == 0,
    lambda r, c: ((r * c) % 2 + (r * c) % 3) % 2 == 0,
    lambda r, c: ((r + c) % 2 + (r * c) % 3) % 2 == 0,
)

_EC_BY_BITS = {level.value: level for level in EcLevel}


class QrMatrix:
    """Square grid of modules; cells[row][col] is True for dark."""

    __slots__ = ("version", "cells")

    def __init__(self, version, cells):
        if not isinstance(version, int) or not MIN_VERSION <= version <= MAX_VERSION:
            raise InvalidParam(f"version must be in {MIN_VERSION}..{MAX_VERSION}, got {version}")
        side = 17 + 4 * version
        rows = tuple(tuple(bool(v) for v in row) for row in cells)
        if len(rows) != side or any(len(row) != side for row in rows):
            raise InvalidParam(f"cells must be {side}x{side} for version {version}")
        self.version = version
        self.cells = rows

    @property
    def side(self):
        return 17 + 4 * self.version

    def __eq__(self, other):
        if not isinstance(other, QrMatrix):
            return NotImplemented
        return self.version == other.version and self.cells == other.cells

    def __repr__(self):
        return f"QrMatrix(version={self.version}, side={self.side})"


def _bch_format(data5: int) -> int:
    d = data5 << 10
    while d.bit_length() >= G15.bit_length():
        d ^= G15 << (d.bit_length() - G15.bit_length())
    return ((data5 << 10) | d) ^ G15_MASK


def _bch_version(version: int) -> int:
    d = version << 12
    while d.bit_length() >= G18.bit_length():
        d ^= G18 << (d.bit_length() - G18.bit_length())
    return (version << 12) | d


def _count_bits(version: int) -> int:
    # Byte-mode character count width: 8 bits through version 9, then 16.
    return 8 if version <= 9 else 16


def data_codeword_count(version: int, ec: EcLevel) -> int:
    return sum(count * dc for count, _, dc in RS_BLOCKS[version][ec])


def byte_capacity(version: int, ec: EcLevel) -> int:
    return (data_codeword_count(version, ec) * 8 - 4 - _count_bits(version)) // 8


def _format_positions(side):
    vert, horiz = [], []
    for i in range(15):
        if i < 6:
            vert.append((i, 8))
        elif i < 8:
            vert.append((i + 1, 8))
        else:
            vert.append((side - 15 + i, 8))
    for i in range(15):
        if i < 8:
            horiz.append((8, side - 1 - i))
        elif i < 9:
            horiz.append((8, 15 - i))
        else:
            horiz.append((8, 14 - i))
    return vert, horiz


def _version_positions(side):
    top_right, bottom_left = [], []
    for i in range(18):
        top_right.append((i // 3, i % 3 + side - 11))
        bottom_left.append((i % 3 + side - 11, i // 3))
    return top_right, bottom_left


@lru_cache(maxsize=None)
def _template(version):
    """Function-pattern grid, reserved map, and zigzag data positions."""
    side = 17 + 4 * version
    base = [[False] * side for _ in range(side)]
    reserved = [[False] * side for _ in range(side)]

    def mark(r, c, dark):
        base[r][c] = dark
        reserved[r][c] = True

    # Finder patterns with one-module separators.
    for r0, c0 in ((0, 0), (0, side - 7), (side - 7, 0)):
        for dr in range(-1, 8):
            for dc in range(-1, 8):
                r, c = r0 + dr, c0 + dc
                if not (0 <= r < side and 0 <= c < side):
                    continue
                inside = 0 <= dr <= 6 and 0 <= dc <= 6
                dark = inside and (
                    dr in (0, 6) or dc in (0, 6) or (2 <= dr <= 4 and 2 <= dc <= 4)
                )
                mark(r, c, dark)

    for i in range(8, side - 8):
        mark(6, i, i % 2 == 0)
        mark(i, 6, i % 2 == 0)

    centers = ALIGNMENT_CENTERS[version]
    for r0 in centers:
        for c0 in centers:
            if (c0 <= 8 and (r0 <= 8 or r0 >= side - 8)) or (c0 >= side - 8 and r0 <= 8):
                continue
            for dr in range(-2, 3):
                for dc in range(-2, 3):
                    ring = max(abs(dr), abs(dc))
                    mark(r0 + dr, c0 + dc, ring != 1)

    for pos in _format_positions(side):
        for r, c in pos:
            reserved[r][c] = True
    mark(side - 8, 8, True)

    if version >= 7:
        for pos in _version_positions(side):
            for r, c in pos:
                reserved[r][c] = True

    positions = []
    inc, row = -1, side - 1
    for col in list(range(side - 1, 6, -2)) + list(range(5, 0, -2)):
        while True:
            for c in (col, col - 1):
                if not reserved[row][c]:
                    positions.append((row, c))
            row += inc
            if row < 0 or row >= side:
                row -= inc
                inc = -inc
                break

    return (
        tuple(tuple(row) for row in base),
        tuple(tuple(row) for row in reserved),
        tuple(positions),
    )


class _BitWriter:
    def __init__(self):
        self.bits = []

    def put(self, value, width):
        for k in range(width - 1, -1, -1):
            self.bits.append((value >> k) & 1)

    def to_bytes(self):
        out = bytearray()
        for i in range(0, len(self.bits), 8):
            byte = 0
            for bit in self.bits[i:i + 8]:
                byte = (byte << 1) | bit
            out.append(byte)
        return bytes(out)


class _BitReader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def remaining(self):
        return len(self.data) * 8 - self.pos

    def take(self, width):
        value = 0
        for _ in range(width):
            byte = self.data[self.pos >> 3]
            value = (value << 1) | ((byte >> (7 - (self.pos & 7))) & 1)
            self.pos += 1
        return value


def _data_codewords(payload: bytes, version: int, ec: EcLevel) -> bytes:
    total = data_codeword_count(version, ec)
    writer = _BitWriter()
    writer.put(0b0100, 4)
    writer.put(len(payload), _count_bits(version))
    for byte in payload:
        writer.put(byte, 8)
    writer.put(0, min(4, total * 8 - len(writer.bits)))
    while len(writer.bits) % 8:
        writer.bits.append(0)
    out = bytearray(writer.to_bytes())
    for pad in cycle((0xEC, 0x11)):
        if len(out) >= total:
            break
        out.append(pad)
    return bytes(out)


def _block_sizes(version, ec):
    sizes = []
    for count, total, dc in RS_BLOCKS[version][ec]:
        sizes.extend([(dc, total - dc)] * count)
    return sizes


def _interleave(datacw: bytes, version: int, ec: EcLevel) -> bytes:
    sizes = _block_sizes(version, ec)
    blocks, parities = [], []
    offset = 0
    for dc, nsym in sizes:
        block = datacw[offset:offset + dc]
        offset += dc
        blocks.append(block)
        parities.append(rs_generate_parity(block, nsym))
    out = bytearray()
    for i in range(max(len(b) for b in blocks)):
        for block in blocks:
            if i < len(block):
                out.append(block[i])
    for i in range(max(len(p) for p in parities)):
        for parity in parities:
            if i < len(parity):
                out.append(parity[i])
    return bytes(out)


def _deinterleave(codewords: bytes, version: int, ec: EcLevel):
    sizes = _block_sizes(version, ec)
    blocks = [bytearray() for _ in sizes]
    parities = [bytearray() for _ in sizes]
    it = iter(codewords)
    for i in range(max(dc for dc, _ in sizes)):
        for bi, (dc, _) in enumerate(sizes):
            if i < dc:
                blocks[bi].append(next(it))
    for i in range(max(nsym for _, nsym in sizes)):
        for bi, (_, nsym) in enumerate(sizes):
            if i < nsym:
                parities[bi].append(next(it))
    return [(bytes(b), bytes(p)) for b, p in zip(blocks, parities)]


def _render(version: int, ec: EcLevel, interleaved: bytes, mask_id: int):
    base, _, positions = _template(version)
    side = 17 + 4 * version
    cells = [list(row) for row in base]

    fmt = _bch_format((ec.value << 3) | mask_id)
    vert, horiz = _format_positions(side)
    for i in range(15):
        bit = bool((fmt >> i) & 1)
        r, c = vert[i]
        cells[r][c] = bit
        r, c = horiz[i]
        cells[r][c] = bit

    if version >= 7:
        vbits = _bch_version(version)
        for copy in _version_positions(side):
            for i, (r, c) in enumerate(copy):
                cells[r][c] = bool((vbits >> i) & 1)

    mask_fn = MASKS[mask_id]
    total_bits = len(interleaved) * 8
    for idx, (r, c) in enumerate(positions):
        if idx < total_bits:
            bit = (interleaved[idx >> 3] >> (7 - (idx & 7))) & 1 == 1
        else:
            bit = False  # remainder modules carry no data
        cells[r][c] = bit ^ mask_fn(r, c)
    return cells


def penalty_score(cells) -> int:
    """Standard four-rule mask evaluation score."""
    side = len(cells)
    score = 0

    def lines():
        for row in cells:
            yield tuple(row)
        for c in range(side):
            yield tuple(cells[r][c] for r in range(side))

    for line in lines():
        run = 1
        for prev, cur in zip(line, line[1:]):
            if cur == prev:
                run += 1
            else:
                if run >= 5:
                    score += 3 + run - 5
                run = 1
        if run >= 5:
            score += 3 + run - 5

    for r in range(side - 1):
        row, nxt = cells[r], cells[r + 1]
        for c in range(side - 1):
            if row[c] == row[c + 1] == nxt[c] == nxt[c + 1]:
                score += 3

    finder_like = (True, False, True, True, True, False, True, False, False, False, False)
    reversed_like = tuple(reversed(finder_like))
    for line in lines():
        for i in range(side - 10):
            window = line[i:i + 11]
            if window == finder_like or window == reversed_like:
                score += 40

    dark = sum(sum(row) for row in cells)
    score += 10 * int(abs(dark * 100 / (side * side) - 50) // 5)
    return score


def qr_encode(payload, version: int, ec: EcLevel, mask=None) -> QrMatrix:
    if not isinstance(version, int) or not MIN_VERSION <= version <= MAX_VERSION:
        raise InvalidParam(f"version must be in {MIN_VERSION}..{MAX_VERSION}, got {version}")
    if not isinstance(ec, EcLevel):
        raise InvalidParam(f"ec must be an EcLevel, got {ec!r}")
    if mask is not None and mask not in range(8):
        raise InvalidParam(f"mask must be in 0..7, got {mask}")
    payload = bytes(payload)
    cap = byte_capacity(version, ec)
    if len(payload) > cap:
        raise CapacityError(
            f"{len(payload)} bytes exceed version {version}-{ec.name} capacity of {cap}"
        )
    interleaved = _interleave(_data_codewords(payload, version, ec), version, ec)
    if mask is not None:
        return QrMatrix(version, _render(version, ec, interleaved, mask))
    best_cells = best_score = None
    for mask_id in range(8):
        cells = _render(version, ec, interleaved, mask_id)
        score = penalty_score(cells)
        if best_score is None or score < best_score:
            best_cells, best_score = cells, score
    return QrMatrix(version, best_cells)


def _read_format(matrix: QrMatrix):
    vert, horiz = _format_positions(matrix.side)
    for copy in (horiz, vert):
        raw = 0
        for i, (r, c) in enumerate(copy):
            if matrix.cells[r][c]:
                raw |= 1 << i
        data5 = (raw ^ G15_MASK) >> 10
        if _bch_format(data5) == raw:
            return _EC_BY_BITS[data5 >> 3], data5 & 0b111
    raise FormatError("no readable format information in either copy")


def qr_decode(matrix: QrMatrix) -> bytes:
    if not isinstance(matrix, QrMatrix):
        raise InvalidParam(f"expected a QrMatrix, got {type(matrix).__name__}")
    ec, mask_id = _read_format(matrix)
    _, _, positions = _template(matrix.version)
    mask_fn = MASKS[mask_id]
    cells = matrix.cells

    total_cw = sum(count * total for count, total, _ in RS_BLOCKS[matrix.version][ec])
    codewords = bytearray(total_cw)
    for idx in range(total_cw * 8):
        r, c = positions[idx]
        if cells[r][c] ^ mask_fn(r, c):
            codewords[idx >> 3] |= 1 << (7 - (idx & 7))

    data = bytearray()
    for block, parity in _deinterleave(bytes(codewords), matrix.version, ec):
        data += rs_decode_correct(block + parity, len(parity))
    return _parse_segment(bytes(data), matrix.version)


def _parse_segment(data: bytes, version: int) -> bytes:
    reader = _BitReader(data)
    cbits = _count_bits(version)
    if reader.remaining() < 4 + cbits:
        raise SegmentError("data too short for a segment header")
    mode = reader.take(4)
    if mode != 0b0100:
        raise SegmentError(f"unsupported mode indicator {mode:04b}")
    count = reader.take(cbits)
    if count * 8 > reader.remaining():
        raise SegmentError(f"declared byte count {count} exceeds available data")
    return bytes(reader.take(8) for _ in range(count))


def write_pbm(matrix: QrMatrix) -> str:
    """PBM P1 text, one character per module, with a 4-module quiet zone."""
    width = matrix.side + 2 * QUIET_ZONE
    pad = "0" * QUIET_ZONE
    lines = ["P1", f"{width} {width}"]
    lines.extend("0" * width for _ in range(QUIET_ZONE))
    for row in matrix.cells:
        lines.append(pad + "".join("1" if cell else "0" for cell in row) + pad)
    lines.extend("0" * width for _ in range(QUIET_ZONE))
    return "\n".join(lines) + "\n"


def read_pbm(text: str) -> QrMatrix:
    """Parse a P1 image and crop it to the symbol's dark bounding box."""
    body = []
    for line in text.splitlines():
        comment = line.find("#")
        body.append(line[:comment] if comment >= 0 else line)
    tokens = "\n".join(body).split()
    if not tokens or tokens[0] != "P1":
        raise FormatError("not a P1 bitmap")
    try:
        width, height = int(tokens[1]), int(tokens[2])
    except (IndexError, ValueError):
        raise FormatError("missing or malformed P1 dimensions") from None
    digits = "".join(tokens[3:])
    if len(digits) != width * height or set(digits) - {"0", "1"}:
        raise FormatError(f"expected {width * height} binary digits, got {len(digits)}")
    grid = [
        [digits[r * width + c] == "1" for c in range(width)] for r in range(height)
    ]
    dark_rows = [r for r in range(height) if any(grid[r])]
    if not dark_rows:
        raise FormatError("image holds no dark modules")
    dark_cols = [c for c in range(width) if any(grid[r][c] for r in range(height))]
    r0, r1 = dark_rows[0], dark_rows[-1]
    c0, c1 = dark_cols[0], dark_cols[-1]
    side = r1 - r0 + 1
    if side != c1 - c0 + 1 or (side - 17) % 4 or not MIN_VERSION <= (side - 17) // 4 <= MAX_VERSION:
        raise FormatError(f"dark area {r1 - r0 + 1}x{c1 - c0 + 1} is not a supported symbol")
    cells = [row[c0:c1 + 1] for row in grid[r0:r1 + 1]]
    return QrMatrix((side - 17) // 4, cells)
