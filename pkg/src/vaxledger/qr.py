"""Self-contained QR symbol codec, byte mode, error-correction level M.

Encoder covers versions 1-40 with standard Reed-Solomon block structure,
mask selection by penalty score, format/version info BCH codes, and PNG
rendering. The decoder targets clean, machine-generated symbols (exact
module grid, no perspective or noise): it samples the grid, validates the
format info, un-masks, de-interleaves and accepts only codewords whose
Reed-Solomon syndromes are all zero. No error *correction* is attempted;
a damaged symbol is reported as undecodable rather than repaired.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .errors import PayloadTooLarge, QRDecodeError

# --- version tables (error-correction level M) ---

# data codewords per block: (ecc codewords per block, [(n_blocks, data_cw), ...])
_BLOCKS_M: dict[int, tuple[int, list[tuple[int, int]]]] = {
    1: (10, [(1, 16)]),
    2: (16, [(1, 28)]),
    3: (26, [(1, 44)]),
    4: (18, [(2, 32)]),
    5: (24, [(2, 43)]),
    6: (16, [(4, 27)]),
    7: (18, [(4, 31)]),
    8: (22, [(2, 38), (2, 39)]),
    9: (22, [(3, 36), (2, 37)]),
    10: (26, [(4, 43), (1, 44)]),
    11: (30, [(1, 50), (4, 51)]),
    12: (22, [(6, 36), (2, 37)]),
    13: (22, [(8, 37), (1, 38)]),
    14: (24, [(4, 40), (5, 41)]),
    15: (24, [(5, 41), (5, 42)]),
    16: (28, [(7, 45), (3, 46)]),
    17: (28, [(10, 46), (1, 47)]),
    18: (26, [(9, 43), (4, 44)]),
    19: (26, [(3, 44), (11, 45)]),
    20: (26, [(3, 41), (13, 42)]),
    21: (26, [(17, 42)]),
    22: (28, [(17, 46)]),
    23: (28, [(4, 47), (14, 48)]),
    24: (28, [(6, 45), (14, 46)]),
    25: (28, [(8, 47), (13, 48)]),
    26: (28, [(19, 46), (4, 47)]),
    27: (28, [(22, 45), (3, 46)]),
    28: (28, [(3, 45), (23, 46)]),
    29: (28, [(21, 45), (7, 46)]),
    30: (28, [(19, 47), (10, 48)]),
    31: (28, [(2, 46), (29, 47)]),
    32: (28, [(10, 46), (23, 47)]),
    33: (28, [(14, 46), (21, 47)]),
    34: (28, [(14, 46), (23, 47)]),
    35: (28, [(12, 47), (26, 48)]),
    36: (28, [(6, 47), (34, 48)]),
    37: (28, [(29, 46), (14, 47)]),
    38: (28, [(13, 46), (32, 47)]),
    39: (28, [(40, 47), (7, 48)]),
    40: (28, [(18, 47), (31, 48)]),
}

_ALIGNMENT: dict[int, list[int]] = {
    1: [],
    2: [6, 18], 3: [6, 22], 4: [6, 26], 5: [6, 30], 6: [6, 34],
    7: [6, 22, 38], 8: [6, 24, 42], 9: [6, 26, 46], 10: [6, 28, 50],
    11: [6, 30, 54], 12: [6, 32, 58], 13: [6, 34, 62], 14: [6, 26, 46, 66],
    15: [6, 26, 48, 70], 16: [6, 26, 50, 74], 17: [6, 30, 54, 78],
    18: [6, 30, 56, 82], 19: [6, 30, 58, 86], 20: [6, 34, 62, 90],
    21: [6, 28, 50, 72, 94], 22: [6, 26, 50, 74, 98],
    23: [6, 30, 54, 78, 102], 24: [6, 28, 54, 80, 106],
    25: [6, 32, 58, 84, 110], 26: [6, 30, 58, 86, 114],
    27: [6, 34, 62, 90, 118], 28: [6, 26, 50, 74, 98, 122],
    29: [6, 30, 54, 78, 102, 126], 30: [6, 26, 52, 78, 104, 130],
    31: [6, 30, 56, 82, 108, 134], 32: [6, 34, 60, 86, 112, 138],
    33: [6, 30, 58, 86, 114, 142], 34: [6, 34, 62, 90, 118, 146],
    35: [6, 30, 54, 78, 102, 126, 150], 36: [6, 24, 50, 76, 102, 128, 154],
    37: [6, 28, 54, 80, 106, 132, 158], 38: [6, 32, 58, 84, 110, 136, 162],
    39: [6, 26, 54, 82, 110, 138, 166], 40: [6, 30, 58, 86, 114, 142, 170],
}


def _remainder_bits(version: int) -> int:
    if 2 <= version <= 6:
        return 7
    if 14 <= version <= 20 or 28 <= version <= 34:
        return 3
    if 21 <= version <= 27:
        return 4
    return 0


def _size(version: int) -> int:
    return 17 + 4 * version


def _data_codewords(version: int) -> int:
    _, groups = _BLOCKS_M[version]
    return sum(n * d for n, d in groups)


def data_capacity(version: int) -> int:
    """Max byte-mode payload length for a version at level M."""
    count_bits = 8 if version <= 9 else 16
    return (_data_codewords(version) * 8 - 4 - count_bits) // 8


MAX_PAYLOAD_BYTES = data_capacity(40)  # 2331


# --- GF(256) / Reed-Solomon ---

_EXP = [0] * 512
_LOG = [0] * 256
_x = 1
for _i in range(255):
    _EXP[_i] = _x
    _LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= 0x11D
for _i in range(255, 512):
    _EXP[_i] = _EXP[_i - 255]


def _gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def _rs_generator(degree: int) -> list[int]:
    gen = [1]
    for i in range(degree):
        nxt = [0] * (len(gen) + 1)
        for j, coef in enumerate(gen):
            nxt[j] ^= _gf_mul(coef, 1)
            nxt[j + 1] ^= _gf_mul(coef, _EXP[i])
        gen = nxt
    return gen


_GEN_CACHE: dict[int, list[int]] = {}


def _rs_ecc(data: list[int], degree: int) -> list[int]:
    gen = _GEN_CACHE.setdefault(degree, _rs_generator(degree))
    rem = list(data) + [0] * degree
    for i in range(len(data)):
        factor = rem[i]
        if factor:
            for j in range(1, len(gen)):
                rem[i + j] ^= _gf_mul(gen[j], factor)
    return rem[len(data):]


def _rs_syndromes_zero(codeword: list[int], degree: int) -> bool:
    for i in range(degree):
        alpha = _EXP[i]
        acc = 0
        for byte in codeword:
            acc = _gf_mul(acc, alpha) ^ byte
        if acc:
            return False
    return True


# --- format / version info ---

_FORMAT_MASK = 0x5412
_FORMAT_POLY = 0x537
_VERSION_POLY = 0x1F25
_EC_M = 0b00  # level indicator inside format info


def _bch(value: int, poly: int, value_bits: int, total_bits: int) -> int:
    ecc_bits = total_bits - value_bits
    code = value << ecc_bits
    rem = code
    for shift in range(total_bits - 1, ecc_bits - 1, -1):
        if rem >> shift & 1:
            rem ^= poly << (shift - ecc_bits)
    return code | rem


def _format_bits(mask_id: int) -> int:
    return _bch((_EC_M << 3) | mask_id, _FORMAT_POLY, 5, 15) ^ _FORMAT_MASK


_VALID_FORMATS = {
    _bch(d, _FORMAT_POLY, 5, 15) ^ _FORMAT_MASK: d for d in range(32)
}


def _version_bits(version: int) -> int:
    return _bch(version, _VERSION_POLY, 6, 18)


def _format_positions(size: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Module coordinates of the two format-info copies, bit 0 (LSB) first."""
    vertical = []
    for i in range(15):
        if i < 6:
            vertical.append((i, 8))
        elif i < 8:
            vertical.append((i + 1, 8))
        else:
            vertical.append((size - 15 + i, 8))
    horizontal = []
    for i in range(15):
        if i < 8:
            horizontal.append((8, size - 1 - i))
        elif i < 9:
            horizontal.append((8, 15 - i - 1 + 1))
        else:
            horizontal.append((8, 15 - i - 1))
    return vertical, horizontal


# --- matrix construction ---


def _build_function_modules(version: int) -> tuple[list[list[int]], list[list[bool]]]:
    """Finders, separators, timing, alignment, dark module, reserved areas."""
    size = _size(version)
    grid = [[0] * size for _ in range(size)]
    is_function = [[False] * size for _ in range(size)]

    def put(r: int, c: int, v: int) -> None:
        grid[r][c] = v
        is_function[r][c] = True

    def finder(r0: int, c0: int) -> None:
        for dr in range(-1, 8):
            for dc in range(-1, 8):
                r, c = r0 + dr, c0 + dc
                if not (0 <= r < size and 0 <= c < size):
                    continue
                inside = 0 <= dr <= 6 and 0 <= dc <= 6
                if inside:
                    ring = dr in (0, 6) or dc in (0, 6)
                    core = 2 <= dr <= 4 and 2 <= dc <= 4
                    put(r, c, 1 if (ring or core) else 0)
                else:
                    put(r, c, 0)  # separator

    finder(0, 0)
    finder(0, size - 7)
    finder(size - 7, 0)

    for i in range(8, size - 8):
        v = 1 if i % 2 == 0 else 0
        put(6, i, v)
        put(i, 6, v)

    centers = _ALIGNMENT[version]
    for r in centers:
        for c in centers:
            # skip the three overlapping the finders
            if (r <= 8 and c <= 8) or (r <= 8 and c >= size - 9) or (r >= size - 9 and c <= 8):
                continue
            for dr in range(-2, 3):
                for dc in range(-2, 3):
                    ring = max(abs(dr), abs(dc))
                    put(r + dr, c + dc, 1 if ring != 1 else 0)

    put(size - 8, 8, 1)  # dark module

    for pos_list in _format_positions(size):
        for r, c in pos_list:
            is_function[r][c] = True  # value filled in after mask choice

    if version >= 7:
        for i in range(18):
            is_function[i // 3][i % 3 + size - 11] = True
            is_function[i % 3 + size - 11][i // 3] = True

    return grid, is_function


def _data_positions(size: int, is_function: list[list[bool]]) -> list[tuple[int, int]]:
    """Zigzag order of the data modules (two-column sweeps, skipping col 6)."""
    positions = []
    col = size - 1
    upward = True
    while col > 0:
        if col == 6:
            col -= 1
        rows = range(size - 1, -1, -1) if upward else range(size)
        for row in rows:
            for c in (col, col - 1):
                if not is_function[row][c]:
                    positions.append((row, c))
        upward = not upward
        col -= 2
    return positions


_MASKS = (
    lambda i, j: (i + j) % 2 == 0,
    lambda i, j: i % 2 == 0,
    lambda i, j: j % 3 == 0,
    lambda i, j: (i + j) % 3 == 0,
    lambda i, j: (i // 2 + j // 3) % 2 == 0,
    lambda i, j: (i * j) % 2 + (i * j) % 3 == 0,
    lambda i, j: ((i * j) % 2 + (i * j) % 3) % 2 == 0,
    lambda i, j: ((i + j) % 2 + (i * j) % 3) % 2 == 0,
)


def _penalty(grid: list[list[int]]) -> int:
    size = len(grid)
    score = 0
    # runs of same colour >= 5, rows and columns
    for line in grid:
        score += _run_penalty(line)
    for c in range(size):
        score += _run_penalty([grid[r][c] for r in range(size)])
    # 2x2 blocks
    for r in range(size - 1):
        row, nxt = grid[r], grid[r + 1]
        for c in range(size - 1):
            if row[c] == row[c + 1] == nxt[c] == nxt[c + 1]:
                score += 3
    # finder-like patterns
    pat1 = [1, 0, 1, 1, 1, 0, 1, 0, 0, 0, 0]
    pat2 = pat1[::-1]
    for line in grid:
        score += 40 * (_count_pattern(line, pat1) + _count_pattern(line, pat2))
    for c in range(size):
        col = [grid[r][c] for r in range(size)]
        score += 40 * (_count_pattern(col, pat1) + _count_pattern(col, pat2))
    # dark proportion
    dark = sum(sum(row) for row in grid)
    ratio = dark * 100 // (size * size)
    score += 10 * (abs(ratio - 50) // 5)
    return score


def _run_penalty(line: list[int]) -> int:
    score = 0
    run = 1
    for i in range(1, len(line)):
        if line[i] == line[i - 1]:
            run += 1
        else:
            if run >= 5:
                score += 3 + run - 5
            run = 1
    if run >= 5:
        score += 3 + run - 5
    return score


def _count_pattern(line: list[int], pattern: list[int]) -> int:
    n, m = len(line), len(pattern)
    return sum(1 for i in range(n - m + 1) if line[i : i + m] == pattern)


def _assemble_codewords(data: bytes, version: int) -> list[int]:
    capacity_cw = _data_codewords(version)
    count_bits = 8 if version <= 9 else 16
    bits: list[int] = []

    def push(value: int, width: int) -> None:
        for shift in range(width - 1, -1, -1):
            bits.append(value >> shift & 1)

    push(0b0100, 4)  # byte mode
    push(len(data), count_bits)
    for byte in data:
        push(byte, 8)
    # terminator and byte alignment
    push(0, min(4, capacity_cw * 8 - len(bits)))
    if len(bits) % 8:
        push(0, 8 - len(bits) % 8)
    codewords = [
        sum(bits[i + k] << (7 - k) for k in range(8)) for i in range(0, len(bits), 8)
    ]
    pad = (0xEC, 0x11)
    for i in range(capacity_cw - len(codewords)):
        codewords.append(pad[i % 2])
    return codewords


def _interleave(codewords: list[int], version: int) -> list[int]:
    ecc_len, groups = _BLOCKS_M[version]
    blocks: list[list[int]] = []
    idx = 0
    for n_blocks, cw in groups:
        for _ in range(n_blocks):
            blocks.append(codewords[idx : idx + cw])
            idx += cw
    ecc_blocks = [_rs_ecc(b, ecc_len) for b in blocks]
    out: list[int] = []
    for i in range(max(len(b) for b in blocks)):
        for b in blocks:
            if i < len(b):
                out.append(b[i])
    for i in range(ecc_len):
        for e in ecc_blocks:
            out.append(e[i])
    return out


def _choose_version(payload_len: int) -> int:
    for version in range(1, 41):
        if data_capacity(version) >= payload_len:
            return version
    raise PayloadTooLarge(
        f"payload of {payload_len} bytes exceeds the {MAX_PAYLOAD_BYTES}-byte "
        "capacity of a version-40 level-M symbol"
    )


def make_matrix(data: bytes) -> list[list[int]]:
    """Encode bytes into a QR module matrix (1 = dark)."""
    version = _choose_version(len(data))
    size = _size(version)
    base, is_function = _build_function_modules(version)
    positions = _data_positions(size, is_function)
    sequence = _interleave(_assemble_codewords(data, version), version)

    bitstream = []
    for cw in sequence:
        for shift in range(7, -1, -1):
            bitstream.append(cw >> shift & 1)
    bitstream.extend([0] * _remainder_bits(version))
    assert len(bitstream) == len(positions)

    best: tuple[int, int, list[list[int]]] | None = None
    for mask_id, mask_fn in enumerate(_MASKS):
        grid = [row[:] for row in base]
        for (r, c), bit in zip(positions, bitstream):
            grid[r][c] = bit ^ (1 if mask_fn(r, c) else 0)
        _place_format(grid, mask_id)
        if version >= 7:
            _place_version(grid, version)
        score = _penalty(grid)
        if best is None or score < best[0]:
            best = (score, mask_id, grid)
    assert best is not None
    return best[2]


def _place_format(grid: list[list[int]], mask_id: int) -> None:
    size = len(grid)
    bits = _format_bits(mask_id)
    vertical, horizontal = _format_positions(size)
    for i in range(15):
        bit = bits >> i & 1
        r, c = vertical[i]
        grid[r][c] = bit
        r, c = horizontal[i]
        grid[r][c] = bit


def _place_version(grid: list[list[int]], version: int) -> None:
    size = len(grid)
    bits = _version_bits(version)
    for i in range(18):
        bit = bits >> i & 1
        grid[i // 3][i % 3 + size - 11] = bit
        grid[i % 3 + size - 11][i // 3] = bit


# --- decode (clean symbols only) ---


def decode_matrix(matrix: list[list[int]]) -> bytes:
    size = len(matrix)
    if size < 21 or (size - 17) % 4 != 0 or any(len(r) != size for r in matrix):
        raise QRDecodeError(f"not a QR module matrix (size {size})")
    version = (size - 17) // 4
    if version > 40:
        raise QRDecodeError("version out of range")

    vertical, horizontal = _format_positions(size)
    fmt_data = None
    for copy in (vertical, horizontal):
        raw = 0
        for i, (r, c) in enumerate(copy):
            raw |= (matrix[r][c] & 1) << i
        if raw in _VALID_FORMATS:
            fmt_data = _VALID_FORMATS[raw]
            break
    if fmt_data is None:
        raise QRDecodeError("format information corrupted")
    ec_level, mask_id = fmt_data >> 3, fmt_data & 0b111
    if ec_level != _EC_M:
        raise QRDecodeError("unsupported error-correction level")

    _, is_function = _build_function_modules(version)
    positions = _data_positions(size, is_function)
    mask_fn = _MASKS[mask_id]
    bits = [
        (matrix[r][c] & 1) ^ (1 if mask_fn(r, c) else 0) for r, c in positions
    ]
    total_cw = len(bits) // 8
    codewords = [
        sum(bits[i * 8 + k] << (7 - k) for k in range(8)) for i in range(total_cw)
    ]

    ecc_len, groups = _BLOCKS_M[version]
    block_sizes = [cw for n_blocks, cw in groups for _ in range(n_blocks)]
    data_blocks: list[list[int]] = [[] for _ in block_sizes]
    idx = 0
    for i in range(max(block_sizes)):
        for k, b_size in enumerate(block_sizes):
            if i < b_size:
                data_blocks[k].append(codewords[idx])
                idx += 1
    ecc_blocks: list[list[int]] = [[] for _ in block_sizes]
    for i in range(ecc_len):
        for k in range(len(block_sizes)):
            ecc_blocks[k].append(codewords[idx])
            idx += 1

    data: list[int] = []
    for block, ecc in zip(data_blocks, ecc_blocks):
        if not _rs_syndromes_zero(block + ecc, ecc_len):
            raise QRDecodeError("codeword block fails its integrity check")
        data.extend(block)

    return _parse_byte_mode(data, version)


def _parse_byte_mode(data: list[int], version: int) -> bytes:
    stream = _BitReader(data)
    mode = stream.take(4)
    if mode != 0b0100:
        raise QRDecodeError(f"unsupported data mode {mode:04b}")
    count_bits = 8 if version <= 9 else 16
    length = stream.take(count_bits)
    out = bytes(stream.take(8) for _ in range(length))
    return out


class _BitReader:
    def __init__(self, codewords: list[int]):
        self.codewords = codewords
        self.pos = 0

    def take(self, n: int) -> int:
        value = 0
        for _ in range(n):
            cw = self.codewords[self.pos // 8]
            value = value << 1 | (cw >> (7 - self.pos % 8) & 1)
            self.pos += 1
            if self.pos > len(self.codewords) * 8:
                raise QRDecodeError("bit stream exhausted")
        return value


# --- PNG rendering and reading ---


def matrix_to_png(matrix: list[list[int]], scale: int = 8, border: int = 4) -> bytes:
    arr = np.array(matrix, dtype=np.uint8)
    arr = np.pad(arr, border, constant_values=0)
    arr = np.kron(arr, np.ones((scale, scale), dtype=np.uint8))
    img = Image.fromarray(((1 - arr) * 255).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def png_to_matrix(png: bytes) -> list[list[int]]:
    try:
        img = Image.open(io.BytesIO(png)).convert("L")
    except Exception as exc:
        raise QRDecodeError(f"not a readable image: {exc}") from exc
    arr = np.asarray(img, dtype=np.uint8) < 128
    ys, xs = np.nonzero(arr)
    if len(ys) == 0:
        raise QRDecodeError("image contains no dark modules")
    y0, x0 = int(ys.min()), int(xs.min())
    row = arr[y0]
    run = 0
    x = x0
    while x < arr.shape[1] and row[x]:
        run += 1
        x += 1
    scale = run // 7
    if scale < 1:
        raise QRDecodeError("cannot infer module size")
    n = round((int(xs.max()) - x0 + 1) / scale)
    if n < 21 or n > 177 or (n - 17) % 4 != 0:
        raise QRDecodeError("grid does not match any QR version")
    matrix = [
        [
            1 if arr[y0 + i * scale + scale // 2][x0 + j * scale + scale // 2] else 0
            for j in range(n)
        ]
        for i in range(n)
    ]
    return matrix


def encode_png(data: bytes, scale: int = 8, border: int = 4) -> bytes:
    return matrix_to_png(make_matrix(data), scale=scale, border=border)


def decode_png(png: bytes) -> bytes:
    return decode_matrix(png_to_matrix(png))
