"""Reed-Solomon codec over GF(256), generator roots alpha^0..alpha^(nsym-1)."""

from functools import lru_cache

from .errors import InvalidParam, UncorrectableError
from .gf256 import EXP, LOG, gf_inv, gf_mul, gf_pow, poly_eval, poly_mul

MAX_NSYM = 64


@lru_cache(maxsize=None)
def generator_poly(nsym: int):
    g = [1]
    for i in range(nsym):
        g = poly_mul(g, [1, gf_pow(2, i)])
    return tuple(g)


def rs_generate_parity(data, nsym: int) -> bytes:
    """Remainder of data * x^nsym divided by the degree-nsym generator."""
    if not isinstance(nsym, int) or not 1 <= nsym <= MAX_NSYM:
        raise InvalidParam(f"nsym must be in 1..{MAX_NSYM}, got {nsym}")
    data = bytes(data)
    if not data:
        raise InvalidParam("data must be non-empty")
    if len(data) + nsym > 255:
        raise InvalidParam(f"codeword would exceed 255 bytes ({len(data) + nsym})")
    gen = generator_poly(nsym)
    rem = bytearray(data) + bytearray(nsym)
    for i in range(len(data)):
        lead = rem[i]
        if lead == 0:
            continue
        llog = LOG[lead]
        # gen[0] is 1; the leading term only cancels rem[i] itself
        for j in range(1, len(gen)):
            rem[i + j] ^= EXP[LOG[gen[j]] + llog]
    return bytes(rem[len(data):])


def syndromes(codeword, nsym: int):
    return [poly_eval(codeword, gf_pow(2, i)) for i in range(nsym)]


def _poly_add_low(p, q):
    out = [0] * max(len(p), len(q))
    for i, c in enumerate(p):
        out[i] ^= c
    for i, c in enumerate(q):
        out[i] ^= c
    return out


def _berlekamp_massey(synd):
    """Error locator (lowest-degree first) and its degree."""
    cur = [1]
    prev = [1]
    deg = 0
    shift = 1
    prev_delta = 1
    for n, s in enumerate(synd):
        delta = s
        for i in range(1, deg + 1):
            if i < len(cur):
                delta ^= gf_mul(cur[i], synd[n - i])
        if delta == 0:
            shift += 1
            continue
        coef = gf_mul(delta, gf_inv(prev_delta))
        shifted = [0] * shift + [gf_mul(coef, c) for c in prev]
        if 2 * deg <= n:
            prev, prev_delta = list(cur), delta
            cur = _poly_add_low(cur, shifted)
            deg = n + 1 - deg
            shift = 1
        else:
            cur = _poly_add_low(cur, shifted)
            shift += 1
    while len(cur) > 1 and cur[-1] == 0:
        cur.pop()
    return cur, deg


def _chien_search(locator, length):
    """Codeword indexes whose locator X = alpha^(length-1-index) is a root."""
    positions = []
    for idx in range(length):
        x_inv = gf_pow(2, -(length - 1 - idx) % 255)
        if poly_eval(list(reversed(locator)), x_inv) == 0:
            positions.append(idx)
    return positions


def rs_decode_correct(codeword, nsym: int) -> bytes:
    """Data portion of the codeword with up to floor(nsym/2) errors fixed."""
    if not isinstance(nsym, int) or not 1 <= nsym <= MAX_NSYM:
        raise InvalidParam(f"nsym must be in 1..{MAX_NSYM}, got {nsym}")
    codeword = bytearray(codeword)
    n = len(codeword)
    if n <= nsym:
        raise InvalidParam(f"codeword length {n} must exceed nsym {nsym}")
    if n > 255:
        raise InvalidParam(f"codeword exceeds 255 bytes ({n})")
    synd = syndromes(codeword, nsym)
    if not any(synd):
        return bytes(codeword[: n - nsym])

    locator, deg = _berlekamp_massey(synd)
    if deg != len(locator) - 1 or 2 * deg > nsym:
        raise UncorrectableError(f"error count exceeds capacity ({deg} of {nsym // 2})")
    positions = _chien_search(locator, n)
    if len(positions) != deg:
        raise UncorrectableError("locator roots do not match its degree")

    # Forney, fcr=0: e_k = X_k * omega(1/X_k) / locator'(1/X_k)
    evaluator = _poly_mul_low(synd, locator)[:nsym]
    derivative = locator[1::2]  # formal derivative keeps odd terms, halved degree
    for idx in positions:
        x = gf_pow(2, (n - 1 - idx) % 255)
        x_inv = gf_inv(x)
        denom = _eval_low(derivative, gf_mul(x_inv, x_inv))
        if denom == 0:
            raise UncorrectableError("degenerate locator derivative")
        magnitude = gf_mul(x, gf_mul(_eval_low(evaluator, x_inv), gf_inv(denom)))
        codeword[idx] ^= magnitude

    if any(syndromes(codeword, nsym)):
        raise UncorrectableError("residual syndromes after correction")
    return bytes(codeword[: n - nsym])


def _poly_mul_low(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        la = LOG[a]
        for j, b in enumerate(q):
            if b:
                out[i + j] ^= EXP[la + LOG[b]]
    return out


def _eval_low(p, x: int) -> int:
    acc = 0
    for c in reversed(p):
        acc = gf_mul(acc, x) ^ c
    return acc
