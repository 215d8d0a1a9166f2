"""Arithmetic over GF(2^8) with the QR primitive polynomial 0x11D."""

PRIMITIVE = 0x11D

# EXP is doubled so exponent sums up to 510 need no explicit mod 255.
EXP = [0] * 512
LOG = [0] * 256


def _fill_tables():
    x = 1
    for i in range(255):
        EXP[i] = x
        LOG[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIMITIVE
    for i in range(255, 512):
        EXP[i] = EXP[i - 255]


_fill_tables()


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return EXP[LOG[a] + LOG[b]]


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return EXP[LOG[a] - LOG[b] + 255]


def gf_pow(a: int, n: int) -> int:
    if a == 0:
        return 0 if n else 1
    return EXP[(LOG[a] * n) % 255]


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(256)")
    return EXP[255 - LOG[a]]


def poly_mul(p, q):
    """Product of polynomials with highest-degree coefficient first."""
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        la = LOG[a]
        for j, b in enumerate(q):
            if b:
                out[i + j] ^= EXP[la + LOG[b]]
    return out


def poly_eval(p, x: int) -> int:
    """Horner evaluation, highest-degree coefficient first."""
    acc = 0
    for c in p:
        acc = gf_mul(acc, x) ^ c
    return acc
