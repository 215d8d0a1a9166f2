"""Passphrase sealing for QR payloads, and the sealed-symbol composition.

A sealed envelope is AES-GCM output keyed by a PBKDF2-derived key. All
derivation parameters are fixed and public so independent endpoints
interoperate; only the passphrase is secret.
"""

import hashlib
import os
from dataclasses import dataclass
from functools import lru_cache

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import AuthFailure, CapacityError, FormatError, InvalidParam
from .qrcodec import MAX_VERSION, MIN_VERSION, EcLevel, QrMatrix, byte_capacity, qr_decode, qr_encode

FORMAT_VERSION = 0x01
SALT_LEN = 16
NONCE_LEN = 12
TAG_LEN = 16
HEADER_LEN = 1 + SALT_LEN + NONCE_LEN + 4
# Sized for bulk verification throughput, not password-vault hardening;
# changing it breaks interop with previously issued envelopes.
KDF_ITERATIONS = 3000
KEY_LEN = 32


@lru_cache(maxsize=4096)
def _derive_key(passphrase: bytes, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", passphrase, salt, KDF_ITERATIONS, dklen=KEY_LEN)


@dataclass(frozen=True)
class SealedEnvelope:
    salt: bytes
    nonce: bytes
    ciphertext: bytes
    tag: bytes
    version: int = FORMAT_VERSION

    def to_bytes(self) -> bytes:
        return (
            bytes([self.version])
            + self.salt
            + self.nonce
            + len(self.ciphertext).to_bytes(4, "big")
            + self.ciphertext
            + self.tag
        )

    @classmethod
    def from_bytes(cls, blob) -> "SealedEnvelope":
        blob = bytes(blob)
        if len(blob) < HEADER_LEN + TAG_LEN:
            raise FormatError(f"envelope truncated at {len(blob)} bytes")
        if blob[0] != FORMAT_VERSION:
            raise FormatError(f"unknown envelope version {blob[0]:#04x}")
        salt = blob[1:1 + SALT_LEN]
        nonce = blob[1 + SALT_LEN:1 + SALT_LEN + NONCE_LEN]
        ct_len = int.from_bytes(blob[HEADER_LEN - 4:HEADER_LEN], "big")
        if len(blob) != HEADER_LEN + ct_len + TAG_LEN:
            raise FormatError("envelope length does not match its header")
        return cls(salt, nonce, blob[HEADER_LEN:HEADER_LEN + ct_len], blob[HEADER_LEN + ct_len:])


def seal_payload(plaintext, passphrase: str) -> SealedEnvelope:
    if not passphrase:
        raise InvalidParam("passphrase must be non-empty")
    plaintext = bytes(plaintext)
    salt = os.urandom(SALT_LEN)
    nonce = os.urandom(NONCE_LEN)
    key = _derive_key(passphrase.encode("utf-8"), salt)
    sealed = AESGCM(key).encrypt(nonce, plaintext, None)
    return SealedEnvelope(salt, nonce, sealed[:-TAG_LEN], sealed[-TAG_LEN:])


def open_payload(envelope, passphrase: str) -> bytes:
    if not passphrase:
        raise InvalidParam("passphrase must be non-empty")
    if isinstance(envelope, (bytes, bytearray, memoryview)):
        envelope = SealedEnvelope.from_bytes(envelope)
    key = _derive_key(passphrase.encode("utf-8"), envelope.salt)
    try:
        return AESGCM(key).decrypt(envelope.nonce, envelope.ciphertext + envelope.tag, None)
    except InvalidTag:
        # Wrong passphrase and tampering are deliberately indistinguishable.
        raise AuthFailure("envelope failed authentication") from None


def make_trip_qr(trip_summary, passphrase: str, ec: EcLevel = EcLevel.M) -> QrMatrix:
    """Seal a serialized trip summary and encode it at the smallest fitting version."""
    envelope = seal_payload(trip_summary, passphrase).to_bytes()
    for version in range(MIN_VERSION, MAX_VERSION + 1):
        if len(envelope) <= byte_capacity(version, ec):
            return qr_encode(envelope, version, ec)
    raise CapacityError(
        f"sealed envelope of {len(envelope)} bytes fits no version up to "
        f"{MAX_VERSION} at level {ec.name}"
    )


def read_trip_qr(matrix: QrMatrix, passphrase: str) -> bytes:
    """Inverse of make_trip_qr: decode the symbol and open the envelope."""
    return open_payload(qr_decode(matrix), passphrase)
