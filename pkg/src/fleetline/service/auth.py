"""Password hashing and bearer-token sessions."""

import hashlib
import hmac
import secrets
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Optional

KDF_ITERATIONS = 3000
SALT_LEN = 16
TOKEN_TTL_MS = 24 * 60 * 60 * 1000
# fixed salt so the genesis admin account hashes identically across restarts
BOOTSTRAP_SALT = b"fleetline-bootstrap-admin"


class Role(Enum):
    ANONYMOUS = "Anonymous"
    ADMIN = "Admin"
    PROVIDER = "Provider"
    CUSTOMER = "Customer"
    DRIVER = "Driver"


def new_salt() -> bytes:
    return secrets.token_bytes(SALT_LEN)


def hash_password(password: str, salt: bytes) -> bytes:
    return hashlib.pbkdf2_hmac("sha256", password.encode(), salt, KDF_ITERATIONS)


def verify_password(password: str, salt_hex: str, hash_hex: str) -> bool:
    derived = hash_password(password, bytes.fromhex(salt_hex))
    return hmac.compare_digest(derived, bytes.fromhex(hash_hex))


# compared against when the login is unknown, so both failure paths hash
_DUMMY_SALT = bytes(SALT_LEN)
_DUMMY_HASH = hash_password("!", _DUMMY_SALT)


def burn_verification() -> None:
    """Spend one hash so unknown logins cost the same as wrong passwords."""
    hmac.compare_digest(hash_password("?", _DUMMY_SALT), _DUMMY_HASH)


@dataclass(frozen=True)
class Session:
    token: str
    account_id: str
    expires_at: int


class SessionStore:
    """In-memory tokens; sessions deliberately do not survive a restart."""

    def __init__(self, now_ms):
        self._now_ms = now_ms
        self._sessions = {}
        self._lock = threading.Lock()

    def issue(self, account_id: str) -> Session:
        session = Session(secrets.token_hex(32), account_id,
                          self._now_ms() + TOKEN_TTL_MS)
        with self._lock:
            self._sessions[session.token] = session
        return session

    def resolve(self, token: Optional[str]) -> Optional[Session]:
        if not token:
            return None
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                return None
            if session.expires_at <= self._now_ms():
                del self._sessions[token]
                return None
            return session
