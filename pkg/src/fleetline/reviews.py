"""Review analytics: tokenizing, sentiment tallies, provider ranking, spam screening."""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import FormatError, InvalidParam

MAX_TEXT_LEN = 2000

DEFAULT_STOPWORDS = frozenset({
    "a", "an", "the", "is", "was", "are", "were", "and", "or", "but",
    "to", "of", "in", "on", "for", "with", "it", "this", "that",
})

DEFAULT_POSITIVE = frozenset({"good", "great", "happy", "active", "nice", "believe"})
DEFAULT_NEGATIVE = frozenset({"sad", "bad", "poor", "useless", "cold", "cry"})

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


class SentimentLabel(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class SentimentLexicon:
    positive: frozenset
    negative: frozenset

    def __post_init__(self):
        object.__setattr__(self, "positive", frozenset(self.positive))
        object.__setattr__(self, "negative", frozenset(self.negative))
        clash = self.positive & self.negative
        if clash:
            raise InvalidParam(f"words listed as both positive and negative: {sorted(clash)}")


DEFAULT_LEXICON = SentimentLexicon(DEFAULT_POSITIVE, DEFAULT_NEGATIVE)


@dataclass(frozen=True)
class Review:
    review_id: str
    customer_id: str
    provider_id: str
    trip_id: str
    text: str
    stars: int
    created_at: int

    def __post_init__(self):
        if not isinstance(self.stars, int) or not 1 <= self.stars <= 5:
            raise InvalidParam(f"stars must be an integer in 1..5, got {self.stars}")
        if len(self.text) > MAX_TEXT_LEN:
            raise InvalidParam(f"review text exceeds {MAX_TEXT_LEN} characters")
        if not isinstance(self.created_at, int) or self.created_at < 0:
            raise InvalidParam(f"created_at must be a non-negative ms timestamp")


@dataclass(frozen=True)
class SpamPolicy:
    min_reviews: int = 5
    dup_ratio_threshold: float = 0.5
    same_customer_burst: int = 3
    burst_window_ms: int = 86_400_000

    def __post_init__(self):
        if self.min_reviews < 1 or self.same_customer_burst < 1 or self.burst_window_ms < 1:
            raise InvalidParam("spam policy thresholds must be positive")
        if not 0 < self.dup_ratio_threshold <= 1:
            raise InvalidParam(
                f"dup_ratio_threshold must be in (0, 1], got {self.dup_ratio_threshold}")


def tokenize_remove_stopwords(text: str, stoplist=DEFAULT_STOPWORDS) -> list:
    """Lowercase, split on non-alphanumeric runs, drop stop words."""
    return [t for t in _TOKEN.findall(text.lower()) if t not in stoplist]


def classify_review(text: str, lexicon: SentimentLexicon = DEFAULT_LEXICON,
                    stoplist=DEFAULT_STOPWORDS) -> SentimentLabel:
    pos = neg = 0
    for token in tokenize_remove_stopwords(text, stoplist):
        if token in lexicon.positive:
            pos += 1
        elif token in lexicon.negative:
            neg += 1
    if pos > neg:
        return SentimentLabel.POSITIVE
    if neg > pos:
        return SentimentLabel.NEGATIVE
    return SentimentLabel.NEUTRAL


def sentiment_counts(reviews, lexicon: SentimentLexicon = DEFAULT_LEXICON,
                     stoplist=DEFAULT_STOPWORDS):
    """(positive, negative, neutral) tally over the reviews."""
    tally = {SentimentLabel.POSITIVE: 0, SentimentLabel.NEGATIVE: 0, SentimentLabel.NEUTRAL: 0}
    for review in reviews:
        tally[classify_review(review.text, lexicon, stoplist)] += 1
    return (tally[SentimentLabel.POSITIVE], tally[SentimentLabel.NEGATIVE],
            tally[SentimentLabel.NEUTRAL])


@dataclass(frozen=True)
class ProviderRank:
    provider_id: str
    mean_stars: Optional[float]
    review_count: int


def provider_star_lists(reviews, provider_ids=()):
    """Star lists keyed by provider; listed providers appear even with no reviews."""
    out = {pid: [] for pid in provider_ids}
    for review in reviews:
        out.setdefault(review.provider_id, []).append(review.stars)
    return out


def rank_providers(ratings) -> list:
    """Order providers by mean stars, then review count, then id.

    `ratings` maps provider_id to its star values; empty lists rank last
    with no mean.
    """
    rated, unrated = [], []
    for provider_id, stars in ratings.items():
        stars = list(stars)
        if stars:
            rated.append(ProviderRank(provider_id, sum(stars) / len(stars), len(stars)))
        else:
            unrated.append(ProviderRank(provider_id, None, 0))
    rated.sort(key=lambda r: (-r.mean_stars, -r.review_count, r.provider_id))
    unrated.sort(key=lambda r: r.provider_id)
    return rated + unrated


DUPLICATE_RATIO = "duplicate-ratio"
BURST = "burst"


def detect_spam_providers(reviews, policy: SpamPolicy = SpamPolicy()) -> dict:
    """Providers whose review stream trips a spam rule, with the rules that fired."""
    by_provider = {}
    for review in reviews:
        by_provider.setdefault(review.provider_id, []).append(review)
    flagged = {}
    for provider_id in sorted(by_provider):
        group = by_provider[provider_id]
        if len(group) < policy.min_reviews:
            continue
        reasons = []
        normalized = [" ".join(tokenize_remove_stopwords(r.text)) for r in group]
        dup_ratio = 1.0 - len(set(normalized)) / len(normalized)
        if dup_ratio >= policy.dup_ratio_threshold:
            reasons.append(DUPLICATE_RATIO)
        by_customer = {}
        for review in group:
            by_customer.setdefault(review.customer_id, []).append(review.created_at)
        for times in by_customer.values():
            times.sort()
            window = policy.burst_window_ms
            burst = policy.same_customer_burst
            # window is inclusive at both ends
            if any(
                j - i + 1 >= burst
                for i in range(len(times))
                for j in range(i, len(times))
                if times[j] - times[i] <= window
            ):
                reasons.append(BURST)
                break
        if reasons:
            flagged[provider_id] = tuple(reasons)
    return flagged


def parse_wordlists(text: str):
    """Lexicon plus stoplist from sectioned text: [positive] / [negative] / [stopwords]."""
    sections = {"positive": set(), "negative": set(), "stopwords": set()}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in sections:
                raise FormatError(f"line {lineno}: unknown section [{name}]")
            current = name
            continue
        if current is None:
            raise FormatError(f"line {lineno}: word before any section header")
        sections[current].add(line.lower())
    if current is None:
        raise FormatError("no section headers found")
    lexicon = SentimentLexicon(frozenset(sections["positive"]), frozenset(sections["negative"]))
    return lexicon, frozenset(sections["stopwords"])


def load_wordlists(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_wordlists(fh.read())
