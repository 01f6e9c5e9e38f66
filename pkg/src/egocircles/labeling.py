"""Journalist identification: bio keywords, attribute providers, combinators
and classifier evaluation."""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .model import EvaluationReport, UserProfile

log = logging.getLogger(__name__)

BOT_THRESHOLD = 0.5


def load_keywords(path=None) -> frozenset[str]:
    """Keyword set from a JSON file with ``unigrams`` and ``bigrams`` lists.

    Without ``path`` the bundled journalism keywords are used.
    """
    if path is None:
        text = resources.files("egocircles").joinpath("data/keywords.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    return frozenset(w.lower() for w in (*raw.get("unigrams", ()), *raw.get("bigrams", ())))


DEFAULT_KEYWORDS = load_keywords()


def keyword_match(profile: UserProfile | Sequence[str], keywords: Iterable[str] = DEFAULT_KEYWORDS) -> bool:
    """True when a keyword unigram is a bio token or a keyword bigram appears
    as two adjacent tokens."""
    tokens = profile.bio_tokens if isinstance(profile, UserProfile) else tuple(profile)
    keywords = set(keywords)
    unigrams = {k for k in keywords if " " not in k}
    bigrams = {tuple(k.split()) for k in keywords if " " in k}
    if unigrams.intersection(tokens):
        return True
    return any(pair in bigrams for pair in zip(tokens, tokens[1:]))


@dataclass(frozen=True)
class ProviderRecord:
    is_journalist: Optional[bool] = None
    bot_score: Optional[float] = None
    cap_score: Optional[float] = None


def _opt_bool(text: str) -> Optional[bool]:
    t = (text or "").strip().lower()
    if t in ("", "na", "none", "null"):
        return None
    if t in ("1", "true", "yes", "y", "t"):
        return True
    if t in ("0", "false", "no", "n", "f"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_score(text: str) -> Optional[float]:
    t = (text or "").strip()
    if t.lower() in ("", "na", "none", "null"):
        return None
    v = float(t)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"score outside [0, 1]: {v}")
    return v


class FileProvider:
    """Attribute lookups backed by a CSV with columns
    ``user_id, is_journalist, bot_score, cap_score`` (any may be blank)."""

    def __init__(self, path, name: Optional[str] = None):
        self.path = Path(path)
        self.name = name or self.path.stem
        self._rows: dict[str, ProviderRecord] = {}
        with open(self.path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if "user_id" not in (reader.fieldnames or []):
                raise ValueError(f"{self.path}: missing required column 'user_id'")
            for lineno, row in enumerate(reader, 2):
                try:
                    self._rows[row["user_id"]] = ProviderRecord(
                        _opt_bool(row.get("is_journalist", "")),
                        _opt_score(row.get("bot_score", "")),
                        _opt_score(row.get("cap_score", "")),
                    )
                except ValueError as exc:
                    raise ValueError(f"{self.path}:{lineno}: {exc}") from exc

    def lookup(self, user_id: str) -> Optional[ProviderRecord]:
        return self._rows.get(user_id)


class MergedProvider:
    """Field-wise merge of several providers; earlier providers win."""

    def __init__(self, providers: Sequence):
        self.providers = list(providers)
        self.name = "+".join(p.name for p in self.providers)

    def lookup(self, user_id: str) -> Optional[ProviderRecord]:
        found = [r for r in (p.lookup(user_id) for p in self.providers) if r is not None]
        if not found:
            return None

        def first(attr):
            return next((getattr(r, attr) for r in found if getattr(r, attr) is not None), None)

        return ProviderRecord(first("is_journalist"), first("bot_score"), first("cap_score"))


def _has_scores(rec: Optional[ProviderRecord]) -> bool:
    return rec is not None and rec.bot_score is not None and rec.cap_score is not None


def bot_verdict(rec: Optional[ProviderRecord]) -> bool:
    """Bot iff both the bot score and the CAP score exceed 0.5."""
    if not _has_scores(rec):
        log.warning("missing bot/cap score, treating account as human")
        return False
    return rec.bot_score > BOT_THRESHOLD and rec.cap_score > BOT_THRESHOLD


# --- combinator expressions -------------------------------------------------

ATOMS = frozenset("kgb")
_TOKEN = re.compile(r"\s*([kgb()&|])")


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


Expr = Union[Atom, And, Or]


def parse_expr(text: str) -> Expr:
    """Parse ``atom | ( expr ) | expr & expr | expr '|' expr``; ``&`` binds tighter."""
    tokens, pos = [], 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m:
            bad = stripped[pos:].strip()[:1]
            raise ValueError(f"unknown atom or symbol {bad!r} in {text!r}")
        tokens.append(m.group(1))
        pos = m.end()
    if not tokens:
        raise ValueError("empty expression")
    expr, i = _parse_or(tokens, 0)
    if i != len(tokens):
        raise ValueError(f"unexpected {tokens[i]!r} in {text!r}")
    return expr


def _parse_or(tokens, i):
    left, i = _parse_and(tokens, i)
    while i < len(tokens) and tokens[i] == "|":
        right, i = _parse_and(tokens, i + 1)
        left = Or(left, right)
    return left, i


def _parse_and(tokens, i):
    left, i = _parse_atom(tokens, i)
    while i < len(tokens) and tokens[i] == "&":
        right, i = _parse_atom(tokens, i + 1)
        left = And(left, right)
    return left, i


def _parse_atom(tokens, i):
    if i >= len(tokens):
        raise ValueError("expression ends early")
    tok = tokens[i]
    if tok in ATOMS:
        return Atom(tok), i + 1
    if tok == "(":
        inner, i = _parse_or(tokens, i + 1)
        if i >= len(tokens) or tokens[i] != ")":
            raise ValueError("unbalanced parenthesis")
        return inner, i + 1
    raise ValueError(f"unexpected {tok!r}")


def evaluate(expr: Expr, atoms: Mapping[str, bool]) -> bool:
    if isinstance(expr, Atom):
        if expr.name not in atoms:
            raise ValueError(f"unknown atom {expr.name!r}")
        return bool(atoms[expr.name])
    if isinstance(expr, And):
        return evaluate(expr.left, atoms) and evaluate(expr.right, atoms)
    return evaluate(expr.left, atoms) or evaluate(expr.right, atoms)


def evaluate_combinator(expr: Expr | str, *, k: bool, g: bool, is_bot: bool,
                        invert_b: bool = False) -> bool:
    """Evaluate a combinator over the three classifier outcomes.

    Atom ``b`` means "passes the bot check" (not a bot); ``invert_b`` flips it
    to "is a bot".
    """
    if isinstance(expr, str):
        expr = parse_expr(expr)
    b = is_bot if invert_b else not is_bot
    return evaluate(expr, {"k": k, "g": g, "b": b})


@dataclass(frozen=True)
class Verdict:
    user_id: str
    k: bool
    g: bool
    is_bot: bool
    journalist: bool


def label_users(profiles: Mapping[str, UserProfile], expr: Expr | str, provider=None,
                keywords: Iterable[str] = DEFAULT_KEYWORDS, invert_b: bool = False,
                user_ids: Optional[Iterable[str]] = None) -> list[Verdict]:
    if isinstance(expr, str):
        expr = parse_expr(expr)
    keywords = frozenset(keywords)
    out = []
    unscored = 0
    for uid in sorted(user_ids if user_ids is not None else profiles):
        profile = profiles.get(uid) or UserProfile(uid)
        rec = provider.lookup(uid) if provider is not None else None
        k = keyword_match(profile, keywords)
        g = bool(rec and rec.is_journalist)
        if _has_scores(rec):
            is_bot = bot_verdict(rec)
        else:
            is_bot = False
            unscored += 1
        out.append(Verdict(uid, k, g, is_bot,
                           evaluate_combinator(expr, k=k, g=g, is_bot=is_bot, invert_b=invert_b)))
    if unscored:
        log.warning("%d users lack bot/cap scores and are treated as human", unscored)
    return out


def evaluate_predictions(predicted: Mapping[str, bool], truth: Mapping[str, bool]) -> EvaluationReport:
    """Confusion counts with "journalist" (True) as the positive class."""
    missing_pred = sorted(set(truth) - set(predicted))
    missing_truth = sorted(set(predicted) - set(truth))
    if missing_pred or missing_truth:
        raise ValueError(f"key mismatch: missing predictions {missing_pred[:10]}, "
                         f"missing truth {missing_truth[:10]}")
    tp = fp = tn = fn = 0
    for uid, actual in truth.items():
        guess = predicted[uid]
        if guess and actual:
            tp += 1
        elif guess:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return EvaluationReport.from_counts(tp, fp, tn, fn)


def read_truth(path) -> dict[str, bool]:
    """``user_id, is_journalist`` table."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for col in ("user_id", "is_journalist"):
            if col not in (reader.fieldnames or []):
                raise ValueError(f"{path}: missing required column {col!r}")
        for row in reader:
            v = _opt_bool(row["is_journalist"])
            if v is not None:
                out[row["user_id"]] = v
    return out
