"""Keyword frame extraction for free-typed demo input.

Gazetteer matching against the venue database's value inventory plus a
small request-phrase table. Good enough to drive the demo without a
gold frame; a caller-provided frame always wins upstream.
"""

from __future__ import annotations

import re

from .state import DomainDb, SemanticFrame

# demo users type US spellings and synonyms the db does not use
VALUE_SYNONYMS = {
    "center": "centre",
    "central": "centre",
    "downtown": "centre",
    "inexpensive": "cheap",
    "budget": "cheap",
    "pricey": "expensive",
}

REQUEST_PATTERNS = {
    "phone": ("phone", "telephone", "number to call"),
    "address": ("address", "where is it", "where exactly", "located"),
    "postcode": ("postcode", "post code", "zip code"),
    "name": ("name of", "what is it called", "which restaurant", "whats it called"),
}

FAREWELL_PATTERNS = ("goodbye", "good bye", "bye", "see you", "that is all", "thats all")

GREETING_PATTERNS = ("hello", "hi there", "good morning", "good evening")


def _contains(text: str, phrase: str) -> bool:
    return re.search(rf"\b{re.escape(phrase)}\b", text) is not None


def extract_frame(utterance: str, db: DomainDb) -> SemanticFrame:
    """Best-effort frame from raw text; never raises on any input."""
    text = utterance.lower().strip()

    informed: dict[str, str] = {}
    inventory = db.value_inventory()
    for slot, values in inventory.items():
        for value in values:
            if _contains(text, value):
                informed[slot] = value
                break
        else:
            for alias, canonical in VALUE_SYNONYMS.items():
                if canonical in values and _contains(text, alias):
                    informed[slot] = canonical
                    break

    requested = {
        slot
        for slot, phrases in REQUEST_PATTERNS.items()
        if any(_contains(text, p) for p in phrases)
    }

    if any(_contains(text, p) for p in FAREWELL_PATTERNS):
        intent = "bye"
    elif requested and not informed:
        intent = "request"
    else:
        intent = "inform"
    return SemanticFrame(intent=intent, informed=informed, requested=frozenset(requested))
