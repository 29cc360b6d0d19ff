import random
from pathlib import Path

import pytest

from regcheck.documents import PAPER, REGISTRATION, UPLOAD, SourceDescriptor, make_document

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def plaintext_source(kind: str) -> SourceDescriptor:
    return SourceDescriptor(kind=kind, origin=UPLOAD, format="plaintext", filename=f"{kind}.txt")


def doc_from_sections(sections: list[tuple[str, str]], kind: str = PAPER):
    return make_document(plaintext_source(kind), sections)


def seeded_id_factory(seed: int = 42):
    rng = random.Random(seed)
    alphabet = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"

    def factory() -> str:
        return "".join(rng.choice(alphabet) for _ in range(10))

    return factory


def fixed_clock() -> str:
    return "2026-01-01T00:00:00Z"


class ScriptedJudgeProvider:
    """Returns queued raw responses; records every prompt bundle it sees."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.bundles = []

    def complete(self, bundle) -> str:
        self.bundles.append(bundle)
        if not self.responses:
            raise AssertionError("scripted provider exhausted")
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


def parse_rfc4180(data: bytes) -> list[list[str]]:
    """Independent RFC 4180 parser used as the CSV round-trip oracle.

    Hand-rolled on purpose: the exporter uses the csv module, so the check
    must not share its implementation.
    """
    text = data.decode("utf-8")
    rows: list[list[str]] = []
    row: list[str] = []
    cell: list[str] = []
    in_quotes = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if in_quotes:
            if ch == '"':
                if i + 1 < n and text[i + 1] == '"':
                    cell.append('"')
                    i += 2
                    continue
                in_quotes = False
                i += 1
                continue
            cell.append(ch)
            i += 1
        else:
            if ch == '"' and not cell:
                in_quotes = True
                i += 1
            elif ch == ",":
                row.append("".join(cell))
                cell = []
                i += 1
            elif text.startswith("\r\n", i):
                row.append("".join(cell))
                rows.append(row)
                row, cell = [], []
                i += 2
            elif ch == "\n":
                row.append("".join(cell))
                rows.append(row)
                row, cell = [], []
                i += 1
            else:
                cell.append(ch)
                i += 1
    if cell or row:
        row.append("".join(cell))
        rows.append(row)
    return rows
