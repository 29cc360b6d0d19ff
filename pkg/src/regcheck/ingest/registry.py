"""ClinicalTrials.gov API v2 client and registry record normalization.

A fetched study is flattened depth-first into (dotted-path, text) leaves of
its protocolSection subtree, which decouples downstream stages from registry
schema changes.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from typing import Any, Callable, Optional

import httpx

from ..documents import REGISTRATION, REGISTRY, SectionedDocument, SourceDescriptor, make_document
from ..errors import EmptyRecord, MalformedId, RegistryNotFound, RegistryUnavailable

NCT_PATTERN = re.compile(r"^NCT[0-9]{8}$")

DEFAULT_REGISTRY_BASE_URL = "https://clinicaltrials.gov"


def normalize_nct_id(raw: str) -> str:
    """Uppercase and validate an NCT identifier; total over all strings."""
    candidate = raw.strip().upper()
    if not NCT_PATTERN.match(candidate):
        raise MalformedId(f"not a valid NCT identifier: {raw!r}")
    return candidate


def looks_like_nct_id(raw: str) -> bool:
    return bool(NCT_PATTERN.match(raw.strip().upper()))


@dataclass(frozen=True)
class RegistryRecord:
    nct_id: str
    field_map: tuple[tuple[str, str], ...]  # ordered (dotted path, text) pairs

    def __post_init__(self) -> None:
        if not NCT_PATTERN.match(self.nct_id):
            raise MalformedId(f"not a valid NCT identifier: {self.nct_id!r}")


def flatten_json_leaves(value: Any, prefix: str = "") -> list[tuple[str, str]]:
    """Depth-first flattening of nested JSON into (dotted-path, text) leaves."""
    leaves: list[tuple[str, str]] = []
    if isinstance(value, dict):
        for key, item in value.items():
            path = f"{prefix}.{key}" if prefix else str(key)
            leaves.extend(flatten_json_leaves(item, path))
    elif isinstance(value, list):
        for index, item in enumerate(value):
            path = f"{prefix}.{index}" if prefix else str(index)
            leaves.extend(flatten_json_leaves(item, path))
    elif value is None:
        pass
    elif isinstance(value, bool):
        leaves.append((prefix, "true" if value else "false"))
    else:
        leaves.append((prefix, str(value)))
    return leaves


class RegistryClient:
    """HTTP client for the registry's GET /api/v2/studies/{nctId} route."""

    def __init__(
        self,
        base_url: str = DEFAULT_REGISTRY_BASE_URL,
        timeout: float = 60.0,
        retries: int = 3,
        sleeper: Callable[[float], None] = time.sleep,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self._base_url = base_url.rstrip("/")
        self._retries = retries
        self._sleeper = sleeper
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def fetch_study(self, nct_id: str) -> dict:
        url = f"{self._base_url}/api/v2/studies/{nct_id}"
        last_error: Exception | None = None
        for attempt in range(self._retries + 1):
            try:
                response = self._client.get(url)
                if response.status_code == 404:
                    raise RegistryNotFound(f"registry has no study {nct_id}")
                if response.status_code >= 500:
                    raise RegistryUnavailable(f"registry returned {response.status_code}")
                response.raise_for_status()
                return response.json()
            except RegistryNotFound:
                raise
            except (httpx.HTTPError, RegistryUnavailable, ValueError) as exc:
                last_error = exc
                if attempt < self._retries:
                    self._sleeper(0.5 * (2**attempt))
        raise RegistryUnavailable(f"registry unreachable after {self._retries} retries: {last_error}")


def fetch_registration(nct_id: str, registry_client: RegistryClient) -> RegistryRecord:
    """Fetch and flatten one study registration by NCT identifier."""
    normalized = normalize_nct_id(nct_id)
    payload = registry_client.fetch_study(normalized)
    protocol = payload.get("protocolSection")
    if not isinstance(protocol, dict):
        raise RegistryNotFound(f"study {normalized} has no protocol data")
    leaves = [(path, text) for path, text in flatten_json_leaves(protocol) if text.strip()]
    if not any(path.endswith("briefTitle") for path, _ in leaves):
        raise RegistryNotFound(f"study {normalized} record carries no title")
    return RegistryRecord(nct_id=normalized, field_map=tuple(leaves))


_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


def humanize_field_path(path: str) -> str:
    """Dotted camelCase path -> title-cased heading, numeric indices kept."""
    words: list[str] = []
    for segment in path.split("."):
        if segment.isdigit():
            words.append(f"#{int(segment) + 1}")
            continue
        for word in _CAMEL_RE.sub(" ", segment).split():
            words.append(word[:1].upper() + word[1:])
    return " ".join(words)


def registry_record_to_document(record: RegistryRecord) -> SectionedDocument:
    """One section per non-empty registry field, in registry field order."""
    sections = [
        (humanize_field_path(path), text)
        for path, text in record.field_map
        if text.strip()
    ]
    if not sections:
        raise EmptyRecord(f"registry record {record.nct_id} has no non-empty fields")
    source = SourceDescriptor(
        kind=REGISTRATION,
        origin=REGISTRY,
        format="registry_json",
        registry_id=record.nct_id,
    )
    return make_document(source, sections)
