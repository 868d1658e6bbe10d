"""Paginated comment download from an HTTP endpoint serving the comment schema.

Protocol: GET {base}/comments?channel={id}&page={token} returns
{"items": [...], "next": token-or-null}. The first page is requested
without a page token.
"""

import logging

import requests

from ingestion.records import comment_from_dict
from utils.exceptions import NetworkError, ParseFailureError

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30
USER_AGENT = "corpus-divergence-toolkit/1.0"


class CommentFetcher:

    def __init__(self, endpoint, credentials=None, timeout=DEFAULT_TIMEOUT, session=None):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()
        self.session.headers["User-Agent"] = USER_AGENT
        if credentials:
            self.session.headers["Authorization"] = f"Bearer {credentials}"

    def fetch_page(self, channel_id, token, page_index):
        params = {"channel": channel_id}
        if token is not None:
            params["page"] = token
        try:
            response = self.session.get(f"{self.endpoint}/comments", params=params, timeout=self.timeout)
            response.raise_for_status()
        except requests.RequestException as exc:
            raise NetworkError(f"page {page_index} of channel '{channel_id}' failed: {exc}", page_index) from exc

        try:
            payload = response.json()
        except ValueError as exc:
            raise ParseFailureError(f"page {page_index} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("items"), list):
            raise ParseFailureError(f"page {page_index} does not match the comment page schema")
        return payload["items"], payload.get("next")

    def fetch(self, channel_id, page_limit):
        records = []
        seen = set()
        token = None

        for page_index in range(1, page_limit + 1):
            items, token = self.fetch_page(channel_id, token, page_index)
            for position, item in enumerate(items):
                try:
                    record = comment_from_dict(item)
                except (TypeError, ValueError) as exc:
                    raise ParseFailureError(
                        f"page {page_index} item {position} does not match the comment schema: {exc}"
                    ) from exc
                # re-fetching a page must not duplicate records
                if record.comment_id in seen:
                    continue
                seen.add(record.comment_id)
                records.append(record)
            logger.info("Fetched page %d for '%s' (%d records so far)", page_index, channel_id, len(records))
            if not token:
                break

        return records


def fetch_comments(endpoint, channel_id, page_limit, credentials=None, timeout=DEFAULT_TIMEOUT):
    return CommentFetcher(endpoint, credentials, timeout).fetch(channel_id, page_limit)
