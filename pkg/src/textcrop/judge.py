"""Free-form answer grading through an HTTP chat-completions endpoint.

The transport is injectable so tests (and offline runs) can grade
without a network. Verdicts are a strict first-token YES/NO protocol;
one clarifying reprompt is allowed before a response counts as
unparseable and its sample is excluded from scoring.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import requests

from .errors import JudgeParseError, JudgeTransportError
from .harness import ResponseRecord, Sample, extract_final_answer
from .prompts import render

TOKEN_ENV = "TEXTCROP_JUDGE_TOKEN"

_RETRYABLE_STATUS = (429, 500, 502, 503, 504)
_REPROMPT = "Reply with YES or NO as the first word of your response."


@dataclass(frozen=True)
class JudgeConfig:
    """Connection and retry settings for the judge endpoint."""

    endpoint: str
    model: str
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 1.0
    backoff_cap: float = 30.0


def parse_verdict(text: str) -> bool:
    """Read a YES/NO verdict from the first word of a judge reply."""
    words = text.split()
    if words:
        head = words[0].strip(".,:;!?\"'").upper()
        if head == "YES":
            return True
        if head == "NO":
            return False
    raise JudgeParseError(f"verdict does not start with YES or NO: {text[:80]!r}")


class JudgeClient:
    """Sends chat messages to the judge model and reads back verdicts.

    ``transport`` takes the JSON payload dict and returns the decoded
    response dict; the default posts to the configured endpoint with a
    bearer token from the environment and retries transient failures
    with capped exponential backoff.
    """

    def __init__(self, config: JudgeConfig,
                 transport: Callable[[dict], dict] | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self._transport = transport or self._http_transport
        self._sleep = sleep

    def _http_transport(self, payload: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self._sleep(min(self.config.backoff_cap,
                                self.config.backoff_base * 2 ** (attempt - 1)))
            try:
                resp = requests.post(self.config.endpoint, json=payload,
                                     headers=headers, timeout=self.config.timeout)
            except requests.RequestException as exc:
                last = exc
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last = JudgeTransportError(
                    f"judge endpoint returned {resp.status_code}"
                )
                continue
            if resp.status_code != 200:
                raise JudgeTransportError(
                    f"judge endpoint returned {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()
            except ValueError as exc:
                raise JudgeTransportError(f"judge response is not JSON: {exc}") from exc
        raise JudgeTransportError(
            f"judge endpoint unreachable after {self.config.max_retries + 1} attempts: {last}"
        )

    def complete(self, messages: list[dict]) -> str:
        """One round trip: messages in, assistant text out."""
        payload = {"model": self.config.model, "messages": messages}
        data = self._transport(payload)
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise JudgeTransportError(
                f"judge response missing choices[0].message.content: {data!r:.200}"
            ) from exc
        if not isinstance(content, str):
            raise JudgeTransportError("judge message content is not text")
        return content

    def judge_free_form(self, question: str, reference: str, candidate: str) -> bool:
        """Grade one answer, allowing a single clarifying reprompt."""
        prompt = render("judge", {
            "question": question,
            "reference": reference,
            "candidate": candidate,
        })
        messages = [{"role": "user", "content": prompt}]
        reply = self.complete(messages)
        try:
            return parse_verdict(reply)
        except JudgeParseError:
            messages = messages + [
                {"role": "assistant", "content": reply},
                {"role": "user", "content": _REPROMPT},
            ]
            return parse_verdict(self.complete(messages))


@dataclass
class JudgeRunResult:
    """Verdicts keyed by sample id plus the ids the judge failed to grade."""

    verdicts: dict[str, bool] = field(default_factory=dict)
    unparseable: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdicts": {k: self.verdicts[k] for k in sorted(self.verdicts)},
            "unparseable": sorted(self.unparseable),
        }


def judge_run(client: JudgeClient, samples: Sequence[Sample],
              responses: Sequence[ResponseRecord], workers: int = 1) -> JudgeRunResult:
    """Grade every responded sample, optionally in parallel.

    Work is submitted in sorted-id order and merged deterministically, so
    thread count never changes the result. Transport failures abort the
    run; unparseable verdicts only exclude their sample.
    """
    by_id = {s.id: s for s in samples}
    tasks = []
    for rec in responses:
        sample = by_id.get(rec.id)
        if sample is None:
            continue
        question = sample.question or ""
        tasks.append((rec.id, question, sample.answer, extract_final_answer(rec.text)))
    tasks.sort(key=lambda t: t[0])

    result = JudgeRunResult()

    def grade(task):
        rec_id, question, reference, candidate = task
        try:
            return rec_id, client.judge_free_form(question, reference, candidate)
        except JudgeParseError:
            return rec_id, None

    if workers <= 1:
        graded = map(grade, tasks)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            graded = list(pool.map(grade, tasks))
    for rec_id, verdict in graded:
        if verdict is None:
            result.unparseable.append(rec_id)
        else:
            result.verdicts[rec_id] = verdict
    return result


def score_with_judge(client: JudgeClient, samples: Sequence[Sample],
                     responses: Sequence[ResponseRecord],
                     workers: int = 1) -> tuple[Mapping[str, bool], list[str]]:
    """Convenience wrapper returning (verdicts, unparseable ids)."""
    run = judge_run(client, samples, responses, workers=workers)
    return run.verdicts, run.unparseable
