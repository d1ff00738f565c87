"""Evaluation runs: model sources, request fan-out, parsing, and scoring.

A run sends every manifest sample to one model source (in-process reference
model, remote chat-completions endpoint, or offline response file), parses
the responses per approach, and aggregates a MetricReport. Raw responses are
appended to a JSONL record log, and re-running skips ids already logged.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import requests
from PIL import Image

from .builder import Sample, scene_for
from .manifest import read_manifest
from .metrics import MatchResult, MetricReport, consistency, exact_match, match_continuous, match_grid, summarize
from .parsing import ParsedResponse, extract_coords, parse_response, predicted_count
from .prompts import Approach, approach_prompt, budget_for
from .refmodels import NoiseConfig, noisy_oracle, perfect_oracle, pixel_counter
from .render import black_image, load_png, render

__all__ = [
    "EndpointUnreachable",
    "OfflineMissingResponse",
    "RunConfig",
    "RunResult",
    "OracleModel",
    "NoisyModel",
    "PixelModel",
    "PrefillCounterModel",
    "OfflineModel",
    "EndpointModel",
    "make_model",
    "evaluate_run",
]


class EndpointUnreachable(RuntimeError):
    """Endpoint still failing after the retry budget."""


class OfflineMissingResponse(KeyError):
    """Offline response file lacks a sample id from the manifest."""


@dataclass
class RunConfig:
    """One evaluation run: exactly one model source."""

    manifest: str
    model: str = "oracle"                    # oracle | noisy | pixel | prefill | endpoint | offline
    approach: Approach = Approach.PTC
    noise: NoiseConfig | None = None
    endpoint_url: str | None = None
    endpoint_model: str | None = None
    token_env: str = "GRIDCOUNT_API_TOKEN"   # token read from env, never logged
    offline_responses: str | None = None
    images_root: str | None = None
    max_new_tokens: int | None = None
    finetuned: bool = False
    concurrency: int = 4
    retries: int = 3
    timeout: float = 120.0
    out_dir: str | None = None
    seed: int = 0
    decimals: bool = False                   # parse real-world decimal coords
    tau: float = 5.0
    dims: tuple[int, int] = (9, 9)

    def budget(self) -> int:
        if self.max_new_tokens is not None:
            return self.max_new_tokens
        return budget_for(self.approach, self.finetuned)


def _image_for(sample: Sample, images_root: str | None) -> np.ndarray:
    """Load the sample's PNG if it exists, else re-render from the manifest."""
    if images_root is not None:
        path = Path(images_root) / sample.image_path
        if path.exists():
            return load_png(path)
    if sample.image_path == "black.png":
        return black_image()
    return render(scene_for(sample))


class OracleModel:
    """Perfect ground-truth responder."""

    def __init__(self, approach: Approach):
        self.approach = approach

    def respond(self, sample: Sample, prompt: str, images_root: str | None) -> str:
        return perfect_oracle(sample, self.approach)


class NoisyModel:
    def __init__(self, cfg: NoiseConfig, seed: int):
        self.cfg = cfg
        self.seed = seed

    def respond(self, sample: Sample, prompt: str, images_root: str | None) -> str:
        return noisy_oracle(sample, self.cfg, self.seed)


class PixelModel:
    """Classical-vision counter over the rendered image."""

    def respond(self, sample: Sample, prompt: str, images_root: str | None) -> str:
        return pixel_counter(_image_for(sample, images_root), sample.query)


class PrefillCounterModel:
    """Stub that counts the coordinate tuples in its prefill (ablation
    self-test: a prefix-counting model must score 100% on black-image sets)."""

    def respond(self, sample: Sample, prompt: str, images_root: str | None) -> str:
        n = len(extract_coords(sample.prefill or ""))
        return f" {n}"


class OfflineModel:
    """Joins responses from a JSONL file of {id, response_text} by sample id."""

    def __init__(self, path: str):
        self.responses: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    self.responses[rec["id"]] = rec["response_text"]

    def respond(self, sample: Sample, prompt: str, images_root: str | None) -> str:
        if sample.id not in self.responses:
            raise OfflineMissingResponse(sample.id)
        return self.responses[sample.id]


class EndpointModel:
    """Chat-completions client: base64 image part plus text part, greedy
    decoding requested via temperature 0."""

    def __init__(self, cfg: RunConfig):
        if not cfg.endpoint_url:
            raise ValueError("endpoint model requires endpoint_url")
        self.url = cfg.endpoint_url
        self.model = cfg.endpoint_model or "default"
        self.token = os.environ.get(cfg.token_env, "")
        self.budget = cfg.budget()
        self.retries = cfg.retries
        self.timeout = cfg.timeout

    @staticmethod
    def _encode_image(image: np.ndarray) -> str:
        buf = io.BytesIO()
        Image.fromarray(image, mode="RGB").save(buf, format="PNG")
        return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")

    def payload(self, sample: Sample, prompt: str, images_root: str | None) -> dict:
        image_uri = self._encode_image(_image_for(sample, images_root))
        messages = [
            {
                "role": "user",
                "content": [
                    {"type": "image_url", "image_url": {"url": image_uri}},
                    {"type": "text", "text": prompt},
                ],
            }
        ]
        if sample.prefill:
            messages.append({"role": "assistant", "content": sample.prefill})
        return {
            "model": self.model,
            "messages": messages,
            "temperature": 0,
            "max_tokens": self.budget,
        }

    def respond(self, sample: Sample, prompt: str, images_root: str | None) -> str:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        body = self.payload(sample, prompt, images_root)
        last_err: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = requests.post(self.url, json=body, headers=headers, timeout=self.timeout)
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except Exception as err:  # noqa: BLE001 - every failure is retriable here
                last_err = err
                if attempt < self.retries:
                    time.sleep(min(2.0**attempt, 30.0))
        raise EndpointUnreachable(str(last_err))


def make_model(cfg: RunConfig):
    if cfg.model == "oracle":
        return OracleModel(cfg.approach)
    if cfg.model == "noisy":
        return NoisyModel(cfg.noise or NoiseConfig(), cfg.seed)
    if cfg.model == "pixel":
        return PixelModel()
    if cfg.model == "prefill":
        return PrefillCounterModel()
    if cfg.model == "offline":
        if not cfg.offline_responses:
            raise ValueError("offline model requires offline_responses path")
        return OfflineModel(cfg.offline_responses)
    if cfg.model == "endpoint":
        return EndpointModel(cfg)
    raise ValueError(f"unknown model source {cfg.model!r}")


@dataclass
class SampleOutcome:
    sample: Sample
    response: str
    parsed: ParsedResponse
    pred: int
    match: MatchResult | None
    em: bool | None
    consistent: bool | None
    latency_ms: float = 0.0
    error: str | None = None


@dataclass
class RunResult:
    report: MetricReport
    outcomes: list[SampleOutcome] = field(default_factory=list)


def _prompt_for(sample: Sample, approach: Approach) -> str:
    text = approach_prompt(approach)
    if approach is Approach.LTC:
        return f"{text}\n{sample.query}"
    return f"{sample.query}\n{text}"


_POINTING = (Approach.PTC, Approach.COORD_COUNT)


def score_response(
    sample: Sample, response: str, approach: Approach, decimals: bool = False,
    tau: float = 5.0, dims: tuple[int, int] = (9, 9),
) -> SampleOutcome:
    """Parse one response and compute its per-sample metrics.

    For samples carrying an assistant prefill, the prefill is prepended
    before parsing so the standard extraction rules apply to the full
    generation.
    """
    text = (sample.prefill + response) if sample.prefill else response
    parsed = parse_response(text, decimals=decimals)
    pred = predicted_count(parsed, approach)
    match = em = cons = None
    if approach in _POINTING:
        if decimals:
            match = match_continuous(parsed.coords, list(sample.coords), tau=tau, sample_id=sample.id)
        else:
            match = match_grid(parsed.coords, sample.coords, dims=dims, sample_id=sample.id)
            em = exact_match(parsed.coords, sample.coords)
        cons = consistency(parsed)
    return SampleOutcome(
        sample=sample, response=response, parsed=parsed, pred=pred,
        match=match, em=em, consistent=cons,
    )


def _record_line(outcome: SampleOutcome, payload_digest: str) -> dict:
    return {
        "id": outcome.sample.id,
        "payload_digest": payload_digest,
        "response": outcome.response,
        "pred": outcome.pred,
        "latency_ms": round(outcome.latency_ms, 3),
        "error": outcome.error,
    }


def evaluate_run(cfg: RunConfig, samples: Sequence[Sample] | None = None) -> RunResult:
    """Run one evaluation end to end.

    Responses already present in the run's record log are not re-requested;
    their stored text is re-scored, so interrupted runs resume cleanly.
    """
    if samples is None:
        samples = read_manifest(cfg.manifest)
    model = make_model(cfg)

    log_path = None
    previous: dict[str, str] = {}
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        log_path = out / "records.jsonl"
        if log_path.exists():
            with open(log_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        if rec.get("error") is None:
                            previous[rec["id"]] = rec["response"]

    def fetch(sample: Sample) -> tuple[Sample, str, float, str | None]:
        prompt = _prompt_for(sample, cfg.approach)
        start = time.perf_counter()
        try:
            response = model.respond(sample, prompt, cfg.images_root)
            return sample, response, (time.perf_counter() - start) * 1e3, None
        except EndpointUnreachable as err:
            # recorded as an error with answer -1; the run keeps going
            return sample, "", (time.perf_counter() - start) * 1e3, str(err)

    todo = [s for s in samples if s.id not in previous]
    fetched: dict[str, tuple[str, float, str | None]] = {}
    if cfg.model == "endpoint" and cfg.concurrency > 1 and todo:
        with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
            for sample, response, latency, error in pool.map(fetch, todo):
                fetched[sample.id] = (response, latency, error)
    else:
        for sample in todo:
            sample, response, latency, error = fetch(sample)
            fetched[sample.id] = (response, latency, error)

    outcomes: list[SampleOutcome] = []
    log_fh = open(log_path, "a", encoding="utf-8") if log_path else None
    try:
        for sample in samples:
            if sample.id in previous:
                response, latency, error = previous[sample.id], 0.0, None
                fresh = False
            else:
                response, latency, error = fetched[sample.id]
                fresh = True
            outcome = score_response(
                sample, response, cfg.approach, decimals=cfg.decimals,
                tau=cfg.tau, dims=cfg.dims,
            )
            outcome.latency_ms = latency
            outcome.error = error
            if error is not None:
                outcome.pred = -1
            outcomes.append(outcome)
            if log_fh is not None and fresh:
                prompt = _prompt_for(sample, cfg.approach)
                digest = hashlib.sha256(
                    (sample.image_path + "\x00" + prompt).encode("utf-8")
                ).hexdigest()[:16]
                log_fh.write(json.dumps(_record_line(outcome, digest)) + "\n")
    finally:
        if log_fh is not None:
            log_fh.close()

    matches = [o.match for o in outcomes]
    has_matches = all(m is not None for m in matches) and len(matches) > 0
    ems = [o.em for o in outcomes if o.em is not None]
    cons = [o.consistent for o in outcomes if o.consistent is not None]
    report = summarize(
        preds=[o.pred for o in outcomes],
        labels=[o.sample.label for o in outcomes],
        matches=matches if has_matches else None,
        ems=ems if ems else None,
        consistencies=cons if cons else None,
        dims=cfg.dims,
    )
    if cfg.out_dir:
        with open(Path(cfg.out_dir) / "metrics.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    return RunResult(report=report, outcomes=outcomes)
