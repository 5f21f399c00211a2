"""Discretization of perturbed embeddings and heatmap reports.

A perturbed token discretizes to the neighbor whose unit direction has the
highest cosine similarity with its perturbation, provided the perturbation
actually moved toward that neighbor (positive cosine); otherwise the token
keeps its original word. Projected (spgd) perturbations therefore
discretize to their recorded neighbor exactly when the projection
coefficient is positive. Each cell also carries the plain nearest
vocabulary word to the perturbed point v_i + d_i, shown in parentheses.

Reports render as dependency-free HTML, ANSI text, or JSON; cell intensity
is the perturbation magnitude normalized by the sequence maximum.
"""

from __future__ import annotations

import html as _html
import json
from dataclasses import dataclass

import numpy as np

from advtext.attacks import PerturbationSet
from advtext.errors import SchemaError, StaleIndexError, UsageError
from advtext.neighbors import NeighborIndex, best_direction, embedding_fingerprint

FORMATS = ("html", "ansi", "json")


@dataclass
class AdversarialExample:
    """Everything a report row needs, resolved to plain words."""

    original_ids: np.ndarray
    original_tokens: list
    perturbation: PerturbationSet
    magnitudes: np.ndarray
    discretized_tokens: list
    nearest_tokens: list


def _nearest_rows(points: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Index of the euclidean-nearest row for each point; ties pick the lower id."""
    sq = (points * points).sum(axis=1)[:, None] + (rows * rows).sum(axis=1)[None, :]
    sq -= 2.0 * points @ rows.T
    return sq.argmin(axis=1)


def discretize(original_ids, perturbation: PerturbationSet, index: NeighborIndex,
               embedding: np.ndarray):
    """Map perturbed embeddings back to words.

    Returns (discretized_ids, nearest_ids). The index must come from the
    same embedding snapshot as the perturbations.
    """
    if index.fingerprint != embedding_fingerprint(embedding):
        raise StaleIndexError("neighbor index was built from a different embedding snapshot")
    original_ids = np.asarray(original_ids)
    d = perturbation.vectors
    disc = original_ids.copy()
    for i, word_id in enumerate(original_ids):
        if not d[i].any():
            continue
        if perturbation.chosen_neighbors is not None:
            chosen = int(perturbation.chosen_neighbors[i])
            if chosen > 0:
                ids_i, dirs_i = index.slots_for(int(word_id))
                slot = int(np.flatnonzero(ids_i == chosen)[0])
                if float(d[i] @ dirs_i[slot]) > 0.0:
                    disc[i] = chosen
                continue
        found = best_direction(index, int(word_id), d[i])
        if found is not None and found[1] > 0.0:
            ids_i, _ = index.slots_for(int(word_id))
            disc[i] = int(ids_i[found[0]])

    vocab_rows = embedding[: index.n_words]
    points = embedding[original_ids - 1] + d
    nearest = _nearest_rows(points, vocab_rows) + 1
    return disc, nearest.astype(np.int64)


def build_example(original_ids, perturbation: PerturbationSet, index: NeighborIndex,
                  embedding: np.ndarray, vocab) -> AdversarialExample:
    """Discretize and resolve an attacked sequence into report words."""
    disc_ids, nearest_ids = discretize(original_ids, perturbation, index, embedding)

    def tokens(ids):
        return [vocab.tokens[i - 1] for i in ids]

    return AdversarialExample(
        original_ids=np.asarray(original_ids),
        original_tokens=tokens(original_ids),
        perturbation=perturbation,
        magnitudes=perturbation.magnitudes,
        discretized_tokens=tokens(disc_ids),
        nearest_tokens=tokens(nearest_ids),
    )


def example_to_json_dict(ex: AdversarialExample) -> dict:
    chosen = ex.perturbation.chosen_neighbors
    return {
        "original_ids": [int(v) for v in ex.original_ids],
        "original_tokens": list(ex.original_tokens),
        "discretized_tokens": list(ex.discretized_tokens),
        "nearest_tokens": list(ex.nearest_tokens),
        "magnitudes": [float(v) for v in ex.magnitudes],
        "kept_mask": [bool(v) for v in ex.perturbation.kept_mask],
        "chosen_neighbor_ids": None if chosen is None
        else [int(v) if v > 0 else None for v in chosen],
    }


def _intensities(ex: AdversarialExample) -> np.ndarray:
    peak = float(ex.magnitudes.max()) if len(ex.magnitudes) else 0.0
    if peak == 0.0:
        return np.zeros(len(ex.magnitudes))
    return ex.magnitudes / peak


def _render_html(examples) -> str:
    parts = [
        "<!doctype html><html><head><meta charset=\"utf-8\">",
        "<title>Adversarial sequence report</title></head>",
        "<body style=\"font-family: sans-serif;\">",
        "<h1>Adversarial sequences</h1>",
    ]
    for n, ex in enumerate(examples, start=1):
        cells = []
        for tok_disc, tok_near, a in zip(ex.discretized_tokens, ex.nearest_tokens,
                                         _intensities(ex)):
            text = _html.escape(f"{tok_disc} ({tok_near})")
            cells.append(
                f"<td style=\"border:1px solid #ccc; padding:4px;"
                f" background: rgba(220,20,60,{a:.3f});\">{text}</td>"
            )
        original = _html.escape(" ".join(ex.original_tokens))
        parts.append(f"<h3>Example {n}</h3>")
        parts.append("<table style=\"border-collapse: collapse;\"><tr>"
                     + "".join(cells) + "</tr></table>")
        parts.append(f"<p><em>original:</em> {original}</p>")
    parts.append("</body></html>")
    return "\n".join(parts)


def _render_ansi(examples) -> str:
    lines = []
    for n, ex in enumerate(examples, start=1):
        cells = []
        for tok_disc, tok_near, a in zip(ex.discretized_tokens, ex.nearest_tokens,
                                         _intensities(ex)):
            level = 255 - int(round(180 * a))
            cells.append(f"\x1b[48;2;255;{level};{level}m {tok_disc} ({tok_near}) \x1b[0m")
        lines.append(f"example {n}:")
        lines.append("".join(cells))
        lines.append("original:  " + " ".join(ex.original_tokens))
        lines.append("")
    return "\n".join(lines)


def render(examples, fmt: str) -> str:
    """Render AdversarialExamples to an html/ansi/json report string."""
    if fmt not in FORMATS:
        raise UsageError(f"unsupported report format {fmt!r}; choose from {FORMATS}")
    if fmt == "html":
        return _render_html(examples)
    if fmt == "ansi":
        return _render_ansi(examples)
    payload = {"examples": [example_to_json_dict(ex) for ex in examples]}
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def validate_report_data(data) -> None:
    """Check a parsed JSON report against the documented schema.

    Raises SchemaError on the first violation. The schema is described in
    docs/report-schema.md.
    """
    def fail(msg):
        raise SchemaError(msg)

    if not isinstance(data, dict) or set(data) != {"examples"}:
        fail("top level must be an object with the single key 'examples'")
    if not isinstance(data["examples"], list):
        fail("'examples' must be an array")
    for n, ex in enumerate(data["examples"]):
        where = f"examples[{n}]"
        if not isinstance(ex, dict):
            fail(f"{where} must be an object")
        expected = {"original_ids", "original_tokens", "discretized_tokens",
                    "nearest_tokens", "magnitudes", "kept_mask", "chosen_neighbor_ids"}
        if set(ex) != expected:
            fail(f"{where} must have exactly the keys {sorted(expected)}")
        length = len(ex["original_ids"])
        for key in ("original_tokens", "discretized_tokens", "nearest_tokens",
                    "magnitudes", "kept_mask"):
            if not isinstance(ex[key], list) or len(ex[key]) != length:
                fail(f"{where}.{key} must be an array of length {length}")
        if not all(isinstance(v, int) and v >= 1 for v in ex["original_ids"]):
            fail(f"{where}.original_ids must be positive integers")
        for key in ("original_tokens", "discretized_tokens", "nearest_tokens"):
            if not all(isinstance(v, str) for v in ex[key]):
                fail(f"{where}.{key} must contain strings")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0
                   for v in ex["magnitudes"]):
            fail(f"{where}.magnitudes must contain non-negative numbers")
        if not all(isinstance(v, bool) for v in ex["kept_mask"]):
            fail(f"{where}.kept_mask must contain booleans")
        chosen = ex["chosen_neighbor_ids"]
        if chosen is not None:
            if not isinstance(chosen, list) or len(chosen) != length:
                fail(f"{where}.chosen_neighbor_ids must be null or an array of length {length}")
            if not all(v is None or (isinstance(v, int) and v >= 1) for v in chosen):
                fail(f"{where}.chosen_neighbor_ids entries must be null or positive integers")
