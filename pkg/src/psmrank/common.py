"""Shared result container for the scoring methods."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TransferScore:
    """Method-tagged scalar transferability score with provenance.

    ``params`` holds the method hyperparameters that influenced the value
    (projection count, batch size, perplexity, ...) so that any score can be
    reproduced from its record alone.  For ``swd`` and ``tsne`` a larger score
    means a harder transfer; ``logme`` is higher-is-better.
    """

    method: str
    score: float
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def record(self, candidate_id: str) -> dict:
        """Flatten into the JSON score record emitted by the CLI."""
        rec = {"candidate_id": candidate_id, "method": self.method,
               "score": float(self.score)}
        if self.seed is not None:
            rec["seed"] = int(self.seed)
        rec.update(self.params)
        return rec
