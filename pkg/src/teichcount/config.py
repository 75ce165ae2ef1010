"""Run configuration shared by every CLI subcommand."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    jobs: int = 1
    out: str | None = None
    tol_incircle: float = 1e-10
    tol_quad: float = 1e-12
    fd_step: float = 1e-5
    epsilon0: float = 0.25

    def __post_init__(self):
        for name in ("tol_incircle", "tol_quad", "fd_step", "epsilon0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    @classmethod
    def load(cls, path) -> "RunConfig":
        text = Path(path).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"{path}: unknown field(s) {sorted(extra)}")
        return cls(**doc)

    def override(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)
