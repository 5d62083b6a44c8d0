"""Reading the analysis tool's neuron-selection JSON documents."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ExtractorError


@dataclass(frozen=True)
class Selection:
    class_index: int
    label: str | None
    positive_terminal: list[int]
    negative_terminal: list[int]
    stages: list[dict]  # {"path", "label", "indices"}

    def max_index(self) -> int:
        indices = [i for st in self.stages for i in st["indices"]]
        indices += self.positive_terminal + self.negative_terminal
        return max(indices, default=-1)


def load_selection(path, class_index: int) -> Selection:
    """Pick one class's selection out of a selection document.

    Accepts both the CLI's wrapper document ({"selections": [...]}) and a
    bare selection object.
    """
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    candidates = doc.get("selections", [doc]) if isinstance(doc, dict) else doc
    for sel in candidates:
        if sel.get("class_index") == class_index:
            return Selection(
                class_index=class_index,
                label=sel.get("label"),
                positive_terminal=[int(i) for i in sel["positive_terminal"]],
                negative_terminal=[int(i) for i in sel["negative_terminal"]],
                stages=[
                    {
                        "path": st["path"],
                        "label": st["label"],
                        "indices": [int(i) for i in st["indices"]],
                    }
                    for st in sel.get("stages", [])
                ],
            )
    raise ExtractorError(
        f"{path} holds no selection for class {class_index}"
    )
