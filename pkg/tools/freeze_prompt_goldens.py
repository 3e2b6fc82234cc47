#!/usr/bin/env python3
"""Render every prompt template with fixed sample slots and freeze the bytes
under tests/goldens/. Run once; the test suite compares against these files
byte-for-byte thereafter."""

from pathlib import Path

from qudeval.llmgate import render_prompt
from qudeval.prompts import TEMPLATES

SAMPLE_SLOTS = {
    "context": "1 Rivers crossed the valley. 2 Farmers watched the water rise.",
    "target_answer": "Farmers watched the water rise.",
    "question": "What did farmers watch?",
    "answer": "Farmers watched the water rise.",
    "anchor": "Rivers crossed the valley.",
    "article": "Rivers crossed the valley. Farmers watched the water rise.",
    "generated_answer": "The farmers watched the rising water.",
    "reference_question": "What rose in the valley?",
    "candidate_question": "What did farmers watch?",
}


def main() -> None:
    out_dir = Path(__file__).resolve().parent.parent / "tests" / "goldens"
    out_dir.mkdir(parents=True, exist_ok=True)
    for template_id, template in sorted(TEMPLATES.items()):
        slots = {name: SAMPLE_SLOTS[name] for name in template.required_slots}
        rendered = render_prompt(template_id, slots)
        (out_dir / f"{template_id}.txt").write_text(rendered, encoding="utf-8")
        print(f"froze {template_id} ({len(rendered)} bytes)")


if __name__ == "__main__":
    main()
