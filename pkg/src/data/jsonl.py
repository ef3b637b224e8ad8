"""JSONL persistence of samples."""
import json
import logging
from pathlib import Path
from typing import List, Sequence, Union

from src.data.samples import Sample
from src.errors import InvalidInputError, ParseError
from src.utils.io import atomic_write_text

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ("patient_id", "study_id", "label", "text", "image")


def sample_to_dict(sample: Sample) -> dict:
    return {
        "patient_id": sample.patient_id,
        "study_id": sample.study_id,
        "label": sample.label,
        "text": sample.text,
        # float32 -> Python float is exact, and json writes the shortest round-trip repr
        "image": [float(v) for v in sample.image],
    }


def save_jsonl(samples: Sequence[Sample], path: Union[str, Path]) -> Path:
    """Write one JSON object per line, atomically."""
    lines = [json.dumps(sample_to_dict(s), separators=(",", ":")) for s in samples]
    path = atomic_write_text(path, "".join(line + "\n" for line in lines))
    logger.info(f"Wrote {len(samples)} samples to {path}")
    return path


def _parse_line(line: str, line_number: int) -> Sample:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {line_number}: malformed JSON ({e.msg})", line_number) from e
    if not isinstance(obj, dict):
        raise ParseError(f"line {line_number}: expected a JSON object", line_number)
    missing = [k for k in REQUIRED_KEYS if k not in obj]
    if missing:
        raise ParseError(f"line {line_number}: missing keys {missing}", line_number)
    try:
        return Sample(
            patient_id=int(obj["patient_id"]),
            study_id=int(obj["study_id"]),
            image=obj["image"],
            text=str(obj["text"]),
            label=int(obj["label"]),
        )
    except (InvalidInputError, TypeError, ValueError) as e:
        raise ParseError(f"line {line_number}: {e}", line_number) from e


def load_jsonl(path: Union[str, Path]) -> List[Sample]:
    """
    Read samples written by save_jsonl.

    Blank lines are ignored; an empty file yields an empty list.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ParseError: On the first malformed line, carrying its 1-based number
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    samples = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            samples.append(_parse_line(line, line_number))
    return samples
