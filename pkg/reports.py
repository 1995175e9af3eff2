"""
Flat-file outputs: sweep CSVs, resumption sidecars, gnuplot scripts, JSON
summaries and the known-discrepancy ledger.
"""

import csv
import hashlib
import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Set, TextIO, Tuple

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from config import KNOWN_DISCREPANCIES_PATH, TEMPLATES_DIR
from errors import ConfigurationError

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ("i1", "i2", "s_value", "violated")
_LEDGER_KEY = re.compile(r"^(?P<id>[A-Za-z0-9_.-]+)(?:\s*\[max\s+(?P<bound>[^\]]+)\])?$")


def format_float(value: float) -> str:
    """Shortest string that round-trips to the same float."""
    return repr(float(value))


def spec_digest(spec: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a sweep spec."""
    canonical = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def sidecar_path(output: Path) -> Path:
    return Path(f"{output}.spec.json")


def sweep_header(axis_names: Sequence[str], with_signs: bool = False) -> List[str]:
    header = list(axis_names) + list(RESULT_COLUMNS)
    if with_signs:
        header += ["f", "g", "h"]
    return header


def sweep_row_cells(row: Any, with_signs: bool = False) -> List[str]:
    """CSV cells for a SweepRow-like object."""
    cells = [format_float(v) for v in row.params.values()]
    cells += [format_float(row.i1), format_float(row.i2), format_float(row.s_value), str(bool(row.violated)).lower()]
    if with_signs:
        cells += list(row.signs or ("", "", ""))
    return cells


def write_sweep_rows(
    fh: TextIO,
    axis_names: Sequence[str],
    rows: Iterable[Any],
    with_signs: bool = False,
) -> int:
    """Header plus one line per row; line endings are fixed to newline."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(sweep_header(axis_names, with_signs))
    count = 0
    for row in rows:
        writer.writerow(sweep_row_cells(row, with_signs))
        count += 1
    return count


def write_sweep_csv(
    output: Path,
    axis_names: Sequence[str],
    rows: Iterable[Any],
    with_signs: bool = False,
) -> Path:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    with output.open("w", newline="") as fh:
        count = write_sweep_rows(fh, axis_names, rows, with_signs)
    logger.info("Wrote %d rows to %s", count, output)
    return output


def write_table_csv(fh: TextIO, rows: Iterable[Tuple[Tuple[int, ...], float]], n: int) -> None:
    """Probability table as outcome-index columns o1..on plus probability."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([f"o{p + 1}" for p in range(n)] + ["probability"])
    for outcomes, probability in rows:
        writer.writerow([str(o) for o in outcomes] + [format_float(probability)])


def write_sidecar(output: Path, spec: Dict[str, Any]) -> Path:
    path = sidecar_path(output)
    path.write_text(json.dumps({"sha256": spec_digest(spec), "spec": spec}, indent=2, sort_keys=True))
    return path


def load_resumable_rows(output: Path, spec: Dict[str, Any]) -> List[Dict[str, str]]:
    """
    Rows of a previous run of the same spec, as raw CSV dicts.

    Returns nothing when the sidecar is missing or its digest differs, so a
    changed spec starts from scratch.
    """
    output = Path(output)
    sidecar = sidecar_path(output)
    if not output.exists() or not sidecar.exists():
        return []
    try:
        stored = json.loads(sidecar.read_text()).get("sha256")
    except json.JSONDecodeError:
        logger.warning("Ignoring unreadable sidecar %s", sidecar)
        return []
    if stored != spec_digest(spec):
        logger.info("Spec changed since %s was written; starting over", output)
        return []
    with output.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    logger.info("Resuming from %d rows in %s", len(rows), output)
    return rows


def parse_row(raw: Dict[str, str], axis_names: Sequence[str]) -> Tuple[Dict[str, float], Dict[str, Any]]:
    """Split a CSV dict into parameter values and result fields."""
    params = {name: float(raw[name]) for name in axis_names}
    signs = tuple(raw[k] for k in ("f", "g", "h")) if raw.get("f") else None
    fields = {
        "i1": float(raw["i1"]),
        "i2": float(raw["i2"]),
        "s_value": float(raw["s_value"]),
        "violated": raw["violated"] == "true",
        "signs": signs,
    }
    return params, fields


def render_gnuplot(csv_path: Path, axis_names: Sequence[str], title: Optional[str] = None) -> Path:
    """Render templates/region.gp.j2 next to the CSV; returns the script path."""
    if len(axis_names) not in (1, 2):
        raise ConfigurationError("gnuplot output supports 1-D and 2-D sweeps only")
    env = Environment(
        loader=FileSystemLoader(str(TEMPLATES_DIR)),
        undefined=StrictUndefined,
        keep_trailing_newline=True,
    )
    template = env.get_template("region.gp.j2")
    header = sweep_header(axis_names)
    script = template.render(
        csv_name=Path(csv_path).name,
        title=title or Path(csv_path).stem,
        axes=list(axis_names),
        s_column=header.index("s_value") + 1,
        violated_column=header.index("violated") + 1,
    )
    path = Path(csv_path).with_suffix(".gp")
    path.write_text(script)
    logger.info("Wrote gnuplot script %s", path)
    return path


def dump_summary(payload: Any) -> str:
    """Stable JSON for CLI summaries."""
    return json.dumps(payload, indent=2, sort_keys=True)


def load_known_discrepancies(path: Path = KNOWN_DISCREPANCIES_PATH) -> Set[str]:
    """Target ids listed in the ledger as 'id: explanation' lines."""
    return set(read_known_discrepancies(path))


def _ledger_entries(path: Path) -> Iterator[Tuple[str, Optional[float], str]]:
    """(id, computed maximum or None, explanation) per ledger line."""
    path = Path(path)
    if not path.exists():
        logger.warning("Known-discrepancy ledger %s not found", path)
        return
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if ":" not in text:
            raise ConfigurationError(f"{path}:{lineno}: expected 'target-id: explanation'")
        key, explanation = text.split(":", 1)
        match = _LEDGER_KEY.match(key.strip())
        if match is None:
            raise ConfigurationError(f"{path}:{lineno}: malformed target id {key.strip()!r}")
        bound = match.group("bound")
        try:
            value = float(bound) if bound is not None else None
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{lineno}: bound {bound!r} is not a number") from exc
        yield match.group("id"), value, explanation.strip()


def read_known_discrepancies(path: Path = KNOWN_DISCREPANCIES_PATH) -> Dict[str, str]:
    return {target_id: explanation for target_id, _, explanation in _ledger_entries(path)}


def read_ledger_bounds(path: Path = KNOWN_DISCREPANCIES_PATH) -> Dict[str, float]:
    """Computed maxima recorded as 'id [max value]: explanation'."""
    return {target_id: bound for target_id, bound, _ in _ledger_entries(path) if bound is not None}
