"""Batch conversion of scenario directories into spline files and reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import re
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .converter import ConversionConfig, SplineResult, generate_spline
from .errors import ConversionError
from .fidelity import FidelityReport, score_result
from .ingest import DEFAULT_JSON_POINTER, load_scenario, parse_xodr, resolve_pointer
from .render import render_svg
from .resim import SimOutcome, VehicleConfig, simulate
from .validate import ValidityReport, check_validity

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("campaign", "pass", "fail", "total", "exe_time", "pass_percent")
SCENARIO_SUFFIXES = (".xodr", ".json")


@dataclass(frozen=True)
class BatchOptions:
    config: ConversionConfig = field(default_factory=ConversionConfig)
    json_pointer: str = DEFAULT_JSON_POINTER
    pairing: str = "nearest"
    validate: bool = False
    resim: bool = False
    lane: str = "center"
    vehicle: VehicleConfig = field(default_factory=VehicleConfig)
    figures: bool = False
    jobs: int = 1


@dataclass
class RoadRecord:
    campaign: str
    road_id: str
    source: str
    error: tuple[str, str] | None = None
    result: SplineResult | None = None
    fidelity: FidelityReport | None = None
    validity: ValidityReport | None = None
    outcome: SimOutcome | None = None
    warnings: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def converted(self) -> bool:
        return self.error is None


@dataclass
class CampaignSummary:
    campaign_id: str
    total: int = 0
    converted: int = 0
    conversion_errors: int = 0
    valid: int = 0
    sim_pass: int = 0
    sim_fail: int = 0
    exe_time: float = 0.0  # simulated driving time, seconds
    wall_time: float = 0.0

    @property
    def simulated(self) -> int:
        return self.sim_pass + self.sim_fail

    @property
    def pass_percent(self) -> float | None:
        return 100.0 * self.sim_pass / self.simulated if self.simulated else None

    def check(self) -> None:
        assert self.converted + self.conversion_errors == self.total, self
        assert 0 <= self.valid <= self.converted, self
        assert self.simulated <= self.converted, self
        if self.pass_percent is not None:
            assert 0.0 <= self.pass_percent <= 100.0, self

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("wall_time")
        d["pass_percent"] = self.pass_percent
        return d


# ---------------------------------------------------------------------------
# per-file work (runs in worker processes)
# ---------------------------------------------------------------------------


def _scenario_id(path: Path, text_source: bytes, json_pointer: str) -> str:
    if path.suffix.lower() != ".json":
        return path.stem
    try:
        value = resolve_pointer(json.loads(text_source), "/road_id")
    except (ConversionError, ValueError):
        return path.stem
    if not isinstance(value, (str, int)) or isinstance(value, bool):
        return path.stem
    # road ids become file names
    return re.sub(r"[^\w.-]", "_", str(value)) or path.stem


def _convert_road(record: RoadRecord, road, opts: BatchOptions) -> None:
    try:
        record.result = generate_spline(road, opts.config)
        record.fidelity = score_result(record.result, opts.pairing)
        if opts.validate or opts.resim:
            record.validity = check_validity(record.result)
        if opts.resim:
            record.outcome = simulate(record.result, opts.vehicle, opts.lane, record.validity)
    except ConversionError as exc:
        record.error = (exc.kind, str(exc))
        record.result = record.fidelity = record.validity = record.outcome = None


def process_file(path: str | Path, campaign: str, opts: BatchOptions) -> list[RoadRecord]:
    """Convert every road in one scenario file; failures become error records."""
    path = Path(path)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            raw = path.read_bytes()
            scenario = _scenario_id(path, raw, opts.json_pointer)
            text = load_scenario(raw, "json" if path.suffix.lower() == ".json" else "xodr", opts.json_pointer)
            network = parse_xodr(text, scenario)
        except (ConversionError, OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            kind = exc.kind if isinstance(exc, ConversionError) else type(exc).__name__
            rec = RoadRecord(campaign, path.stem, path.name, error=(kind, str(exc)))
            rec.warnings = [str(w.message) for w in caught]
            return [rec]
        file_warnings = [str(w.message) for w in caught]

    records = []
    single = len(network.roads) == 1
    for road in network.roads:
        road_id = scenario if single else f"{scenario}__{road.id}"
        rec = RoadRecord(campaign, road_id, path.name, warnings=list(file_warnings))
        tic = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            _convert_road(rec, road, opts)
        rec.seconds = time.perf_counter() - tic
        rec.warnings += [str(w.message) for w in caught]
        records.append(rec)
    return records


def _process_star(args):
    return process_file(*args)


# ---------------------------------------------------------------------------
# discovery, serialization, driver
# ---------------------------------------------------------------------------


def discover(input_path) -> list[tuple[Path, str]]:
    """Scenario files with their campaign name, sorted by campaign then path.

    Files directly inside the input directory belong to a campaign named
    after that directory; files in subdirectories belong to the first-level
    subdirectory.
    """
    root = Path(input_path)
    if root.is_file():
        return [(root, root.parent.name or "default")]
    if not root.is_dir():
        raise FileNotFoundError(f"input not found: {root}")
    found = []
    for p in root.rglob("*"):
        if p.is_file() and p.suffix.lower() in SCENARIO_SUFFIXES:
            rel = p.relative_to(root)
            campaign = rel.parts[0] if len(rel.parts) > 1 else (root.name or "default")
            found.append((p, campaign))
    return sorted(found, key=lambda item: (item[1], str(item[0].relative_to(root))))


def round_floats(obj):
    """Round every float to 9 significant digits for stable serialization."""
    if isinstance(obj, (float, np.floating)):
        return float(format(float(obj), ".9g"))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist())
    return obj


def _dumps(obj, indent=None) -> str:
    return json.dumps(round_floats(obj), indent=indent, allow_nan=False) + "\n"


def _report(rec: RoadRecord) -> dict:
    return {
        "road_id": rec.road_id,
        "campaign": rec.campaign,
        "source": rec.source,
        "status": "converted" if rec.converted else "error",
        "error": {"kind": rec.error[0], "message": rec.error[1]} if rec.error else None,
        "fidelity": rec.fidelity.to_json() if rec.fidelity else None,
        "validity": rec.validity.to_json() if rec.validity else None,
        "simulation": rec.outcome.to_json() if rec.outcome else None,
        "warnings": rec.warnings,
    }


def write_record(rec: RoadRecord, out_dir: Path, figures: bool = False) -> None:
    folder = out_dir / rec.campaign
    folder.mkdir(parents=True, exist_ok=True)
    stem = folder / rec.road_id
    Path(f"{stem}.report.json").write_text(_dumps(_report(rec), indent=2), encoding="utf-8")
    if rec.result is None:
        return
    Path(f"{stem}.spline.json").write_text(_dumps(rec.result.to_json()), encoding="utf-8")
    oob = rec.outcome.oob_position if rec.outcome else None
    Path(f"{stem}.svg").write_text(render_svg(rec.result, oob), encoding="utf-8")
    if rec.outcome is not None and len(rec.outcome.trace):
        Path(f"{stem}.trace.csv").write_text(rec.outcome.trace_csv(), encoding="utf-8")
    if figures:
        from .plotting import plot_road

        plot_road(rec.result, f"{stem}.png", rec.outcome)


def summarize(records: list[RoadRecord]) -> list[CampaignSummary]:
    by_campaign: dict[str, CampaignSummary] = {}
    for rec in records:
        s = by_campaign.setdefault(rec.campaign, CampaignSummary(rec.campaign))
        s.total += 1
        s.wall_time += rec.seconds
        if not rec.converted:
            s.conversion_errors += 1
            continue
        s.converted += 1
        if rec.validity is not None and rec.validity.valid:
            s.valid += 1
        if rec.outcome is not None:
            if rec.outcome.passed:
                s.sim_pass += 1
            else:
                s.sim_fail += 1
            s.exe_time += rec.outcome.sim_time
    return [by_campaign[k] for k in sorted(by_campaign)]


def summary_csv(summaries: list[CampaignSummary]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for s in summaries:
        pct = s.pass_percent
        writer.writerow(
            [s.campaign_id, s.sim_pass, s.sim_fail, s.total, format(s.exe_time, ".9g"), "" if pct is None else format(pct, ".9g")]
        )
    return buf.getvalue()


def convert_batch(input_path, output_dir, opts: BatchOptions | None = None):
    """Convert, score and optionally validate/simulate every scenario under ``input_path``.

    Returns ``(summaries, records)``. Per-road failures are recorded, never raised.
    """
    opts = opts or BatchOptions()
    out = Path(output_dir)
    files = discover(input_path)
    if not files:
        log.warning("no .xodr or .json scenarios found under %s", input_path)

    jobs = [(str(p), campaign, opts) for p, campaign in files]
    if opts.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
            chunks = list(pool.map(_process_star, jobs, chunksize=max(1, len(jobs) // (4 * opts.jobs))))
    else:
        chunks = [_process_star(job) for job in jobs]
    records = sorted((r for chunk in chunks for r in chunk), key=lambda r: (r.campaign, r.road_id))

    out.mkdir(parents=True, exist_ok=True)
    for rec in records:
        write_record(rec, out, opts.figures)
    summaries = summarize(records)
    for s in summaries:
        s.check()
    (out / "summary.csv").write_text(summary_csv(summaries), encoding="utf-8")
    (out / "summary.json").write_text(_dumps([s.to_json() for s in summaries], indent=2), encoding="utf-8")
    if opts.figures and summaries:
        from .plotting import plot_campaigns

        plot_campaigns(summaries, out / "summary.png")
    return summaries, records
