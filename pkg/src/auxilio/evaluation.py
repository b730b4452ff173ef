"""Study metrics: pointing trials, typing performance, variance tests, SUS.

All functions here are pure and reentrant.  Percentiles use linear
interpolation at rank (n-1)*q; standard deviations are sample (n-1) unless
noted.  MissTypes is the unit-cost edit distance between the typed string and
the target (well-posed because the typing task disables backspace), accuracy
is (L - MissTypes)/L over the target length, WPM uses target length / 5 and
CPM uses the typed length.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

POPPER_WIDTHS = (32.0, 64.0, 96.0, 128.0)

SUS_ITEMS = 10
SUS_MIN_RATING = 1
SUS_MAX_RATING = 5

# Curved grade bands over the 0-100 score range, highest first.
SUS_GRADE_BANDS: tuple[tuple[float, str], ...] = (
    (84.1, "A+"),
    (80.8, "A"),
    (78.9, "A-"),
    (77.2, "B+"),
    (74.1, "B"),
    (72.6, "B-"),
    (71.1, "C+"),
    (65.0, "C"),
    (62.7, "C-"),
    (51.7, "D"),
)


class DegenerateVariance(ValueError):
    """The denominator sample has zero variance; the F ratio is undefined."""


# -- pointing ---------------------------------------------------------------


@dataclass(frozen=True)
class TrialRecord:
    """One pointing trial: target appearance to the in-target click."""

    trial: int
    width: float
    center: tuple[float, float]
    path: list[tuple[float, float]]
    t_start: float
    t_end: float
    miss_clicks: int = 0

    def __post_init__(self) -> None:
        if not self.path:
            raise ValueError("trial path must be non-empty")
        if self.t_end < self.t_start:
            raise ValueError("t_end must be >= t_start")
        if self.miss_clicks < 0:
            raise ValueError("miss_clicks must be >= 0")
        if self.width not in POPPER_WIDTHS:
            warnings.warn(
                f"trial {self.trial}: width {self.width} px is not a standard "
                f"session width {tuple(int(w) for w in POPPER_WIDTHS)}",
                stacklevel=2,
            )


def path_length(path: Sequence[tuple[float, float]]) -> float:
    """Sum of Euclidean distances between consecutive path points."""
    if not path:
        raise ValueError("path must be non-empty")
    total = 0.0
    for (x0, y0), (x1, y1) in zip(path, path[1:]):
        total += math.hypot(x1 - x0, y1 - y0)
    return total


def completion_time(trial: TrialRecord) -> float:
    """Trial duration; trials with miss-clicks are retained, not rejected."""
    return trial.t_end - trial.t_start


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    mean: float
    sd: float
    minimum: float
    p25: float
    p50: float
    p75: float
    maximum: float
    degenerate: bool = False  # n == 1: sd undefined, reported as 0


def _percentile(sorted_values: Sequence[float], q: float) -> float:
    pos = (len(sorted_values) - 1) * q
    lo = math.floor(pos)
    hi = math.ceil(pos)
    if lo == hi:
        return sorted_values[lo]
    return sorted_values[lo] + (pos - lo) * (sorted_values[hi] - sorted_values[lo])


def descriptive_stats(values: Sequence[float]) -> DescriptiveStats:
    if not values:
        raise ValueError("need at least one value")
    n = len(values)
    ordered = sorted(values)
    mean = sum(ordered) / n
    if n > 1:
        sd = math.sqrt(sum((v - mean) ** 2 for v in ordered) / (n - 1))
        degenerate = False
    else:
        sd = 0.0
        degenerate = True
    return DescriptiveStats(
        n=n,
        mean=mean,
        sd=sd,
        minimum=ordered[0],
        p25=_percentile(ordered, 0.25),
        p50=_percentile(ordered, 0.50),
        p75=_percentile(ordered, 0.75),
        maximum=ordered[-1],
        degenerate=degenerate,
    )


# -- typing -------------------------------------------------------------------


@dataclass(frozen=True)
class TypingRecord:
    target: str
    typed: str
    keystrokes: int
    t_appear: float
    t_first_key: float
    t_enter: float

    def __post_init__(self) -> None:
        if not (self.t_appear <= self.t_first_key <= self.t_enter):
            raise ValueError("need t_appear <= t_first_key <= t_enter")
        if self.keystrokes < len(self.typed):
            raise ValueError("keystrokes cannot be fewer than typed characters")


@dataclass(frozen=True)
class TypingMetrics:
    fat: float
    sct: float
    miss_types: int
    accuracy: float
    wpm: float | None
    cpm: float | None
    degenerate: bool = False  # sct == 0: rates undefined


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance, classic two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(
                prev[j] + 1,          # deletion
                cur[j - 1] + 1,       # insertion
                prev[j - 1] + (ca != cb),  # substitution
            ))
        prev = cur
    return prev[-1]


def accuracy_pct(target_len: int, miss_types: float) -> float:
    """(L - M)/L as a percentage, floored at 0."""
    if target_len <= 0:
        raise ValueError("target length must be > 0")
    return max(0.0, (target_len - miss_types) / target_len) * 100.0


def words_per_minute(target_len: int, sct: float) -> float:
    """Five-character words over the sentence completion time."""
    return (target_len / 5.0) / (sct / 60.0)


def chars_per_minute(typed_len: int, sct: float) -> float:
    return typed_len / (sct / 60.0)


def typing_metrics(rec: TypingRecord) -> TypingMetrics:
    fat = rec.t_first_key - rec.t_appear
    sct = rec.t_enter - rec.t_first_key
    miss = levenshtein(rec.typed, rec.target)
    acc = accuracy_pct(len(rec.target), miss)
    if sct > 0.0:
        return TypingMetrics(
            fat=fat, sct=sct, miss_types=miss, accuracy=acc,
            wpm=words_per_minute(len(rec.target), sct),
            cpm=chars_per_minute(len(rec.typed), sct),
        )
    return TypingMetrics(
        fat=fat, sct=sct, miss_types=miss, accuracy=acc,
        wpm=None, cpm=None, degenerate=True,
    )


# -- pairwise F-test for variances ------------------------------------------


@dataclass(frozen=True)
class FTestResult:
    f_stat: float
    dof: tuple[int, int]
    p_value: float


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz's method)."""
    max_iter = 300
    eps = 3e-15
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction failed to converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
             + a * math.log(x) + b * math.log1p(-x))
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, d1: int, d2: int) -> float:
    """Survival function 1 - F_cdf(f; d1, d2) via the incomplete beta."""
    if f <= 0.0:
        return 1.0
    # 1 - I_{d1 f/(d1 f + d2)}(d1/2, d2/2) evaluated through the complement
    # for numerical stability at large f.
    return betainc_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


def _sample_variance(values: Sequence[float]) -> float:
    n = len(values)
    if n < 2:
        raise ValueError("each sample needs n >= 2")
    mean = sum(values) / n
    return sum((v - mean) ** 2 for v in values) / (n - 1)


def f_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> FTestResult:
    """One-sided F ratio of sample variances, s2_A / s2_B.

    Convention: pass the nominally larger-variance sample as A.  Raises
    DegenerateVariance when B has zero variance.
    """
    va = _sample_variance(sample_a)
    vb = _sample_variance(sample_b)
    if vb == 0.0:
        raise DegenerateVariance("sample B has zero variance")
    f = va / vb
    dof = (len(sample_a) - 1, len(sample_b) - 1)
    return FTestResult(f_stat=f, dof=dof, p_value=f_sf(f, dof[0], dof[1]))


# -- usability questionnaire ------------------------------------------------


@dataclass(frozen=True)
class SusResponse:
    """Ten Likert ratings in 1..5, alternating positive/negative items."""

    ratings: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.ratings) != SUS_ITEMS:
            raise ValueError(f"need exactly {SUS_ITEMS} ratings")
        for r in self.ratings:
            if not isinstance(r, int) or not SUS_MIN_RATING <= r <= SUS_MAX_RATING:
                raise ValueError(f"rating {r!r} outside {SUS_MIN_RATING}..{SUS_MAX_RATING}")


def sus_score(resp: SusResponse) -> float:
    """Usability score in [0, 100]; always a multiple of 2.5.

    Odd items contribute (rating - 1), even items (5 - rating); the sum is
    scaled by 2.5.
    """
    total = 0
    for i, r in enumerate(resp.ratings):
        total += (r - 1) if i % 2 == 0 else (5 - r)
    return total * 2.5


def sus_grade(score: float) -> str:
    if not 0.0 <= score <= 100.0:
        raise ValueError("score must be within 0..100")
    for cutoff, grade in SUS_GRADE_BANDS:
        if score >= cutoff:
            return grade
    return "F"


@dataclass(frozen=True)
class SusSummary:
    n: int
    item_means: tuple[float, ...]
    item_sds: tuple[float, ...]
    scores: tuple[float, ...]
    grades: tuple[str, ...]
    mean_score: float
    sd_score: float
    grade: str


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    return mean, math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))


def sus_summary(responses: Sequence[SusResponse]) -> SusSummary:
    """Column-wise item statistics plus the grade of the mean score."""
    if not responses:
        raise ValueError("need at least one response")
    scores = tuple(sus_score(r) for r in responses)
    item_means = []
    item_sds = []
    for i in range(SUS_ITEMS):
        mean, sd = _mean_sd([r.ratings[i] for r in responses])
        item_means.append(mean)
        item_sds.append(sd)
    mean_score, sd_score = _mean_sd(scores)
    return SusSummary(
        n=len(responses),
        item_means=tuple(item_means),
        item_sds=tuple(item_sds),
        scores=scores,
        grades=tuple(sus_grade(s) for s in scores),
        mean_score=mean_score,
        sd_score=sd_score,
        grade=sus_grade(mean_score),
    )


# -- file formats --------------------------------------------------------------


def read_trials_jsonl(path: str) -> list[TrialRecord]:
    out: list[TrialRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                out.append(TrialRecord(
                    trial=int(rec["trial"]),
                    width=float(rec["w"]),
                    center=(float(rec["cx"]), float(rec["cy"])),
                    path=[(float(x), float(y)) for x, y in rec["path"]],
                    t_start=float(rec["t_start"]),
                    t_end=float(rec["t_end"]),
                    miss_clicks=int(rec.get("miss_clicks", 0)),
                ))
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad trial record: {exc}") from exc
    return out


def write_trials_jsonl(path: str, trials: Iterable[TrialRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tr in trials:
            fh.write(json.dumps({
                "trial": tr.trial,
                "w": tr.width,
                "cx": tr.center[0],
                "cy": tr.center[1],
                "path": [[x, y] for x, y in tr.path],
                "t_start": tr.t_start,
                "t_end": tr.t_end,
                "miss_clicks": tr.miss_clicks,
            }) + "\n")


def read_typing_jsonl(path: str) -> list[TypingRecord]:
    out: list[TypingRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                out.append(TypingRecord(
                    target=str(rec["target"]),
                    typed=str(rec["typed"]),
                    keystrokes=int(rec["keystrokes"]),
                    t_appear=float(rec["t_appear"]),
                    t_first_key=float(rec["t_first_key"]),
                    t_enter=float(rec["t_enter"]),
                ))
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad typing record: {exc}") from exc
    return out


def write_typing_jsonl(path: str, records: Iterable[TypingRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "target": r.target,
                "typed": r.typed,
                "keystrokes": r.keystrokes,
                "t_appear": r.t_appear,
                "t_first_key": r.t_first_key,
                "t_enter": r.t_enter,
            }) + "\n")


def read_sus_csv(path: str) -> list[SusResponse]:
    """One respondent per row, ten rating columns.

    A header row and a leading label column (respondent id) are both
    accepted; the last ten numeric fields of each row are the ratings.
    """
    responses: list[SusResponse] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            cells = [c.strip() for c in row if c.strip()]
            if not cells:
                continue
            try:
                if len(cells) < SUS_ITEMS:
                    raise ValueError(f"need {SUS_ITEMS} integer ratings")
                ratings = tuple(int(c) for c in cells[-SUS_ITEMS:])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ValueError(f"{path}:{lineno}: need {SUS_ITEMS} integer ratings") from None
            try:
                responses.append(SusResponse(ratings=ratings))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return responses


def read_csv_column(path: str, column: str) -> list[float]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ValueError(f"{path}: no column named {column!r}")
        values: list[float] = []
        for lineno, row in enumerate(reader, 2):
            cell = (row.get(column) or "").strip()
            if not cell:
                continue
            try:
                values.append(float(cell))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric value {cell!r}") from exc
    return values


# -- report formatting ---------------------------------------------------------


STAT_COLUMNS = ("Mean", "SD", "Min", "25th Percentile", "50th Percentile",
                "75th Percentile", "Max")


def format_stats_table(rows: list[tuple[str, DescriptiveStats]]) -> str:
    """Completion-time table: one row per group with the full stat columns."""
    header = ["Group", "Tasks (n)", *STAT_COLUMNS]
    body = []
    for label, st in rows:
        body.append([
            label, str(st.n),
            f"{st.mean:.4f}", f"{st.sd:.4f}", f"{st.minimum:.4f}",
            f"{st.p25:.4f}", f"{st.p50:.4f}", f"{st.p75:.4f}", f"{st.maximum:.4f}",
        ])
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(r)))
    return "\n".join(lines)


def format_typing_table(rows: list[tuple[str, dict[str, float]]]) -> str:
    """Per-sentence mean metrics table (FAT, SCT, MissTypes, Accuracy, WPM, CPM)."""
    header = ["Sentence", "n", "Mean FAT", "Mean SCT", "Mean MissTypes",
              "Mean Accuracy", "Mean WPM", "Mean CPM"]
    body = []
    for sentence, m in rows:
        body.append([
            sentence, str(int(m["n"])),
            f"{m['fat']:.4f}", f"{m['sct']:.4f}", f"{m['miss_types']:.4f}",
            f"{m['accuracy']:.2f}%", f"{m['wpm']:.4f}", f"{m['cpm']:.4f}",
        ])
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(r)))
    return "\n".join(lines)


def typing_means(records: Sequence[TypingRecord]) -> list[tuple[str, dict[str, float]]]:
    """Group records by target sentence (in order of first appearance)."""
    order: list[str] = []
    grouped: dict[str, list[TypingMetrics]] = {}
    for rec in records:
        if rec.target not in grouped:
            order.append(rec.target)
            grouped[rec.target] = []
        grouped[rec.target].append(typing_metrics(rec))
    rows = []
    for sentence in order:
        ms = grouped[sentence]
        usable = [m for m in ms if not m.degenerate]
        rows.append((sentence, {
            "n": float(len(ms)),
            "fat": sum(m.fat for m in ms) / len(ms),
            "sct": sum(m.sct for m in ms) / len(ms),
            "miss_types": sum(m.miss_types for m in ms) / len(ms),
            "accuracy": sum(m.accuracy for m in ms) / len(ms),
            "wpm": sum(m.wpm for m in usable) / len(usable) if usable else float("nan"),
            "cpm": sum(m.cpm for m in usable) / len(usable) if usable else float("nan"),
        }))
    return rows


def format_sus_table(summary: SusSummary) -> str:
    header = ["Respondent", *[f"SUS{i + 1}" for i in range(SUS_ITEMS)], "Score", "Grade"]
    body = []
    for i, (score, grade) in enumerate(zip(summary.scores, summary.grades), 1):
        body.append([f"R{i}", *[""] * SUS_ITEMS, f"{score:.2f}", grade])
    mean_row = ["Mean", *[f"{m:.2f}" for m in summary.item_means],
                f"{summary.mean_score:.2f}", summary.grade]
    sd_row = ["SD", *[f"{s:.2f}" for s in summary.item_sds], f"{summary.sd_score:.2f}", ""]
    body.extend([mean_row, sd_row])
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    lines.append("  ".join("-" * w for w in widths))
    for r in body:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(r)))
    return "\n".join(lines)
