"""
Foreground calibration of the TDC stage delays.

A full-scale differential ramp is converted with only the first k+1 TDC
decisions enabled. The codes bordering stage k's decision threshold (the
interior codes whose two least significant bits differ) have a width set
by ΔT_k alone. Their counts are compared with the ideal quantization of
the same ramp, so the VTC transfer drops out and the deviation measures
the stage's delay error directly. The stage's tuning codes are adjusted
and the histogram re-acquired until that error is within tolerance or
the iteration budget is spent. Stages are processed MSB first, rising
bank before falling bank.

The conventional delay cell moves both edges, so it belongs to the
rising pass and a move is only accepted when the falling bank can still
be trimmed back with its own DDU code.
"""

import logging
from typing import Callable, NamedTuple, Optional

import numpy as np

from src.adc import TimeDomainAdc
from src.core import ConfigurationError, Polarity, RngStream
from src.tdc import CONV_MAX_CODE, DDU_MAX_CODE, N_STAGES, StageConfig, TdcConfig

from .schema import CalibReport, CalibSpec, SearchStrategy, StageCalibration

logger = logging.getLogger(__name__)

MIN_HITS_PER_CODE = 64

# stream ids under the calibration stream
PRE_POST_STREAM = 0
SEARCH_STREAM = 2


# =============================================================================
# Histogram evaluation
# =============================================================================


def required_ramp_points(bit_depth: int) -> int:
    return MIN_HITS_PER_CODE * (1 << bit_depth)


def _check_depth(bit_depth: int, spec: CalibSpec) -> None:
    if not 1 <= bit_depth <= N_STAGES:
        raise ConfigurationError(
            f"bit_depth must lie in [1, {N_STAGES}], got {bit_depth}", field="bit_depth"
        )
    needed = required_ramp_points(bit_depth)
    if spec.ramp_points < needed:
        raise ConfigurationError(
            f"ramp_points {spec.ramp_points} too small for bit depth {bit_depth} "
            f"(need {needed})",
            field="calib.ramp_points",
        )


def partial_dnl(
    adc: TimeDomainAdc,
    bit_depth: int,
    polarity: Polarity,
    spec: CalibSpec,
    rng: RngStream,
) -> np.ndarray:
    """
    DNL of one bank with only the first ``bit_depth`` decisions enabled.

    The ramp spans the full scale exactly, so the ideal count per code is
    ``ramp_points / 2^bit_depth``. Endpoint codes are excluded; at
    ``bit_depth`` 1 there are no interior codes and the result is empty.

    Args:
        adc: Converter under calibration
        bit_depth: Number of enabled output bits (1..8)
        polarity: Bank whose histogram is collected
        spec: Calibration settings (ramp_points)
        rng: Stream for jitter and metastability draws

    Returns:
        DNL of codes 1..2^bit_depth - 2, in units of the bit_depth code width

    Raises:
        ConfigurationError: If bit_depth is out of range or the ramp has
            fewer than 64 points per code
    """
    _check_depth(bit_depth, spec)
    n_codes = 1 << bit_depth
    codes = adc.ramp_codes(polarity, spec.ramp_points, rng, bit_depth=bit_depth)
    hist = np.bincount(codes, minlength=n_codes)
    expected = spec.ramp_points / n_codes
    return hist[1:-1] / expected - 1.0


def stage_dnl(
    adc: TimeDomainAdc,
    bit_depth: int,
    polarity: Polarity,
    spec: CalibSpec,
    rng: RngStream,
) -> np.ndarray:
    """
    Like ``partial_dnl``, but each code is normalized by the count the
    ideal quantizer gives for the same ramp samples.

    A compressed or expanded VTC transfer changes both counts alike, so
    what remains is the deviation of the TDC thresholds. Codes the
    reference never hits fall back to the uniform count.
    """
    _check_depth(bit_depth, spec)
    n_codes = 1 << bit_depth
    codes = adc.ramp_codes(polarity, spec.ramp_points, rng, bit_depth=bit_depth)
    hist = np.bincount(codes, minlength=n_codes)
    ideal = adc.ramp_reference(polarity, spec.ramp_points, rng, bit_depth=bit_depth)
    reference = np.bincount(ideal, minlength=n_codes).astype(float)
    reference[reference == 0] = spec.ramp_points / n_codes
    return hist[1:-1] / reference[1:-1] - 1.0


def stage_codes(bit_depth: int) -> np.ndarray:
    """Interior codes whose width is set by the last enabled stage's ΔT."""
    codes = np.arange(1, (1 << bit_depth) - 1)
    return codes[np.isin(codes & 3, (1, 2))]


def stage_score(dnl: np.ndarray, bit_depth: int) -> float:
    """Max |DNL| of the stage codes, in full-resolution LSB."""
    if dnl.size == 0:
        return 0.0
    selected = dnl[stage_codes(bit_depth) - 1]
    return float(np.max(np.abs(selected)) * (1 << (N_STAGES - bit_depth)))


def full_depth_max_dnl(
    adc: TimeDomainAdc, polarity: Polarity, spec: CalibSpec, rng: RngStream
) -> float:
    dnl = partial_dnl(adc, N_STAGES, polarity, spec, rng)
    return float(np.max(np.abs(dnl)))


# =============================================================================
# Stage search
# =============================================================================


class _Choice(NamedTuple):
    score: float
    code: int


def _ddu_code(stage: StageConfig, polarity: Polarity) -> int:
    return stage.ddu.code_rise if polarity is Polarity.RISING else stage.ddu.code_fall


def _ddu_field(polarity: Polarity) -> str:
    return "code_rise" if polarity is Polarity.RISING else "code_fall"


class _StageSearch:
    """
    Memoized histogram scores of one stage.

    Scores are kept per (bank, conventional code) row, each row indexed by
    that bank's DDU code. Every candidate is built from the stage as it was
    when the search started, so trying one bank never leaves the other
    bank's code moved.
    """

    def __init__(
        self,
        adc: TimeDomainAdc,
        index: int,
        spec: CalibSpec,
        rng: RngStream,
    ):
        self.adc = adc
        self.spec = spec
        self.rng = rng
        self.bit_depth = index + 1
        self.original = adc.tdc.stage(index)
        self.histograms = 0
        self.rows: dict[tuple[Polarity, int], dict[int, float]] = {}

    @property
    def exhausted(self) -> bool:
        return self.histograms >= self.spec.max_iterations_per_stage

    def within(self, score: float) -> bool:
        return score <= self.spec.dnl_tolerance

    def stage_with(self, polarity: Polarity, conv_code: int, code: int) -> StageConfig:
        return self.original.with_codes(conv_code=conv_code, **{_ddu_field(polarity): code})

    def evaluate(self, polarity: Polarity, conv_code: int, code: int) -> Optional[float]:
        """Score one candidate; None once the budget is spent."""
        row = self.rows.setdefault((polarity, conv_code), {})
        if code in row:
            return row[code]
        if self.exhausted:
            return None
        self.adc.replace_stage(self.stage_with(polarity, conv_code, code))
        dnl = stage_dnl(
            self.adc, self.bit_depth, polarity, self.spec, self.rng.substream(self.histograms)
        )
        self.histograms += 1
        score = row[code] = stage_score(dnl, self.bit_depth)
        logger.debug(
            f"Stage {self.original.index} {polarity.value} conv={conv_code} "
            f"ddu={code} score={score:.4f} LSB"
        )
        return score

    def best(self, polarity: Polarity, conv_code: int) -> Optional[_Choice]:
        row = self.rows.get((polarity, conv_code))
        if not row:
            return None
        start = _ddu_code(self.original, polarity)
        code = min(row, key=lambda c: (row[c], abs(c - start), c))
        return _Choice(row[code], code)

    def tune(self, polarity: Polarity, conv_code: int, start: int) -> Optional[_Choice]:
        """Trim one bank's DDU code with the conventional code held."""
        ROW_SEARCHES[self.spec.search_strategy](self, polarity, conv_code, start)
        return self.best(polarity, conv_code)


def _row_exhaustive(search: _StageSearch, polarity: Polarity, conv_code: int, start: int) -> None:
    for code in sorted(range(DDU_MAX_CODE + 1), key=lambda c: (abs(c - start), c)):
        score = search.evaluate(polarity, conv_code, code)
        if score is None or search.within(score):
            return


def _row_greedy(search: _StageSearch, polarity: Polarity, conv_code: int, start: int) -> None:
    current = start
    score = search.evaluate(polarity, conv_code, current)
    while score is not None and not search.within(score):
        scored = []
        for move in (current - 1, current + 1):
            if not 0 <= move <= DDU_MAX_CODE:
                continue
            candidate = search.evaluate(polarity, conv_code, move)
            if candidate is None:
                break
            scored.append((candidate, abs(move - start), move))
        if not scored or min(scored)[0] >= score:
            return
        score, _, current = min(scored)


ROW_SEARCHES: dict[SearchStrategy, Callable[[_StageSearch, Polarity, int, int], None]] = {
    SearchStrategy.EXHAUSTIVE: _row_exhaustive,
    SearchStrategy.GREEDY: _row_greedy,
}


def _conv_order(search: _StageSearch, code: int) -> list[int]:
    """Conventional codes to try after the held one."""
    held = search.original.conv_code
    others = [c for c in range(CONV_MAX_CODE + 1) if c != held]
    if search.spec.search_strategy is SearchStrategy.EXHAUSTIVE:
        return sorted(others, key=lambda c: (abs(c - held), c))
    # greedy restarts from the conventional code scoring best at the current DDU code
    scores = {}
    for conv in others:
        score = search.evaluate(Polarity.RISING, conv, code)
        if score is None:
            break
        scores[conv] = score
    return sorted(scores, key=lambda c: (scores[c], abs(c - held), c))


def _move_conventional(search: _StageSearch, choice: _Choice) -> tuple[_Choice, int]:
    """
    Try the other conventional codes for a rising stage the DDU cannot trim.

    A move is kept only if it improves the rising score and the falling
    bank can still reach max(tolerance, what it reaches at the held code).
    """
    held = search.original.conv_code
    fall_start = search.original.ddu.code_fall
    floor = search.tune(Polarity.FALLING, held, fall_start)
    if floor is None:
        return choice, held
    limit = max(search.spec.dnl_tolerance, floor.score)

    best, best_conv = choice, held
    for conv in _conv_order(search, choice.code):
        rising = search.tune(Polarity.RISING, conv, best.code)
        if rising is None:
            break
        if rising.score >= best.score:
            continue
        falling = search.tune(Polarity.FALLING, conv, fall_start)
        if falling is None:
            break
        if falling.score > limit:
            logger.info(
                f"Stage {search.original.index}: conventional code {conv} would leave the "
                f"falling bank at {falling.score:.4f} LSB; keeping {best_conv}"
            )
            continue
        best, best_conv = rising, conv
        if search.within(best.score):
            break
    return best, best_conv


def calibrate_stage(
    adc: TimeDomainAdc,
    k: int,
    polarity: Polarity,
    spec: CalibSpec,
    rng: RngStream,
    pass_index: int = 0,
) -> StageCalibration:
    """
    Tune one stage's ΔT on one bank.

    The bank's DDU code is searched first with the conventional code held.
    On the rising bank, if that cannot reach the tolerance, the other
    conventional codes are tried as described in ``_move_conventional``.
    The falling bank never moves the conventional code, so it leaves the
    rising codes untouched. The best codes found are left applied to ``adc``.

    Args:
        adc: Converter under calibration (mutated)
        k: Stage index, 1..7
        polarity: Bank being calibrated
        spec: Calibration settings
        rng: Stream for this stage's histograms (one child per histogram)
        pass_index: Pass number recorded on the entry

    Returns:
        StageCalibration; converged is False when the budget ran out or the
        tuning span cannot reach the tolerance
    """
    if not 1 <= k < N_STAGES:
        raise ConfigurationError(f"stage {k} has no tunable ΔT", field="stage")
    search = _StageSearch(adc, k, spec, rng)
    original = search.original
    start = _ddu_code(original, polarity)

    choice = search.tune(polarity, original.conv_code, start)
    conv = original.conv_code
    if (
        not search.within(choice.score)
        and polarity is Polarity.RISING
        and original.has_conventional
    ):
        choice, conv = _move_conventional(search, choice)

    stage = search.stage_with(polarity, conv, choice.code)
    adc.replace_stage(stage)
    converged = search.within(choice.score)
    entry = StageCalibration(
        stage=k,
        polarity=polarity,
        iterations=search.histograms,
        code_rise=stage.ddu.code_rise,
        code_fall=stage.ddu.code_fall,
        conv_code=stage.conv_code,
        max_dnl=choice.score,
        converged=converged,
        pass_index=pass_index,
        codes_changed=(conv, choice.code) != (original.conv_code, start),
    )
    if converged:
        logger.info(
            f"Stage {k} {polarity.value} converged after {entry.iterations} histograms "
            f"(max|DNL| {choice.score:.4f} LSB, conv {conv}, ddu {choice.code})"
        )
    else:
        logger.warning(
            f"Stage {k} {polarity.value} did not converge after {entry.iterations} histograms "
            f"(best max|DNL| {choice.score:.4f} LSB at conv {conv}, ddu {choice.code})"
        )
    return entry


# =============================================================================
# Full flow
# =============================================================================


def _measure(adc: TimeDomainAdc, spec: CalibSpec, rng: RngStream) -> dict[str, float]:
    return {
        polarity.value: full_depth_max_dnl(adc, polarity, spec, rng.substream(polarity.bank))
        for polarity in Polarity
    }


def _worsened(pre: dict[str, float], post: dict[str, float]) -> list[str]:
    return [bank for bank in post if post[bank] > pre[bank]]


def _restore_falling_codes(tdc: TdcConfig, original: TdcConfig) -> TdcConfig:
    for stage in original.stages:
        current = tdc.stage(stage.index)
        tdc = tdc.with_stage(current.with_codes(code_fall=stage.ddu.code_fall))
    return tdc


def run_foreground_calibration(
    adc: TimeDomainAdc, spec: CalibSpec, rng: RngStream
) -> CalibReport:
    """
    Calibrate every stage of both banks, MSB first.

    The rising bank is calibrated before the falling bank and the sequence
    is repeated ``spec.passes`` times. Pre- and post-calibration DNL use
    the same random stream, so unchanged codes measure identically.

    If only the falling bank ends up worse, its own codes are restored
    and the rising calibration is kept. If the rising bank is worse, or
    restoring the falling codes does not help, every code is restored.

    Args:
        adc: Converter to calibrate (mutated to the calibrated codes)
        spec: Calibration settings
        rng: Parent stream

    Returns:
        CalibReport with one entry per (pass, bank, stage)
    """
    original = adc.tdc
    report = CalibReport()
    measure_rng = rng.substream(PRE_POST_STREAM)
    report.pre_max_dnl = _measure(adc, spec, measure_rng)
    logger.info(f"Pre-calibration max|DNL|: {report.pre_max_dnl}")

    for pass_index in range(spec.passes):
        pass_rng = rng.substream(SEARCH_STREAM + pass_index)
        for polarity in Polarity:
            bank_rng = pass_rng.substream(polarity.bank)
            for k in range(1, N_STAGES):
                entry = calibrate_stage(
                    adc, k, polarity, spec, bank_rng.substream(k), pass_index=pass_index
                )
                report.per_stage.append(entry)
                report.total_histograms += entry.iterations

    report.post_max_dnl = _measure(adc, spec, measure_rng)
    worse = _worsened(report.pre_max_dnl, report.post_max_dnl)
    if worse == [Polarity.FALLING.value]:
        logger.warning("Calibration worsened the falling bank; restoring its DDU codes")
        adc.tdc = _restore_falling_codes(adc.tdc, original)
        report.post_max_dnl = _measure(adc, spec, measure_rng)
        report.reverted_banks = [Polarity.FALLING.value]
        worse = _worsened(report.pre_max_dnl, report.post_max_dnl)
    if worse:
        logger.warning(f"Calibration worsened full-depth DNL on {worse}; restoring original codes")
        adc.tdc = original
        report.post_max_dnl = dict(report.pre_max_dnl)
        report.reverted_banks = [polarity.value for polarity in Polarity]
    logger.info(
        f"Calibration finished: {report.total_histograms} histograms, "
        f"post max|DNL| {report.post_max_dnl}"
    )
    return report


def calibration_overlay(tdc: TdcConfig) -> dict:
    """Calibrated tuning codes as a ``[tdc]`` spec section."""
    return {
        "tdc": {
            "code_rise": [stage.ddu.code_rise for stage in tdc.stages],
            "code_fall": [stage.ddu.code_fall for stage in tdc.stages],
            "conv_code": [stage.conv_code for stage in tdc.stages],
        }
    }
